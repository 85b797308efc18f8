"""Quantized RIS weight vectors and the simulated-annealing solver.

Weights live in the M-point unit-circle set {exp(j*2*pi*k/M)}. The annealer is
a seeded Metropolis chain with the harmonic cooling schedule [1, 1/2, ..., 1/T],
rescaled at startup by the objective's spread so acceptance rates do not depend
on the objective's units (squared residual vs dB gain).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .pofield import FieldVector
from .geometry import FarFieldDirection

_DIGITS = "0123456789abcdefghijklmnopqrstuvwxyz"


@dataclass(frozen=True)
class WeightVector:
    phase_indices: np.ndarray  # (N,) integer
    m_levels: int

    def __post_init__(self):
        idx = np.asarray(self.phase_indices)
        if self.m_levels < 2:
            raise ValueError(f"m_levels must be >= 2, got {self.m_levels}")
        if idx.ndim != 1 or not np.issubdtype(idx.dtype, np.integer):
            raise ValueError("phase_indices must be a 1-d integer array")
        if idx.size and (idx.min() < 0 or idx.max() >= self.m_levels):
            raise ValueError("phase index outside {0, ..., M-1}")
        object.__setattr__(self, "phase_indices", idx)

    @property
    def n(self) -> int:
        return self.phase_indices.size

    def values(self) -> np.ndarray:
        """Realized unit-modulus weights exp(j*2*pi*k/M)."""
        return np.exp(2j * math.pi * self.phase_indices / self.m_levels)

    def to_base_m_string(self) -> str:
        if self.m_levels > len(_DIGITS):
            raise ValueError("base-M string supports M <= 36")
        return "".join(_DIGITS[k] for k in self.phase_indices)

    @classmethod
    def from_base_m_string(cls, s: str, m_levels: int) -> "WeightVector":
        idx = np.array([_DIGITS.index(c) for c in s.strip()], dtype=np.int64)
        return cls(idx, m_levels)

    @classmethod
    def uniform(cls, n: int, m_levels: int) -> "WeightVector":
        """All indices zero: every realized weight equals 1."""
        return cls(np.zeros(n, dtype=np.int64), m_levels)


def phase_values(indices: np.ndarray, m_levels: int) -> np.ndarray:
    """exp(j*2*pi*k/M) for an array of index rows (vectorized over axis 0)."""
    return np.exp(2j * math.pi * np.asarray(indices) / m_levels)


@dataclass(frozen=True)
class NullingProblem:
    """Single-direction cancellation: A = e_{psi,phi}^T (one row), y = -E_f."""

    field_vector: FieldVector
    target: FarFieldDirection

    @property
    def n(self) -> int:
        return self.field_vector.element_copol.size


def cost(problem: NullingProblem, w: WeightVector) -> float:
    """Squared residual |A w - y|^2 = |e^T w + E_f|^2."""
    fv = problem.field_vector
    if w.n != fv.element_copol.size:
        raise ValueError("weight length does not match field vector")
    resid = fv.element_copol @ w.values() + fv.fixed_copol
    return float(abs(resid) ** 2)


@dataclass
class SAConfig:
    iterations: int = 4000
    schedule_length: int = 100  # cooling schedule [1, 1/2, ..., 1/T]
    rng_seed: int = 0
    m_levels: int = 4

    def __post_init__(self):
        if self.iterations < 1:
            raise ValueError("iterations must be >= 1")
        if self.schedule_length < 1:
            raise ValueError("schedule_length must be >= 1")

    def schedule(self) -> np.ndarray:
        return 1.0 / np.arange(1, self.schedule_length + 1)


def neighbor(w: WeightVector, rng: np.random.Generator) -> WeightVector:
    """Reassign one uniformly chosen index to a uniformly chosen level.

    May return a vector equal to the input when the drawn level matches the
    current one; this mirrors drawing n and m independently.
    """
    idx = w.phase_indices.copy()
    n = int(rng.integers(w.n))
    m = int(rng.integers(w.m_levels))
    idx[n] = m
    return WeightVector(idx, w.m_levels)


@dataclass
class Trajectory:
    """Per-iteration state of one annealing chain (state after accept/reject)."""

    states: np.ndarray      # (iterations, N) uint8 phase indices
    objectives: np.ndarray  # (iterations,) objective of the current state
    accepted: np.ndarray    # (iterations,) bool, proposal accepted at this step
    m_levels: int
    best_objective: float = math.nan
    best_state: np.ndarray = field(default=None, repr=False)

    def __len__(self):
        return self.objectives.size

    def best_weights(self) -> WeightVector:
        return WeightVector(self.best_state.astype(np.int64), self.m_levels)

    def weights_at(self, k: int) -> WeightVector:
        return WeightVector(self.states[k].astype(np.int64), self.m_levels)


def sa_optimize(n_elements: int, config: SAConfig,
                objective: Callable[[WeightVector], float]) -> tuple[WeightVector, Trajectory]:
    """Seeded Metropolis annealing over the quantized weight set.

    The raw harmonic schedule is scaled by the standard deviation of the
    objective over 100 random vectors drawn at startup (from the same stream,
    so the whole run is a pure function of the seed). Returns the best-seen
    vector and the full per-iteration trajectory.
    """
    rng = np.random.default_rng(config.rng_seed)
    m = config.m_levels

    calib = np.empty(100)
    for i in range(100):
        calib[i] = objective(WeightVector(rng.integers(m, size=n_elements), m))
    temp_scale = float(np.std(calib))
    if temp_scale == 0.0:
        temp_scale = 1.0
    schedule = temp_scale * config.schedule()
    steps_per_temp = math.ceil(config.iterations / config.schedule_length)

    current = WeightVector(rng.integers(m, size=n_elements), m)
    f_cur = objective(current)
    best, f_best = current, f_cur

    states = np.empty((config.iterations, n_elements), dtype=np.uint8)
    objectives = np.empty(config.iterations)
    accepted = np.empty(config.iterations, dtype=bool)

    for k in range(config.iterations):
        temp = schedule[min(k // steps_per_temp, config.schedule_length - 1)]
        candidate = neighbor(current, rng)
        f_new = objective(candidate)
        if f_new <= f_cur:
            take = True
        else:
            take = rng.random() < math.exp(max(-(f_new - f_cur) / temp, -700.0))
        if take:
            current, f_cur = candidate, f_new
            if f_cur < f_best:
                best, f_best = current, f_cur
        states[k] = current.phase_indices
        objectives[k] = f_cur
        accepted[k] = take

    traj = Trajectory(states=states, objectives=objectives, accepted=accepted,
                      m_levels=m, best_objective=f_best,
                      best_state=best.phase_indices.copy())
    return best, traj


def brute_force_min(problem: NullingProblem, m_levels: int,
                    limit: int = 10_000_000) -> tuple[WeightVector, float]:
    """Exact minimizer of the quantized cancellation cost by enumeration.

    Ties break to the lexicographically smallest index vector (the enumeration
    order is lexicographic and only strict improvements replace the incumbent).
    """
    n = problem.n
    if m_levels ** n > limit:
        raise ValueError(f"search space {m_levels}**{n} exceeds guard {limit}")
    e = problem.field_vector.element_copol
    y = -problem.field_vector.fixed_copol

    levels = np.exp(2j * math.pi * np.arange(m_levels) / m_levels)
    best_idx, best_cost = None, math.inf
    idx = np.zeros(n, dtype=np.int64)
    while True:
        resid = e @ levels[idx] - y
        c = abs(resid) ** 2
        if c < best_cost:
            best_cost, best_idx = c, idx.copy()
        # lexicographic increment with the last coordinate fastest
        pos = n - 1
        while pos >= 0:
            idx[pos] += 1
            if idx[pos] < m_levels:
                break
            idx[pos] = 0
            pos -= 1
        if pos < 0:
            break
    return WeightVector(best_idx, m_levels), float(best_cost)


def write_trajectory_csv(path, trajectory: Trajectory,
                         header_comments: Sequence[str] = ()) -> None:
    """CSV schema: iter, objective, accepted(0/1), phase_indices(base-M string)."""
    with open(path, "w") as f:
        for line in header_comments:
            f.write(f"# {line}\n")
        f.write("iter,objective,accepted,phase_indices\n")
        for k in range(len(trajectory)):
            s = trajectory.weights_at(k).to_base_m_string()
            f.write(f"{k},{trajectory.objectives[k]:.17g},"
                    f"{int(trajectory.accepted[k])},{s}\n")
