import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from rimnull.geometry import FarFieldDirection
from rimnull.pofield import FieldVector
from rimnull.weights import (NullingProblem, SAConfig, Trajectory, WeightVector,
                             brute_force_min, cost, neighbor, phase_values,
                             sa_optimize, write_trajectory_csv)


def _problem(e, ef):
    fv = FieldVector(direction=FarFieldDirection(0.01, 0.0),
                     fixed_copol=complex(ef),
                     element_copol=np.asarray(e, dtype=complex),
                     q_exponent=1.14)
    return NullingProblem(fv, fv.direction)


# --- WeightVector ---------------------------------------------------------

def test_weight_values_are_quantized_unit_phases():
    w = WeightVector(np.array([0, 1, 2, 3]), 4)
    assert np.allclose(w.values(), [1, 1j, -1, -1j])


def test_weight_validation():
    with pytest.raises(ValueError):
        WeightVector(np.array([0, 4]), 4)
    with pytest.raises(ValueError):
        WeightVector(np.array([-1]), 4)
    with pytest.raises(ValueError):
        WeightVector(np.array([0.5]), 4)
    with pytest.raises(ValueError):
        WeightVector(np.array([0]), 1)


@given(st.integers(2, 36), st.lists(st.integers(0, 35), min_size=1,
                                    max_size=50))
def test_base_m_string_roundtrip(m, idx):
    idx = [k % m for k in idx]
    w = WeightVector(np.array(idx, dtype=np.int64), m)
    back = WeightVector.from_base_m_string(w.to_base_m_string(), m)
    assert np.array_equal(back.phase_indices, w.phase_indices)
    assert back.m_levels == m


def test_uniform_weights_are_all_ones():
    w = WeightVector.uniform(5, 4)
    assert np.allclose(w.values(), 1.0)


def test_phase_values_matches_weight_values():
    idx = np.array([[0, 1], [2, 3]])
    vals = phase_values(idx, 4)
    assert np.allclose(vals[0], WeightVector(idx[0], 4).values())
    assert np.allclose(vals[1], WeightVector(idx[1], 4).values())


# --- cost ------------------------------------------------------------------

def test_cost_hand_examples():
    # single element, e = 1, fixed field 1: w=+1 doubles, w=-1 cancels
    p = _problem([1.0], 1.0)
    assert cost(p, WeightVector(np.array([0]), 4)) == pytest.approx(4.0)
    assert cost(p, WeightVector(np.array([2]), 4)) == pytest.approx(0.0)
    assert cost(p, WeightVector(np.array([1]), 4)) == pytest.approx(2.0)


def test_cost_length_mismatch():
    p = _problem([1.0, 1.0], 0.0)
    with pytest.raises(ValueError):
        cost(p, WeightVector(np.array([0]), 4))


def test_cost_global_phase_invariance_without_fixed_field():
    # with no fixed term, rotating every index by the same step preserves cost
    rng = np.random.default_rng(3)
    p = _problem(rng.standard_normal(6) + 1j * rng.standard_normal(6), 0.0)
    idx = rng.integers(0, 4, size=6)
    base = cost(p, WeightVector(idx, 4))
    for shift in range(1, 4):
        assert cost(p, WeightVector((idx + shift) % 4, 4)) == \
            pytest.approx(base)


# --- neighbor ---------------------------------------------------------------

@given(st.integers(0, 10_000))
def test_neighbor_changes_at_most_one_position(seed):
    rng = np.random.default_rng(seed)
    w = WeightVector(rng.integers(0, 4, size=12), 4)
    v = neighbor(w, rng)
    assert v.m_levels == w.m_levels
    assert (v.phase_indices != w.phase_indices).sum() <= 1


def test_neighbor_proposal_distribution_is_uniform():
    # (position, level) pairs should be uniform: chi-square over N*M cells
    rng = np.random.default_rng(7)
    n, m, draws = 5, 4, 20000
    w = WeightVector(np.full(n, 9 % m, dtype=np.int64), m)
    counts = np.zeros((n, m))
    for _ in range(draws):
        v = neighbor(w, rng)
        changed = np.flatnonzero(v.phase_indices != w.phase_indices)
        pos = changed[0] if changed.size else None
        if pos is None:
            continue  # resampled the current level; counted via level cells below
        counts[pos, v.phase_indices[pos]] += 1
    # each (pos, level != current) cell has probability 1/(n*m)
    expected = draws / (n * m)
    observed = counts[counts > 0]
    chi2 = ((observed - expected) ** 2 / expected).sum()
    # n*(m-1) = 15 occupied cells; generous 99.9% chi-square bound
    assert chi2 < 40.0


# --- SA ----------------------------------------------------------------------

def test_schedule_is_scaled_harmonic():
    cfg = SAConfig(iterations=10, schedule_length=4)
    assert np.allclose(cfg.schedule(), [1.0, 0.5, 1 / 3, 0.25])


def test_sa_config_validation():
    with pytest.raises(ValueError):
        SAConfig(iterations=0)
    with pytest.raises(ValueError):
        SAConfig(schedule_length=0)


def test_sa_is_deterministic_per_seed():
    p = _problem(np.array([1.0, 1j, -0.5]), 0.3 + 0.1j)
    cfg = SAConfig(iterations=200, schedule_length=10, rng_seed=11)
    obj = lambda w: cost(p, w)
    b1, t1 = sa_optimize(3, cfg, obj)
    b2, t2 = sa_optimize(3, cfg, obj)
    assert np.array_equal(t1.states, t2.states)
    assert np.array_equal(t1.objectives, t2.objectives)
    assert np.array_equal(b1.phase_indices, b2.phase_indices)
    _, t3 = sa_optimize(3, SAConfig(iterations=200, schedule_length=10,
                                    rng_seed=12), obj)
    assert not np.array_equal(t1.states, t3.states)


def test_sa_trajectory_bookkeeping():
    p = _problem(np.array([1.0, -1.0]), 0.5)
    cfg = SAConfig(iterations=50, schedule_length=5, rng_seed=0)
    best, traj = sa_optimize(2, cfg, lambda w: cost(p, w))
    assert len(traj) == 50
    assert traj.states.shape == (50, 2)
    assert traj.best_objective == pytest.approx(
        min(cost(p, traj.weights_at(k)) for k in range(50)))
    assert cost(p, best) == pytest.approx(traj.best_objective)
    # logged objective matches the recomputed cost of each logged state
    for k in [0, 10, 49]:
        assert traj.objectives[k] == pytest.approx(cost(p, traj.weights_at(k)))


def test_brute_force_matches_independent_enumeration():
    rng = np.random.default_rng(21)
    e = rng.standard_normal(4) + 1j * rng.standard_normal(4)
    ef = complex(rng.standard_normal(), rng.standard_normal())
    p = _problem(e, ef)
    w_best, c_best = brute_force_min(p, 4)
    # independent oracle: itertools product in a different order
    levels = np.exp(2j * math.pi * np.arange(4) / 4)
    c_min = min(abs(e @ levels[list(idx)] + ef) ** 2
                for idx in itertools.product(range(4), repeat=4))
    assert c_best == pytest.approx(c_min)
    assert cost(p, w_best) == pytest.approx(c_min)


def test_brute_force_guard():
    p = _problem(np.ones(20), 0.0)
    with pytest.raises(ValueError):
        brute_force_min(p, 4, limit=1000)


def test_quantization_refinement_never_hurts():
    # the M=4 phase set is a subset of M=8, so the optimum can only improve
    rng = np.random.default_rng(4)
    for _ in range(5):
        e = rng.standard_normal(3) + 1j * rng.standard_normal(3)
        ef = complex(rng.standard_normal(), rng.standard_normal())
        _, c4 = brute_force_min(_problem(e, ef), 4)
        _, c8 = brute_force_min(_problem(e, ef), 8)
        assert c8 <= c4 + 1e-12


def test_trajectory_csv_format(tmp_path):
    p = _problem(np.array([1.0, -1j]), 0.2)
    _, traj = sa_optimize(2, SAConfig(iterations=5, schedule_length=2,
                                      rng_seed=1), lambda w: cost(p, w))
    path = tmp_path / "traj.csv"
    write_trajectory_csv(path, traj, ["config_hash=abc"])
    lines = path.read_text().splitlines()
    assert lines[0] == "# config_hash=abc"
    assert lines[1] == "iter,objective,accepted,phase_indices"
    assert len(lines) == 2 + 5
    it, obj, acc, idx = lines[2].split(",")
    assert it == "0" and acc in ("0", "1") and len(idx) == 2
    assert float(obj) == pytest.approx(traj.objectives[0])
