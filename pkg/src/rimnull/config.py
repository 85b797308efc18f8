"""INI-backed experiment configuration with lossless round-trip and hashing.

One file describes a whole experiment: geometry, the theoretical/true feed
pair, the nulling target, annealing budgets, network hyperparameters, dataset
shape, pattern-sweep grid, and the output directory. Absent keys take the
documented defaults; unknown sections or keys are rejected with a diagnostic
naming them. ``config_hash`` fingerprints the canonical serialization so every
output file can embed the configuration that produced it.
"""

from __future__ import annotations

import configparser
import hashlib
import io
import math
from dataclasses import dataclass, field, fields

from .geometry import FarFieldDirection, FeedModel, ReflectorGeometry, build_geometry


class ConfigError(ValueError):
    """Malformed, unknown, or out-of-range configuration content."""


@dataclass
class GeometryConfig:
    diameter_m: float = 1.4
    rim_width_m: float = 0.1
    f_over_d: float = 0.4
    frequency_hz: float = 1.5e9


@dataclass
class FeedConfig:
    q_theoretical: float = 1.14
    q_true: float = 1.5
    i0_real: float = 1.0
    i0_imag: float = 0.0


@dataclass
class TargetConfig:
    psi_deg: float = 16.0
    phi_deg: float = 0.0


@dataclass
class SAConfigBlock:
    iterations: int = 60
    schedule_length: int = 30
    seed: int = 9000
    m_levels: int = 4


@dataclass
class NetConfig:
    width: int = 64
    blocks: int = 2
    learning_rate: float = 1e-3
    lr_decay: float = 0.05
    weight_decay: float = 1e-3
    epochs: int = 120
    batch_size: int = 128
    split_fraction: float = 0.9
    init_seed: int = 3
    train_seed: int = 101
    include_gain_feature: bool = True


@dataclass
class DatasetConfig:
    trajectories: int = 1334
    iterations: int = 60
    schedule_length: int = 100
    seed: int = 42
    noise_sigma_db: float = 0.0


@dataclass
class PatternConfig:
    psi_min_deg: float = 0.0
    psi_max_deg: float = 20.0
    psi_step_deg: float = 0.05
    phi_deg: float = 0.0


@dataclass
class QuadratureConfig:
    samples_per_wavelength: float = 12.0


@dataclass
class OutputConfig:
    directory: str = "results"


@dataclass
class ExperimentConfig:
    geometry: GeometryConfig = field(default_factory=GeometryConfig)
    feed: FeedConfig = field(default_factory=FeedConfig)
    target: TargetConfig = field(default_factory=TargetConfig)
    sa: SAConfigBlock = field(default_factory=SAConfigBlock)
    net: NetConfig = field(default_factory=NetConfig)
    dataset: DatasetConfig = field(default_factory=DatasetConfig)
    pattern: PatternConfig = field(default_factory=PatternConfig)
    quadrature: QuadratureConfig = field(default_factory=QuadratureConfig)
    output: OutputConfig = field(default_factory=OutputConfig)

    # --- derived object builders -------------------------------------------

    def build_geometry(self) -> ReflectorGeometry:
        g = self.geometry
        return build_geometry(g.diameter_m, g.rim_width_m, g.f_over_d,
                              g.frequency_hz)

    def theoretical_feed(self) -> FeedModel:
        return FeedModel(i0=complex(self.feed.i0_real, self.feed.i0_imag),
                         q_exponent=self.feed.q_theoretical)

    def true_feed(self) -> FeedModel:
        return FeedModel(i0=complex(self.feed.i0_real, self.feed.i0_imag),
                         q_exponent=self.feed.q_true)

    def target_direction(self) -> FarFieldDirection:
        return FarFieldDirection(math.radians(self.target.psi_deg),
                                 math.radians(self.target.phi_deg))


_SECTIONS = {
    "geometry": GeometryConfig,
    "feed": FeedConfig,
    "target": TargetConfig,
    "sa": SAConfigBlock,
    "net": NetConfig,
    "dataset": DatasetConfig,
    "pattern": PatternConfig,
    "quadrature": QuadratureConfig,
    "output": OutputConfig,
}


def _coerce(section: str, key: str, raw: str, target_type: type):
    try:
        if target_type is bool:
            lowered = raw.strip().lower()
            if lowered in ("true", "1", "yes", "on"):
                return True
            if lowered in ("false", "0", "no", "off"):
                return False
            raise ValueError(f"not a boolean: {raw!r}")
        if target_type is int:
            return int(raw)
        if target_type is float:
            return float(raw)
        return raw
    except ValueError as exc:
        raise ConfigError(
            f"[{section}] {key}: cannot parse {raw!r} as {target_type.__name__}"
        ) from exc


def parse_config(text: str) -> ExperimentConfig:
    """Parse INI text; unknown sections/keys and bad values raise ConfigError."""
    parser = configparser.ConfigParser(interpolation=None)
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"INI syntax error: {exc}") from exc

    cfg = ExperimentConfig()
    for section in parser.sections():
        if section not in _SECTIONS:
            raise ConfigError(f"unknown section [{section}]")
        block = getattr(cfg, section)
        known = {f.name: f.type for f in fields(type(block))}
        for key, raw in parser.items(section):
            if key not in known:
                raise ConfigError(f"unknown key [{section}] {key}")
            current = getattr(block, key)
            setattr(block, key, _coerce(section, key, raw, type(current)))
    _validate(cfg)
    return cfg


def load_config(path) -> ExperimentConfig:
    with open(path) as f:
        return parse_config(f.read())


def _validate(cfg: ExperimentConfig) -> None:
    if not (0.0 <= cfg.target.psi_deg < 90.0):
        raise ConfigError("[target] psi_deg must lie in [0, 90)")
    if cfg.sa.iterations < 1 or cfg.dataset.iterations < 1:
        raise ConfigError("iteration counts must be >= 1")
    if cfg.sa.m_levels < 2:
        raise ConfigError("[sa] m_levels must be >= 2")
    if cfg.dataset.trajectories < 1:
        raise ConfigError("[dataset] trajectories must be >= 1")
    if not (0.0 < cfg.net.split_fraction < 1.0):
        raise ConfigError("[net] split_fraction must lie in (0, 1)")
    if cfg.pattern.psi_step_deg <= 0:
        raise ConfigError("[pattern] psi_step_deg must be positive")
    if cfg.pattern.psi_max_deg <= cfg.pattern.psi_min_deg:
        raise ConfigError("[pattern] psi_max_deg must exceed psi_min_deg")
    if cfg.quadrature.samples_per_wavelength <= 0:
        raise ConfigError("[quadrature] samples_per_wavelength must be positive")


def serialize_config(cfg: ExperimentConfig) -> str:
    """Canonical INI text: fixed section/key order, repr-precision floats."""
    out = io.StringIO()
    for section, _ in _SECTIONS.items():
        block = getattr(cfg, section)
        out.write(f"[{section}]\n")
        for f in fields(type(block)):
            value = getattr(block, f.name)
            if isinstance(value, bool):
                value = "true" if value else "false"
            elif isinstance(value, float):
                value = repr(value)
            out.write(f"{f.name} = {value}\n")
        out.write("\n")
    return out.getvalue()


def config_hash(cfg: ExperimentConfig) -> str:
    """Short stable fingerprint of the canonical serialization."""
    return hashlib.sha256(serialize_config(cfg).encode()).hexdigest()[:16]


def describe_defaults() -> str:
    """Human-readable list of every key with default and unit, for --help."""
    units = {
        ("geometry", "diameter_m"): "m", ("geometry", "rim_width_m"): "m",
        ("geometry", "f_over_d"): "ratio", ("geometry", "frequency_hz"): "Hz",
        ("feed", "q_theoretical"): "exponent", ("feed", "q_true"): "exponent",
        ("feed", "i0_real"): "A", ("feed", "i0_imag"): "A",
        ("target", "psi_deg"): "deg", ("target", "phi_deg"): "deg",
        ("sa", "iterations"): "steps", ("sa", "schedule_length"): "temperatures",
        ("sa", "seed"): "rng seed", ("sa", "m_levels"): "phase levels",
        ("net", "width"): "neurons", ("net", "blocks"): "residual blocks",
        ("net", "learning_rate"): "1/step", ("net", "lr_decay"): "per-epoch factor",
        ("net", "weight_decay"): "1/step", ("net", "epochs"): "passes",
        ("net", "batch_size"): "samples", ("net", "split_fraction"): "train share",
        ("net", "init_seed"): "rng seed", ("net", "train_seed"): "rng seed",
        ("net", "include_gain_feature"): "bool",
        ("dataset", "trajectories"): "chains", ("dataset", "iterations"): "steps",
        ("dataset", "schedule_length"): "temperatures",
        ("dataset", "seed"): "rng seed", ("dataset", "noise_sigma_db"): "dB",
        ("pattern", "psi_min_deg"): "deg", ("pattern", "psi_max_deg"): "deg",
        ("pattern", "psi_step_deg"): "deg", ("pattern", "phi_deg"): "deg",
        ("quadrature", "samples_per_wavelength"): "samples",
        ("output", "directory"): "path",
    }
    lines = []
    defaults = ExperimentConfig()
    for section in _SECTIONS:
        block = getattr(defaults, section)
        for f in fields(type(block)):
            unit = units.get((section, f.name), "-")
            lines.append(f"  [{section}] {f.name} = {getattr(block, f.name)}"
                         f"  ({unit})")
    return "\n".join(lines)
