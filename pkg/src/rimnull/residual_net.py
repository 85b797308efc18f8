"""From-scratch residual MLP predicting the dB gain mismatch of a weight vector.

Topology: affine(2N -> H), B residual blocks (affine, relu, affine, skip add),
affine head to a scalar. Targets are standardized during training and
de-standardized inside predict, so a zero head on a fresh network predicts a
zero residual (the "trust the theoretical model" prior). All gradients are
hand-derived and checked against central finite differences in the tests.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .weights import WeightVector

MODEL_FORMAT_VERSION = 1


class TrainingDivergedError(RuntimeError):
    pass


@dataclass(frozen=True)
class GainSample:
    weights: WeightVector
    theoretical_gain_db: float
    true_gain_db: float

    @property
    def residual_db(self) -> float:
        return self.true_gain_db - self.theoretical_gain_db


@dataclass
class TrainConfig:
    epochs: int = 200
    batch_size: int = 128
    learning_rate: float = 1e-3
    decay: float = 0.0  # per-epoch inverse-time decay: lr / (1 + decay*epoch)
    weight_decay: float = 0.0  # decoupled L2 shrink per step, damps surrogate artifacts
    rng_seed: int = 0
    split_fraction: float = 0.9  # train share of the train/validation split

    def __post_init__(self):
        if min(self.epochs, self.batch_size) < 1:
            raise ValueError("epochs and batch_size must be positive")
        if self.learning_rate <= 0 or self.decay < 0 or self.weight_decay < 0:
            raise ValueError("learning_rate must be positive, decay nonnegative")
        if not (0.0 < self.split_fraction < 1.0):
            raise ValueError("split_fraction must lie in (0, 1)")


def encode_weights(w: WeightVector) -> np.ndarray:
    """Interleaved [cos t1, sin t1, ..., cos tN, sin tN], t = 2*pi*k/M."""
    theta = 2 * math.pi * w.phase_indices / w.m_levels
    out = np.empty(2 * w.n)
    out[0::2] = np.cos(theta)
    out[1::2] = np.sin(theta)
    return out


def encode_index_rows(indices: np.ndarray, m_levels: int) -> np.ndarray:
    """Batch version of encode_weights for an (S, N) index array -> (S, 2N)."""
    theta = 2 * math.pi * np.asarray(indices) / m_levels
    out = np.empty((theta.shape[0], 2 * theta.shape[1]))
    out[:, 0::2] = np.cos(theta)
    out[:, 1::2] = np.sin(theta)
    return out


@dataclass
class ResidualNetwork:
    input_dim: int
    width: int
    n_blocks: int
    include_gain_feature: bool = False
    params: dict[str, np.ndarray] = field(default_factory=dict, repr=False)
    # target (and optional gain-feature) standardization, set by train()
    target_mean: float = 0.0
    target_std: float = 1.0
    gain_mean: float = 0.0
    gain_std: float = 1.0

    @classmethod
    def create(cls, n_elements: int, width: int = 256, n_blocks: int = 3,
               include_gain_feature: bool = False, rng_seed: int = 0) -> "ResidualNetwork":
        """Uniform(-1,1)/sqrt(fan_in) init for the trunk; head starts at zero."""
        input_dim = 2 * n_elements + (1 if include_gain_feature else 0)
        rng = np.random.default_rng(rng_seed)

        def layer(fan_in, fan_out):
            scale = 1.0 / math.sqrt(fan_in)
            return (rng.uniform(-scale, scale, size=(fan_in, fan_out)),
                    np.zeros(fan_out))

        p = {}
        p["W_in"], p["b_in"] = layer(input_dim, width)
        for b in range(n_blocks):
            p[f"W1_{b}"], p[f"b1_{b}"] = layer(width, width)
            p[f"W2_{b}"], p[f"b2_{b}"] = layer(width, width)
        p["W_head"] = np.zeros((width, 1))
        p["b_head"] = np.zeros(1)
        return cls(input_dim=input_dim, width=width, n_blocks=n_blocks,
                   include_gain_feature=include_gain_feature, params=p)

    def features(self, w: WeightVector, theoretical_gain_db: float | None = None) -> np.ndarray:
        x = encode_weights(w)
        if self.include_gain_feature:
            if theoretical_gain_db is None:
                raise ValueError("network expects the theoretical gain as a feature")
            gf = (theoretical_gain_db - self.gain_mean) / self.gain_std
            x = np.concatenate([x, [gf]])
        if x.size != self.input_dim:
            raise ValueError(f"feature length {x.size} != input_dim {self.input_dim}")
        return x


def _forward(net: ResidualNetwork, x: np.ndarray):
    """Batch forward pass; returns raw (standardized) output and layer cache."""
    p = net.params
    h = x @ p["W_in"] + p["b_in"]
    cache = {"x": x, "h0": h}
    for b in range(net.n_blocks):
        a1 = h @ p[f"W1_{b}"] + p[f"b1_{b}"]
        z = np.maximum(a1, 0.0)
        h = h + z @ p[f"W2_{b}"] + p[f"b2_{b}"]
        cache[f"a1_{b}"], cache[f"z_{b}"], cache[f"h{b + 1}"] = a1, z, h
    raw = h @ p["W_head"] + p["b_head"]
    return raw, cache


def _forward_residuals(net: ResidualNetwork, x: np.ndarray) -> np.ndarray:
    """De-standardized residual predictions for a feature batch (S, input_dim)."""
    raw, _ = _forward(net, x)
    return raw[:, 0] * net.target_std + net.target_mean


def predict(net: ResidualNetwork, w: WeightVector,
            theoretical_gain_db: float | None = None) -> float:
    """Predicted gain mismatch (dB) for one weight vector."""
    x = net.features(w, theoretical_gain_db)
    return float(_forward_residuals(net, x[None, :])[0])


def _batch_features(net: ResidualNetwork, batch: list[GainSample]) -> np.ndarray:
    x = encode_index_rows(np.stack([s.weights.phase_indices for s in batch]),
                          batch[0].weights.m_levels)
    if net.include_gain_feature:
        g = np.array([s.theoretical_gain_db for s in batch])
        gf = (g - net.gain_mean) / net.gain_std
        x = np.concatenate([x, gf[:, None]], axis=1)
    return x


def loss(net: ResidualNetwork, batch: list[GainSample]) -> float:
    """Mean squared error between predicted and stored residuals, in dB^2."""
    if not batch:
        raise ValueError("empty batch")
    preds = _forward_residuals(net, _batch_features(net, batch))
    targets = np.array([s.residual_db for s in batch])
    return float(np.mean((preds - targets) ** 2))


def gradient(net: ResidualNetwork, batch: list[GainSample]) -> dict[str, np.ndarray]:
    """Analytic gradient of loss() with respect to every parameter."""
    if not batch:
        raise ValueError("empty batch")
    x = _batch_features(net, batch)
    targets = np.array([s.residual_db for s in batch])
    raw, cache = _forward(net, x)
    preds = raw[:, 0] * net.target_std + net.target_mean

    p = net.params
    grads = {}
    S = len(batch)
    # d loss / d raw, including the de-standardization scale
    d_raw = (2.0 / S) * (preds - targets)[:, None] * net.target_std

    h_last = cache[f"h{net.n_blocks}"]
    grads["W_head"] = h_last.T @ d_raw
    grads["b_head"] = d_raw.sum(axis=0)
    d_h = d_raw @ p["W_head"].T

    for b in range(net.n_blocks - 1, -1, -1):
        z = cache[f"z_{b}"]
        a1 = cache[f"a1_{b}"]
        h_in = cache[f"h{b}"]
        grads[f"W2_{b}"] = z.T @ d_h
        grads[f"b2_{b}"] = d_h.sum(axis=0)
        d_z = d_h @ p[f"W2_{b}"].T
        d_a1 = d_z * (a1 > 0.0)
        grads[f"W1_{b}"] = h_in.T @ d_a1
        grads[f"b1_{b}"] = d_a1.sum(axis=0)
        d_h = d_h + d_a1 @ p[f"W1_{b}"].T  # skip path plus block path

    grads["W_in"] = cache["x"].T @ d_h
    grads["b_in"] = d_h.sum(axis=0)
    return grads


def train(net: ResidualNetwork, dataset: list[GainSample],
          config: TrainConfig) -> tuple[ResidualNetwork, list[float]]:
    """Seeded mini-batch Adam on the residual MSE; returns validation history.

    Standardization constants for targets (and the optional gain feature) are
    fitted on the training split before the first step.
    """
    if len(dataset) < 2:
        raise ValueError("dataset must hold at least 2 samples")
    n = dataset[0].weights.n
    m = dataset[0].weights.m_levels
    if any(s.weights.n != n or s.weights.m_levels != m for s in dataset):
        raise ValueError("all samples must share N and M")

    rng = np.random.default_rng(config.rng_seed)
    order = rng.permutation(len(dataset))
    n_train = max(1, min(len(dataset) - 1, round(config.split_fraction * len(dataset))))
    train_set = [dataset[i] for i in order[:n_train]]
    val_set = [dataset[i] for i in order[n_train:]]

    residuals = np.array([s.residual_db for s in train_set])
    net.target_mean = float(residuals.mean())
    net.target_std = float(residuals.std()) or 1.0
    if net.include_gain_feature:
        gains = np.array([s.theoretical_gain_db for s in train_set])
        net.gain_mean = float(gains.mean())
        net.gain_std = float(gains.std()) or 1.0

    moments1 = {k: np.zeros_like(v) for k, v in net.params.items()}
    moments2 = {k: np.zeros_like(v) for k, v in net.params.items()}
    beta1, beta2, eps = 0.9, 0.999, 1e-8
    step = 0
    history = []

    for epoch in range(config.epochs):
        lr = config.learning_rate / (1.0 + config.decay * epoch)
        perm = rng.permutation(n_train)
        for lo in range(0, n_train, config.batch_size):
            batch = [train_set[i] for i in perm[lo:lo + config.batch_size]]
            grads = gradient(net, batch)
            step += 1
            for k, g in grads.items():
                moments1[k] = beta1 * moments1[k] + (1 - beta1) * g
                moments2[k] = beta2 * moments2[k] + (1 - beta2) * g * g
                m_hat = moments1[k] / (1 - beta1 ** step)
                v_hat = moments2[k] / (1 - beta2 ** step)
                net.params[k] -= lr * (m_hat / (np.sqrt(v_hat) + eps)
                                       + config.weight_decay * net.params[k])
        val_loss = loss(net, val_set) if val_set else loss(net, train_set)
        if not math.isfinite(val_loss):
            raise TrainingDivergedError(
                f"validation loss became non-finite at epoch {epoch}")
        history.append(val_loss)
    return net, history


def save_model(net: ResidualNetwork, path) -> None:
    """Single .npz with a version tag, topology, normalization, and parameters."""
    meta = dict(
        format_version=np.array(MODEL_FORMAT_VERSION),
        input_dim=np.array(net.input_dim),
        width=np.array(net.width),
        n_blocks=np.array(net.n_blocks),
        include_gain_feature=np.array(int(net.include_gain_feature)),
        target_mean=np.array(net.target_mean),
        target_std=np.array(net.target_std),
        gain_mean=np.array(net.gain_mean),
        gain_std=np.array(net.gain_std),
    )
    np.savez(path, **meta, **{f"param_{k}": v for k, v in net.params.items()})


def load_model(path) -> ResidualNetwork:
    with np.load(path) as data:
        version = int(data["format_version"])
        if version != MODEL_FORMAT_VERSION:
            raise ValueError(f"unsupported model format version {version}")
        net = ResidualNetwork(
            input_dim=int(data["input_dim"]),
            width=int(data["width"]),
            n_blocks=int(data["n_blocks"]),
            include_gain_feature=bool(int(data["include_gain_feature"])),
            params={k[len("param_"):]: data[k] for k in data.files
                    if k.startswith("param_")},
            target_mean=float(data["target_mean"]),
            target_std=float(data["target_std"]),
            gain_mean=float(data["gain_mean"]),
            gain_std=float(data["gain_std"]),
        )
    return net


def write_dataset_csv(path, dataset: list[GainSample],
                      header_comments=()) -> None:
    """CSV schema: phase_indices(base-M string), G_db, Gtrue_db."""
    with open(path, "w") as f:
        for line in header_comments:
            f.write(f"# {line}\n")
        f.write("phase_indices,G_db,Gtrue_db\n")
        for s in dataset:
            f.write(f"{s.weights.to_base_m_string()},"
                    f"{s.theoretical_gain_db:.17g},{s.true_gain_db:.17g}\n")


def read_dataset_csv(path, m_levels: int) -> list[GainSample]:
    """Residuals are recomputed from the two gain columns on load."""
    out = []
    with open(path) as f:
        for line in f:
            if line.startswith("#") or line.startswith("phase_indices"):
                continue
            line = line.strip()
            if not line:
                continue
            s, g, gt = line.split(",")
            out.append(GainSample(
                weights=WeightVector.from_base_m_string(s, m_levels),
                theoretical_gain_db=float(g),
                true_gain_db=float(gt)))
    return out
