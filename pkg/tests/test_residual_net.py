import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from rimnull import residual_net as rn
from rimnull.weights import WeightVector


def _samples(n, m, count, seed, residual_fn):
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(count):
        w = WeightVector(rng.integers(0, m, size=n), m)
        g = float(rng.uniform(-30.0, 10.0))
        out.append(rn.GainSample(weights=w, theoretical_gain_db=g,
                                 true_gain_db=g + residual_fn(w, g)))
    return out


def test_residual_identity():
    w = WeightVector(np.array([0, 1]), 4)
    s = rn.GainSample(weights=w, theoretical_gain_db=-3.0, true_gain_db=2.5)
    assert s.residual_db == pytest.approx(5.5)


def test_encoding_layout_and_values():
    w = WeightVector(np.array([0, 1, 2, 3]), 4)
    x = rn.encode_weights(w)
    assert x == pytest.approx([1, 0, 0, 1, -1, 0, 0, -1])


@given(st.integers(2, 16),
       st.lists(st.integers(0, 15), min_size=1, max_size=20),
       st.integers(0, 19), st.integers(1, 15))
def test_encoding_injective_under_single_index_change(m, idx, pos, step):
    idx = np.array([k % m for k in idx], dtype=np.int64)
    pos = pos % idx.size
    other = idx.copy()
    other[pos] = (other[pos] + (step % (m - 1)) + 1) % m
    a = rn.encode_weights(WeightVector(idx, m))
    b = rn.encode_weights(WeightVector(other, m))
    assert not np.allclose(a, b)


def test_fresh_network_predicts_zero():
    net = rn.ResidualNetwork.create(6, width=8, n_blocks=2, rng_seed=0)
    w = WeightVector(np.array([0, 1, 2, 3, 0, 1]), 4)
    assert rn.predict(net, w) == 0.0


def test_gain_feature_is_required_when_enabled():
    net = rn.ResidualNetwork.create(4, width=8, n_blocks=1,
                                    include_gain_feature=True, rng_seed=0)
    w = WeightVector(np.zeros(4, dtype=np.int64), 4)
    with pytest.raises(ValueError):
        rn.predict(net, w)
    assert rn.predict(net, w, theoretical_gain_db=-5.0) == 0.0


def test_gradient_matches_finite_differences():
    rng = np.random.default_rng(13)
    net = rn.ResidualNetwork.create(5, width=8, n_blocks=2, rng_seed=99)
    # exercise nonzero head and standardization paths
    net.params["W_head"] = rng.standard_normal(net.params["W_head"].shape) * 0.1
    net.params["b_head"] = rng.standard_normal(net.params["b_head"].shape) * 0.1
    net.target_mean, net.target_std = 0.7, 2.3
    batch = _samples(5, 4, 8, 3, lambda w, g: float(np.sin(g)))
    grads = rn.gradient(net, batch)
    eps = 1e-6
    worst = 0.0
    for key, g in grads.items():
        flat = net.params[key].reshape(-1)
        for i in range(min(flat.size, 10)):
            orig = flat[i]
            flat[i] = orig + eps
            up = rn.loss(net, batch)
            flat[i] = orig - eps
            dn = rn.loss(net, batch)
            flat[i] = orig
            fd = (up - dn) / (2 * eps)
            an = g.reshape(-1)[i]
            denom = max(abs(fd), abs(an), 1e-8)
            worst = max(worst, abs(fd - an) / denom)
    assert worst < 1e-4


def test_training_learns_constant_residual():
    data = _samples(4, 4, 300, 8, lambda w, g: 3.25)
    net = rn.ResidualNetwork.create(4, width=16, n_blocks=1, rng_seed=1)
    net, history = rn.train(net, data, rn.TrainConfig(epochs=30, rng_seed=2))
    assert history[-1] < 1e-3
    w = WeightVector(np.array([1, 2, 3, 0]), 4)
    assert rn.predict(net, w) == pytest.approx(3.25, abs=0.1)


def test_training_is_deterministic():
    data = _samples(4, 4, 100, 8, lambda w, g: float(w.values().real.sum()))
    nets = []
    for _ in range(2):
        net = rn.ResidualNetwork.create(4, width=8, n_blocks=1, rng_seed=5)
        net, _ = rn.train(net, data, rn.TrainConfig(epochs=5, rng_seed=6))
        nets.append(net)
    for k in nets[0].params:
        assert np.array_equal(nets[0].params[k], nets[1].params[k])


def test_train_validation_errors():
    net = rn.ResidualNetwork.create(4, width=8, n_blocks=1, rng_seed=0)
    with pytest.raises(ValueError):
        rn.train(net, [], rn.TrainConfig())
    bad = _samples(4, 4, 3, 0, lambda w, g: 0.0) \
        + _samples(5, 4, 1, 0, lambda w, g: 0.0)
    with pytest.raises(ValueError):
        rn.train(net, bad, rn.TrainConfig())


def test_train_config_validation():
    with pytest.raises(ValueError):
        rn.TrainConfig(learning_rate=0.0)
    with pytest.raises(ValueError):
        rn.TrainConfig(weight_decay=-1.0)


def test_loss_empty_batch_raises():
    net = rn.ResidualNetwork.create(4, width=8, n_blocks=1, rng_seed=0)
    with pytest.raises(ValueError):
        rn.loss(net, [])


def test_model_roundtrip_is_bit_exact(tmp_path):
    data = _samples(5, 4, 200, 17, lambda w, g: float(np.cos(g)))
    net = rn.ResidualNetwork.create(5, width=16, n_blocks=2,
                                    include_gain_feature=True, rng_seed=4)
    net, _ = rn.train(net, data, rn.TrainConfig(epochs=5, rng_seed=5))
    path = tmp_path / "model.npz"
    rn.save_model(net, path)
    loaded = rn.load_model(path)
    assert loaded.width == net.width and loaded.n_blocks == net.n_blocks
    assert loaded.include_gain_feature == net.include_gain_feature
    assert loaded.target_mean == net.target_mean
    assert loaded.target_std == net.target_std
    for k in net.params:
        assert np.array_equal(loaded.params[k], net.params[k])
    w = WeightVector(np.array([0, 3, 1, 2, 0]), 4)
    assert rn.predict(loaded, w, -4.0) == rn.predict(net, w, -4.0)


def test_model_version_check(tmp_path):
    net = rn.ResidualNetwork.create(3, width=8, n_blocks=1, rng_seed=0)
    path = tmp_path / "model.npz"
    rn.save_model(net, path)
    blob = dict(np.load(path))
    blob["format_version"] = np.array(999)
    np.savez(path, **blob)
    with pytest.raises(ValueError):
        rn.load_model(path)


def test_dataset_csv_roundtrip(tmp_path):
    data = _samples(4, 4, 25, 9, lambda w, g: float(g * 0.1))
    path = tmp_path / "data.csv"
    rn.write_dataset_csv(path, data, ["seed=9"])
    back = rn.read_dataset_csv(path, 4)
    assert len(back) == len(data)
    for a, b in zip(data, back):
        assert np.array_equal(a.weights.phase_indices, b.weights.phase_indices)
        assert a.theoretical_gain_db == pytest.approx(b.theoretical_gain_db)
        assert a.true_gain_db == pytest.approx(b.true_gain_db)
        assert a.residual_db == pytest.approx(b.residual_db)
