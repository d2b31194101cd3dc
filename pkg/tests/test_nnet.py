import numpy as np
import pytest

from geodetect.exceptions import DomainError, FitError, ShapeError
from geodetect.geometry import softmax
from geodetect.nnet import (
    MlpClassifier,
    MlpParams,
    TrainConfig,
    ce_loss,
    ce_param_grads,
    fgsm_generate,
    forward,
    grad_input_fr0,
    init_params,
    preprocess_input,
    train,
)
from geodetect.stats import CentroidSet


def make_blobs(rng, n_per_class, means, sigma=0.5):
    xs, ys = [], []
    for c, m in enumerate(means):
        xs.append(rng.normal(m, sigma, size=(n_per_class, len(m))))
        ys.append(np.full(n_per_class, c))
    return np.vstack(xs), np.concatenate(ys)


class TestForward:
    def test_zero_params_zero_logits(self):
        p = MlpParams((3, 2, 2), (np.zeros((3, 2)), np.zeros((2, 2))),
                      (np.zeros(2), np.zeros(2)))
        np.testing.assert_array_equal(forward(p, [1.0, -2.0, 3.0]), np.zeros(2))

    def test_single_linear_identity(self):
        p = MlpParams((3, 3), (np.eye(3),), (np.zeros(3),))
        x = np.array([0.5, -1.0, 2.0])
        np.testing.assert_array_equal(forward(p, x), x)

    def test_golden_vector(self):
        params = init_params((4, 5, 3), activation="tanh", seed=2024)
        x = np.array([0.25, -1.5, 0.75, 2.0])
        golden = np.array([0.12567874075723817, -1.0910944955503694, 0.1524303242462099])
        np.testing.assert_array_equal(forward(params, x), golden)

    def test_hidden_features_match_manual_recomputation(self):
        params = init_params((4, 6, 5, 3), activation="softplus", seed=7)
        rng = np.random.default_rng(1)
        x = rng.normal(size=(10, 4))
        logits, hidden = forward(params, x, return_hidden=True)
        h = x
        for i, (w, b) in enumerate(zip(params.weights, params.biases)):
            z = h @ w + b
            if i < len(params.weights) - 1:
                h = np.logaddexp(0.0, z)
                np.testing.assert_array_equal(hidden[i], h)
            else:
                np.testing.assert_array_equal(logits, z)

    def test_shape_mismatch(self):
        params = init_params((4, 3), seed=0)
        with pytest.raises(ShapeError):
            forward(params, [1.0, 2.0])


class TestTrain:
    def test_separable_blobs_high_accuracy(self):
        rng = np.random.default_rng(0)
        x, y = make_blobs(rng, 100, [(-2.0, 0.0), (2.0, 0.0)])
        params = train(x, y, hidden_sizes=(8,), config=TrainConfig(epochs=200, seed=0))
        acc = np.mean(np.argmax(forward(params, x), axis=1) == y)
        assert acc >= 0.99

    def test_zero_epochs_returns_init(self):
        rng = np.random.default_rng(3)
        x, y = make_blobs(rng, 20, [(-1.0,), (1.0,)])
        params = train(x, y, hidden_sizes=(4,), config=TrainConfig(epochs=0, seed=5))
        ref = init_params((1, 4, 2), "tanh", seed=5)
        for w, wr in zip(params.weights, ref.weights):
            np.testing.assert_array_equal(w, wr)
        for b, br in zip(params.biases, ref.biases):
            np.testing.assert_array_equal(b, br)

    def test_final_loss_not_above_initial(self):
        rng = np.random.default_rng(9)
        x, y = make_blobs(rng, 30, [(-1.0, 1.0), (1.0, -1.0), (2.0, 2.0)])
        cfg = TrainConfig(epochs=50, seed=2)
        init = train(x, y, hidden_sizes=(5,), config=TrainConfig(epochs=0, seed=2))
        fitted = train(x, y, hidden_sizes=(5,), config=cfg)
        assert ce_loss(fitted, x, y) <= ce_loss(init, x, y)

    def test_not_scale_invariant(self):
        rng = np.random.default_rng(4)
        x, y = make_blobs(rng, 40, [(-1.5, 0.5), (1.5, -0.5)])
        params = train(x, y, hidden_sizes=(6,), config=TrainConfig(epochs=50, seed=1))
        assert not np.allclose(forward(params, x), forward(params, 2.0 * x))

    def test_single_class_rejected(self):
        with pytest.raises(FitError):
            train(np.zeros((5, 2)), np.zeros(5, dtype=int))

    def test_deterministic(self):
        rng = np.random.default_rng(6)
        x, y = make_blobs(rng, 25, [(-1.0,), (1.0,)])
        a = train(x, y, config=TrainConfig(epochs=30, seed=11))
        b = train(x, y, config=TrainConfig(epochs=30, seed=11))
        for wa, wb in zip(a.weights, b.weights):
            np.testing.assert_array_equal(wa, wb)


def central_diff(f, x, h=1e-5):
    g = np.zeros_like(x, dtype=float)
    for i in range(x.size):
        xp = x.copy(); xp.flat[i] += h
        xm = x.copy(); xm.flat[i] -= h
        g.flat[i] = (f(xp) - f(xm)) / (2.0 * h)
    return g


def max_rel_err(analytic, numeric):
    # scale floor keeps the check meaningful where the true gradient is ~0
    # (central differences bottom out at ~1e-10 noise there)
    scale = np.maximum(np.abs(numeric), 1e-4)
    return float(np.max(np.abs(analytic - numeric) / scale))


class TestParamGradients:
    def test_backprop_vs_finite_differences_232(self):
        for seed in range(10):
            rng = np.random.default_rng(seed)
            activation = "tanh" if seed % 2 == 0 else "softplus"
            params = init_params((2, 3, 2), activation, seed=seed)
            x = rng.normal(size=(6, 2))
            y = rng.integers(0, 2, size=6)
            gw, gb = ce_param_grads(params, x, y, l2=0.01)
            for li in range(2):
                def loss_w(wflat, li=li):
                    ws = [w.copy() for w in params.weights]
                    ws[li] = wflat.reshape(params.weights[li].shape)
                    p = MlpParams(params.layer_sizes, tuple(ws), params.biases, params.activation)
                    return ce_loss(p, x, y, l2=0.01)

                def loss_b(bflat, li=li):
                    bs = [b.copy() for b in params.biases]
                    bs[li] = bflat
                    p = MlpParams(params.layer_sizes, params.weights, tuple(bs), params.activation)
                    return ce_loss(p, x, y, l2=0.01)

                num_w = central_diff(loss_w, params.weights[li].ravel().copy())
                num_b = central_diff(loss_b, params.biases[li].copy())
                assert max_rel_err(gw[li].ravel(), num_w) < 1e-4
                assert max_rel_err(gb[li], num_b) < 1e-4


def fr0_score(params, x, centroids, temperature=1.0, aggregation="sum"):
    """Independent scalar evaluation used as the finite-difference target."""
    logits = forward(params, x)
    p = softmax(logits, temperature)
    q = softmax(centroids.centroids, temperature)
    d = 2.0 * np.arccos(np.clip(np.sqrt(p[None, :] * q).sum(axis=1), -1.0, 1.0))
    return float(d.sum()) if aggregation == "sum" else float(d.min())


class TestGradInputFr0:
    def _setup(self, seed):
        rng = np.random.default_rng(seed)
        params = init_params((2, 3, 2), "tanh", seed=seed)
        centroids = CentroidSet(rng.normal(0, 1.5, size=(2, 2)))
        x = rng.normal(size=2)
        return params, centroids, x

    @pytest.mark.parametrize("aggregation", ["sum", "min"])
    def test_matches_finite_differences(self, aggregation):
        for seed in range(10):
            params, centroids, x = self._setup(seed)
            g = grad_input_fr0(params, x, centroids, 1.0, aggregation)
            num = central_diff(lambda v: fr0_score(params, v, centroids, 1.0, aggregation), x)
            assert max_rel_err(g, num) < 1e-4

    def test_constant_network_zero_gradient(self):
        params = MlpParams((2, 3, 2),
                           (init_params((2, 3, 2), seed=0).weights[0], np.zeros((3, 2))),
                           (np.zeros(3), np.zeros(2)))
        centroids = CentroidSet(np.eye(2))
        g = grad_input_fr0(params, [0.3, -0.7], centroids)
        np.testing.assert_array_equal(g, np.zeros(2))

    def test_symmetric_stationary_point(self):
        # identity network, swap-symmetric centroids, symmetric input:
        # shift invariance plus coordinate symmetry force a zero gradient
        params = MlpParams((2, 2), (np.eye(2),), (np.zeros(2),))
        centroids = CentroidSet(np.array([[1.5, 0.0], [0.0, 1.5]]))
        g = grad_input_fr0(params, [0.4, 0.4], centroids)
        assert np.linalg.norm(g) < 1e-8


class TestPreprocessInput:
    def test_zero_eps_identity(self):
        x = np.array([1.0, -2.0])
        np.testing.assert_array_equal(preprocess_input(x, 0.0, [0.5, -0.5]), x)

    def test_step_range(self):
        rng = np.random.default_rng(2)
        x = rng.normal(size=20)
        g = rng.normal(size=20) * (rng.random(20) > 0.3)
        moved = preprocess_input(x, 0.25, g) - x
        assert set(np.round(np.unique(moved), 12)).issubset({-0.25, 0.0, 0.25})

    def test_hand_example(self):
        out = preprocess_input([0.0, 0.0], 0.1, [3.0, -2.0])
        np.testing.assert_allclose(out, [0.1, -0.1])

    def test_negative_eps_rejected(self):
        with pytest.raises(DomainError):
            preprocess_input([0.0], -0.1, [1.0])


class TestFgsm:
    def test_zero_eps_identity(self):
        params = init_params((2, 3, 2), seed=1)
        x = np.array([0.5, -0.5])
        np.testing.assert_array_equal(fgsm_generate(params, x, 0, 0.0), x)

    def test_loss_increases_for_small_step(self):
        rng = np.random.default_rng(0)
        params = init_params((3, 4, 2), seed=3)
        wins = 0
        n = 200
        for _ in range(n):
            x = rng.normal(size=3)
            y = int(rng.integers(0, 2))
            adv = fgsm_generate(params, x, y, 1e-3)
            if ce_loss(params, adv, [y]) >= ce_loss(params, x, [y]):
                wins += 1
        assert wins / n >= 0.95

    def test_sign_matches_loss_gradient_oracle(self):
        params = init_params((2, 3, 2), seed=5)
        rng = np.random.default_rng(5)
        x = rng.normal(size=2)
        y = 1
        adv = fgsm_generate(params, x, y, 0.01)
        num = central_diff(lambda v: ce_loss(params, v, [y]), x)
        np.testing.assert_allclose(np.sign(adv - x), np.sign(np.round(num, 12)))

    def test_invalid_label(self):
        params = init_params((2, 3, 2), seed=0)
        with pytest.raises(DomainError):
            fgsm_generate(params, [0.0, 0.0], 5, 0.1)


class TestMlpClassifier:
    def test_fit_predict_roundtrip(self):
        rng = np.random.default_rng(8)
        x, y = make_blobs(rng, 60, [(-2.0, 0.0), (2.0, 0.0), (0.0, 2.5)])
        clf = MlpClassifier(hidden_sizes=(8,), epochs=150, seed=0).fit(x, y)
        assert clf.score(x, y) >= 0.97
        probs = clf.predict_proba(x)
        np.testing.assert_allclose(probs.sum(axis=1), 1.0, atol=1e-12)
        assert len(clf.hidden_features(x)) == 1

    def test_get_params_roundtrip(self):
        clf = MlpClassifier(hidden_sizes=(4,), seed=3)
        params = clf.get_params()
        assert params["seed"] == 3
        clone = MlpClassifier(**params)
        assert clone.get_params() == params
