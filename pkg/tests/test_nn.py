import numpy as np
import pytest

from fndfusion.errors import (
    BatchSizeError,
    ConfigError,
    DimensionError,
    LabelError,
    StateError,
)
from fndfusion.gradcheck import assert_grads_close, numeric_grad
from fndfusion.nn import (
    Activation,
    BatchNorm,
    Dropout,
    Linear,
    ParamStore,
    activation_forward,
    cross_entropy,
    dropout_forward,
    gelu_forward,
    relu_forward,
    sigmoid_forward,
)


def make_linear(n_in, n_out, seed=0):
    store = ParamStore()
    rng = np.random.default_rng(seed)
    return store, Linear(store, "fc", n_in, n_out, rng)


class TestLinear:
    def test_identity_weights(self):
        store, lin = make_linear(2, 2)
        lin.w.value[...] = np.eye(2)
        lin.b.value[...] = 0.0
        out = lin.forward(np.array([[1.0, 2.0]]))
        assert np.array_equal(out, [[1.0, 2.0]])

    def test_zero_weights_bias_only(self):
        store, lin = make_linear(2, 2)
        lin.w.value[...] = 0.0
        lin.b.value[...] = [[3.0, 4.0]]
        out = lin.forward(np.array([[1.0, 2.0]]))
        assert np.array_equal(out, [[3.0, 4.0]])

    def test_hand_product(self):
        # [[1,2],[3,4]] @ [[1],[1]] + [1] = [[4],[8]]
        store, lin = make_linear(2, 1)
        lin.w.value[...] = [[1.0], [1.0]]
        lin.b.value[...] = [[1.0]]
        out = lin.forward(np.array([[1.0, 2.0], [3.0, 4.0]]))
        assert np.array_equal(out, [[4.0], [8.0]])

    def test_shape_mismatch(self):
        store, lin = make_linear(3, 2)
        with pytest.raises(DimensionError):
            lin.forward(np.zeros((1, 4)))

    def test_backward_pattern(self):
        # upstream grad of ones with x=[[1,2]] puts x itself into dW rows
        store, lin = make_linear(2, 1)
        lin.forward(np.array([[1.0, 2.0]]))
        lin.backward(np.ones((1, 1)))
        assert np.array_equal(lin.w.grad, [[1.0], [2.0]])
        assert np.array_equal(lin.b.grad, [[1.0]])

    def test_backward_matches_fd(self):
        store, lin = make_linear(3, 2, seed=4)
        x = np.random.default_rng(1).standard_normal((5, 3))
        ref = np.random.default_rng(2).standard_normal((5, 2))

        def loss_fn():
            return float(((lin.forward(x) - ref) ** 2).sum())

        out = lin.forward(x)
        lin.w.grad[...] = 0.0
        lin.b.grad[...] = 0.0
        dx = lin.backward(2.0 * (out - ref))
        assert_grads_close(lin.w.grad, numeric_grad(loss_fn, lin.w.value), context="w")
        assert_grads_close(lin.b.grad, numeric_grad(loss_fn, lin.b.value), context="b")
        assert_grads_close(dx, numeric_grad(loss_fn, x), context="x")

    def test_backward_before_forward(self):
        store, lin = make_linear(2, 2)
        with pytest.raises(StateError):
            lin.backward(np.ones((1, 2)))


class TestBatchNorm:
    def make(self, width=1, momentum=0.1):
        store = ParamStore()
        return store, BatchNorm(store, "bn", width, momentum=momentum)

    def test_two_sample_normalization(self):
        store, bn = self.make()
        out = bn.forward(np.array([[1.0], [3.0]]), train=True)
        expected = 0.999995000037  # (1-2)/sqrt(1 + 1e-5)
        assert np.allclose(out, [[-expected], [expected]], atol=1e-9)

    def test_affine_collapse(self):
        store, bn = self.make(width=3)
        bn.gamma.value[...] = 0.0
        bn.beta.value[...] = 5.0
        out = bn.forward(np.random.default_rng(0).standard_normal((4, 3)), train=True)
        assert np.array_equal(out, np.full((4, 3), 5.0))

    def test_eval_identity_stats(self):
        store, bn = self.make(width=2)
        x = np.random.default_rng(1).standard_normal((3, 2))
        out = bn.forward(x, train=False)  # running mean 0, var 1, gamma 1, beta 0
        assert out == pytest.approx(x, abs=1e-5)

    def test_train_requires_two(self):
        store, bn = self.make()
        with pytest.raises(BatchSizeError):
            bn.forward(np.ones((1, 1)), train=True)

    def test_normalized_batch_stats(self):
        # output variance is var/(var + eps); batch variance must dominate
        # eps=1e-5 for the 1e-6 tolerance to be reachable
        store, bn = self.make(width=3)
        x = np.random.default_rng(7).standard_normal((32, 3)) * 20.0 + 2.0
        bn.gamma.value[...] = 1.0
        bn.beta.value[...] = 0.0
        out = bn.forward(x, train=True)
        assert np.abs(out.mean(axis=0)).max() <= 1e-9
        assert np.abs(out.var(axis=0) - 1.0).max() <= 1e-6

    def test_running_stats_update(self):
        store, bn = self.make()
        x = np.array([[1.0], [3.0]])
        bn.forward(x, train=True)
        assert bn.running_mean[0] == pytest.approx(0.9 * 0.0 + 0.1 * 2.0)
        assert bn.running_var[0] == pytest.approx(0.9 * 1.0 + 0.1 * 2.0)  # unbiased var = 2

    def test_eval_does_not_update(self):
        store, bn = self.make()
        before = (bn.running_mean.copy(), bn.running_var.copy())
        bn.forward(np.array([[10.0], [20.0]]), train=False)
        assert np.array_equal(bn.running_mean, before[0])
        assert np.array_equal(bn.running_var, before[1])

    @pytest.mark.parametrize("train", [True, False])
    def test_backward_matches_fd(self, train):
        store, bn = self.make(width=2)
        rng = np.random.default_rng(3)
        bn.gamma.value[...] = rng.standard_normal((1, 2))
        bn.beta.value[...] = rng.standard_normal((1, 2))
        x = rng.standard_normal((4, 2)) * 2.0 + 1.0
        ref = rng.standard_normal((4, 2))
        snap = store.snapshot_buffers()

        def loss_fn():
            store.restore_buffers(snap)
            return float(((bn.forward(x, train=train) - ref) ** 2).sum())

        store.restore_buffers(snap)
        out = bn.forward(x, train=train)
        store.zero_grads()
        dx = bn.backward(2.0 * (out - ref))
        assert_grads_close(bn.gamma.grad, numeric_grad(loss_fn, bn.gamma.value), context="gamma")
        assert_grads_close(bn.beta.grad, numeric_grad(loss_fn, bn.beta.value), context="beta")
        assert_grads_close(dx, numeric_grad(loss_fn, x), context="x")


class TestActivations:
    def test_relu_values(self):
        assert activation_forward(np.array([-2.0]), "relu")[0] == 0.0
        assert activation_forward(np.array([3.0]), "relu")[0] == 3.0

    def test_sigmoid_zero(self):
        assert sigmoid_forward(np.array([0.0]))[0] == 0.5

    def test_gelu_one(self):
        # x * Phi(x) at x=1, Phi(1) = 0.8413447460685429
        assert gelu_forward(np.array([1.0]))[0] == pytest.approx(0.8413447460685429, abs=1e-12)

    def test_unknown_kind(self):
        with pytest.raises(ConfigError):
            activation_forward(np.zeros(1), "tanh")

    def test_relu_backward_at_negative(self):
        act = Activation("relu")
        act.forward(np.array([[-1.0]]))
        assert act.backward(np.array([[1.0]]))[0, 0] == 0.0

    @pytest.mark.parametrize("kind", ["relu", "gelu", "sigmoid"])
    def test_backward_matches_fd(self, kind):
        act = Activation(kind)
        x = np.random.default_rng(0).standard_normal((3, 4)) * 2.0
        if kind == "relu":
            x[np.abs(x) < 0.05] += 0.1  # keep clear of the kink

        def loss_fn():
            return float((act.forward(x) ** 2).sum())

        out = act.forward(x)
        dx = act.backward(2.0 * out)
        assert_grads_close(dx, numeric_grad(loss_fn, x), context=kind)


class TestDropout:
    def test_eval_identity(self):
        x = np.random.default_rng(0).standard_normal((3, 3))
        out, mask = dropout_forward(x, 0.7, None, train=False)
        assert np.array_equal(out, x)

    def test_rate_zero(self):
        x = np.random.default_rng(0).standard_normal((3, 3))
        out, mask = dropout_forward(x, 0.0, None, train=True)
        assert np.array_equal(out, x)
        assert np.array_equal(mask, np.ones_like(x))

    def test_survivor_fraction(self):
        x = np.ones((100, 1000))
        _, mask = dropout_forward(x, 0.5, np.random.default_rng(123), train=True)
        survivors = (mask > 0).mean()
        assert abs(survivors - 0.5) < 0.01

    def test_rate_one_rejected(self):
        with pytest.raises(ConfigError):
            dropout_forward(np.ones((1, 1)), 1.0, np.random.default_rng(0), train=True)

    def test_backward_uses_mask(self):
        drop = Dropout(0.5)
        x = np.ones((4, 8))
        out = drop.forward(x, train=True, rng=np.random.default_rng(9))
        dx = drop.backward(np.ones_like(x))
        assert np.array_equal(dx, drop._mask)
        # survivors are scaled by 1/keep
        assert set(np.unique(out)) <= {0.0, 2.0}


class TestCrossEntropy:
    def test_uniform_logits(self):
        loss, _ = cross_entropy(np.array([[0.0, 0.0]]), np.array([1]))
        assert loss == pytest.approx(np.log(2.0), abs=1e-12)

    def test_confident_correct(self):
        loss, _ = cross_entropy(np.array([[20.0, -20.0]]), np.array([0]))
        assert loss == pytest.approx(0.0, abs=1e-12)

    def test_closed_form(self):
        # softmax CE of [[1,2]] with label 0 is ln(1 + e)
        loss, _ = cross_entropy(np.array([[1.0, 2.0]]), np.array([0]))
        assert loss == pytest.approx(1.3132616875182228, abs=1e-12)

    def test_loss_nonnegative(self):
        rng = np.random.default_rng(0)
        logits = rng.standard_normal((50, 2)) * 3.0
        labels = rng.integers(0, 2, size=50)
        loss, _ = cross_entropy(logits, labels)
        assert loss >= 0.0

    def test_bad_label(self):
        with pytest.raises(LabelError):
            cross_entropy(np.zeros((1, 2)), np.array([2]))

    def test_requires_two_classes(self):
        with pytest.raises(DimensionError):
            cross_entropy(np.zeros((1, 3)), np.array([0]))

    def test_dlogits_matches_fd(self):
        rng = np.random.default_rng(5)
        logits = rng.standard_normal((6, 2))
        labels = rng.integers(0, 2, size=6)

        def loss_fn():
            return cross_entropy(logits, labels)[0]

        _, dlogits = cross_entropy(logits, labels)
        assert_grads_close(dlogits, numeric_grad(loss_fn, logits), context="dlogits")
