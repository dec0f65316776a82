"""Dense layers with explicit forward/backward passes, 64-bit throughout.

Every layer caches what its backward pass needs during forward and raises
StateError if backward is called first.  Parameter gradients accumulate into
Param.grad; call ParamStore.zero_grads() between batches.
"""

import numpy as np
from scipy.special import erf

from .errors import (
    BatchSizeError,
    ConfigError,
    DimensionError,
    LabelError,
    StateError,
)

SQRT2 = np.sqrt(2.0)
INV_SQRT_2PI = 1.0 / np.sqrt(2.0 * np.pi)


class Param:
    """A named trainable tensor with gradient and Adam moment buffers."""

    def __init__(self, name, value, decay=True):
        self.name = name
        self.value = np.asarray(value, dtype=np.float64)
        if self.value.ndim != 2:
            raise DimensionError(f"param {name}: expected 2-D value, got shape {self.value.shape}")
        self.grad = np.zeros_like(self.value)
        self.adam_m = np.zeros_like(self.value)
        self.adam_v = np.zeros_like(self.value)
        self.step_count = 0
        self.decay = decay  # participates in weight decay (linear weights only)


class ParamStore:
    """Name-addressable registry of Params plus non-trainable buffers.

    Buffers hold running statistics (batch-norm and gate).  Checkpoint code
    reads and writes both groups by name; loading mutates arrays in place so
    layer references stay valid.
    """

    def __init__(self):
        self.params = {}
        self.buffers = {}

    def create(self, name, value, decay=True):
        if name in self.params:
            raise ConfigError(f"duplicate parameter name: {name}")
        p = Param(name, value, decay=decay)
        self.params[name] = p
        return p

    def buffer(self, name, value):
        if name in self.buffers:
            raise ConfigError(f"duplicate buffer name: {name}")
        arr = np.asarray(value, dtype=np.float64)
        self.buffers[name] = arr
        return arr

    def zero_grads(self):
        for p in self.params.values():
            p.grad[...] = 0.0

    def num_scalars(self):
        return sum(p.value.size for p in self.params.values())

    def snapshot_buffers(self):
        return {k: v.copy() for k, v in self.buffers.items()}

    def restore_buffers(self, snap):
        for k, v in snap.items():
            self.buffers[k][...] = v


def kaiming_uniform(n_in, n_out, rng):
    bound = np.sqrt(6.0 / n_in)
    return rng.uniform(-bound, bound, size=(n_in, n_out))


class Linear:
    def __init__(self, store, name, n_in, n_out, rng):
        self.w = store.create(f"{name}.w", kaiming_uniform(n_in, n_out, rng), decay=True)
        self.b = store.create(f"{name}.b", np.zeros((1, n_out)), decay=False)
        self._x = None

    def forward(self, x):
        if x.ndim != 2 or x.shape[1] != self.w.value.shape[0]:
            raise DimensionError(
                f"{self.w.name}: input shape {x.shape} does not match weight {self.w.value.shape}")
        self._x = x
        return x @ self.w.value + self.b.value

    def backward(self, dout):
        if self._x is None:
            raise StateError(f"{self.w.name}: backward before forward")
        self.w.grad += self._x.T @ dout
        self.b.grad += dout.sum(axis=0, keepdims=True)
        return dout @ self.w.value.T


class BatchNorm:
    """Batch normalization over features, with running statistics.

    Train mode normalizes by biased batch variance and pushes an unbiased
    estimate into running_var; eval mode normalizes by the running stats.
    """

    def __init__(self, store, name, width, momentum=0.1, eps=1e-5):
        if not 0.0 < momentum <= 1.0:
            raise ConfigError(f"{name}: momentum must be in (0, 1]")
        self.gamma = store.create(f"{name}.gamma", np.ones((1, width)), decay=False)
        self.beta = store.create(f"{name}.beta", np.zeros((1, width)), decay=False)
        self.running_mean = store.buffer(f"{name}.running_mean", np.zeros(width))
        self.running_var = store.buffer(f"{name}.running_var", np.ones(width))
        self.momentum = momentum
        self.eps = eps
        self.name = name
        self._cache = None

    def forward(self, x, train):
        if x.shape[1] != self.running_mean.shape[0]:
            raise DimensionError(f"{self.name}: width {x.shape[1]} != {self.running_mean.shape[0]}")
        if train:
            b = x.shape[0]
            if b < 2:
                raise BatchSizeError(f"{self.name}: train mode needs B >= 2, got {b}")
            mu = x.mean(axis=0)
            var = x.var(axis=0)  # biased, used for normalization
            m = self.momentum
            self.running_mean[...] = (1.0 - m) * self.running_mean + m * mu
            self.running_var[...] = (1.0 - m) * self.running_var + m * (var * b / (b - 1))
            inv_std = 1.0 / np.sqrt(var + self.eps)
            xhat = (x - mu) * inv_std
        else:
            inv_std = 1.0 / np.sqrt(self.running_var + self.eps)
            xhat = (x - self.running_mean) * inv_std
        self._cache = (xhat, inv_std, train)
        return self.gamma.value * xhat + self.beta.value

    def backward(self, dout):
        if self._cache is None:
            raise StateError(f"{self.name}: backward before forward")
        xhat, inv_std, train = self._cache
        self.gamma.grad += (dout * xhat).sum(axis=0, keepdims=True)
        self.beta.grad += dout.sum(axis=0, keepdims=True)
        dxhat = dout * self.gamma.value
        if not train:
            return dxhat * inv_std
        b = xhat.shape[0]
        # full train-mode formula: gradient flows through batch mean and variance
        return (inv_std / b) * (
            b * dxhat - dxhat.sum(axis=0) - xhat * (dxhat * xhat).sum(axis=0))


def relu_forward(x):
    return np.maximum(x, 0.0)


def relu_backward(dout, x):
    return dout * (x > 0.0)


def sigmoid_forward(x):
    with np.errstate(over="ignore"):
        return 1.0 / (1.0 + np.exp(-x))


def sigmoid_backward(dout, out):
    return dout * out * (1.0 - out)


def gelu_forward(x):
    """Exact Gaussian-CDF form: x * Phi(x)."""
    return 0.5 * x * (1.0 + erf(x / SQRT2))


def gelu_backward(dout, x):
    phi = INV_SQRT_2PI * np.exp(-0.5 * x * x)
    cdf = 0.5 * (1.0 + erf(x / SQRT2))
    return dout * (cdf + x * phi)


_ACTIVATIONS = {
    "relu": (relu_forward, lambda dout, x, out: relu_backward(dout, x)),
    "gelu": (gelu_forward, lambda dout, x, out: gelu_backward(dout, x)),
    "sigmoid": (sigmoid_forward, lambda dout, x, out: sigmoid_backward(dout, out)),
}


def activation_forward(x, kind):
    if kind not in _ACTIVATIONS:
        raise ConfigError(f"unknown activation kind: {kind!r}")
    return _ACTIVATIONS[kind][0](x)


class Activation:
    def __init__(self, kind):
        if kind not in _ACTIVATIONS:
            raise ConfigError(f"unknown activation kind: {kind!r}")
        self.kind = kind
        self._cache = None

    def forward(self, x):
        out = _ACTIVATIONS[self.kind][0](x)
        self._cache = (x, out)
        return out

    def backward(self, dout):
        if self._cache is None:
            raise StateError(f"activation {self.kind}: backward before forward")
        x, out = self._cache
        return _ACTIVATIONS[self.kind][1](dout, x, out)


def dropout_forward(x, rate, rng, train):
    """Inverted dropout; returns (output, mask).

    rate=0 draws nothing from rng, so a rate-0 train pass is bit-identical
    to an eval pass.
    """
    if not 0.0 <= rate < 1.0:
        raise ConfigError(f"dropout rate must be in [0, 1), got {rate}")
    if not train or rate == 0.0:
        return x, np.ones_like(x)
    keep = 1.0 - rate
    mask = (rng.random(x.shape) >= rate) / keep
    return x * mask, mask


def dropout_backward(dout, mask):
    return dout * mask


class Dropout:
    def __init__(self, rate):
        if not 0.0 <= rate < 1.0:
            raise ConfigError(f"dropout rate must be in [0, 1), got {rate}")
        self.rate = rate
        self._mask = None

    def forward(self, x, train, rng=None):
        out, self._mask = dropout_forward(x, self.rate, rng, train)
        return out

    def backward(self, dout):
        if self._mask is None:
            raise StateError("dropout: backward before forward")
        return dropout_backward(dout, self._mask)


def cross_entropy(logits, labels):
    """Mean negative log-likelihood over a two-class batch.

    Returns (loss, dlogits) where dlogits = (softmax - onehot) / B, i.e. the
    gradient of the mean loss.
    """
    logits = np.asarray(logits, dtype=np.float64)
    if logits.ndim != 2 or logits.shape[1] != 2:
        raise DimensionError(f"cross_entropy expects B x 2 logits, got {logits.shape}")
    labels = np.asarray(labels)
    if labels.shape != (logits.shape[0],):
        raise DimensionError(
            f"labels shape {labels.shape} does not match batch size {logits.shape[0]}")
    if not np.isin(labels, (0, 1)).all():
        raise LabelError("labels must be 0 (real) or 1 (fake)")
    labels = labels.astype(np.intp)
    b = logits.shape[0]
    shifted = logits - logits.max(axis=1, keepdims=True)
    lse = np.log(np.exp(shifted).sum(axis=1, keepdims=True))
    log_probs = shifted - lse
    loss = -log_probs[np.arange(b), labels].mean()
    dlogits = np.exp(log_probs)
    dlogits[np.arange(b), labels] -= 1.0
    return loss, dlogits / b
