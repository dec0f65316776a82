"""Central finite-difference gradient checking.

The loss callable must be a pure function of the arrays being perturbed;
callers are responsible for snapshotting any running statistics the forward
pass mutates (ParamStore.snapshot_buffers / restore_buffers).
"""

import numpy as np


def numeric_grad(loss_fn, arr, h=1e-5):
    """Central differences of loss_fn with respect to every entry of arr."""
    grad = np.zeros_like(arr)
    flat = arr.ravel()
    gflat = grad.ravel()
    for i in range(flat.size):
        orig = flat[i]
        flat[i] = orig + h
        hi = loss_fn()
        flat[i] = orig - h
        lo = loss_fn()
        flat[i] = orig
        gflat[i] = (hi - lo) / (2.0 * h)
    return grad


def grad_errors(analytic, numeric, near_zero=1e-6):
    """Per-entry error against the acceptance tolerance rule.

    Entries where both gradients are below near_zero are compared absolutely;
    everything else relatively.  Returns (max_rel, max_abs_near_zero).
    """
    analytic = np.asarray(analytic, dtype=np.float64)
    numeric = np.asarray(numeric, dtype=np.float64)
    scale = np.maximum(np.abs(analytic), np.abs(numeric))
    small = scale < near_zero
    diff = np.abs(analytic - numeric)
    max_abs = diff[small].max() if small.any() else 0.0
    big = ~small
    max_rel = (diff[big] / scale[big]).max() if big.any() else 0.0
    return max_rel, max_abs


def assert_grads_close(analytic, numeric, rel_tol=1e-4, abs_tol=1e-7, context=""):
    max_rel, max_abs = grad_errors(analytic, numeric)
    if max_rel > rel_tol or max_abs > abs_tol:
        raise AssertionError(
            f"gradient mismatch {context}: max_rel={max_rel:.3e} (tol {rel_tol:.0e}), "
            f"max_abs_near_zero={max_abs:.3e} (tol {abs_tol:.0e})")
    return max_rel, max_abs
