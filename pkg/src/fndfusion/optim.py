"""Adam with bias correction and coupled (L2-on-gradient) weight decay."""

import numpy as np


def adam_step(store, lr, beta1=0.9, beta2=0.999, eps=1e-8, weight_decay=0.0):
    """One update over every Param in the store.

    Weight decay is added to the gradient before the moment updates and only
    for Params flagged decay=True (linear weights; biases and normalization
    scales are exempt).
    """
    for p in store.params.values():
        g = p.grad
        if weight_decay != 0.0 and p.decay:
            g = g + weight_decay * p.value
        p.step_count += 1
        p.adam_m[...] = beta1 * p.adam_m + (1.0 - beta1) * g
        p.adam_v[...] = beta2 * p.adam_v + (1.0 - beta2) * (g * g)
        m_hat = p.adam_m / (1.0 - beta1 ** p.step_count)
        v_hat = p.adam_v / (1.0 - beta2 ** p.step_count)
        p.value -= lr * m_hat / (np.sqrt(v_hat) + eps)
