"""Straight-line re-implementation of the eval-mode forward pass.

Kept deliberately free of any fndfusion imports: everything is written out
inline from the layer definitions so it can serve as an independent check
of the library's forward pass.  Parameters and running statistics arrive as
plain name->array dicts using the library's naming contract
(proj_txt.fc1.w, proj_txt.bn1.running_mean, att.fc1.w, cls.fc2.b, ...).
"""

import numpy as np
from scipy.special import erf


def _bn_eval(x, gamma, beta, running_mean, running_var, eps):
    xhat = (x - running_mean) / np.sqrt(running_var + eps)
    return gamma * xhat + beta


def _relu(x):
    return np.maximum(x, 0.0)


def _gelu(x):
    return 0.5 * x * (1.0 + erf(x / np.sqrt(2.0)))


def _sigmoid(x):
    with np.errstate(over="ignore"):
        return 1.0 / (1.0 + np.exp(-x))


def _projection_head(x, params, buffers, prefix, eps):
    # linear -> BN -> ReLU -> dropout(identity in eval), twice
    h = x @ params[f"{prefix}.fc1.w"] + params[f"{prefix}.fc1.b"]
    h = _bn_eval(h, params[f"{prefix}.bn1.gamma"], params[f"{prefix}.bn1.beta"],
                 buffers[f"{prefix}.bn1.running_mean"], buffers[f"{prefix}.bn1.running_var"], eps)
    h = _relu(h)
    h = h @ params[f"{prefix}.fc2.w"] + params[f"{prefix}.fc2.b"]
    h = _bn_eval(h, params[f"{prefix}.bn2.gamma"], params[f"{prefix}.bn2.beta"],
                 buffers[f"{prefix}.bn2.running_mean"], buffers[f"{prefix}.bn2.running_var"], eps)
    return _relu(h)


def oracle_logits(config, params, buffers, f_bert, f_resnet, f_clip_t, f_clip_i):
    """Eval-mode logits for a batch, recomputed from first principles."""
    variant = config["variant"]
    bn_eps = config.get("bn_eps", 1e-5)
    gate_eps = config.get("gate_eps", 1e-5)
    gate_enabled = config.get("gate_enabled", True)

    f_bert = np.asarray(f_bert, dtype=np.float64)
    f_resnet = np.asarray(f_resnet, dtype=np.float64)
    f_clip_t = np.asarray(f_clip_t, dtype=np.float64)
    f_clip_i = np.asarray(f_clip_i, dtype=np.float64)

    has_txt = variant in ("full", "no_attention", "no_fusion", "no_clip", "text_only")
    has_img = variant in ("full", "no_attention", "no_fusion", "no_clip", "image_only")
    has_mix = variant in ("full", "no_attention", "multimodal_only")
    clip_in_unimodal = variant in ("full", "no_attention", "no_fusion")

    branches = []
    if has_txt:
        f_txt = np.concatenate([f_bert, f_clip_t], axis=1) if clip_in_unimodal else f_bert
        branches.append(_projection_head(f_txt, params, buffers, "proj_txt", bn_eps))
    if has_img:
        f_img = np.concatenate([f_resnet, f_clip_i], axis=1) if clip_in_unimodal else f_resnet
        branches.append(_projection_head(f_img, params, buffers, "proj_img", bn_eps))
    if has_mix:
        f_mix = np.concatenate([f_clip_t, f_clip_i], axis=1)
        m_mix = _projection_head(f_mix, params, buffers, "proj_mix", bn_eps)
        if gate_enabled:
            dots = np.sum(f_clip_t * f_clip_i, axis=1)
            norms = np.linalg.norm(f_clip_t, axis=1) * np.linalg.norm(f_clip_i, axis=1)
            sim = np.clip(dots / norms, -1.0, 1.0)
            z = (sim - buffers["gate.running_mean"][0]) / np.sqrt(
                buffers["gate.running_var"][0] + gate_eps)
            m_mix = _sigmoid(z)[:, None] * m_mix
        branches.append(m_mix)

    if len(branches) == 1:
        m_agg = branches[0]
    elif variant == "no_attention":
        m_agg = branches[0] + branches[1] + branches[2]
    else:
        stacked = np.stack(branches, axis=2)           # B x L x K
        s = stacked.mean(axis=1) + stacked.max(axis=1)  # B x K
        a = s @ params["att.fc1.w"] + params["att.fc1.b"]
        a = _gelu(a)
        a = a @ params["att.fc2.w"] + params["att.fc2.b"]
        att = _sigmoid(a)
        m_agg = sum(att[:, k:k + 1] * branches[k] for k in range(len(branches)))

    h = m_agg @ params["cls.fc1.w"] + params["cls.fc1.b"]
    h = _relu(h)
    return h @ params["cls.fc2.w"] + params["cls.fc2.b"]
