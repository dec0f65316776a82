"""The fusion head: projection branches, similarity gate, modality attention.

Branch layout per variant (order is always text, image, fused):

    full / no_attention   text=[bert|clip_t]  image=[resnet|clip_i]  fused=[clip_t|clip_i]
    no_fusion             text=[bert|clip_t]  image=[resnet|clip_i]
    no_clip               text=[bert]         image=[resnet]
    multimodal_only       fused=[clip_t|clip_i]
    text_only             text=[bert]
    image_only            image=[resnet]

Each branch goes through its own two-block projection head
(linear -> batchnorm -> relu -> dropout, twice).  The fused branch is scaled
by a sigmoid of the running-standardized CLIP cosine similarity.  Variants
with two or more branches (except no_attention) reweight the projected
vectors with independent per-branch sigmoid attention weights before
summation; single-branch variants feed the projection straight to the
classifier.  The classifier is linear -> relu -> linear.
"""

from dataclasses import asdict, dataclass
from typing import Optional

import numpy as np

from .errors import ConfigError, DimensionError, SimilarityError, StateError
from .nn import (
    Activation,
    BatchNorm,
    Dropout,
    Linear,
    ParamStore,
    sigmoid_forward,
)

VARIANTS = (
    "full",
    "no_attention",
    "no_fusion",
    "no_clip",
    "multimodal_only",
    "text_only",
    "image_only",
)


@dataclass
class FusionConfig:
    n_bert: int = 768
    n_resnet: int = 2048
    n_clip: int = 512
    proj_hidden: int = 256
    proj_out: int = 64
    cls_hidden: int = 64
    cls_out: int = 2
    dropout_rate: float = 0.3
    variant: str = "full"
    gate_enabled: bool = True
    bn_momentum: float = 0.1
    bn_eps: float = 1e-5
    gate_momentum: float = 0.1
    gate_eps: float = 1e-5
    seed: int = 0

    def validate(self):
        if self.variant not in VARIANTS:
            raise ConfigError(f"unknown variant {self.variant!r}; choose from {VARIANTS}")
        if min(self.n_bert, self.n_resnet, self.n_clip) <= 0:
            raise ConfigError("embedding dims must be positive")
        if min(self.proj_hidden, self.proj_out, self.cls_hidden) <= 0:
            raise ConfigError("layer widths must be positive")
        if self.cls_out != 2:
            raise ConfigError("classifier is two-class only")
        if not 0.0 <= self.dropout_rate < 1.0:
            raise ConfigError(f"dropout_rate must be in [0, 1), got {self.dropout_rate}")

    # branch activity -------------------------------------------------------
    @property
    def has_txt(self):
        return self.variant in ("full", "no_attention", "no_fusion", "no_clip", "text_only")

    @property
    def has_img(self):
        return self.variant in ("full", "no_attention", "no_fusion", "no_clip", "image_only")

    @property
    def has_mix(self):
        return self.variant in ("full", "no_attention", "multimodal_only")

    @property
    def clip_in_unimodal(self):
        # no_clip strips CLIP everywhere; single-modality variants use the bare encoder
        return self.variant in ("full", "no_attention", "no_fusion")

    @property
    def uses_gate(self):
        return self.has_mix and self.gate_enabled

    @property
    def has_attention(self):
        return self.variant in ("full", "no_fusion", "no_clip")

    def branch_names(self):
        names = []
        if self.has_txt:
            names.append("txt")
        if self.has_img:
            names.append("img")
        if self.has_mix:
            names.append("mix")
        return tuple(names)

    def branch_widths(self):
        widths = {}
        if self.has_txt:
            widths["txt"] = self.n_bert + (self.n_clip if self.clip_in_unimodal else 0)
        if self.has_img:
            widths["img"] = self.n_resnet + (self.n_clip if self.clip_in_unimodal else 0)
        if self.has_mix:
            widths["mix"] = 2 * self.n_clip
        return widths

    def to_dict(self):
        return asdict(self)

    @classmethod
    def from_dict(cls, d):
        known = {f for f in cls.__dataclass_fields__}
        extra = set(d) - known
        if extra:
            raise ConfigError(f"unknown fusion config keys: {sorted(extra)}")
        cfg = cls(**d)
        cfg.validate()
        return cfg


@dataclass
class Batch:
    ids: list
    labels: np.ndarray
    f_bert: np.ndarray
    f_resnet: np.ndarray
    f_clip_t: np.ndarray
    f_clip_i: np.ndarray

    def __len__(self):
        return len(self.ids)

    def take(self, idx):
        return Batch([self.ids[i] for i in idx], self.labels[idx],
                     self.f_bert[idx], self.f_resnet[idx],
                     self.f_clip_t[idx], self.f_clip_i[idx])


def make_batch(records):
    """Stack records into 64-bit arrays (storage is 32-bit, widened here)."""
    records = list(records)
    return Batch(
        ids=[r.id for r in records],
        labels=np.array([r.label for r in records], dtype=np.intp),
        f_bert=np.stack([r.f_bert for r in records]).astype(np.float64),
        f_resnet=np.stack([r.f_resnet for r in records]).astype(np.float64),
        f_clip_t=np.stack([r.f_clip_t for r in records]).astype(np.float64),
        f_clip_i=np.stack([r.f_clip_i for r in records]).astype(np.float64),
    )


@dataclass
class ForwardTrace:
    """Per-sample intermediate values; rows align with the batch."""
    ids: list
    logits: np.ndarray
    m_agg: np.ndarray
    sim: Optional[np.ndarray] = None
    gate: Optional[np.ndarray] = None
    att: Optional[np.ndarray] = None          # B x K, columns follow att_branches
    att_branches: tuple = ()
    m_txt: Optional[np.ndarray] = None
    m_img: Optional[np.ndarray] = None
    m_mix: Optional[np.ndarray] = None

    def sample(self, i):
        out = {"id": self.ids[i], "logits": self.logits[i].copy()}
        if self.sim is not None:
            out["sim"] = float(self.sim[i])
        if self.gate is not None:
            out["gate"] = float(self.gate[i])
        if self.att is not None:
            for k, name in enumerate(self.att_branches):
                out[f"att_{name}"] = float(self.att[i, k])
        return out


@dataclass
class InputGrads:
    f_bert: np.ndarray
    f_resnet: np.ndarray
    f_clip_t: np.ndarray
    f_clip_i: np.ndarray


def cosine_similarity(t, i):
    """Cosine of two 1-D vectors, clamped to [-1, 1] against rounding."""
    t = np.asarray(t, dtype=np.float64)
    i = np.asarray(i, dtype=np.float64)
    if t.shape != i.shape or t.ndim != 1:
        raise DimensionError(f"cosine_similarity needs equal-length 1-D vectors, "
                             f"got {t.shape} and {i.shape}")
    nt = np.linalg.norm(t)
    ni = np.linalg.norm(i)
    if nt == 0.0 or ni == 0.0:
        raise SimilarityError("cosine similarity undefined for zero vector")
    return float(np.clip(np.dot(t, i) / (nt * ni), -1.0, 1.0))


def _cosine_rows(t, i):
    nt = np.linalg.norm(t, axis=1)
    ni = np.linalg.norm(i, axis=1)
    if (nt == 0.0).any() or (ni == 0.0).any():
        bad = int(np.argmax((nt == 0.0) | (ni == 0.0)))
        raise SimilarityError(f"zero CLIP vector at batch row {bad}")
    sim = np.clip(np.sum(t * i, axis=1) / (nt * ni), -1.0, 1.0)
    return sim, (t, i, nt, ni, sim)


def _cosine_rows_backward(dsim, cache):
    t, i, nt, ni, sim = cache
    dsim_col = dsim[:, None]
    dt = dsim_col * (i / (nt * ni)[:, None] - (sim / (nt * nt))[:, None] * t)
    di = dsim_col * (t / (nt * ni)[:, None] - (sim / (ni * ni))[:, None] * i)
    return dt, di


def concat_features(rec, config):
    """Per-record branch inputs as float64; None where the variant drops a branch."""
    f_bert = rec.f_bert.astype(np.float64)
    f_resnet = rec.f_resnet.astype(np.float64)
    f_clip_t = rec.f_clip_t.astype(np.float64)
    f_clip_i = rec.f_clip_i.astype(np.float64)
    dims = (f_bert.shape[0], f_resnet.shape[0], f_clip_t.shape[0])
    if dims != (config.n_bert, config.n_resnet, config.n_clip):
        raise DimensionError(f"record dims {dims} do not match config "
                             f"({config.n_bert}, {config.n_resnet}, {config.n_clip})")
    f_txt = f_img = f_mix = None
    if config.has_txt:
        f_txt = np.concatenate([f_bert, f_clip_t]) if config.clip_in_unimodal else f_bert
    if config.has_img:
        f_img = np.concatenate([f_resnet, f_clip_i]) if config.clip_in_unimodal else f_resnet
    if config.has_mix:
        f_mix = np.concatenate([f_clip_t, f_clip_i])
    return f_txt, f_img, f_mix


class GateState:
    """Running standardization of the similarity stream, then sigmoid.

    Train mode folds the batch statistics into the running mean/variance
    first (momentum update, unbiased batch variance) and standardizes with
    the updated values; eval mode uses the frozen values.
    """

    def __init__(self, store, momentum=0.1, eps=1e-5):
        self.running_mean = store.buffer("gate.running_mean", np.zeros(1))
        self.running_var = store.buffer("gate.running_var", np.ones(1))
        self.momentum = momentum
        self.eps = eps
        self._cache = None

    def forward(self, sims, train):
        if train:
            b = sims.shape[0]
            if b < 2:
                raise DimensionError(f"gate train mode needs B >= 2, got {b}")
            m = self.momentum
            s_bar = sims.mean()
            self.running_mean[...] = (1.0 - m) * self.running_mean + m * s_bar
            self.running_var[...] = (1.0 - m) * self.running_var + m * sims.var(ddof=1)
        else:
            s_bar = None
        sigma2 = self.running_var[0] + self.eps
        sigma = np.sqrt(sigma2)
        z = (sims - self.running_mean[0]) / sigma
        gate = sigmoid_forward(z)
        self._cache = (train, sims, s_bar, sigma, sigma2, z, gate)
        return gate

    def backward(self, dgate):
        if self._cache is None:
            raise StateError("gate: backward before forward")
        train, sims, s_bar, sigma, sigma2, z, gate = self._cache
        dz = dgate * gate * (1.0 - gate)
        if not train:
            return dz / sigma
        # gradient through the in-batch running update as well
        b = sims.shape[0]
        m = self.momentum
        s1 = dz.sum()
        s2 = (dz * z).sum()
        return (dz - m * s1 / b) / sigma - (m * s2 / ((b - 1) * sigma2)) * (sims - s_bar)


class ProjectionHead:
    """linear -> bn -> relu -> dropout, applied twice."""

    def __init__(self, store, name, n_in, config, rng):
        h, out = config.proj_hidden, config.proj_out
        self.fc1 = Linear(store, f"{name}.fc1", n_in, h, rng)
        self.bn1 = BatchNorm(store, f"{name}.bn1", h, config.bn_momentum, config.bn_eps)
        self.act1 = Activation("relu")
        self.drop1 = Dropout(config.dropout_rate)
        self.fc2 = Linear(store, f"{name}.fc2", h, out, rng)
        self.bn2 = BatchNorm(store, f"{name}.bn2", out, config.bn_momentum, config.bn_eps)
        self.act2 = Activation("relu")
        self.drop2 = Dropout(config.dropout_rate)

    def forward(self, x, train, rng):
        h = self.drop1.forward(self.act1.forward(self.bn1.forward(self.fc1.forward(x), train)),
                               train, rng)
        return self.drop2.forward(self.act2.forward(self.bn2.forward(self.fc2.forward(h), train)),
                                  train, rng)

    def backward(self, dout):
        dh = self.fc2.backward(self.bn2.backward(self.act2.backward(self.drop2.backward(dout))))
        return self.fc1.backward(self.bn1.backward(self.act1.backward(self.drop1.backward(dh))))


class ModalityAttention:
    """Per-branch sigmoid weights from pooled branch statistics.

    The projected branches are stacked L x K per sample; average pooling and
    max pooling over L are summed into a 1 x K squeeze, which two K x K
    linear layers (GELU between, sigmoid after) map to the weights.  Weights
    are independent sigmoids and do not sum to one.
    """

    def __init__(self, store, n_branches, rng):
        self.k = n_branches
        self.fc1 = Linear(store, "att.fc1", n_branches, n_branches, rng)
        self.act = Activation("gelu")
        self.fc2 = Linear(store, "att.fc2", n_branches, n_branches, rng)
        self._cache = None

    def forward(self, branches):
        stacked = np.stack(branches, axis=2)         # B x L x K
        argmax = stacked.argmax(axis=1)              # B x K
        s = stacked.mean(axis=1) + stacked.max(axis=1)
        att = sigmoid_forward(self.fc2.forward(self.act.forward(self.fc1.forward(s))))
        self._cache = (stacked.shape, argmax, att)
        return att

    def backward(self, datt):
        if self._cache is None:
            raise StateError("attention: backward before forward")
        (b, l, k), argmax, att = self._cache
        da = datt * att * (1.0 - att)
        ds = self.fc1.backward(self.act.backward(self.fc2.backward(da)))
        dstacked = np.broadcast_to(ds[:, None, :] / l, (b, l, k)).copy()
        rows = np.arange(b)[:, None]
        cols = np.arange(k)[None, :]
        dstacked[rows, argmax, cols] += ds
        return [dstacked[:, :, j] for j in range(k)]


class FusionModel:
    def __init__(self, config):
        config.validate()
        self.config = config
        self.store = ParamStore()
        rng = np.random.default_rng(config.seed)
        widths = config.branch_widths()

        self.heads = {}
        if config.has_txt:
            self.heads["txt"] = ProjectionHead(self.store, "proj_txt", widths["txt"], config, rng)
        if config.has_img:
            self.heads["img"] = ProjectionHead(self.store, "proj_img", widths["img"], config, rng)
        if config.has_mix:
            self.heads["mix"] = ProjectionHead(self.store, "proj_mix", widths["mix"], config, rng)
        self.attention = (ModalityAttention(self.store, len(config.branch_names()), rng)
                          if config.has_attention else None)
        self.cls_fc1 = Linear(self.store, "cls.fc1", config.proj_out, config.cls_hidden, rng)
        self.cls_act = Activation("relu")
        self.cls_fc2 = Linear(self.store, "cls.fc2", config.cls_hidden, config.cls_out, rng)
        self.gate = (GateState(self.store, config.gate_momentum, config.gate_eps)
                     if config.uses_gate else None)
        self._cache = None

    # ------------------------------------------------------------------
    def _check_batch(self, batch):
        got = (batch.f_bert.shape[1], batch.f_resnet.shape[1],
               batch.f_clip_t.shape[1], batch.f_clip_i.shape[1])
        want = (self.config.n_bert, self.config.n_resnet,
                self.config.n_clip, self.config.n_clip)
        if got != want:
            raise DimensionError(f"batch dims {got} do not match config {want}")

    def forward(self, batch, train=False, rng=None):
        cfg = self.config
        self._check_batch(batch)
        if train and cfg.dropout_rate > 0.0 and rng is None:
            raise ConfigError("training forward with dropout needs an rng")

        inputs = {}
        if cfg.has_txt:
            inputs["txt"] = (np.concatenate([batch.f_bert, batch.f_clip_t], axis=1)
                             if cfg.clip_in_unimodal else batch.f_bert)
        if cfg.has_img:
            inputs["img"] = (np.concatenate([batch.f_resnet, batch.f_clip_i], axis=1)
                             if cfg.clip_in_unimodal else batch.f_resnet)
        if cfg.has_mix:
            inputs["mix"] = np.concatenate([batch.f_clip_t, batch.f_clip_i], axis=1)

        sim = gate = sim_cache = p_mix = None
        if cfg.has_mix:
            sim, sim_cache = _cosine_rows(batch.f_clip_t, batch.f_clip_i)
        projected = {}
        for name in cfg.branch_names():
            projected[name] = self.heads[name].forward(inputs[name], train, rng)
        if cfg.has_mix and cfg.uses_gate:
            gate = self.gate.forward(sim, train)
            p_mix = projected["mix"]
            projected["mix"] = gate[:, None] * p_mix

        branch_names = cfg.branch_names()
        branches = [projected[n] for n in branch_names]
        att = None
        if self.attention is not None:
            att = self.attention.forward(branches)
            m_agg = sum(att[:, k:k + 1] * branches[k] for k in range(len(branches)))
        elif len(branches) > 1:
            m_agg = sum(branches[1:], start=branches[0])
        else:
            m_agg = branches[0]

        logits = self.cls_fc2.forward(self.cls_act.forward(self.cls_fc1.forward(m_agg)))
        self._cache = {
            "branches": branches, "branch_names": branch_names,
            "att": att, "gate": gate, "p_mix": p_mix, "sim_cache": sim_cache,
            "batch_shape": (len(batch), cfg.n_bert, cfg.n_resnet, cfg.n_clip),
        }
        return ForwardTrace(
            ids=batch.ids, logits=logits, m_agg=m_agg, sim=sim, gate=gate,
            att=att, att_branches=branch_names if att is not None else (),
            m_txt=projected.get("txt"), m_img=projected.get("img"),
            m_mix=projected.get("mix"),
        )

    def backward(self, dlogits):
        """Accumulate parameter gradients; return gradients w.r.t. the inputs."""
        if self._cache is None:
            raise StateError("model: backward before forward")
        cfg = self.config
        cache = self._cache
        branches = cache["branches"]
        names = cache["branch_names"]
        b, n_bert, n_resnet, n_clip = cache["batch_shape"]

        d_agg = self.cls_fc1.backward(self.cls_act.backward(self.cls_fc2.backward(dlogits)))
        if self.attention is not None:
            att = cache["att"]
            datt = np.stack([(d_agg * m).sum(axis=1) for m in branches], axis=1)
            dbranches = [att[:, k:k + 1] * d_agg for k in range(len(branches))]
            for k, extra in enumerate(self.attention.backward(datt)):
                dbranches[k] = dbranches[k] + extra
        else:
            dbranches = [d_agg] * len(branches)

        grads = InputGrads(
            f_bert=np.zeros((b, n_bert)), f_resnet=np.zeros((b, n_resnet)),
            f_clip_t=np.zeros((b, n_clip)), f_clip_i=np.zeros((b, n_clip)))

        dsim = None
        for name, dm in zip(names, dbranches):
            if name == "mix" and cfg.uses_gate:
                gate, p_mix = cache["gate"], cache["p_mix"]
                dgate = (dm * p_mix).sum(axis=1)
                dsim = self.gate.backward(dgate)
                dm = gate[:, None] * dm
            dx = self.heads[name].backward(dm)
            if name == "txt":
                grads.f_bert += dx[:, :n_bert]
                if cfg.clip_in_unimodal:
                    grads.f_clip_t += dx[:, n_bert:]
            elif name == "img":
                grads.f_resnet += dx[:, :n_resnet]
                if cfg.clip_in_unimodal:
                    grads.f_clip_i += dx[:, n_resnet:]
            else:
                grads.f_clip_t += dx[:, :n_clip]
                grads.f_clip_i += dx[:, n_clip:]
        if dsim is not None:
            dt, di = _cosine_rows_backward(dsim, cache["sim_cache"])
            grads.f_clip_t += dt
            grads.f_clip_i += di
        return grads

    def zero_grads(self):
        self.store.zero_grads()

    def num_parameters(self):
        return self.store.num_scalars()


def build_model(config):
    return FusionModel(config)


def count_parameters(config):
    """Exact trainable-scalar count for the variant."""
    return FusionModel(config).num_parameters()
