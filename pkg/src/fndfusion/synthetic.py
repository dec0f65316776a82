"""Seeded synthetic corpora that exercise the similarity gate.

Real and fake classes get Gaussian text/image features whose means sit
class_separation apart along a random unit direction, so the unimodal signal
strength is controlled by class_separation / noise_sigma regardless of
dimensionality.  CLIP pairs share a latent content vector; with the class's
mismatch probability the image-side content is redrawn independently, which
makes low cosine similarity more common among fakes (the mechanism the gate
is meant to pick up).
"""

from dataclasses import dataclass

import numpy as np

from .corpus import LABEL_FAKE, LABEL_REAL, EmbeddingRecord
from .errors import ConfigError, SplitError


@dataclass
class SyntheticSpec:
    n_real: int = 1000
    n_fake: int = 1000
    n_bert: int = 768
    n_resnet: int = 2048
    n_clip: int = 512
    class_separation: float = 2.0
    mismatch_prob_fake: float = 0.8
    mismatch_prob_real: float = 0.1
    noise_sigma: float = 0.5
    seed: int = 0

    def validate(self):
        if self.n_real < 0 or self.n_fake < 0:
            raise ConfigError("record counts must be non-negative")
        if min(self.n_bert, self.n_resnet, self.n_clip) <= 0:
            raise ConfigError("dims must be positive")
        for name in ("mismatch_prob_fake", "mismatch_prob_real"):
            p = getattr(self, name)
            if not 0.0 <= p <= 1.0:
                raise ConfigError(f"{name} must be in [0, 1], got {p}")
        if self.class_separation < 0.0:
            raise ConfigError("class_separation must be >= 0")
        if self.noise_sigma < 0.0:
            raise ConfigError("noise_sigma must be >= 0")


def _unit(rng, n):
    v = rng.standard_normal(n)
    return v / np.linalg.norm(v)


def generate_synthetic(spec):
    """Return the seeded record list described by `spec`. Deterministic."""
    spec.validate()
    rng = np.random.default_rng(spec.seed)

    u_bert = _unit(rng, spec.n_bert)
    u_resnet = _unit(rng, spec.n_resnet)
    half = 0.5 * spec.class_separation

    labels = np.concatenate([
        np.full(spec.n_real, LABEL_REAL, dtype=np.intp),
        np.full(spec.n_fake, LABEL_FAKE, dtype=np.intp),
    ])
    rng.shuffle(labels)

    # per-coordinate CLIP noise scaled so the noise vector's norm is ~noise_sigma
    clip_coord_sigma = spec.noise_sigma / np.sqrt(spec.n_clip)
    mismatch_prob = {LABEL_REAL: spec.mismatch_prob_real, LABEL_FAKE: spec.mismatch_prob_fake}

    records = []
    for i, label in enumerate(labels):
        sign = 1.0 if label == LABEL_REAL else -1.0
        f_bert = sign * half * u_bert + spec.noise_sigma * rng.standard_normal(spec.n_bert)
        f_resnet = sign * half * u_resnet + spec.noise_sigma * rng.standard_normal(spec.n_resnet)

        content = _unit(rng, spec.n_clip)
        f_clip_t = content + clip_coord_sigma * rng.standard_normal(spec.n_clip)
        if rng.random() < mismatch_prob[label]:
            content_i = _unit(rng, spec.n_clip)
        else:
            content_i = content
        f_clip_i = content_i + clip_coord_sigma * rng.standard_normal(spec.n_clip)

        f_clip_t /= np.linalg.norm(f_clip_t)
        f_clip_i /= np.linalg.norm(f_clip_i)
        records.append(EmbeddingRecord(f"syn-{i:06d}", int(label),
                                       f_bert, f_resnet, f_clip_t, f_clip_i))
    return records


def split(records, train_fraction, seed):
    """Seeded, class-stratified split into (train, test).

    Classes present in the data must have at least two members so both sides
    can see them; each side keeps the class proportions within one record.
    """
    if not 0.0 < train_fraction < 1.0:
        raise SplitError(f"train_fraction must be in (0, 1), got {train_fraction}")
    records = list(records)
    rng = np.random.default_rng(seed)

    by_class = {}
    for idx, rec in enumerate(records):
        by_class.setdefault(rec.label, []).append(idx)

    train_idx, test_idx = [], []
    for label in sorted(by_class):
        idxs = np.array(by_class[label])
        if idxs.size < 2:
            raise SplitError(f"class {label} has {idxs.size} member(s); need >= 2 to split")
        rng.shuffle(idxs)
        n_train = int(round(train_fraction * idxs.size))
        n_train = min(max(n_train, 1), idxs.size - 1)  # both sides non-empty per class
        train_idx.extend(idxs[:n_train])
        test_idx.extend(idxs[n_train:])

    train_idx = np.array(train_idx)
    test_idx = np.array(test_idx)
    rng.shuffle(train_idx)
    rng.shuffle(test_idx)
    return [records[i] for i in train_idx], [records[i] for i in test_idx]
