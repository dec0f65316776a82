import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))  # forward_oracle import

from fndfusion import FusionConfig, SyntheticSpec, generate_synthetic


TINY_DIMS = dict(n_bert=6, n_resnet=8, n_clip=4)


def tiny_config(**overrides):
    """Small-width config; gradient math is dimension-independent."""
    base = dict(TINY_DIMS, proj_hidden=7, proj_out=5, cls_hidden=6,
                dropout_rate=0.0, seed=11)
    base.update(overrides)
    return FusionConfig(**base)


def tiny_records(n_real=8, n_fake=8, seed=5, **overrides):
    spec = SyntheticSpec(n_real=n_real, n_fake=n_fake, seed=seed,
                         **{**TINY_DIMS, **overrides})
    return generate_synthetic(spec)


@pytest.fixture
def records16():
    return tiny_records()
