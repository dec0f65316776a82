"""Exception types shared across the package."""


class FndFusionError(Exception):
    """Base class for all package errors."""


class DimensionError(FndFusionError):
    """Tensor shapes do not conform."""


class BatchSizeError(FndFusionError):
    """Operation requires a larger batch (batch statistics need B >= 2)."""


class ConfigError(FndFusionError):
    """Invalid configuration value or combination."""


class LabelError(FndFusionError):
    """Label outside the {0, 1} class set."""


class SimilarityError(FndFusionError):
    """Cosine similarity is undefined (zero vector)."""


class CorpusFormatError(FndFusionError):
    """Corpus file is malformed: bad magic, version, truncation, or dims."""


class SplitError(FndFusionError):
    """Dataset split cannot satisfy stratification requirements."""


class StateError(FndFusionError):
    """Backward called without a matching forward trace."""


class NumericError(FndFusionError):
    """Non-finite value encountered during training."""


class CheckpointError(FndFusionError):
    """Checkpoint file malformed or inconsistent with the requested config."""
