"""Similarity-gated multimodal fusion classifier over frozen embeddings."""

from .corpus import (
    CorpusHeader,
    EmbeddingRecord,
    read_corpus,
    read_corpus_jsonl,
    write_corpus,
    write_corpus_jsonl,
)
from .errors import (
    BatchSizeError,
    CheckpointError,
    ConfigError,
    CorpusFormatError,
    DimensionError,
    FndFusionError,
    LabelError,
    NumericError,
    SimilarityError,
    SplitError,
    StateError,
)
from .checkpoint import load_checkpoint, save_checkpoint
from .metrics import (
    MetricsReport,
    SampleReport,
    SimilarityBinReport,
    evaluate,
    export_features,
    format_comparison_table,
    format_metrics_table,
    metrics_from_counts,
    sample_report,
    similarity_bins,
)
from .model import (
    Batch,
    ForwardTrace,
    FusionConfig,
    FusionModel,
    VARIANTS,
    build_model,
    concat_features,
    cosine_similarity,
    count_parameters,
    make_batch,
)
from .nn import ParamStore, cross_entropy
from .optim import adam_step
from .synthetic import SyntheticSpec, generate_synthetic, split
from .training import RunLog, TrainConfig, eval_accuracy, resume, train

__version__ = "0.1.0"

__all__ = [
    "Batch", "BatchSizeError", "CheckpointError", "ConfigError", "CorpusFormatError",
    "CorpusHeader", "DimensionError", "EmbeddingRecord", "FndFusionError",
    "ForwardTrace", "FusionConfig", "FusionModel", "LabelError", "MetricsReport",
    "NumericError", "ParamStore", "RunLog", "SampleReport", "SimilarityBinReport",
    "SimilarityError", "SplitError", "StateError", "SyntheticSpec", "TrainConfig",
    "VARIANTS", "adam_step", "build_model", "concat_features", "cosine_similarity",
    "count_parameters", "cross_entropy", "eval_accuracy", "evaluate",
    "export_features", "format_comparison_table", "format_metrics_table",
    "generate_synthetic", "load_checkpoint", "make_batch", "metrics_from_counts",
    "read_corpus", "read_corpus_jsonl", "resume", "sample_report",
    "save_checkpoint", "similarity_bins", "split", "train", "write_corpus",
    "write_corpus_jsonl",
]
