"""DiscRE: continuous discourse relation embeddings from unlabeled short text.

The pipeline: segment messages into discourse arguments, weakly label
argument pairs with connective posteriors, train a two-level recurrent
encoder against those soft targets, then reuse the frozen embeddings in
transfer-learning probes.
"""

__version__ = "0.1.0"

from .corpus_io import (
    TRAINING_KEYWORDS,
    LabeledDataset,
    PosteriorTable,
    RawMessage,
    WordVectorTable,
    build_training_corpus,
    load_corpus,
    load_labeled_dataset,
    load_posterior_table,
    load_word_vectors,
)
from .errors import (
    CheckpointError,
    DataFormatError,
    DiscreError,
    TrainingDivergedError,
)
from .instancegen import (
    TargetDistribution,
    TrainingInstance,
    build_training_set,
    make_explicit_instance,
    make_implicit_instance,
    pseudo_label,
)
from .model import (
    Checkpoint,
    LevelOutputs,
    ModelConfig,
    encode_argument,
    extract_discre,
    forward,
    gradients,
    load_checkpoint,
    loss,
    save_checkpoint,
    train,
)
from .probe import (
    FeatureMatrix,
    LinearModel,
    MetricsReport,
    attention_stats,
    f1_metrics,
    kfold_cv,
    message_features,
    pair_features,
    project_2d,
    train_linear,
)
from .segmenter import (
    ArgumentSegmentation,
    Token,
    detect_connectives,
    extract_arguments,
    pos_tag,
    preprocess,
    segment_corpus,
    segment_message,
)

__all__ = [
    "__version__",
    "TRAINING_KEYWORDS",
    "LabeledDataset",
    "PosteriorTable",
    "RawMessage",
    "WordVectorTable",
    "build_training_corpus",
    "load_corpus",
    "load_labeled_dataset",
    "load_posterior_table",
    "load_word_vectors",
    "DiscreError",
    "DataFormatError",
    "CheckpointError",
    "TrainingDivergedError",
    "TargetDistribution",
    "TrainingInstance",
    "build_training_set",
    "make_explicit_instance",
    "make_implicit_instance",
    "pseudo_label",
    "Checkpoint",
    "LevelOutputs",
    "ModelConfig",
    "encode_argument",
    "extract_discre",
    "forward",
    "gradients",
    "load_checkpoint",
    "loss",
    "save_checkpoint",
    "train",
    "FeatureMatrix",
    "LinearModel",
    "MetricsReport",
    "attention_stats",
    "f1_metrics",
    "kfold_cv",
    "message_features",
    "pair_features",
    "project_2d",
    "train_linear",
    "ArgumentSegmentation",
    "Token",
    "detect_connectives",
    "extract_arguments",
    "pos_tag",
    "preprocess",
    "segment_corpus",
    "segment_message",
]
