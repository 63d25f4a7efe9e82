"""Grounded lexicon toolkit built on per-word fit classifiers.

Words are binary classifiers over object feature vectors; phrases compose by
probability product over candidate objects; classifier coefficients double as
visual word embeddings that fuse with distributional ones; and a small
records layer plus an interactive teaching service round out the pipeline.
"""

from .composition import (
    Episode,
    EvalMetrics,
    ReferentDistribution,
    ResolutionState,
    Scene,
    SceneObject,
    evaluate,
    resolve,
    score_phrase,
)
from .datagen import (
    AttributeGroup,
    Dataset,
    EpisodeRecord,
    GenerativeSpec,
    build_lexicon,
    color_shape_spec,
    generate,
    left_right_spec,
    sample_negatives,
)
from .embeddings import (
    DenotationVector,
    EmbeddingTable,
    attention_combine,
    build_text_embeddings,
    denotation_vector,
    export_visual_embeddings,
    fuse,
)
from .errors import (
    DimensionError,
    FileFormatError,
    StoredValueError,
    TruncatedFileError,
    UnknownSessionError,
    ValidationError,
    VersionMismatchError,
    WaclexError,
)
from .lexicon import Lexicon, TrainConfig, WordClassifier, loss_and_grad, sigmoid
from .records import (
    BasicType,
    ClassifierPredicate,
    Record,
    RecordType,
    holds,
    judge,
    object_record,
    parse_record_type,
    phrase_type,
)

__version__ = "0.1.0"
