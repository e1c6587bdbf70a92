"""
Names shared between the ingestion, modelling, and reporting modules. Keeping the
literal names in one place means serialised reports, config keys and the code that
reads them cannot drift apart.
"""

from lexxfer.util.enum import StrEnum


class CanonicalClass(StrEnum):
    NEUTRAL = "Neutral"
    SARCASM = "Sarcasm"
    IMPLICIT_HATE = "ImplicitHate"
    EXPLICIT_HATE = "ExplicitHate"


class Source(StrEnum):
    SARC = "SARC"
    IMPLICIT_HATE_CORPUS = "ImplicitHateCorpus"
    ETHOS = "ETHOS"
    SARCASM_V2 = "SarcasmV2"
    COMBINED = "Combined"


class TaskName(StrEnum):
    SARCASM = "SarcasmTask"
    HATE = "HateTask"


class Streams(StrEnum):
    COMMENT_ONLY = "CommentOnly"
    COMMENT_PLUS_PARENT = "CommentPlusParent"


class SimilarityMetric(StrEnum):
    JACCARD = "Jaccard"
    JSD = "JSD"


class JsdVariant(StrEnum):
    DIVERGENCE_BASE2 = "divergence_base2"
    DISTANCE_BASE_E = "distance_base_e"


class Experiment(StrEnum):
    SINGLE_STEP = "SingleStep"
    SEQUENTIAL = "Sequential"
    ABLATION = "Ablation"
    SIMILARITY = "Similarity"


class EvalSubset(StrEnum):
    ALL = "all"
    ALL_HATE = "all_hate"
    IMPLICIT_ONLY = "implicit_only"


# Stage names of the sequential strategy, in training order.
STAGE_SARCASM = "sarcasm"
STAGE_IMPLICIT_HATE = "implicit_hate"
STAGE_ETHOS = "ethos"
SEQUENTIAL_STAGES = (STAGE_SARCASM, STAGE_IMPLICIT_HATE, STAGE_ETHOS)
SINGLE_STEP_STAGE = "single_step"

# Dataset keys in the run config.
DATASET_SARC = "sarc"
DATASET_IMPLICIT_HATE = "implicit_hate"
DATASET_ETHOS = "ethos"
DATASET_SARCASM_V2 = "sarcasm_v2"
DATASET_SOURCES = {
    DATASET_SARC: Source.SARC,
    DATASET_IMPLICIT_HATE: Source.IMPLICIT_HATE_CORPUS,
    DATASET_ETHOS: Source.ETHOS,
    DATASET_SARCASM_V2: Source.SARCASM_V2,
}

# Adapter column roles.
COL_ID = "id"
COL_TEXT = "text"
COL_PARENT_TEXT = "parent_text"
COL_LABEL = "label"
COL_UPS = "ups"
COL_DOWNS = "downs"
COL_SCORE = "score"

# Preprocessing defaults.
DEFAULT_MIN_UPS = 10
DEFAULT_MAX_DOWNS = 0
DEFAULT_ETHOS_THRESHOLD = 0.33

# Ingest report skip reasons.
SKIP_MISSING_TEXT = "missing_text"
SKIP_MISSING_LABEL = "missing_label"
SKIP_UNKNOWN_LABEL = "unknown_label"
SKIP_BAD_SCORE = "bad_score"
SKIP_SCORE_OUT_OF_RANGE = "score_out_of_range"
SKIP_BAD_VOTES = "bad_votes"
SKIP_SHORT_ROW = "short_row"
SKIP_DUPLICATE_ID = "duplicate_id"

SCHEMA_VERSION = "1"
MODEL_FORMAT_VERSION = 1
MODEL_IDENTITY = "hashed-ngram-logistic-sgd"

# Feature hashing.
HASH_SEED = 0x5EED1E55
DEFAULT_HASH_DIMS = 2**18
MIN_HASH_DIMS = 2**10

# Report metric names in table order.
METRIC_NAMES = ("precision", "recall", "f1", "mcc", "auc")

# Output layout.
DIR_REPORTS = "reports"
DIR_MODELS = "models"
DIR_INGEST = "ingest"

# CLI exit codes.
EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_INGEST = 2
EXIT_RUNTIME = 3
