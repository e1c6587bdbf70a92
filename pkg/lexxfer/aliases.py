"""
Aliases for config values which could be written several ways by a user but mean
the same thing. Keys are normalised (lowercase, "-" and " " replaced by "_") before
lookup, see `StrEnum.parse`.
"""

from lexxfer import constants as const

experiment = {
    "single_step": const.Experiment.SINGLE_STEP,
    "singlestep": const.Experiment.SINGLE_STEP,
    "sequential": const.Experiment.SEQUENTIAL,
    "ablation": const.Experiment.ABLATION,
    "similarity": const.Experiment.SIMILARITY,
}

streams = {
    "comment_only": const.Streams.COMMENT_ONLY,
    "commentonly": const.Streams.COMMENT_ONLY,
    "comment": const.Streams.COMMENT_ONLY,
    "comment_plus_parent": const.Streams.COMMENT_PLUS_PARENT,
    "commentplusparent": const.Streams.COMMENT_PLUS_PARENT,
    "dual": const.Streams.COMMENT_PLUS_PARENT,
}

metric = {
    "jaccard": const.SimilarityMetric.JACCARD,
    "jsd": const.SimilarityMetric.JSD,
    "jensen_shannon": const.SimilarityMetric.JSD,
}

jsd_variant = {
    "divergence": const.JsdVariant.DIVERGENCE_BASE2,
    "divergence_base2": const.JsdVariant.DIVERGENCE_BASE2,
    "distance": const.JsdVariant.DISTANCE_BASE_E,
    "distance_base_e": const.JsdVariant.DISTANCE_BASE_E,
}

source = {
    "sarc": const.Source.SARC,
    "sarcasm": const.Source.SARC,
    "sarcasm_on_reddit": const.Source.SARC,
    "implicit_hate": const.Source.IMPLICIT_HATE_CORPUS,
    "implicit_hate_corpus": const.Source.IMPLICIT_HATE_CORPUS,
    "implicithatecorpus": const.Source.IMPLICIT_HATE_CORPUS,
    "corpus": const.Source.IMPLICIT_HATE_CORPUS,
    "ethos": const.Source.ETHOS,
    "sarcasm_v2": const.Source.SARCASM_V2,
    "sarcasmv2": const.Source.SARCASM_V2,
    "combined": const.Source.COMBINED,
}

# Short names used in document ids.
source_slug = {
    const.Source.SARC: "sarc",
    const.Source.IMPLICIT_HATE_CORPUS: "ihc",
    const.Source.ETHOS: "ethos",
    const.Source.SARCASM_V2: "sv2",
    const.Source.COMBINED: "comb",
}

# Default class strings of the Implicit Hate Corpus top-level labels.
implicit_hate_labels = {
    "not_hate": const.CanonicalClass.NEUTRAL,
    "implicit_hate": const.CanonicalClass.IMPLICIT_HATE,
    "explicit_hate": const.CanonicalClass.EXPLICIT_HATE,
}

# Default label strings of the Sarcasm V2 corpus.
sarcasm_v2_labels = {
    "sarc": const.CanonicalClass.SARCASM,
    "notsarc": const.CanonicalClass.NEUTRAL,
}

# SARC stores 0/1, sometimes exported as floats or booleans.
sarc_labels = {
    "1": const.CanonicalClass.SARCASM,
    "1.0": const.CanonicalClass.SARCASM,
    "true": const.CanonicalClass.SARCASM,
    "0": const.CanonicalClass.NEUTRAL,
    "0.0": const.CanonicalClass.NEUTRAL,
    "false": const.CanonicalClass.NEUTRAL,
}

canonical_class = {
    "neutral": const.CanonicalClass.NEUTRAL,
    "not_hate": const.CanonicalClass.NEUTRAL,
    "sarcasm": const.CanonicalClass.SARCASM,
    "implicit_hate": const.CanonicalClass.IMPLICIT_HATE,
    "implicithate": const.CanonicalClass.IMPLICIT_HATE,
    "explicit_hate": const.CanonicalClass.EXPLICIT_HATE,
    "explicithate": const.CanonicalClass.EXPLICIT_HATE,
}

task = {
    "sarcasm": const.TaskName.SARCASM,
    "sarcasmtask": const.TaskName.SARCASM,
    "hate": const.TaskName.HATE,
    "hatetask": const.TaskName.HATE,
}
