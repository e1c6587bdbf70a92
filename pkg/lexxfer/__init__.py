"""
lexxfer measures lexical relatedness between sarcasm and hate speech corpora, and
runs sarcasm-to-hate transfer learning experiments with a hashed n-gram linear model.
"""

__version__ = "1.0.0"

from lexxfer.corpus import Corpus, Document, project_labels, split
from lexxfer.ingest import load_ethos, load_implicit_hate, load_sarc, load_sarcasm_v2
from lexxfer.metrics import compare, evaluate
from lexxfer.model import FeatureSpec, LinearModel, TrainConfig, train, transfer
from lexxfer.relatedness import BootstrapSpec, bootstrap_similarity, jaccard, jsd

# This is what gets imported when someone imports lexxfer
# flake8: noqa
