"""
A linear classifier over hashed n-gram features.

Training is plain stochastic gradient descent on the (optionally class weighted)
logistic loss, with optional l1 soft-thresholding. A model can be copied into the
initialisation of the next training stage with `transfer`, which is how weights
are carried from sarcasm detection to hate speech detection.
"""

import logging
import math
from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass, field
from functools import lru_cache
from os import PathLike
from pathlib import Path
from typing import Any

import numpy as np
from scipy.special import expit
from sklearn.utils import murmurhash3_32

from lexxfer import aliases
from lexxfer import constants as const
from lexxfer.constants import Streams
from lexxfer.corpus import Document, class_weights
from lexxfer.errors import ConfigError, LexXferValueError
from lexxfer.ngrams import iter_ngrams, ngram_key, tokenize
from lexxfer.utils import get_pyobj_from_json, write_json

logger = logging.getLogger(__name__)
logger.addHandler(logging.NullHandler())

SIGN_BIT = 1 << 63
# Sparse encoding is used when fewer than this share of weights are non-zero.
SPARSE_DENSITY = 0.5
# Scores stay strictly inside (0, 1) where the logistic rounds to 0.0 or 1.0.
MIN_SCORE = float(np.nextafter(0.0, 1.0))
MAX_SCORE = float(np.nextafter(1.0, 0.0))


@dataclass(frozen=True)
class FeatureSpec:
    hash_dims: int = const.DEFAULT_HASH_DIMS
    orders: frozenset[int] = frozenset({1, 2})
    streams: Streams = Streams.COMMENT_PLUS_PARENT
    signed_hashing: bool = True

    def __post_init__(self):
        object.__setattr__(self, "orders", frozenset(int(o) for o in self.orders))
        object.__setattr__(self, "streams", Streams.parse(self.streams, aliases.streams))
        dims = self.hash_dims
        if not isinstance(dims, int) or dims < const.MIN_HASH_DIMS or dims & (dims - 1):
            raise ConfigError(
                f"hash_dims must be a power of two >= {const.MIN_HASH_DIMS}, got {dims}."
            )
        if not self.orders or not self.orders <= {1, 2}:
            raise ConfigError(f"orders must be a non-empty subset of {{1, 2}}: {self.orders}")

    @property
    def dimension(self) -> int:
        if self.streams is Streams.COMMENT_PLUS_PARENT:
            return 2 * self.hash_dims
        return self.hash_dims

    def to_dict(self) -> dict:
        return {
            "hash_dims": self.hash_dims,
            "orders": sorted(self.orders),
            "streams": self.streams.value,
            "signed_hashing": self.signed_hashing,
        }

    @classmethod
    def from_dict(cls, d: Mapping[str, Any]) -> "FeatureSpec":
        return cls(
            hash_dims=int(d.get("hash_dims", const.DEFAULT_HASH_DIMS)),
            orders=frozenset(d.get("orders", (1, 2))),
            streams=d.get("streams", Streams.COMMENT_PLUS_PARENT),
            signed_hashing=bool(d.get("signed_hashing", True)),
        )


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = 0.05
    epochs: int = 5
    l1_lambda: float = 0.0
    seed: int = 0
    class_weighted: bool = True

    def __post_init__(self):
        for name in ("learning_rate", "l1_lambda"):
            if not math.isfinite(getattr(self, name)):
                raise ConfigError(f"{name} must be finite.")
        if self.learning_rate <= 0:
            raise ConfigError(f"learning_rate must be positive, got {self.learning_rate}.")
        if self.epochs < 1:
            raise ConfigError(f"epochs must be >= 1, got {self.epochs}.")
        if self.l1_lambda < 0:
            raise ConfigError(f"l1_lambda must be non-negative, got {self.l1_lambda}.")
        if not 0 <= self.seed < 2**64:
            raise ConfigError(f"seed must be an unsigned 64-bit integer: {self.seed}")

    def to_dict(self) -> dict:
        return {
            "learning_rate": self.learning_rate,
            "epochs": self.epochs,
            "l1_lambda": self.l1_lambda,
            "seed": self.seed,
            "class_weighted": self.class_weighted,
        }

    @classmethod
    def from_dict(cls, d: Mapping[str, Any], seed: int) -> "TrainConfig":
        return cls(
            learning_rate=float(d.get("learning_rate", 0.05)),
            epochs=int(d.get("epochs", 5)),
            l1_lambda=float(d.get("l1_lambda", 0.0)),
            seed=int(d.get("seed", seed)),
            class_weighted=bool(d.get("class_weighted", True)),
        )


@dataclass(frozen=True)
class SparseVector:
    """Sorted unique indices with their non-zero values."""

    indices: np.ndarray
    values: np.ndarray

    def dot(self, weights: np.ndarray) -> float:
        if self.indices.size == 0:
            return 0.0
        return float(weights[self.indices] @ self.values)

    def to_dense(self, dimension: int) -> np.ndarray:
        dense = np.zeros(dimension, dtype=np.float64)
        dense[self.indices] = self.values
        return dense

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.values))


@lru_cache(maxsize=2**16)
def stable_hash(key: str) -> int:
    """
    64-bit hash of a string, identical across platforms, processes and runs.

    Two seeded MurmurHash3 values form the high and low words.
    """
    hi = murmurhash3_32(key, seed=const.HASH_SEED, positive=True)
    lo = murmurhash3_32(key, seed=const.HASH_SEED + 1, positive=True)
    return (hi << 32) | lo


def _accumulate(
    acc: dict[int, float], text: str | None, spec: FeatureSpec, offset: int
) -> None:
    if not text:
        return
    for gram in iter_ngrams(tokenize(text), spec.orders):
        h = stable_hash(ngram_key(gram))
        index = offset + h % spec.hash_dims
        sign = -1.0 if spec.signed_hashing and h & SIGN_BIT else 1.0
        acc[index] = acc.get(index, 0.0) + sign


def featurize(doc: Document, spec: FeatureSpec, normalize: bool = True) -> SparseVector:
    """
    Hash the n-grams of a document into a sparse vector.

    The comment goes to block 0. With CommentPlusParent the parent text goes to
    block 1 (indices offset by hash_dims); a missing parent leaves block 1 empty.
    Repeated n-grams accumulate. The vector is l2 normalised unless it is zero.
    """
    acc: dict[int, float] = {}
    _accumulate(acc, doc.text, spec, 0)
    if spec.streams is Streams.COMMENT_PLUS_PARENT:
        _accumulate(acc, doc.parent_text, spec, spec.hash_dims)
    items = sorted((i, v) for i, v in acc.items() if v != 0.0)
    indices = np.fromiter((i for i, _ in items), dtype=np.int64, count=len(items))
    values = np.fromiter((v for _, v in items), dtype=np.float64, count=len(items))
    if normalize and values.size:
        values = values / np.linalg.norm(values)
    return SparseVector(indices=indices, values=values)


@dataclass
class LinearModel:
    weights: np.ndarray
    bias: float
    feature_spec: FeatureSpec
    lineage: tuple[str, ...] = field(default_factory=tuple)

    def __post_init__(self):
        self.weights = np.asarray(self.weights, dtype=np.float64)
        self.lineage = tuple(self.lineage)
        if self.weights.shape != (self.feature_spec.dimension,):
            raise LexXferValueError(
                f"Weight length {self.weights.shape} does not match the feature "
                f"dimension {self.feature_spec.dimension}."
            )

    @classmethod
    def zeros(cls, spec: FeatureSpec) -> "LinearModel":
        return cls(weights=np.zeros(spec.dimension), bias=0.0, feature_spec=spec)

    def is_zero(self) -> bool:
        return self.bias == 0.0 and not np.any(self.weights)

    def same_parameters(self, other: "LinearModel") -> bool:
        """Bitwise equality of weights and bias."""
        return (
            self.feature_spec == other.feature_spec
            and self.weights.tobytes() == other.weights.tobytes()
            and float(self.bias) == float(other.bias)
        )

    def l1_norm(self) -> float:
        return float(np.abs(self.weights).sum())


def logistic(z: float) -> float:
    return float(expit(z))


def example_loss(
    weights: np.ndarray, bias: float, x: SparseVector, y: int, sample_weight: float = 1.0
) -> float:
    """Weighted logistic loss of one example, log(1 + e^z) - y z."""
    z = x.dot(weights) + bias
    return sample_weight * (float(np.logaddexp(0.0, z)) - y * z)


def example_gradient(
    weights: np.ndarray, bias: float, x: SparseVector, y: int, sample_weight: float = 1.0
) -> tuple[np.ndarray, float]:
    """
    Gradient of `example_loss`.

    :return: The gradient values at x.indices, and the gradient for the bias.
    """
    g = sample_weight * (logistic(x.dot(weights) + bias) - y)
    return g * x.values, g


def batch_gradient(
    weights: np.ndarray,
    bias: float,
    examples: Iterable[tuple[SparseVector, int, float]],
) -> tuple[np.ndarray, float]:
    """Full-batch gradient of the summed weighted loss, as a dense vector."""
    grad = np.zeros_like(weights)
    grad_bias = 0.0
    for x, y, sample_weight in examples:
        gw, gb = example_gradient(weights, bias, x, y, sample_weight)
        np.add.at(grad, x.indices, gw)
        grad_bias += gb
    return grad, grad_bias


def transfer(model: LinearModel, next_stage: str) -> LinearModel:
    """Copy a model to initialise the next training stage; the source is not touched."""
    return LinearModel(
        weights=model.weights.copy(),
        bias=float(model.bias),
        feature_spec=model.feature_spec,
        lineage=(*model.lineage, next_stage),
    )


def train(
    examples: Sequence[tuple[Document, int]],
    config: TrainConfig,
    spec: FeatureSpec,
    init: LinearModel | None = None,
    stage: str = "train",
) -> LinearModel:
    """
    Fit the logistic loss by SGD.

    Each epoch visits the examples in a permutation drawn from (config.seed, epoch).
    With class weighting each example's gradient is scaled by its class weight. With
    l1_lambda > 0, the weights touched by a step are soft-thresholded by
    learning_rate * l1_lambda. The bias is not regularised.

    :param examples: (document, 0 / 1 label) pairs.
    :param init: Starting weights (e.g. from `transfer`); zeros when None.
    :param stage: Name recorded in the lineage. Not repeated if `init` already ends
      with it, as it does after `transfer(model, stage)`.
    """
    labels = [int(y) for _, y in examples]
    if len(set(labels)) < 2:
        raise LexXferValueError(
            f"Training stage '{stage}' needs both classes, found only: {sorted(set(labels))}"
        )
    if init is None:
        init = LinearModel.zeros(spec)
    elif init.feature_spec != spec:
        raise LexXferValueError(
            f"Initial model features {init.feature_spec.to_dict()} do not match the "
            f"stage features {spec.to_dict()}."
        )
    cw = class_weights(labels) if config.class_weighted else {0: 1.0, 1: 1.0}
    features = [featurize(doc, spec) for doc, _ in examples]
    weights = init.weights.copy()
    bias = float(init.bias)
    shrink = config.learning_rate * config.l1_lambda
    for epoch in range(config.epochs):
        order = np.random.default_rng([config.seed, epoch]).permutation(len(features))
        for i in order.tolist():
            x, y = features[i], labels[i]
            gw, gb = example_gradient(weights, bias, x, y, cw[y])
            if x.indices.size:
                weights[x.indices] -= config.learning_rate * gw
                if shrink > 0.0:
                    touched = weights[x.indices]
                    weights[x.indices] = np.sign(touched) * np.maximum(
                        np.abs(touched) - shrink, 0.0
                    )
            bias -= config.learning_rate * gb
        logger.debug("Stage '%s' epoch %s done.", stage, epoch + 1)
    lineage = init.lineage if init.lineage[-1:] == (stage,) else (*init.lineage, stage)
    logger.info(
        "Trained stage '%s' on %s examples for %s epochs.", stage, len(labels), config.epochs
    )
    return LinearModel(weights=weights, bias=bias, feature_spec=spec, lineage=lineage)


def predict_score(model: LinearModel, doc: Document) -> float:
    score = logistic(featurize(doc, model.feature_spec).dot(model.weights) + model.bias)
    return min(max(score, MIN_SCORE), MAX_SCORE)


def predict_scores(model: LinearModel, docs: Iterable[Document]) -> list[float]:
    return [predict_score(model, d) for d in docs]


def model_to_dict(model: LinearModel) -> dict:
    """
    Versioned container; weights are stored sparse when mostly zero.

    JSON floats round-trip exactly, so a saved model reloads bit for bit.
    """
    nonzero = np.flatnonzero(model.weights)
    content = {
        "format_version": const.MODEL_FORMAT_VERSION,
        "model": const.MODEL_IDENTITY,
        "feature_spec": model.feature_spec.to_dict(),
        "bias": float(model.bias),
        "lineage": list(model.lineage),
        "dimension": int(model.weights.size),
    }
    if nonzero.size < SPARSE_DENSITY * model.weights.size:
        content["encoding"] = "sparse"
        content["indices"] = nonzero.tolist()
        content["values"] = model.weights[nonzero].tolist()
    else:
        content["encoding"] = "dense"
        content["values"] = model.weights.tolist()
    return content


def model_from_dict(content: Mapping[str, Any]) -> LinearModel:
    version = content.get("format_version")
    if version != const.MODEL_FORMAT_VERSION:
        raise LexXferValueError(f"Unsupported model format version: {version}")
    spec = FeatureSpec.from_dict(content["feature_spec"])
    if content["encoding"] == "sparse":
        weights = np.zeros(int(content["dimension"]), dtype=np.float64)
        weights[np.asarray(content["indices"], dtype=np.int64)] = content["values"]
    elif content["encoding"] == "dense":
        weights = np.asarray(content["values"], dtype=np.float64)
    else:
        raise LexXferValueError(f"Unknown weight encoding: {content['encoding']}")
    return LinearModel(
        weights=weights,
        bias=float(content["bias"]),
        feature_spec=spec,
        lineage=tuple(content.get("lineage", ())),
    )


def save_model(model: LinearModel, file_path: str | PathLike[str]) -> Path:
    return write_json(file_path, model_to_dict(model))


def load_model(file_path: str | PathLike[str]) -> LinearModel:
    return model_from_dict(get_pyobj_from_json(file_path))
