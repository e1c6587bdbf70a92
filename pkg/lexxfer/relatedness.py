"""
Lexical relatedness between corpora: Jaccard similarity over top-k n-gram sets,
Jensen-Shannon divergence over unigram distributions, and the bootstrap protocol
that summarises them over many random subsamples.
"""

import logging
import math
from collections import Counter
from collections.abc import Iterable, Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import entropy

from lexxfer.constants import JsdVariant, SimilarityMetric
from lexxfer.corpus import Corpus
from lexxfer.errors import LexXferValueError
from lexxfer.ngrams import (
    Ngram,
    NgramTable,
    UnigramDistribution,
    iter_ngrams,
    ngram_key,
    tokenize,
    top_k,
)
from lexxfer.utils import rows_to_csv

logger = logging.getLogger(__name__)
logger.addHandler(logging.NullHandler())

SUMMARY_CSV_HEADER = ("pair", "metric", "mean", "std", "min", "max")


def jaccard(a: Iterable, b: Iterable) -> float:
    """|a & b| / |a | b|, and 1.0 when both sets are empty."""
    a, b = set(a), set(b)
    union = len(a | b)
    if union == 0:
        return 1.0
    return len(a & b) / union


def jsd(
    p: UnigramDistribution,
    q: UnigramDistribution,
    variant: JsdVariant = JsdVariant.DIVERGENCE_BASE2,
) -> float:
    """
    Jensen-Shannon divergence, H(M) - (H(P) + H(Q)) / 2 with M = (P + Q) / 2.

    The default base-2 divergence lies in [0, 1]. The `distance_base_e` variant is
    the square root of the natural-log divergence (scipy's jensenshannon convention).
    """
    for name, dist in (("p", p), ("q", q)):
        if not dist.is_normalised():
            raise LexXferValueError(
                f"Distribution '{name}' is not normalised, sums to {sum(dist.probs.values())}."
            )
    support = sorted(set(p.probs) | set(q.probs))
    pv = np.array([p.probs.get(t, 0.0) for t in support], dtype=np.float64)
    qv = np.array([q.probs.get(t, 0.0) for t in support], dtype=np.float64)
    mv = (pv + qv) / 2.0
    base = 2 if variant is JsdVariant.DIVERGENCE_BASE2 else math.e
    divergence = entropy(mv, base=base) - (entropy(pv, base=base) + entropy(qv, base=base)) / 2.0
    divergence = max(0.0, float(divergence))
    if variant is JsdVariant.DISTANCE_BASE_E:
        return min(1.0, math.sqrt(divergence))
    return min(1.0, divergence)


@dataclass(frozen=True)
class OverlapCount:
    shared: int
    unique_a: int
    unique_b: int

    @property
    def shared_fraction(self) -> float:
        total = self.shared + self.unique_a + self.unique_b
        return self.shared / total if total else 1.0

    def to_dict(self) -> dict:
        return {"shared": self.shared, "unique_a": self.unique_a, "unique_b": self.unique_b}


def overlap_counts(a: Iterable, b: Iterable) -> OverlapCount:
    a, b = set(a), set(b)
    shared = len(a & b)
    return OverlapCount(shared=shared, unique_a=len(a) - shared, unique_b=len(b) - shared)


def overlap_csv(a: Iterable[Ngram], b: Iterable[Ngram]) -> str:
    """Shared / unique_a / unique_b n-gram listing for external Venn plotting."""
    a, b = set(a), set(b)
    sections = (("shared", a & b), ("unique_a", a - b), ("unique_b", b - a))
    rows = (
        (section, key)
        for section, grams in sections
        for key in sorted(ngram_key(g) for g in grams)
    )
    return rows_to_csv(header=("section", "ngram"), rows=rows)


@dataclass(frozen=True)
class BootstrapSpec:
    """
    :param iterations: Number of bootstrap iterations.
    :param sample_size: Documents drawn from each corpus per iteration.
    :param top_k: Size of the n-gram sets compared by Jaccard.
    :param seed: Iteration i draws from a generator seeded with seed ^ i.
    :param metric: Jaccard or JSD.
    :param replace: Sample with replacement (default: without).
    :param orders: n-gram orders pooled for the Jaccard ranking.
    :param jsd_variant: Divergence convention for JSD.
    """

    iterations: int
    sample_size: int
    seed: int
    metric: SimilarityMetric
    top_k: int = 1000
    replace: bool = False
    orders: tuple[int, ...] = (1, 2)
    jsd_variant: JsdVariant = JsdVariant.DIVERGENCE_BASE2

    def __post_init__(self):
        if self.iterations < 1:
            raise LexXferValueError(f"iterations must be >= 1, got {self.iterations}.")
        if self.sample_size < 1:
            raise LexXferValueError(f"sample_size must be >= 1, got {self.sample_size}.")
        if self.top_k < 1:
            raise LexXferValueError(f"top_k must be >= 1, got {self.top_k}.")
        if not 0 <= self.seed < 2**64:
            raise LexXferValueError(f"seed must be an unsigned 64-bit integer: {self.seed}")

    def to_dict(self) -> dict:
        return {
            "iterations": self.iterations,
            "sample_size": self.sample_size,
            "seed": self.seed,
            "metric": self.metric.value,
            "top_k": self.top_k,
            "replace": self.replace,
            "orders": list(self.orders),
            "jsd_variant": self.jsd_variant.value,
        }


def summarize(values: Sequence[float]) -> tuple[float, float, float, float]:
    """Mean, population standard deviation, min and max."""
    arr = np.asarray(values, dtype=np.float64)
    if arr.size == 0:
        raise LexXferValueError("Cannot summarize an empty sequence.")
    lo, hi = float(arr.min()), float(arr.max())
    # Rounding in the sum must not push the mean outside [min, max].
    mean = min(max(float(arr.mean()), lo), hi)
    return mean, float(arr.std(ddof=0)), lo, hi


@dataclass(frozen=True)
class SimilarityReport:
    pair: tuple[str, str]
    metric: str
    mean: float
    std: float
    min: float
    max: float
    iterations: int
    sample_size: int
    per_iteration: tuple[float, ...] | None = None
    spec: dict = field(default_factory=dict, compare=False)

    @classmethod
    def from_values(
        cls,
        pair: tuple[str, str],
        metric: str,
        values: Sequence[float],
        sample_size: int,
        keep_per_iteration: bool = True,
        spec: dict | None = None,
    ) -> "SimilarityReport":
        mean, std, lo, hi = summarize(values)
        return cls(
            pair=pair,
            metric=metric,
            mean=mean,
            std=std,
            min=lo,
            max=hi,
            iterations=len(values),
            sample_size=sample_size,
            per_iteration=tuple(float(v) for v in values) if keep_per_iteration else None,
            spec=dict(spec or {}),
        )

    @property
    def pair_label(self) -> str:
        return f"{self.pair[0]} vs. {self.pair[1]}"

    def to_dict(self) -> dict:
        return {
            "pair": list(self.pair),
            "metric": self.metric,
            "mean": self.mean,
            "std": self.std,
            "min": self.min,
            "max": self.max,
            "iterations": self.iterations,
            "sample_size": self.sample_size,
            "per_iteration": None if self.per_iteration is None else list(self.per_iteration),
            "spec": self.spec,
        }

    def summary_row(self) -> tuple:
        return (self.pair_label, self.metric, self.mean, self.std, self.min, self.max)


def reports_to_csv(reports: Iterable[SimilarityReport]) -> str:
    return rows_to_csv(header=SUMMARY_CSV_HEADER, rows=(r.summary_row() for r in reports))


class _TokenizedCorpus:
    """Token lists of a corpus' texts, computed once and shared by all iterations."""

    def __init__(self, corpus: Corpus):
        self.name = corpus.name
        self.tokens = [tuple(tokenize(d.text)) for d in corpus.documents]

    def __len__(self) -> int:
        return len(self.tokens)


def _check_sizes(corpus: _TokenizedCorpus, spec: BootstrapSpec):
    if len(corpus) == 0:
        raise LexXferValueError(f"Cannot sample from the empty {corpus.name} corpus.")
    if not any(corpus.tokens):
        raise LexXferValueError(f"No document of the {corpus.name} corpus has any tokens.")
    if not spec.replace and spec.sample_size > len(corpus):
        raise LexXferValueError(
            f"sample_size {spec.sample_size} exceeds the {len(corpus)} documents of "
            f"{corpus.name}; sample with replacement or lower the sample size."
        )


def _draw(corpus: _TokenizedCorpus, spec: BootstrapSpec, rng: np.random.Generator):
    idx = rng.choice(len(corpus), size=spec.sample_size, replace=spec.replace)
    return [corpus.tokens[i] for i in idx.tolist()]


def _samples(a: _TokenizedCorpus, b: _TokenizedCorpus, spec: BootstrapSpec, iteration: int):
    rng = np.random.default_rng(spec.seed ^ iteration)
    return _draw(a, spec, rng), _draw(b, spec, rng)


def _top_k_set(sample: Sequence[Sequence[str]], spec: BootstrapSpec) -> set[Ngram]:
    counts: Counter = Counter()
    for tokens in sample:
        counts.update(iter_ngrams(tokens, spec.orders))
    return set(top_k(NgramTable(counts=counts), spec.top_k))


def _distribution(
    sample: Sequence[Sequence[str]], corpus: _TokenizedCorpus, iteration: int
) -> UnigramDistribution:
    counts: Counter = Counter()
    for tokens in sample:
        counts.update(tokens)
    if not counts:
        raise LexXferValueError(
            f"Bootstrap iteration {iteration} drew {len(sample)} documents of the "
            f"{corpus.name} corpus without any tokens; raise the sample size or drop "
            f"documents that have no words."
        )
    return UnigramDistribution.from_counts(counts)


def _iteration_value(
    a: _TokenizedCorpus, b: _TokenizedCorpus, spec: BootstrapSpec, iteration: int
) -> float:
    sample_a, sample_b = _samples(a, b, spec, iteration)
    if spec.metric is SimilarityMetric.JACCARD:
        return jaccard(_top_k_set(sample_a, spec), _top_k_set(sample_b, spec))
    return jsd(
        _distribution(sample_a, a, iteration),
        _distribution(sample_b, b, iteration),
        spec.jsd_variant,
    )


def bootstrap_similarity(
    a: Corpus,
    b: Corpus,
    spec: BootstrapSpec,
    threads: int = 1,
    keep_per_iteration: bool = True,
) -> SimilarityReport:
    """
    Compare two corpora over `spec.iterations` random subsamples.

    Iterations are independent and may run on several threads; values are collected
    in iteration order so the report equals a single-threaded run.
    """
    ta, tb = _TokenizedCorpus(a), _TokenizedCorpus(b)
    _check_sizes(ta, spec)
    _check_sizes(tb, spec)
    logger.info(
        "Bootstrapping %s %s vs %s: %s iterations of %s documents.",
        spec.metric.value,
        a.name,
        b.name,
        spec.iterations,
        spec.sample_size,
    )

    def run(iteration: int) -> float:
        return _iteration_value(ta, tb, spec, iteration)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as executor:
            values = list(executor.map(run, range(spec.iterations)))
    else:
        values = [run(i) for i in range(spec.iterations)]
    return SimilarityReport.from_values(
        pair=(a.name, b.name),
        metric=spec.metric.value,
        values=values,
        sample_size=spec.sample_size,
        keep_per_iteration=keep_per_iteration,
        spec=spec.to_dict(),
    )


def iteration_top_k_sets(
    a: Corpus, b: Corpus, spec: BootstrapSpec, iteration: int
) -> tuple[set[Ngram], set[Ngram]]:
    """The top-k n-gram sets compared by one Jaccard iteration, for Venn overlap export."""
    if not 0 <= iteration < spec.iterations:
        raise LexXferValueError(
            f"Iteration {iteration} is outside 0..{spec.iterations - 1}."
        )
    ta, tb = _TokenizedCorpus(a), _TokenizedCorpus(b)
    _check_sizes(ta, spec)
    _check_sizes(tb, spec)
    sample_a, sample_b = _samples(ta, tb, spec, iteration)
    return _top_k_set(sample_a, spec), _top_k_set(sample_b, spec)
