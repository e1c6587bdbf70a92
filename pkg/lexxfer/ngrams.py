"""
Tokenisation, n-gram frequency tables, top-k rankings and unigram distributions.
"""

import unicodedata
from collections import Counter
from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass, field
from functools import lru_cache
from types import MappingProxyType

from lexxfer.corpus import Document
from lexxfer.errors import LexXferValueError
from lexxfer.utils import rows_to_csv

Ngram = tuple[str, ...]
SUPPORTED_ORDERS = frozenset({1, 2})
NORMALISATION_TOLERANCE = 1e-9


@lru_cache(maxsize=4096)
def _is_punctuation(char: str) -> bool:
    return unicodedata.category(char).startswith("P")


def _strip_punctuation(token: str) -> str:
    start, end = 0, len(token)
    while start < end and _is_punctuation(token[start]):
        start += 1
    while end > start and _is_punctuation(token[end - 1]):
        end -= 1
    return token[start:end]


def tokenize(text: str) -> list[str]:
    """
    Lowercase, split on whitespace, and strip punctuation from both ends of each token.

    Apostrophes and hyphens inside a word are kept: "it's" and "well-known" stay whole.
    Tokens that are only punctuation are dropped.
    """
    tokens = []
    for raw in text.lower().split():
        token = _strip_punctuation(raw)
        if token:
            tokens.append(token)
    return tokens


def ngram_key(ngram: Ngram) -> str:
    """The n-gram joined by single spaces; used for ranking ties, hashing and export."""
    return " ".join(ngram)


@dataclass(frozen=True)
class NgramTable:
    """Occurrence counts of unigrams and / or bigrams."""

    counts: Mapping[Ngram, int] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(
            self, "counts", MappingProxyType({k: v for k, v in self.counts.items() if v > 0})
        )

    @property
    def total(self) -> int:
        return sum(self.counts.values())

    def __len__(self) -> int:
        return len(self.counts)

    def ranked(self) -> list[tuple[Ngram, int]]:
        """All entries by descending count, ties by the space-joined n-gram."""
        return sorted(self.counts.items(), key=lambda kv: (-kv[1], ngram_key(kv[0])))

    def to_csv(self) -> str:
        return rows_to_csv(
            header=("ngram", "count"),
            rows=((ngram_key(k), v) for k, v in self.ranked()),
        )


def _check_orders(orders: Iterable[int]) -> frozenset[int]:
    orders = frozenset(orders)
    if not orders:
        raise LexXferValueError("At least one n-gram order is required.")
    if not orders <= SUPPORTED_ORDERS:
        raise LexXferValueError(f"Unsupported n-gram orders: {sorted(orders - SUPPORTED_ORDERS)}")
    return orders


def iter_ngrams(tokens: Sequence[str], orders: Iterable[int]) -> Iterable[Ngram]:
    """Every contiguous n-gram of each requested order, unigrams first."""
    for n in sorted(_check_orders(orders)):
        for i in range(len(tokens) - n + 1):
            yield tuple(tokens[i : i + n])


def extract_ngrams(tokens: Sequence[str], orders: Iterable[int] = (1, 2)) -> NgramTable:
    return NgramTable(counts=Counter(iter_ngrams(tokens, orders)))


def corpus_ngram_table(
    documents: Iterable[Document], orders: Iterable[int] = (1, 2)
) -> NgramTable:
    """One table summed over the texts of the documents (parent texts excluded)."""
    orders = _check_orders(orders)
    counts: Counter = Counter()
    for doc in documents:
        counts.update(iter_ngrams(tokenize(doc.text), orders))
    return NgramTable(counts=counts)


def top_k(table: NgramTable, k: int) -> list[Ngram]:
    """
    The k most frequent n-grams, most frequent first.

    Ties are broken by the lexicographic order of the space-joined n-gram, so the
    result does not depend on how the table was built.
    """
    if k < 1:
        raise LexXferValueError(f"k must be positive, got {k}.")
    return [ngram for ngram, _ in table.ranked()[:k]]


@dataclass(frozen=True)
class UnigramDistribution:
    probs: Mapping[str, float]

    def __post_init__(self):
        object.__setattr__(self, "probs", MappingProxyType(dict(self.probs)))

    def is_normalised(self, tolerance: float = NORMALISATION_TOLERANCE) -> bool:
        if any(p < 0.0 for p in self.probs.values()):
            return False
        return abs(sum(self.probs.values()) - 1.0) <= tolerance

    @classmethod
    def from_counts(cls, counts: Mapping[str, int]) -> "UnigramDistribution":
        total = sum(counts.values())
        if total <= 0:
            raise LexXferValueError("A unigram distribution needs at least one token.")
        return cls(probs={t: c / total for t, c in counts.items() if c > 0})


def unigram_distribution(documents: Iterable[Document]) -> UnigramDistribution:
    """Relative token frequencies over the document texts (parent texts excluded)."""
    counts: Counter = Counter()
    for doc in documents:
        counts.update(tokenize(doc.text))
    return UnigramDistribution.from_counts(counts)
