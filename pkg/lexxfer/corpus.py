"""
Canonical corpus types, label projection, deterministic splits and class weights.
"""

import json
import logging
from collections import Counter
from collections.abc import Iterable, Iterator, Mapping, Sequence
from dataclasses import dataclass, field
from os import PathLike
from pathlib import Path
from types import MappingProxyType

import numpy as np
from sklearn.model_selection import train_test_split

from lexxfer import aliases
from lexxfer import constants as const
from lexxfer.constants import CanonicalClass, Source, TaskName
from lexxfer.errors import IngestError, LexXferValueError

logger = logging.getLogger(__name__)
logger.addHandler(logging.NullHandler())


@dataclass(frozen=True)
class Document:
    """
    One text sample.

    :param id: Unique within its Corpus.
    :param text: The comment / post text; non-empty after trimming.
    :param parent_text: The parent comment, if the source has one.
    :param raw_label: The label as found in the source file.
    :param canonical_class: The 4-way class assigned at ingestion.
    :param ups: Up-votes (SARC only).
    :param downs: Down-votes (SARC only).
    :param mixed_hate: True for ETHOS hate rows, whose implicit / explicit split is unknown.
    """

    id: str
    text: str
    canonical_class: CanonicalClass
    raw_label: str | float
    parent_text: str | None = None
    ups: int | None = None
    downs: int | None = None
    mixed_hate: bool = False

    def __post_init__(self):
        if not isinstance(self.text, str) or not self.text.strip():
            raise LexXferValueError(f"Document '{self.id}' has empty text.")
        if not isinstance(self.canonical_class, CanonicalClass):
            object.__setattr__(self, "canonical_class", CanonicalClass(self.canonical_class))

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "text": self.text,
            "parent_text": self.parent_text,
            "raw_label": self.raw_label,
            "canonical_class": self.canonical_class.value,
            "ups": self.ups,
            "downs": self.downs,
            "mixed_hate": self.mixed_hate,
        }

    @classmethod
    def from_dict(cls, d: Mapping) -> "Document":
        return cls(
            id=d["id"],
            text=d["text"],
            parent_text=d.get("parent_text"),
            raw_label=d["raw_label"],
            canonical_class=CanonicalClass(d["canonical_class"]),
            ups=d.get("ups"),
            downs=d.get("downs"),
            mixed_hate=bool(d.get("mixed_hate", False)),
        )


@dataclass
class IngestReport:
    """Counts of what happened to the rows of one dataset file."""

    rows_read: int = 0
    rows_kept: int = 0
    rows_skipped: int = 0
    skip_reasons: Counter = field(default_factory=Counter)
    replaced_sequences: int = 0

    def skip(self, reason: str):
        self.rows_skipped += 1
        self.skip_reasons[reason] += 1

    def to_dict(self) -> dict:
        return {
            "rows_read": self.rows_read,
            "rows_kept": self.rows_kept,
            "rows_skipped": self.rows_skipped,
            "skip_reasons": dict(sorted(self.skip_reasons.items())),
            "replaced_sequences": self.replaced_sequences,
        }


@dataclass(frozen=True)
class Corpus:
    """
    An ordered, immutable collection of Documents.

    :param documents: The documents in file (or deterministic shuffle) order.
    :param source: Where the documents came from.
    :param schema_version: Version of the canonical Document schema.
    :param ingest_report: Row counts from loading, if this corpus was loaded from a file.
    """

    documents: tuple[Document, ...]
    source: Source
    schema_version: str = const.SCHEMA_VERSION
    ingest_report: IngestReport | None = field(default=None, compare=False)

    def __post_init__(self):
        documents = tuple(self.documents)
        object.__setattr__(self, "documents", documents)
        ids = Counter(d.id for d in documents)
        duplicates = [k for k, v in ids.items() if v > 1]
        if duplicates:
            raise LexXferValueError(
                f"Document ids must be unique in a corpus, duplicated: {duplicates[:5]}"
            )

    def __len__(self) -> int:
        return len(self.documents)

    def __iter__(self) -> Iterator[Document]:
        return iter(self.documents)

    @property
    def ids(self) -> list[str]:
        return [d.id for d in self.documents]

    @property
    def name(self) -> str:
        return self.source.value

    def class_histogram(self) -> dict[CanonicalClass, int]:
        counts = Counter(d.canonical_class for d in self.documents)
        return {c: counts[c] for c in CanonicalClass if counts[c]}

    def derive(self, documents: Iterable[Document], source: Source | None = None) -> "Corpus":
        """A new corpus from a subset / reordering of documents, keeping provenance."""
        return Corpus(
            documents=tuple(documents),
            source=self.source if source is None else source,
            schema_version=self.schema_version,
        )


@dataclass(frozen=True)
class BinaryTask:
    name: TaskName
    mapping: Mapping[CanonicalClass, int]

    def label(self, document: Document) -> int:
        return self.mapping[document.canonical_class]


SARCASM_TASK = BinaryTask(
    name=TaskName.SARCASM,
    mapping=MappingProxyType(
        {
            CanonicalClass.NEUTRAL: 0,
            CanonicalClass.SARCASM: 1,
            CanonicalClass.IMPLICIT_HATE: 1,
            CanonicalClass.EXPLICIT_HATE: 0,
        }
    ),
)
HATE_TASK = BinaryTask(
    name=TaskName.HATE,
    mapping=MappingProxyType(
        {
            CanonicalClass.NEUTRAL: 0,
            CanonicalClass.SARCASM: 0,
            CanonicalClass.IMPLICIT_HATE: 1,
            CanonicalClass.EXPLICIT_HATE: 1,
        }
    ),
)
TASKS = {SARCASM_TASK.name: SARCASM_TASK, HATE_TASK.name: HATE_TASK}


def get_task(name: TaskName | str) -> BinaryTask:
    return TASKS[TaskName.parse(name, aliases.task)]


@dataclass(frozen=True)
class LabeledView:
    """A corpus paired with a task; labels are computed, the corpus is not touched."""

    corpus: Corpus
    task: BinaryTask

    @property
    def documents(self) -> tuple[Document, ...]:
        return self.corpus.documents

    @property
    def labels(self) -> list[int]:
        return [self.task.label(d) for d in self.corpus.documents]

    def __len__(self) -> int:
        return len(self.corpus)

    def __iter__(self) -> Iterator[tuple[Document, int]]:
        for d in self.corpus.documents:
            yield d, self.task.label(d)


def project_labels(corpus: Corpus, task: BinaryTask) -> LabeledView:
    """Label every document of the corpus with the task's binary mapping."""
    return LabeledView(corpus=corpus, task=task)


@dataclass(frozen=True)
class SplitSpec:
    train_fraction: float
    seed: int
    stratified: bool = True

    def __post_init__(self):
        if not 0.0 < self.train_fraction < 1.0:
            raise LexXferValueError(
                f"train_fraction must be in (0, 1), got {self.train_fraction}."
            )
        if not 0 <= self.seed < 2**64:
            raise LexXferValueError(f"seed must be an unsigned 64-bit integer: {self.seed}")

    def to_dict(self) -> dict:
        return {
            "train_fraction": self.train_fraction,
            "seed": self.seed,
            "stratified": self.stratified,
        }

    @classmethod
    def from_dict(cls, d: Mapping, seed: int) -> "SplitSpec":
        return cls(
            train_fraction=float(d.get("train_fraction", 0.8)),
            seed=int(d.get("seed", seed)),
            stratified=bool(d.get("stratified", True)),
        )


def random_state(seed: int) -> np.random.RandomState:
    """A legacy RandomState for scikit-learn, seeded with the full 64-bit seed."""
    return np.random.RandomState(np.random.MT19937(np.random.SeedSequence(seed)))


def split(corpus: Corpus, spec: SplitSpec) -> tuple[Corpus, Corpus]:
    """
    Partition a corpus into train and test corpora.

    Both halves keep the corpus order. In stratified mode the canonical class
    proportions are preserved within one document per class.
    """
    n = len(corpus)
    if n == 0:
        raise LexXferValueError(f"Cannot split an empty {corpus.name} corpus.")
    n_train = int(np.floor(spec.train_fraction * n))
    if n_train == 0 or n_train == n:
        raise LexXferValueError(
            f"train_fraction {spec.train_fraction} leaves an empty side for "
            f"{n} documents of {corpus.name}."
        )
    strata = None
    if spec.stratified:
        histogram = corpus.class_histogram()
        for cls, count in histogram.items():
            if count < 2:
                raise LexXferValueError(
                    f"Cannot stratify {corpus.name}: class {cls.value} has {count} member."
                )
        if len(histogram) > min(n_train, n - n_train):
            raise LexXferValueError(
                f"Cannot stratify {corpus.name}: {len(histogram)} classes do not fit "
                f"in a side of {min(n_train, n - n_train)} documents."
            )
        strata = [d.canonical_class.value for d in corpus.documents]
    train_idx, test_idx = train_test_split(
        np.arange(n),
        train_size=n_train,
        test_size=n - n_train,
        random_state=random_state(spec.seed),
        shuffle=True,
        stratify=strata,
    )
    docs = corpus.documents
    train = corpus.derive(docs[i] for i in sorted(train_idx.tolist()))
    test = corpus.derive(docs[i] for i in sorted(test_idx.tolist()))
    logger.debug(
        "Split %s: %s train / %s test (seed %s).", corpus.name, len(train), len(test), spec.seed
    )
    return train, test


def class_weights(labels: Sequence[int]) -> dict[int, float]:
    """
    Balanced class weights, weight(c) = N / (2 * count(c)).

    Both classes then carry the same total weight.
    """
    counts = Counter(int(v) for v in labels)
    unknown = set(counts) - {0, 1}
    if unknown:
        raise LexXferValueError(f"Labels must be 0 or 1, found: {sorted(unknown)}")
    if counts[0] == 0 or counts[1] == 0:
        raise LexXferValueError(
            f"Class weights need both classes present, counts: {dict(counts)}"
        )
    n = counts[0] + counts[1]
    return {c: n / (2.0 * counts[c]) for c in (0, 1)}


def write_jsonl(corpus: Corpus, file_path: str | PathLike[str]) -> Path:
    """Write the canonical corpus cache, one Document per line."""
    path = Path(file_path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, mode="w", encoding="utf-8", newline="\n") as out_file:
        header = {"source": corpus.source.value, "schema_version": corpus.schema_version}
        out_file.write(json.dumps({"corpus": header}, sort_keys=True, ensure_ascii=False))
        out_file.write("\n")
        for doc in corpus.documents:
            out_file.write(json.dumps(doc.to_dict(), sort_keys=True, ensure_ascii=False))
            out_file.write("\n")
    return path


def read_jsonl(file_path: str | PathLike[str]) -> Corpus:
    """Read a canonical corpus cache written by `write_jsonl`."""
    path = Path(file_path)
    if not path.is_file():
        raise IngestError(f"Corpus cache does not exist: {path}")
    with open(path, encoding="utf-8") as in_file:
        lines = [line for line in in_file if line.strip()]
    if not lines:
        raise IngestError(f"Corpus cache is empty: {path}")
    try:
        header = json.loads(lines[0])["corpus"]
        documents = [Document.from_dict(json.loads(line)) for line in lines[1:]]
    except (KeyError, ValueError, TypeError) as err:
        raise IngestError(f"Corpus cache is malformed: {path}: {err}") from err
    return Corpus(
        documents=tuple(documents),
        source=Source(header["source"]),
        schema_version=header["schema_version"],
    )
