"""
Dataset loaders: column-mapped adapters over the table backends, the preprocessing
rules for each dataset, and the combined single-step corpus.
"""

import logging
from collections.abc import Callable, Mapping, Sequence
from dataclasses import dataclass, field
from os import PathLike
from typing import Any

import numpy as np

from lexxfer import aliases
from lexxfer import constants as const
from lexxfer.constants import CanonicalClass, Source
from lexxfer.corpus import Corpus, Document, IngestReport
from lexxfer.errors import ConfigError, IngestError
from lexxfer.ingest_backends import RawTable, TableFormat, is_empty, read_table

logger = logging.getLogger(__name__)
logger.addHandler(logging.NullHandler())


class RowSkip(Exception):  # noqa: N818
    """Raised inside a row handler to skip the row with a counted reason."""

    def __init__(self, reason: str):
        super().__init__(reason)
        self.reason = reason


@dataclass(frozen=True)
class ColumnAdapter:
    """
    Maps the columns of one dataset file onto Document fields.

    :param columns: Role (see `constants.COL_*`) to column name, or to a 0-based
      position when the file has no header row.
    :param labels: Source label string to canonical class. If empty, the loader's
      default mapping is used.
    :param table_format: How to read the file.
    """

    columns: Mapping[str, str | int]
    labels: Mapping[str, CanonicalClass] = field(default_factory=dict)
    table_format: TableFormat = field(default_factory=TableFormat)

    @classmethod
    def from_dict(cls, d: Mapping[str, Any]) -> "ColumnAdapter":
        columns = d.get("columns")
        if not isinstance(columns, Mapping) or not columns:
            raise ConfigError("A dataset adapter needs a non-empty 'columns' map.")
        labels = {
            str(k): CanonicalClass.parse(v, aliases.canonical_class)
            for k, v in (d.get("labels") or {}).items()
        }
        fmt = d.get("format") or {}
        table_format = TableFormat(
            delimiter=fmt.get("delimiter"),
            quotechar=fmt.get("quotechar", '"'),
            header=bool(fmt.get("header", True)),
            file_type=fmt.get("file_type"),
        )
        return cls(columns=dict(columns), labels=labels, table_format=table_format)

    def to_dict(self) -> dict:
        return {
            "columns": dict(self.columns),
            "labels": {k: v.value for k, v in self.labels.items()},
            "format": self.table_format.to_dict(),
        }


class _RowReader:
    """Resolves adapter roles to cell positions and reads cells of a row."""

    def __init__(
        self,
        table: RawTable,
        adapter: ColumnAdapter,
        required: Sequence[str],
        source: Source,
    ):
        for role in required:
            if role not in adapter.columns:
                raise IngestError(
                    f"The {source.value} adapter does not name a column for '{role}'."
                )
        self.positions: dict[str, int] = {}
        for role, column in adapter.columns.items():
            self.positions[role] = self._position(table, column, source)

    @staticmethod
    def _position(table: RawTable, column: str | int, source: Source) -> int:
        if table.header is None:
            try:
                return int(column)
            except (TypeError, ValueError) as err:
                raise IngestError(
                    f"The {source.value} file has no header row, so column '{column}' "
                    f"must be a 0-based position."
                ) from err
        if isinstance(column, int):
            if 0 <= column < len(table.header):
                return column
            raise IngestError(f"Column position {column} not found in {source.value} file.")
        try:
            return table.header.index(column)
        except ValueError as err:
            raise IngestError(
                f"Column '{column}' not found in {source.value} file. "
                f"Found: {', '.join(table.header)}"
            ) from err

    def has(self, role: str) -> bool:
        return role in self.positions

    def cell(self, cells: list[str | None], role: str) -> str | None:
        pos = self.positions.get(role)
        if pos is None:
            return None
        if pos >= len(cells):
            raise RowSkip(const.SKIP_SHORT_ROW)
        value = cells[pos]
        if is_empty(value):
            return None
        return value.strip()


RowHandler = Callable[[_RowReader, list[str | None]], dict[str, Any]]


def _load(
    path: str | PathLike[str],
    adapter: ColumnAdapter,
    source: Source,
    required: Sequence[str],
    row_handler: RowHandler,
) -> Corpus:
    """
    Read a dataset file and turn each row into a Document.

    Row problems are counted into the ingest report and the row is skipped; problems
    with the file or the adapter raise IngestError.
    """
    table = read_table(path, adapter.table_format)
    reader = _RowReader(table=table, adapter=adapter, required=required, source=source)
    report = IngestReport(replaced_sequences=table.replaced_sequences)
    slug = aliases.source_slug[source]
    documents = []
    seen_ids = set()
    for row_number, cells in table.rows:
        report.rows_read += 1
        try:
            text = reader.cell(cells, const.COL_TEXT)
            if text is None:
                raise RowSkip(const.SKIP_MISSING_TEXT)
            raw_id = reader.cell(cells, const.COL_ID)
            doc_id = f"{slug}:{raw_id if raw_id is not None else row_number}"
            if doc_id in seen_ids:
                raise RowSkip(const.SKIP_DUPLICATE_ID)
            fields = row_handler(reader, cells)
            parent = reader.cell(cells, const.COL_PARENT_TEXT)
            documents.append(Document(id=doc_id, text=text, parent_text=parent, **fields))
        except RowSkip as skip:
            report.skip(skip.reason)
            logger.debug("Skipped %s row %s: %s", source.value, row_number, skip.reason)
            continue
        seen_ids.add(doc_id)
        report.rows_kept += 1
    logger.info(
        "Loaded %s: %s rows read, %s kept, %s skipped.",
        source.value,
        report.rows_read,
        report.rows_kept,
        report.rows_skipped,
    )
    return Corpus(documents=tuple(documents), source=source, ingest_report=report)


def _map_label(value: str | None, labels: Mapping[str, CanonicalClass]) -> CanonicalClass:
    if value is None:
        raise RowSkip(const.SKIP_MISSING_LABEL)
    if value in labels:
        return labels[value]
    lowered = value.lower()
    if lowered in labels:
        return labels[lowered]
    raise RowSkip(const.SKIP_UNKNOWN_LABEL)


def _parse_votes(value: str | None) -> int | None:
    if value is None:
        return None
    try:
        number = float(value)
    except ValueError as err:
        raise RowSkip(const.SKIP_BAD_VOTES) from err
    if not number.is_integer():
        raise RowSkip(const.SKIP_BAD_VOTES)
    return int(number)


def load_sarc(path: str | PathLike[str], adapter: ColumnAdapter) -> Corpus:
    """
    Load Sarcasm on Reddit: label 1 is Sarcasm, label 0 is Neutral.

    Up / down votes are kept on each Document for `filter_sarcasm_votes`.
    """
    labels = adapter.labels or aliases.sarc_labels

    def handle(reader: _RowReader, cells: list[str | None]) -> dict[str, Any]:
        raw = reader.cell(cells, const.COL_LABEL)
        fields = {"raw_label": raw, "canonical_class": _map_label(raw, labels)}
        if reader.has(const.COL_UPS):
            fields["ups"] = _parse_votes(reader.cell(cells, const.COL_UPS))
        if reader.has(const.COL_DOWNS):
            fields["downs"] = _parse_votes(reader.cell(cells, const.COL_DOWNS))
        return fields

    return _load(
        path=path,
        adapter=adapter,
        source=Source.SARC,
        required=(const.COL_TEXT, const.COL_LABEL),
        row_handler=handle,
    )


def filter_sarcasm_votes(
    corpus: Corpus,
    min_ups: int = const.DEFAULT_MIN_UPS,
    max_downs: int = const.DEFAULT_MAX_DOWNS,
) -> Corpus:
    """Keep the documents with more than `min_ups` up-votes and at most `max_downs` down-votes."""
    if corpus.source is not Source.SARC:
        raise IngestError(f"The vote filter applies to SARC, not {corpus.name}.")
    missing = [d.id for d in corpus.documents if d.ups is None or d.downs is None]
    if missing:
        raise IngestError(
            f"Vote metadata missing for {len(missing)} SARC documents, e.g. {missing[0]}. "
            f"Map the '{const.COL_UPS}' and '{const.COL_DOWNS}' columns in the adapter."
        )
    kept = corpus.derive(d for d in corpus.documents if d.ups > min_ups and d.downs <= max_downs)
    logger.info("Vote filter kept %s of %s SARC documents.", len(kept), len(corpus))
    return kept


def load_implicit_hate(path: str | PathLike[str], adapter: ColumnAdapter) -> Corpus:
    """Load the Implicit Hate Corpus top-level classes (not / implicit / explicit hate)."""
    labels = adapter.labels or aliases.implicit_hate_labels

    def handle(reader: _RowReader, cells: list[str | None]) -> dict[str, Any]:
        raw = reader.cell(cells, const.COL_LABEL)
        return {"raw_label": raw, "canonical_class": _map_label(raw, labels)}

    return _load(
        path=path,
        adapter=adapter,
        source=Source.IMPLICIT_HATE_CORPUS,
        required=(const.COL_TEXT, const.COL_LABEL),
        row_handler=handle,
    )


def check_ethos_threshold(threshold: float) -> float:
    threshold = float(threshold)
    if not 0.0 < threshold < 1.0:
        raise ConfigError(f"The ETHOS threshold must be in (0, 1), got {threshold}.")
    return threshold


def load_ethos(
    path: str | PathLike[str],
    adapter: ColumnAdapter,
    threshold: float = const.DEFAULT_ETHOS_THRESHOLD,
) -> Corpus:
    """
    Load ETHOS, binarising the hate score: score >= threshold is hate.

    Hate rows are stored as ExplicitHate with `mixed_hate=True`, since ETHOS does not
    separate implicit from explicit hate. Only project ETHOS with the hate task.
    """
    threshold = check_ethos_threshold(threshold)
    score_role = const.COL_SCORE if const.COL_SCORE in adapter.columns else const.COL_LABEL

    def handle(reader: _RowReader, cells: list[str | None]) -> dict[str, Any]:
        raw = reader.cell(cells, score_role)
        if raw is None:
            raise RowSkip(const.SKIP_MISSING_LABEL)
        try:
            score = float(raw)
        except ValueError as err:
            raise RowSkip(const.SKIP_BAD_SCORE) from err
        if not 0.0 <= score <= 1.0:
            raise RowSkip(const.SKIP_SCORE_OUT_OF_RANGE)
        if score >= threshold:
            return {
                "raw_label": score,
                "canonical_class": CanonicalClass.EXPLICIT_HATE,
                "mixed_hate": True,
            }
        return {"raw_label": score, "canonical_class": CanonicalClass.NEUTRAL}

    return _load(
        path=path,
        adapter=adapter,
        source=Source.ETHOS,
        required=(const.COL_TEXT, score_role),
        row_handler=handle,
    )


def load_sarcasm_v2(path: str | PathLike[str], adapter: ColumnAdapter) -> Corpus:
    """Load the Sarcasm V2 corpus (sarc / notsarc), the sarcasm-vs-sarcasm baseline."""
    labels = adapter.labels or aliases.sarcasm_v2_labels

    def handle(reader: _RowReader, cells: list[str | None]) -> dict[str, Any]:
        raw = reader.cell(cells, const.COL_LABEL)
        return {"raw_label": raw, "canonical_class": _map_label(raw, labels)}

    return _load(
        path=path,
        adapter=adapter,
        source=Source.SARCASM_V2,
        required=(const.COL_TEXT, const.COL_LABEL),
        row_handler=handle,
    )


def combine(
    corpora: Sequence[Corpus],
    seed: int,
    caps: Mapping[Source, int | None] | None = None,
) -> Corpus:
    """
    Concatenate corpora in the given order and shuffle deterministically.

    :param corpora: For the single-step strategy: filtered SARC, Implicit Hate Corpus,
      ETHOS, in that order.
    :param seed: Shuffle seed.
    :param caps: Optional maximum number of documents taken from each source (the
      first N in corpus order); None or a missing entry means all.
    """
    caps = caps or {}
    documents: list[Document] = []
    for corpus in corpora:
        cap = caps.get(corpus.source)
        docs = corpus.documents if cap is None else corpus.documents[: int(cap)]
        documents.extend(docs)
    order = np.random.default_rng(seed).permutation(len(documents))
    return Corpus(
        documents=tuple(documents[i] for i in order.tolist()),
        source=Source.COMBINED,
    )
