"""
CSV, TSV, XLSX and XLS readers: the backends for dataset ingestion.

Each backend returns a `RawTable` of string cells. Interpreting the cells (column
mapping, labels, scores) is the job of `lexxfer.ingest`.
"""

import csv
import datetime
import logging
import re
from collections.abc import Callable, Iterable
from dataclasses import dataclass, field
from enum import Enum
from io import BytesIO, IOBase, StringIO
from os import PathLike
from pathlib import Path
from zipfile import BadZipFile

from openpyxl.reader.excel import ExcelReader
from xlrd import XL_CELL_BOOLEAN, XL_CELL_DATE, XL_CELL_NUMBER, XLRDError
from xlrd import open_workbook as xlrd_open
from xlrd.xldate import XLDateAmbiguous, xldate_as_tuple

from lexxfer.errors import IngestError, ReadError

logger = logging.getLogger(__name__)
logger.addHandler(logging.NullHandler())

REPLACEMENT_CHAR = "\ufffd"
REPLACEMENT_BYTES = REPLACEMENT_CHAR.encode("utf-8")
HEADER_SPACES = re.compile(r"( )+")


@dataclass(frozen=True)
class TableFormat:
    """
    How to read a delimited text file.

    :param delimiter: Field separator. If None, tab for ".tsv" files, comma otherwise.
    :param quotechar: Quote character for fields containing the delimiter.
    :param header: If True the first row holds the column names. If False, adapter
      columns must be given as 0-based integer positions.
    :param file_type: Force a file type (one of SupportedFileTypes values, e.g. ".csv").
      If None, the file suffix is used, and failing that each type is tried in turn.
    """

    delimiter: str | None = None
    quotechar: str = '"'
    header: bool = True
    file_type: str | None = None

    def to_dict(self) -> dict:
        return {
            "delimiter": self.delimiter,
            "quotechar": self.quotechar,
            "header": self.header,
            "file_type": self.file_type,
        }


@dataclass
class RawTable:
    """
    Rows of string cells read from a dataset file.

    :param header: Column names, or None if the file has no header row.
    :param rows: (data row number starting at 1, cells) for each non-blank row.
    :param replaced_sequences: Count of invalid UTF-8 sequences replaced by U+FFFD.
    """

    header: list[str] | None
    rows: list[tuple[int, list[str | None]]] = field(default_factory=list)
    replaced_sequences: int = 0


@dataclass
class TableData:
    data: BytesIO
    file_type: "SupportedFileTypes | None"
    file_path_stem: str | None


def is_empty(value) -> bool:
    if value is None:
        return True
    elif isinstance(value, str):
        if value.strip() == "":
            return True

    return False


def clean_headers(first_row: Iterable[str | None]) -> list[str]:
    """Get column names from the first row; blank names become positional names."""
    column_header_list = []
    for idx, column_header in enumerate(first_row):
        if is_empty(column_header):
            column_header_list.append(f"__column_{idx}")
            continue
        # Strip whitespaces from the header.
        clean_header = HEADER_SPACES.sub(" ", str(column_header).strip())
        if clean_header in column_header_list:
            raise IngestError(f"Duplicate column header: {clean_header}")
        column_header_list.append(clean_header)
    return column_header_list


def decode_utf8(raw: bytes) -> tuple[str, int]:
    """
    Decode UTF-8, replacing invalid sequences with U+FFFD.

    :return: The text, and the number of replacements made (replacement characters
      that were already present in the input are not counted).
    """
    text = raw.decode("utf-8", errors="replace")
    replaced = text.count(REPLACEMENT_CHAR) - raw.count(REPLACEMENT_BYTES)
    if text.startswith("\ufeff"):
        text = text[1:]
    return text, replaced


def _table_from_rows(
    rows: Iterable[list[str | None]], header: bool, replaced_sequences: int = 0
) -> RawTable:
    row_iter = iter(rows)
    headers = None
    if header:
        first_row = next(row_iter, None)
        if first_row is None:
            raise ReadError("The file has no header row.")
        headers = clean_headers(first_row)
    table = RawTable(header=headers, replaced_sequences=replaced_sequences)
    row_number = 0
    for row in row_iter:
        if all(is_empty(c) for c in row):
            continue
        row_number += 1
        table.rows.append((row_number, row))
    return table


def csv_to_table(table_data: TableData, table_format: TableFormat) -> RawTable:
    delimiter = table_format.delimiter
    if delimiter is None:
        delimiter = "\t" if table_data.file_type is SupportedFileTypes.tsv else ","
    try:
        text, replaced = decode_utf8(table_data.data.getvalue())
        reader = csv.reader(
            StringIO(initial_value=text, newline=""),
            delimiter=delimiter,
            quotechar=table_format.quotechar,
        )
        table = _table_from_rows(
            rows=reader, header=table_format.header, replaced_sequences=replaced
        )
    except (AttributeError, TypeError, csv.Error) as read_err:
        raise ReadError(f"Error reading delimited file: {read_err}") from read_err
    if replaced:
        logger.warning("Replaced %s invalid UTF-8 sequences.", replaced)
    return table


def xlsx_value_to_str(value) -> str:
    """
    Take a xlsx cell value and make a string representation.
    """
    if value is True:
        return "TRUE"
    elif value is False:
        return "FALSE"
    elif isinstance(value, float) and value.is_integer():
        # Try to display as an int if possible.
        return str(int(value))
    elif isinstance(value, int | float | datetime.datetime | datetime.time):
        return str(value)
    else:
        # Replace nbsp spaces with normal ones so tokenisation sees them.
        return str(value).replace(chr(160), " ")


def xlsx_to_table(table_data: TableData, table_format: TableFormat) -> RawTable:
    """Read the first worksheet of a .xlsx workbook."""
    try:
        reader = ExcelReader(table_data.data, read_only=True, data_only=True)
        reader.read()
        try:
            sheet = reader.wb.worksheets[0]
            rows = (
                [None if is_empty(c) else xlsx_value_to_str(c) for c in row]
                for row in sheet.iter_rows(values_only=True)
            )
            return _table_from_rows(rows=rows, header=table_format.header)
        finally:
            reader.wb.close()
            reader.archive.close()
    except (BadZipFile, IndexError, KeyError, OSError, TypeError) as read_err:
        raise ReadError(f"Error reading .xlsx file: {read_err}") from read_err


def xls_value_to_str(value, value_type, datemode) -> str:
    """
    Take a xls formatted value and try to make a string representation.
    """
    if value_type == XL_CELL_BOOLEAN:
        return "TRUE" if value else "FALSE"
    elif value_type == XL_CELL_NUMBER:
        # Try to display as an int if possible.
        int_value = int(value)
        if int_value == value:
            return str(int_value)
        else:
            return str(value)
    elif value_type is XL_CELL_DATE:
        datetime_or_time_only = xldate_as_tuple(value, datemode)
        if datetime_or_time_only[:3] == (0, 0, 0):
            # must be time only
            return str(datetime.time(*datetime_or_time_only[3:]))
        return str(datetime.datetime(*datetime_or_time_only))
    else:
        return str(value).replace(chr(160), " ")


def xls_to_table(table_data: TableData, table_format: TableFormat) -> RawTable:
    """Read the first worksheet of a .xls workbook."""
    try:
        workbook = xlrd_open(file_contents=table_data.data.getvalue())
        try:
            sheet = workbook.sheet_by_index(0)
            rows = (
                [
                    None
                    if is_empty(c.value)
                    else xls_value_to_str(c.value, c.ctype, workbook.datemode)
                    for c in sheet.row(r)
                ]
                for r in range(sheet.nrows)
            )
            return _table_from_rows(rows=rows, header=table_format.header)
        finally:
            workbook.release_resources()
    except (AttributeError, IndexError, TypeError, XLRDError, XLDateAmbiguous) as read_err:
        raise ReadError(f"Error reading .xls file: {read_err}") from read_err


class SupportedFileTypes(Enum):
    csv = ".csv"
    tsv = ".tsv"
    txt = ".txt"
    xlsx = ".xlsx"
    xls = ".xls"

    @staticmethod
    def get_processors() -> dict["SupportedFileTypes", Callable[..., RawTable]]:
        return {
            SupportedFileTypes.csv: csv_to_table,
            SupportedFileTypes.tsv: csv_to_table,
            SupportedFileTypes.txt: csv_to_table,
            SupportedFileTypes.xlsx: xlsx_to_table,
            SupportedFileTypes.xls: xls_to_table,
        }


def get_table_data(data: str | PathLike[str] | bytes | BytesIO | IOBase) -> TableData:
    """
    Get the dataset bytes from a path, or from bytes already in memory.

    :param data: The path to the file (string or PathLike), or the file content.
    """
    file_type = None
    file_path_stem = None
    if isinstance(data, str | PathLike):
        file_path = Path(data)
        if not file_path.is_file():
            raise IngestError(f"Dataset file does not exist: {file_path}")
        file_path_stem = file_path.stem
        try:
            file_type = SupportedFileTypes(file_path.suffix.lower())
        except ValueError:
            # The suffix was not a useful hint but we can try to parse anyway.
            pass
        try:
            data = BytesIO(file_path.read_bytes())
        except OSError as os_err:
            raise IngestError(f"Could not read dataset file {file_path}: {os_err}") from os_err
    if isinstance(data, bytes):
        data = BytesIO(data)
    elif not isinstance(data, BytesIO) and isinstance(data, IOBase):
        data = BytesIO(data.read())
    if not isinstance(data, BytesIO):
        raise IngestError("Parameter 'data' does not appear to be a path or file content.")
    return TableData(data=data, file_type=file_type, file_path_stem=file_path_stem)


def read_table(
    data: str | PathLike[str] | bytes | BytesIO | IOBase,
    table_format: TableFormat | None = None,
) -> RawTable:
    """
    Read a dataset file into a RawTable.

    :param data: Path or content of the dataset file.
    :param table_format: Reading options; defaults to a headed CSV/TSV by suffix.
    """
    if table_format is None:
        table_format = TableFormat()
    table_data = get_table_data(data=data)
    supported = f"Must be one of: {', '.join(t.value for t in SupportedFileTypes)}"
    processors = SupportedFileTypes.get_processors()
    file_type = table_format.file_type
    if file_type is not None:
        try:
            ft = SupportedFileTypes(file_type)
        except ValueError as err:
            raise IngestError(
                f"Argument 'file_type' is not a supported type. {supported}"
            ) from err
        table_data.file_type = ft
        return processors[ft](table_data, table_format)
    if table_data.file_type is not None:
        return processors[table_data.file_type](table_data, table_format)

    # Unknown suffix: spreadsheets first since the text reader accepts almost anything.
    for ft in (SupportedFileTypes.xlsx, SupportedFileTypes.xls, SupportedFileTypes.csv):
        try:
            return processors[ft](table_data, table_format)
        except ReadError:  # noqa: PERF203
            continue
    raise IngestError(f"Dataset was not recognized as a supported type. {supported}")
