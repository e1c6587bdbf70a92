"""
lexxfer utils module.
"""

import csv
import json
from collections.abc import Iterable, Sequence
from io import StringIO
from json.decoder import JSONDecodeError
from os import PathLike
from pathlib import Path
from typing import Any

from lexxfer.errors import ConfigError


def get_pyobj_from_json(str_or_path: str | PathLike[str]) -> Any:
    """
    This function takes either a json string or a path to a json file,
    it loads the json into memory and returns the corresponding Python
    object.
    """
    try:
        # see if treating str_or_path as a path works
        with open(str_or_path, encoding="utf-8") as fp:
            return json.load(fp)
    except JSONDecodeError as json_err:
        raise ConfigError(f"Could not parse JSON file '{str_or_path}': {json_err}") from json_err
    except OSError:
        pass
    try:
        return json.loads(str(str_or_path))
    except JSONDecodeError as json_err:
        raise ConfigError(
            f"Value is neither a readable JSON file nor a JSON string: {json_err}"
        ) from json_err


def to_json(content: Any) -> str:
    """Serialise with a fixed layout so that equal content gives equal bytes."""
    return json.dumps(content, indent=2, sort_keys=True, ensure_ascii=False, allow_nan=False)


def write_json(file_path: str | PathLike[str], content: Any) -> Path:
    path = Path(file_path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, mode="w", encoding="utf-8", newline="\n") as out_file:
        out_file.write(to_json(content))
        out_file.write("\n")
    return path


def rows_to_csv(header: Sequence[str], rows: Iterable[Sequence[Any]]) -> str:
    """Render rows as CSV text; None becomes an empty cell."""
    out = StringIO(newline="")
    writer = csv.writer(out, quoting=csv.QUOTE_MINIMAL, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow(["" if v is None else v for v in row])
    return out.getvalue()


def write_text(file_path: str | PathLike[str], content: str) -> Path:
    path = Path(file_path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, mode="w", encoding="utf-8", newline="") as out_file:
        out_file.write(content)
    return path


def percentage_points(value: float | None) -> float | None:
    if value is None:
        return None
    return value * 100.0
