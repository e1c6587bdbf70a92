"""
The tests utils module functionality.
"""

import json
import os
import shutil
import tempfile
from contextlib import contextmanager
from pathlib import Path

HERE = Path(__file__).parent
FIXTURES = HERE / "fixtures"

SARC_ADAPTER = {
    "columns": {
        "id": "id",
        "text": "comment",
        "parent_text": "parent_comment",
        "label": "label",
        "ups": "ups",
        "downs": "downs",
    }
}
IMPLICIT_HATE_ADAPTER = {"columns": {"id": "ID", "text": "post", "label": "class"}}
ETHOS_ADAPTER = {
    "columns": {"text": "comment", "score": "isHate"},
    "format": {"delimiter": ";"},
}
SARCASM_V2_ADAPTER = {"columns": {"id": "id", "text": "text", "label": "class"}}


def path_to_fixture(filename: str) -> Path:
    return FIXTURES / filename


def write_config(directory: str | os.PathLike[str], content: dict) -> Path:
    path = Path(directory) / "run.json"
    path.write_text(json.dumps(content, indent=2), encoding="utf-8")
    return path


@contextmanager
def get_temp_file():
    temp_file = tempfile.NamedTemporaryFile(delete=False)
    temp_file.close()
    try:
        yield temp_file.name
    finally:
        temp_file.close()
        Path(temp_file.name).unlink(missing_ok=True)


@contextmanager
def get_temp_dir():
    temp_dir_prefix = "lexxfer_tmp_"
    if os.name == "nt":
        cleanup_lexxfer_temp_files(prefix=temp_dir_prefix)

    temp_dir = tempfile.mkdtemp(prefix=temp_dir_prefix)
    try:
        yield temp_dir
    finally:
        try:
            if os.path.exists(temp_dir):
                shutil.rmtree(temp_dir)
        except PermissionError:
            truncate_temp_files(temp_dir=temp_dir)


def truncate_temp_files(temp_dir):
    """
    Truncate files in a folder, recursing into directories.
    """
    # Seems to be a Windows-specific error for newly-created files.
    temp_root = tempfile.gettempdir()
    if os.path.exists(temp_dir):
        for f in os.scandir(temp_dir):
            if os.path.isdir(f.path):
                truncate_temp_files(f.path)
            # Check still in temp directory
            elif f.path.startswith(temp_root):
                with open(f.path, mode="w", encoding="utf-8") as _:
                    pass


def cleanup_lexxfer_temp_files(prefix: str):
    """
    Try to clean up temp lexxfer files from previous test runs.
    """
    temp_root = tempfile.gettempdir()
    if os.path.exists(temp_root):
        for f in os.scandir(temp_root):
            if os.path.isdir(f.path):
                if f.name.startswith(prefix) and f.path.startswith(temp_root):
                    try:
                        shutil.rmtree(f.path)
                    except PermissionError:
                        pass
