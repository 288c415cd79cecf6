"""
File Handler Module

Reading and writing of experiment configurations, JSON reports and CSV
series. Floats go to JSON in shortest round-trip form and to CSV with 17
significant digits, so both round-trip losslessly.
"""

import hashlib
import json
import logging
from pathlib import Path
from typing import Any, Dict, Optional, Union

import pandas as pd

from auctionlab.core.config import settings
from auctionlab.core.exceptions import ConfigError

logger = logging.getLogger(__name__)

CSV_FLOAT_FORMAT = "%.17g"


class FileOperationError(ConfigError):
    """Exception raised for file operation errors."""


class FileHandler:
    """
    Reads and writes experiment artifacts relative to a base directory.

    Absolute paths are used as given; relative ones resolve against
    ``base_path`` (``settings.OUTPUT_DIR`` by default).
    """

    def __init__(self, base_path: Optional[Union[str, Path]] = None):
        self.base_path = Path(base_path or settings.OUTPUT_DIR)

    def resolve(self, path: Union[str, Path]) -> Path:
        p = Path(path)
        return p if p.is_absolute() else self.base_path / p

    @staticmethod
    def ensure_directory_exists(directory: Path) -> None:
        """Ensure that a directory exists, creating it if necessary."""
        try:
            directory.mkdir(parents=True, exist_ok=True)
        except OSError as e:
            logger.error(f"Failed to create directory {directory}: {e}")
            raise FileOperationError(f"Could not create directory: {e}") from e

    @staticmethod
    def read_json(path: Union[str, Path]) -> Dict[str, Any]:
        """
        Load a JSON document (configuration or report) from ``path`` as given.

        Raises:
            FileOperationError: If the file is missing or not valid JSON.
        """
        p = Path(path)
        if not p.is_file():
            raise FileOperationError(f"File not found: {p}")
        try:
            with open(p, "r", encoding="utf-8") as f:
                data = json.load(f)
        except json.JSONDecodeError as e:
            raise FileOperationError(f"{p}: invalid JSON ({e.msg} at line {e.lineno})") from e
        if not isinstance(data, dict):
            raise FileOperationError(f"{p}: expected a JSON object")
        return data

    def write_json(self, data: Any, path: Union[str, Path]) -> Path:
        target = self.resolve(path)
        self.ensure_directory_exists(target.parent)
        with open(target, "w", encoding="utf-8", newline="\n") as f:
            json.dump(data, f, indent=2, ensure_ascii=False, default=str)
            f.write("\n")
        logger.info("Wrote JSON", extra={"path": str(target)})
        return target

    def write_frame(self, frame: pd.DataFrame, path: Union[str, Path]) -> Path:
        """Write a header-row CSV with LF line endings."""
        target = self.resolve(path)
        self.ensure_directory_exists(target.parent)
        frame.to_csv(
            target,
            index=False,
            float_format=CSV_FLOAT_FORMAT,
            lineterminator="\n",
            encoding="utf-8",
        )
        logger.info("Wrote CSV", extra={"path": str(target), "rows": len(frame)})
        return target

    def read_frame(self, path: Union[str, Path]) -> pd.DataFrame:
        target = self.resolve(path)
        if not target.is_file():
            raise FileOperationError(f"File not found: {target}")
        return pd.read_csv(target)

    @staticmethod
    def calculate_file_hash(file_path: Union[str, Path], algorithm: str = "sha256") -> str:
        """Hex digest of a file's bytes."""
        hash_func = getattr(hashlib, algorithm, hashlib.sha256)
        file_hash = hash_func()
        with open(file_path, "rb") as f:
            for chunk in iter(lambda: f.read(8192), b""):
                file_hash.update(chunk)
        return file_hash.hexdigest()


__all__ = ["FileHandler", "FileOperationError", "CSV_FLOAT_FORMAT"]
