"""All-or-nothing writing of a command's output files."""

import json
import logging
import os
import shutil
import tempfile
from pathlib import Path
from typing import Any, List, Optional

import pandas as pd

from src.errors import IngestionError

logger = logging.getLogger(__name__)


class ReportWriter:
    """Stages output files and publishes them together.

    Files are written into a hidden staging directory inside the output
    directory. Leaving the ``with`` block normally moves them into place;
    leaving it with an exception deletes the staging directory, so a failed
    command leaves no partial outputs behind.

    Example:
        with ReportWriter(out_dir) as writer:
            writer.write_json("report.json", report)
    """

    def __init__(self, out_dir: str | Path):
        """Initialize the writer.

        Args:
            out_dir: Directory receiving the outputs (created if missing)
        """
        self.out_dir = Path(out_dir)
        self._staging: Optional[Path] = None
        self._names: List[str] = []
        self.written: List[Path] = []

    def __enter__(self) -> "ReportWriter":
        try:
            self.out_dir.mkdir(parents=True, exist_ok=True)
            self._staging = Path(tempfile.mkdtemp(prefix=".staging-", dir=self.out_dir))
        except OSError as e:
            raise IngestionError(f"Failed to create output directory {self.out_dir}: {e}")
        return self

    def __exit__(self, exc_type, exc, tb) -> bool:
        try:
            if exc_type is None:
                self._publish()
        finally:
            if self._staging is not None:
                shutil.rmtree(self._staging, ignore_errors=True)
                self._staging = None
        return False

    def _stage_path(self, name: str) -> Path:
        if self._staging is None:
            raise RuntimeError("ReportWriter must be used as a context manager")
        if name in self._names:
            raise ValueError(f"Output {name!r} written twice")
        self._names.append(name)
        path = self._staging / name
        path.parent.mkdir(parents=True, exist_ok=True)
        return path

    def _publish(self) -> None:
        for name in self._names:
            target = self.out_dir / name
            try:
                target.parent.mkdir(parents=True, exist_ok=True)
                os.replace(self._staging / name, target)
            except OSError as e:
                raise IngestionError(f"Failed to write file {target}: {e}")
            self.written.append(target)
        logger.info("Wrote %d file(s) to %s", len(self._names), self.out_dir)

    def stage(self, name: str) -> Path:
        """Reserve an output for a caller that writes the file itself.

        Args:
            name: Path relative to the output directory

        Returns:
            Staging path to write to; it is published with the other outputs
        """
        return self._stage_path(name)

    def write_text(self, name: str, content: str) -> Path:
        """Stage a text file.

        Args:
            name: Path relative to the output directory
            content: File content

        Returns:
            Final path the file will have once published
        """
        path = self._stage_path(name)
        with open(path, "w", encoding="utf-8", newline="\n") as f:
            f.write(content)
        return self.out_dir / name

    def write_json(self, name: str, data: Any) -> Path:
        """Stage a JSON document (2-space indent, trailing newline)."""
        return self.write_text(name, json.dumps(data, indent=2, ensure_ascii=False) + "\n")

    def write_csv(self, name: str, frame: pd.DataFrame) -> Path:
        """Stage a table as CSV without the index column."""
        return self.write_text(name, frame.to_csv(index=False, lineterminator="\n"))
