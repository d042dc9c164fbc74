"""Output writing, stage timings and the machine-readable run report.

Every file goes through :class:`OutputWriter`, which writes atomically and
records a sha256 digest so identical runs can be compared by manifest.
"""

from __future__ import annotations

import hashlib
import json
import logging
import os
import tempfile
import time
from contextlib import contextmanager
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Iterator, Optional

import pandas as pd

from run_log import WarningLog

log = logging.getLogger(__name__)

REPORT_FILE = "run_report.json"
MANIFEST_FILE = "manifest.json"
FLOAT_FORMAT = "%.6f"


def atomic_write_bytes(path: Path | str, data: bytes) -> None:
    """Write to a temporary sibling file, then rename over the target."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp_name = tempfile.mkstemp(prefix=f".{path.name}.", suffix=".tmp", dir=path.parent)
    try:
        with os.fdopen(fd, "wb") as handle:
            handle.write(data)
        os.replace(tmp_name, path)
    except BaseException:
        if os.path.exists(tmp_name):
            os.remove(tmp_name)
        raise


def table_bytes(frame: pd.DataFrame, index: bool = False, delimiter: str = ",") -> bytes:
    text = frame.to_csv(index=index, sep=delimiter, float_format=FLOAT_FORMAT, lineterminator="\n")
    return text.encode("utf-8")


@dataclass(frozen=True)
class ManifestEntry:
    path: str
    sha256: str
    bytes: int


class OutputWriter:
    """Writes files below ``out_dir`` and keeps their manifest."""

    def __init__(self, out_dir: Path | str):
        self.out_dir = Path(out_dir)
        self._entries: dict[str, ManifestEntry] = {}

    def path(self, name: str) -> Path:
        return self.out_dir / name

    def write_bytes(self, name: str, data: bytes) -> Path:
        target = self.path(name)
        atomic_write_bytes(target, data)
        self._entries[name] = ManifestEntry(name, hashlib.sha256(data).hexdigest(), len(data))
        log.debug("Wrote %s (%d bytes)", target, len(data))
        return target

    def write_table(self, name: str, frame: pd.DataFrame, index: bool = False) -> Path:
        return self.write_bytes(name, table_bytes(frame, index=index))

    def write_json(self, name: str, document: Any) -> Path:
        data = (json.dumps(document, indent=2, sort_keys=True, ensure_ascii=False) + "\n").encode("utf-8")
        return self.write_bytes(name, data)

    def manifest(self) -> list[ManifestEntry]:
        return [self._entries[name] for name in sorted(self._entries)]


class StageTimer:
    """Wall-clock milliseconds per pipeline stage."""

    def __init__(self):
        self._timings: dict[str, float] = {}

    @contextmanager
    def stage(self, name: str) -> Iterator[None]:
        started_at = time.perf_counter()
        try:
            yield
        finally:
            elapsed_ms = (time.perf_counter() - started_at) * 1000.0
            self._timings[name] = round(self._timings.get(name, 0.0) + elapsed_ms, 3)

    def timings(self) -> dict[str, float]:
        return dict(self._timings)


@dataclass
class RunReport:
    command: str
    config: dict
    stats: Optional[dict] = None
    warnings: list = field(default_factory=list)
    manifest: list = field(default_factory=list)
    timings: dict = field(default_factory=dict)
    status: str = "ok"
    error: Optional[str] = None

    def to_dict(self) -> dict:
        return {
            "command": self.command,
            "status": self.status,
            "error": self.error,
            "config": self.config,
            "stats": self.stats,
            "warnings": self.warnings,
            "manifest": self.manifest,
            "timings_ms": self.timings,
        }


def write_report(
    writer: OutputWriter,
    command: str,
    config: dict,
    warnings: WarningLog,
    timer: StageTimer,
    stats: Optional[dict] = None,
    error: Optional[str] = None,
) -> RunReport:
    """Write ``manifest.json`` and ``run_report.json``; neither lists itself."""
    manifest = [asdict(entry) for entry in writer.manifest()]
    report = RunReport(
        command=command,
        config=config,
        stats=stats,
        warnings=[item.to_dict() for item in warnings.items],
        manifest=manifest,
        timings=timer.timings(),
        status="ok" if error is None else "error",
        error=error,
    )
    manifest_bytes = (json.dumps(manifest, indent=2, sort_keys=True) + "\n").encode("utf-8")
    atomic_write_bytes(writer.path(MANIFEST_FILE), manifest_bytes)
    report_bytes = (json.dumps(report.to_dict(), indent=2, sort_keys=True, ensure_ascii=False) + "\n").encode("utf-8")
    atomic_write_bytes(writer.path(REPORT_FILE), report_bytes)
    return report
