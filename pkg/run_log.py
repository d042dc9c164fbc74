"""Warning ledger and logging setup for a pipeline run.

Every data warning goes through a :class:`WarningLog` so it is logged once and
kept for the run report.
"""

from __future__ import annotations

import logging
import os
from dataclasses import dataclass, asdict
from pathlib import Path
from typing import Any

log = logging.getLogger(__name__)

LOG_ENV_VAR = "IDRKIT_LOG"
LOG_FORMAT = "%(asctime)s [%(levelname)s] %(message)s"

_LEVEL_ALIASES = {
    "debug": logging.DEBUG,
    "info": logging.INFO,
    "warning": logging.WARNING,
    "warn": logging.WARNING,
    "error": logging.ERROR,
}


@dataclass(frozen=True)
class PipelineWarning:
    """One data warning raised by a pipeline stage."""

    stage: str
    message: str
    line: int | None = None

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)


class WarningLog:
    """Collects the warnings of one run, in emission order."""

    def __init__(self, logger: logging.Logger | None = None):
        self._items: list[PipelineWarning] = []
        self._logger = logger if logger is not None else log

    def warn(self, stage: str, message: str, line: int | None = None) -> PipelineWarning:
        item = PipelineWarning(stage=stage, message=message, line=line)
        self._items.append(item)
        if line is None:
            self._logger.warning("[%s] %s", stage, message)
        else:
            self._logger.warning("[%s] line %d: %s", stage, line, message)
        return item

    @property
    def items(self) -> list[PipelineWarning]:
        return list(self._items)

    def count(self, stage: str | None = None) -> int:
        if stage is None:
            return len(self._items)
        return sum(1 for item in self._items if item.stage == stage)

    def __len__(self) -> int:
        return len(self._items)


def _try_load_dotenv() -> None:
    """Load .env from the project root if python-dotenv is installed."""
    try:
        from dotenv import load_dotenv  # type: ignore[import-untyped]

        root_env = Path(__file__).parent / ".env"
        if root_env.exists():
            load_dotenv(root_env, override=False)
    except ImportError:
        pass  # optional dependency


def resolve_log_level(value: str | None) -> int:
    if not value:
        return logging.WARNING
    return _LEVEL_ALIASES.get(value.strip().lower(), logging.WARNING)


def configure_logging() -> int:
    """Configure root logging from ``IDRKIT_LOG`` and return the level used."""
    _try_load_dotenv()
    level = resolve_log_level(os.environ.get(LOG_ENV_VAR))
    logging.basicConfig(level=level, format=LOG_FORMAT, force=True)
    return level
