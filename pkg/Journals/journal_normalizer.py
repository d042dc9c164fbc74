"""Journal title canonicalisation and abbreviation expansion.

Canonical keys are lowercase, with the characters of ``STRIP_CHARACTERS``
replaced by spaces and whitespace collapsed. Expansion is a single lookup in
a curated abbreviation table, never transitive and never fuzzy.
"""

from __future__ import annotations

import csv
import logging
import re
from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Mapping, NewType, Optional

from errors import InputFormatError
from run_log import WarningLog

log = logging.getLogger(__name__)

STAGE = "abbreviations"

CanonicalTitle = NewType("CanonicalTitle", str)

STRIP_CHARACTERS = ".,;:()[]&-"
_STRIP_RE = re.compile("[" + re.escape(STRIP_CHARACTERS) + "]")
_SPACE_RE = re.compile(r"\s+")

ABBREV_HEADER = ("abbrev", "full_name")


def normalize_title(raw: Optional[str]) -> CanonicalTitle:
    """Lowercase, blank out punctuation from the strip set, collapse spaces."""
    if not raw:
        return CanonicalTitle("")
    text = str(raw).lower()
    text = _STRIP_RE.sub(" ", text)
    text = _SPACE_RE.sub(" ", text)
    return CanonicalTitle(text.strip())


@dataclass(frozen=True)
class AbbrevMap:
    """Canonical abbreviation -> canonical full name."""

    entries: Mapping[str, str] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "entries", MappingProxyType(dict(self.entries)))

    def get(self, key: str) -> Optional[str]:
        return self.entries.get(key)

    def __contains__(self, key: object) -> bool:
        return key in self.entries

    def __len__(self) -> int:
        return len(self.entries)


EMPTY_ABBREV_MAP = AbbrevMap()


def read_header(reader, expected: tuple[str, ...], path) -> None:
    """Consume the header row of a delimited file or fail on a mismatch."""
    try:
        header = next(reader)
    except StopIteration:
        raise InputFormatError(f"{path}: file is empty, header {','.join(expected)} required")
    names = tuple(cell.strip().lower() for cell in header)
    if names != expected:
        raise InputFormatError(
            f"{path}: expected header {','.join(expected)}, got {','.join(header)}"
        )


def load_abbreviation_map(
    path,
    delimiter: str = ",",
    warnings: Optional[WarningLog] = None,
) -> AbbrevMap:
    """Read a two-column ``abbrev,full_name`` table into an :class:`AbbrevMap`."""
    warnings = warnings if warnings is not None else WarningLog()
    entries: dict[str, str] = {}

    with open(path, "r", encoding="utf-8", newline="") as handle:
        reader = csv.reader(handle, delimiter=delimiter)
        read_header(reader, ABBREV_HEADER, path)
        for row in reader:
            line = reader.line_num
            if not row or not any(cell.strip() for cell in row):
                continue
            if len(row) != 2:
                warnings.warn(STAGE, f"expected 2 columns, got {len(row)}; row skipped", line=line)
                continue
            key, value = normalize_title(row[0]), normalize_title(row[1])
            if not key or not value:
                warnings.warn(STAGE, "empty abbreviation or full name; row skipped", line=line)
                continue
            if key == value:
                log.debug("Self-map '%s' dropped", key)
                continue
            if key in entries:
                if entries[key] != value:
                    warnings.warn(
                        STAGE,
                        f"duplicate abbreviation '{key}' rejected, keeping '{entries[key]}'",
                        line=line,
                    )
                continue
            entries[key] = value

    for key, value in entries.items():
        if value in entries:
            warnings.warn(STAGE, f"abbreviation chain '{key}' -> '{value}' -> '{entries[value]}' not followed")

    log.info("Loaded %d abbreviations from %s", len(entries), path)
    return AbbrevMap(entries)


def expand(title: str, abbrev_map: AbbrevMap) -> CanonicalTitle:
    """One expansion step; titles missing from the map are returned unchanged."""
    expanded = abbrev_map.get(title)
    return CanonicalTitle(expanded if expanded is not None else title)
