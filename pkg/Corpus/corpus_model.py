"""Record schema, line-delimited ingestion and time bucketing.

Each input line is one JSON object describing a citing publication and its
reference list (see INPUT_SCHEMA.md). Parsing is a single sequential pass;
the produced records are frozen and safe to share.
"""

from __future__ import annotations

import json
import logging
import re
from dataclasses import dataclass, field, replace
from datetime import date
from enum import Enum
from typing import BinaryIO, Iterable, Iterator, Optional

from errors import InputFormatError
from run_log import WarningLog

log = logging.getLogger(__name__)

STAGE = "ingest"
DEFAULT_YEAR_RANGE = (1900, 2100)


class DocType(Enum):
    """Publication types kept apart by the type filter."""
    ARTICLE = "Article"
    REVIEW = "Review"
    OTHER = "Other"

    @classmethod
    def from_text(cls, text: Optional[str]) -> "DocType":
        """Case-insensitive match on article/review, everything else is Other."""
        if text is None:
            return cls.OTHER
        lowered = str(text).strip().lower()
        if lowered == "article":
            return cls.ARTICLE
        if lowered == "review":
            return cls.REVIEW
        return cls.OTHER


class Granularity(Enum):
    YEAR = "year"
    MONTH = "month"


class MissingMonthPolicy(Enum):
    """What bucketing does with year-only records at month granularity."""
    EXCLUDE = "exclude"
    JANUARY = "january"


@dataclass(frozen=True)
class PubDate:
    year: int
    month: Optional[int] = None
    day: Optional[int] = None


@dataclass(frozen=True)
class ReferenceRecord:
    ref_id: str
    journal_title: str = ""
    year: Optional[int] = None
    doc_type: DocType = DocType.ARTICLE


@dataclass(frozen=True)
class PublicationRecord:
    id: str
    title: str
    journal_title: str
    pub_date: PubDate
    doc_type: DocType
    abstract: Optional[str] = None
    references: tuple[ReferenceRecord, ...] = field(default_factory=tuple)

    @property
    def reference_count(self) -> int:
        return len(self.references)


@dataclass(frozen=True)
class Period:
    """A year, or a (year, month) pair at month granularity."""

    granularity: Granularity
    year: int
    month: Optional[int] = None

    def __post_init__(self):
        if self.granularity is Granularity.MONTH:
            if self.month is None or not 1 <= self.month <= 12:
                raise ValueError(f"Month period needs a month in 1..12, got {self.month}")
        elif self.month is not None:
            raise ValueError("Year period cannot carry a month")

    @property
    def key(self) -> str:
        if self.granularity is Granularity.MONTH:
            return f"{self.year:04d}-{self.month:02d}"
        return f"{self.year:04d}"

    @property
    def sort_key(self) -> tuple[int, int]:
        return (self.year, self.month or 0)

    @classmethod
    def parse(cls, text: str) -> "Period":
        match = _BOUND_RE.match(str(text).strip())
        if match is None:
            raise ValueError(f"Invalid period: {text!r}")
        year, month = match.group(1), match.group(2)
        if month is None:
            return cls(Granularity.YEAR, int(year))
        return cls(Granularity.MONTH, int(year), int(month))

    def __str__(self) -> str:
        return self.key


_BOUND_RE = re.compile(r"^(\d{4})(?:-(\d{1,2}))?$")


@dataclass(frozen=True)
class DateBound:
    """Inclusive range bound written as ``YEAR`` or ``YEAR-MM``."""

    year: int
    month: Optional[int] = None

    @classmethod
    def parse(cls, text) -> "DateBound":
        match = _BOUND_RE.match(str(text).strip())
        if match is None:
            raise ValueError(f"Invalid date bound {text!r}, expected YEAR or YEAR-MM")
        month = int(match.group(2)) if match.group(2) is not None else None
        if month is not None and not 1 <= month <= 12:
            raise ValueError(f"Invalid month in date bound {text!r}")
        return cls(int(match.group(1)), month)

    def __str__(self) -> str:
        if self.month is None:
            return f"{self.year:04d}"
        return f"{self.year:04d}-{self.month:02d}"


def in_range(pub_date: PubDate, start: DateBound, end: DateBound) -> bool:
    """Inclusive range test; month bounds only apply when the record has a month."""
    if pub_date.year < start.year or pub_date.year > end.year:
        return False
    if pub_date.month is not None:
        if pub_date.year == start.year and start.month is not None and pub_date.month < start.month:
            return False
        if pub_date.year == end.year and end.month is not None and pub_date.month > end.month:
            return False
    return True


# ---------------------------------------------------------------------------
# Parsing
# ---------------------------------------------------------------------------

class _MalformedRecord(ValueError):
    pass


def _require_text(obj: dict, key: str, allow_empty: bool = True) -> str:
    if key not in obj:
        raise _MalformedRecord(f"missing field '{key}'")
    value = obj[key]
    if value is None:
        value = ""
    if not isinstance(value, str):
        raise _MalformedRecord(f"field '{key}' must be text")
    if not allow_empty and not value.strip():
        raise _MalformedRecord(f"field '{key}' is empty")
    return value


def _optional_int(obj: dict, key: str) -> Optional[int]:
    value = obj.get(key)
    if value is None or value == "":
        return None
    if isinstance(value, bool):
        raise _MalformedRecord(f"field '{key}' must be an integer")
    if isinstance(value, int):
        return value
    if isinstance(value, str) and value.strip().isdigit():
        return int(value.strip())
    raise _MalformedRecord(f"field '{key}' must be an integer")


def _parse_date(obj: dict) -> PubDate:
    year = _optional_int(obj, "year")
    if year is None:
        raise _MalformedRecord("missing field 'year'")
    month = _optional_int(obj, "month")
    day = _optional_int(obj, "day")
    if month is not None and not 1 <= month <= 12:
        raise _MalformedRecord(f"month {month} outside 1..12")
    if day is not None:
        if month is None:
            raise _MalformedRecord("day given without month")
        try:
            date(year, month, day)
        except ValueError as exc:
            raise _MalformedRecord(f"invalid date: {exc}") from exc
    return PubDate(year=year, month=month, day=day)


def _parse_reference(obj) -> ReferenceRecord:
    if not isinstance(obj, dict):
        raise _MalformedRecord("reference entries must be objects")
    ref_id = obj.get("ref_id")
    if ref_id is None or not str(ref_id).strip():
        raise _MalformedRecord("reference without 'ref_id'")
    journal = obj.get("journal") or ""
    if not isinstance(journal, str):
        raise _MalformedRecord("reference 'journal' must be text")
    doc_type = DocType.ARTICLE if obj.get("type") in (None, "") else DocType.from_text(obj.get("type"))
    return ReferenceRecord(
        ref_id=str(ref_id),
        journal_title=journal,
        year=_optional_int(obj, "year"),
        doc_type=doc_type,
    )


def record_from_dict(obj) -> PublicationRecord:
    if not isinstance(obj, dict):
        raise _MalformedRecord("line is not a JSON object")
    references = obj.get("references", [])
    if references is None:
        references = []
    if not isinstance(references, list):
        raise _MalformedRecord("'references' must be an array")
    abstract = obj.get("abstract")
    if abstract is not None and not isinstance(abstract, str):
        raise _MalformedRecord("'abstract' must be text")
    return PublicationRecord(
        id=_require_text(obj, "id", allow_empty=False).strip(),
        title=_require_text(obj, "title"),
        journal_title=_require_text(obj, "journal"),
        pub_date=_parse_date(obj),
        doc_type=DocType.from_text(_require_text(obj, "type")),
        abstract=abstract,
        references=tuple(_parse_reference(ref) for ref in references),
    )


def _iter_lines(stream: BinaryIO | Iterable[bytes]) -> Iterator[tuple[int, bytes]]:
    try:
        for line_no, raw in enumerate(stream, start=1):
            yield line_no, raw
    except OSError as exc:
        raise InputFormatError(f"Cannot read record stream: {exc}") from exc


def parse_records(
    stream: BinaryIO | Iterable[bytes],
    warnings: Optional[WarningLog] = None,
) -> list[PublicationRecord]:
    """Parse line-delimited JSON records, skipping and reporting bad lines.

    Blank lines are ignored. Duplicate ids keep the first occurrence.
    """
    warnings = warnings if warnings is not None else WarningLog()
    records: list[PublicationRecord] = []
    seen: set[str] = set()
    skipped = 0

    for line_no, raw in _iter_lines(stream):
        if isinstance(raw, str):
            raw = raw.encode("utf-8")
        if not raw.strip():
            continue
        try:
            obj = json.loads(raw.decode("utf-8"))
            record = record_from_dict(obj)
        except (UnicodeDecodeError, json.JSONDecodeError) as exc:
            warnings.warn(STAGE, f"malformed line skipped ({exc.__class__.__name__})", line=line_no)
            skipped += 1
            continue
        except _MalformedRecord as exc:
            warnings.warn(STAGE, f"malformed line skipped: {exc}", line=line_no)
            skipped += 1
            continue

        if record.id in seen:
            warnings.warn(STAGE, f"duplicate id '{record.id}' rejected, first occurrence kept", line=line_no)
            skipped += 1
            continue
        seen.add(record.id)
        records.append(record)

    log.info("Parsed %d records (%d lines skipped)", len(records), skipped)
    return records


def load_records(path, warnings: Optional[WarningLog] = None) -> list[PublicationRecord]:
    with open(path, "rb") as handle:
        return parse_records(handle, warnings)


def record_to_dict(record: PublicationRecord) -> dict:
    obj: dict = {
        "id": record.id,
        "title": record.title,
        "journal": record.journal_title,
        "year": record.pub_date.year,
    }
    if record.pub_date.month is not None:
        obj["month"] = record.pub_date.month
    if record.pub_date.day is not None:
        obj["day"] = record.pub_date.day
    obj["type"] = record.doc_type.value
    if record.abstract is not None:
        obj["abstract"] = record.abstract
    refs = []
    for ref in record.references:
        ref_obj: dict = {"ref_id": ref.ref_id, "journal": ref.journal_title}
        if ref.year is not None:
            ref_obj["year"] = ref.year
        ref_obj["type"] = ref.doc_type.value
        refs.append(ref_obj)
    obj["references"] = refs
    return obj


def serialize_records(records: Iterable[PublicationRecord]) -> bytes:
    """Inverse of :func:`parse_records` (one JSON object per line)."""
    lines = [json.dumps(record_to_dict(record), ensure_ascii=False) for record in records]
    return "".join(line + "\n" for line in lines).encode("utf-8")


# ---------------------------------------------------------------------------
# Filtering and bucketing
# ---------------------------------------------------------------------------

def filter_doc_types(
    records: Iterable[PublicationRecord],
    allowed: set[DocType] | frozenset[DocType],
    filter_reference_types: bool = True,
) -> list[PublicationRecord]:
    """Keep records whose type is allowed; optionally apply the same rule to references."""
    if not allowed:
        raise ValueError("allowed document types must not be empty")
    kept = []
    for record in records:
        if record.doc_type not in allowed:
            continue
        if filter_reference_types:
            refs = tuple(ref for ref in record.references if ref.doc_type in allowed)
            if len(refs) != len(record.references):
                record = replace(record, references=refs)
        kept.append(record)
    return kept


def period_of(
    record: PublicationRecord,
    granularity: Granularity,
    missing_month_policy: MissingMonthPolicy = MissingMonthPolicy.EXCLUDE,
) -> Optional[Period]:
    """Period of a record, or None when the missing-month policy excludes it."""
    if granularity is Granularity.YEAR:
        return Period(Granularity.YEAR, record.pub_date.year)
    month = record.pub_date.month
    if month is None:
        if missing_month_policy is MissingMonthPolicy.JANUARY:
            month = 1
        else:
            return None
    return Period(Granularity.MONTH, record.pub_date.year, month)


def bucket_by_period(
    records: Iterable[PublicationRecord],
    granularity: Granularity,
    start: Optional[DateBound] = None,
    end: Optional[DateBound] = None,
    missing_month_policy: MissingMonthPolicy = MissingMonthPolicy.EXCLUDE,
    warnings: Optional[WarningLog] = None,
) -> dict[Period, list[PublicationRecord]]:
    """Partition records into chronologically ordered period buckets."""
    warnings = warnings if warnings is not None else WarningLog()
    start = start or DateBound(DEFAULT_YEAR_RANGE[0])
    end = end or DateBound(DEFAULT_YEAR_RANGE[1])
    buckets: dict[Period, list[PublicationRecord]] = {}

    for record in records:
        if not in_range(record.pub_date, start, end):
            warnings.warn("bucket", f"record '{record.id}' dated {record.pub_date.year} outside {start}..{end}, excluded")
            continue
        period = period_of(record, granularity, missing_month_policy)
        if period is None:
            warnings.warn("bucket", f"record '{record.id}' has no month, excluded at month granularity")
            continue
        buckets.setdefault(period, []).append(record)

    return dict(sorted(buckets.items(), key=lambda item: item[0].sort_key))
