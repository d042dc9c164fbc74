"""Qualification thresholds, keyword subsetting and stage statistics."""

from __future__ import annotations

import logging
from collections import Counter
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Optional, Sequence

import pandas as pd

from Corpus.corpus_model import DocType, PublicationRecord
from errors import ConsistencyError
from Journals.discipline_mapper import DisciplineAssignment

log = logging.getLogger(__name__)

DEFAULT_ALLOWED_TYPES = frozenset({DocType.ARTICLE, DocType.REVIEW})


class RejectReason(Enum):
    # checked in declaration order, first failure wins; UNIDENTIFIED only when required
    TYPE = "type"
    UNIDENTIFIED = "unidentified"
    REF_COUNT = "ref-count"
    COVERAGE = "coverage"


class StageName(Enum):
    RAW = "raw"
    IDENTIFIABLE = "discipline-identifiable"
    QUALIFIED = "qualified"
    KEYWORD = "keyword-subset"


@dataclass(frozen=True)
class QualificationPolicy:
    """Thresholds a citing paper must meet to enter the analysis."""

    min_references: int = 5
    min_coverage: float = 0.80
    allowed_types: frozenset = DEFAULT_ALLOWED_TYPES

    def __post_init__(self):
        if int(self.min_references) < 1:
            raise ValueError(f"min_references must be >= 1, got {self.min_references}")
        if not 0.0 <= float(self.min_coverage) <= 1.0:
            raise ValueError(f"min_coverage must be within [0, 1], got {self.min_coverage}")
        if not self.allowed_types:
            raise ValueError("allowed_types must not be empty")
        object.__setattr__(self, "allowed_types", frozenset(self.allowed_types))


@dataclass(frozen=True)
class Rejection:
    record: PublicationRecord
    assignment: DisciplineAssignment
    reason: RejectReason


@dataclass(frozen=True)
class QualificationResult:
    qualified: list = field(default_factory=list)  # (record, assignment) pairs
    rejected: list = field(default_factory=list)   # Rejection

    def rejection_tally(self) -> dict[str, int]:
        tally = Counter(item.reason.value for item in self.rejected)
        return {reason.value: tally[reason.value] for reason in RejectReason if tally[reason.value]}


def rejection_reason(
    record: PublicationRecord,
    assignment: DisciplineAssignment,
    policy: QualificationPolicy,
    require_identified: bool = False,
) -> Optional[RejectReason]:
    if record.doc_type not in policy.allowed_types:
        return RejectReason.TYPE
    if require_identified and not assignment.citing_identified:
        return RejectReason.UNIDENTIFIED
    if assignment.reference_count < policy.min_references:
        return RejectReason.REF_COUNT
    # exactly the threshold qualifies
    if assignment.coverage < policy.min_coverage:
        return RejectReason.COVERAGE
    return None


def qualify(
    assignments: Iterable[tuple[PublicationRecord, DisciplineAssignment]],
    policy: QualificationPolicy = QualificationPolicy(),
    require_identified: bool = False,
) -> QualificationResult:
    """Split (record, assignment) pairs into qualified pairs and rejections.

    With ``require_identified`` a citing paper whose own journal is missing
    from the catalog is rejected as ``unidentified``.
    """
    qualified, rejected = [], []
    for record, assignment in assignments:
        reason = rejection_reason(record, assignment, policy, require_identified)
        if reason is None:
            qualified.append((record, assignment))
        else:
            rejected.append(Rejection(record, assignment, reason))
    log.info("Qualified %d records, rejected %d", len(qualified), len(rejected))
    return QualificationResult(qualified=qualified, rejected=rejected)


def keyword_subset(records: Iterable[PublicationRecord], terms: Sequence[str]) -> list[PublicationRecord]:
    """Case-insensitive substring OR-query over title and abstract."""
    needles = [term.lower() for term in terms if term]
    if not needles:
        raise ValueError("keyword_subset needs at least one nonempty term")
    kept = []
    for record in records:
        haystack = record.title.lower() + "\n" + (record.abstract or "").lower()
        if any(needle in haystack for needle in needles):
            kept.append(record)
    return kept


@dataclass(frozen=True)
class CorpusStage:
    name: str
    records: Sequence[PublicationRecord]


@dataclass(frozen=True)
class StageCount:
    stage: str
    papers: int
    references: int


@dataclass(frozen=True)
class CorpusStats:
    rows: tuple = ()
    rejections: dict = field(default_factory=dict)

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(
            [{"stage": row.stage, "papers": row.papers, "references": row.references} for row in self.rows],
            columns=["stage", "papers", "references"],
        )

    def to_dict(self) -> dict:
        return {
            "stages": [{"stage": r.stage, "papers": r.papers, "references": r.references} for r in self.rows],
            "rejections": dict(self.rejections),
        }


def corpus_stats(
    stages: Sequence[CorpusStage],
    rejections: Optional[dict[str, int]] = None,
) -> CorpusStats:
    """Per-stage paper and reference totals; stages must be successive subsets."""
    rows = []
    previous_ids: Optional[set[str]] = None
    previous_name = None
    for stage in stages:
        ids = {record.id for record in stage.records}
        if previous_ids is not None and not ids <= previous_ids:
            extra = sorted(ids - previous_ids)[:5]
            raise ConsistencyError(
                f"stage '{stage.name}' is not a subset of '{previous_name}' (e.g. {', '.join(extra)})"
            )
        rows.append(StageCount(
            stage=stage.name,
            papers=len(stage.records),
            references=sum(record.reference_count for record in stage.records),
        ))
        previous_ids, previous_name = ids, stage.name
    return CorpusStats(rows=tuple(rows), rejections=dict(rejections or {}))
