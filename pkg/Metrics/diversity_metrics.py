"""Variety, balance, disparity and true diversity indicators.

Per-paper indicators are computed from full-counting discipline vectors; the
disparity matrix comes from the discipline co-occurrence counts of the
analysed corpus. Per-period means carry normal-approximation 95% intervals.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Optional, Sequence

import numpy as np
import pandas as pd

from Corpus.corpus_model import Period
from errors import MetricDomainError
from Journals.discipline_mapper import (
    DISCIPLINE_CODES,
    DISCIPLINE_INDEX,
    DISCIPLINES,
    DisciplineAssignment,
    DisciplineVector,
)
from run_log import WarningLog

log = logging.getLogger(__name__)

Z_95 = 1.96
METRICS = ("variety", "balance", "true_diversity")


class TDMode(Enum):
    """CANONICAL sums (1 - d_ij) p_i p_j over all ordered pairs, diagonal included.

    PAPER_EXAMPLE inverts the sum of d_ij p_i p_j over unordered distinct pairs,
    the form that reproduces the published worked example.
    """
    CANONICAL = "canonical"
    PAPER_EXAMPLE = "paper-example"


class DisparityBasis(Enum):
    GLOBAL = "global"
    PER_WINDOW = "per-window"


@dataclass(frozen=True)
class DisparityMatrix:
    values: np.ndarray
    labels: tuple = DISCIPLINE_CODES
    provenance: str = ""
    zero_rows: frozenset = frozenset()

    def __post_init__(self):
        values = np.array(self.values, dtype=float)
        if values.ndim != 2 or values.shape[0] != values.shape[1]:
            raise ValueError(f"disparity matrix must be square, got shape {values.shape}")
        if values.shape[0] != len(self.labels):
            raise ValueError("disparity matrix size does not match its labels")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "labels", tuple(self.labels))
        object.__setattr__(self, "zero_rows", frozenset(self.zero_rows))

    @classmethod
    def from_distances(cls, distances, labels: Sequence[str], provenance: str = "given") -> "DisparityMatrix":
        """Wrap an explicit distance matrix (symmetric, zero diagonal, entries in [0, 1])."""
        values = np.asarray(distances, dtype=float)
        if not np.allclose(values, values.T):
            raise ValueError("distance matrix must be symmetric")
        if np.any(np.diag(values) != 0):
            raise ValueError("distance matrix must have a zero diagonal")
        if np.any(values < 0) or np.any(values > 1):
            raise ValueError("distances must lie in [0, 1]")
        return cls(values=values, labels=tuple(labels), provenance=provenance)

    def distance(self, a: str, b: str) -> float:
        return float(self.values[self.labels.index(a), self.labels.index(b)])

    @property
    def size(self) -> int:
        return len(self.labels)

    def to_frame(self) -> pd.DataFrame:
        frame = pd.DataFrame(self.values, index=list(self.labels), columns=list(self.labels))
        frame.index.name = "code"
        return frame


@dataclass(frozen=True)
class PaperScores:
    paper_id: str
    variety: int
    balance: float
    true_diversity: float
    mode: TDMode = TDMode.CANONICAL

    def metric(self, name: str) -> float:
        return float(getattr(self, name))


@dataclass(frozen=True)
class SeriesPoint:
    period: str
    metric: str
    n: int
    mean: float
    ci_low: float
    ci_high: float
    degenerate: bool = False  # n == 1, interval collapsed


@dataclass(frozen=True)
class MetricSeries:
    points: tuple = field(default_factory=tuple)

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(
            [
                {"period": p.period, "metric": p.metric, "n": p.n, "mean": p.mean,
                 "ci_low": p.ci_low, "ci_high": p.ci_high}
                for p in self.points
            ],
            columns=["period", "metric", "n", "mean", "ci_low", "ci_high"],
        )

    def for_metric(self, metric: str) -> list[SeriesPoint]:
        return [p for p in self.points if p.metric == metric]


# ---------------------------------------------------------------------------
# Per-paper indicators
# ---------------------------------------------------------------------------

def _nonzero_counts(v) -> np.ndarray:
    if isinstance(v, DisciplineVector):
        counts = np.asarray(v.nonzero_counts(), dtype=float)
    else:
        counts = np.asarray(list(v), dtype=float)
        counts = counts[counts != 0]
    if np.any(counts < 0):
        raise MetricDomainError("counts must be nonnegative")
    if counts.size == 0:
        raise MetricDomainError("indicator undefined for a vector without identified references")
    return counts


def variety(v) -> int:
    """Number of disciplines with a nonzero count."""
    return int(_nonzero_counts(v).size)


def balance(v) -> float:
    """1 - Gini over the sorted nonzero counts."""
    x = np.sort(_nonzero_counts(v))
    size = x.size
    if size == 1:
        return 1.0
    ranks = np.arange(1, size + 1, dtype=float)
    gini = float(np.sum((2 * ranks - size - 1) * x) / (size * np.sum(x)))
    return 1.0 - gini


def disparity_matrix(
    cooccurrence,
    labels: Sequence[str] = DISCIPLINE_CODES,
    provenance: str = "",
    warnings: Optional[WarningLog] = None,
) -> DisparityMatrix:
    """d_ij = 1 - cosine similarity of the rows of a co-occurrence matrix.

    Rows that are entirely zero get d = 1 against every other row and are
    flagged in ``zero_rows``.
    """
    C = np.asarray(cooccurrence, dtype=float)
    if C.ndim != 2 or C.shape[0] != C.shape[1]:
        raise ValueError(f"co-occurrence matrix must be square, got shape {C.shape}")
    if np.any(C < 0):
        raise ValueError("co-occurrence matrix has negative entries")
    if not np.array_equal(C, C.T):
        raise ValueError("co-occurrence matrix is not symmetric")

    norms = np.sqrt(np.sum(C * C, axis=1))
    zero = norms == 0
    safe = np.where(zero, 1.0, norms)
    similarity = (C @ C.T) / np.outer(safe, safe)
    distances = np.clip(1.0 - similarity, 0.0, 1.0)
    distances[zero, :] = 1.0
    distances[:, zero] = 1.0
    np.fill_diagonal(distances, 0.0)
    # numerical noise only; the cosine form is symmetric
    distances = (distances + distances.T) / 2.0

    zero_rows = frozenset(labels[i] for i in np.flatnonzero(zero))
    if zero_rows and warnings is not None:
        warnings.warn(
            "disparity",
            f"{provenance or 'matrix'}: no co-occurrence for {', '.join(sorted(zero_rows))}; maximal disparity assigned",
        )
    return DisparityMatrix(values=distances, labels=tuple(labels), provenance=provenance, zero_rows=zero_rows)


def build_disparity_basis(assignments: Iterable[DisciplineAssignment]) -> np.ndarray:
    """27x27 counts: off-diagonal pairs co-occurring in a paper, diagonal papers per discipline."""
    size = len(DISCIPLINES)
    C = np.zeros((size, size), dtype=np.int64)
    for assignment in assignments:
        members = sorted(DISCIPLINE_INDEX[d] for d in assignment.discipline_union())
        if not members:
            continue
        index = np.asarray(members)
        C[np.ix_(index, index)] += 1
    return C


def _proportions(v, D: DisparityMatrix) -> np.ndarray:
    if isinstance(v, DisciplineVector):
        if D.size != len(DISCIPLINES):
            raise ValueError("a discipline vector needs a full 27-discipline disparity matrix")
        counts = v.as_array()
    else:
        counts = np.asarray(list(v), dtype=float)
        if counts.size != D.size:
            raise ValueError("count vector and disparity matrix sizes differ")
    if np.any(counts < 0):
        raise MetricDomainError("counts must be nonnegative")
    total = counts.sum()
    if total <= 0:
        raise MetricDomainError("true diversity undefined for a vector without identified references")
    return counts / total


def true_diversity(v, D: DisparityMatrix, mode: TDMode = TDMode.CANONICAL) -> float:
    p = _proportions(v, D)
    if mode is TDMode.CANONICAL:
        similarity = 1.0 - D.values
        np.fill_diagonal(similarity, 1.0)
        return float(1.0 / (p @ similarity @ p))

    denominator = float(p @ np.triu(D.values, k=1) @ p)
    if denominator <= 0:
        raise MetricDomainError("paper-example true diversity undefined: no disparity between present disciplines")
    return 1.0 / denominator


def score_paper(paper_id: str, v: DisciplineVector, D: DisparityMatrix, mode: TDMode = TDMode.CANONICAL) -> PaperScores:
    return PaperScores(
        paper_id=paper_id,
        variety=variety(v),
        balance=balance(v),
        true_diversity=true_diversity(v, D, mode),
        mode=mode,
    )


# ---------------------------------------------------------------------------
# Period aggregation
# ---------------------------------------------------------------------------

def aggregate_series(
    scores: Iterable[tuple[Period, PaperScores]],
    warnings: Optional[WarningLog] = None,
) -> MetricSeries:
    """Mean and mean +/- 1.96 * s / sqrt(n) per period and metric."""
    rows = []
    order: dict[str, tuple[int, int]] = {}
    for period, score in scores:
        order[period.key] = period.sort_key
        for metric in METRICS:
            rows.append({"period": period.key, "metric": metric, "value": score.metric(metric)})
    if not rows:
        return MetricSeries()

    frame = pd.DataFrame(rows)
    grouped = frame.groupby(["period", "metric"], sort=False)["value"].agg(["size", "mean", "std"]).reset_index()

    points = []
    for row in grouped.itertuples(index=False):
        n = int(row.size)
        mean = float(row.mean)
        degenerate = n < 2
        half_width = 0.0 if degenerate or math.isnan(row.std) else Z_95 * float(row.std) / math.sqrt(n)
        points.append(SeriesPoint(
            period=row.period,
            metric=row.metric,
            n=n,
            mean=mean,
            ci_low=mean - half_width,
            ci_high=mean + half_width,
            degenerate=degenerate,
        ))

    points.sort(key=lambda p: (order[p.period], METRICS.index(p.metric)))
    if warnings is not None:
        for period in sorted({p.period for p in points if p.degenerate}, key=order.__getitem__):
            warnings.warn("metrics", f"period {period} has a single paper; confidence interval collapsed")
    return MetricSeries(points=tuple(points))


def scores_frame(scores: Iterable[tuple[Period, PaperScores]]) -> pd.DataFrame:
    return pd.DataFrame(
        [
            {"paper_id": s.paper_id, "period": period.key, "variety": s.variety,
             "balance": s.balance, "true_diversity": s.true_diversity, "mode": s.mode.value}
            for period, s in scores
        ],
        columns=["paper_id", "period", "variety", "balance", "true_diversity", "mode"],
    )
