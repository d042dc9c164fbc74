"""Journal -> discipline classification and full-counting discipline vectors.

The 27 first-level disciplines and their subject areas are fixed here; the
journal list that maps titles onto them is data loaded from a catalog file.
"""

from __future__ import annotations

import csv
import logging
from collections import Counter
from dataclasses import dataclass, field
from enum import Enum
from types import MappingProxyType
from typing import Iterable, Mapping, Optional

import numpy as np
import pandas as pd

from Corpus.corpus_model import PublicationRecord
from Journals.journal_normalizer import AbbrevMap, EMPTY_ABBREV_MAP, expand, normalize_title, read_header
from run_log import WarningLog

log = logging.getLogger(__name__)

STAGE = "catalog"
CATALOG_HEADER = ("journal_title", "codes")


class SubjectArea(Enum):
    HEALTH = "Health Sciences"
    LIFE = "Life Sciences"
    PHYSICAL = "Physical Sciences"
    SOCIAL = "Social Sciences"


class Discipline(Enum):
    """First-level disciplines, in descending order of reference frequency."""
    MEDI = "MEDI"
    IMMU = "IMMU"
    BIOC = "BIOC"
    MULT = "MULT"
    AGRI = "AGRI"
    PHARM = "PHARM"
    VETE = "VETE"
    NEUR = "NEUR"
    CHEM = "CHEM"
    CHEME = "CHEME"
    ENVI = "ENVI"
    ENGR = "ENGR"
    NURS = "NURS"
    CS = "CS"
    PHYS = "PHYS"
    MATER = "MATER"
    SOCI = "SOCI"
    MATH = "MATH"
    PSYC = "PSYC"
    HEAL = "HEAL"
    BUSI = "BUSI"
    ARTS = "ARTS"
    ECON = "ECON"
    DECIS = "DECIS"
    DENT = "DENT"
    ENERGY = "ENERGY"
    EARTH = "EARTH"

    @property
    def full_name(self) -> str:
        return _DISCIPLINE_TABLE[self][0]

    @property
    def subject_area(self) -> Optional[SubjectArea]:
        """None for the multidisciplinary category."""
        return _DISCIPLINE_TABLE[self][1]

    @property
    def index(self) -> int:
        return DISCIPLINE_INDEX[self]

    @classmethod
    def from_code(cls, code: str) -> Optional["Discipline"]:
        try:
            return cls(str(code).strip().upper())
        except ValueError:
            return None


_DISCIPLINE_TABLE: dict[Discipline, tuple[str, Optional[SubjectArea]]] = {
    Discipline.MEDI: ("Medicine", SubjectArea.HEALTH),
    Discipline.IMMU: ("Immunology and Microbiology", SubjectArea.LIFE),
    Discipline.BIOC: ("Biochemistry, Genetics and Molecular Biology", SubjectArea.LIFE),
    Discipline.MULT: ("Multidisciplinary", None),
    Discipline.AGRI: ("Agricultural and Biological Sciences", SubjectArea.LIFE),
    Discipline.PHARM: ("Pharmacology, Toxicology and Pharmaceutics", SubjectArea.LIFE),
    Discipline.VETE: ("Veterinary", SubjectArea.HEALTH),
    Discipline.NEUR: ("Neuroscience", SubjectArea.LIFE),
    Discipline.CHEM: ("Chemistry", SubjectArea.PHYSICAL),
    Discipline.CHEME: ("Chemical Engineering", SubjectArea.PHYSICAL),
    Discipline.ENVI: ("Environmental Science", SubjectArea.PHYSICAL),
    Discipline.ENGR: ("Engineering", SubjectArea.PHYSICAL),
    Discipline.NURS: ("Nursing", SubjectArea.HEALTH),
    Discipline.CS: ("Computer Science", SubjectArea.PHYSICAL),
    Discipline.PHYS: ("Physics and Astronomy", SubjectArea.PHYSICAL),
    Discipline.MATER: ("Materials Science", SubjectArea.PHYSICAL),
    Discipline.SOCI: ("Social Sciences", SubjectArea.SOCIAL),
    Discipline.MATH: ("Mathematics", SubjectArea.PHYSICAL),
    Discipline.PSYC: ("Psychology", SubjectArea.SOCIAL),
    Discipline.HEAL: ("Health Professions", SubjectArea.HEALTH),
    Discipline.BUSI: ("Business, Management and Accounting", SubjectArea.SOCIAL),
    Discipline.ARTS: ("Arts and Humanities", SubjectArea.SOCIAL),
    Discipline.ECON: ("Economics, Econometrics and Finance", SubjectArea.SOCIAL),
    Discipline.DECIS: ("Decision Sciences", SubjectArea.SOCIAL),
    Discipline.DENT: ("Dentistry", SubjectArea.HEALTH),
    Discipline.ENERGY: ("Energy", SubjectArea.PHYSICAL),
    Discipline.EARTH: ("Earth and Planetary Sciences", SubjectArea.PHYSICAL),
}

DISCIPLINES: tuple[Discipline, ...] = tuple(Discipline)
DISCIPLINE_INDEX: Mapping[Discipline, int] = MappingProxyType({d: i for i, d in enumerate(DISCIPLINES)})
DISCIPLINE_CODES: tuple[str, ...] = tuple(d.value for d in DISCIPLINES)
MULTIDISCIPLINARY_LABEL = "Multidisciplinary"

DisciplineSet = frozenset  # frozenset[Discipline]
UNIDENTIFIED = None


def format_codes(codes: Iterable[Discipline]) -> str:
    """Codes joined by ';' in enumeration order."""
    return ";".join(d.value for d in sorted(codes, key=DISCIPLINE_INDEX.__getitem__))


@dataclass(frozen=True)
class DisciplineCatalog:
    """Canonical journal title -> nonempty set of disciplines."""

    entries: Mapping[str, frozenset] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "entries", MappingProxyType(dict(self.entries)))

    def get(self, key: str) -> Optional[frozenset]:
        return self.entries.get(key)

    def __len__(self) -> int:
        return len(self.entries)


@dataclass(frozen=True)
class DisciplineAssignment:
    paper_id: str
    citing_disciplines: frozenset
    ref_disciplines: tuple  # one frozenset or UNIDENTIFIED per reference
    coverage: float
    reference_free: bool = False

    @property
    def reference_count(self) -> int:
        return len(self.ref_disciplines)

    @property
    def identified_count(self) -> int:
        return sum(1 for codes in self.ref_disciplines if codes is not UNIDENTIFIED)

    @property
    def citing_identified(self) -> bool:
        return bool(self.citing_disciplines)

    def discipline_union(self) -> frozenset:
        """All disciplines of the identified references (the co-occurrence pattern)."""
        union: set[Discipline] = set()
        for codes in self.ref_disciplines:
            if codes is not UNIDENTIFIED:
                union.update(codes)
        return frozenset(union)


@dataclass(frozen=True)
class DisciplineVector:
    """Full-counting histogram; codes absent from ``counts`` are zero."""

    counts: Mapping[Discipline, int] = field(default_factory=dict)

    def __post_init__(self):
        nonzero = {d: int(c) for d, c in self.counts.items() if c}
        if any(c < 0 for c in nonzero.values()):
            raise ValueError("discipline counts must be nonnegative")
        ordered = dict(sorted(nonzero.items(), key=lambda item: DISCIPLINE_INDEX[item[0]]))
        object.__setattr__(self, "counts", MappingProxyType(ordered))

    @property
    def total(self) -> int:
        return sum(self.counts.values())

    def nonzero_counts(self) -> list[int]:
        return list(self.counts.values())

    def as_array(self) -> np.ndarray:
        array = np.zeros(len(DISCIPLINES), dtype=float)
        for discipline, count in self.counts.items():
            array[DISCIPLINE_INDEX[discipline]] = count
        return array

    def __getitem__(self, discipline: Discipline) -> int:
        return self.counts.get(discipline, 0)


# ---------------------------------------------------------------------------
# Catalog loading
# ---------------------------------------------------------------------------

def parse_codes(text: str, line: Optional[int], warnings: WarningLog) -> frozenset:
    codes: set[Discipline] = set()
    for token in str(text).split(";"):
        if not token.strip():
            continue
        discipline = Discipline.from_code(token)
        if discipline is None:
            warnings.warn(STAGE, f"unknown discipline code '{token.strip()}' dropped", line=line)
            continue
        codes.add(discipline)
    return frozenset(codes)


def load_catalog(
    path,
    delimiter: str = ",",
    warnings: Optional[WarningLog] = None,
) -> DisciplineCatalog:
    """Read ``journal_title,codes`` rows; duplicate titles are merged by union."""
    warnings = warnings if warnings is not None else WarningLog()
    entries: dict[str, set[Discipline]] = {}

    with open(path, "r", encoding="utf-8", newline="") as handle:
        reader = csv.reader(handle, delimiter=delimiter)
        read_header(reader, CATALOG_HEADER, path)
        for row in reader:
            line = reader.line_num
            if not row or not any(cell.strip() for cell in row):
                continue
            if len(row) != 2:
                warnings.warn(STAGE, f"expected 2 columns, got {len(row)}; row skipped", line=line)
                continue
            title = normalize_title(row[0])
            if not title:
                warnings.warn(STAGE, "empty journal title; row skipped", line=line)
                continue
            codes = parse_codes(row[1], line, warnings)
            if not codes:
                warnings.warn(STAGE, f"no valid discipline code for '{title}'; row skipped", line=line)
                continue
            entries.setdefault(title, set()).update(codes)

    log.info("Loaded %d catalog journals from %s", len(entries), path)
    return DisciplineCatalog({title: frozenset(codes) for title, codes in entries.items()})


# ---------------------------------------------------------------------------
# Assignment and counting
# ---------------------------------------------------------------------------

def lookup(raw_title: str, catalog: DisciplineCatalog, abbrev_map: AbbrevMap) -> Optional[frozenset]:
    """Exact canonical hit first, then the expanded abbreviation."""
    key = normalize_title(raw_title)
    if not key:
        return UNIDENTIFIED
    codes = catalog.get(key)
    if codes is not None:
        return codes
    expanded = expand(key, abbrev_map)
    if expanded != key:
        return catalog.get(expanded)
    return UNIDENTIFIED


def assign(
    record: PublicationRecord,
    catalog: DisciplineCatalog,
    abbrev_map: AbbrevMap = EMPTY_ABBREV_MAP,
) -> DisciplineAssignment:
    citing = lookup(record.journal_title, catalog, abbrev_map)
    ref_disciplines = tuple(lookup(ref.journal_title, catalog, abbrev_map) for ref in record.references)
    total = len(ref_disciplines)
    identified = sum(1 for codes in ref_disciplines if codes is not UNIDENTIFIED)
    return DisciplineAssignment(
        paper_id=record.id,
        citing_disciplines=citing if citing is not UNIDENTIFIED else frozenset(),
        ref_disciplines=ref_disciplines,
        coverage=identified / total if total else 0.0,
        reference_free=total == 0,
    )


def discipline_vector(assignment: DisciplineAssignment) -> DisciplineVector:
    """Each identified reference adds 1 to every one of its disciplines."""
    counts: Counter = Counter()
    for codes in assignment.ref_disciplines:
        if codes is not UNIDENTIFIED:
            counts.update(codes)
    return DisciplineVector(counts)


# ---------------------------------------------------------------------------
# Distributions
# ---------------------------------------------------------------------------

def discipline_distribution(assignments: Iterable[DisciplineAssignment]) -> pd.DataFrame:
    """Full-counted discipline frequencies of citing papers and of references."""
    articles: Counter = Counter()
    references: Counter = Counter()
    for assignment in assignments:
        articles.update(assignment.citing_disciplines)
        references.update(discipline_vector(assignment).counts)

    article_total = sum(articles.values())
    reference_total = sum(references.values())
    rows = []
    for discipline in DISCIPLINES:
        area = discipline.subject_area
        rows.append({
            "discipline": discipline.value,
            "name": discipline.full_name,
            "subject_area": area.value if area is not None else MULTIDISCIPLINARY_LABEL,
            "articles": articles[discipline],
            "references": references[discipline],
            "article_share": 100.0 * articles[discipline] / article_total if article_total else 0.0,
            "reference_share": 100.0 * references[discipline] / reference_total if reference_total else 0.0,
        })
    frame = pd.DataFrame(rows)
    # stable sort keeps enumeration order among ties
    return frame.sort_values("references", ascending=False, kind="mergesort").reset_index(drop=True)


def subject_area_distribution(distribution: pd.DataFrame) -> pd.DataFrame:
    order = [area.value for area in SubjectArea] + [MULTIDISCIPLINARY_LABEL]
    grouped = (
        distribution.groupby("subject_area", sort=False)[["articles", "references", "article_share", "reference_share"]]
        .sum()
        .reindex(order, fill_value=0)
    )
    grouped.index.name = "subject_area"
    return grouped.reset_index()
