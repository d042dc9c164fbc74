"""
Seeded generator of citation corpora with planted structure.

The spread corpus widens the number of cited disciplines by one per year; the
dominance corpus lets one discipline's reference count grow each year while
the others stay fixed. Both use one generated journal per discipline so every
reference is identifiable.
"""
import csv
import io
import logging
from typing import List, Sequence

import numpy as np

from Corpus.corpus_model import DocType, PubDate, PublicationRecord, ReferenceRecord, serialize_records
from Journals.discipline_mapper import CATALOG_HEADER, DISCIPLINES, Discipline, DisciplineCatalog
from Journals.journal_normalizer import normalize_title
from run_report import atomic_write_bytes

log = logging.getLogger(__name__)

MIN_REFERENCES = 5


def journal_for(discipline: Discipline) -> str:
    return f"Synthetic Journal of {discipline.full_name}"


def synthetic_catalog() -> DisciplineCatalog:
    """One journal per discipline."""
    return DisciplineCatalog({normalize_title(journal_for(d)): frozenset({d}) for d in DISCIPLINES})


def _references(paper_id: str, year: int, counts: Sequence[tuple]) -> tuple:
    refs = []
    for discipline, count in counts:
        for _ in range(int(count)):
            refs.append(ReferenceRecord(
                ref_id=f"{paper_id}-R{len(refs) + 1:03d}",
                journal_title=journal_for(discipline),
                year=year - 1,
            ))
    return tuple(refs)


def _paper(paper_id: str, year: int, index: int, counts: Sequence[tuple], title: str) -> PublicationRecord:
    return PublicationRecord(
        id=paper_id,
        title=title,
        journal_title=journal_for(counts[0][0]),
        pub_date=PubDate(year=year, month=index % 12 + 1),
        doc_type=DocType.ARTICLE,
        references=_references(paper_id, year, counts),
    )


def generate_spread_corpus(
    seed: int = 42,
    years: Sequence[int] = range(2010, 2016),
    papers_per_year: int = 20,
    base_variety: int = 2,
) -> List[PublicationRecord]:
    """Papers of the k-th year cite exactly ``base_variety + k`` disciplines."""
    years = list(years)
    if base_variety < 1 or base_variety + len(years) - 1 > len(DISCIPLINES):
        raise ValueError(f"variety must stay within 1..{len(DISCIPLINES)}")
    rng = np.random.default_rng(seed)
    records = []
    for k, year in enumerate(years):
        variety = base_variety + k
        low = max(3, -(-MIN_REFERENCES // variety))
        for i in range(papers_per_year):
            chosen = rng.choice(len(DISCIPLINES), size=variety, replace=False)
            counts = [(DISCIPLINES[j], rng.integers(low, low + 3)) for j in chosen]
            records.append(_paper(f"S{year}-{i + 1:04d}", year, i, counts, f"Spread study {year} no. {i + 1}"))
    log.info("Generated spread corpus: %d records over %d years", len(records), len(years))
    return records


def generate_dominance_corpus(
    seed: int = 42,
    years: Sequence[int] = range(2010, 2016),
    papers_per_year: int = 20,
    variety: int = 4,
    base: int = 3,
    growth: int = 3,
) -> List[PublicationRecord]:
    """One dominant discipline per paper cites ``base + growth * k`` references in year k, the rest ``base``."""
    if not 2 <= variety <= len(DISCIPLINES):
        raise ValueError(f"variety must lie in 2..{len(DISCIPLINES)}")
    if base < 1 or growth < 1:
        raise ValueError("base and growth must be positive")
    years = list(years)
    rng = np.random.default_rng(seed)
    records = []
    for k, year in enumerate(years):
        for i in range(papers_per_year):
            chosen = rng.choice(len(DISCIPLINES), size=variety, replace=False)
            counts = [(DISCIPLINES[chosen[0]], base + growth * k)]
            counts += [(DISCIPLINES[j], base) for j in chosen[1:]]
            records.append(_paper(f"D{year}-{i + 1:04d}", year, i, counts, f"Dominance study {year} no. {i + 1}"))
    log.info("Generated dominance corpus: %d records over %d years", len(records), len(years))
    return records


def write_corpus(records: Sequence[PublicationRecord], path) -> None:
    atomic_write_bytes(path, serialize_records(records))


def write_catalog(path) -> None:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(CATALOG_HEADER)
    for discipline in DISCIPLINES:
        writer.writerow([journal_for(discipline), discipline.value])
    atomic_write_bytes(path, buffer.getvalue().encode("utf-8"))
