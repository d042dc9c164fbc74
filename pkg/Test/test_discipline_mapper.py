"""
Tests for Journals/discipline_mapper.py
Discipline enumeration, catalog loading, assignment and full counting.
"""

import sys
import tempfile
import unittest
from pathlib import Path

import numpy as np

ROOT_DIR = Path(__file__).resolve().parents[1]
if str(ROOT_DIR) not in sys.path:
    sys.path.insert(0, str(ROOT_DIR))

from Corpus.corpus_model import DocType, PubDate, PublicationRecord, ReferenceRecord
from Journals.discipline_mapper import (
    DISCIPLINES,
    MULTIDISCIPLINARY_LABEL,
    Discipline,
    DisciplineAssignment,
    DisciplineCatalog,
    SubjectArea,
    assign,
    discipline_distribution,
    discipline_vector,
    format_codes,
    load_catalog,
    lookup,
    subject_area_distribution,
)
from Journals.journal_normalizer import AbbrevMap, EMPTY_ABBREV_MAP
from run_log import WarningLog

M, I, B = Discipline.MEDI, Discipline.IMMU, Discipline.BIOC


def record_citing(journal, *ref_journals):
    return PublicationRecord(
        id="P1",
        title="",
        journal_title=journal,
        pub_date=PubDate(2020),
        doc_type=DocType.ARTICLE,
        references=tuple(ReferenceRecord(f"R{i}", title) for i, title in enumerate(ref_journals)),
    )


class TestDisciplineEnum(unittest.TestCase):
    """Tests for the fixed discipline enumeration"""

    def test_twenty_seven_codes_in_frequency_order(self):
        self.assertEqual(len(DISCIPLINES), 27)
        self.assertIs(DISCIPLINES[0], Discipline.MEDI)
        self.assertIs(DISCIPLINES[3], Discipline.MULT)
        self.assertIs(DISCIPLINES[-1], Discipline.EARTH)
        self.assertEqual(Discipline.BIOC.index, 2)

    def test_names_and_subject_areas(self):
        self.assertEqual(Discipline.IMMU.full_name, "Immunology and Microbiology")
        self.assertIs(Discipline.MEDI.subject_area, SubjectArea.HEALTH)
        self.assertIs(Discipline.CS.subject_area, SubjectArea.PHYSICAL)
        self.assertIsNone(Discipline.MULT.subject_area)

    def test_from_code(self):
        self.assertIs(Discipline.from_code(" cs "), Discipline.CS)
        self.assertIsNone(Discipline.from_code("XYZ"))

    def test_format_codes_uses_enumeration_order(self):
        self.assertEqual(format_codes({Discipline.CS, Discipline.MEDI, Discipline.BIOC}), "MEDI;BIOC;CS")


class TestCatalog(unittest.TestCase):
    """Tests for load_catalog and lookup"""

    def setUp(self):
        self.temp_dir = tempfile.TemporaryDirectory()
        self.addCleanup(self.temp_dir.cleanup)

    def write(self, text):
        path = Path(self.temp_dir.name) / "catalog.csv"
        path.write_text(text, encoding="utf-8")
        return path

    def test_duplicates_are_merged_by_union(self):
        warnings = WarningLog()
        path = self.write(
            "journal_title,codes\n"
            "Cancer Cell,BIOC\n"
            "cancer cell.,MEDI;XYZ\n"
            "Nowhere Journal,XYZ\n"
            "Journal of Virology,IMMU\n"
        )
        catalog = load_catalog(path, warnings=warnings)
        self.assertEqual(len(catalog), 2)
        self.assertEqual(catalog.get("cancer cell"), frozenset({B, M}))
        # unknown code on two rows, plus one row left without any valid code
        self.assertEqual(len(warnings), 3)

    def test_lookup_exact_then_abbreviation(self):
        catalog = DisciplineCatalog({"journal of virology": frozenset({I})})
        abbrev_map = AbbrevMap({"j virol": "journal of virology"})
        self.assertEqual(lookup("Journal of Virology", catalog, EMPTY_ABBREV_MAP), frozenset({I}))
        self.assertEqual(lookup("J. Virol.", catalog, abbrev_map), frozenset({I}))
        self.assertIsNone(lookup("J. Virol.", catalog, EMPTY_ABBREV_MAP))
        # no fuzzy matching
        self.assertIsNone(lookup("Journal of Virologies", catalog, abbrev_map))
        self.assertIsNone(lookup("", catalog, abbrev_map))


class TestAssignment(unittest.TestCase):
    """Tests for assign and discipline_vector"""

    def setUp(self):
        self.catalog = DisciplineCatalog({
            "the lancet": frozenset({M}),
            "cancer cell": frozenset({B, M}),
            "journal of virology": frozenset({I}),
        })

    def test_coverage_and_citing_disciplines(self):
        record = record_citing("The Lancet", "Cancer Cell", "Unknown Bulletin", "Journal of Virology", "")
        assignment = assign(record, self.catalog)
        self.assertEqual(assignment.citing_disciplines, frozenset({M}))
        self.assertEqual(assignment.reference_count, 4)
        self.assertEqual(assignment.identified_count, 2)
        self.assertAlmostEqual(assignment.coverage, 0.5)
        self.assertEqual(assignment.discipline_union(), frozenset({B, M, I}))

    def test_reference_free_paper(self):
        assignment = assign(record_citing("Unknown"), self.catalog)
        self.assertTrue(assignment.reference_free)
        self.assertEqual(assignment.coverage, 0.0)
        self.assertFalse(assignment.citing_identified)

    def test_cancer_cell_counts_both_disciplines(self):
        vector = discipline_vector(assign(record_citing("The Lancet", "Cancer Cell"), self.catalog))
        self.assertEqual(vector[B], 1)
        self.assertEqual(vector[M], 1)
        self.assertEqual(vector.total, 2)

    def test_full_counting_conservation(self):
        rng = np.random.default_rng(7)
        for trial in range(1000):
            refs = []
            for _ in range(int(rng.integers(0, 15))):
                if rng.random() < 0.15:
                    refs.append(None)
                    continue
                size = int(rng.integers(1, 4))
                chosen = rng.choice(len(DISCIPLINES), size=size, replace=False)
                refs.append(frozenset(DISCIPLINES[j] for j in chosen))
            assignment = DisciplineAssignment(f"T{trial}", frozenset(), tuple(refs), 0.0)
            expected = sum(len(codes) for codes in refs if codes is not None)
            self.assertEqual(discipline_vector(assignment).total, expected)

    def test_vector_array_layout(self):
        vector = discipline_vector(assign(record_citing("The Lancet", "Cancer Cell", "Cancer Cell"), self.catalog))
        array = vector.as_array()
        self.assertEqual(array.shape, (27,))
        self.assertEqual(array[0], 2)
        self.assertEqual(array[2], 2)
        self.assertEqual(vector.nonzero_counts(), [2, 2])


class TestDistributions(unittest.TestCase):
    """Tests for discipline_distribution and subject_area_distribution"""

    def setUp(self):
        self.assignments = [
            DisciplineAssignment("A", frozenset({M}), (frozenset({M}), frozenset({B, M}), None), 2 / 3),
            DisciplineAssignment("B", frozenset({Discipline.MULT}), (frozenset({I}),), 1.0),
        ]

    def test_sorted_by_reference_frequency(self):
        frame = discipline_distribution(self.assignments)
        self.assertEqual(len(frame), 27)
        self.assertEqual(list(frame["discipline"][:3]), ["MEDI", "IMMU", "BIOC"])
        medi = frame.iloc[0]
        self.assertEqual(medi["articles"], 1)
        self.assertEqual(medi["references"], 2)
        self.assertAlmostEqual(medi["reference_share"], 50.0)
        self.assertAlmostEqual(frame["article_share"].sum(), 100.0)
        # ties keep enumeration order
        self.assertEqual(frame["discipline"].iloc[3], "MULT")

    def test_subject_area_rollup(self):
        areas = subject_area_distribution(discipline_distribution(self.assignments)).set_index("subject_area")
        self.assertEqual(areas.loc["Health Sciences", "references"], 2)
        self.assertEqual(areas.loc["Life Sciences", "references"], 2)
        self.assertEqual(areas.loc[MULTIDISCIPLINARY_LABEL, "articles"], 1)
        self.assertEqual(areas.loc["Social Sciences", "references"], 0)


if __name__ == "__main__":
    unittest.main()
