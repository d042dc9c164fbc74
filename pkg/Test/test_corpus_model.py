"""
Tests for Corpus/corpus_model.py
Record parsing, document type filtering and period bucketing.
"""

import io
import json
import sys
import unittest
from pathlib import Path

import numpy as np

ROOT_DIR = Path(__file__).resolve().parents[1]
if str(ROOT_DIR) not in sys.path:
    sys.path.insert(0, str(ROOT_DIR))

from Corpus.corpus_model import (
    DateBound,
    DocType,
    Granularity,
    MissingMonthPolicy,
    Period,
    PubDate,
    PublicationRecord,
    ReferenceRecord,
    bucket_by_period,
    filter_doc_types,
    in_range,
    parse_records,
    serialize_records,
)
from run_log import WarningLog


def make_record(record_id, year, month=None, doc_type=DocType.ARTICLE, refs=(), title="", abstract=None):
    return PublicationRecord(
        id=record_id,
        title=title,
        journal_title="The Lancet",
        pub_date=PubDate(year, month),
        doc_type=doc_type,
        abstract=abstract,
        references=tuple(refs),
    )


def jsonl(*objects):
    lines = [o if isinstance(o, str) else json.dumps(o) for o in objects]
    return io.BytesIO(("\n".join(lines) + "\n").encode("utf-8"))


class TestDocType(unittest.TestCase):
    """Tests for DocType.from_text"""

    def test_case_insensitive_article_and_review(self):
        self.assertIs(DocType.from_text("article"), DocType.ARTICLE)
        self.assertIs(DocType.from_text("REVIEW"), DocType.REVIEW)
        self.assertIs(DocType.from_text(" Review "), DocType.REVIEW)

    def test_everything_else_is_other(self):
        for text in ("Letter", "editorial", "", None):
            self.assertIs(DocType.from_text(text), DocType.OTHER)


class TestParseRecords(unittest.TestCase):
    """Tests for line-delimited ingestion"""

    def setUp(self):
        self.good = {
            "id": "A1", "title": "Coronavirus entry", "journal": "J. Virol.", "year": 2020,
            "month": 4, "type": "Article",
            "references": [{"ref_id": "R1", "journal": "Cancer Cell", "year": 2018}, {"ref_id": "R2"}],
        }

    def test_valid_record(self):
        records = parse_records(jsonl(self.good))
        self.assertEqual(len(records), 1)
        record = records[0]
        self.assertEqual(record.id, "A1")
        self.assertEqual(record.pub_date, PubDate(2020, 4))
        self.assertEqual(record.reference_count, 2)
        self.assertEqual(record.references[0], ReferenceRecord("R1", "Cancer Cell", 2018, DocType.ARTICLE))

    def test_reference_without_type_defaults_to_article(self):
        record = parse_records(jsonl(self.good))[0]
        self.assertIs(record.references[1].doc_type, DocType.ARTICLE)
        self.assertEqual(record.references[1].journal_title, "")

    def test_malformed_and_duplicate_lines_are_warnings(self):
        warnings = WarningLog()
        stream = jsonl(
            self.good,
            "",
            '{"id": "A2", "title": ',
            {"id": "A3", "journal": "", "year": 2020, "type": "Article"},
            dict(self.good, title="second copy"),
            dict(self.good, id="A4"),
        )
        records = parse_records(stream, warnings)

        self.assertEqual([r.id for r in records], ["A1", "A4"])
        self.assertEqual(records[0].title, "Coronavirus entry")
        self.assertEqual(len(warnings), 3)
        self.assertEqual([w.line for w in warnings.items], [3, 4, 5])
        self.assertIn("duplicate id 'A1'", warnings.items[2].message)
        self.assertIn("title", warnings.items[1].message)

    def test_invalid_dates_are_rejected(self):
        warnings = WarningLog()
        stream = jsonl(
            dict(self.good, id="M13", month=13),
            dict(self.good, id="D31", month=2, day=31),
            dict(self.good, id="NOYEAR", year=None),
        )
        self.assertEqual(parse_records(stream, warnings), [])
        self.assertEqual(len(warnings), 3)

    def test_empty_stream(self):
        self.assertEqual(parse_records(io.BytesIO(b"")), [])

    def test_serialized_records_parse_back(self):
        records = parse_records(jsonl(self.good, dict(self.good, id="A5", month=None, type="review")))
        again = parse_records(io.BytesIO(serialize_records(records)))
        self.assertEqual(again, records)

    def test_parsed_and_skipped_cover_every_nonempty_line(self):
        rng = np.random.default_rng(7)
        pool = [
            lambda i: dict(self.good, id=f"P{i % 6}"),
            lambda i: '{"id": "broken", ',
            lambda i: {"id": f"Q{i}", "journal": "Cell", "year": 2020, "type": "Article"},
            lambda i: dict(self.good, id=f"M{i}", month=0),
            lambda i: "",
            lambda i: "   ",
            lambda i: "[1, 2, 3]",
        ]
        for _ in range(100):
            lines = [pool[int(rng.integers(len(pool)))](i) for i in range(int(rng.integers(0, 25)))]
            warnings = WarningLog()
            records = parse_records(jsonl(*lines), warnings)
            nonempty = sum(1 for line in lines if not isinstance(line, str) or line.strip())
            self.assertEqual(len(records) + warnings.count("ingest"), nonempty)
            self.assertEqual(len({r.id for r in records}), len(records))


class TestPeriods(unittest.TestCase):
    """Tests for Period and DateBound"""

    def test_period_keys(self):
        self.assertEqual(Period(Granularity.YEAR, 1990).key, "1990")
        self.assertEqual(Period(Granularity.MONTH, 2020, 4).key, "2020-04")

    def test_invalid_periods(self):
        with self.assertRaises(ValueError):
            Period(Granularity.MONTH, 2020, 13)
        with self.assertRaises(ValueError):
            Period(Granularity.YEAR, 2020, 3)

    def test_parse(self):
        self.assertEqual(Period.parse("2020-04"), Period(Granularity.MONTH, 2020, 4))
        self.assertEqual(DateBound.parse("2005"), DateBound(2005))
        with self.assertRaises(ValueError):
            DateBound.parse("2020-13")
        with self.assertRaises(ValueError):
            DateBound.parse("twenty")

    def test_in_range_with_month_bounds(self):
        start, end = DateBound(2020, 4), DateBound(2020, 6)
        self.assertFalse(in_range(PubDate(2020, 3), start, end))
        self.assertTrue(in_range(PubDate(2020, 4), start, end))
        self.assertFalse(in_range(PubDate(2020, 7), start, end))
        # year-only records are compared by year alone
        self.assertTrue(in_range(PubDate(2020), start, end))


class TestFilterAndBucket(unittest.TestCase):
    """Tests for filter_doc_types and bucket_by_period"""

    def setUp(self):
        self.refs = (
            ReferenceRecord("R1", "Nature", 2010, DocType.ARTICLE),
            ReferenceRecord("R2", "Nature", 2011, DocType.OTHER),
            ReferenceRecord("R3", "Cell", 2012, DocType.REVIEW),
        )
        self.records = [
            make_record("A", 2021, 5, refs=self.refs),
            make_record("B", 2019, 1, doc_type=DocType.REVIEW),
            make_record("C", 2020, doc_type=DocType.OTHER),
            make_record("D", 2020),
            make_record("E", 1850, 2),
        ]

    def test_filter_doc_types(self):
        kept = filter_doc_types(self.records, {DocType.ARTICLE, DocType.REVIEW})
        self.assertEqual([r.id for r in kept], ["A", "B", "D", "E"])
        self.assertEqual([ref.ref_id for ref in kept[0].references], ["R1", "R3"])

    def test_filter_keeps_references_when_disabled(self):
        kept = filter_doc_types(self.records, {DocType.ARTICLE}, filter_reference_types=False)
        self.assertEqual(kept[0].reference_count, 3)

    def test_filter_requires_allowed_types(self):
        with self.assertRaises(ValueError):
            filter_doc_types(self.records, set())

    def random_records(self, rng, count):
        types = list(DocType)
        records = []
        for i in range(count):
            refs = tuple(
                ReferenceRecord(f"R{i}-{j}", "Nature", 2010, types[int(rng.integers(len(types)))])
                for j in range(int(rng.integers(0, 5)))
            )
            month = None if rng.random() < 0.3 else int(rng.integers(1, 13))
            records.append(make_record(f"X{i}", int(rng.integers(2017, 2022)), month,
                                       doc_type=types[int(rng.integers(len(types)))], refs=refs))
        return records

    def test_filter_is_idempotent_and_commutes_with_buckets(self):
        rng = np.random.default_rng(31)
        allowed_sets = [{DocType.ARTICLE}, {DocType.ARTICLE, DocType.REVIEW}, {DocType.OTHER}]
        for trial in range(60):
            records = self.random_records(rng, int(rng.integers(0, 30)))
            allowed = allowed_sets[trial % len(allowed_sets)]
            once = filter_doc_types(records, allowed)
            self.assertEqual(filter_doc_types(once, allowed), once)

            for granularity in Granularity:
                filtered_first = bucket_by_period(once, granularity)
                bucketed_first = {
                    period: filter_doc_types(members, allowed)
                    for period, members in bucket_by_period(records, granularity).items()
                }
                bucketed_first = {period: members for period, members in bucketed_first.items() if members}
                self.assertEqual(filtered_first, bucketed_first)

    def test_yearly_buckets_are_chronological(self):
        warnings = WarningLog()
        buckets = bucket_by_period(self.records, Granularity.YEAR, warnings=warnings)
        self.assertEqual([p.key for p in buckets], ["2019", "2020", "2021"])
        self.assertEqual([r.id for r in buckets[Period(Granularity.YEAR, 2020)]], ["C", "D"])
        self.assertEqual(warnings.count("bucket"), 1)

    def test_month_granularity_excludes_year_only_records(self):
        warnings = WarningLog()
        buckets = bucket_by_period(self.records, Granularity.MONTH, warnings=warnings)
        self.assertEqual([p.key for p in buckets], ["2019-01", "2021-05"])
        self.assertEqual(warnings.count("bucket"), 3)

    def test_month_granularity_january_policy(self):
        buckets = bucket_by_period(
            self.records, Granularity.MONTH, missing_month_policy=MissingMonthPolicy.JANUARY
        )
        self.assertEqual([p.key for p in buckets], ["2019-01", "2020-01", "2021-05"])
        self.assertEqual(len(buckets[Period(Granularity.MONTH, 2020, 1)]), 2)

    def test_explicit_range(self):
        buckets = bucket_by_period(self.records, Granularity.YEAR, DateBound(2020), DateBound(2020))
        self.assertEqual([p.key for p in buckets], ["2020"])


if __name__ == "__main__":
    unittest.main()
