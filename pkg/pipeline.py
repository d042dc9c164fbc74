"""
Stage orchestration shared by the command-line subcommands.

Each stage is computed at most once per run and cached on the
:class:`Pipeline`. Subcommands share intermediate artifacts through the output
directory: a ``qualified_ids.csv`` left by an earlier ``qualify`` run is reused
by the downstream subcommands.
"""
import logging
from functools import cached_property
from typing import Dict, List, Optional, Tuple

import networkx as nx
import pandas as pd

from config import RunConfig
from Corpus.corpus_model import (
    Period,
    PublicationRecord,
    bucket_by_period,
    filter_doc_types,
    load_records,
    serialize_records,
)
from Corpus.qualifier import (
    CorpusStage,
    CorpusStats,
    QualificationResult,
    StageName,
    corpus_stats,
    keyword_subset,
    qualify,
)
from errors import DataError, InputFormatError, MetricDomainError
from Journals.discipline_mapper import (
    DisciplineAssignment,
    DisciplineCatalog,
    assign,
    discipline_distribution,
    discipline_vector,
    format_codes,
    load_catalog,
    subject_area_distribution,
)
from Journals.journal_normalizer import EMPTY_ABBREV_MAP, AbbrevMap, load_abbreviation_map
from Metrics.diversity_metrics import (
    DisparityBasis,
    DisparityMatrix,
    MetricSeries,
    aggregate_series,
    build_disparity_basis,
    disparity_matrix,
    score_paper,
    scores_frame,
)
from Network.cooccurrence_network import (
    CooccurrenceGraph,
    Partition,
    StreamGraph,
    align_streams,
    build_cooccurrence,
    detect_communities,
    edge_similarity,
    label_community,
    segment_breaks,
)
from Network.stream_export import render_period_graph, render_streams
from run_log import WarningLog
from run_report import OutputWriter, StageTimer

log = logging.getLogger(__name__)

Pair = Tuple[PublicationRecord, DisciplineAssignment]

COMMANDS = ("ingest", "qualify", "disparity", "metrics", "cooccur", "streams", "report", "all")
ALL_STEPS = ("ingest", "qualify", "disparity", "metrics", "cooccur", "streams")

RECORDS_FILE = "records.jsonl"
ASSIGNMENTS_FILE = "assignments.csv"
QUALIFIED_IDS_FILE = "qualified_ids.csv"
REJECTIONS_FILE = "rejections.csv"
CORPUS_STATS_FILE = "corpus_stats.csv"
DISCIPLINE_DISTRIBUTION_FILE = "discipline_distribution.csv"
SUBJECT_AREA_FILE = "subject_area_distribution.csv"
DISPARITY_FILE = "disparity_matrix.csv"
PAPER_SCORES_FILE = "paper_scores.csv"
SERIES_FILE = "metric_series.csv"
PARTITIONS_FILE = "partitions.csv"


class Pipeline:
    """Lazily computed stages for one run configuration."""

    def __init__(
        self,
        config: RunConfig,
        warnings: Optional[WarningLog] = None,
        timer: Optional[StageTimer] = None,
        writer: Optional[OutputWriter] = None,
    ):
        self.config = config
        self.warnings = warnings if warnings is not None else WarningLog()
        self.timer = timer if timer is not None else StageTimer()
        self.writer = writer if writer is not None else OutputWriter(config.out_dir)
        self._reuse_qualified = False

    # ── Inputs ─────────────────────────────────────────────────────────────

    @cached_property
    def records(self) -> List[PublicationRecord]:
        with self.timer.stage("ingest"):
            return load_records(self.config.records_path, self.warnings)

    @cached_property
    def catalog(self) -> DisciplineCatalog:
        with self.timer.stage("catalog"):
            return load_catalog(self.config.catalog_path, self.config.delimiter, self.warnings)

    @cached_property
    def abbrev_map(self) -> AbbrevMap:
        if self.config.abbrev_map_path is None:
            return EMPTY_ABBREV_MAP
        with self.timer.stage("abbreviations"):
            return load_abbreviation_map(self.config.abbrev_map_path, self.config.delimiter, self.warnings)

    # ── Corpus stages ──────────────────────────────────────────────────────

    @cached_property
    def typed_records(self) -> List[PublicationRecord]:
        """Raw stage: records of an allowed type, references filtered alike when configured."""
        return filter_doc_types(
            self.records, self.config.policy.allowed_types, self.config.filter_reference_types
        )

    @cached_property
    def assignments(self) -> List[Pair]:
        """Every parsed record with its discipline assignment, in input order."""
        typed = {record.id: record for record in self.typed_records}
        catalog, abbrev_map = self.catalog, self.abbrev_map
        with self.timer.stage("assign"):
            pairs = []
            for record in self.records:
                record = typed.get(record.id, record)
                pairs.append((record, assign(record, catalog, abbrev_map)))
        return pairs

    @cached_property
    def identifiable(self) -> List[Pair]:
        typed_ids = {record.id for record in self.typed_records}
        return [(r, a) for r, a in self.assignments if r.id in typed_ids and a.citing_identified]

    @cached_property
    def qualification(self) -> QualificationResult:
        """Qualify afresh, or rebuild the result from a previous ``qualified_ids.csv``."""
        if self._reuse_qualified and self.writer.path(QUALIFIED_IDS_FILE).is_file():
            return self._load_qualified_ids()
        with self.timer.stage("qualify"):
            return qualify(self.assignments, self.config.policy, require_identified=True)

    def _load_qualified_ids(self) -> QualificationResult:
        path = self.writer.path(QUALIFIED_IDS_FILE)
        try:
            frame = pd.read_csv(path, dtype=str, keep_default_na=False)
        except pd.errors.EmptyDataError as e:
            raise InputFormatError(f"{path}: file is empty") from e
        if "paper_id" not in frame.columns:
            raise InputFormatError(f"{path}: expected a 'paper_id' column")
        wanted = set(frame["paper_id"])
        pairs = [(r, a) for r, a in self.assignments if r.id in wanted]
        missing = len(wanted) - len(pairs)
        if missing:
            self.warnings.warn("qualify", f"{missing} ids in {QUALIFIED_IDS_FILE} are not in the record file")
        log.info("Reusing %d qualified ids from %s", len(pairs), path)
        return QualificationResult(qualified=pairs, rejected=[])

    @property
    def qualified(self) -> List[Pair]:
        return self.qualification.qualified

    @cached_property
    def keyword_pairs(self) -> Optional[List[Pair]]:
        """Keyword subset of the qualified set, or None without query terms."""
        if not self.config.query_terms:
            return None
        by_id = {r.id: (r, a) for r, a in self.qualified}
        records = keyword_subset([r for r, _ in self.qualified], self.config.query_terms)
        if self.config.query_year is not None:
            records = [r for r in records if r.pub_date.year == self.config.query_year]
        return [by_id[r.id] for r in records]

    @cached_property
    def analysis_pairs(self) -> List[Pair]:
        """The corpus the metrics and networks run on."""
        pairs = self.keyword_pairs if self.keyword_pairs is not None else self.qualified
        if not pairs:
            scope = "keyword subset" if self.keyword_pairs is not None else "qualified corpus"
            raise DataError(f"The {scope} is empty; nothing to analyse")
        return pairs

    @cached_property
    def periods(self) -> Dict[Period, List[Pair]]:
        by_id = {r.id: (r, a) for r, a in self.analysis_pairs}
        buckets = bucket_by_period(
            [r for r, _ in self.analysis_pairs],
            self.config.granularity,
            self.config.date_from,
            self.config.date_to,
            self.config.missing_month_policy,
            self.warnings,
        )
        if not buckets:
            raise DataError(
                f"No analysed record falls within {self.config.date_from}..{self.config.date_to}"
            )
        return {period: [by_id[r.id] for r in records] for period, records in buckets.items()}

    @cached_property
    def stats(self) -> CorpusStats:
        stages = [
            CorpusStage(StageName.RAW.value, self.typed_records),
            CorpusStage(StageName.IDENTIFIABLE.value, [r for r, _ in self.identifiable]),
            CorpusStage(StageName.QUALIFIED.value, [r for r, _ in self.qualified]),
        ]
        if self.keyword_pairs is not None:
            stages.append(CorpusStage(StageName.KEYWORD.value, [r for r, _ in self.keyword_pairs]))
        return corpus_stats(stages, self.qualification.rejection_tally())

    # ── Metrics ────────────────────────────────────────────────────────────

    @cached_property
    def disparity(self) -> Dict[Optional[Period], DisparityMatrix]:
        """One matrix keyed by None (global basis) or one per period."""
        with self.timer.stage("disparity"):
            if self.config.disparity_basis is DisparityBasis.GLOBAL:
                basis = build_disparity_basis(a for _, a in self.analysis_pairs)
                return {None: disparity_matrix(basis, provenance="global", warnings=self.warnings)}
            return {
                period: disparity_matrix(
                    build_disparity_basis(a for _, a in pairs),
                    provenance=f"window {period.key}",
                    warnings=self.warnings,
                )
                for period, pairs in self.periods.items()
            }

    def matrix_for(self, period: Period) -> DisparityMatrix:
        if None in self.disparity:
            return self.disparity[None]
        return self.disparity[period]

    @cached_property
    def scores(self) -> list:
        scored = []
        with self.timer.stage("metrics"):
            for period, pairs in self.periods.items():
                D = self.matrix_for(period)
                for record, assignment in pairs:
                    vector = discipline_vector(assignment)
                    if vector.total == 0:
                        self.warnings.warn("metrics", f"paper '{record.id}' has no identified reference; skipped")
                        continue
                    try:
                        scored.append((period, score_paper(record.id, vector, D, self.config.td_mode)))
                    except MetricDomainError as e:
                        self.warnings.warn("metrics", f"paper '{record.id}' skipped: {e}")
        return scored

    @cached_property
    def series(self) -> MetricSeries:
        return aggregate_series(self.scores, self.warnings)

    # ── Networks ───────────────────────────────────────────────────────────

    @cached_property
    def partitions(self) -> List[Tuple[Period, Partition, CooccurrenceGraph, nx.Graph]]:
        """(period, partition, graph, similarity graph) for every period with nodes."""
        results = []
        with self.timer.stage("cooccur"):
            for period, pairs in self.periods.items():
                graph = build_cooccurrence((a for _, a in pairs), period)
                graph = graph.top_nodes(self.config.max_nodes_per_period)
                if graph.graph.number_of_nodes() == 0:
                    self.warnings.warn("cooccur", f"period {period.key} has no identified discipline; skipped")
                    continue
                similarity = edge_similarity(graph)
                partition = detect_communities(
                    similarity, seed=self.config.seed, resolution=self.config.resolution, weight="similarity"
                )
                log.info("Period %s: %d communities, Q=%.4f", period.key,
                         len(partition.communities()), partition.modularity)
                results.append((period, partition, graph, similarity))
        return results

    @cached_property
    def streams(self) -> StreamGraph:
        with self.timer.stage("streams"):
            partitions = [(period, partition, graph) for period, partition, graph, _ in self.partitions]
            breaks = segment_breaks([p for p, _, _ in partitions], self.config.segments)
            return align_streams(partitions, self.config.overlap_threshold, breaks)

    # ── Subcommands ────────────────────────────────────────────────────────

    def run(self, command: str) -> None:
        if command not in COMMANDS:
            raise ValueError(f"Unknown command '{command}'")
        self._reuse_qualified = command not in ("qualify", "all")
        steps = ALL_STEPS if command == "all" else (command,)
        for step in steps:
            log.info("Running %s", step)
            getattr(self, f"run_{step}")()

    def run_ingest(self) -> None:
        self.writer.write_bytes(RECORDS_FILE, serialize_records(self.records))
        rows = []
        for record, assignment in self.assignments:
            vector = discipline_vector(assignment)
            rows.append({
                "paper_id": record.id,
                "citing_disciplines": format_codes(assignment.citing_disciplines),
                "references": assignment.reference_count,
                "identified": assignment.identified_count,
                "coverage": assignment.coverage,
                "reference_disciplines": ";".join(f"{d.value}:{c}" for d, c in vector.counts.items()),
            })
        columns = ["paper_id", "citing_disciplines", "references", "identified", "coverage",
                   "reference_disciplines"]
        self.writer.write_table(ASSIGNMENTS_FILE, pd.DataFrame(rows, columns=columns))

    def run_qualify(self) -> None:
        result = self.qualification
        self.writer.write_table(
            QUALIFIED_IDS_FILE, pd.DataFrame({"paper_id": [r.id for r, _ in result.qualified]}, dtype=str)
        )
        self.writer.write_table(REJECTIONS_FILE, pd.DataFrame(
            [{"paper_id": item.record.id, "reason": item.reason.value} for item in result.rejected],
            columns=["paper_id", "reason"],
        ))
        self.writer.write_table(CORPUS_STATS_FILE, self.stats.to_frame())
        distribution = discipline_distribution(a for _, a in result.qualified)
        self.writer.write_table(DISCIPLINE_DISTRIBUTION_FILE, distribution)
        self.writer.write_table(SUBJECT_AREA_FILE, subject_area_distribution(distribution))
        if not result.qualified:
            raise DataError("No record passed qualification")

    def run_disparity(self) -> None:
        for period, matrix in self.disparity.items():
            name = DISPARITY_FILE if period is None else f"disparity_{period.key}.csv"
            self.writer.write_table(name, matrix.to_frame(), index=True)

    def run_metrics(self) -> None:
        self.writer.write_table(PAPER_SCORES_FILE, scores_frame(self.scores))
        self.writer.write_table(SERIES_FILE, self.series.to_frame())

    def run_cooccur(self) -> None:
        rows = []
        for period, partition, graph, similarity in self.partitions:
            for cid, members in partition.communities().items():
                label = label_community(members, graph)
                for code in members:
                    rows.append({"period": period.key, "code": code, "community": cid,
                                 "label": label, "modularity": partition.modularity})
            self.writer.write_bytes(
                f"cooccurrence_{period.key}.graphml", render_period_graph(graph, similarity, partition)
            )
        self.writer.write_table(PARTITIONS_FILE, pd.DataFrame(
            rows, columns=["period", "code", "community", "label", "modularity"]
        ))

    def run_streams(self) -> None:
        for fmt in self.config.stream_formats:
            self.writer.write_bytes(fmt.file_name, render_streams(self.streams, fmt))

    def run_report(self) -> None:
        # the report itself is written by the caller once the command ends
        log.info("Corpus stages: %s", self.stats.to_dict())
