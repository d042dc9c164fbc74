"""Discipline co-occurrence graphs, communities and cross-period streams.

Nodes are discipline codes. A paper adds 1 to every pair of disciplines in the
union of its identified references' discipline sets (set semantics), and 1 to
each member's occurrence count.
"""

from __future__ import annotations

import itertools
import logging
from collections import Counter
from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Iterable, Mapping, Optional, Sequence

import networkx as nx
import numpy as np

from Corpus.corpus_model import Period
from Journals.discipline_mapper import DISCIPLINE_INDEX, Discipline, DisciplineAssignment

log = logging.getLogger(__name__)

DEFAULT_OVERLAP_THRESHOLD = 0.5


def _code_order(code: str) -> int:
    discipline = Discipline.from_code(code)
    return DISCIPLINE_INDEX[discipline] if discipline is not None else len(DISCIPLINE_INDEX)


@dataclass(frozen=True)
class CooccurrenceGraph:
    """Frozen networkx graph: node attr ``count``, edge attr ``weight``."""

    period: Optional[Period]
    graph: nx.Graph

    @classmethod
    def from_counts(
        cls,
        period: Optional[Period],
        node_counts: Mapping[str, int],
        edge_weights: Mapping[tuple[str, str], int],
    ) -> "CooccurrenceGraph":
        graph = nx.Graph()
        for code in sorted(node_counts, key=_code_order):
            graph.add_node(code, code=code, count=int(node_counts[code]))
        for a, b in sorted(edge_weights, key=lambda pair: (_code_order(pair[0]), _code_order(pair[1]))):
            weight = int(edge_weights[(a, b)])
            if a == b:
                raise ValueError(f"self-loop on {a}")
            if weight <= 0:
                continue
            if a not in graph or b not in graph:
                raise ValueError(f"edge {a}-{b} references an unknown node")
            graph.add_edge(a, b, weight=weight)
        return cls(period=period, graph=nx.freeze(graph))

    @property
    def node_counts(self) -> dict[str, int]:
        return {code: data["count"] for code, data in self.graph.nodes(data=True)}

    def edge_weight(self, a: str, b: str) -> int:
        data = self.graph.get_edge_data(a, b)
        return int(data["weight"]) if data else 0

    def edges(self) -> dict[tuple[str, str], int]:
        result = {}
        for a, b, data in self.graph.edges(data=True):
            pair = tuple(sorted((a, b), key=_code_order))
            result[pair] = int(data["weight"])
        return result

    def top_nodes(self, limit: int) -> "CooccurrenceGraph":
        """Keep the ``limit`` most frequent nodes (ties by enumeration order)."""
        if limit >= self.graph.number_of_nodes():
            return self
        ranked = sorted(self.node_counts.items(), key=lambda item: (-item[1], _code_order(item[0])))
        keep = {code for code, _ in ranked[:limit]}
        counts = {code: count for code, count in self.node_counts.items() if code in keep}
        edges = {pair: w for pair, w in self.edges().items() if pair[0] in keep and pair[1] in keep}
        return CooccurrenceGraph.from_counts(self.period, counts, edges)


@dataclass(frozen=True)
class Partition:
    assignment: Mapping[str, int]
    modularity: float
    seed: int
    resolution: float
    level_modularities: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "assignment", MappingProxyType(dict(self.assignment)))

    def communities(self) -> dict[int, tuple[str, ...]]:
        members: dict[int, list[str]] = {}
        for code, community in self.assignment.items():
            members.setdefault(community, []).append(code)
        return {cid: tuple(sorted(codes, key=_code_order)) for cid, codes in sorted(members.items())}


def build_cooccurrence(papers: Iterable[DisciplineAssignment], period: Optional[Period] = None) -> CooccurrenceGraph:
    node_counts: Counter = Counter()
    edge_weights: Counter = Counter()
    for assignment in papers:
        members = sorted((d.value for d in assignment.discipline_union()), key=_code_order)
        node_counts.update(members)
        edge_weights.update(itertools.combinations(members, 2))
    return CooccurrenceGraph.from_counts(period, node_counts, edge_weights)


def similarity_matrix(g: CooccurrenceGraph) -> tuple[list[str], np.ndarray]:
    """Cosine similarity between adjacency rows, node counts on the diagonal."""
    nodes = list(g.graph.nodes())
    if not nodes:
        return nodes, np.zeros((0, 0))
    A = nx.to_numpy_array(g.graph, nodelist=nodes, weight="weight", dtype=float)
    np.fill_diagonal(A, [g.graph.nodes[code]["count"] for code in nodes])
    norms = np.sqrt(np.sum(A * A, axis=1))
    norms[norms == 0] = 1.0
    S = np.clip((A @ A.T) / np.outer(norms, norms), 0.0, 1.0)
    return nodes, S


def edge_similarity(g: CooccurrenceGraph) -> nx.Graph:
    """Copy of the graph with each edge carrying ``similarity`` in [0, 1]."""
    if g.graph.number_of_nodes() == 0:
        raise ValueError("edge_similarity needs a nonempty graph")
    nodes, S = similarity_matrix(g)
    position = {code: i for i, code in enumerate(nodes)}
    weighted = nx.Graph()
    weighted.add_nodes_from(g.graph.nodes(data=True))
    for a, b, data in g.graph.edges(data=True):
        similarity = float(S[position[a], position[b]])
        if similarity <= 0:
            continue
        weighted.add_edge(a, b, weight=data["weight"], similarity=similarity)
    return nx.freeze(weighted)


def detect_communities(
    g: nx.Graph,
    seed: int = 42,
    resolution: float = 1.0,
    weight: str = "weight",
) -> Partition:
    """Louvain modularity optimisation with a seeded node visit order.

    Community ids are renumbered so that id 0 holds the member earliest in
    the discipline enumeration. Equal modularity gains are resolved by
    networkx in its seeded visit order, not by lowest community id.
    """
    if g.number_of_nodes() == 0:
        raise ValueError("detect_communities needs at least one node")
    if resolution <= 0:
        raise ValueError("resolution must be positive")

    ordered_nodes = sorted(g.nodes(), key=lambda node: (_code_order(str(node)), str(node)))
    if g.size(weight=weight) <= 0:
        return Partition({node: i for i, node in enumerate(ordered_nodes)}, 0.0, seed, resolution, (0.0,))

    levels = list(nx.community.louvain_partitions(g, weight=weight, resolution=resolution, seed=seed))
    level_q = tuple(
        float(nx.community.modularity(g, level, weight=weight, resolution=resolution)) for level in levels
    )
    final = levels[-1]
    rank = {node: i for i, node in enumerate(ordered_nodes)}
    communities = sorted((sorted(c, key=rank.__getitem__) for c in final), key=lambda c: rank[c[0]])
    assignment = {node: cid for cid, members in enumerate(communities) for node in members}
    return Partition(assignment, level_q[-1], seed, resolution, level_q)


def label_community(members: Sequence[str], g: CooccurrenceGraph) -> str:
    """Heaviest intra-community edge as ``A&B``; a singleton is its own code.

    A unique heaviest edge puts the more frequent discipline first
    (alphabetical on equal counts). Tied heaviest edges give the
    alphabetically first pair, written in alphabetical order.
    """
    members = list(members)
    if not members:
        raise ValueError("cannot label an empty community")
    counts = g.node_counts
    best: Optional[tuple[int, tuple[str, str]]] = None
    tied = False
    for a, b in itertools.combinations(sorted(members), 2):
        w = g.edge_weight(a, b)
        if w <= 0:
            continue
        if best is None or w > best[0]:
            best, tied = (w, (a, b)), False
        elif w == best[0]:
            tied = True
    if best is None:
        # no internal edge: most frequent member
        return min(members, key=lambda code: (-counts.get(code, 0), code))
    a, b = best[1]
    if tied:
        return f"{a}&{b}"
    first, second = sorted((a, b), key=lambda code: (-counts.get(code, 0), code))
    return f"{first}&{second}"


# ---------------------------------------------------------------------------
# Streams
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class StreamNode:
    period: str
    community: int
    label: str
    size: int
    members: tuple = ()

    @property
    def node_id(self) -> str:
        return f"{self.period}:c{self.community}"


@dataclass(frozen=True)
class StreamEdge:
    source: str
    target: str
    weight: int
    overlap: float


@dataclass(frozen=True)
class StreamEvent:
    kind: str  # split, merge, birth, death
    node_id: str


@dataclass(frozen=True)
class StreamGraph:
    nodes: tuple = field(default_factory=tuple)
    edges: tuple = field(default_factory=tuple)
    events: tuple = field(default_factory=tuple)

    def events_of(self, kind: str) -> list[StreamEvent]:
        return [event for event in self.events if event.kind == kind]


def _stream_nodes(period: Period, partition: Partition, g: CooccurrenceGraph) -> list[tuple[StreamNode, dict[str, int]]]:
    counts = g.node_counts
    result = []
    for cid, members in partition.communities().items():
        member_counts = {code: counts.get(code, 0) for code in members}
        node = StreamNode(
            period=period.key,
            community=cid,
            label=label_community(members, g),
            size=sum(member_counts.values()),
            members=members,
        )
        result.append((node, member_counts))
    return result


def community_overlap(a: Mapping[str, int], b: Mapping[str, int]) -> tuple[int, float]:
    """Shared occurrence mass and its share of the smaller community."""
    shared = sum(min(a[code], b[code]) for code in a.keys() & b.keys())
    smaller = min(sum(a.values()), sum(b.values()))
    return shared, (shared / smaller if smaller else 0.0)


def align_streams(
    partitions: Sequence[tuple[Period, Partition, CooccurrenceGraph]],
    overlap_threshold: float = DEFAULT_OVERLAP_THRESHOLD,
    breaks: Iterable[int] = (),
) -> StreamGraph:
    """Link communities of adjacent periods whose normalised overlap reaches the threshold.

    ``breaks`` lists indices i such that periods i-1 and i lie in different
    segments and are never linked.
    """
    if not 0.0 <= overlap_threshold <= 1.0:
        raise ValueError("overlap_threshold must lie in [0, 1]")
    breaks = set(breaks)
    slices = [_stream_nodes(period, partition, g) for period, partition, g in partitions]

    nodes = [node for layer in slices for node, _ in layer]
    edges: list[StreamEdge] = []
    out_degree: Counter = Counter()
    in_degree: Counter = Counter()
    for i in range(1, len(slices)):
        if i in breaks:
            continue
        for left, left_counts in slices[i - 1]:
            for right, right_counts in slices[i]:
                shared, overlap = community_overlap(left_counts, right_counts)
                if shared > 0 and overlap >= overlap_threshold:
                    edges.append(StreamEdge(left.node_id, right.node_id, shared, overlap))
                    out_degree[left.node_id] += 1
                    in_degree[right.node_id] += 1

    events: list[StreamEvent] = []
    last = len(slices) - 1
    for i, layer in enumerate(slices):
        has_previous = i > 0 and i not in breaks
        has_next = i < last and (i + 1) not in breaks
        for node, _ in layer:
            if has_next and out_degree[node.node_id] >= 2:
                events.append(StreamEvent("split", node.node_id))
            if has_previous and in_degree[node.node_id] >= 2:
                events.append(StreamEvent("merge", node.node_id))
            if has_previous and in_degree[node.node_id] == 0:
                events.append(StreamEvent("birth", node.node_id))
            if has_next and out_degree[node.node_id] == 0:
                events.append(StreamEvent("death", node.node_id))

    log.info("Aligned %d periods: %d communities, %d links", len(slices), len(nodes), len(edges))
    return StreamGraph(nodes=tuple(nodes), edges=tuple(edges), events=tuple(events))


def segment_breaks(periods: Sequence[Period], segments: Sequence[tuple[int, int]]) -> list[int]:
    """Indices where consecutive periods fall into different year segments."""
    if not segments:
        return []

    def segment_of(period: Period) -> Optional[int]:
        for index, (start, end) in enumerate(segments):
            if start <= period.year <= end:
                return index
        return None

    found = []
    for i in range(1, len(periods)):
        if segment_of(periods[i - 1]) != segment_of(periods[i]):
            found.append(i)
    return found
