"""Byte-deterministic exports of stream graphs and per-period networks."""

from __future__ import annotations

import json
from enum import Enum
from pathlib import Path
from typing import Optional

import networkx as nx

from Network.cooccurrence_network import CooccurrenceGraph, Partition, StreamGraph
from run_report import atomic_write_bytes


class StreamFormat(Enum):
    SANKEY_JSON = "sankey-json"
    GRAPHML = "graphml"
    DOT = "dot"

    @property
    def file_name(self) -> str:
        return {
            StreamFormat.SANKEY_JSON: "streams.json",
            StreamFormat.GRAPHML: "streams.graphml",
            StreamFormat.DOT: "streams.dot",
        }[self]


def _sankey(s: StreamGraph) -> bytes:
    document = {
        "nodes": [
            {"id": n.node_id, "period": n.period, "community": n.community, "label": n.label, "size": n.size}
            for n in s.nodes
        ],
        "links": [
            {"source": e.source, "target": e.target, "weight": e.weight, "overlap": round(e.overlap, 6)}
            for e in s.edges
        ],
        "events": [{"kind": ev.kind, "node": ev.node_id} for ev in s.events],
    }
    return (json.dumps(document, indent=2, sort_keys=True, ensure_ascii=False) + "\n").encode("utf-8")


def stream_digraph(s: StreamGraph) -> nx.DiGraph:
    graph = nx.DiGraph()
    for n in s.nodes:
        graph.add_node(n.node_id, period=n.period, community=n.community, label=n.label, size=n.size,
                       members=";".join(n.members))
    for e in s.edges:
        graph.add_edge(e.source, e.target, weight=e.weight, overlap=round(e.overlap, 6))
    return graph


def _graphml(graph: nx.Graph) -> bytes:
    return ("\n".join(nx.generate_graphml(graph)) + "\n").encode("utf-8")


def _dot_quote(value) -> str:
    return '"' + str(value).replace("\\", "\\\\").replace('"', '\\"') + '"'


def _dot(s: StreamGraph) -> bytes:
    lines = ["digraph streams {", "  rankdir=LR;"]
    by_period: dict[str, list] = {}
    for n in s.nodes:
        by_period.setdefault(n.period, []).append(n)
    for period, members in by_period.items():
        lines.append(f"  subgraph {_dot_quote('cluster_' + period)} {{")
        lines.append(f"    label={_dot_quote(period)};")
        for n in members:
            lines.append(
                f"    {_dot_quote(n.node_id)} [label={_dot_quote(n.label)}, size={n.size}, community={n.community}];"
            )
        lines.append("  }")
    for e in s.edges:
        lines.append(
            f"  {_dot_quote(e.source)} -> {_dot_quote(e.target)} [weight={e.weight}, overlap={e.overlap:.6f}];"
        )
    lines.append("}")
    return ("\n".join(lines) + "\n").encode("utf-8")


def render_streams(s: StreamGraph, fmt: StreamFormat | str) -> bytes:
    fmt = StreamFormat(fmt)  # unknown names raise ValueError
    if fmt is StreamFormat.SANKEY_JSON:
        return _sankey(s)
    if fmt is StreamFormat.GRAPHML:
        return _graphml(stream_digraph(s))
    return _dot(s)


def render_period_graph(
    g: CooccurrenceGraph,
    similarity: Optional[nx.Graph] = None,
    partition: Optional[Partition] = None,
) -> bytes:
    """GraphML of one period: node code/count/community, edge weight/similarity."""
    graph = nx.Graph()
    for code, data in g.graph.nodes(data=True):
        attrs = {"code": code, "count": int(data["count"])}
        if partition is not None:
            attrs["community"] = int(partition.assignment[code])
        graph.add_node(code, **attrs)
    for a, b, data in g.graph.edges(data=True):
        attrs = {"weight": int(data["weight"])}
        if similarity is not None and similarity.has_edge(a, b):
            attrs["similarity"] = round(float(similarity[a][b]["similarity"]), 6)
        graph.add_edge(a, b, **attrs)
    return _graphml(graph)


def export_streams(s: StreamGraph, fmt: StreamFormat | str, path) -> Path:
    """Render and write atomically; returns the written path."""
    data = render_streams(s, fmt)
    atomic_write_bytes(path, data)
    return Path(path)
