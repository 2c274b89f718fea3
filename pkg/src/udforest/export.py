"""Forest export: encoder graphs, graph JSONL and Graphviz DOT."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .codemix import CodeMixedForest, Origin
from .encoder import Embedder, ForestGraph


def graph_edges(forest: CodeMixedForest) -> list[tuple[int, int]]:
    """(parent, child) pairs over content nodes, 0-based in forest id order.

    Links to ROOT are dropped, so a forest whose ROOT has k children yields
    ``size - k`` edges.
    """
    return [(n.parent - 1, n.id - 1) for n in forest.nodes[1:] if n.parent != 0]


def to_graph(forest: CodeMixedForest, embedder: Embedder) -> ForestGraph:
    n = forest.size
    adj = np.zeros((n, n), dtype=bool)
    for p, c in graph_edges(forest):
        adj[p, c] = adj[c, p] = True
    forms = [node.form for node in forest.nodes[1:]]
    if forms:
        emb = np.stack([np.asarray(embedder(f), dtype=np.float64) for f in forms])
    else:
        emb = np.zeros((0, 0))
    return ForestGraph(adj, emb)


def graph_record(forest: CodeMixedForest) -> dict:
    return {
        "sent_id": forest.sent_id,
        "n": forest.size,
        "edges": [[p, c] for p, c in graph_edges(forest)],
        "forms": [node.form for node in forest.nodes[1:]],
    }


def graph_from_record(record: dict, embedder: Embedder) -> ForestGraph:
    n = record["n"]
    adj = np.zeros((n, n), dtype=bool)
    for p, c in record["edges"]:
        adj[p, c] = adj[c, p] = True
    return ForestGraph(adj, np.stack([embedder(f) for f in record["forms"]]))


def _default_colors() -> dict[Origin, str]:
    return {Origin.ROOT: "black", Origin.MERGED: "darkorange",
            Origin.SRC_COPY: "royalblue", Origin.TGT_COPY: "forestgreen"}


@dataclass(frozen=True)
class DotStyle:
    colors: dict[Origin, str] = field(default_factory=_default_colors)
    edge_labels: bool = True

    def __post_init__(self):
        missing = [o.value for o in Origin if o not in self.colors]
        if missing:
            raise ValueError(f"no color for origin(s) {', '.join(missing)}")


def _quote(s: str) -> str:
    return '"' + s.replace("\\", "\\\\").replace('"', '\\"').replace("\n", "\\n") + '"'


def to_dot(forest: CodeMixedForest, style: DotStyle | None = None) -> str:
    style = style or DotStyle()
    lines = [f"digraph {_quote(forest.sent_id)} {{", "  node [shape=box];"]
    for node in forest.nodes:
        label = node.form if node.origin is Origin.ROOT else f"{node.form} ({node.deprel})"
        lines.append(f"  n{node.id} [label={_quote(label)}, color={_quote(style.colors[node.origin])}];")
    for node in forest.nodes[1:]:
        attrs = f" [label={_quote(node.deprel)}]" if style.edge_labels else ""
        lines.append(f"  n{node.parent} -> n{node.id}{attrs};")
    lines.append("}")
    return "\n".join(lines) + "\n"
