"""Cross-lingual UD bias diagnostics, subject/object distances and merge statistics.

Per-sentence functions are pure. Corpus aggregation goes through small
accumulators holding integer counts, so shards processed in parallel can be
combined with ``merge`` without changing the result.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, fields
from typing import Iterable, Optional

from .alignment import AlignmentMatrix, align_search
from .codemix import CodeMixedForest, ProjectionError, RelationInstance, project_relation
from .treebank import ROOT, UDTree


def coarse(label: str) -> str:
    return label.split(":", 1)[0]


# ---------------------------------------------------------------------------
# per-sentence measures

def misaligned_counts(src: UDTree, tgt: UDTree, m: AlignmentMatrix, theta: float) -> tuple[int, int]:
    """(tokens untouched by any alignment above theta, total tokens)."""
    links = m.above(theta)
    src_hit = {i for i, _, _ in links if i <= len(src)}
    tgt_hit = {j for _, j, _ in links if j <= len(tgt)}
    total = len(src) + len(tgt)
    return total - len(src_hit) - len(tgt_hit), total


def misaligned_word_rate(src: UDTree, tgt: UDTree, m: AlignmentMatrix, theta: float) -> float:
    bad, total = misaligned_counts(src, tgt, m, theta)
    return bad / total


def sentence_alignment(src: UDTree, tgt: UDTree, m: AlignmentMatrix, theta: float) -> dict[int, int]:
    """Whole-sentence one-to-one SRC->TGT map, resolved greedily."""
    aligned, _ = align_search(src.tokens, tgt.tokens, m, theta)
    return {p.src_index: p.tgt_index for p in aligned}


def edge_match_counts(src: UDTree, tgt: UDTree, m: AlignmentMatrix, theta: float,
                      coarse_labels: bool = False) -> tuple[int, int]:
    """(matched SRC edges, SRC edges). Attachments to ROOT are not edges."""
    a = sentence_alignment(src, tgt, m, theta)
    matched = total = 0
    for tok in src.tokens:
        if tok.head == ROOT:
            continue
        total += 1
        h, d = a.get(tok.head), a.get(tok.index)
        if h is None or d is None or tgt[d].head != h:
            continue
        if coarse_labels and coarse(tgt[d].deprel) != coarse(tok.deprel):
            continue
        matched += 1
    return matched, total


def mismatched_edge_rate(src: UDTree, tgt: UDTree, m: AlignmentMatrix, theta: float,
                         coarse_labels: bool = False) -> Optional[float]:
    """Share of SRC head->dependent edges without a same-direction TGT image.

    None for single-token SRC sentences, which have no edges.
    """
    matched, total = edge_match_counts(src, tgt, m, theta, coarse_labels)
    if total == 0:
        return None
    return 1.0 - matched / total


def span_head(tree: UDTree, span: Iterable[int]) -> int:
    """First span token whose head lies outside the span (else the first token)."""
    members = sorted(span)
    inside = set(members)
    for i in members:
        if tree[i].head not in inside:
            return i
    return members[0]


def _ancestors(tree: UDTree, i: int) -> list[int]:
    chain = [i]
    while i != ROOT:
        i = tree[i].head
        chain.append(i)
    return chain


def dependency_path(tree: UDTree, a: int, b: int) -> list[int]:
    """Token indices on the undirected tree path from ``a`` to ``b``, inclusive."""
    up_a = _ancestors(tree, a)
    up_b = _ancestors(tree, b)
    on_b = {node: k for k, node in enumerate(up_b)}
    for k, node in enumerate(up_a):
        if node in on_b:
            return up_a[:k + 1] + list(reversed(up_b[:on_b[node]]))
    raise AssertionError("tokens of one tree always share ROOT")


def path_labels(tree: UDTree, a: int, b: int) -> list[str]:
    """Coarse labels of the edges walked from ``a`` to ``b``."""
    path = dependency_path(tree, a, b)
    labels = []
    for x, y in zip(path, path[1:]):
        child = x if tree[x].head == y else y
        labels.append(coarse(tree[child].deprel))
    return labels


def relation_path_mismatch(src: UDTree, tgt: UDTree, m: AlignmentMatrix, theta: float,
                           rel: RelationInstance) -> bool:
    """True when the subject-object path differs across the two trees.

    An unprojectable relation counts as a mismatch.
    """
    try:
        projected = project_relation(rel, m, theta)
    except ProjectionError:
        return True
    src_labels = path_labels(src, span_head(src, rel.subj), span_head(src, rel.obj))
    tgt_labels = path_labels(tgt, span_head(tgt, projected.subj), span_head(tgt, projected.obj))
    return src_labels != tgt_labels


def subject_object_distances(tree: UDTree, rel: RelationInstance) -> tuple[int, int]:
    """(sequential, syntactic) distance between the span heads."""
    s = span_head(tree, rel.subj)
    o = span_head(tree, rel.obj)
    return abs(s - o), len(dependency_path(tree, s, o)) - 1


# ---------------------------------------------------------------------------
# reports

def _ratio(num: float, den: float) -> Optional[float]:
    return num / den if den else None


@dataclass(frozen=True)
class BiasReport:
    misaligned_word_rate: Optional[float]
    mismatched_edge_rate: Optional[float]
    mismatched_path_rate: Optional[float]
    sentence_count: int

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class DistanceReport:
    mean_sequential_distance: Optional[float]
    mean_syntactic_distance: Optional[float]
    instance_count: int

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class MergeReport:
    mean_src_len: float
    mean_tgt_len: float
    mean_sum: float
    mean_forest_len: float
    mean_merged: float
    merge_rate: float
    sentence_count: int

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class BiasAccumulator:
    theta: float
    coarse_labels: bool = False
    sentences: int = 0
    misaligned: int = 0
    tokens: int = 0
    edges_matched: int = 0
    edges: int = 0
    paths_mismatched: int = 0
    paths: int = 0

    def add(self, src: UDTree, tgt: UDTree, m: AlignmentMatrix,
            relations: Iterable[RelationInstance] = ()) -> None:
        self.sentences += 1
        bad, total = misaligned_counts(src, tgt, m, self.theta)
        self.misaligned += bad
        self.tokens += total
        ok, total = edge_match_counts(src, tgt, m, self.theta, self.coarse_labels)
        self.edges_matched += ok
        self.edges += total
        for rel in relations:
            self.paths += 1
            self.paths_mismatched += relation_path_mismatch(src, tgt, m, self.theta, rel)

    def merge(self, other: "BiasAccumulator") -> "BiasAccumulator":
        for f in fields(self):
            if f.name not in ("theta", "coarse_labels"):
                setattr(self, f.name, getattr(self, f.name) + getattr(other, f.name))
        return self

    def report(self) -> BiasReport:
        edge_rate = _ratio(self.edges - self.edges_matched, self.edges)
        return BiasReport(_ratio(self.misaligned, self.tokens), edge_rate,
                          _ratio(self.paths_mismatched, self.paths), self.sentences)


@dataclass
class DistanceAccumulator:
    sequential: int = 0
    syntactic: int = 0
    count: int = 0

    def add(self, tree: UDTree, rel: RelationInstance) -> None:
        seq, syn = subject_object_distances(tree, rel)
        self.sequential += seq
        self.syntactic += syn
        self.count += 1

    def merge(self, other: "DistanceAccumulator") -> "DistanceAccumulator":
        self.sequential += other.sequential
        self.syntactic += other.syntactic
        self.count += other.count
        return self

    def report(self) -> DistanceReport:
        return DistanceReport(_ratio(self.sequential, self.count), _ratio(self.syntactic, self.count), self.count)


@dataclass
class MergeAccumulator:
    count: int = 0
    src: int = 0
    tgt: int = 0
    merged: int = 0
    forest: int = 0

    def add(self, forest: CodeMixedForest) -> None:
        self.count += 1
        self.src += forest.src_len
        self.tgt += forest.tgt_len
        self.merged += forest.merged_count
        self.forest += forest.size

    def merge(self, other: "MergeAccumulator") -> "MergeAccumulator":
        for f in fields(self):
            setattr(self, f.name, getattr(self, f.name) + getattr(other, f.name))
        return self

    def report(self) -> MergeReport:
        if not self.count:
            raise ValueError("merge report over an empty corpus")
        n = self.count
        both = self.src + self.tgt
        return MergeReport(self.src / n, self.tgt / n, both / n, self.forest / n, self.merged / n,
                           self.merged / both, n)


def merge_report(forests: Iterable[CodeMixedForest]) -> MergeReport:
    acc = MergeAccumulator()
    for f in forests:
        acc.add(f)
    return acc.report()


def format_table(rows: list[tuple[str, dict]]) -> str:
    """Render named reports as an aligned two-column text table."""
    lines = []
    width = max((len(k) for _, d in rows for k in d), default=0)
    for title, data in rows:
        lines.append(f"[{title}]")
        for key, value in data.items():
            if value is None:
                shown = "-"
            elif isinstance(value, float):
                shown = f"{value:.4f}"
            else:
                shown = str(value)
            lines.append(f"  {key:<{width}}  {shown:>10}")
    return "\n".join(lines) + "\n"
