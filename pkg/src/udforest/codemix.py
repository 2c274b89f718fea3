"""Code-mixed forest construction, text assembly and relation projection.

A forest is built by a breadth-first, layer-by-layer walk over a SRC tree
and a TGT tree at once. At every merged node the two child frontiers are
matched with :func:`~udforest.alignment.align_search`; confidently aligned
pairs collapse into one MERGED node carrying the TGT word and label, and
every other node is copied into the forest along with its whole subtree.
"""

from __future__ import annotations

import enum
from collections import deque
from dataclasses import dataclass
from typing import Optional, Sequence

from .alignment import AlignmentMatrix, Side, align_search
from .treebank import ROOT, UDForestError, UDTree

ROOT_FORM = "ROOT"


class Origin(str, enum.Enum):
    ROOT = "ROOT"
    MERGED = "MERGED"
    SRC_COPY = "SRC_COPY"
    TGT_COPY = "TGT_COPY"


class ForestError(UDForestError):
    pass


class ProjectionError(UDForestError):
    """Raised when a relation argument has no aligned counterpart."""

    def __init__(self, span: str, rel: "RelationInstance"):
        super().__init__(f"sentence {rel.sent_id!r}: {span} span {list(rel.span(span))} has no aligned target tokens")
        self.span = span
        self.relation = rel


@dataclass(frozen=True)
class ForestNode:
    id: int
    form: str
    origin: Origin
    src_index: Optional[int]
    tgt_index: Optional[int]
    deprel: Optional[str]
    parent: Optional[int]


@dataclass(frozen=True)
class CodeMixedForest:
    sent_id: str
    nodes: tuple[ForestNode, ...]
    src_len: int
    tgt_len: int
    merged_count: int

    def __post_init__(self):
        object.__setattr__(self, "nodes", tuple(self.nodes))
        by_src: dict[int, int] = {}
        by_tgt: dict[int, int] = {}
        merged = 0
        for pos, node in enumerate(self.nodes):
            if node.id != pos:
                raise ForestError(f"node ids must be contiguous from 0, found {node.id} at {pos}")
            if pos == 0:
                if node.origin is not Origin.ROOT or node.parent is not None:
                    raise ForestError("node 0 must be the parentless ROOT")
                continue
            if node.parent is None or not 0 <= node.parent < node.id:
                raise ForestError(f"node {node.id}: parent {node.parent} must precede it")
            has_src = node.src_index is not None
            has_tgt = node.tgt_index is not None
            expected = {Origin.MERGED: (True, True), Origin.SRC_COPY: (True, False), Origin.TGT_COPY: (False, True)}
            if expected.get(node.origin) != (has_src, has_tgt):
                raise ForestError(f"node {node.id}: origin {node.origin.value} inconsistent with its indices")
            merged += node.origin is Origin.MERGED
            for index, table, n, side in ((node.src_index, by_src, self.src_len, "src"),
                                          (node.tgt_index, by_tgt, self.tgt_len, "tgt")):
                if index is None:
                    continue
                if not 1 <= index <= n or index in table:
                    raise ForestError(f"node {node.id}: {side}_index {index} out of range or housed twice")
                table[index] = node.id
        if merged != self.merged_count:
            raise ForestError(f"merged_count {self.merged_count} but {merged} MERGED nodes")
        if len(by_src) != self.src_len or len(by_tgt) != self.tgt_len:
            raise ForestError("forest does not house every source and target token")
        object.__setattr__(self, "_by_src", by_src)
        object.__setattr__(self, "_by_tgt", by_tgt)

    @property
    def size(self) -> int:
        """Content nodes, ROOT excluded."""
        return len(self.nodes) - 1

    def node_for_src(self, index: int) -> int:
        return self._by_src[index]

    def node_for_tgt(self, index: int) -> int:
        return self._by_tgt[index]

    def children(self, node_id: int) -> list[ForestNode]:
        return [n for n in self.nodes[1:] if n.parent == node_id]

    def depth(self, node_id: int) -> int:
        d = 0
        while node_id:
            node_id = self.nodes[node_id].parent
            d += 1
        return d


def _check_alignment_range(src: UDTree, tgt: UDTree, m: AlignmentMatrix) -> None:
    for i, j in m.entries:
        if i > len(src) or j > len(tgt):
            raise ForestError(
                f"sentence {src.sent_id!r}: alignment ({i}, {j}) outside sentence lengths "
                f"({len(src)}, {len(tgt)})")


def construct_forest(src: UDTree, tgt: UDTree, m: AlignmentMatrix, theta: float) -> CodeMixedForest:
    """Merge a SRC and a TGT tree into one code-mixed forest.

    Only the synthetic ROOT is merged unconditionally; the two root
    predicates are matched like any other layer, so ``theta=1.0`` yields the
    disjoint union of both trees. Node ids follow visit order: under each
    merged node, merged children (ascending TGT index) come first, then the
    copied SRC subtrees, then the copied TGT subtrees (ascending index,
    preorder within a subtree).
    """
    _check_alignment_range(src, tgt, m)
    nodes = [ForestNode(0, ROOT_FORM, Origin.ROOT, None, None, None, None)]
    merged = 0

    def copy_subtree(tree: UDTree, top: int, parent: int, side: Side) -> None:
        origin = Origin.SRC_COPY if side is Side.SRC else Origin.TGT_COPY
        stack = [(top, parent)]
        while stack:
            index, parent_id = stack.pop()
            tok = tree[index]
            nid = len(nodes)
            nodes.append(ForestNode(
                nid, tok.form, origin,
                index if side is Side.SRC else None,
                index if side is Side.TGT else None,
                tok.deprel, parent_id))
            stack.extend((c, nid) for c in reversed(tree.child_indices(index)))

    queue = deque([(0, ROOT, ROOT)])
    while queue:
        fid, si, tj = queue.popleft()
        aligned, nonaligned = align_search(
            [src[i] for i in src.child_indices(si)],
            [tgt[j] for j in tgt.child_indices(tj)],
            m, theta)
        for pair in sorted(aligned, key=lambda p: p.tgt_index):
            nid = len(nodes)
            nodes.append(ForestNode(nid, tgt[pair.tgt_index].form, Origin.MERGED,
                                    pair.src_index, pair.tgt_index, pair.arc, fid))
            merged += 1
            queue.append((nid, pair.src_index, pair.tgt_index))
        for tok, side in nonaligned:
            copy_subtree(src if side is Side.SRC else tgt, tok.index, fid, side)

    return CodeMixedForest(src.sent_id, tuple(nodes), len(src), len(tgt), merged)


@dataclass(frozen=True)
class TextToken:
    form: str
    origin: Origin
    src_index: int
    tgt_index: Optional[int]


def assemble_codemixed_text(src: UDTree, forest: CodeMixedForest) -> list[TextToken]:
    """SRC word order, with every merged SRC word replaced by its TGT word.

    Unaligned TGT words live only in the forest and are not inserted.
    """
    out = []
    for tok in src.tokens:
        node = forest.nodes[forest.node_for_src(tok.index)]
        if node.origin is Origin.MERGED:
            out.append(TextToken(node.form, Origin.MERGED, tok.index, node.tgt_index))
        else:
            out.append(TextToken(tok.form, Origin.SRC_COPY, tok.index, None))
    return out


@dataclass(frozen=True)
class RelationInstance:
    """A labelled subject/object pair.

    On the ``SRC`` and ``TGT`` sides ``subj``/``obj`` hold contiguous 1-based
    token indices; on the ``FOREST`` side they hold forest node ids.
    """

    sent_id: str
    subj: tuple[int, ...]
    obj: tuple[int, ...]
    label: str
    side: str = "SRC"

    def __post_init__(self):
        if self.side not in ("SRC", "TGT", "FOREST"):
            raise ValueError(f"unknown relation side {self.side!r}")
        for name in ("subj", "obj"):
            ids = tuple(sorted(set(getattr(self, name))))
            if not ids:
                raise ValueError(f"relation {self.label!r}: empty {name} span")
            if self.side != "FOREST" and ids != tuple(range(ids[0], ids[-1] + 1)):
                raise ValueError(f"relation {self.label!r}: {name} span is not contiguous")
            object.__setattr__(self, name, ids)

    @classmethod
    def from_spans(cls, sent_id, subj: tuple[int, int], obj: tuple[int, int], label, side="SRC"):
        return cls(sent_id, tuple(range(subj[0], subj[1] + 1)), tuple(range(obj[0], obj[1] + 1)), label, side)

    def span(self, name: str) -> tuple[int, ...]:
        return self.subj if name == "subj" else self.obj

    def check_bounds(self, n: int) -> None:
        for name in ("subj", "obj"):
            ids = self.span(name)
            if ids[0] < 1 or ids[-1] > n:
                raise UDForestError(f"sentence {self.sent_id!r}: {name} span {list(ids)} outside 1..{n}")


def project_relation(rel: RelationInstance, m: AlignmentMatrix, theta: float) -> RelationInstance:
    """Carry a SRC-side relation over to the TGT sentence.

    Each span becomes the hull [min, max] of the TGT tokens aligned above
    ``theta`` to any of its tokens. Raises :class:`ProjectionError` naming
    the first span whose image is empty.
    """
    if rel.side != "SRC":
        raise ValueError("only SRC-side relations can be projected")
    links = m.above(theta)
    spans = {}
    for name in ("subj", "obj"):
        members = set(rel.span(name))
        image = [j for i, j, _ in links if i in members]
        if not image:
            raise ProjectionError(name, rel)
        spans[name] = (min(image), max(image))
    return RelationInstance.from_spans(rel.sent_id, spans["subj"], spans["obj"], rel.label, "TGT")


def merge_annotations(
    src_rel: RelationInstance,
    tgt_rel: Optional[RelationInstance],
    forest: CodeMixedForest,
) -> RelationInstance:
    """Re-express SRC and TGT spans as the forest nodes that house them.

    ``tgt_rel`` may be None when projection failed and the SRC view is kept.
    """
    spans: dict[str, set[int]] = {"subj": set(), "obj": set()}
    views: Sequence[tuple[RelationInstance, str]] = [(src_rel, "SRC")]
    if tgt_rel is not None:
        views = [*views, (tgt_rel, "TGT")]
    for rel, side in views:
        if rel.side != side:
            raise ValueError(f"expected a {side}-side relation, got {rel.side}")
        lookup = forest.node_for_src if side == "SRC" else forest.node_for_tgt
        for name in ("subj", "obj"):
            for index in rel.span(name):
                try:
                    spans[name].add(lookup(index))
                except KeyError:
                    raise ForestError(
                        f"sentence {forest.sent_id!r}: {side} token {index} is not housed in the forest") from None
    return RelationInstance(forest.sent_id, tuple(spans["subj"]), tuple(spans["obj"]), src_rel.label, "FOREST")
