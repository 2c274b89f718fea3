"""Word-alignment confidence matrices and threshold-filtered greedy matching."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from .treebank import Token, UDForestError


class AlignmentParseError(UDForestError):
    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line


class Side(str, enum.Enum):
    SRC = "SRC"
    TGT = "TGT"


@dataclass(frozen=True)
class AlignmentMatrix:
    """Sparse alignment scores keyed by 1-based (src_index, tgt_index)."""

    sent_id: str
    entries: Mapping[tuple[int, int], float] = field(default_factory=dict)

    def __post_init__(self):
        entries = dict(self.entries)
        for (i, j), score in entries.items():
            if not 0.0 <= score <= 1.0:
                raise ValueError(f"alignment score {score} for ({i}, {j}) outside [0, 1]")
            if i < 1 or j < 1:
                raise ValueError(f"alignment indices must be 1-based, got ({i}, {j})")
        object.__setattr__(self, "entries", entries)

    @classmethod
    def from_triples(cls, sent_id: str, triples: Iterable[tuple[int, int, float]]) -> "AlignmentMatrix":
        entries: dict[tuple[int, int], float] = {}
        for i, j, score in triples:
            entries[i, j] = max(score, entries.get((i, j), score))
        return cls(sent_id, entries)

    def __len__(self) -> int:
        return len(self.entries)

    def score(self, src_index: int, tgt_index: int) -> float | None:
        return self.entries.get((src_index, tgt_index))

    def above(self, theta: float) -> list[tuple[int, int, float]]:
        """Entries with score > theta, best first; ties by src then tgt index."""
        hits = [(i, j, s) for (i, j), s in self.entries.items() if s > theta]
        hits.sort(key=lambda e: (-e[2], e[0], e[1]))
        return hits

    def max_indices(self) -> tuple[int, int]:
        if not self.entries:
            return 0, 0
        return max(i for i, _ in self.entries), max(j for _, j in self.entries)


@dataclass(frozen=True)
class AlignedPair:
    src_index: int
    tgt_index: int
    score: float
    arc: str


def read_alignments(text: str) -> dict[str, AlignmentMatrix]:
    """Parse ``sent_id<TAB>src<TAB>tgt<TAB>score`` lines, grouping by sentence.

    Duplicate (src, tgt) keys keep the highest score. Blank lines and lines
    starting with ``#`` are ignored. Sentence order follows first appearance.
    """
    grouped: dict[str, dict[tuple[int, int], float]] = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        if not line.strip() or line.startswith("#"):
            continue
        cols = line.split("\t")
        if len(cols) != 4:
            raise AlignmentParseError(f"expected 4 tab-separated columns, found {len(cols)}", lineno)
        sent_id, src, tgt, raw = cols
        try:
            i, j = int(src), int(tgt)
        except ValueError:
            raise AlignmentParseError(f"non-integer token index ({src!r}, {tgt!r})", lineno) from None
        if i < 1 or j < 1:
            raise AlignmentParseError(f"token indices must be >= 1, got ({i}, {j})", lineno)
        try:
            score = float(raw)
        except ValueError:
            raise AlignmentParseError(f"score {raw!r} is not a number", lineno) from None
        if not 0.0 <= score <= 1.0:
            raise AlignmentParseError(f"score {score} outside [0, 1]", lineno)
        bucket = grouped.setdefault(sent_id, {})
        bucket[i, j] = max(score, bucket.get((i, j), score))
    return {sid: AlignmentMatrix(sid, entries) for sid, entries in grouped.items()}


def read_alignment_file(path) -> dict[str, AlignmentMatrix]:
    with open(path, encoding="utf-8") as f:
        return read_alignments(f.read())


def align_search(
    src_nodes: Sequence[Token],
    tgt_nodes: Sequence[Token],
    m: AlignmentMatrix,
    theta: float,
) -> tuple[list[AlignedPair], list[tuple[Token, Side]]]:
    """Greedy one-to-one matching of two node sets under threshold ``theta``.

    Candidates are the entries of ``m`` linking a node of each set with
    score strictly above ``theta``, consumed best-first. Unmatched nodes are
    returned SRC-side first, each side in ascending index order.
    """
    src_free = {t.index: t for t in src_nodes}
    tgt_free = {t.index: t for t in tgt_nodes}
    aligned = []
    if src_free and tgt_free:
        for i, j, score in m.above(theta):
            if i in src_free and j in tgt_free:
                del src_free[i]
                tgt = tgt_free.pop(j)
                aligned.append(AlignedPair(i, j, score, tgt.deprel))
                if not src_free or not tgt_free:
                    break
    nonaligned = [(src_free[i], Side.SRC) for i in sorted(src_free)]
    nonaligned += [(tgt_free[j], Side.TGT) for j in sorted(tgt_free)]
    return aligned, nonaligned
