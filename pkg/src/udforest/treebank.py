"""CoNLL-U ingestion, validation and serialization for single-rooted UD trees."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

ROOT = 0


class UDForestError(ValueError):
    """Base class for recoverable input errors."""


class ConlluParseError(UDForestError):
    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line


class TreeValidationError(UDForestError):
    def __init__(self, reason: str, sent_id: str):
        super().__init__(f"sentence {sent_id!r}: {reason}")
        self.reason = reason
        self.sent_id = sent_id


@dataclass(frozen=True)
class Token:
    index: int
    form: str
    upos: str
    head: int
    deprel: str

    def __post_init__(self):
        if self.index < 1:
            raise ValueError(f"token index must be >= 1, got {self.index}")
        if self.head < 0:
            raise ValueError(f"token {self.index}: negative head {self.head}")
        if self.head == self.index:
            raise ValueError(f"token {self.index} is its own head")
        if not self.deprel:
            raise ValueError(f"token {self.index}: empty deprel")


@dataclass(frozen=True)
class UDTree:
    """One sentence: tokens 1..n, each pointing at a head (0 = ROOT)."""

    sent_id: str
    tokens: tuple[Token, ...]
    language_tag: str = ""

    def __post_init__(self):
        object.__setattr__(self, "tokens", tuple(self.tokens))
        _validate(self)
        kids: list[list[int]] = [[] for _ in range(len(self.tokens) + 1)]
        for tok in self.tokens:
            kids[tok.head].append(tok.index)
        object.__setattr__(self, "_kids", tuple(tuple(k) for k in kids))

    def __len__(self) -> int:
        return len(self.tokens)

    def __getitem__(self, index: int) -> Token:
        """1-based token access."""
        if not 1 <= index <= len(self.tokens):
            raise IndexError(f"token index {index} out of range 1..{len(self.tokens)}")
        return self.tokens[index - 1]

    @property
    def root(self) -> Token:
        return self[self._kids[ROOT][0]]

    def child_indices(self, index: int) -> tuple[int, ...]:
        if not 0 <= index <= len(self.tokens):
            raise IndexError(f"node index {index} out of range 0..{len(self.tokens)}")
        return self._kids[index]

    def subtree(self, index: int) -> list[int]:
        """Token indices dominated by ``index`` (inclusive), in preorder."""
        out = []
        stack = [index]
        while stack:
            i = stack.pop()
            out.append(i)
            stack.extend(reversed(self._kids[i]))
        return out


def _validate(tree: UDTree) -> None:
    toks = tree.tokens
    n = len(toks)
    if n == 0:
        raise TreeValidationError("empty sentence", tree.sent_id)
    for pos, tok in enumerate(toks, 1):
        if tok.index != pos:
            raise TreeValidationError(
                f"token indices not contiguous (expected {pos}, got {tok.index})", tree.sent_id)
        if tok.head > n:
            raise TreeValidationError(f"token {pos} has head {tok.head} beyond sentence end", tree.sent_id)
    roots = [t.index for t in toks if t.head == ROOT]
    if not roots:
        # every token has a head inside the sentence, so some cycle must exist
        raise TreeValidationError("cycle (no token attached to ROOT)", tree.sent_id)
    if len(roots) > 1:
        raise TreeValidationError(f"multiple roots {roots}", tree.sent_id)
    state = [0] * (n + 1)  # 0 unseen, 1 on current walk, 2 reaches ROOT
    state[ROOT] = 2
    for start in range(1, n + 1):
        walk = []
        i = start
        while state[i] == 0:
            state[i] = 1
            walk.append(i)
            i = toks[i - 1].head
        if state[i] == 1:
            raise TreeValidationError(f"cycle through token {i}", tree.sent_id)
        for j in walk:
            state[j] = 2


def children(tree: UDTree, index: int) -> list[Token]:
    """Dependents of ``index`` (0 for ROOT) in ascending index order."""
    return [tree[i] for i in tree.child_indices(index)]


def _iter_blocks(text: str) -> Iterable[tuple[int, list[tuple[int, str]]]]:
    block: list[tuple[int, str]] = []
    start = 1
    for lineno, line in enumerate(text.splitlines(), 1):
        if line.strip() == "":
            if block:
                yield start, block
            block = []
            start = lineno + 1
        else:
            block.append((lineno, line))
    if block:
        yield start, block


def parse_conllu(text: str, language_tag: str = "") -> list[UDTree]:
    """Parse CoNLL-U text into validated trees.

    Multiword ranges (``3-4``) and empty nodes (``3.1``) are skipped. Only
    ID, FORM, UPOS, HEAD and DEPREL are retained.
    """
    trees = []
    for counter, (_, block) in enumerate(_iter_blocks(text), 1):
        sent_id = None
        tokens = []
        for lineno, line in block:
            if line.startswith("#"):
                key, sep, value = line[1:].partition("=")
                if sep and key.strip() == "sent_id":
                    sent_id = value.strip()
                continue
            cols = line.rstrip("\r").split("\t")
            if len(cols) != 10:
                raise ConlluParseError(f"expected 10 tab-separated columns, found {len(cols)}", lineno)
            ident = cols[0]
            if "-" in ident or "." in ident:
                continue
            try:
                index = int(ident)
                head = int(cols[6])
            except ValueError:
                raise ConlluParseError(f"non-integer ID or HEAD ({ident!r}, {cols[6]!r})", lineno) from None
            try:
                tokens.append(Token(index, cols[1], cols[3], head, cols[7]))
            except ValueError as exc:
                raise ConlluParseError(str(exc), lineno) from None
        trees.append(UDTree(sent_id if sent_id is not None else str(counter), tokens, language_tag))
    return trees


def serialize_conllu(tree: UDTree) -> str:
    lines = [f"# sent_id = {tree.sent_id}"]
    for t in tree.tokens:
        lines.append("\t".join((str(t.index), t.form, "_", t.upos, "_", "_", str(t.head), t.deprel, "_", "_")))
    return "\n".join(lines) + "\n\n"


def read_conllu(path, language_tag: str = "") -> list[UDTree]:
    with open(path, encoding="utf-8") as f:
        return parse_conllu(f.read(), language_tag)
