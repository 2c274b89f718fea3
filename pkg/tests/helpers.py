"""Shared toy data, random generators and brute-force oracles for the test suite."""

import json
from collections import deque

import numpy as np

from udforest.alignment import AlignmentMatrix
from udforest.treebank import Token, UDTree, serialize_conllu

LABELS = ["nsubj", "obj", "obl", "amod", "det", "aux", "nmod:poss", "advmod", "conj", "case"]


def make_tree(sent_id, forms, heads, deprels, upos=None, tag=""):
    upos = upos or ["X"] * len(forms)
    return UDTree(sent_id, [Token(i, f, u, h, d) for i, (f, u, h, d) in
                            enumerate(zip(forms, upos, heads, deprels), 1)], tag)


def eats_src(sent_id="toy"):
    return make_tree(sent_id, ["he", "eats", "apples"], [2, 0, 2], ["nsubj", "root", "obj"],
                     ["PRON", "VERB", "NOUN"], "src")


def chi_tgt(sent_id="toy"):
    return make_tree(sent_id, ["ta", "chi", "pingguo"], [2, 0, 2], ["nsubj", "root", "obj"],
                     ["PRON", "VERB", "NOUN"], "tgt")


def identity_alignment(sent_id, n, score=0.9):
    return AlignmentMatrix(sent_id, {(i, i): score for i in range(1, n + 1)})


def partial_src(sent_id="partial"):
    return make_tree(sent_id, ["he", "eats"], [2, 0], ["nsubj", "root"], ["PRON", "VERB"], "src")


def partial_tgt(sent_id="partial"):
    return make_tree(sent_id, ["ta", "chi", "le"], [2, 0, 2], ["nsubj", "root", "aux"],
                     ["PRON", "VERB", "PART"], "tgt")


def random_tree(rng, n, sent_id="r", tag=""):
    """Uniform-ish random rooted tree: nodes attach to an earlier node of a random order."""
    order = rng.permutation(np.arange(1, n + 1))
    heads = [0] * (n + 1)
    for k in range(1, n):
        heads[order[k]] = int(order[rng.integers(0, k)])
    deprels = ["root" if heads[i] == 0 else LABELS[rng.integers(len(LABELS))] for i in range(1, n + 1)]
    forms = [f"{tag or 'w'}{i}" for i in range(1, n + 1)]
    return make_tree(sent_id, forms, heads[1:], deprels, tag=tag)


def random_alignment(rng, sent_id, n_src, n_tgt, density=0.35):
    """Random sparse matrix; scores on a 0.05 grid so ties and exact thresholds occur."""
    entries = {}
    for i in range(1, n_src + 1):
        for j in range(1, n_tgt + 1):
            if rng.random() < density:
                entries[i, j] = round(float(rng.integers(0, 21)) * 0.05, 2)
    return AlignmentMatrix(sent_id, entries)


def random_pair(rng, max_n, sent_id="r"):
    n_src = int(rng.integers(1, max_n + 1))
    n_tgt = int(rng.integers(1, max_n + 1))
    src = random_tree(rng, n_src, sent_id, "s")
    tgt = random_tree(rng, n_tgt, sent_id, "t")
    return src, tgt, random_alignment(rng, sent_id, n_src, n_tgt)


# ---------------------------------------------------------------------------
# Forest construction oracle: a literal BFS over plain lists and a FIFO queue.
# Deliberately shares no code with udforest.codemix.

def _kids(tree, i):
    return [t for t in tree.tokens if t.head == i]


def _oracle_align_search(nodes_a, nodes_b, M, theta):
    nodes_a = list(nodes_a)
    nodes_b = list(nodes_b)
    aligned_pairs = []
    for (i, j), m_ij in sorted(M.entries.items(), key=lambda kv: (-kv[1], kv[0][0], kv[0][1])):
        if m_ij > theta:
            w_i = next((w for w in nodes_a if w.index == i), None)
            w_j = next((w for w in nodes_b if w.index == j), None)
            if w_i is None or w_j is None:
                continue
            aligned_pairs.append((w_i, w_j, w_j.deprel))
            nodes_a.remove(w_i)
            nodes_b.remove(w_j)
    nonaligned = [(w, "SRC") for w in nodes_a] + [(w, "TGT") for w in nodes_b]
    return aligned_pairs, nonaligned


def oracle_forest_record(src, tgt, M, theta):
    F = [{"id": 0, "form": "ROOT", "origin": "ROOT", "src_index": None, "tgt_index": None,
          "deprel": None, "parent": None}]

    def add(form, origin, si, tj, arc, parent):
        F.append({"id": len(F), "form": form, "origin": origin, "src_index": si, "tgt_index": tj,
                  "deprel": arc, "parent": parent})
        return len(F) - 1

    def copy_subtree(tree, w, side, parent):
        nid = add(w.form, side + "_COPY", w.index if side == "SRC" else None,
                  w.index if side == "TGT" else None, w.deprel, parent)
        for c in _kids(tree, w.index):
            copy_subtree(tree, c, side, nid)

    opt_nodes = deque()
    opt_nodes.append((0, _kids(src, 0), _kids(tgt, 0)))
    merged = 0
    while opt_nodes:
        w_cur, next_src, next_tgt = opt_nodes.popleft()
        aligned_pairs, nonaligned_nodes = _oracle_align_search(next_src, next_tgt, M, theta)
        for w_i, w_j, arc in sorted(aligned_pairs, key=lambda p: p[1].index):
            w_merged = add(w_j.form, "MERGED", w_i.index, w_j.index, arc, w_cur)
            merged += 1
            opt_nodes.append((w_merged, _kids(src, w_i.index), _kids(tgt, w_j.index)))
        for w, side in nonaligned_nodes:
            copy_subtree(src if side == "SRC" else tgt, w, side, w_cur)
    return {"sent_id": src.sent_id, "src_len": len(src), "tgt_len": len(tgt), "merged_count": merged,
            "nodes": F, "text": [], "relations": []}


def oracle_forest_json(src, tgt, M, theta):
    return json.dumps(oracle_forest_record(src, tgt, M, theta), ensure_ascii=False)


# ---------------------------------------------------------------------------

def bfs_all_pairs(tree):
    """Undirected all-pairs shortest path lengths by repeated BFS (index 0 unused)."""
    n = len(tree)
    adj = {i: set() for i in range(1, n + 1)}
    for t in tree.tokens:
        if t.head:
            adj[t.index].add(t.head)
            adj[t.head].add(t.index)
    dist = np.full((n + 1, n + 1), -1, dtype=int)
    for s in range(1, n + 1):
        dist[s, s] = 0
        q = deque([s])
        while q:
            u = q.popleft()
            for v in adj[u]:
                if dist[s, v] < 0:
                    dist[s, v] = dist[s, u] + 1
                    q.append(v)
    return dist


def write_parallel_corpus(directory, seed, count, max_n=10, with_relations=True):
    """Random src/tgt CoNLL-U, alignment TSV and relations JSONL under ``directory``."""
    rng = np.random.default_rng(seed)
    src_text, tgt_text, align_lines, rel_lines = [], [], [], []
    for k in range(count):
        sid = f"s{k:04d}"
        src, tgt, m = random_pair(rng, max_n, sid)
        src_text.append(serialize_conllu(src))
        tgt_text.append(serialize_conllu(tgt))
        # a sentence with no links still needs a row; 0.0 never clears the strict threshold
        for (i, j), score in sorted(m.entries.items()) or [((1, 1), 0.0)]:
            align_lines.append(f"{sid}\t{i}\t{j}\t{score}")
        if with_relations:
            a = int(rng.integers(1, len(src) + 1))
            b = int(rng.integers(a, len(src) + 1))
            c = int(rng.integers(1, len(src) + 1))
            rel_lines.append(json.dumps({"sent_id": sid, "subj": [a, b], "obj": [c, c],
                                         "label": ["ORG-AFF", "PHYS", "PART-WHOLE"][k % 3]}))
    paths = {name: directory / name for name in ("src.conllu", "tgt.conllu", "align.tsv", "relations.jsonl")}
    paths["src.conllu"].write_text("".join(src_text), encoding="utf-8")
    paths["tgt.conllu"].write_text("".join(tgt_text), encoding="utf-8")
    paths["align.tsv"].write_text("\n".join(align_lines) + "\n", encoding="utf-8")
    paths["relations.jsonl"].write_text("\n".join(rel_lines) + "\n", encoding="utf-8")
    return {k.split(".")[0]: str(v) for k, v in paths.items()}
