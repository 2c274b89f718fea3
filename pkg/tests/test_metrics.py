import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from helpers import (bfs_all_pairs, chi_tgt, eats_src, identity_alignment, make_tree, partial_src, partial_tgt,
                     random_pair, random_tree)
from udforest.alignment import AlignmentMatrix
from udforest.codemix import RelationInstance, construct_forest
from udforest.metrics import (BiasAccumulator, DistanceAccumulator, MergeAccumulator, dependency_path,
                              format_table, merge_report, misaligned_word_rate, mismatched_edge_rate,
                              relation_path_mismatch, span_head, subject_object_distances)

EMPTY = AlignmentMatrix("toy", {})


def rel(subj, obj, sid="toy"):
    return RelationInstance.from_spans(sid, subj, obj, "REL")


def flipped_chi():
    # "ta chi pingguo" with the chi->pingguo edge reversed: pingguo heads the sentence
    return make_tree("toy", ["ta", "chi", "pingguo"], [2, 3, 0], ["nsubj", "obj", "root"])


class TestMisalignedWords:
    def test_identity(self):
        assert misaligned_word_rate(eats_src(), chi_tgt(), identity_alignment("toy", 3), 0.5) == 0.0

    def test_no_links(self):
        assert misaligned_word_rate(eats_src(), chi_tgt(), EMPTY, 0.5) == 1.0

    def test_single_link(self):
        m = AlignmentMatrix("toy", {(1, 1): 0.9})
        assert misaligned_word_rate(eats_src(), chi_tgt(), m, 0.5) == pytest.approx(4 / 6)


class TestEdges:
    def test_isomorphic(self):
        assert mismatched_edge_rate(eats_src(), chi_tgt(), identity_alignment("toy", 3), 0.5) == 0.0

    def test_no_links(self):
        assert mismatched_edge_rate(eats_src(), chi_tgt(), EMPTY, 0.5) == 1.0

    def test_partial_toy_all_matched(self):
        m = AlignmentMatrix("partial", {(1, 1): 0.9, (2, 2): 0.9})
        assert mismatched_edge_rate(partial_src(), partial_tgt(), m, 0.5) == 0.0

    def test_one_flipped_edge(self):
        assert mismatched_edge_rate(eats_src(), flipped_chi(), identity_alignment("toy", 3), 0.5) == 0.5

    def test_coarse_labels(self):
        tgt = make_tree("toy", ["ta", "chi", "pingguo"], [2, 0, 2], ["nsubj:pass", "root", "iobj"])
        m = identity_alignment("toy", 3)
        assert mismatched_edge_rate(eats_src(), tgt, m, 0.5) == 0.0
        assert mismatched_edge_rate(eats_src(), tgt, m, 0.5, coarse_labels=True) == 0.5

    def test_single_token_has_no_edges(self):
        one = make_tree("x", ["a"], [0], ["root"])
        assert mismatched_edge_rate(one, one, identity_alignment("x", 1), 0.5) is None


class TestPaths:
    def test_isomorphic(self):
        assert not relation_path_mismatch(eats_src(), chi_tgt(), identity_alignment("toy", 3), 0.5,
                                          rel((1, 1), (3, 3)))

    def test_unalignable_subject(self):
        m = AlignmentMatrix("toy", {(2, 2): 0.9, (3, 3): 0.9})
        assert relation_path_mismatch(eats_src(), chi_tgt(), m, 0.5, rel((1, 1), (3, 3)))

    def test_inserted_node_on_path(self):
        tgt = make_tree("toy", ["ta", "chi", "ba", "pingguo"], [2, 0, 2, 3], ["nsubj", "root", "aux", "obj"])
        m = AlignmentMatrix("toy", {(1, 1): 0.9, (2, 2): 0.9, (3, 4): 0.9})
        assert relation_path_mismatch(eats_src(), tgt, m, 0.5, rel((1, 1), (3, 3)))


class TestDistances:
    def test_toy(self):
        assert subject_object_distances(eats_src(), rel((1, 1), (3, 3))) == (2, 2)
        assert dependency_path(eats_src(), 1, 3) == [1, 2, 3]

    def test_same_token(self):
        assert subject_object_distances(eats_src(), rel((2, 2), (2, 2))) == (0, 0)

    def test_chain(self):
        chain = make_tree("c", list("abcd"), [2, 3, 4, 0], ["dep", "dep", "dep", "root"])
        assert subject_object_distances(chain, rel((1, 1), (4, 4), "c")) == (3, 3)

    def test_span_head_is_token_with_external_parent(self):
        # "the big dog barks": span 1..3 is headed by "dog"
        tree = make_tree("d", ["the", "big", "dog", "barks"], [3, 3, 4, 0], ["det", "amod", "nsubj", "root"])
        assert span_head(tree, (1, 2, 3)) == 3
        assert subject_object_distances(tree, rel((1, 3), (4, 4), "d")) == (1, 1)

    @settings(max_examples=200, deadline=None)
    @given(st.integers(1, 10), st.integers(0, 2**32 - 1))
    def test_syntactic_distance_matches_bfs(self, n, seed):
        tree = random_tree(np.random.default_rng(seed), n)
        dist = bfs_all_pairs(tree)
        for a in range(1, n + 1):
            for b in range(1, n + 1):
                assert subject_object_distances(tree, rel((a, a), (b, b), "r")) == (abs(a - b), dist[a, b])


class TestMergeReport:
    def test_single(self):
        f = construct_forest(eats_src(), chi_tgt(), identity_alignment("toy", 3), 0.5)
        r = merge_report([f])
        assert (r.mean_sum, r.mean_merged, r.mean_forest_len, r.merge_rate) == (6, 3, 3, 0.5)

    def test_empty(self):
        with pytest.raises(ValueError):
            merge_report([])

    def test_theta_one_corpus(self):
        rng = np.random.default_rng(3)
        forests = [construct_forest(*random_pair(rng, 8), 1.0) for _ in range(20)]
        assert merge_report(forests).merge_rate == 0.0


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_rates_monotone_in_theta(seed):
    src, tgt, m = random_pair(np.random.default_rng(seed), 10)
    thetas = np.linspace(0.1, 0.9, 9)
    mis = [misaligned_word_rate(src, tgt, m, t) for t in thetas]
    assert mis == sorted(mis)
    if len(src) > 1:
        edges = [mismatched_edge_rate(src, tgt, m, t) for t in thetas]
        assert edges == sorted(edges)


@settings(max_examples=100, deadline=None)
@given(st.integers(2, 12), st.integers(0, 2**32 - 1), st.sampled_from([0.0, 0.5, 0.95]))
def test_identical_trees_show_no_bias(n, seed, theta):
    tree = random_tree(np.random.default_rng(seed), n)
    m = identity_alignment("r", n, score=1.0)
    assert misaligned_word_rate(tree, tree, m, theta) == 0.0
    assert mismatched_edge_rate(tree, tree, m, theta, coarse_labels=True) == 0.0
    assert not relation_path_mismatch(tree, tree, m, theta, rel((1, 1), (n, n), "r"))


def test_accumulators_merge_like_one_pass():
    rng = np.random.default_rng(11)
    pairs = [random_pair(rng, 9) for _ in range(30)]
    rels = [(rel((1, 1), (len(s), len(s)), "r"),) for s, _, _ in pairs]
    whole, left, right = (BiasAccumulator(0.4) for _ in range(3))
    for k, ((s, t, m), rs) in enumerate(zip(pairs, rels)):
        whole.add(s, t, m, rs)
        (left if k % 2 else right).add(s, t, m, rs)
    assert left.merge(right).report() == whole.report()
    d1, d2, dw = DistanceAccumulator(), DistanceAccumulator(), DistanceAccumulator()
    m1, m2, mw = MergeAccumulator(), MergeAccumulator(), MergeAccumulator()
    for k, ((s, t, m), (r,)) in enumerate(zip(pairs, rels)):
        f = construct_forest(s, t, m, 0.4)
        (d1 if k < 10 else d2).add(s, r)
        dw.add(s, r)
        (m1 if k < 10 else m2).add(f)
        mw.add(f)
    assert d1.merge(d2).report() == dw.report()
    assert m1.merge(m2).report() == mw.report()


def test_bias_report_absent_values():
    acc = BiasAccumulator(0.5)
    one = make_tree("x", ["a"], [0], ["root"])
    acc.add(one, one, identity_alignment("x", 1))
    report = acc.report()
    assert report.misaligned_word_rate == 0.0
    assert report.mismatched_edge_rate is None
    assert report.mismatched_path_rate is None


def test_format_table_aligns_columns():
    text = format_table([("a", {"x": 0.5, "longer_name": None, "n": 3})])
    lines = text.splitlines()
    assert lines[0] == "[a]"
    assert len({len(line) for line in lines[1:]}) == 1
    assert "0.5000" in text and "-" in lines[2]
