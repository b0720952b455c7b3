import numpy as np
import pytest

from latte.scoring import MatchKind, brute_force_rank, hard_match, soft_match
from latte.store import DocEmbeddingSet, QueryEmbeddingSet
from conftest import make_corpus, make_doc, make_queries, make_query


def raw_doc(doc_id, token_ids, rows, summary=None):
    return DocEmbeddingSet(doc_id, np.array(token_ids, dtype=np.uint32),
                           np.array(rows, dtype=np.float32),
                           None if summary is None else np.array(summary, dtype=np.float32))


def raw_query(token_ids, rows, summary=None):
    return QueryEmbeddingSet(0, np.array(token_ids, dtype=np.uint32),
                             np.array(rows, dtype=np.float32),
                             None if summary is None else np.array(summary, dtype=np.float32))


def test_soft_match_orthonormal_hits():
    Q = raw_query([1, 2], [[1, 0], [0, 1]])
    D = raw_doc(0, [1, 2, 3], [[1, 0], [0, 1], [0.5, 0.5]])
    trace = soft_match(Q, D)
    assert trace.total == pytest.approx(2.0)
    assert list(trace.positions) == [0, 1]


def test_soft_match_single_row():
    Q = raw_query([1], [[1, 0]])
    D = raw_doc(0, [2, 3], [[0.3, 0.4], [0.6, 0.0]])
    trace = soft_match(Q, D)
    assert trace.total == pytest.approx(0.6)
    assert trace.positions[0] == 1


def test_soft_match_against_double_loop_oracle():
    rng = np.random.default_rng(11)
    for _ in range(50):
        m, n, h = rng.integers(1, 5), rng.integers(1, 7), rng.integers(2, 4)
        Q = raw_query(rng.integers(0, 9, m), rng.standard_normal((m, h)))
        D = raw_doc(0, rng.integers(0, 9, n), rng.standard_normal((n, h)))
        trace = soft_match(Q, D)
        expected = 0.0
        for i in range(m):
            expected += max(float(np.dot(Q.embeddings[i], D.embeddings[j])) for j in range(n))
        assert trace.total == pytest.approx(expected, rel=1e-5)


def test_soft_match_dimension_mismatch():
    Q = raw_query([1], [[1, 0, 0]])
    D = raw_doc(0, [1], [[1, 0]])
    with pytest.raises(ValueError, match="dimension"):
        soft_match(Q, D)


def test_soft_match_tie_breaks_to_smallest_position():
    Q = raw_query([1], [[1, 0]])
    D = raw_doc(0, [1, 1], [[1, 0], [1, 0]])
    assert soft_match(Q, D).positions[0] == 0


def test_hard_match_admissible_set_restriction():
    Q = raw_query([7], [[1, 0]])
    D = raw_doc(0, [7, 9], [[0.2, 0], [1, 0]])
    trace = hard_match(Q, D)
    assert trace.total == pytest.approx(0.2)
    assert trace.positions[0] == 0


def test_hard_match_no_overlap_scores_zero():
    Q = raw_query([1, 2], [[1, 0], [0, 1]])
    D = raw_doc(0, [3, 4], [[1, 0], [0, 1]])
    trace = hard_match(Q, D)
    assert trace.total == 0.0
    assert list(trace.positions) == [-1, -1]


def test_hard_full_adds_summary_term():
    Q = raw_query([7], [[1, 0]], summary=[1, 0, 0])
    D = raw_doc(0, [7], [[0.5, 0]], summary=[1, 0, 0])
    tok = hard_match(Q, D, MatchKind.HARD_TOKEN)
    full = hard_match(Q, D, MatchKind.HARD_FULL)
    assert full.total == pytest.approx(tok.total + 1.0)


def test_hard_full_without_summaries_rejected():
    Q = raw_query([7], [[1, 0]])
    D = raw_doc(0, [7], [[1, 0]])
    with pytest.raises(ValueError, match="summary"):
        hard_match(Q, D, MatchKind.HARD_FULL)


def test_hard_match_repeated_query_tokens_each_contribute():
    Q = raw_query([7, 7], [[1, 0], [0, 1]])
    D = raw_doc(0, [7], [[0.5, 0.25]])
    trace = hard_match(Q, D)
    assert trace.total == pytest.approx(0.75)


def test_trace_total_is_sum_of_partials():
    corpus = make_corpus(20, seed=8, summary=True)
    for Q in make_queries(5, seed=8, summary=True):
        for D in corpus[:5]:
            for kind in MatchKind:
                if kind is MatchKind.SOFT:
                    trace = soft_match(Q, D)
                else:
                    trace = hard_match(Q, D, kind)
                assert trace.total == pytest.approx(
                    float(np.sum(trace.partials, dtype=np.float64)) + trace.summary_score,
                    abs=1e-5)


def test_hard_below_soft_on_nonnegative_embeddings():
    corpus = make_corpus(20, seed=2, nonnegative=True)
    for Q in make_queries(10, seed=2, nonnegative=True):
        for D in corpus:
            assert hard_match(Q, D).total <= soft_match(Q, D).total + 1e-5


def test_permutation_invariance():
    rng = np.random.default_rng(3)
    D = make_doc(0, rng.integers(13, 60, 12), h=8, seed=3)
    Q = make_query(0, rng.integers(13, 60, 4), h=8, seed=3)
    perm = rng.permutation(12)
    D2 = DocEmbeddingSet(0, D.token_ids[perm], D.embeddings[perm])
    t1, t2 = soft_match(Q, D), soft_match(Q, D2)
    assert t1.total == pytest.approx(t2.total, rel=1e-6)
    inverse = np.argsort(perm)
    np.testing.assert_array_equal(inverse[t1.positions], t2.positions)


def test_query_token_additivity():
    Q = make_query(0, [20, 21, 22, 23], h=8, seed=5)
    D = make_doc(0, [20, 30, 40, 50, 60], h=8, seed=5)
    full = soft_match(Q, D)
    dropped = QueryEmbeddingSet(0, Q.token_ids[1:], Q.embeddings[1:])
    assert soft_match(dropped, D).total == pytest.approx(
        full.total - float(full.partials[0]), abs=1e-5)


def test_brute_force_single_doc():
    corpus = [make_doc(5, [20, 21], h=8)]
    Q = make_query(0, [20], h=8)
    assert brute_force_rank(Q, corpus, MatchKind.SOFT, k=3)[0][0] == 5


def test_brute_force_dominance():
    Q = raw_query([1], [[1, 0]])
    weak = raw_doc(0, [1], [[0.2, 0]])
    strong = raw_doc(1, [1], [[0.9, 0]])
    ranked = brute_force_rank(Q, [weak, strong], MatchKind.SOFT, k=2)
    assert [d for d, _ in ranked] == [1, 0]


def test_brute_force_tie_breaks_ascending_doc_id():
    Q = raw_query([1], [[1, 0]])
    docs = [raw_doc(i, [1], [[0.5, 0]]) for i in (9, 3, 7)]
    ranked = brute_force_rank(Q, docs, MatchKind.SOFT, k=3)
    assert [d for d, _ in ranked] == [3, 7, 9]
