import math

import numpy as np
import pytest

from latte.evaluation import (
    LatencyReport,
    measure_latency,
    mrr_at_k,
    ndcg_at_k,
    read_qrels,
    read_run,
    recall_at_k,
    tost_equivalence,
    write_run,
)


def run_of(qid, doc_ids, start_score=100.0):
    return {qid: [(d, start_score - i) for i, d in enumerate(doc_ids)]}


def qrels_of(qid, grades):
    return {qid: dict(grades)}


def test_mrr_rank_one():
    assert mrr_at_k(run_of("q", ["a", "b"]), qrels_of("q", {"a": 1})) == 1.0


def test_mrr_rank_three():
    run = run_of("q", ["x", "y", "a"])
    assert mrr_at_k(run, qrels_of("q", {"a": 1})) == pytest.approx(1 / 3)


def test_mrr_cutoff():
    run = run_of("q", [f"d{i}" for i in range(10)] + ["a"])
    assert mrr_at_k(run, qrels_of("q", {"a": 1}), k=10) == 0.0


def test_mrr_skips_unjudged_queries():
    run = {**run_of("q1", ["a"]), **run_of("q2", ["b"])}
    assert mrr_at_k(run, qrels_of("q1", {"a": 1})) == 1.0


def test_recall_single_relevant_at_rank_50():
    run = run_of("q", [f"d{i}" for i in range(49)] + ["a"])
    assert recall_at_k(run, qrels_of("q", {"a": 1}), k=100) == 1.0


def test_recall_half():
    run = run_of("q", ["a"] + [f"d{i}" for i in range(120)])
    qrels = qrels_of("q", {"a": 1, "z": 1})
    assert recall_at_k(run, qrels, k=100) == 0.5


def test_recall_none_retrieved():
    run = run_of("q", ["d1", "d2"])
    assert recall_at_k(run, qrels_of("q", {"a": 1}), k=100) == 0.0


def test_recall_excludes_queries_without_relevant():
    run = {**run_of("q1", ["a"]), **run_of("q2", ["b"])}
    qrels = {"q1": {"a": 1}, "q2": {"b": 0}}
    assert recall_at_k(run, qrels, k=10) == 1.0


def test_ndcg_perfect_single():
    assert ndcg_at_k(run_of("q", ["a", "b"]), qrels_of("q", {"a": 1})) == 1.0


def test_ndcg_rank_two():
    run = run_of("q", ["x", "a"])
    assert ndcg_at_k(run, qrels_of("q", {"a": 1})) == pytest.approx(1 / math.log2(3))


def test_ndcg_perfect_graded_ordering():
    run = run_of("q", ["a", "b", "c"])
    qrels = qrels_of("q", {"a": 3, "b": 2, "c": 1})
    assert ndcg_at_k(run, qrels) == pytest.approx(1.0)


def test_run_file_roundtrip(tmp_path):
    run = {"q1": [("d3", 1.25), ("d9", 1.0)], "q2": [("d1", 0.5)]}
    path = tmp_path / "run.trec"
    write_run(path, run)
    loaded = read_run(path)
    path2 = tmp_path / "run2.trec"
    write_run(path2, loaded)
    assert path.read_bytes() == path2.read_bytes()
    assert loaded["q1"][0] == ("d3", 1.25)


def test_read_run_rejects_increasing_scores(tmp_path):
    path = tmp_path / "bad.trec"
    path.write_text("q1 Q0 d1 1 0.5 t\nq1 Q0 d2 2 0.9 t\n")
    with pytest.raises(ValueError, match="non-increasing"):
        read_run(path)


def test_read_qrels(tmp_path):
    path = tmp_path / "qrels.tsv"
    path.write_text("q1\t0\td1\t2\nq1\t0\td2\t0\nq2\t0\td9\t1\n")
    qrels = read_qrels(path)
    assert qrels == {"q1": {"d1": 2, "d2": 0}, "q2": {"d9": 1}}


def test_tost_identical_with_jitter_is_equivalent():
    rng = np.random.default_rng(1)
    a = rng.uniform(0, 1, 100)
    b = a + rng.normal(0, 1e-6, 100)
    assert tost_equivalence(a, b).equivalent


def test_tost_large_difference_not_equivalent():
    rng = np.random.default_rng(2)
    a = rng.uniform(0.5, 0.6, 50)
    b = a - 0.2
    assert not tost_equivalence(a, b).equivalent


def test_tost_symmetry():
    rng = np.random.default_rng(3)
    a = rng.uniform(0, 1, 60)
    b = a + rng.normal(0.01, 0.02, 60)
    assert tost_equivalence(a, b).equivalent == tost_equivalence(b, a).equivalent


def test_tost_zero_variance_flagged():
    a = np.full(10, 0.4)
    b = np.full(10, 0.41)
    result = tost_equivalence(a, b)
    assert result.zero_variance and result.equivalent
    result = tost_equivalence(a, np.full(10, 0.6))
    assert result.zero_variance and not result.equivalent


def _t_cdf_reference(x, df):
    # Student-t CDF via mpmath's incomplete beta, independent of the
    # scipy.stats.t implementation used by the library.
    import mpmath
    p = float(0.5 * mpmath.betainc(df / 2.0, 0.5, 0, df / (df + x * x),
                                   regularized=True))
    return p if x <= 0 else 1.0 - p


def _tost_reference(a, b, delta):
    d = np.asarray(a, dtype=float) - np.asarray(b, dtype=float)
    n = len(d)
    se = d.std(ddof=1) / math.sqrt(n)
    p_lower = 1.0 - _t_cdf_reference((d.mean() + delta) / se, n - 1)
    p_upper = _t_cdf_reference((d.mean() - delta) / se, n - 1)
    return p_lower, p_upper


@pytest.mark.parametrize("seed,n,shift,sd", [
    (11, 50, 0.01, 0.03),
    (12, 30, -0.02, 0.05),
    (13, 100, 0.0, 0.02),
    (14, 10, 0.04, 0.01),
    (15, 200, 0.06, 0.10),
])
def test_tost_p_values_match_reference(seed, n, shift, sd):
    rng = np.random.default_rng(seed)
    a = rng.uniform(0, 1, n)
    b = a - shift + rng.normal(0, sd, n)
    result = tost_equivalence(a, b)
    ref_lower, ref_upper = _tost_reference(a, b, 0.05)
    assert result.p_lower == pytest.approx(ref_lower, abs=1e-6)
    assert result.p_upper == pytest.approx(ref_upper, abs=1e-6)


def test_tost_rejects_short_or_mismatched():
    with pytest.raises(ValueError):
        tost_equivalence([1.0], [1.0])
    with pytest.raises(ValueError):
        tost_equivalence([1.0, 2.0], [1.0])


class _FakeStats:
    def __init__(self, candidates):
        self.candidates = candidates


def test_measure_latency_discards_warmup():
    calls = []

    def fn(q):
        calls.append(q)
        return [], _FakeStats(candidates=q * 10)

    report = measure_latency(fn, [1, 2, 3], repetitions=3)
    assert len(calls) == 9
    assert len(report.per_query_ms) == 6     # warm-up excluded
    assert report.ard == pytest.approx(20.0)
    assert report.mean_ms >= 0 and report.p95_ms >= report.p50_ms


def test_measure_latency_needs_two_repetitions():
    with pytest.raises(ValueError):
        measure_latency(lambda q: ([], _FakeStats(0)), [1], repetitions=1)
