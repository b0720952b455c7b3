import numpy as np
import pytest

from latte.doc_pruning import PruneConfig, PruneMethod, prune_corpus
from latte.query_pruning import QtpConfig, QtpMethod
from latte.scoring import MatchKind, brute_force_rank
from latte.soft_index import (
    build_soft_index,
    candidate_generation,
    load_soft_index,
    retrieve,
    save_soft_index,
)
from latte.store import synthetic_embed
from conftest import make_corpus, make_doc, make_queries, make_query


def exhaustive(index):
    return dict(nprobe=index.c, k_prime=index.n_slots)


def test_single_cluster_centroid_is_mean():
    corpus = make_corpus(5, seed=1)
    index = build_soft_index(corpus, c=1, train_fraction=1.0, seed=0)
    np.testing.assert_allclose(index.centroids[0], index.arena.mean(axis=0), atol=1e-5)
    assert len(index.cluster_slots[0]) == index.n_slots


def test_two_separated_clouds_pure_assignment():
    near = make_doc(0, [20] * 10, h=4, seed=1)
    far = make_doc(1, [30] * 10, h=4, seed=1)
    far.embeddings += 100.0   # push the second cloud far away
    index = build_soft_index([near, far], c=2, train_fraction=1.0, seed=0)
    for slots in index.cluster_slots:
        owners = set(int(d) for d in index.slot_doc_ids[slots])
        assert len(owners) == 1


def test_rebuild_deterministic():
    corpus = make_corpus(30, seed=7)
    a = build_soft_index(corpus, seed=42)
    b = build_soft_index(corpus, seed=42)
    np.testing.assert_array_equal(a.centroids, b.centroids)
    for sa, sb in zip(a.cluster_slots, b.cluster_slots):
        np.testing.assert_array_equal(sa, sb)


def test_fewer_tokens_than_clusters_rejected():
    with pytest.raises(ValueError):
        build_soft_index([make_doc(0, [20, 21])], c=10)


def test_candidate_generation_exhaustive_matches_brute_force_per_token():
    corpus = make_corpus(40, seed=9)
    index = build_soft_index(corpus, seed=0)
    Q = make_query(0, [20, 55, 80], h=8, seed=9)
    k_prime = 5
    candidates, _ = candidate_generation(index, Q, k_prime=k_prime, nprobe=index.c)
    expected = set()
    for i in range(Q.m):
        sims = index.arena @ Q.embeddings[i]
        top = np.argsort(-sims, kind="stable")[:k_prime]
        expected |= set(int(d) for d in index.slot_doc_ids[top])
    assert candidates == expected


def test_candidate_generation_saturates_to_all_docs():
    corpus = make_corpus(15, seed=4)
    index = build_soft_index(corpus, seed=0)
    Q = make_query(0, [20], h=8, seed=4)
    candidates, _ = candidate_generation(index, Q, **exhaustive(index))
    assert candidates == {d.doc_id for d in corpus}


def test_single_doc_corpus():
    corpus = [make_doc(3, [20, 21, 22])]
    index = build_soft_index(corpus, c=1, seed=0)
    Q = make_query(0, [20], h=8)
    candidates, _ = candidate_generation(index, Q, k_prime=1)
    assert candidates == {3}
    ranked, _ = retrieve(index, Q, k=5, **exhaustive(index))
    assert ranked[0][0] == 3


def test_exhaustive_retrieve_equals_oracle():
    corpus = make_corpus(50, seed=13)
    index = build_soft_index(corpus, seed=1)
    for Q in make_queries(5, seed=13):
        ranked, _ = retrieve(index, Q, k=len(corpus), **exhaustive(index))
        oracle = brute_force_rank(Q, corpus, MatchKind.SOFT, k=len(corpus))
        assert [d for d, _ in ranked] == [d for d, _ in oracle]
        for (_, a), (_, b) in zip(ranked, oracle):
            assert a == pytest.approx(b, rel=1e-4)


def test_candidate_monotonicity_in_nprobe_and_k_prime():
    corpus = make_corpus(40, seed=21)
    index = build_soft_index(corpus, c=16, seed=2)
    Q = make_query(0, [20, 40, 60], h=8, seed=21)
    prev = set()
    for nprobe in (1, 4, 16):
        cand, _ = candidate_generation(index, Q, k_prime=8, nprobe=nprobe)
        assert prev <= cand
        prev = cand
    prev = set()
    for k_prime in (1, 8, 64, index.n_slots):
        cand, _ = candidate_generation(index, Q, k_prime=k_prime, nprobe=index.c)
        assert prev <= cand
        prev = cand


def test_pruned_index_matches_oracle_on_pruned_corpus():
    corpus = make_corpus(40, seed=33)
    pruned, _ = prune_corpus(corpus, PruneConfig(method=PruneMethod.FIRST, alpha=0.5))
    index = build_soft_index(pruned, seed=3)
    for Q in make_queries(3, seed=33):
        ranked, _ = retrieve(index, Q, k=10, **exhaustive(index))
        oracle = brute_force_rank(Q, pruned, MatchKind.SOFT, k=10)
        assert [d for d, _ in ranked] == [d for d, _ in oracle]


def test_qtp_rerank_scores_identical():
    corpus = make_corpus(60, seed=44)
    index = build_soft_index(corpus, c=16, seed=4)
    Q = make_query(0, list(range(20, 28)), h=8, seed=44)
    full, full_stats = retrieve(index, Q, k=60, k_prime=16, nprobe=4)
    qtp = QtpConfig(method=QtpMethod.ATTENTION, att_k_min=2, att_k_max=2)
    pruned, qtp_stats = retrieve(index, Q, k=60, qtp=qtp, k_prime=16, nprobe=4)
    assert qtp_stats.candidates <= full_stats.candidates
    full_scores = dict(full)
    for doc_id, score in pruned:
        assert score == full_scores[doc_id]   # bit-identical rerank


def test_retrieve_stats_populated():
    corpus = make_corpus(20, seed=5)
    index = build_soft_index(corpus, seed=5)
    Q = make_query(0, [20, 21], h=8, seed=5)
    ranked, stats = retrieve(index, Q, k=5, **exhaustive(index))
    assert stats.candidates == 20
    assert stats.latency_ms > 0
    assert stats.selected_query_tokens == 2


def test_index_directory_roundtrip(tmp_path):
    corpus = make_corpus(25, seed=6)
    index = build_soft_index(corpus, seed=6)
    d1, d2 = tmp_path / "a", tmp_path / "b"
    save_soft_index(index, d1)
    reloaded = load_soft_index(d1)
    save_soft_index(reloaded, d2)
    for name in ("meta.json", "centroids.bin", "arena.bin", "slots.bin"):
        assert (d1 / name).read_bytes() == (d2 / name).read_bytes()
    reloaded.attach_corpus(corpus)
    Q = make_query(0, [20, 30], h=8, seed=6)
    a, _ = retrieve(index, Q, k=10, **exhaustive(index))
    b, _ = retrieve(reloaded, Q, k=10, **exhaustive(index))
    assert a == b
