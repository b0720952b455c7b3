import numpy as np
import pytest

from latte.doc_pruning import attention_importance
from latte.query_pruning import QtpConfig, QtpMethod, select_query_tokens
from latte.store import DocEmbeddingSet, IdfTable
from conftest import make_query, make_vocab


def test_none_keeps_everything():
    Q = make_query(0, [20, 21, 22, 23, 24])
    positions = select_query_tokens(Q, QtpConfig(method=QtpMethod.NONE))
    assert list(positions) == [0, 1, 2, 3, 4]


def test_idf_top_selects_largest_weights():
    Q = make_query(0, [20, 21, 22, 23])
    idf = IdfTable({20: 1.0, 21: 4.0, 22: 2.0, 23: 3.0}, corpus_size=10)
    cfg = QtpConfig(method=QtpMethod.IDF_TOP, idf_keep=2)
    positions = select_query_tokens(Q, cfg, idf=idf)
    assert list(positions) == [1, 3]


def test_idf_top_tie_break_earlier():
    Q = make_query(0, [20, 21, 22])
    idf = IdfTable({20: 1.0, 21: 1.0, 22: 1.0}, corpus_size=10)
    cfg = QtpConfig(method=QtpMethod.IDF_TOP, idf_keep=2)
    assert list(select_query_tokens(Q, cfg, idf=idf)) == [0, 1]


def test_attention_union_matches_sort_oracle():
    Q = make_query(0, [20, 21, 22, 23, 24, 25, 26, 27], h=8, seed=13)
    proxy = DocEmbeddingSet(0, Q.token_ids, Q.embeddings)
    importance = attention_importance(proxy)
    order = np.argsort(importance, kind="stable")
    expected = sorted(set(order[:3]) | set(order[::-1][:3]))
    cfg = QtpConfig(method=QtpMethod.ATTENTION, att_k_min=3, att_k_max=3)
    assert list(select_query_tokens(Q, cfg)) == expected


def test_attention_union_cardinality():
    Q = make_query(0, list(range(20, 30)), h=8, seed=19)
    cfg = QtpConfig(method=QtpMethod.ATTENTION, att_k_min=3, att_k_max=3)
    chosen = select_query_tokens(Q, cfg)
    assert len(chosen) <= 6
    assert len(chosen) >= 3


def test_special_positions_excluded(vocab):
    Q = make_query(0, [0, 1, 20, 21, 22])   # leading special/padding markers
    idf = IdfTable({0: 99.0, 1: 99.0, 20: 1.0, 21: 2.0, 22: 3.0}, corpus_size=10)
    cfg = QtpConfig(method=QtpMethod.IDF_TOP, idf_keep=2)
    positions = select_query_tokens(Q, cfg, idf=idf, vocab=vocab)
    assert list(positions) == [3, 4]


def test_all_special_falls_back_with_warning(vocab):
    Q = make_query(0, [0, 1, 2])
    cfg = QtpConfig(method=QtpMethod.ATTENTION)
    with pytest.warns(UserWarning, match="pool empty"):
        positions = select_query_tokens(Q, cfg, vocab=vocab)
    assert list(positions) == [0, 1, 2]


def test_selection_subset_of_full():
    Q = make_query(0, list(range(20, 28)), h=8, seed=3)
    full = set(select_query_tokens(Q, QtpConfig(method=QtpMethod.NONE)))
    cfg = QtpConfig(method=QtpMethod.ATTENTION, att_k_min=2, att_k_max=2)
    assert set(select_query_tokens(Q, cfg)) <= full


def test_negative_counts_rejected():
    with pytest.raises(ValueError):
        QtpConfig(method=QtpMethod.IDF_TOP, idf_keep=-1)
