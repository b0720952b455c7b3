import numpy as np
import pytest

from latte.store import DocEmbeddingSet, QueryEmbeddingSet, Vocabulary, synthetic_embed

VOCAB_SIZE = 200
SPECIAL_IDS = frozenset({0, 1, 2})      # sequence-start markers / padding
STOPWORD_IDS = frozenset(range(3, 13))


@pytest.fixture
def vocab():
    return make_vocab()


def make_vocab(size=VOCAB_SIZE):
    return Vocabulary(size=size, special_ids=SPECIAL_IDS, stopword_ids=STOPWORD_IDS)


def make_doc(doc_id, token_ids, h=8, seed=0, nonnegative=False, summary=False):
    token_ids = np.asarray(token_ids, dtype=np.uint32)
    emb = synthetic_embed(token_ids, h, seed, nonnegative=nonnegative)
    summary_vec = None
    if summary:
        rng = np.random.default_rng([seed, 7, doc_id])
        summary_vec = rng.standard_normal(h).astype(np.float32)
        if nonnegative:
            summary_vec = np.abs(summary_vec)
    return DocEmbeddingSet(doc_id=doc_id, token_ids=token_ids, embeddings=emb,
                           summary_vector=summary_vec)


def make_query(query_id, token_ids, h=8, seed=0, nonnegative=False, summary=False):
    token_ids = np.asarray(token_ids, dtype=np.uint32)
    emb = synthetic_embed(token_ids, h, seed, nonnegative=nonnegative)
    summary_vec = None
    if summary:
        rng = np.random.default_rng([seed, 11, query_id])
        summary_vec = rng.standard_normal(h).astype(np.float32)
        if nonnegative:
            summary_vec = np.abs(summary_vec)
    return QueryEmbeddingSet(query_id=query_id, token_ids=token_ids, embeddings=emb,
                             summary_vector=summary_vec)


def make_corpus(n_docs, seed, h=8, min_len=5, max_len=40, vocab_size=VOCAB_SIZE,
                nonnegative=False, summary=False, lead_special=0):
    """Seeded random corpus of synthetic documents.

    lead_special prepends that many special-token markers (ids 0, 1, ...)
    so special-token retention is exercised.
    """
    rng = np.random.default_rng(seed)
    corpus = []
    for doc_id in range(n_docs):
        n = int(rng.integers(min_len, max_len + 1))
        body = rng.integers(13, vocab_size, size=n)
        tokens = np.concatenate([np.arange(lead_special), body]) if lead_special else body
        corpus.append(make_doc(doc_id, tokens, h=h, seed=seed,
                               nonnegative=nonnegative, summary=summary))
    return corpus


def make_queries(n_queries, seed, h=8, min_len=3, max_len=8, vocab_size=VOCAB_SIZE,
                 nonnegative=False, summary=False):
    rng = np.random.default_rng(seed + 1_000_003)
    queries = []
    for qid in range(n_queries):
        m = int(rng.integers(min_len, max_len + 1))
        tokens = rng.integers(13, vocab_size, size=m)
        queries.append(make_query(qid, tokens, h=h, seed=seed,
                                  nonnegative=nonnegative, summary=summary))
    return queries
