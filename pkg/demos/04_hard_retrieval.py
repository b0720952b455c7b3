"""Hard retrieval over an inverted index of token embeddings.

Posting lists map each token id to the embeddings of its occurrences,
grouped by document.  Only documents sharing a token id with the query can
score, which keeps the scan sparse; the full variant adds the summary
vector product for those same documents.
"""

import numpy as np

from latte import (
    DocEmbeddingSet,
    MatchKind,
    QueryEmbeddingSet,
    build_hard_index,
    hard_retrieve,
    synthetic_embed,
)

rng = np.random.default_rng(11)


def summary(seed):
    return np.random.default_rng(seed).standard_normal(8).astype(np.float32)


corpus = []
for doc_id in range(300):
    ids = rng.integers(5, 2000, rng.integers(10, 30)).astype(np.uint32)
    corpus.append(DocEmbeddingSet(doc_id, ids, synthetic_embed(ids, 8, seed=3),
                                  summary_vector=summary(doc_id)))

index = build_hard_index(corpus)
n_postings = sum(p.n_entries for p in index.postings.values())
print(f"{len(index.postings)} distinct token ids, {n_postings} postings")

qids = corpus[0].token_ids[:4].copy()
query = QueryEmbeddingSet(0, qids, synthetic_embed(qids, 8, seed=3),
                          summary_vector=summary(9999))

ranked, stats = hard_retrieve(index, query, k=5)
print(f"\ntoken-only: {stats.candidates} of {len(corpus)} documents share "
      "a token id with the query")
for doc_id, score in ranked:
    print(f"  doc {doc_id:3d}  {score:+.4f}")

ranked, _ = hard_retrieve(index, query, k=5, kind=MatchKind.HARD_FULL)
print("\nwith the summary term:")
for doc_id, score in ranked:
    print(f"  doc {doc_id:3d}  {score:+.4f}")
