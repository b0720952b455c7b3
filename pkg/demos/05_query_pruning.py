"""Query token pruning: fewer candidate-generation probes, same scores.

Candidate generation only visits the selected query tokens, so the
candidate pool shrinks; the rerank still uses the full query, so any
document retrieved both ways gets exactly the same score.
"""

import numpy as np

from latte import (
    DocEmbeddingSet,
    QtpConfig,
    QtpMethod,
    QueryEmbeddingSet,
    Vocabulary,
    build_idf_table,
    build_soft_index,
    retrieve,
    synthetic_embed,
)

rng = np.random.default_rng(23)
vocab = Vocabulary(size=500, special_ids=frozenset({0, 1}))
corpus = []
for doc_id in range(400):
    ids = rng.integers(5, 500, rng.integers(10, 30)).astype(np.uint32)
    corpus.append(DocEmbeddingSet(doc_id, ids, synthetic_embed(ids, 8, seed=4)))
idf = build_idf_table(corpus)
index = build_soft_index(corpus, seed=0)

qids = rng.integers(5, 500, 8).astype(np.uint32)
query = QueryEmbeddingSet(0, qids, synthetic_embed(qids, 8, seed=4))

full, full_stats = retrieve(index, query, k=10)
print(f"full query ({full_stats.selected_query_tokens} tokens): "
      f"{full_stats.candidates} candidates")

for method in (QtpMethod.IDF_TOP, QtpMethod.ATTENTION):
    qtp = QtpConfig(method=method, idf_keep=3, att_k_min=2, att_k_max=2)
    pruned, stats = retrieve(index, query, k=10, qtp=qtp, idf=idf, vocab=vocab)
    shared = [d for d, _ in pruned if d in dict(full)]
    same = all(dict(full)[d] == dict(pruned)[d] for d in shared)
    print(f"{method.value:9s}: {stats.selected_query_tokens} tokens, "
          f"{stats.candidates} candidates, "
          f"scores identical on {len(shared)} shared docs: {same}")
