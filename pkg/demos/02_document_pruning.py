"""Index-time document token pruning with the three selection methods.

Each method keeps max(1, floor(n * alpha)) tokens per document.  First
keeps the prefix, IdfTop keeps the rarest tokens, AttentionTop keeps the
tokens other tokens attend to most; leading special tokens are always
retained first.
"""

import numpy as np

from latte import (
    DocEmbeddingSet,
    PruneConfig,
    PruneMethod,
    Vocabulary,
    build_idf_table,
    prune_doc,
    soft_match,
    synthetic_embed,
)
from latte.store import QueryEmbeddingSet

rng = np.random.default_rng(0)
vocab = Vocabulary(size=100, special_ids=frozenset({0}))

corpus = []
for doc_id in range(50):
    ids = np.concatenate([[0], rng.integers(5, 100, rng.integers(8, 20))])
    ids = ids.astype(np.uint32)
    corpus.append(DocEmbeddingSet(doc_id, ids, synthetic_embed(ids, 8, seed=1)))

idf = build_idf_table(corpus)
doc = corpus[0]
print(f"document 0 has {doc.n} tokens: {doc.token_ids.tolist()}")

for method in PruneMethod:
    cfg = PruneConfig(method=method, alpha=0.5)
    pruned = prune_doc(doc, cfg, idf=idf, vocab=vocab)
    print(f"\n{method.value:9s} alpha=0.5 keeps positions "
          f"{pruned.kept_positions.tolist()}")
    print(f"{'':9s} tokens {pruned.doc.token_ids.tolist()}")

# Pruning can only lower the score when embeddings are non-negative.
qids = doc.token_ids[1:4].copy()
query = QueryEmbeddingSet(0, qids, synthetic_embed(qids, 8, seed=1))
full = soft_match(query, doc).total
for alpha in (0.25, 0.5, 0.75, 1.0):
    cfg = PruneConfig(method=PruneMethod.ATTENTION_TOP, alpha=alpha)
    pruned = prune_doc(doc, cfg, vocab=vocab)
    print(f"alpha={alpha:4.2f}: kept {pruned.doc.n:2d}/{doc.n} tokens, "
          f"score {soft_match(query, pruned.doc).total:+.4f} "
          f"(full {full:+.4f})")
