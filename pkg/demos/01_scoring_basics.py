"""Soft vs. hard sum-of-max scoring on a toy query/document pair.

Soft matching lets every query token pick its best document token by inner
product; hard matching only allows document tokens with the same token id,
and the "full" variant adds a summary-vector inner product on top.
"""

import numpy as np

from latte import (
    DocEmbeddingSet,
    MatchKind,
    QueryEmbeddingSet,
    hard_match,
    soft_match,
    synthetic_embed,
)


def build(ids, seed=0, record_id=0, cls=False, kind=DocEmbeddingSet):
    ids = np.asarray(ids, dtype=np.uint32)
    summary = None
    if cls:
        summary = np.random.default_rng(record_id).standard_normal(8).astype(np.float32)
    return kind(record_id, ids, synthetic_embed(ids, h=8, seed=seed),
                summary_vector=summary)


doc = build([50, 60, 70, 80], cls=True)
query = build([60, 99], record_id=1, cls=True, kind=QueryEmbeddingSet)

print("document tokens:", doc.token_ids.tolist())
print("query tokens:   ", query.token_ids.tolist())

trace = soft_match(query, doc)
print("\nsoft matching — every query token matches something:")
for i in range(query.m):
    print(f"  query token {query.token_ids[i]:3d} -> doc position "
          f"{trace.positions[i]} (token {doc.token_ids[trace.positions[i]]}), "
          f"partial {trace.partials[i]:+.4f}")
print(f"  total {trace.total:+.4f}")

trace = hard_match(query, doc)
print("\nhard matching — token 99 has no same-id partner, contributes 0:")
for i in range(query.m):
    where = ("unmatched" if trace.positions[i] < 0
             else f"doc position {trace.positions[i]}")
    print(f"  query token {query.token_ids[i]:3d} -> {where}, "
          f"partial {trace.partials[i]:+.4f}")
print(f"  total {trace.total:+.4f}")

trace = hard_match(query, doc, MatchKind.HARD_FULL)
print(f"\nhard-full adds the summary inner product {trace.summary_score:+.4f} "
      f"-> total {trace.total:+.4f}")
