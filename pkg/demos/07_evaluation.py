"""Run files, ranking metrics, and paired equivalence testing.

Writes two TREC-style run files for the same queries, scores them against
qrels with MRR@10 / Recall@100 / NDCG@10, and asks whether the two systems
are statistically equivalent within +/-0.05 using a paired TOST.
"""

import tempfile
from pathlib import Path

import numpy as np

from latte import (
    mrr_at_k,
    ndcg_at_k,
    per_query_mrr,
    read_run,
    recall_at_k,
    tost_equivalence,
    write_run,
)

rng = np.random.default_rng(41)

qrels = {f"q{i}": {f"d{i}": 1} for i in range(60)}
run_a, run_b = {}, {}
for i in range(60):
    docs = [f"d{j}" for j in rng.permutation(60)[:20]]
    if f"d{i}" not in docs:
        docs[rng.integers(0, 20)] = f"d{i}"
    run_a[f"q{i}"] = [(d, 20.0 - r) for r, d in enumerate(docs)]
    # system B: same ranking with the relevant doc occasionally demoted a step
    if rng.random() < 0.3 and docs.index(f"d{i}") < 19:
        k = docs.index(f"d{i}")
        docs[k], docs[k + 1] = docs[k + 1], docs[k]
    run_b[f"q{i}"] = [(d, 20.0 - r) for r, d in enumerate(docs)]

with tempfile.TemporaryDirectory() as tmp:
    path = Path(tmp) / "a.trec"
    write_run(path, run_a, tag="systemA")
    print(f"run file round-trips: {read_run(path) == run_a}")

for name, run in (("system A", run_a), ("system B", run_b)):
    print(f"{name}: MRR@10 {mrr_at_k(run, qrels):.4f}  "
          f"Recall@100 {recall_at_k(run, qrels, 100):.4f}  "
          f"NDCG@10 {ndcg_at_k(run, qrels):.4f}")

a = per_query_mrr(run_a, qrels, 10)
b = per_query_mrr(run_b, qrels, 10)
shared = sorted(set(a) & set(b))
result = tost_equivalence([a[q] for q in shared], [b[q] for q in shared])
print(f"\nTOST on per-query MRR@10: mean diff {result.mean_diff:+.4f}, "
      f"p_lower={result.p_lower:.4g}, p_upper={result.p_upper:.4g}")
print("verdict:", "equivalent within +/-0.05"
      if result.equivalent else "not shown equivalent")
