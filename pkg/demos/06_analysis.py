"""Where does the relevance score come from?

Bins document tokens by position (or IDF rank) and reports, per bin, the
fraction of query tokens whose maximum lands there (indices contribution)
and the fraction of the score mass contributed (score contribution).
Split views separate co-occurring tokens from soft-only matches and stop
words from content words.
"""

import numpy as np

from latte import (
    BinScheme,
    DocEmbeddingSet,
    QueryEmbeddingSet,
    SplitKind,
    Vocabulary,
    attention_histogram,
    contribution_metrics,
    split_contribution,
    synthetic_embed,
)

rng = np.random.default_rng(31)
vocab = Vocabulary(size=500, special_ids=frozenset({0}),
                   stopword_ids=frozenset(range(1, 20)))

pairs = []
for i in range(200):
    ids = rng.integers(1, 500, rng.integers(20, 40)).astype(np.uint32)
    doc = DocEmbeddingSet(i, ids, synthetic_embed(ids, 8, seed=5))
    qids = np.concatenate([ids[:3], rng.integers(1, 500, 3)]).astype(np.uint32)
    pairs.append((QueryEmbeddingSet(i, qids, synthetic_embed(qids, 8, seed=5)),
                  doc))

report = contribution_metrics(pairs, BinScheme.POSITION, vocab=vocab)
print("position bin   p_indice   p_score   (uniform baseline "
      f"{report.hypothetical:.2f})")
for b in range(report.n_bins):
    bar = "#" * int(50 * report.p_indice[b])
    print(f"  {b:2d}          {report.p_indice[b]:7.3f}  {report.p_score[b]:7.3f}  {bar}")

co, other = split_contribution(pairs, SplitKind.CO_OCCURRENCE, vocab)
print(f"\nco-occurring tokens carry {co:.1%} of the score, "
      f"soft-only matches {other:.1%}")
nonstop, stop = split_contribution(pairs, SplitKind.STOPWORD, vocab)
print(f"stop words carry {stop:.1%}, content words {nonstop:.1%}")

counts = attention_histogram([d for _, d in pairs])
print("\nself-attention weight histogram (10 equal-width bins over [0, 1]):")
print("  " + "  ".join(f"{c}" for c in counts))
