"""Matching-mechanism instrumentation.

Bins the non-special tokens of each document by relative position or IDF
value and measures, over a set of positive query-document pairs, what
fraction of max-operation selections (indices contribution) and of matched
score mass (score contribution) each bin receives.  Also provides the
co-occurrence / stop-word score split and the histogram of self-attention
values used to compare representation compactness across models.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np
from scipy.special import softmax

from latte.doc_pruning import attention_importance  # noqa: F401  (shared kernel)
from latte.scoring import MatchKind, score_pair
from latte.store import DocEmbeddingSet, IdfTable, QueryEmbeddingSet, Vocabulary


class BinScheme(enum.Enum):
    POSITION = "position"
    IDF = "idf"


class SplitKind(enum.Enum):
    CO_OCCURRENCE = "co_occurrence"
    STOPWORD = "stopword"


@dataclass
class BinPartition:
    scheme: BinScheme
    n_bins: int
    assignment: np.ndarray   # per position: bin index, -1 for special tokens


@dataclass
class ContributionReport:
    p_indice: np.ndarray
    p_score: np.ndarray
    n_bins: int
    pair_count: int
    degenerate: bool = False

    @property
    def hypothetical(self) -> float:
        return 1.0 / self.n_bins


def partition_bins(doc: DocEmbeddingSet, scheme: BinScheme,
                   idf: IdfTable | None = None, vocab: Vocabulary | None = None,
                   n_bins: int = 10) -> BinPartition:
    """Equal-size bins over the non-special tokens; any remainder is spread
    over the leading bins.  Position bins follow document order; IDF bins
    sort by descending weight (ties by position)."""
    special = np.zeros(doc.n, dtype=bool)
    if vocab is not None:
        special = np.array([vocab.is_special(int(t)) for t in doc.token_ids])
    eligible = np.flatnonzero(~special)
    if eligible.size == 0:
        raise ValueError(f"document {doc.doc_id} has no non-special tokens")
    if scheme is BinScheme.IDF:
        if idf is None:
            raise ValueError("IDF partitioning needs an IDF table")
        weights = idf.weights_for(doc.token_ids[eligible])
        order = eligible[np.lexsort((eligible, -weights))]
    else:
        order = eligible
    m = order.size
    base, rem = divmod(m, n_bins)
    assignment = np.full(doc.n, -1, dtype=np.int64)
    start = 0
    for b in range(n_bins):
        size = base + (1 if b < rem else 0)
        assignment[order[start:start + size]] = b
        start += size
    return BinPartition(scheme=scheme, n_bins=n_bins, assignment=assignment)


def contribution_metrics(pairs: list[tuple[QueryEmbeddingSet, DocEmbeddingSet]],
                         scheme: BinScheme, kind: MatchKind = MatchKind.SOFT,
                         idf: IdfTable | None = None, vocab: Vocabulary | None = None,
                         n_bins: int = 10) -> ContributionReport:
    """Per-bin fractions of argmax selections and matched score mass over a
    set of positive pairs, each vector normalized to sum 1."""
    if not pairs:
        raise ValueError("need at least one pair")
    indice = np.zeros(n_bins, dtype=np.float64)
    score = np.zeros(n_bins, dtype=np.float64)
    for Q, D in pairs:
        part = partition_bins(D, scheme, idf=idf, vocab=vocab, n_bins=n_bins)
        trace = score_pair(Q, D, kind)
        for i in range(Q.m):
            j = trace.positions[i]
            if j < 0:
                continue  # hard-matched token with empty admissible set
            b = part.assignment[j]
            if b < 0:
                continue  # argmax landed on a special token
            indice[b] += 1.0
            score[b] += float(trace.partials[i])
    degenerate = score.sum() <= 0.0 or indice.sum() == 0.0
    p_indice = indice / indice.sum() if indice.sum() > 0 else indice
    p_score = score / score.sum() if not degenerate else np.zeros(n_bins)
    return ContributionReport(p_indice=p_indice, p_score=p_score, n_bins=n_bins,
                              pair_count=len(pairs), degenerate=degenerate)


def split_contribution(pairs, split: SplitKind, vocab: Vocabulary,
                       kind: MatchKind = MatchKind.SOFT) -> tuple[float, float]:
    """Score mass by class of the matched document token.

    CO_OCCURRENCE returns (co-occurring, others) where a matched document
    token co-occurs when its id also appears in the query; STOPWORD returns
    (non-stop, stop).  Special document tokens are excluded.
    """
    in_class = out_class = 0.0
    for Q, D in pairs:
        trace = score_pair(Q, D, kind)
        query_ids = set(int(t) for t in Q.token_ids)
        for i in range(Q.m):
            j = trace.positions[i]
            if j < 0:
                continue
            tid = int(D.token_ids[j])
            if vocab.is_special(tid):
                continue
            s = float(trace.partials[i])
            if split is SplitKind.CO_OCCURRENCE:
                hit = tid in query_ids
            else:
                hit = not vocab.is_stopword(tid)
            if hit:
                in_class += s
            else:
                out_class += s
    total = in_class + out_class
    if total == 0.0:
        return 0.0, 0.0
    return in_class / total, out_class / total


def attention_histogram(corpus: list[DocEmbeddingSet], n_bins: int = 10) -> np.ndarray:
    """Counts of row-softmaxed Gram-matrix entries in equal-width bins
    over [0, 1]; every document contributes n^2 values."""
    if not corpus:
        raise ValueError("empty corpus")
    edges = np.linspace(0.0, 1.0, n_bins + 1)
    counts = np.zeros(n_bins, dtype=np.int64)
    for doc in corpus:
        emb = doc.embeddings.astype(np.float64)
        values = softmax(emb @ emb.T, axis=1).ravel()
        counts += np.histogram(values, bins=edges)[0]
    return counts
