"""Sum-of-max relevance kernels (soft and hard) and the brute-force oracle.

Soft matching takes, for every query token, the maximum inner product over
all document token embeddings.  Hard matching restricts the maximum to
document tokens carrying the same token id, contributing exactly zero for
query tokens with no same-id document token; the "full" variant adds the
inner product of the two summary vectors.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from latte.store import DocEmbeddingSet, QueryEmbeddingSet


class MatchKind(enum.Enum):
    SOFT = "soft"
    HARD_TOKEN = "hard_token"
    HARD_FULL = "hard_full"


@dataclass
class MatchTrace:
    """Per-query-token maxima.  positions[i] is the argmax document row
    (smallest index on ties), -1 for hard-matched tokens with no same-id
    document token.  total = sum(partials) + summary_score."""

    partials: np.ndarray       # (m,) float32
    positions: np.ndarray      # (m,) int64
    summary_score: float
    total: float


def _finish_trace(partials, positions, summary_score):
    total = float(np.sum(partials, dtype=np.float64) + summary_score)
    return MatchTrace(partials=partials, positions=positions,
                      summary_score=float(summary_score), total=total)


def soft_match(Q: QueryEmbeddingSet, D: DocEmbeddingSet) -> MatchTrace:
    if Q.h != D.h:
        raise ValueError(f"dimension mismatch: query h={Q.h}, document h={D.h}")
    sims = Q.embeddings @ D.embeddings.T          # (m, n) float32
    positions = np.argmax(sims, axis=1)           # smallest index wins ties
    partials = sims[np.arange(Q.m), positions]
    return _finish_trace(partials, positions.astype(np.int64), 0.0)


def hard_match(Q: QueryEmbeddingSet, D: DocEmbeddingSet,
               kind: MatchKind = MatchKind.HARD_TOKEN) -> MatchTrace:
    if kind not in (MatchKind.HARD_TOKEN, MatchKind.HARD_FULL):
        raise ValueError("hard_match requires HARD_TOKEN or HARD_FULL")
    if Q.h != D.h:
        raise ValueError(f"dimension mismatch: query h={Q.h}, document h={D.h}")
    if kind is MatchKind.HARD_FULL and (Q.summary_vector is None or D.summary_vector is None):
        raise ValueError("HARD_FULL requires summary vectors on both sides")
    partials = np.zeros(Q.m, dtype=np.float32)
    positions = np.full(Q.m, -1, dtype=np.int64)
    for i, tid in enumerate(Q.token_ids):
        admissible = np.flatnonzero(D.token_ids == tid)
        if admissible.size == 0:
            continue
        # elementwise product + pairwise sum keeps per-row dots identical to
        # the inverted-index scan regardless of how many rows are admissible
        sims = (D.embeddings[admissible].astype(np.float64)
                * Q.embeddings[i].astype(np.float64)).sum(axis=1)
        best = int(np.argmax(sims))
        partials[i] = np.float32(sims[best])
        positions[i] = admissible[best]
    summary = 0.0
    if kind is MatchKind.HARD_FULL:
        summary = float(np.dot(Q.summary_vector, D.summary_vector))
    return _finish_trace(partials, positions, summary)


def score_pair(Q: QueryEmbeddingSet, D: DocEmbeddingSet, kind: MatchKind) -> MatchTrace:
    if kind is MatchKind.SOFT:
        return soft_match(Q, D)
    return hard_match(Q, D, kind)


def brute_force_rank(Q: QueryEmbeddingSet, corpus: list[DocEmbeddingSet],
                     kind: MatchKind, k: int) -> list[tuple[int, float]]:
    """Exhaustively score every document; ties broken by ascending doc_id."""
    if k < 1:
        raise ValueError("k must be at least 1")
    scored = [(doc.doc_id, score_pair(Q, doc, kind).total) for doc in corpus]
    scored.sort(key=lambda t: (-t[1], t[0]))
    return scored[:k]
