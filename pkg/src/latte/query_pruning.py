"""Query-token pruning for the candidate-generation stage.

Selection only affects which query tokens fan out into the first-stage
search; the final rerank always scores candidates with the full query, so
any document retrieved under both pruned and unpruned generation gets an
identical final score.
"""

from __future__ import annotations

import enum
import warnings
from dataclasses import dataclass

import numpy as np

from latte.doc_pruning import attention_importance
from latte.store import DocEmbeddingSet, IdfTable, QueryEmbeddingSet, Vocabulary


class QtpMethod(enum.Enum):
    NONE = "none"
    IDF_TOP = "idf"
    ATTENTION = "attention"


@dataclass(frozen=True)
class QtpConfig:
    method: QtpMethod = QtpMethod.NONE
    idf_keep: int = 3
    att_k_min: int = 3
    att_k_max: int = 3

    def __post_init__(self):
        if self.idf_keep < 0 or self.att_k_min < 0 or self.att_k_max < 0:
            raise ValueError("QTP counts must be non-negative")


def _eligible_positions(Q: QueryEmbeddingSet, vocab: Vocabulary | None) -> list[int]:
    """Non-special query positions; padding/mask ids are flagged special."""
    if vocab is None:
        return list(range(Q.m))
    return [i for i, tid in enumerate(Q.token_ids) if not vocab.is_special(int(tid))]


def select_query_tokens(Q: QueryEmbeddingSet, cfg: QtpConfig,
                        idf: IdfTable | None = None,
                        vocab: Vocabulary | None = None) -> np.ndarray:
    """Sorted positions to use for candidate generation."""
    if Q.m < 1:
        raise ValueError("empty query")
    everything = np.arange(Q.m, dtype=np.int64)
    if cfg.method is QtpMethod.NONE:
        return everything
    pool = _eligible_positions(Q, vocab)
    if not pool:
        warnings.warn("QTP selection pool empty after exclusions; using all query tokens")
        return everything

    if cfg.method is QtpMethod.IDF_TOP:
        if idf is None:
            raise ValueError("IDF query pruning needs an IDF table")
        weights = idf.weights_for(Q.token_ids)
        ranked = sorted(pool, key=lambda p: (-weights[p], p))
        chosen = ranked[:max(1, cfg.idf_keep)]
    else:
        # Attention: union of the lowest- and highest-importance tokens.
        proxy = DocEmbeddingSet(doc_id=0, token_ids=Q.token_ids, embeddings=Q.embeddings)
        importance = attention_importance(proxy)
        ascending = sorted(pool, key=lambda p: (importance[p], p))
        descending = sorted(pool, key=lambda p: (-importance[p], p))
        chosen = set(ascending[:cfg.att_k_min]) | set(descending[:cfg.att_k_max])
        if not chosen:
            chosen = {ascending[0]}
    return np.array(sorted(chosen), dtype=np.int64)
