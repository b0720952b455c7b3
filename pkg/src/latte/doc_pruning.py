"""Index-time document-token pruning.

Three methods, all keeping a per-document budget of max(1, floor(n * alpha))
tokens:

* First: keep the leading tokens in order.
* IdfTop: keep the leading special tokens, then the highest-IDF tokens.
* AttentionTop: keep the leading special tokens, then the tokens with the
  highest self-attention importance (column sums of the row-softmaxed Gram
  matrix of the document embeddings).

Ties always break toward earlier positions and kept positions are reported
in original document order, so the kept set is nested as alpha grows.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np
from scipy.special import softmax

from latte.store import DocEmbeddingSet, IdfTable, Vocabulary


class PruneMethod(enum.Enum):
    FIRST = "first"
    IDF_TOP = "idf"
    ATTENTION_TOP = "attention"


class VocabularyError(KeyError):
    """A document token id falls outside the vocabulary."""


@dataclass(frozen=True)
class PruneConfig:
    method: PruneMethod
    alpha: float
    retain_special: bool = True
    special_prefix_limit: int | None = None  # e.g. 2 for [CLS][D], 1 for [CLS]

    def __post_init__(self):
        if not 0.0 < self.alpha <= 1.0:
            raise ValueError(f"alpha must be in (0, 1], got {self.alpha}")


@dataclass
class PrunedDoc:
    doc_id: int
    kept_positions: np.ndarray    # sorted original positions
    doc: DocEmbeddingSet          # view restricted to kept_positions


@dataclass
class PruneReport:
    tokens_before: int
    tokens_after: int

    @property
    def achieved_ratio(self) -> float:
        return self.tokens_after / self.tokens_before if self.tokens_before else 0.0


def remaining_count(l: int, alpha: float) -> int:
    """Budget max(1, floor(l * alpha)) of tokens to keep."""
    if l < 1:
        raise ValueError("document length must be at least 1")
    if not 0.0 < alpha <= 1.0:
        raise ValueError(f"alpha must be in (0, 1], got {alpha}")
    return max(1, math.floor(l * alpha))


def _special_prefix(doc: DocEmbeddingSet, cfg: PruneConfig, vocab: Vocabulary | None):
    """Positions of the leading run of special tokens, capped by config."""
    if not cfg.retain_special or vocab is None:
        return []
    prefix = []
    for pos, tid in enumerate(doc.token_ids):
        if not vocab.is_special(int(tid)):
            break
        prefix.append(pos)
        if cfg.special_prefix_limit is not None and len(prefix) >= cfg.special_prefix_limit:
            break
    return prefix


def _take(doc: DocEmbeddingSet, positions: np.ndarray) -> PrunedDoc:
    positions = np.sort(np.asarray(positions, dtype=np.int64))
    view = DocEmbeddingSet(
        doc_id=doc.doc_id,
        token_ids=doc.token_ids[positions],
        embeddings=doc.embeddings[positions],
        summary_vector=doc.summary_vector,
    )
    return PrunedDoc(doc_id=doc.doc_id, kept_positions=positions, doc=view)


def _top_by_rank(doc, cfg, vocab, key_desc: np.ndarray) -> PrunedDoc:
    """Keep the special prefix then the best-ranked remaining positions.

    key_desc holds a per-position score; higher is better, ties go to the
    earlier position.  The special prefix fills the budget first.
    """
    budget = remaining_count(doc.n, cfg.alpha)
    prefix = _special_prefix(doc, cfg, vocab)
    kept = list(prefix[:budget])
    rest = budget - len(kept)
    if rest > 0:
        pool = [p for p in range(doc.n) if p not in prefix]
        pool.sort(key=lambda p: (-key_desc[p], p))
        kept.extend(pool[:rest])
    return _take(doc, np.array(kept, dtype=np.int64))


def prune_first(doc: DocEmbeddingSet, cfg: PruneConfig) -> PrunedDoc:
    if cfg.method is not PruneMethod.FIRST:
        raise ValueError("config method is not First")
    budget = remaining_count(doc.n, cfg.alpha)
    return _take(doc, np.arange(budget, dtype=np.int64))


def prune_idf_top(doc: DocEmbeddingSet, cfg: PruneConfig,
                  idf: IdfTable, vocab: Vocabulary) -> PrunedDoc:
    if cfg.method is not PruneMethod.IDF_TOP:
        raise ValueError("config method is not IdfTop")
    for tid in doc.token_ids:
        if int(tid) >= vocab.size:
            raise VocabularyError(f"token id {int(tid)} outside vocabulary (doc {doc.doc_id})")
    weights = idf.weights_for(doc.token_ids)
    return _top_by_rank(doc, cfg, vocab, weights)


def attention_importance(D: DocEmbeddingSet) -> np.ndarray:
    """Column sums of the row-softmaxed Gram matrix; sums to n."""
    emb = D.embeddings.astype(np.float64)
    if not np.isfinite(emb).all():
        raise ValueError("non-finite embeddings")
    gram = emb @ emb.T
    return softmax(gram, axis=1).sum(axis=0)


def prune_attention_top(doc: DocEmbeddingSet, cfg: PruneConfig,
                        vocab: Vocabulary | None = None) -> PrunedDoc:
    if cfg.method is not PruneMethod.ATTENTION_TOP:
        raise ValueError("config method is not AttentionTop")
    return _top_by_rank(doc, cfg, vocab, attention_importance(doc))


def prune_doc(doc: DocEmbeddingSet, cfg: PruneConfig,
              idf: IdfTable | None = None, vocab: Vocabulary | None = None) -> PrunedDoc:
    if cfg.method is PruneMethod.FIRST:
        return prune_first(doc, cfg)
    if cfg.method is PruneMethod.IDF_TOP:
        if idf is None or vocab is None:
            raise ValueError("IdfTop pruning needs an IDF table and a vocabulary")
        return prune_idf_top(doc, cfg, idf, vocab)
    return prune_attention_top(doc, cfg, vocab)


def prune_corpus(corpus: list[DocEmbeddingSet], cfg: PruneConfig,
                 idf: IdfTable | None = None, vocab: Vocabulary | None = None,
                 ) -> tuple[list[DocEmbeddingSet], PruneReport]:
    pruned, errors = [], []
    before = after = 0
    for doc in corpus:
        try:
            p = prune_doc(doc, cfg, idf, vocab)
        except Exception as exc:  # aggregated so one bad doc names itself
            errors.append((doc.doc_id, exc))
            continue
        before += doc.n
        after += p.doc.n
        pruned.append(p.doc)
    if errors:
        detail = "; ".join(f"doc {d}: {e}" for d, e in errors[:5])
        raise ValueError(f"pruning failed for {len(errors)} document(s): {detail}")
    return pruned, PruneReport(tokens_before=before, tokens_after=after)
