"""Late-interaction multi-vector retrieval with token pruning.

A small numpy library implementing sum-of-max scoring over token
embeddings (soft and hard matching), index-time document-token pruning,
query-time query-token pruning, an IVF-based two-stage retriever, an
embedding inverted index, matching analysis instrumentation, and an IR
evaluation harness.
"""

from latte.store import (
    CorruptionError,
    DocEmbeddingSet,
    FormatError,
    IdfTable,
    QueryEmbeddingSet,
    Vocabulary,
    build_idf_table,
    load_corpus,
    load_queries,
    save_corpus,
    save_queries,
    synthetic_embed,
)
from latte.scoring import MatchKind, MatchTrace, brute_force_rank, hard_match, soft_match
from latte.doc_pruning import (
    PruneConfig,
    PruneMethod,
    PrunedDoc,
    PruneReport,
    attention_importance,
    prune_corpus,
    prune_doc,
    remaining_count,
)
from latte.query_pruning import QtpConfig, QtpMethod, select_query_tokens
from latte.soft_index import (
    RetrievalStats,
    SoftIndex,
    build_soft_index,
    candidate_generation,
    load_soft_index,
    retrieve,
    save_soft_index,
)
from latte.hard_index import HardIndex, build_hard_index, hard_retrieve, load_hard_index, save_hard_index
from latte.analysis import (
    BinPartition,
    BinScheme,
    ContributionReport,
    SplitKind,
    attention_histogram,
    contribution_metrics,
    partition_bins,
    split_contribution,
)
from latte.evaluation import (
    LatencyReport,
    TostResult,
    measure_latency,
    mrr_at_k,
    ndcg_at_k,
    per_query_mrr,
    per_query_ndcg,
    per_query_recall,
    read_qrels,
    read_run,
    recall_at_k,
    tost_equivalence,
    write_run,
)

__all__ = [name for name in dir() if not name.startswith("_")]
