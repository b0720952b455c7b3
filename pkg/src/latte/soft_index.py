"""Two-stage soft retrieval: IVF candidate generation + exact sum-of-max rerank.

All retained document-token embeddings live in one flat arena, bucketed by
nearest centroid (plain Lloyd k-means, coarse quantization only).  The
first stage retrieves, for each selected query token, the top-k' arena
rows by inner product from the probed clusters and collects the owning
documents; the second stage reranks that candidate set exactly with the
full query.
"""

from __future__ import annotations

import json
import math
import time
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from latte.query_pruning import QtpConfig, QtpMethod, select_query_tokens
from latte.scoring import soft_match
from latte.store import DocEmbeddingSet, IdfTable, QueryEmbeddingSet, Vocabulary

KMEANS_ITERATIONS = 20


@dataclass
class RetrievalStats:
    candidates: int = 0
    latency_ms: float = 0.0
    stage1_ms: float = 0.0
    stage2_ms: float = 0.0
    selected_query_tokens: int = 0
    empty_candidates: bool = False


@dataclass
class SoftIndex:
    centroids: np.ndarray                 # (c, h) float32
    arena: np.ndarray                     # (n_slots, h) float32
    slot_doc_ids: np.ndarray              # (n_slots,) uint64
    slot_positions: np.ndarray            # (n_slots,) uint32
    cluster_slots: list[np.ndarray]       # centroid -> slot indices
    nprobe: int
    docs: dict[int, DocEmbeddingSet] = field(default_factory=dict)

    @property
    def c(self) -> int:
        return self.centroids.shape[0]

    @property
    def h(self) -> int:
        return self.centroids.shape[1]

    @property
    def n_slots(self) -> int:
        return self.arena.shape[0]

    def attach_corpus(self, corpus: list[DocEmbeddingSet]) -> None:
        self.docs = {doc.doc_id: doc for doc in corpus}


def _lloyd(points: np.ndarray, c: int, seed: int) -> np.ndarray:
    """Fixed-iteration Lloyd clustering; empty clusters keep their centroid."""
    rng = np.random.default_rng(seed)
    centroids = points[rng.choice(len(points), size=c, replace=False)].astype(np.float64)
    pts = points.astype(np.float64)
    for _ in range(KMEANS_ITERATIONS):
        assign = _nearest(pts, centroids)
        for j in range(c):
            members = pts[assign == j]
            if len(members):
                centroids[j] = members.mean(axis=0)
    return centroids.astype(np.float32)


def _nearest(points, centroids):
    # argmin of squared L2 distance via the inner-product expansion
    sq = (centroids ** 2).sum(axis=1)
    return np.argmin(sq[None, :] - 2.0 * (points @ centroids.T), axis=1)


def build_soft_index(corpus: list[DocEmbeddingSet], c: int | None = None,
                     train_fraction: float = 0.05, seed: int = 0,
                     nprobe: int = 8) -> SoftIndex:
    total = sum(doc.n for doc in corpus)
    if total == 0:
        raise ValueError("empty corpus")
    if c is None:
        c = max(1, math.floor(math.sqrt(total)))
    if total < c:
        raise ValueError(f"{total} tokens cannot fill {c} clusters")
    arena = np.concatenate([doc.embeddings for doc in corpus]).astype(np.float32)
    slot_doc_ids = np.concatenate(
        [np.full(doc.n, doc.doc_id, dtype=np.uint64) for doc in corpus])
    slot_positions = np.concatenate(
        [np.arange(doc.n, dtype=np.uint32) for doc in corpus])

    rng = np.random.default_rng(seed)
    n_train = min(total, max(c, math.ceil(train_fraction * total)))
    sample = arena[rng.choice(total, size=n_train, replace=False)]
    centroids = _lloyd(sample, c, seed)

    assign = _nearest(arena.astype(np.float64), centroids.astype(np.float64))
    cluster_slots = [np.flatnonzero(assign == j).astype(np.int64) for j in range(c)]
    index = SoftIndex(centroids=centroids, arena=arena, slot_doc_ids=slot_doc_ids,
                      slot_positions=slot_positions, cluster_slots=cluster_slots,
                      nprobe=nprobe)
    index.attach_corpus(corpus)
    return index


def candidate_generation(index: SoftIndex, Q: QueryEmbeddingSet,
                         positions: np.ndarray | None = None,
                         k_prime: int = 1024,
                         nprobe: int | None = None) -> tuple[set[int], RetrievalStats]:
    """Union over query tokens of the documents owning each token's
    top-k' arena rows from the probed clusters."""
    if k_prime < 1:
        raise ValueError("k_prime must be at least 1")
    nprobe = index.nprobe if nprobe is None else min(nprobe, index.c)
    if positions is None:
        positions = np.arange(Q.m)
    stats = RetrievalStats(selected_query_tokens=len(positions))
    t0 = time.perf_counter()
    candidates: set[int] = set()
    cents = index.centroids.astype(np.float64)
    for pos in positions:
        q = Q.embeddings[pos]
        dist = ((cents - q) ** 2).sum(axis=1)
        probe = np.argsort(dist, kind="stable")[:nprobe]
        slots = np.concatenate([index.cluster_slots[j] for j in probe]) \
            if len(probe) else np.empty(0, dtype=np.int64)
        if slots.size == 0:
            continue
        slots = np.sort(slots)
        sims = index.arena[slots] @ q
        if slots.size > k_prime:
            # deterministic ties: higher similarity first, then lower slot
            top = np.lexsort((slots, -sims))[:k_prime]
        else:
            top = np.arange(slots.size)
        candidates.update(int(d) for d in index.slot_doc_ids[slots[top]])
    stats.stage1_ms = (time.perf_counter() - t0) * 1000.0
    stats.candidates = len(candidates)
    return candidates, stats


def retrieve(index: SoftIndex, Q: QueryEmbeddingSet, k: int,
             qtp: QtpConfig | None = None, k_prime: int = 1024,
             nprobe: int | None = None, idf: IdfTable | None = None,
             vocab: Vocabulary | None = None,
             ) -> tuple[list[tuple[int, float]], RetrievalStats]:
    """Candidate generation with QTP-selected tokens, exact rerank with the
    full query.  Ranked by descending score, ties by ascending doc_id."""
    if k < 1:
        raise ValueError("k must be at least 1")
    if not index.docs:
        raise ValueError("index has no attached corpus for reranking")
    qtp = qtp or QtpConfig(method=QtpMethod.NONE)
    t0 = time.perf_counter()
    positions = select_query_tokens(Q, qtp, idf=idf, vocab=vocab)
    candidates, stats = candidate_generation(index, Q, positions, k_prime, nprobe)
    if not candidates:
        warnings.warn(f"no candidates for query {Q.query_id}")
        stats.empty_candidates = True
        stats.latency_ms = (time.perf_counter() - t0) * 1000.0
        return [], stats
    t1 = time.perf_counter()
    scored = [(doc_id, soft_match(Q, index.docs[doc_id]).total)
              for doc_id in sorted(candidates)]
    scored.sort(key=lambda t: (-t[1], t[0]))
    stats.stage2_ms = (time.perf_counter() - t1) * 1000.0
    stats.latency_ms = (time.perf_counter() - t0) * 1000.0
    return scored[:k], stats


def save_soft_index(index: SoftIndex, directory) -> None:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    meta = {"c": index.c, "h": index.h, "nprobe": index.nprobe,
            "n_slots": index.n_slots}
    (directory / "meta.json").write_text(json.dumps(meta, sort_keys=True))
    (directory / "centroids.bin").write_bytes(
        np.ascontiguousarray(index.centroids, dtype="<f4").tobytes())
    (directory / "arena.bin").write_bytes(
        np.ascontiguousarray(index.arena, dtype="<f4").tobytes())
    slots = np.empty(index.n_slots, dtype=[("doc_id", "<u8"), ("position", "<u4")])
    slots["doc_id"] = index.slot_doc_ids
    slots["position"] = index.slot_positions
    (directory / "slots.bin").write_bytes(slots.tobytes())


def load_soft_index(directory) -> SoftIndex:
    directory = Path(directory)
    meta = json.loads((directory / "meta.json").read_text())
    c, h, n_slots = meta["c"], meta["h"], meta["n_slots"]
    centroids = np.frombuffer((directory / "centroids.bin").read_bytes(),
                              dtype="<f4").reshape(c, h).copy()
    arena = np.frombuffer((directory / "arena.bin").read_bytes(),
                          dtype="<f4").reshape(n_slots, h).copy()
    slots = np.frombuffer((directory / "slots.bin").read_bytes(),
                          dtype=[("doc_id", "<u8"), ("position", "<u4")])
    assign = _nearest(arena.astype(np.float64), centroids.astype(np.float64))
    cluster_slots = [np.flatnonzero(assign == j).astype(np.int64) for j in range(c)]
    return SoftIndex(centroids=centroids, arena=arena,
                     slot_doc_ids=slots["doc_id"].copy(),
                     slot_positions=slots["position"].copy(),
                     cluster_slots=cluster_slots, nprobe=meta["nprobe"])
