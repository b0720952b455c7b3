"""Inverted index over token embeddings for hard (same-token-id) retrieval.

Each token id maps to a posting list storing, contiguously, the embeddings
of every retained occurrence of that token, grouped by document.  A query
scans the posting list of each of its token ids, takes the per-document
maximum inner product, and accumulates across query tokens; the full
variant adds the summary-vector inner product for every document that
entered through token overlap.
"""

from __future__ import annotations

import heapq
import json
import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from latte.scoring import MatchKind
from latte.store import DocEmbeddingSet, QueryEmbeddingSet
from latte.soft_index import RetrievalStats
import time


@dataclass
class PostingList:
    doc_ids: np.ndarray        # (n_docs,) uint64, ascending
    offsets: np.ndarray        # (n_docs + 1,) int64 segment bounds
    embeddings: np.ndarray     # (n_entries, h) float32, grouped by doc

    @property
    def n_entries(self) -> int:
        return self.embeddings.shape[0]


@dataclass
class HardIndex:
    postings: dict[int, PostingList]
    summaries: dict[int, np.ndarray] = field(default_factory=dict)
    doc_count: int = 0
    h: int = 0
    h_cls: int = 0


def build_hard_index(corpus: list[DocEmbeddingSet]) -> HardIndex:
    if not corpus:
        raise ValueError("empty corpus")
    h = corpus[0].h
    by_token: dict[int, list[tuple[int, np.ndarray]]] = {}
    summaries: dict[int, np.ndarray] = {}
    h_cls = 0
    for doc in sorted(corpus, key=lambda d: d.doc_id):
        for tid in np.unique(doc.token_ids):
            rows = doc.embeddings[doc.token_ids == tid]
            by_token.setdefault(int(tid), []).append((doc.doc_id, rows))
        if doc.summary_vector is not None:
            summaries[doc.doc_id] = doc.summary_vector
            h_cls = len(doc.summary_vector)
    postings = {}
    for tid, groups in by_token.items():
        doc_ids = np.array([d for d, _ in groups], dtype=np.uint64)
        counts = [len(rows) for _, rows in groups]
        offsets = np.zeros(len(groups) + 1, dtype=np.int64)
        offsets[1:] = np.cumsum(counts)
        postings[tid] = PostingList(doc_ids=doc_ids, offsets=offsets,
                                    embeddings=np.concatenate([r for _, r in groups]))
    return HardIndex(postings=postings, summaries=summaries,
                     doc_count=len(corpus), h=h, h_cls=h_cls)


def hard_retrieve(index: HardIndex, Q: QueryEmbeddingSet, k: int,
                  kind: MatchKind = MatchKind.HARD_TOKEN,
                  ) -> tuple[list[tuple[int, float]], RetrievalStats]:
    """Exact top-k over documents sharing at least one token id with the
    query.  Ties break toward the smaller doc_id."""
    if k < 1:
        raise ValueError("k must be at least 1")
    if kind not in (MatchKind.HARD_TOKEN, MatchKind.HARD_FULL):
        raise ValueError("hard_retrieve requires HARD_TOKEN or HARD_FULL")
    if kind is MatchKind.HARD_FULL and Q.summary_vector is None:
        raise ValueError("HARD_FULL retrieval needs a query summary vector")
    t0 = time.perf_counter()
    # Per-document partial vector indexed by query position, so totals are
    # summed in the same order (and with the same float32 rounding of each
    # per-token maximum) as the pairwise hard_match kernel.
    partials: dict[int, np.ndarray] = {}
    order = sorted(range(Q.m), key=lambda i: (int(Q.token_ids[i]), i))
    for i in order:
        plist = index.postings.get(int(Q.token_ids[i]))
        if plist is None:
            continue
        sims = (plist.embeddings.astype(np.float64)
                * Q.embeddings[i].astype(np.float64)).sum(axis=1)
        for seg, doc_id in enumerate(plist.doc_ids):
            row = partials.setdefault(int(doc_id), np.zeros(Q.m, dtype=np.float32))
            row[i] = np.float32(sims[plist.offsets[seg]:plist.offsets[seg + 1]].max())
    scores = {doc_id: float(np.sum(row, dtype=np.float64))
              for doc_id, row in partials.items()}
    if kind is MatchKind.HARD_FULL:
        for doc_id in scores:
            summary = index.summaries.get(doc_id)
            if summary is not None:
                scores[doc_id] += float(np.dot(Q.summary_vector, summary))
    top = heapq.nsmallest(k, scores.items(), key=lambda t: (-t[1], t[0]))
    stats = RetrievalStats(candidates=len(scores),
                           latency_ms=(time.perf_counter() - t0) * 1000.0)
    return [(d, s) for d, s in top], stats


_POSTING_HEADER = struct.Struct("<II")


def save_hard_index(index: HardIndex, directory, dtype: str = "f32") -> None:
    if dtype not in ("f32", "f16"):
        raise ValueError(f"unknown dtype {dtype!r}")
    np_dtype = np.dtype("<f4") if dtype == "f32" else np.dtype("<f2")
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    meta = {"doc_count": index.doc_count, "h": index.h, "h_cls": index.h_cls,
            "dtype": dtype, "n_tokens": len(index.postings)}
    (directory / "meta.json").write_text(json.dumps(meta, sort_keys=True))
    with open(directory / "postings.bin", "wb") as f:
        for tid in sorted(index.postings):
            plist = index.postings[tid]
            f.write(_POSTING_HEADER.pack(tid, plist.n_entries))
            for seg, doc_id in enumerate(plist.doc_ids):
                lo, hi = plist.offsets[seg], plist.offsets[seg + 1]
                for row in plist.embeddings[lo:hi]:
                    f.write(struct.pack("<Q", int(doc_id)))
                    f.write(np.ascontiguousarray(row, dtype=np_dtype).tobytes())
    with open(directory / "summary.bin", "wb") as f:
        f.write(struct.pack("<Q", len(index.summaries)))
        for doc_id in sorted(index.summaries):
            f.write(struct.pack("<Q", doc_id))
            f.write(np.ascontiguousarray(index.summaries[doc_id], dtype=np_dtype).tobytes())


def load_hard_index(directory) -> HardIndex:
    directory = Path(directory)
    meta = json.loads((directory / "meta.json").read_text())
    h, h_cls = meta["h"], meta["h_cls"]
    np_dtype = np.dtype("<f4") if meta["dtype"] == "f32" else np.dtype("<f2")
    entry_bytes = 8 + h * np_dtype.itemsize
    data = (directory / "postings.bin").read_bytes()
    offset = 0
    postings: dict[int, PostingList] = {}
    while offset < len(data):
        tid, n_entries = _POSTING_HEADER.unpack_from(data, offset)
        offset += _POSTING_HEADER.size
        doc_ids = np.empty(n_entries, dtype=np.uint64)
        rows = np.empty((n_entries, h), dtype=np.float32)
        for e in range(n_entries):
            (doc_ids[e],) = struct.unpack_from("<Q", data, offset)
            rows[e] = np.frombuffer(data, dtype=np_dtype, count=h,
                                    offset=offset + 8).astype(np.float32)
            offset += entry_bytes
        uniq, first = np.unique(doc_ids, return_index=True)
        order = np.sort(first)
        seg_docs = doc_ids[order]
        offsets = np.append(order, n_entries).astype(np.int64)
        postings[tid] = PostingList(doc_ids=seg_docs.astype(np.uint64),
                                    offsets=offsets, embeddings=rows)
    sdata = (directory / "summary.bin").read_bytes()
    (n_sum,) = struct.unpack_from("<Q", sdata, 0)
    soff = 8
    summaries = {}
    for _ in range(n_sum):
        (doc_id,) = struct.unpack_from("<Q", sdata, soff)
        summaries[int(doc_id)] = np.frombuffer(
            sdata, dtype=np_dtype, count=h_cls, offset=soff + 8).astype(np.float32)
        soff += 8 + h_cls * np_dtype.itemsize
    return HardIndex(postings=postings, summaries=summaries,
                     doc_count=meta["doc_count"], h=h, h_cls=h_cls)
