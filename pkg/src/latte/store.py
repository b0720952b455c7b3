"""Token-embedding records, binary corpus files, vocabularies and IDF tables.

The on-disk corpus format (little-endian) is::

    magic "LTIE" | u32 version=1 | u32 h | u32 h_cls | u8 dtype | u64 count
    per record: u64 id | u32 n | n x u32 token ids | n*h scalars | h_cls scalars

dtype 0 stores float32 payloads, dtype 1 float16.  The same layout is used
for documents and queries.  Vocabulary sidecars are UTF-8 lines of
``id<TAB>surface<TAB>flags`` with flags in {-, S, W, SW}.
"""

from __future__ import annotations

import json
import math
import struct
from dataclasses import dataclass, field

import numpy as np

MAGIC = b"LTIE"
VERSION = 1

_HEADER = struct.Struct("<4sIIIBQ")
_REC_HEADER = struct.Struct("<QI")


class FormatError(ValueError):
    """File does not conform to the corpus format (bad magic or version)."""


class CorruptionError(ValueError):
    """Payload ended early or is internally inconsistent."""


@dataclass(frozen=True)
class Vocabulary:
    size: int
    special_ids: frozenset[int] = frozenset()
    stopword_ids: frozenset[int] = frozenset()
    surfaces: dict[int, str] = field(default_factory=dict)

    def __post_init__(self):
        for tid in self.special_ids | self.stopword_ids:
            if not 0 <= tid < self.size:
                raise ValueError(f"token id {tid} outside vocabulary of size {self.size}")

    def is_special(self, token_id: int) -> bool:
        return token_id in self.special_ids

    def is_stopword(self, token_id: int) -> bool:
        return token_id in self.stopword_ids


def save_vocabulary(path, vocab: Vocabulary) -> None:
    with open(path, "w", encoding="utf-8") as f:
        for tid in range(vocab.size):
            flags = ""
            if tid in vocab.special_ids:
                flags += "S"
            if tid in vocab.stopword_ids:
                flags += "W"
            surface = vocab.surfaces.get(tid, f"tok{tid}")
            f.write(f"{tid}\t{surface}\t{flags or '-'}\n")


def load_vocabulary(path) -> Vocabulary:
    special, stop, surfaces = set(), set(), {}
    size = 0
    with open(path, encoding="utf-8") as f:
        for line in f:
            line = line.rstrip("\n")
            if not line:
                continue
            tid_s, surface, flags = line.split("\t")
            tid = int(tid_s)
            surfaces[tid] = surface
            if "S" in flags:
                special.add(tid)
            if "W" in flags:
                stop.add(tid)
            size = max(size, tid + 1)
    return Vocabulary(size=size, special_ids=frozenset(special),
                      stopword_ids=frozenset(stop), surfaces=surfaces)


def _validate_embedding_set(token_ids, embeddings, summary_vector):
    if len(token_ids) < 1:
        raise ValueError("embedding set needs at least one token")
    if embeddings.shape[0] != len(token_ids):
        raise ValueError("embedding row count does not match token count")
    if not np.isfinite(embeddings).all():
        raise ValueError("non-finite embedding values")
    if summary_vector is not None and not np.isfinite(summary_vector).all():
        raise ValueError("non-finite summary vector")


@dataclass
class DocEmbeddingSet:
    doc_id: int
    token_ids: np.ndarray          # (n,) uint32
    embeddings: np.ndarray         # (n, h) float32
    summary_vector: np.ndarray | None = None  # (h_cls,) float32

    def __post_init__(self):
        self.token_ids = np.ascontiguousarray(self.token_ids, dtype=np.uint32)
        self.embeddings = np.ascontiguousarray(self.embeddings, dtype=np.float32)
        if self.summary_vector is not None:
            self.summary_vector = np.ascontiguousarray(self.summary_vector, dtype=np.float32)
        _validate_embedding_set(self.token_ids, self.embeddings, self.summary_vector)

    @property
    def n(self) -> int:
        return len(self.token_ids)

    @property
    def h(self) -> int:
        return self.embeddings.shape[1]


@dataclass
class QueryEmbeddingSet:
    query_id: int
    token_ids: np.ndarray
    embeddings: np.ndarray
    summary_vector: np.ndarray | None = None

    def __post_init__(self):
        self.token_ids = np.ascontiguousarray(self.token_ids, dtype=np.uint32)
        self.embeddings = np.ascontiguousarray(self.embeddings, dtype=np.float32)
        if self.summary_vector is not None:
            self.summary_vector = np.ascontiguousarray(self.summary_vector, dtype=np.float32)
        _validate_embedding_set(self.token_ids, self.embeddings, self.summary_vector)

    @property
    def m(self) -> int:
        return len(self.token_ids)

    @property
    def h(self) -> int:
        return self.embeddings.shape[1]


def _write_records(path, records, ids, dtype: str) -> None:
    if dtype not in ("f32", "f16"):
        raise ValueError(f"unknown dtype {dtype!r}")
    np_dtype = np.dtype("<f4") if dtype == "f32" else np.dtype("<f2")
    h = records[0].embeddings.shape[1] if records else 0
    h_cls = 0
    for r in records:
        if r.summary_vector is not None:
            h_cls = len(r.summary_vector)
            break
    with open(path, "wb") as f:
        f.write(_HEADER.pack(MAGIC, VERSION, h, h_cls, 0 if dtype == "f32" else 1, len(records)))
        for rec_id, rec in zip(ids, records):
            if rec.embeddings.shape[1] != h:
                raise ValueError("inconsistent embedding dimension across records")
            f.write(_REC_HEADER.pack(rec_id, len(rec.token_ids)))
            f.write(np.ascontiguousarray(rec.token_ids, dtype="<u4").tobytes())
            f.write(np.ascontiguousarray(rec.embeddings, dtype=np_dtype).tobytes())
            if h_cls:
                if rec.summary_vector is None or len(rec.summary_vector) != h_cls:
                    raise ValueError("summary vector missing or of wrong length")
                f.write(np.ascontiguousarray(rec.summary_vector, dtype=np_dtype).tobytes())


def _read_records(path):
    with open(path, "rb") as f:
        data = f.read()
    if len(data) < _HEADER.size:
        raise FormatError("file too short for header")
    magic, version, h, h_cls, dtype_code, count = _HEADER.unpack_from(data, 0)
    if magic != MAGIC:
        raise FormatError(f"bad magic {magic!r}")
    if version != VERSION:
        raise FormatError(f"unsupported version {version}")
    if dtype_code not in (0, 1):
        raise FormatError(f"unknown dtype code {dtype_code}")
    np_dtype = np.dtype("<f4") if dtype_code == 0 else np.dtype("<f2")
    scalar = np_dtype.itemsize
    offset = _HEADER.size
    out = []
    for _ in range(count):
        if offset + _REC_HEADER.size > len(data):
            raise CorruptionError(f"truncated record header at byte {offset}")
        rec_id, n = _REC_HEADER.unpack_from(data, offset)
        offset += _REC_HEADER.size
        need = n * 4 + n * h * scalar + h_cls * scalar
        if offset + need > len(data):
            raise CorruptionError(f"truncated payload at byte {offset}")
        token_ids = np.frombuffer(data, dtype="<u4", count=n, offset=offset).copy()
        offset += n * 4
        emb = np.frombuffer(data, dtype=np_dtype, count=n * h, offset=offset)
        emb = emb.astype(np.float32).reshape(n, h)
        offset += n * h * scalar
        summary = None
        if h_cls:
            summary = np.frombuffer(data, dtype=np_dtype, count=h_cls, offset=offset)
            summary = summary.astype(np.float32)
            offset += h_cls * scalar
        out.append((rec_id, token_ids, emb, summary))
    if offset != len(data):
        raise CorruptionError(f"{len(data) - offset} trailing bytes after byte {offset}")
    return out


def save_corpus(path, docs: list[DocEmbeddingSet], dtype: str = "f32") -> None:
    _write_records(path, docs, [d.doc_id for d in docs], dtype)


def load_corpus(path) -> list[DocEmbeddingSet]:
    return [DocEmbeddingSet(rec_id, tok, emb, summary)
            for rec_id, tok, emb, summary in _read_records(path)]


def save_queries(path, queries: list[QueryEmbeddingSet], dtype: str = "f32") -> None:
    _write_records(path, queries, [q.query_id for q in queries], dtype)


def load_queries(path) -> list[QueryEmbeddingSet]:
    return [QueryEmbeddingSet(rec_id, tok, emb, summary)
            for rec_id, tok, emb, summary in _read_records(path)]


class IdfTable:
    """Token id -> IDF weight, smoothed so unseen tokens get the maximum."""

    def __init__(self, weights: dict[int, float], corpus_size: int):
        self.weights = dict(weights)
        self.corpus_size = int(corpus_size)
        self._default = math.log(self.corpus_size + 1) + 1.0

    def weight(self, token_id: int) -> float:
        return self.weights.get(int(token_id), self._default)

    def weights_for(self, token_ids) -> np.ndarray:
        return np.array([self.weight(t) for t in token_ids], dtype=np.float64)

    def save(self, path) -> None:
        payload = {"corpus_size": self.corpus_size,
                   "weights": {str(k): v for k, v in self.weights.items()}}
        with open(path, "w", encoding="utf-8") as f:
            json.dump(payload, f)

    @classmethod
    def load(cls, path) -> "IdfTable":
        with open(path, encoding="utf-8") as f:
            payload = json.load(f)
        return cls({int(k): v for k, v in payload["weights"].items()}, payload["corpus_size"])


def build_idf_table(corpus: list[DocEmbeddingSet], vocab: Vocabulary | None = None) -> IdfTable:
    """IDF weights ln((N+1)/(df+1)) + 1 from document frequencies."""
    if not corpus:
        raise ValueError("cannot build an IDF table from an empty corpus")
    n_docs = len(corpus)
    df: dict[int, int] = {}
    for doc in corpus:
        for tid in np.unique(doc.token_ids):
            df[int(tid)] = df.get(int(tid), 0) + 1
    weights = {tid: math.log((n_docs + 1) / (count + 1)) + 1.0 for tid, count in df.items()}
    if vocab is not None:
        default = math.log(n_docs + 1) + 1.0
        for tid in range(vocab.size):
            weights.setdefault(tid, default)
    return IdfTable(weights, n_docs)


def synthetic_embed(token_ids, h: int, seed: int, nonnegative: bool = False) -> np.ndarray:
    """Deterministic per-token embeddings for self-contained tests and demos.

    Each token id maps to a fixed base direction; occurrences at different
    positions are perturbed slightly so repeated tokens stay highly similar
    (cosine > 0.9).  Rows are L2-normalized.  With ``nonnegative`` the
    components are folded into the positive orthant so all inner products
    are >= 0.
    """
    if h < 2:
        raise ValueError("embedding dimension must be at least 2")
    rows = np.empty((len(token_ids), h), dtype=np.float32)
    for pos, tid in enumerate(token_ids):
        base_rng = np.random.default_rng([seed, int(tid)])
        base = base_rng.standard_normal(h)
        jitter_rng = np.random.default_rng([seed, int(tid), pos])
        row = base + 0.12 * jitter_rng.standard_normal(h)
        if nonnegative:
            row = np.abs(row)
        rows[pos] = row / np.linalg.norm(row)
    return rows
