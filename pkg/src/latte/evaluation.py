"""Ranking metrics, TOST equivalence testing, and TREC run/qrels I/O.

Run files are standard 6-column TREC (``qid Q0 docid rank score tag``);
qrels are TSV ``qid<TAB>0<TAB>docid<TAB>grade``.  All ids are handled as
strings so files interoperate with external scorers.
"""

from __future__ import annotations

import statistics
import time
from dataclasses import dataclass, field

import numpy as np
from scipy import stats as sps

Run = dict[str, list[tuple[str, float]]]
Qrels = dict[str, dict[str, int]]


def write_run(path, run: Run, tag: str = "latte") -> None:
    with open(path, "w", encoding="utf-8") as f:
        for qid in run:
            for rank, (doc_id, score) in enumerate(run[qid], start=1):
                f.write(f"{qid} Q0 {doc_id} {rank} {score:.6f} {tag}\n")


def read_run(path) -> Run:
    run: Run = {}
    with open(path, encoding="utf-8") as f:
        for line in f:
            if not line.strip():
                continue
            qid, _, doc_id, rank, score, _tag = line.split()
            run.setdefault(qid, []).append((doc_id, float(score)))
    for qid, ranked in run.items():
        for a, b in zip(ranked, ranked[1:]):
            if b[1] > a[1]:
                raise ValueError(f"run scores not non-increasing for query {qid}")
    return run


def read_qrels(path) -> Qrels:
    qrels: Qrels = {}
    with open(path, encoding="utf-8") as f:
        for line in f:
            if not line.strip():
                continue
            qid, _, doc_id, grade = line.split()
            qrels.setdefault(qid, {})[doc_id] = int(grade)
    return qrels


def _relevant(qrels: Qrels, qid: str) -> set[str]:
    return {d for d, g in qrels.get(qid, {}).items() if g >= 1}


def per_query_mrr(run: Run, qrels: Qrels, k: int = 10) -> dict[str, float]:
    out = {}
    for qid, ranked in run.items():
        if qid not in qrels:
            continue
        rel = _relevant(qrels, qid)
        value = 0.0
        for rank, (doc_id, _) in enumerate(ranked[:k], start=1):
            if doc_id in rel:
                value = 1.0 / rank
                break
        out[qid] = value
    return out


def mrr_at_k(run: Run, qrels: Qrels, k: int = 10) -> float:
    values = per_query_mrr(run, qrels, k)
    return statistics.fmean(values.values()) if values else 0.0


def per_query_recall(run: Run, qrels: Qrels, k: int = 100) -> dict[str, float]:
    out = {}
    for qid, ranked in run.items():
        rel = _relevant(qrels, qid)
        if not rel:
            continue  # queries with no relevant documents are excluded
        top = {doc_id for doc_id, _ in ranked[:k]}
        out[qid] = len(rel & top) / len(rel)
    return out


def recall_at_k(run: Run, qrels: Qrels, k: int = 100) -> float:
    values = per_query_recall(run, qrels, k)
    return statistics.fmean(values.values()) if values else 0.0


def per_query_ndcg(run: Run, qrels: Qrels, k: int = 10) -> dict[str, float]:
    out = {}
    for qid, ranked in run.items():
        grades = qrels.get(qid)
        if not grades:
            continue
        gains = sorted((2 ** g - 1 for g in grades.values()), reverse=True)
        ideal = sum(g / np.log2(r + 1) for r, g in enumerate(gains[:k], start=1))
        if ideal <= 0:
            continue  # zero ideal DCG: query excluded
        dcg = sum((2 ** grades.get(doc_id, 0) - 1) / np.log2(rank + 1)
                  for rank, (doc_id, _) in enumerate(ranked[:k], start=1))
        out[qid] = dcg / ideal
    return out


def ndcg_at_k(run: Run, qrels: Qrels, k: int = 10) -> float:
    values = per_query_ndcg(run, qrels, k)
    return statistics.fmean(values.values()) if values else 0.0


@dataclass
class TostResult:
    equivalent: bool
    p_lower: float
    p_upper: float
    mean_diff: float
    zero_variance: bool = False


def tost_equivalence(a, b, delta: float = 0.05, alpha_level: float = 0.05) -> TostResult:
    """Paired two-one-sided t-tests against the bounds (-delta, +delta).

    Equivalent iff both one-sided p-values fall below alpha_level.  With
    zero-variance differences the verdict comes from the mean alone and is
    flagged.
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape or a.ndim != 1 or len(a) < 2:
        raise ValueError("TOST needs paired samples of equal length >= 2")
    d = a - b
    mean = float(d.mean())
    sd = float(d.std(ddof=1))
    n = len(d)
    if sd == 0.0:
        inside = abs(mean) < delta
        p = 0.0 if inside else 1.0
        return TostResult(equivalent=inside, p_lower=p, p_upper=p,
                          mean_diff=mean, zero_variance=True)
    se = sd / np.sqrt(n)
    df = n - 1
    p_lower = float(sps.t.sf((mean + delta) / se, df))   # H0: diff <= -delta
    p_upper = float(sps.t.cdf((mean - delta) / se, df))  # H0: diff >= +delta
    return TostResult(equivalent=p_lower < alpha_level and p_upper < alpha_level,
                      p_lower=p_lower, p_upper=p_upper, mean_diff=mean)


@dataclass
class LatencyReport:
    per_query_ms: list[float] = field(default_factory=list)
    ard: float = 0.0

    @property
    def mean_ms(self) -> float:
        return statistics.fmean(self.per_query_ms) if self.per_query_ms else 0.0

    @property
    def p50_ms(self) -> float:
        return float(np.percentile(self.per_query_ms, 50)) if self.per_query_ms else 0.0

    @property
    def p95_ms(self) -> float:
        return float(np.percentile(self.per_query_ms, 95)) if self.per_query_ms else 0.0


def measure_latency(retrieve_fn, queries, repetitions: int = 3) -> LatencyReport:
    """Serial wall-clock timing; the first repetition is warm-up and is
    discarded.  retrieve_fn(query) must return (ranking, stats) where
    stats.candidates is the candidate count."""
    if repetitions < 2:
        raise ValueError("need at least 2 repetitions (first one is warm-up)")
    report = LatencyReport()
    candidate_counts = []
    for rep in range(repetitions):
        for query in queries:
            t0 = time.perf_counter()
            _, retrieval_stats = retrieve_fn(query)
            elapsed = (time.perf_counter() - t0) * 1000.0
            if rep == 0:
                continue
            report.per_query_ms.append(elapsed)
            candidate_counts.append(retrieval_stats.candidates)
    report.ard = statistics.fmean(candidate_counts) if candidate_counts else 0.0
    return report
