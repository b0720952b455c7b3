"""Command-line interface.

Verbs: index-soft, index-hard, prune, retrieve, analyze, evaluate, tost,
bench.  Every verb accepts ``--config PATH`` pointing at a line-oriented
``key = value`` file whose keys mirror the long flag names; explicit flags
override config values.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from latte import analysis, doc_pruning, evaluation, hard_index, query_pruning, soft_index, store
from latte.scoring import MatchKind


def _coerce(value: str):
    for cast in (int, float):
        try:
            return cast(value)
        except ValueError:
            pass
    if value.lower() in ("true", "false"):
        return value.lower() == "true"
    return value


def load_config(path) -> dict:
    config = {}
    with open(path, encoding="utf-8") as f:
        for line in f:
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"bad config line: {line!r}")
            key, value = line.split("=", 1)
            config[key.strip().replace("-", "_")] = _coerce(value.strip())
    return config


def _load_idf(args, corpus):
    if getattr(args, "idf", None):
        return store.IdfTable.load(args.idf)
    return store.build_idf_table(corpus)


def _load_vocab(args):
    if getattr(args, "vocab", None):
        return store.load_vocabulary(args.vocab)
    return None


def cmd_prune(args):
    corpus = store.load_corpus(args.input)
    vocab = _load_vocab(args)
    method = doc_pruning.PruneMethod(args.method)
    cfg = doc_pruning.PruneConfig(method=method, alpha=args.alpha,
                                  special_prefix_limit=args.special_count)
    idf = None
    if method is doc_pruning.PruneMethod.IDF_TOP:
        idf = _load_idf(args, corpus)
        if vocab is None:
            vocab = store.Vocabulary(size=int(max((int(d.token_ids.max()) for d in corpus),
                                                  default=0)) + 1)
    pruned, report = doc_pruning.prune_corpus(corpus, cfg, idf=idf, vocab=vocab)
    store.save_corpus(args.output, pruned, dtype=args.dtype)
    payload = {"tokens_before": report.tokens_before,
               "tokens_after": report.tokens_after,
               "achieved_ratio": report.achieved_ratio,
               "method": args.method, "alpha": args.alpha}
    if args.report:
        with open(args.report, "w", encoding="utf-8") as f:
            json.dump(payload, f, indent=2)
    print(json.dumps(payload))


def cmd_index_soft(args):
    corpus = store.load_corpus(args.corpus)
    index = soft_index.build_soft_index(corpus, c=args.clusters,
                                        train_fraction=args.train_fraction,
                                        seed=args.seed, nprobe=args.nprobe)
    soft_index.save_soft_index(index, args.out)
    print(f"soft index: {index.c} clusters, {index.n_slots} token slots -> {args.out}")


def cmd_index_hard(args):
    corpus = store.load_corpus(args.corpus)
    index = hard_index.build_hard_index(corpus)
    hard_index.save_hard_index(index, args.out, dtype=args.dtype)
    n_entries = sum(p.n_entries for p in index.postings.values())
    print(f"hard index: {len(index.postings)} tokens, {n_entries} postings -> {args.out}")


def _qtp_config(args):
    return query_pruning.QtpConfig(method=query_pruning.QtpMethod(args.qtp),
                                   idf_keep=args.qtp_idf_keep,
                                   att_k_min=args.qtp_min, att_k_max=args.qtp_max)


def _hard_kind(kind: str) -> MatchKind:
    return MatchKind.HARD_FULL if kind == "full" else MatchKind.HARD_TOKEN


def _make_retriever(args):
    """Returns (retrieve_fn, queries); retrieve_fn(Q) -> (ranking, stats)."""
    queries = store.load_queries(args.queries)
    corpus = store.load_corpus(args.corpus)
    if args.engine == "soft":
        index = soft_index.load_soft_index(args.index)
        index.attach_corpus(corpus)
        if args.nprobe is not None:
            index.nprobe = args.nprobe
        qtp = _qtp_config(args)
        idf = _load_idf(args, corpus) if qtp.method is query_pruning.QtpMethod.IDF_TOP else None
        vocab = _load_vocab(args)

        def fn(Q):
            return soft_index.retrieve(index, Q, k=args.k, qtp=qtp,
                                       k_prime=args.k_prime, idf=idf, vocab=vocab)
    else:
        index = hard_index.load_hard_index(args.index)
        kind = _hard_kind(args.kind)

        def fn(Q):
            return hard_index.hard_retrieve(index, Q, k=args.k, kind=kind)
    return fn, queries


def cmd_retrieve(args):
    fn, queries = _make_retriever(args)
    run: evaluation.Run = {}
    total_candidates = 0
    for Q in queries:
        ranking, retrieval_stats = fn(Q)
        run[str(Q.query_id)] = [(str(d), s) for d, s in ranking]
        total_candidates += retrieval_stats.candidates
    evaluation.write_run(args.run, run, tag=args.tag)
    ard = total_candidates / len(queries) if queries else 0.0
    print(f"wrote {args.run}: {len(queries)} queries, A.R.D. {ard:.1f}")


def cmd_analyze(args):
    corpus = {d.doc_id: d for d in store.load_corpus(args.corpus)}
    queries = {q.query_id: q for q in store.load_queries(args.queries)}
    qrels = evaluation.read_qrels(args.pairs)
    pairs = []
    for qid, grades in qrels.items():
        for doc_id, grade in grades.items():
            if grade < 1:
                continue
            Q = queries.get(int(qid))
            D = corpus.get(int(doc_id))
            if Q is not None and D is not None:
                pairs.append((Q, D))
    if not pairs:
        sys.exit("no usable positive pairs")
    vocab = _load_vocab(args)
    scheme = analysis.BinScheme(args.scheme)
    idf = _load_idf(args, list(corpus.values())) if scheme is analysis.BinScheme.IDF else None
    kind = MatchKind.SOFT if args.kind == "soft" else MatchKind.HARD_TOKEN
    report = analysis.contribution_metrics(pairs, scheme, kind=kind, idf=idf,
                                           vocab=vocab, n_bins=args.bins)
    with open(args.out, "w", encoding="utf-8") as f:
        for b in range(report.n_bins):
            f.write(f"{b}\t{report.p_indice[b]:.6f}\t{report.p_score[b]:.6f}\n")
    if args.plot:
        import matplotlib
        matplotlib.use("Agg")
        import matplotlib.pyplot as plt
        x = np.arange(report.n_bins)
        width = 0.4
        fig, ax = plt.subplots(figsize=(7, 4))
        ax.bar(x - width / 2, report.p_indice, width, label="indices contribution")
        ax.bar(x + width / 2, report.p_score, width, label="score contribution")
        ax.axhline(report.hypothetical, color="gray", linestyle="--", label="uniform")
        ax.set_xlabel(f"{args.scheme} bin")
        ax.set_ylabel("fraction")
        ax.legend()
        fig.tight_layout()
        fig.savefig(args.plot)
    print(f"wrote {args.out} ({report.pair_count} pairs"
          f"{', degenerate' if report.degenerate else ''})")


def cmd_evaluate(args):
    run = evaluation.read_run(args.run)
    qrels = evaluation.read_qrels(args.qrels)
    results = {
        f"MRR@{args.mrr_k}": evaluation.mrr_at_k(run, qrels, args.mrr_k),
        f"Recall@{args.recall_k}": evaluation.recall_at_k(run, qrels, args.recall_k),
        f"NDCG@{args.ndcg_k}": evaluation.ndcg_at_k(run, qrels, args.ndcg_k),
    }
    for name, value in results.items():
        print(f"{name}\t{value:.4f}")


_PER_QUERY = {
    "mrr": evaluation.per_query_mrr,
    "recall": evaluation.per_query_recall,
    "ndcg": evaluation.per_query_ndcg,
}


def cmd_tost(args):
    name, _, cutoff = args.metric.partition("@")
    if name not in _PER_QUERY:
        sys.exit(f"unknown metric {args.metric!r}")
    k = int(cutoff) if cutoff else 10
    qrels = evaluation.read_qrels(args.qrels)
    values_a = _PER_QUERY[name](evaluation.read_run(args.run_a), qrels, k)
    values_b = _PER_QUERY[name](evaluation.read_run(args.run_b), qrels, k)
    shared = sorted(set(values_a) & set(values_b))
    if len(shared) < 2:
        sys.exit("fewer than 2 shared queries between the runs")
    result = evaluation.tost_equivalence([values_a[q] for q in shared],
                                         [values_b[q] for q in shared],
                                         delta=args.delta, alpha_level=args.alpha)
    verdict = "equivalent" if result.equivalent else "not equivalent"
    print(f"{args.metric}: {verdict} (mean diff {result.mean_diff:+.4f}, "
          f"p_lower={result.p_lower:.4g}, p_upper={result.p_upper:.4g}"
          f"{', zero variance' if result.zero_variance else ''})")


def cmd_bench(args):
    fn, queries = _make_retriever(args)
    report = evaluation.measure_latency(fn, queries, repetitions=args.repetitions)
    print(f"queries: {len(queries)}  repetitions: {args.repetitions}")
    print(f"latency mean {report.mean_ms:.2f} ms  p50 {report.p50_ms:.2f} ms  "
          f"p95 {report.p95_ms:.2f} ms  A.R.D. {report.ard:.1f}")


def _add_retrieval_flags(p):
    p.add_argument("--engine", choices=["soft", "hard"], required=True)
    p.add_argument("--index", required=True)
    p.add_argument("--corpus", required=True)
    p.add_argument("--queries", required=True)
    p.add_argument("--k", type=int, default=100)
    p.add_argument("--k-prime", type=int, default=1024, dest="k_prime")
    p.add_argument("--nprobe", type=int, default=None)
    p.add_argument("--kind", choices=["tok", "full"], default="tok")
    p.add_argument("--qtp", choices=["none", "idf", "attention"], default="none")
    p.add_argument("--qtp-idf-keep", type=int, default=3, dest="qtp_idf_keep")
    p.add_argument("--qtp-min", type=int, default=3, dest="qtp_min")
    p.add_argument("--qtp-max", type=int, default=3, dest="qtp_max")
    p.add_argument("--idf", default=None)
    p.add_argument("--vocab", default=None)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="latte",
                                     description="late-interaction retrieval with token pruning")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("prune", help="prune document tokens before indexing")
    p.add_argument("--method", choices=["first", "idf", "attention"], required=True)
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--out", dest="output", required=True)
    p.add_argument("--idf", default=None)
    p.add_argument("--vocab", default=None)
    p.add_argument("--special-count", type=int, default=None, dest="special_count")
    p.add_argument("--dtype", choices=["f32", "f16"], default="f32")
    p.add_argument("--report", default=None)
    p.set_defaults(func=cmd_prune)

    p = sub.add_parser("index-soft", help="build the IVF soft index")
    p.add_argument("--corpus", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--clusters", type=int, default=None)
    p.add_argument("--train-fraction", type=float, default=0.05, dest="train_fraction")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--nprobe", type=int, default=8)
    p.set_defaults(func=cmd_index_soft)

    p = sub.add_parser("index-hard", help="build the embedding inverted index")
    p.add_argument("--corpus", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--dtype", choices=["f32", "f16"], default="f32")
    p.set_defaults(func=cmd_index_hard)

    p = sub.add_parser("retrieve", help="run retrieval and write a TREC run file")
    _add_retrieval_flags(p)
    p.add_argument("--run", required=True)
    p.add_argument("--tag", default="latte")
    p.set_defaults(func=cmd_retrieve)

    p = sub.add_parser("analyze", help="bin-wise matching contribution report")
    p.add_argument("--pairs", required=True, help="qrels TSV of positive pairs")
    p.add_argument("--corpus", required=True)
    p.add_argument("--queries", required=True)
    p.add_argument("--scheme", choices=["position", "idf"], default="position")
    p.add_argument("--kind", choices=["soft", "hard"], default="soft")
    p.add_argument("--bins", type=int, default=10)
    p.add_argument("--idf", default=None)
    p.add_argument("--vocab", default=None)
    p.add_argument("--out", required=True)
    p.add_argument("--plot", default=None)
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("evaluate", help="score a run file against qrels")
    p.add_argument("--run", required=True)
    p.add_argument("--qrels", required=True)
    p.add_argument("--mrr-k", type=int, default=10, dest="mrr_k")
    p.add_argument("--recall-k", type=int, default=100, dest="recall_k")
    p.add_argument("--ndcg-k", type=int, default=10, dest="ndcg_k")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("tost", help="paired equivalence test between two runs")
    p.add_argument("--run-a", required=True, dest="run_a")
    p.add_argument("--run-b", required=True, dest="run_b")
    p.add_argument("--qrels", required=True)
    p.add_argument("--metric", default="mrr@10")
    p.add_argument("--delta", type=float, default=0.05)
    p.add_argument("--alpha", type=float, default=0.05)
    p.set_defaults(func=cmd_tost)

    p = sub.add_parser("bench", help="latency and A.R.D. measurement")
    _add_retrieval_flags(p)
    p.add_argument("--repetitions", type=int, default=3)
    p.set_defaults(func=cmd_bench)

    for p in sub.choices.values():
        p.add_argument("--config", default=None, help="key = value file of flag defaults")
    return parser


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    # Config files supply defaults; explicit flags win.  Peek at --config
    # first, then re-parse with the loaded values installed as defaults.
    if "--config" in argv and argv:
        config_path = argv[argv.index("--config") + 1]
        if config_path:
            config = load_config(config_path)
            sub_actions = [a for a in parser._actions
                           if isinstance(a, argparse._SubParsersAction)]
            subparser = sub_actions[0].choices[argv[0]]
            known = {a.dest for a in subparser._actions}
            unknown = set(config) - known
            if unknown:
                raise SystemExit(f"unknown config keys: {sorted(unknown)}")
            subparser.set_defaults(**config)
            for action in subparser._actions:
                if action.dest in config:
                    action.required = False
    args = parser.parse_args(argv)
    args.func(args)
    return 0


if __name__ == "__main__":
    sys.exit(main())
