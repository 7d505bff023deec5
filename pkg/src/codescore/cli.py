"""Command-line front end.

Verbs: score (one metric over a dataset), sweep (cross-validated layer and
F-variant selection), baseline (unrelated-pair scale estimation), meta
(distinguishability and the exponentiation sweep), triviality (build the
trivial n-gram set for CrystalBLEU).

Exit codes: 0 success, 2 input or schema error, 3 numeric degeneracy.
"""

from __future__ import annotations

import argparse
import sys

from . import harness, meta_eval, surface_metrics
from .encoders import load_interchange_with_header
from .errors import DegeneracyError, SchemaError
from .harness import METRICS, RunConfig

_CONVENTIONS = """\
metric conventions:
  bleu         orders 1..4, add-one smoothing on orders >= 2, one-sided
               brevity penalty exp(1 - |ref|/|cand|) when the candidate is
               shorter
  chrf         character n-grams of orders 1..6 with beta=2; whitespace
               runs collapse to single spaces; empty orders are skipped
  rouge1/2/L   F1 of n-gram overlap / longest common subsequence
  crystalbleu  bleu after removing the trivial n-gram set from both sides
               (build one with the triviality verb); orders whose reference
               n-grams are entirely trivial are skipped
  kendall_tau  concordant/discordant pairs within the same group only;
               pairs tied in either measurement are excluded (gamma-style)
"""


def _int_list(text: str) -> list[int]:
    try:
        return [int(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got '{text}'")


def _float_list(text: str) -> list[float]:
    try:
        return [float(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got '{text}'")


def _load_embeddings(path):
    header, records = load_interchange_with_header(path)
    return tuple(header.tokenizer_markers), records


def _print_kv(pairs) -> None:
    width = max(len(k) for k, _ in pairs)
    for key, value in pairs:
        print(f"  {key:<{width}}  {value}")


def _fmt(value) -> str:
    if value is None:
        return "-"
    if isinstance(value, float):
        return f"{value:.6f}"
    return str(value)


def _cmd_score(args) -> int:
    records = harness.load_dataset(args.dataset)
    markers: tuple[str, ...] = ()
    embeddings = None
    if args.embeddings:
        markers, embeddings = _load_embeddings(args.embeddings)
    cfg = RunConfig(
        metric=args.metric,
        layer=args.layer,
        f_variant=args.f_variant,
        idf=args.idf,
        baseline_path=args.baseline,
        seed=args.seed,
        trivial_path=args.trivial,
        use_encoder_tokens=args.encoder_tokens,
        marker_chars=markers,
    )
    result = harness.run_metric(records, embeddings, cfg)
    print(f"scored {len(result.rows)} records with {args.metric}")
    _print_kv(
        [(k, _fmt(v)) for k, v in sorted(result.summary.items()) if v is not None]
    )
    if args.out:
        harness.write_report(args.out, result.rows, result.summary)
        print(f"report written to {args.out}")
    return 0


def _cmd_sweep(args) -> int:
    records = harness.load_dataset(args.dataset)
    markers, embeddings = _load_embeddings(args.embeddings)
    result = harness.cv_sweep(
        records,
        embeddings,
        layers=args.layers,
        variants=args.variants,
        folds=args.folds,
        seed=args.seed,
        idf=args.idf,
        marker_chars=markers,
    )
    print(f"{args.folds}-fold sweep over layers={args.layers} variants={args.variants}")
    for fold in result["folds"]:
        print(
            f"  fold {fold['fold']}: layer={fold['layer']} variant={fold['f_variant']}"
            f" tau={_fmt(fold.get('kendall_tau'))}"
            f" pearson={_fmt(fold.get('pearson'))}"
            f" spearman={_fmt(fold.get('spearman'))}"
        )
    summary = result["summary"]
    for stat in ("kendall_tau", "pearson", "spearman"):
        print(
            f"  {stat}: mean={_fmt(summary[f'{stat}_mean'])}"
            f" stdev={_fmt(summary[f'{stat}_stdev'])}"
            f" (over {summary[f'{stat}_folds_used']} folds)"
        )
    if args.out:
        harness.write_report(args.out, result["folds"], summary)
        print(f"report written to {args.out}")
    return 0


def _cmd_baseline(args) -> int:
    records = harness.load_dataset(args.dataset)
    markers, embeddings = _load_embeddings(args.embeddings)
    baseline = harness.baseline_from_records(
        records,
        embeddings,
        layer=args.layer,
        n=args.n_pairs,
        seed=args.seed,
        marker_chars=markers,
    )
    harness.save_baseline(args.out, baseline)
    print(f"baseline b={baseline.b:.6f} over {baseline.n_pairs} pairs -> {args.out}")
    return 0


def _cmd_meta(args) -> int:
    clusters = harness.load_clusters(args.clusters)
    sample = meta_eval.sample_pairs(clusters, args.n_pairs, args.seed)
    intra = [clusters.score(a, b) for a, b in sample.intra]
    inter = [clusters.score(a, b) for a, b in sample.inter]
    d = meta_eval.distinguishability(intra, inter)
    sweep = meta_eval.exponentiation_sweep(intra, inter, args.k_list)
    print(
        f"distinguishability d={d:.6f} over {len(intra)} intra / {len(inter)} inter pairs"
    )
    if sample.intra_shortfall or sample.inter_shortfall:
        print(
            f"  population shortfall: intra={sample.intra_shortfall}"
            f" inter={sample.inter_shortfall}"
        )
    for k, dk in sweep:
        print(f"  k={k:g}  d_k={dk:.6f}")
    if args.out:
        summary = {
            "n_pairs": args.n_pairs,
            "seed": args.seed,
            "n_intra": len(intra),
            "n_inter": len(inter),
            "intra_shortfall": sample.intra_shortfall,
            "inter_shortfall": sample.inter_shortfall,
            "distinguishability": d,
            "exponentiation_sweep": [[k, dk] for k, dk in sweep],
        }
        harness.write_report(args.out, [], summary)
        print(f"report written to {args.out}")
    return 0


def _cmd_triviality(args) -> int:
    records = harness.load_dataset(args.dataset)
    corpus = [surface_metrics.tokenize(r.reference) for r in records]
    trivial = surface_metrics.trivial_ngrams(corpus, k=args.k, orders=args.orders)
    harness.save_trivial(args.out, trivial, args.orders)
    print(f"{len(trivial.ngrams)} trivial n-grams (k={args.k}) -> {args.out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="codescore",
        description="Embedding-based code similarity scoring, surface baselines, "
        "and metric meta-evaluation.",
        epilog=_CONVENTIONS,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    sub = parser.add_subparsers(dest="verb", required=True)

    p = sub.add_parser("score", help="score a dataset with one metric")
    p.add_argument("--dataset", required=True)
    p.add_argument("--metric", default="codebertscore", choices=METRICS)
    p.add_argument("--layer", type=int, help="encoder layer (codebertscore only)")
    p.add_argument("--f-variant", default="F1", choices=("F1", "F3"))
    p.add_argument("--idf", action="store_true", help="idf-weight token similarities")
    p.add_argument("--baseline", help="baseline JSON for rescaled scores")
    p.add_argument("--embeddings", help="interchange embeddings file")
    p.add_argument("--trivial", help="trivial n-gram set (crystalbleu)")
    p.add_argument(
        "--encoder-tokens",
        action="store_true",
        help="surface metrics reuse the encoder's code tokens",
    )
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", help="NDJSON report path")
    p.set_defaults(func=_cmd_score)

    p = sub.add_parser("sweep", help="cross-validated layer/F-variant selection")
    p.add_argument("--dataset", required=True)
    p.add_argument("--embeddings", required=True)
    p.add_argument("--layers", type=_int_list, required=True, help="e.g. 7,10,11")
    p.add_argument(
        "--variants",
        type=lambda s: [v.strip() for v in s.split(",") if v.strip()],
        default=["F1", "F3"],
        help="comma-separated subset of F1,F3",
    )
    p.add_argument("--folds", type=int, default=3)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--idf", action="store_true")
    p.add_argument("--out", help="NDJSON report path")
    p.set_defaults(func=_cmd_sweep)

    p = sub.add_parser("baseline", help="estimate the unrelated-pair baseline")
    p.add_argument("--dataset", required=True)
    p.add_argument("--embeddings", required=True)
    p.add_argument("--layer", type=int, required=True)
    p.add_argument("--n-pairs", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_baseline)

    p = sub.add_parser("meta", help="distinguishability and exponentiation sweep")
    p.add_argument("--clusters", required=True, help="cluster/scores JSON file")
    p.add_argument("--n-pairs", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--k-list", type=_float_list, default=[1.0])
    p.add_argument("--out", help="NDJSON report path")
    p.set_defaults(func=_cmd_meta)

    p = sub.add_parser("triviality", help="build the trivial n-gram set")
    p.add_argument("--dataset", required=True)
    p.add_argument("--k", type=int, default=500)
    p.add_argument("--orders", type=_int_list, default=[1, 2, 3, 4])
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_triviality)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except SchemaError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except DegeneracyError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
