#!/usr/bin/env python3
"""End-to-end walkthrough on the synthetic corpus: score every metric,
estimate a baseline, rescore with it, sweep layers with cross-validation,
and run the distinguishability study. Expects make_synthetic.py output."""

from __future__ import annotations

import argparse
from pathlib import Path

from codescore.cli import main as codescore


def run(argv: list[str]) -> None:
    print(f"\n$ codescore {' '.join(argv)}")
    rc = codescore(argv)
    if rc != 0:
        raise SystemExit(f"command failed with exit code {rc}")


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--data-dir", default="synthetic")
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    data = Path(args.data_dir)
    dataset = str(data / "dataset.ndjson")
    embeddings = str(data / "embeddings.ndjson")
    clusters = str(data / "clusters.json")

    for metric in ("bleu", "chrf", "rouge1", "rouge2", "rougeL"):
        run(["score", "--dataset", dataset, "--metric", metric,
             "--out", str(data / f"report_{metric}.ndjson")])

    run(["triviality", "--dataset", dataset, "--k", "5",
         "--out", str(data / "trivial.json")])
    run(["score", "--dataset", dataset, "--metric", "crystalbleu",
         "--trivial", str(data / "trivial.json"),
         "--out", str(data / "report_crystalbleu.ndjson")])

    run(["baseline", "--dataset", dataset, "--embeddings", embeddings,
         "--layer", "1", "--n-pairs", "50", "--seed", str(args.seed),
         "--out", str(data / "baseline.json")])
    run(["score", "--dataset", dataset, "--metric", "codebertscore",
         "--layer", "1", "--idf", "--embeddings", embeddings,
         "--baseline", str(data / "baseline.json"),
         "--out", str(data / "report_codebertscore.ndjson")])

    run(["sweep", "--dataset", dataset, "--embeddings", embeddings,
         "--layers", "1,2,3,4", "--folds", "3", "--seed", str(args.seed),
         "--out", str(data / "sweep.ndjson")])

    run(["meta", "--clusters", clusters, "--n-pairs", "20",
         "--seed", str(args.seed), "--k-list", "1,2,5,10,50",
         "--out", str(data / "meta.ndjson")])

    print("\nall reports written under", data)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
