"""codescore-export: dump encoder hidden states for a dataset."""

from __future__ import annotations

import argparse
import logging
import sys

from .export import ExportJob, export


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="codescore-export",
        description="Encode (context, code) pairs with a pretrained model and "
        "write per-layer hidden states in the codescore interchange format.",
    )
    parser.add_argument("--model", required=True, help="checkpoint id or local path")
    parser.add_argument("--input", required=True, help="dataset NDJSON file")
    parser.add_argument(
        "--layers",
        required=True,
        help="comma-separated hidden-state indices, e.g. 7,10 (0 = embeddings)",
    )
    parser.add_argument("--max-length", type=int, default=512)
    parser.add_argument("--device", default="cpu")
    parser.add_argument("--out", required=True)
    args = parser.parse_args(argv)

    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(message)s")
    try:
        layers = tuple(int(part) for part in args.layers.split(",") if part.strip())
        job = ExportJob(
            model_id=args.model,
            input_path=args.input,
            layers=layers,
            out_path=args.out,
            max_length=args.max_length,
            device=args.device,
        )
        result = export(job)
    except Exception as exc:  # load failures, schema errors: nonzero exit
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(
        f"wrote {result['written']} entries to {args.out}"
        f" ({len(result['skipped'])} records skipped)"
    )
    return 0


if __name__ == "__main__":
    sys.exit(main())
