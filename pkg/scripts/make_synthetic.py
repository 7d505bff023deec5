#!/usr/bin/env python3
"""Generate a synthetic evaluation corpus for exercising the toolkit.

Writes three files into --out-dir:
  dataset.ndjson     records whose candidates degrade from the reference as
                     the label drops, so metric/label correlations are real
  embeddings.ndjson  hash-encoder interchange file covering every record
  clusters.json      snippet clusters plus all-pairs similarity scores for
                     the meta verb
"""

from __future__ import annotations

import argparse
import itertools
import json
import random
from pathlib import Path

from codescore import (
    EncoderConfig,
    TokenSeq,
    hash_encode,
    score_pair,
    tokenize,
    write_interchange,
)

SNIPPETS = [
    "shutil.rmtree(folder)",
    "math.sqrt(x)",
    "os.path.join(a, b)",
    "sorted(xs, key=len)",
    "sum(v * v for v in vec)",
    "open(path).read()",
    "re.sub(r'[0-9]+', '', s)",
    "collections.Counter(words)",
]
NOISE = ["blob", "zig", "qux", "wombat", "krill", "fizz"]


def corrupt(tokens: list[str], level: int, rng: random.Random) -> list[str]:
    """Replace `level` identifier tokens with noise words."""
    out = list(tokens)
    idx = [i for i, t in enumerate(out) if any(ch.isalnum() for ch in t)]
    rng.shuffle(idx)
    for i in idx[:level]:
        out[i] = rng.choice(NOISE)
    return out


def encode_pair(context: str, code_tokens: list[str], cfg: EncoderConfig):
    ctx = tokenize(context)
    seq = TokenSeq(tokens=tuple(ctx + code_tokens), context_len=len(ctx))
    return hash_encode(seq, cfg)


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out-dir", default="synthetic")
    parser.add_argument("--groups", type=int, default=6)
    parser.add_argument("--per-group", type=int, default=4)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--dim", type=int, default=32)
    parser.add_argument("--layers", type=int, default=4, help="hash encoder depth")
    args = parser.parse_args()

    rng = random.Random(args.seed)
    cfg = EncoderConfig(seed=args.seed, dim=args.dim, n_layers=args.layers)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    rows = []
    embeddings = {}
    for g in range(args.groups):
        snippet = SNIPPETS[g % len(SNIPPETS)]
        context = f"task {g}: implement helper"
        ref_tokens = tokenize(snippet)
        for i in range(args.per_group):
            level = i  # 0 = verbatim copy, higher = noisier
            cand_tokens = corrupt(ref_tokens, level, rng)
            rec_id = f"g{g}r{i}"
            rows.append(
                {
                    "id": rec_id,
                    "group_id": f"g{g}",
                    "context": context,
                    "candidate": " ".join(cand_tokens),
                    "reference": snippet,
                    "label": float(max(0, 4 - level)),
                }
            )
            embeddings[f"{rec_id}:ref"] = encode_pair(context, ref_tokens, cfg)
            embeddings[f"{rec_id}:cand"] = encode_pair(context, cand_tokens, cfg)

    dataset_path = out_dir / "dataset.ndjson"
    dataset_path.write_text(
        "\n".join(json.dumps(r) for r in sorted(rows, key=lambda r: r["id"])) + "\n",
        encoding="utf-8",
    )
    emb_path = out_dir / "embeddings.ndjson"
    write_interchange(
        emb_path, dict(sorted(embeddings.items())), model=f"hash-test-seed{args.seed}"
    )

    # clusters: light token-level variants of each snippet, scored all-pairs
    members = {}
    for k, snippet in enumerate(SNIPPETS[: args.groups]):
        base = tokenize(snippet)
        for v in range(3):
            variant = corrupt(base, v, rng)
            members[f"c{k}v{v}"] = encode_pair("", variant, cfg)
    clusters = [
        [f"c{k}v{v}" for v in range(3)] for k in range(min(args.groups, len(SNIPPETS)))
    ]
    scores = []
    for a, b in itertools.combinations(sorted(members), 2):
        f1 = score_pair(members[a], members[b], layer=1).f1
        scores.append([a, b, f1])
    clusters_path = out_dir / "clusters.json"
    clusters_path.write_text(
        json.dumps({"clusters": clusters, "scores": scores}, sort_keys=True) + "\n",
        encoding="utf-8",
    )

    print(f"wrote {dataset_path} ({len(rows)} records)")
    print(f"wrote {emb_path} ({len(embeddings)} embeddings)")
    print(f"wrote {clusters_path} ({len(clusters)} clusters, {len(scores)} pair scores)")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
