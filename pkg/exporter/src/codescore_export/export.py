"""Run a pretrained encoder over (context, code) pairs and dump per-layer
hidden states in the codescore embedding interchange format.

For every dataset record two entries are written: `<id>:ref` encodes
context together with the reference snippet, `<id>:cand` context together
with the candidate. Special tokens are excluded from the emitted token and
vector lists, so `context_len` counts exactly the context's content tokens
and downstream masking sees only surface tokens.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import torch
from transformers import AutoModel, AutoTokenizer

log = logging.getLogger("codescore_export")

INTERCHANGE_FORMAT = "codescore-embeddings"
INTERCHANGE_VERSION = 1

# word-boundary / continuation prefixes used by common tokenizer families
MARKER_CANDIDATES = ("Ġ", "Ċ", "▁", "##")


@dataclass(frozen=True)
class ExportJob:
    model_id: str
    input_path: str
    layers: tuple[int, ...]
    out_path: str
    max_length: int = 512
    device: str = "cpu"

    def __post_init__(self):
        if not self.layers:
            raise ValueError("at least one layer required")
        if self.max_length < 8:
            raise ValueError(f"max_length must be >= 8, got {self.max_length}")


def read_records(path) -> list[dict]:
    """Dataset rows needing only id/context/candidate/reference here."""
    rows = []
    seen = set()
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                raw = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ValueError(f"line {line_no}: invalid JSON: {exc}") from None
            for key in ("id", "context", "candidate", "reference"):
                if key not in raw or not isinstance(raw[key], str):
                    raise ValueError(f"line {line_no}: missing string field '{key}'")
            if raw["id"] in seen:
                raise ValueError(f"line {line_no}: duplicate id '{raw['id']}'")
            seen.add(raw["id"])
            rows.append(raw)
    if not rows:
        raise ValueError(f"{path}: empty dataset")
    return rows


def detect_markers(tokenizer) -> list[str]:
    """Marker prefixes present in the vocabulary (e.g. '##' wordpieces)."""
    found = set()
    for token in tokenizer.get_vocab():
        for marker in MARKER_CANDIDATES:
            if token.startswith(marker) and len(token) > len(marker):
                found.add(marker)
    return sorted(found)


def _encode_pair(tokenizer, context: str, code: str):
    """Token ids for a context/code pair plus the content-token metadata.

    Returns (input_ids, keep_positions, tokens, context_len). Fast
    tokenizers use the native pair encoding and its sequence ids; slow ones
    fall back to plain newline concatenation without special tokens.
    """
    if tokenizer.is_fast:
        enc = tokenizer(context, code)
        ids = enc["input_ids"]
        seq_ids = enc.sequence_ids()
        keep = [i for i, s in enumerate(seq_ids) if s is not None]
        context_len = sum(1 for s in seq_ids if s == 0)
    else:
        ctx_ids = tokenizer(context + "\n", add_special_tokens=False)["input_ids"]
        ids = ctx_ids + tokenizer(code, add_special_tokens=False)["input_ids"]
        keep = list(range(len(ids)))
        context_len = len(ctx_ids)
    tokens = tokenizer.convert_ids_to_tokens([ids[i] for i in keep])
    return ids, keep, tokens, context_len


def export(job: ExportJob) -> dict:
    """Write the interchange file plus a sidecar manifest of skipped
    records; returns {"written": n_entries, "skipped": [...]}."""
    torch.manual_seed(0)
    torch.set_num_threads(1)
    tokenizer = AutoTokenizer.from_pretrained(job.model_id)
    model = AutoModel.from_pretrained(job.model_id).to(job.device)
    model.eval()

    n_layers = getattr(model.config, "num_hidden_layers", None)
    if n_layers is not None:
        bad = [l for l in job.layers if l < 0 or l > n_layers]
        if bad:
            raise ValueError(
                f"layers {bad} outside the model's range 0..{n_layers} "
                "(0 is the embedding layer)"
            )

    records = read_records(job.input_path)
    markers = detect_markers(tokenizer)
    join_mode = "pair" if tokenizer.is_fast else "newline"
    header = {
        "format": INTERCHANGE_FORMAT,
        "version": INTERCHANGE_VERSION,
        "model": job.model_id,
        "tokenizer_markers": markers,
        "join": join_mode,
    }

    skipped = []
    written = 0
    with open(job.out_path, "w", encoding="utf-8") as fh:
        fh.write(json.dumps(header, ensure_ascii=False) + "\n")
        for record in records:
            encoded = {}
            too_long = None
            for suffix, text in (("ref", record["reference"]), ("cand", record["candidate"])):
                ids, keep, tokens, context_len = _encode_pair(
                    tokenizer, record["context"], text
                )
                if len(ids) > job.max_length:
                    too_long = f"{suffix} sequence length {len(ids)} > {job.max_length}"
                    break
                encoded[suffix] = (ids, keep, tokens, context_len)
            if too_long is not None:
                log.warning("skipping record '%s': %s", record["id"], too_long)
                skipped.append({"id": record["id"], "reason": too_long})
                continue

            for suffix in ("ref", "cand"):
                ids, keep, tokens, context_len = encoded[suffix]
                with torch.no_grad():
                    out = model(
                        input_ids=torch.tensor([ids], device=job.device),
                        output_hidden_states=True,
                    )
                vectors = {}
                for layer in job.layers:
                    hidden = out.hidden_states[layer][0].cpu().numpy()
                    vectors[str(layer)] = hidden[keep].astype(np.float32).tolist()
                row = {
                    "id": f"{record['id']}:{suffix}",
                    "context_len": context_len,
                    "tokens": tokens,
                    "dim": int(model.config.hidden_size),
                    "layers": list(job.layers),
                    "vectors": vectors,
                }
                fh.write(json.dumps(row, ensure_ascii=False) + "\n")
                written += 1

    manifest_path = Path(str(job.out_path) + ".manifest.json")
    manifest_path.write_text(
        json.dumps({"skipped": skipped}, sort_keys=True) + "\n", encoding="utf-8"
    )
    return {"written": written, "skipped": skipped}
