"""Encoder backends producing EncodedSequence values.

Two backends: a reader for the newline-delimited embedding interchange
format (written offline by an exporter tool), and a hash-based synthetic
encoder for tests and demos that is deterministic across processes and
platforms.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import SchemaError
from .seqmodel import EncodedSequence, TokenSeq, strip_markers

INTERCHANGE_FORMAT = "codescore-embeddings"
INTERCHANGE_VERSION = 1

_MASK64 = (1 << 64) - 1


class Backend(enum.Enum):
    INTERCHANGE_FILE = "interchange_file"
    HASH_TEST = "hash_test"


@dataclass(frozen=True)
class EncoderConfig:
    """Backend selection plus the knobs each backend needs.

    ``seed``, ``dim``, ``n_layers`` and ``context_mix`` apply to the
    HASH_TEST backend only; ``marker_chars`` lists tokenizer marker strings
    stripped before hashing and classification.
    """

    backend: Backend = Backend.HASH_TEST
    layer: int = 1
    marker_chars: tuple[str, ...] = ()
    seed: int = 0
    dim: int = 16
    n_layers: int = 2
    context_mix: bool = False

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError("dim must be >= 1")
        if self.n_layers < 1:
            raise ValueError("n_layers must be >= 1")
        if self.backend is Backend.HASH_TEST and not 1 <= self.layer <= self.n_layers:
            raise ValueError(
                f"layer {self.layer} outside the hash encoder's range 1..{self.n_layers}"
            )


@dataclass(frozen=True)
class InterchangeHeader:
    model: str
    tokenizer_markers: tuple[str, ...] = ()
    version: int = INTERCHANGE_VERSION


def stable_hash64(text: str) -> int:
    """FNV-1a over UTF-8 bytes; portable 64-bit token fingerprint."""
    h = 0xCBF29CE484222325
    for byte in text.encode("utf-8"):
        h ^= byte
        h = (h * 0x100000001B3) & _MASK64
    return h


def _splitmix64(state: int, count: int) -> list[int]:
    out = []
    x = state & _MASK64
    for _ in range(count):
        x = (x + 0x9E3779B97F4A7C15) & _MASK64
        z = x
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
        z ^= z >> 31
        out.append(z)
    return out


def _token_vector(seed: int, token: str, layer: int, dim: int, salt: int) -> np.ndarray:
    state = (seed ^ stable_hash64(token) ^ layer ^ salt) & _MASK64
    words = _splitmix64(state, dim)
    # top 53 bits -> [0, 1) -> [-1, 1)
    values = [2.0 * ((w >> 11) * 2.0 ** -53) - 1.0 for w in words]
    return np.asarray(values, dtype=np.float32)


def hash_encode(seq: TokenSeq, cfg: EncoderConfig) -> EncodedSequence:
    """Deterministic stand-in for a real encoder.

    Each token's vector is a seeded PRNG stream keyed by (seed, token hash,
    layer), so identical token strings get identical vectors at the same
    layer regardless of position. ``context_mix`` additionally salts the
    stream with the token position, crudely imitating context sensitivity.
    """
    if cfg.backend is not Backend.HASH_TEST:
        raise ValueError("hash_encode requires the HASH_TEST backend")
    layers = tuple(range(1, cfg.n_layers + 1))
    vectors = {}
    for layer in layers:
        rows = np.empty((len(seq.tokens), cfg.dim), dtype=np.float32)
        for i, token in enumerate(seq.tokens):
            stripped = strip_markers(token, cfg.marker_chars)
            salt = stable_hash64(f"@{i}") if cfg.context_mix else 0
            rows[i] = _token_vector(cfg.seed, stripped, layer, cfg.dim, salt)
        vectors[layer] = rows
    return EncodedSequence(seq=seq, dim=cfg.dim, layers=layers, vectors=vectors)


def select_layer(enc: EncodedSequence, layer: int) -> np.ndarray:
    """Token-aligned vectors for one layer; errors list what is available."""
    if layer not in enc.vectors:
        raise SchemaError(
            f"layer {layer} not available; available layers: {list(enc.layers)}"
        )
    return enc.vectors[layer]


def _schema(line_no: int, message: str) -> SchemaError:
    return SchemaError(f"line {line_no}: {message}")


def _require(record: dict, key: str, line_no: int):
    if key not in record:
        raise _schema(line_no, f"missing field '{key}'")
    return record[key]


def load_interchange_with_header(path) -> tuple[InterchangeHeader, dict[str, EncodedSequence]]:
    """Parse an interchange file, returning its header and record map."""
    with open(path, encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    if not lines or not lines[0].strip():
        raise SchemaError(f"{path}: missing header line")
    try:
        head = json.loads(lines[0])
    except json.JSONDecodeError as exc:
        raise _schema(1, f"invalid JSON in header: {exc}") from None
    if not isinstance(head, dict) or head.get("format") != INTERCHANGE_FORMAT:
        raise _schema(1, f"header 'format' must be '{INTERCHANGE_FORMAT}'")
    if head.get("version") != INTERCHANGE_VERSION:
        raise _schema(1, f"unsupported version {head.get('version')!r}")
    markers = head.get("tokenizer_markers", [])
    if not isinstance(markers, list) or not all(isinstance(m, str) for m in markers):
        raise _schema(1, "field 'tokenizer_markers' must be a list of strings")
    header = InterchangeHeader(
        model=str(head.get("model", "")),
        tokenizer_markers=tuple(markers),
    )

    records: dict[str, EncodedSequence] = {}
    file_dim: int | None = None
    file_layers: tuple[int, ...] | None = None
    for line_no, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        try:
            raw = json.loads(line)
        except json.JSONDecodeError as exc:
            raise _schema(line_no, f"invalid JSON: {exc}") from None
        if not isinstance(raw, dict):
            raise _schema(line_no, "record must be a JSON object")

        rec_id = _require(raw, "id", line_no)
        if not isinstance(rec_id, str) or not rec_id:
            raise _schema(line_no, "field 'id' must be a non-empty string")
        if rec_id in records:
            raise _schema(line_no, f"duplicate id '{rec_id}'")

        tokens = _require(raw, "tokens", line_no)
        if not isinstance(tokens, list) or not all(isinstance(t, str) for t in tokens):
            raise _schema(line_no, "field 'tokens' must be a list of strings")
        context_len = _require(raw, "context_len", line_no)
        if not isinstance(context_len, int):
            raise _schema(line_no, "field 'context_len' must be an integer")
        dim = _require(raw, "dim", line_no)
        if not isinstance(dim, int) or dim < 1:
            raise _schema(line_no, "field 'dim' must be a positive integer")
        layers = _require(raw, "layers", line_no)
        if (
            not isinstance(layers, list)
            or not layers
            or not all(isinstance(l, int) for l in layers)
        ):
            raise _schema(line_no, "field 'layers' must be a non-empty list of integers")
        vectors_raw = _require(raw, "vectors", line_no)
        if not isinstance(vectors_raw, dict):
            raise _schema(line_no, "field 'vectors' must be an object keyed by layer")

        if file_dim is None:
            file_dim, file_layers = dim, tuple(layers)
        elif dim != file_dim or tuple(layers) != file_layers:
            raise _schema(
                line_no,
                f"record dim/layers ({dim}, {layers}) differ from "
                f"file-level ({file_dim}, {list(file_layers)})",
            )

        if set(vectors_raw.keys()) != {str(l) for l in layers}:
            raise _schema(
                line_no,
                f"vector keys {sorted(vectors_raw)} do not match layers {layers}",
            )
        vectors = {}
        for layer in layers:
            rows = vectors_raw[str(layer)]
            if not isinstance(rows, list) or len(rows) != len(tokens):
                raise _schema(
                    line_no,
                    f"layer {layer}: expected {len(tokens)} vectors, "
                    f"got {len(rows) if isinstance(rows, list) else type(rows).__name__}",
                )
            for row in rows:
                if not isinstance(row, list) or len(row) != dim:
                    raise _schema(line_no, f"layer {layer}: dimension mismatch")
            arr = np.asarray(rows, dtype=np.float32)
            if not np.all(np.isfinite(arr)):
                raise _schema(line_no, f"layer {layer}: non-finite value")
            vectors[layer] = arr

        try:
            seq = TokenSeq(tokens=tuple(tokens), context_len=context_len)
            records[rec_id] = EncodedSequence(
                seq=seq, dim=dim, layers=tuple(layers), vectors=vectors
            )
        except ValueError as exc:
            raise _schema(line_no, str(exc)) from None
    return header, records


def load_interchange(path) -> dict[str, EncodedSequence]:
    """Record-id -> EncodedSequence map from an interchange file."""
    _, records = load_interchange_with_header(path)
    return records


def write_interchange(
    path,
    records: Mapping[str, EncodedSequence] | Iterable[tuple[str, EncodedSequence]],
    model: str = "",
    tokenizer_markers: Sequence[str] = (),
) -> None:
    """Write records in the interchange format (fixture/tooling support).

    Records are written in iteration order; float32 vectors are rendered as
    shortest round-tripping decimals, so load_interchange recovers them
    exactly.
    """
    items = records.items() if isinstance(records, Mapping) else records
    header = {
        "format": INTERCHANGE_FORMAT,
        "version": INTERCHANGE_VERSION,
        "model": model,
        "tokenizer_markers": list(tokenizer_markers),
    }
    first: tuple[int, tuple[int, ...]] | None = None
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(json.dumps(header, ensure_ascii=False) + "\n")
        for rec_id, enc in items:
            if first is None:
                first = (enc.dim, enc.layers)
            elif (enc.dim, enc.layers) != first:
                raise ValueError(
                    f"record '{rec_id}' dim/layers differ from the first record"
                )
            row = {
                "id": rec_id,
                "context_len": enc.seq.context_len,
                "tokens": list(enc.seq.tokens),
                "dim": enc.dim,
                "layers": list(enc.layers),
                "vectors": {
                    str(layer): enc.vectors[layer].astype(np.float32).tolist()
                    for layer in enc.layers
                },
            }
            fh.write(json.dumps(row, ensure_ascii=False) + "\n")
