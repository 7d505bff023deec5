"""Token sequences, keep-masks, and score containers.

A scored sequence is the concatenation of a natural-language context and a
code snippet; only code tokens that carry alphanumeric content (or are pure
arithmetic operators) participate in similarity scoring.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

ARITHMETIC_OPERATOR_CHARS = frozenset("+-*/%")


class TokenClass(enum.Enum):
    CODE_KEEP = "code"
    OPERATOR_KEEP = "operator"
    DROP = "drop"


def strip_markers(token: str, marker_chars: Sequence[str] = ()) -> str:
    """Remove leading tokenizer marker strings (word-boundary glyphs such as
    the byte-level space marker or the wordpiece continuation prefix)."""
    changed = True
    while changed:
        changed = False
        for marker in marker_chars:
            if marker and token.startswith(marker):
                token = token[len(marker):]
                changed = True
    return token


def classify_token(token: str, marker_chars: Sequence[str] = ()) -> TokenClass:
    """Classify a surface token for mask construction.

    Alphanumeric content wins: any token containing at least one
    alphanumeric character is kept as code, even when mixed with
    punctuation. Tokens made up solely of arithmetic-operator characters
    (+ - * / %) are kept as operators. Everything else (punctuation,
    brackets, whitespace, the empty string) is dropped.
    """
    stripped = strip_markers(token, marker_chars)
    if not stripped:
        return TokenClass.DROP
    if any(ch.isalnum() for ch in stripped):
        return TokenClass.CODE_KEEP
    if all(ch in ARITHMETIC_OPERATOR_CHARS for ch in stripped):
        return TokenClass.OPERATOR_KEEP
    return TokenClass.DROP


@dataclass(frozen=True)
class TokenSeq:
    """An ordered token list whose first ``context_len`` tokens are the
    natural-language context; the remainder is the code snippet."""

    tokens: tuple[str, ...]
    context_len: int = 0

    def __post_init__(self):
        object.__setattr__(self, "tokens", tuple(self.tokens))
        if not 0 <= self.context_len <= len(self.tokens):
            raise ValueError(
                f"context_len {self.context_len} outside [0, {len(self.tokens)}]"
            )

    def __len__(self) -> int:
        return len(self.tokens)

    @property
    def code_tokens(self) -> tuple[str, ...]:
        return self.tokens[self.context_len:]


@dataclass(frozen=True)
class TokenMask:
    """Boolean keep-flags aligned with a TokenSeq."""

    keep: tuple[bool, ...]

    def __post_init__(self):
        object.__setattr__(self, "keep", tuple(bool(k) for k in self.keep))

    def __len__(self) -> int:
        return len(self.keep)

    def kept_indices(self) -> list[int]:
        return [i for i, k in enumerate(self.keep) if k]

    @property
    def kept_count(self) -> int:
        return sum(self.keep)


def build_mask(seq: TokenSeq, marker_chars: Sequence[str] = ()) -> TokenMask:
    """Mask out context tokens and non-alphanumeric, non-operator tokens."""
    keep = []
    for i, token in enumerate(seq.tokens):
        if i < seq.context_len:
            keep.append(False)
        else:
            keep.append(classify_token(token, marker_chars) is not TokenClass.DROP)
    return TokenMask(tuple(keep))


@dataclass(frozen=True)
class EncodedSequence:
    """A token sequence plus per-layer, per-token embedding vectors.

    ``vectors`` maps each available layer index to a float32 array of shape
    (n_tokens, dim). Arrays are normalized to read-only float32 at
    construction; all entries must be finite.
    """

    seq: TokenSeq
    dim: int
    layers: tuple[int, ...]
    vectors: Mapping[int, np.ndarray]

    def __post_init__(self):
        layers = tuple(int(l) for l in self.layers)
        object.__setattr__(self, "layers", layers)
        if self.dim < 1:
            raise ValueError(f"dim must be >= 1, got {self.dim}")
        if not layers:
            raise ValueError("at least one layer required")
        if set(self.vectors.keys()) != set(layers):
            raise ValueError(
                f"vector layers {sorted(self.vectors)} do not match "
                f"declared layers {sorted(layers)}"
            )
        n_tokens = len(self.seq.tokens)
        normalized = {}
        for layer, arr in self.vectors.items():
            arr = np.asarray(arr, dtype=np.float32)
            if arr.shape != (n_tokens, self.dim):
                raise ValueError(
                    f"layer {layer}: expected shape ({n_tokens}, {self.dim}), "
                    f"got {arr.shape}"
                )
            if not np.all(np.isfinite(arr)):
                raise ValueError(f"layer {layer}: non-finite embedding entries")
            arr = np.ascontiguousarray(arr)
            arr.setflags(write=False)
            normalized[int(layer)] = arr
        object.__setattr__(self, "vectors", normalized)


@dataclass(frozen=True)
class RescaledScores:
    precision: float
    recall: float
    f1: float
    f3: float


@dataclass(frozen=True)
class ScoreReport:
    """Precision/recall and the F1/F3 combinations for one candidate vs.
    reference pair, plus the optional baseline-rescaled mirror."""

    precision: float
    recall: float
    f1: float
    f3: float
    layer_used: int
    idf_used: bool
    rescaled: RescaledScores | None = None
