"""Embedding-similarity scoring core.

Pipeline for one candidate/reference pair: mask both sequences, take the
kept tokens' vectors at the chosen layer, build the cosine-similarity
matrix, reduce column maxima to precision and row maxima to recall
(optionally idf-weighted), combine into F1/F3, and optionally rescale
against an empirical unrelated-pair baseline.
"""

from __future__ import annotations

import math
import random
from collections import Counter
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .encoders import select_layer
from .errors import DegeneracyError
from .seqmodel import (
    EncodedSequence,
    RescaledScores,
    ScoreReport,
    TokenSeq,
    build_mask,
    strip_markers,
)

_SIM_SLACK = 1e-6


@dataclass(frozen=True)
class SimilarityMatrix:
    """Cosine similarities: rows follow kept reference tokens, columns kept
    candidate tokens."""

    rows: int
    cols: int
    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        if self.rows < 1 or self.cols < 1:
            raise ValueError("similarity matrix must be at least 1x1")
        if values.shape != (self.rows, self.cols):
            raise ValueError(
                f"values shape {values.shape} != ({self.rows}, {self.cols})"
            )
        if values.size and (
            values.min() < -1.0 - _SIM_SLACK or values.max() > 1.0 + _SIM_SLACK
        ):
            raise ValueError("cosine similarity entries outside [-1, 1]")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)


@dataclass(frozen=True)
class IdfTable:
    """Per-token inverse document frequency weights over a reference corpus.

    ``default_weight`` is the smoothed idf of a token never seen in the
    corpus; lookups fall back to it.
    """

    weights: Mapping[str, float]
    doc_count: int
    default_weight: float

    def __post_init__(self):
        if any(w < 0 for w in self.weights.values()) or self.default_weight < 0:
            raise ValueError("idf weights must be non-negative")

    def lookup(self, token: str) -> float:
        return self.weights.get(token, self.default_weight)


@dataclass(frozen=True)
class Baseline:
    """Mean similarity of unrelated code pairs, used to linearly spread
    scores; must stay below 1 since rescaling divides by (1 - b)."""

    b: float
    n_pairs: int
    seed: int

    def __post_init__(self):
        if not math.isfinite(self.b) or self.b >= 1.0:
            raise DegeneracyError(f"baseline b must be finite and < 1, got {self.b}")


def _kept_vectors(enc: EncodedSequence, layer: int, marker_chars: Sequence[str]):
    mask = build_mask(enc.seq, marker_chars)
    idx = mask.kept_indices()
    vectors = select_layer(enc, layer)
    return idx, vectors


def similarity_matrix(
    ref: EncodedSequence,
    cand: EncodedSequence,
    layer: int,
    marker_chars: Sequence[str] = (),
) -> SimilarityMatrix:
    """Pairwise cosine similarity over kept tokens, float64 accumulation."""
    ref_idx, ref_vecs = _kept_vectors(ref, layer, marker_chars)
    cand_idx, cand_vecs = _kept_vectors(cand, layer, marker_chars)
    if not ref_idx or not cand_idx:
        side = "reference" if not ref_idx else "candidate"
        raise DegeneracyError(f"empty after masking: {side} has no kept tokens")
    u = ref_vecs[ref_idx].astype(np.float64)
    v = cand_vecs[cand_idx].astype(np.float64)
    u_norm = np.linalg.norm(u, axis=1)
    v_norm = np.linalg.norm(v, axis=1)
    if np.any(u_norm == 0.0) or np.any(v_norm == 0.0):
        raise DegeneracyError("degenerate embedding: zero-norm token vector")
    values = (u @ v.T) / np.outer(u_norm, v_norm)
    return SimilarityMatrix(rows=len(ref_idx), cols=len(cand_idx), values=values)


def _weighted_mean(values: np.ndarray, weights) -> float:
    if weights is None:
        return float(values.mean())
    w = np.asarray(weights, dtype=np.float64)
    if w.shape != values.shape:
        raise ValueError(f"weight length {w.shape} does not match {values.shape}")
    if np.any(w < 0):
        raise ValueError("idf weights must be non-negative")
    total = float(w.sum())
    if total == 0.0:
        raise DegeneracyError("degenerate idf weights: weight sum is zero")
    return float((values * w).sum() / total)


def precision_recall(
    s: SimilarityMatrix,
    ref_idf: Sequence[float] | None = None,
    cand_idf: Sequence[float] | None = None,
) -> tuple[float, float]:
    """Precision: mean of column maxima; recall: mean of row maxima.

    Optional weights align with the matrix axes (ref_idf per row, cand_idf
    per column); the normalizer is the weight sum.
    """
    col_max = s.values.max(axis=0)
    row_max = s.values.max(axis=1)
    precision = _weighted_mean(col_max, cand_idf)
    recall = _weighted_mean(row_max, ref_idf)
    return precision, recall


def f_beta(precision: float, recall: float, beta: float) -> float:
    """(1 + beta^2) P R / (beta^2 P + R); recall weighted beta times as
    important as precision. Zero when both inputs are zero."""
    if beta <= 0:
        raise ValueError(f"beta must be positive, got {beta}")
    denom = beta * beta * precision + recall
    if denom == 0.0:
        return 0.0
    return (1.0 + beta * beta) * precision * recall / denom


def idf_table(
    reference_corpus: Sequence[TokenSeq],
    marker_chars: Sequence[str] = (),
) -> IdfTable:
    """Smoothed negative-log document frequencies over kept tokens.

    weight(w) = -log((df(w) + 1) / (M + 1)) over M sequences; a token in
    every document gets weight 0, an unseen token gets the default weight
    -log(1 / (M + 1)).
    """
    if not reference_corpus:
        raise ValueError("idf corpus must be non-empty")
    m = len(reference_corpus)
    df: Counter[str] = Counter()
    for seq in reference_corpus:
        mask = build_mask(seq, marker_chars)
        kept = {
            strip_markers(seq.tokens[i], marker_chars) for i in mask.kept_indices()
        }
        df.update(kept)
    weights = {tok: -math.log((count + 1) / (m + 1)) for tok, count in df.items()}
    return IdfTable(
        weights=weights,
        doc_count=m,
        default_weight=-math.log(1.0 / (m + 1)),
    )


def estimate_baseline(
    pairs: Sequence[tuple[EncodedSequence, EncodedSequence]],
    layer: int,
    n: int,
    seed: int,
    marker_chars: Sequence[str] = (),
) -> Baseline:
    """Mean unweighted F1 over n unrelated pairs sampled without
    replacement; the caller guarantees the pairs are unrelated."""
    if n <= 0:
        raise ValueError(f"sample count must be positive, got {n}")
    if not pairs:
        raise ValueError("no pairs to sample from")
    if n > len(pairs):
        raise ValueError(
            f"cannot sample {n} pairs without replacement from {len(pairs)}"
        )
    rng = random.Random(seed)
    chosen = rng.sample(range(len(pairs)), n)
    total = 0.0
    for i in chosen:
        ref, cand = pairs[i]
        total += score_pair(ref, cand, layer, marker_chars=marker_chars).f1
    return Baseline(b=total / n, n_pairs=n, seed=seed)


def rescale(score: float, b: Baseline) -> float:
    """Linear spread (score - b) / (1 - b); may go negative below baseline."""
    return (score - b.b) / (1.0 - b.b)


def score_pair(
    ref: EncodedSequence,
    cand: EncodedSequence,
    layer: int,
    idf: IdfTable | None = None,
    baseline: Baseline | None = None,
    marker_chars: Sequence[str] = (),
) -> ScoreReport:
    """Full scoring of one candidate against one reference."""
    s = similarity_matrix(ref, cand, layer, marker_chars)
    ref_w = cand_w = None
    if idf is not None:
        ref_mask = build_mask(ref.seq, marker_chars)
        cand_mask = build_mask(cand.seq, marker_chars)
        ref_w = [
            idf.lookup(strip_markers(ref.seq.tokens[i], marker_chars))
            for i in ref_mask.kept_indices()
        ]
        cand_w = [
            idf.lookup(strip_markers(cand.seq.tokens[i], marker_chars))
            for i in cand_mask.kept_indices()
        ]
    precision, recall = precision_recall(s, ref_idf=ref_w, cand_idf=cand_w)
    f1 = f_beta(precision, recall, 1.0)
    f3 = f_beta(precision, recall, 3.0)
    rescaled = None
    if baseline is not None:
        rescaled = RescaledScores(
            precision=rescale(precision, baseline),
            recall=rescale(recall, baseline),
            f1=rescale(f1, baseline),
            f3=rescale(f3, baseline),
        )
    return ScoreReport(
        precision=precision,
        recall=recall,
        f1=f1,
        f3=f3,
        layer_used=layer,
        idf_used=idf is not None,
        rescaled=rescaled,
    )
