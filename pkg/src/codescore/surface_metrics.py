"""Surface-overlap baseline metrics: BLEU, chrF, ROUGE-1/2/L, CrystalBLEU.

Self-contained on purpose; numeric parity with other toolkits is a
non-goal. Conventions baked in here: BLEU uses add-one smoothing on both
numerator and denominator for orders >= 2 and a one-sided brevity penalty;
chrF collapses whitespace runs and averages per-order F-scores with
beta=2; CrystalBLEU removes a corpus-derived trivial n-gram set before the
BLEU precision computation.
"""

from __future__ import annotations

import math
import re
from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Sequence

from .errors import DegeneracyError

_TOKEN_RE = re.compile(r"\w+|[^\w\s]", re.UNICODE)

NGram = tuple[str, ...]


def tokenize(text: str) -> list[str]:
    """Whitespace/punctuation split; each punctuation char is its own token."""
    return _TOKEN_RE.findall(text)


def _ngram_counts(tokens: Sequence[str], n: int) -> Counter[NGram]:
    return Counter(
        tuple(tokens[i : i + n]) for i in range(len(tokens) - n + 1)
    )


@dataclass(frozen=True)
class NGramProfile:
    """Multiset of order-n grams of a token list."""

    n: int
    counts: Counter

    @property
    def total(self) -> int:
        return sum(self.counts.values())


def ngram_profile(tokens: Sequence[str], n: int) -> NGramProfile:
    if n < 1:
        raise ValueError(f"n-gram order must be >= 1, got {n}")
    return NGramProfile(n=n, counts=_ngram_counts(tokens, n))


@dataclass(frozen=True)
class TrivialSet:
    """N-grams deemed trivially shared, excluded by CrystalBLEU."""

    ngrams: frozenset[NGram]
    k: int

    def __post_init__(self):
        object.__setattr__(self, "ngrams", frozenset(self.ngrams))


EMPTY_TRIVIAL_SET = TrivialSet(ngrams=frozenset(), k=0)


def _fbeta(p: float, r: float, beta: float) -> float:
    denom = beta * beta * p + r
    if denom == 0.0:
        return 0.0
    return (1.0 + beta * beta) * p * r / denom


def _clipped_bleu(
    cand: Sequence[str],
    ref: Sequence[str],
    max_n: int,
    exclude: frozenset[NGram],
) -> float:
    """Shared BLEU core; `exclude` removes n-grams from both multisets.

    Orders whose reference n-grams existed but were entirely excluded are
    dropped from the geometric mean; with an empty exclusion set this is
    exactly BLEU.
    """
    if not cand or not ref:
        raise ValueError("empty token list")
    if max_n < 1:
        raise ValueError(f"max_n must be >= 1, got {max_n}")
    log_sum = 0.0
    used_orders = 0
    for n in range(1, min(max_n, len(cand)) + 1):
        c_counts = _ngram_counts(cand, n)
        r_counts = _ngram_counts(ref, n)
        ref_had_ngrams = bool(r_counts)
        if exclude:
            for gram in exclude:
                c_counts.pop(gram, None)
                r_counts.pop(gram, None)
        if ref_had_ngrams and not r_counts:
            continue
        clipped = sum(min(c, r_counts[g]) for g, c in c_counts.items())
        total = sum(c_counts.values())
        if n >= 2:
            p = (clipped + 1) / (total + 1)
        else:
            p = clipped / total if total else 0.0
        if p == 0.0:
            return 0.0
        log_sum += math.log(p)
        used_orders += 1
    if used_orders == 0:
        raise DegeneracyError("no informative n-grams after triviality filtering")
    bp = math.exp(1.0 - len(ref) / len(cand)) if len(cand) < len(ref) else 1.0
    return bp * math.exp(log_sum / used_orders)


def bleu(cand: Sequence[str], ref: Sequence[str], max_n: int = 4) -> float:
    """Geometric mean of clipped n-gram precisions with brevity penalty."""
    return _clipped_bleu(cand, ref, max_n, frozenset())


def crystal_bleu(
    cand: Sequence[str],
    ref: Sequence[str],
    trivial: TrivialSet,
    max_n: int = 4,
) -> float:
    """BLEU with trivially shared n-grams removed from both sides first."""
    return _clipped_bleu(cand, ref, max_n, trivial.ngrams)


def trivial_ngrams(
    corpus: Iterable[Sequence[str]],
    k: int = 500,
    orders: Sequence[int] = (1, 2, 3, 4),
) -> TrivialSet:
    """The k most frequent n-grams per order over a corpus.

    Ties on total count break lexicographically so the result is stable.
    """
    docs = [list(doc) for doc in corpus]
    if not docs:
        raise ValueError("trivial-set corpus must be non-empty")
    if k < 0:
        raise ValueError(f"k must be >= 0, got {k}")
    selected: set[NGram] = set()
    for n in orders:
        if n < 1:
            raise ValueError(f"n-gram order must be >= 1, got {n}")
        totals: Counter[NGram] = Counter()
        for doc in docs:
            totals.update(_ngram_counts(doc, n))
        ranked = sorted(totals.items(), key=lambda item: (-item[1], item[0]))
        selected.update(gram for gram, _ in ranked[:k])
    return TrivialSet(ngrams=frozenset(selected), k=k)


def chrf(cand: str, ref: str, max_n: int = 6, beta: float = 2.0) -> float:
    """Character n-gram F-beta averaged over orders 1..max_n.

    Whitespace runs collapse to single spaces before n-gram extraction;
    orders empty on both sides are skipped.
    """
    if beta <= 0:
        raise ValueError(f"beta must be positive, got {beta}")
    c = " ".join(cand.split())
    r = " ".join(ref.split())
    if not c and not r:
        raise ValueError("both strings empty after whitespace collapsing")
    scores = []
    for n in range(1, max_n + 1):
        c_counts = Counter(c[i : i + n] for i in range(len(c) - n + 1))
        r_counts = Counter(r[i : i + n] for i in range(len(r) - n + 1))
        c_total = sum(c_counts.values())
        r_total = sum(r_counts.values())
        if c_total == 0 and r_total == 0:
            continue
        overlap = sum(min(count, r_counts[g]) for g, count in c_counts.items())
        p = overlap / c_total if c_total else 0.0
        rec = overlap / r_total if r_total else 0.0
        scores.append(_fbeta(p, rec, beta))
    return sum(scores) / len(scores)


def rouge_n(cand: Sequence[str], ref: Sequence[str], n: int) -> float:
    """F1 of order-n gram overlap; 0 when either side has no n-grams."""
    if not cand or not ref:
        raise ValueError("empty token list")
    if n < 1:
        raise ValueError(f"n-gram order must be >= 1, got {n}")
    c_counts = _ngram_counts(cand, n)
    r_counts = _ngram_counts(ref, n)
    c_total = sum(c_counts.values())
    r_total = sum(r_counts.values())
    if c_total == 0 or r_total == 0:
        return 0.0
    overlap = sum(min(count, r_counts[g]) for g, count in c_counts.items())
    return _fbeta(overlap / c_total, overlap / r_total, 1.0)


def _lcs_length(a: Sequence[str], b: Sequence[str]) -> int:
    prev = [0] * (len(b) + 1)
    for x in a:
        cur = [0]
        for j, y in enumerate(b, start=1):
            if x == y:
                cur.append(prev[j - 1] + 1)
            else:
                cur.append(max(prev[j], cur[j - 1]))
        prev = cur
    return prev[-1]


def rouge_l(cand: Sequence[str], ref: Sequence[str]) -> float:
    """F1 built from the longest common token subsequence."""
    if not cand or not ref:
        raise ValueError("empty token list")
    lcs = _lcs_length(cand, ref)
    return _fbeta(lcs / len(cand), lcs / len(ref), 1.0)
