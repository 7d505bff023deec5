"""Meta-evaluation of similarity metrics.

Rank statistics against ground-truth labels (grouped Kendall-Tau, Pearson,
Spearman) and the distinguishability ratio over semantically equivalent
clusters, including the score-exponentiation sweep that shows how easily
distinguishability is inflated without changing any ranking.
"""

from __future__ import annotations

import itertools
import math
import random
from collections import defaultdict
from dataclasses import dataclass
from typing import Mapping, Sequence

from .errors import DegeneracyError, SchemaError


@dataclass(frozen=True)
class ScoredExample:
    """One generation: metric score and reference measurement (human grade
    or 0/1 functional correctness), grouped by originating question."""

    group_id: str
    metric_score: float
    reference_score: float

    def __post_init__(self):
        if not math.isfinite(self.metric_score) or not math.isfinite(
            self.reference_score
        ):
            raise ValueError("scores must be finite")


def kendall_tau_grouped(examples: Sequence[ScoredExample]) -> float:
    """(C - D) / (C + D) over unordered pairs within the same group.

    Pairs tied in either measurement are excluded from both counts
    (gamma-style, not tau-b); comparisons never cross groups.
    """
    by_group: dict[str, list[ScoredExample]] = defaultdict(list)
    for ex in examples:
        by_group[ex.group_id].append(ex)
    concordant = discordant = 0
    for members in by_group.values():
        for a, b in itertools.combinations(members, 2):
            dm = a.metric_score - b.metric_score
            dr = a.reference_score - b.reference_score
            if dm == 0.0 or dr == 0.0:
                continue
            if (dm > 0.0) == (dr > 0.0):
                concordant += 1
            else:
                discordant += 1
    if concordant + discordant == 0:
        raise DegeneracyError("no comparable pairs: every within-group pair is tied")
    return (concordant - discordant) / (concordant + discordant)


def pearson(xs: Sequence[float], ys: Sequence[float]) -> float:
    """Linear correlation: covariance over the product of standard deviations."""
    if len(xs) != len(ys):
        raise ValueError(f"length mismatch: {len(xs)} vs {len(ys)}")
    if len(xs) < 2:
        raise ValueError("need at least two points")
    n = len(xs)
    mean_x = math.fsum(xs) / n
    mean_y = math.fsum(ys) / n
    dx = [x - mean_x for x in xs]
    dy = [y - mean_y for y in ys]
    sxx = math.fsum(a * a for a in dx)
    syy = math.fsum(b * b for b in dy)
    if sxx == 0.0 or syy == 0.0:
        raise DegeneracyError("constant input")
    sxy = math.fsum(a * b for a, b in zip(dx, dy))
    return sxy / (math.sqrt(sxx) * math.sqrt(syy))


def average_ranks(values: Sequence[float]) -> list[float]:
    """1-based ranks; tied values share the average of their rank span."""
    order = sorted(range(len(values)), key=lambda i: values[i])
    ranks = [0.0] * len(values)
    i = 0
    while i < len(order):
        j = i
        while j + 1 < len(order) and values[order[j + 1]] == values[order[i]]:
            j += 1
        avg = (i + j) / 2.0 + 1.0
        for t in range(i, j + 1):
            ranks[order[t]] = avg
        i = j + 1
    return ranks


def spearman(xs: Sequence[float], ys: Sequence[float]) -> float:
    """Pearson over average ranks."""
    return pearson(average_ranks(xs), average_ranks(ys))


@dataclass(frozen=True)
class ClusterSet:
    """Disjoint clusters of semantically equivalent snippet ids, plus an
    optional symmetric pair-score lookup."""

    clusters: tuple[tuple[str, ...], ...]
    scores: Mapping[tuple[str, str], float] | None = None

    def __post_init__(self):
        clusters = tuple(tuple(c) for c in self.clusters)
        object.__setattr__(self, "clusters", clusters)
        seen: set[str] = set()
        for cluster in clusters:
            for item in cluster:
                if item in seen:
                    raise ValueError(f"clusters are not disjoint: '{item}' repeats")
                seen.add(item)

    def score(self, a: str, b: str) -> float:
        if self.scores is None:
            raise SchemaError("cluster set carries no pair scores")
        if (a, b) in self.scores:
            return self.scores[(a, b)]
        if (b, a) in self.scores:
            return self.scores[(b, a)]
        raise SchemaError(f"no score for pair ('{a}', '{b}')")


@dataclass(frozen=True)
class PairSample:
    intra: tuple[tuple[str, str], ...]
    inter: tuple[tuple[str, str], ...]
    intra_shortfall: int = 0
    inter_shortfall: int = 0


def sample_pairs(clusters: ClusterSet, n: int, seed: int) -> PairSample:
    """n same-cluster and n cross-cluster id pairs, sampled uniformly
    without replacement; a population smaller than n is taken whole and the
    shortfall recorded."""
    if n <= 0:
        raise ValueError(f"sample count must be positive, got {n}")
    intra_pop: list[tuple[str, str]] = []
    for cluster in clusters.clusters:
        intra_pop.extend(itertools.combinations(cluster, 2))
    inter_pop: list[tuple[str, str]] = []
    for ca, cb in itertools.combinations(clusters.clusters, 2):
        inter_pop.extend(itertools.product(ca, cb))
    if not intra_pop:
        raise ValueError("no intra-cluster pairs possible (no cluster of size >= 2)")
    if not inter_pop:
        raise ValueError("no inter-cluster pairs possible (need >= 2 clusters)")
    rng = random.Random(seed)

    def take(pop: list[tuple[str, str]]) -> tuple[tuple[tuple[str, str], ...], int]:
        if n >= len(pop):
            return tuple(pop), n - len(pop)
        return tuple(rng.sample(pop, n)), 0

    intra, intra_short = take(intra_pop)
    inter, inter_short = take(inter_pop)
    return PairSample(
        intra=intra,
        inter=inter,
        intra_shortfall=intra_short,
        inter_shortfall=inter_short,
    )


def distinguishability(
    cluster_scores_intra: Sequence[float],
    cluster_scores_inter: Sequence[float],
) -> float:
    """Sum of intra-cluster scores over sum of inter-cluster scores."""
    if not cluster_scores_intra or not cluster_scores_inter:
        raise ValueError("both score lists must be non-empty")
    denom = math.fsum(cluster_scores_inter)
    if denom == 0.0:
        raise DegeneracyError("inter-cluster score sum is zero")
    return math.fsum(cluster_scores_intra) / denom


def exponentiation_sweep(
    intra: Sequence[float],
    inter: Sequence[float],
    ks: Sequence[float],
) -> list[tuple[float, float]]:
    """Distinguishability of score^k for each exponent k.

    Raising a similarity to a power never changes how it ranks pairs, yet it
    inflates this ratio without bound, which is why the ratio alone cannot
    compare metrics.
    """
    has_negative = any(s < 0 for s in intra) or any(s < 0 for s in inter)
    results = []
    for k in ks:
        if k <= 0:
            raise ValueError(f"exponents must be positive, got {k}")
        if has_negative and not float(k).is_integer():
            raise ValueError(f"negative score with non-integer exponent {k}")
        results.append(
            (k, distinguishability([s**k for s in intra], [s**k for s in inter]))
        )
    return results
