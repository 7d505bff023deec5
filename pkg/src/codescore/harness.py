"""Dataset ingestion, metric execution, cross-validated sweeps, reports.

The harness owns all file I/O: newline-delimited datasets, interchange
embeddings (read via the encoders module), baseline and trivial-set JSON
files, cluster files for distinguishability studies, and the NDJSON score
reports. Reports are byte-identical across runs for identical inputs,
configuration, and seed.
"""

from __future__ import annotations

import itertools
import json
import math
import random
import statistics
from dataclasses import dataclass
from typing import Mapping, Sequence

from . import meta_eval, score_core, surface_metrics
from .errors import DegeneracyError, SchemaError
from .meta_eval import ClusterSet, ScoredExample
from .score_core import Baseline, IdfTable
from .seqmodel import EncodedSequence, ScoreReport, strip_markers
from .surface_metrics import TrivialSet, tokenize

SURFACE_METRICS = ("bleu", "chrf", "rouge1", "rouge2", "rougeL", "crystalbleu")
METRICS = ("codebertscore",) + SURFACE_METRICS
F_VARIANTS = ("F1", "F3")


@dataclass(frozen=True)
class EvalRecord:
    """One dataset row: context, candidate, reference, grouping key, and the
    ground-truth label (human grade or 0/1 correctness)."""

    id: str
    group_id: str
    context: str
    candidate: str
    reference: str
    label: float

    def __post_init__(self):
        if not self.id:
            raise ValueError("id must be non-empty")
        if not self.group_id:
            raise ValueError("group_id must be non-empty")
        if not math.isfinite(self.label):
            raise ValueError("label must be finite")


@dataclass(frozen=True)
class RunConfig:
    """Metric selection and hyperparameters for one harness run."""

    metric: str = "codebertscore"
    layer: int | None = None
    f_variant: str = "F1"
    idf: bool = False
    baseline_path: str | None = None
    seed: int = 0
    folds: int = 3
    trivial_path: str | None = None
    use_encoder_tokens: bool = False
    marker_chars: tuple[str, ...] = ()

    def __post_init__(self):
        if self.metric not in METRICS:
            raise ValueError(f"unknown metric '{self.metric}'; choose from {METRICS}")
        if self.f_variant not in F_VARIANTS:
            raise ValueError(f"f_variant must be one of {F_VARIANTS}")


def load_dataset(path) -> list[EvalRecord]:
    """Parse a newline-delimited dataset; ids must be unique."""
    with open(path, encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    records: list[EvalRecord] = []
    seen: set[str] = set()
    for line_no, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        try:
            raw = json.loads(line)
        except json.JSONDecodeError as exc:
            raise SchemaError(f"line {line_no}: invalid JSON: {exc}") from None
        if not isinstance(raw, dict):
            raise SchemaError(f"line {line_no}: record must be a JSON object")
        for key in ("id", "group_id", "context", "candidate", "reference"):
            if key not in raw:
                raise SchemaError(f"line {line_no}: missing field '{key}'")
            if not isinstance(raw[key], str):
                raise SchemaError(f"line {line_no}: field '{key}' must be a string")
        if "label" not in raw:
            raise SchemaError(f"line {line_no}: missing field 'label'")
        label = raw["label"]
        if isinstance(label, bool) or not isinstance(label, (int, float)):
            raise SchemaError(f"line {line_no}: field 'label' must be a number")
        if raw["id"] in seen:
            raise SchemaError(f"line {line_no}: duplicate id '{raw['id']}'")
        seen.add(raw["id"])
        try:
            records.append(
                EvalRecord(
                    id=raw["id"],
                    group_id=raw["group_id"],
                    context=raw["context"],
                    candidate=raw["candidate"],
                    reference=raw["reference"],
                    label=float(label),
                )
            )
        except ValueError as exc:
            raise SchemaError(f"line {line_no}: {exc}") from None
    if not records:
        raise SchemaError(f"{path}: empty dataset")
    return records


def save_baseline(path, baseline: Baseline) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(
            {"b": baseline.b, "n_pairs": baseline.n_pairs, "seed": baseline.seed},
            fh,
            sort_keys=True,
        )
        fh.write("\n")


def load_baseline(path) -> Baseline:
    with open(path, encoding="utf-8") as fh:
        raw = json.load(fh)
    try:
        return Baseline(b=float(raw["b"]), n_pairs=int(raw["n_pairs"]), seed=int(raw["seed"]))
    except (KeyError, TypeError, ValueError) as exc:
        raise SchemaError(f"{path}: invalid baseline file: {exc}") from None


def save_trivial(path, trivial: TrivialSet, orders: Sequence[int]) -> None:
    payload = {
        "k": trivial.k,
        "orders": sorted(orders),
        "ngrams": sorted(list(gram) for gram in trivial.ngrams),
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, sort_keys=True)
        fh.write("\n")


def load_trivial(path) -> TrivialSet:
    with open(path, encoding="utf-8") as fh:
        raw = json.load(fh)
    try:
        ngrams = frozenset(tuple(gram) for gram in raw["ngrams"])
        return TrivialSet(ngrams=ngrams, k=int(raw["k"]))
    except (KeyError, TypeError, ValueError) as exc:
        raise SchemaError(f"{path}: invalid trivial-set file: {exc}") from None


def load_clusters(path) -> ClusterSet:
    """Cluster file: {"clusters": [[id, ...], ...],
    "scores": [[id_a, id_b, value], ...]} with symmetric pair lookup."""
    with open(path, encoding="utf-8") as fh:
        raw = json.load(fh)
    if not isinstance(raw, dict) or "clusters" not in raw:
        raise SchemaError(f"{path}: missing 'clusters'")
    clusters = raw["clusters"]
    if not isinstance(clusters, list) or not all(
        isinstance(c, list) and all(isinstance(i, str) for i in c) for c in clusters
    ):
        raise SchemaError(f"{path}: 'clusters' must be a list of id lists")
    scores = None
    if raw.get("scores") is not None:
        scores = {}
        for entry in raw["scores"]:
            if (
                not isinstance(entry, list)
                or len(entry) != 3
                or not isinstance(entry[0], str)
                or not isinstance(entry[1], str)
                or isinstance(entry[2], bool)
                or not isinstance(entry[2], (int, float))
            ):
                raise SchemaError(
                    f"{path}: score entries must be [id_a, id_b, value], got {entry!r}"
                )
            scores[(entry[0], entry[1])] = float(entry[2])
    try:
        return ClusterSet(clusters=tuple(tuple(c) for c in clusters), scores=scores)
    except ValueError as exc:
        raise SchemaError(f"{path}: {exc}") from None


def _embedding_pair(
    record: EvalRecord, embeddings: Mapping[str, EncodedSequence]
) -> tuple[EncodedSequence, EncodedSequence]:
    return embeddings[f"{record.id}:ref"], embeddings[f"{record.id}:cand"]


def _check_embeddings(
    records: Sequence[EvalRecord], embeddings: Mapping[str, EncodedSequence] | None
) -> None:
    if embeddings is None:
        raise SchemaError("metric requires an embeddings file")
    missing = []
    for record in records:
        for suffix in (":ref", ":cand"):
            key = record.id + suffix
            if key not in embeddings:
                missing.append(key)
    if missing:
        raise SchemaError(f"missing embedding ids: {sorted(missing)}")


def _surface_tokens(
    record: EvalRecord,
    embeddings: Mapping[str, EncodedSequence] | None,
    cfg: RunConfig,
) -> tuple[list[str], list[str]]:
    if cfg.use_encoder_tokens:
        ref_enc, cand_enc = _embedding_pair(record, embeddings)
        cand = [strip_markers(t, cfg.marker_chars) for t in cand_enc.seq.code_tokens]
        ref = [strip_markers(t, cfg.marker_chars) for t in ref_enc.seq.code_tokens]
        return cand, ref
    return tokenize(record.candidate), tokenize(record.reference)


def _surface_score(
    record: EvalRecord,
    embeddings: Mapping[str, EncodedSequence] | None,
    cfg: RunConfig,
    trivial: TrivialSet | None,
) -> float:
    if cfg.metric == "chrf":
        if cfg.use_encoder_tokens:
            cand_toks, ref_toks = _surface_tokens(record, embeddings, cfg)
            return surface_metrics.chrf(" ".join(cand_toks), " ".join(ref_toks))
        return surface_metrics.chrf(record.candidate, record.reference)
    cand, ref = _surface_tokens(record, embeddings, cfg)
    if cfg.metric == "bleu":
        return surface_metrics.bleu(cand, ref)
    if cfg.metric == "rouge1":
        return surface_metrics.rouge_n(cand, ref, 1)
    if cfg.metric == "rouge2":
        return surface_metrics.rouge_n(cand, ref, 2)
    if cfg.metric == "rougeL":
        return surface_metrics.rouge_l(cand, ref)
    if cfg.metric == "crystalbleu":
        if trivial is None:
            raise ValueError(
                "crystalbleu requires a trivial n-gram set (triviality verb or trivial_path)"
            )
        return surface_metrics.crystal_bleu(cand, ref, trivial)
    raise ValueError(f"unknown surface metric '{cfg.metric}'")


def correlation_summary(examples: Sequence[ScoredExample]) -> dict:
    """All three statistics; a degenerate statistic is reported as an error
    string rather than failing the run."""
    out: dict = {}
    metric = [ex.metric_score for ex in examples]
    labels = [ex.reference_score for ex in examples]
    try:
        out["kendall_tau"] = meta_eval.kendall_tau_grouped(examples)
    except DegeneracyError as exc:
        out["kendall_tau"] = None
        out["kendall_tau_error"] = str(exc)
    for name, fn in (("pearson", meta_eval.pearson), ("spearman", meta_eval.spearman)):
        try:
            out[name] = fn(metric, labels)
        except DegeneracyError as exc:
            out[name] = None
            out[f"{name}_error"] = str(exc)
    return out


@dataclass(frozen=True)
class RunResult:
    rows: tuple[dict, ...]
    summary: dict


def _codebertscore_reports(
    records: Sequence[EvalRecord],
    embeddings: Mapping[str, EncodedSequence],
    layer: int,
    idf: IdfTable | None,
    baseline: Baseline | None,
    marker_chars: Sequence[str],
) -> dict[str, ScoreReport]:
    reports = {}
    for record in records:
        ref_enc, cand_enc = _embedding_pair(record, embeddings)
        reports[record.id] = score_core.score_pair(
            ref_enc,
            cand_enc,
            layer,
            idf=idf,
            baseline=baseline,
            marker_chars=marker_chars,
        )
    return reports


def _build_idf(
    records: Sequence[EvalRecord],
    embeddings: Mapping[str, EncodedSequence],
    marker_chars: Sequence[str],
) -> IdfTable:
    corpus = [embeddings[f"{r.id}:ref"].seq for r in records]
    return score_core.idf_table(corpus, marker_chars)


def run_metric(
    records: Sequence[EvalRecord],
    embeddings: Mapping[str, EncodedSequence] | None,
    cfg: RunConfig,
) -> RunResult:
    """Score every record with the configured metric and correlate the
    scores with the ground-truth labels."""
    if not records:
        raise ValueError("no records to score")
    records = sorted(records, key=lambda r: r.id)
    trivial = load_trivial(cfg.trivial_path) if cfg.trivial_path else None
    baseline = load_baseline(cfg.baseline_path) if cfg.baseline_path else None

    rows = []
    if cfg.metric == "codebertscore":
        if cfg.layer is None:
            raise ValueError("codebertscore requires a layer")
        _check_embeddings(records, embeddings)
        idf = _build_idf(records, embeddings, cfg.marker_chars) if cfg.idf else None
        reports = _codebertscore_reports(
            records, embeddings, cfg.layer, idf, baseline, cfg.marker_chars
        )
        for record in records:
            rep = reports[record.id]
            score = rep.f1 if cfg.f_variant == "F1" else rep.f3
            row = {
                "id": record.id,
                "group_id": record.group_id,
                "score": score,
                "precision": rep.precision,
                "recall": rep.recall,
                "f1": rep.f1,
                "f3": rep.f3,
            }
            if rep.rescaled is not None:
                row["rescaled"] = {
                    "precision": rep.rescaled.precision,
                    "recall": rep.rescaled.recall,
                    "f1": rep.rescaled.f1,
                    "f3": rep.rescaled.f3,
                }
            rows.append(row)
    else:
        if cfg.use_encoder_tokens:
            _check_embeddings(records, embeddings)
        for record in records:
            score = _surface_score(record, embeddings, cfg, trivial)
            rows.append({"id": record.id, "group_id": record.group_id, "score": score})

    examples = [
        ScoredExample(
            group_id=record.group_id,
            metric_score=row["score"],
            reference_score=record.label,
        )
        for record, row in zip(records, rows)
    ]
    summary = {
        "metric": cfg.metric,
        "n_records": len(records),
        "f_variant": cfg.f_variant if cfg.metric == "codebertscore" else None,
        "layer": cfg.layer if cfg.metric == "codebertscore" else None,
        "idf": cfg.idf if cfg.metric == "codebertscore" else None,
    }
    summary.update(correlation_summary(examples))
    return RunResult(rows=tuple(rows), summary=summary)


def assign_folds(
    records: Sequence[EvalRecord], folds: int, seed: int
) -> dict[str, int]:
    """Seeded group-respecting fold assignment: a group never splits."""
    if folds < 2:
        raise ValueError(f"folds must be >= 2, got {folds}")
    groups = sorted({r.group_id for r in records})
    if len(groups) < folds:
        raise ValueError(f"{len(groups)} groups cannot fill {folds} folds")
    rng = random.Random(seed)
    rng.shuffle(groups)
    return {group: i % folds for i, group in enumerate(groups)}


def cv_sweep(
    records: Sequence[EvalRecord],
    embeddings: Mapping[str, EncodedSequence],
    layers: Sequence[int],
    variants: Sequence[str] = F_VARIANTS,
    folds: int = 3,
    seed: int = 0,
    idf: bool = False,
    marker_chars: Sequence[str] = (),
) -> dict:
    """Per-fold (layer, F-variant) selection by held-in Kendall-Tau, scored
    on the held-out fold; reports per-fold picks and mean/stdev across
    folds. Ties go to the earliest candidate in (layers, variants) order."""
    if not layers:
        raise ValueError("at least one layer required")
    for variant in variants:
        if variant not in F_VARIANTS:
            raise ValueError(f"unknown F variant '{variant}'")
    records = sorted(records, key=lambda r: r.id)
    _check_embeddings(records, embeddings)
    fold_of = assign_folds(records, folds, seed)

    idf_table = _build_idf(records, embeddings, marker_chars) if idf else None
    reports_by_layer = {
        layer: _codebertscore_reports(
            records, embeddings, layer, idf_table, None, marker_chars
        )
        for layer in layers
    }

    def examples_for(subset, layer, variant):
        return [
            ScoredExample(
                group_id=r.group_id,
                metric_score=(
                    reports_by_layer[layer][r.id].f1
                    if variant == "F1"
                    else reports_by_layer[layer][r.id].f3
                ),
                reference_score=r.label,
            )
            for r in subset
        ]

    fold_reports = []
    for fold in range(folds):
        train = [r for r in records if fold_of[r.group_id] != fold]
        held = [r for r in records if fold_of[r.group_id] == fold]
        best = None
        for layer, variant in itertools.product(layers, variants):
            try:
                tau = meta_eval.kendall_tau_grouped(examples_for(train, layer, variant))
            except DegeneracyError:
                continue
            if best is None or tau > best[0]:
                best = (tau, layer, variant)
        if best is None:
            raise DegeneracyError(
                f"fold {fold}: no (layer, variant) produced comparable training pairs"
            )
        _, layer, variant = best
        held_examples = examples_for(held, layer, variant)
        stats = correlation_summary(held_examples)
        fold_reports.append(
            {
                "fold": fold,
                "layer": layer,
                "f_variant": variant,
                "n_records": len(held),
                "train_kendall_tau": best[0],
                **stats,
            }
        )

    summary: dict = {
        "folds": folds,
        "seed": seed,
        "layers": list(layers),
        "variants": list(variants),
        "idf": idf,
        "selected": [
            {"fold": fr["fold"], "layer": fr["layer"], "f_variant": fr["f_variant"]}
            for fr in fold_reports
        ],
    }
    for stat in ("kendall_tau", "pearson", "spearman"):
        values = [fr[stat] for fr in fold_reports if fr.get(stat) is not None]
        summary[f"{stat}_mean"] = statistics.fmean(values) if values else None
        summary[f"{stat}_stdev"] = (
            statistics.stdev(values) if len(values) >= 2 else None
        )
        summary[f"{stat}_folds_used"] = len(values)
    return {"summary": summary, "folds": fold_reports}


def baseline_from_records(
    records: Sequence[EvalRecord],
    embeddings: Mapping[str, EncodedSequence],
    layer: int,
    n: int,
    seed: int,
    marker_chars: Sequence[str] = (),
) -> Baseline:
    """Estimate the unrelated-pair baseline by pairing candidates with
    references of records from different groups."""
    records = sorted(records, key=lambda r: r.id)
    _check_embeddings(records, embeddings)
    pairs = []
    for a in records:
        for b in records:
            if a.group_id == b.group_id:
                continue
            pairs.append(
                (embeddings[f"{b.id}:ref"], embeddings[f"{a.id}:cand"])
            )
    if not pairs:
        raise ValueError("no cross-group record pairs available")
    return score_core.estimate_baseline(pairs, layer, n, seed, marker_chars)


def write_report(path, rows: Sequence[dict], summary: dict) -> None:
    """NDJSON: one line per row, then one {"summary": ...} line. Key order
    is sorted so identical inputs produce identical bytes."""
    with open(path, "w", encoding="utf-8") as fh:
        for row in rows:
            fh.write(json.dumps(row, sort_keys=True, ensure_ascii=False) + "\n")
        fh.write(json.dumps({"summary": summary}, sort_keys=True, ensure_ascii=False) + "\n")
