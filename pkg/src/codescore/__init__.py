"""Embedding-based code similarity scoring, surface-overlap baselines, and
metric meta-evaluation."""

from .encoders import (
    Backend,
    EncoderConfig,
    InterchangeHeader,
    hash_encode,
    load_interchange,
    load_interchange_with_header,
    select_layer,
    write_interchange,
)
from .errors import CodeScoreError, DegeneracyError, SchemaError
from .harness import EvalRecord, RunConfig, cv_sweep, load_dataset, run_metric
from .meta_eval import (
    ClusterSet,
    PairSample,
    ScoredExample,
    distinguishability,
    exponentiation_sweep,
    kendall_tau_grouped,
    pearson,
    sample_pairs,
    spearman,
)
from .score_core import (
    Baseline,
    IdfTable,
    SimilarityMatrix,
    estimate_baseline,
    f_beta,
    idf_table,
    precision_recall,
    rescale,
    score_pair,
    similarity_matrix,
)
from .seqmodel import (
    EncodedSequence,
    RescaledScores,
    ScoreReport,
    TokenClass,
    TokenMask,
    TokenSeq,
    build_mask,
    classify_token,
    strip_markers,
)
from .surface_metrics import (
    NGramProfile,
    TrivialSet,
    bleu,
    chrf,
    crystal_bleu,
    rouge_l,
    rouge_n,
    tokenize,
    trivial_ngrams,
)

__version__ = "0.1.0"
