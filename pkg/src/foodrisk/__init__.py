"""foodrisk: fuse narrative text with socio-economic indicators to score
food insecurity risk, train fairness-regularized classifiers, and pick
budget-constrained intervention sets."""

from .data import (
    CSV_HEADER,
    DataError,
    Dataset,
    DistrictRecord,
    FeatureVector,
    GROUPS,
    INDICATOR_FIELDS,
    IndicatorSet,
    RURAL,
    URBAN,
    load_csv,
    save_csv,
    split_dataset,
)
from .text import (
    EmbeddingTable,
    TextError,
    TfidfModel,
    fit_tfidf,
    hash_embed,
    load_embeddings,
    load_stopwords,
    normalize_text,
    tokenize,
    transform_tfidf,
)
from .fusion import (
    Featurizer,
    FeaturizerConfig,
    NormalizationSpec,
    apply_minmax,
    fit_minmax,
    fuse_features,
)
from .model import (
    ARCHS,
    ClassifierParams,
    ModelArtifact,
    ModelError,
    TrainConfig,
    TrainHistory,
    TrainingDiverged,
    bce_loss,
    forward,
    forward_batch,
    gradients,
    hinge_loss,
    init_params,
    load_artifact,
    model_loss,
    parity_surrogate,
    predict_scores,
    save_artifact,
    total_loss,
    train,
)
from .fairness import (
    FairnessError,
    GroupThresholds,
    apply_thresholds,
    calibrate_group_thresholds,
    demographic_parity_difference,
)
from .metrics import (
    ConfusionMatrix,
    EvaluationReport,
    MetricsError,
    confusion,
    evaluate,
    pr_curve,
    roc_auc,
    roc_curve,
    save_curves,
    save_report,
)
from .allocate import (
    AllocationProblem,
    AllocationResult,
    AllocatorError,
    Candidate,
    InfeasibleFloors,
    build_problem,
    solve_bruteforce,
    solve_dp,
    solve_greedy,
)
from .synth import SynthConfig, SynthError, emit_embeddings, generate, load_phrase_bands

__version__ = "0.1.0"

__all__ = [
    "ARCHS",
    "AllocationProblem",
    "AllocationResult",
    "AllocatorError",
    "CSV_HEADER",
    "Candidate",
    "ClassifierParams",
    "ConfusionMatrix",
    "DataError",
    "Dataset",
    "DistrictRecord",
    "EmbeddingTable",
    "EvaluationReport",
    "FairnessError",
    "FeatureVector",
    "Featurizer",
    "FeaturizerConfig",
    "GROUPS",
    "GroupThresholds",
    "INDICATOR_FIELDS",
    "IndicatorSet",
    "InfeasibleFloors",
    "MetricsError",
    "ModelArtifact",
    "ModelError",
    "NormalizationSpec",
    "RURAL",
    "SynthConfig",
    "SynthError",
    "TextError",
    "TfidfModel",
    "TrainConfig",
    "TrainHistory",
    "TrainingDiverged",
    "URBAN",
    "apply_minmax",
    "apply_thresholds",
    "bce_loss",
    "build_problem",
    "calibrate_group_thresholds",
    "confusion",
    "demographic_parity_difference",
    "emit_embeddings",
    "evaluate",
    "fit_minmax",
    "fit_tfidf",
    "forward",
    "forward_batch",
    "fuse_features",
    "generate",
    "gradients",
    "hash_embed",
    "hinge_loss",
    "init_params",
    "load_artifact",
    "load_csv",
    "load_embeddings",
    "load_phrase_bands",
    "load_stopwords",
    "model_loss",
    "normalize_text",
    "parity_surrogate",
    "pr_curve",
    "predict_scores",
    "roc_auc",
    "roc_curve",
    "save_artifact",
    "save_csv",
    "save_curves",
    "save_report",
    "solve_bruteforce",
    "solve_dp",
    "solve_greedy",
    "split_dataset",
    "tokenize",
    "total_loss",
    "train",
    "transform_tfidf",
]
