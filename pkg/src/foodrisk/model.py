"""Trainable classifier heads with a fairness-regularized objective.

Three architectures share one training loop: logistic regression, a
linear hinge-loss SVM, and a one-hidden-layer tanh MLP. The training
objective is the classification loss plus ``lam`` times a demographic
parity surrogate (the absolute gap between group-mean predicted
probabilities), minimized by plain seeded mini-batch SGD so runs are
exactly reproducible. Gradients are analytic; tests check them against
central finite differences.
"""

from __future__ import annotations

import json
import logging
import math
import time
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import jsonfmt
from .data import Dataset, DataError, DistrictRecord, FeatureVector, RURAL, URBAN
from .fusion import Featurizer, FeaturizerConfig

log = logging.getLogger(__name__)

ARCHS = ("logistic", "svm", "mlp")

EPS = 1e-12  # probability clipping floor for the cross-entropy


class ModelError(ValueError):
    """Invalid architecture, shapes, or training input."""


class TrainingDiverged(RuntimeError):
    """Loss became non-finite during training."""


@dataclass
class ClassifierParams:
    """Weights of one classifier head plus the input layout it expects."""

    arch: str
    input_dim: int
    layout_hash: int
    weights: dict[str, np.ndarray]
    hidden: int = 0

    def __post_init__(self):
        if self.arch not in ARCHS:
            raise ModelError(f"arch must be one of {ARCHS}, got {self.arch!r}")
        expected = _expected_shapes(self.arch, self.input_dim, self.hidden)
        if set(self.weights) != set(expected):
            raise ModelError(
                f"weights for {self.arch} must be {sorted(expected)}, got {sorted(self.weights)}"
            )
        for name, shape in expected.items():
            arr = np.asarray(self.weights[name], dtype=float)
            if arr.shape != shape:
                raise ModelError(f"{name} must have shape {shape}, got {arr.shape}")
            if not np.all(np.isfinite(arr)):
                raise ModelError(f"{name} contains NaN or Inf")
            self.weights[name] = arr

    def copy(self) -> "ClassifierParams":
        return ClassifierParams(
            arch=self.arch,
            input_dim=self.input_dim,
            layout_hash=self.layout_hash,
            weights={k: v.copy() for k, v in self.weights.items()},
            hidden=self.hidden,
        )


def _expected_shapes(arch: str, k: int, hidden: int) -> dict[str, tuple]:
    if arch in ("logistic", "svm"):
        return {"w": (k,), "b": ()}
    if hidden < 1:
        raise ModelError(f"mlp needs hidden >= 1, got {hidden}")
    return {"w1": (hidden, k), "b1": (hidden,), "w2": (hidden,), "b2": ()}


@dataclass(frozen=True)
class TrainConfig:
    lam: float = 1.0
    learning_rate: float = 0.05
    epochs: int = 200
    batch_size: int = 64
    seed: int = 0
    l2: float = 1e-4
    arch: str = "mlp"
    hidden: int = 64
    fairness_surrogate: str = "mean_prob_gap"

    def __post_init__(self):
        if self.lam < 0:
            raise ModelError(f"lam must be >= 0, got {self.lam}")
        if self.learning_rate <= 0:
            raise ModelError(f"learning_rate must be > 0, got {self.learning_rate}")
        if self.epochs < 1 or self.batch_size < 1:
            raise ModelError("epochs and batch_size must be >= 1")
        if self.l2 < 0:
            raise ModelError(f"l2 must be >= 0, got {self.l2}")
        if self.arch not in ARCHS:
            raise ModelError(f"arch must be one of {ARCHS}, got {self.arch!r}")
        if self.fairness_surrogate != "mean_prob_gap":
            raise ModelError(f"unknown fairness surrogate {self.fairness_surrogate!r}")

    def to_dict(self) -> dict:
        return {
            "lam": self.lam,
            "learning_rate": self.learning_rate,
            "epochs": self.epochs,
            "batch_size": self.batch_size,
            "seed": self.seed,
            "l2": self.l2,
            "arch": self.arch,
            "hidden": self.hidden,
            "fairness_surrogate": self.fairness_surrogate,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "TrainConfig":
        return cls(**d)


@dataclass(frozen=True)
class EpochStats:
    loss_cls: float
    loss_fair: float
    loss_total: float
    train_accuracy: float
    wall_seconds: float


@dataclass(frozen=True)
class TrainHistory:
    epochs: tuple[EpochStats, ...]

    def __len__(self) -> int:
        return len(self.epochs)


def sigmoid(z: np.ndarray) -> np.ndarray:
    # Split by sign to stay overflow-free for large |z|.
    z = np.asarray(z, dtype=float)
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def init_params(
    arch: str, input_dim: int, layout_hash: int, hidden: int = 64, seed: int = 0
) -> ClassifierParams:
    """Seeded uniform init in [-1/sqrt(fan_in), +1/sqrt(fan_in)] per layer."""
    rng = np.random.default_rng(seed)
    shapes = _expected_shapes(arch, input_dim, hidden)
    fan_ins = {"w": input_dim, "b": input_dim, "w1": input_dim, "b1": input_dim,
               "w2": hidden, "b2": hidden}
    weights = {}
    for name, shape in shapes.items():
        bound = 1.0 / math.sqrt(max(fan_ins[name], 1))
        weights[name] = rng.uniform(-bound, bound, size=shape)
    return ClassifierParams(
        arch=arch,
        input_dim=input_dim,
        layout_hash=layout_hash,
        weights=weights,
        hidden=hidden if arch == "mlp" else 0,
    )


def _raw_outputs(p: ClassifierParams, X: np.ndarray):
    """Pre-sigmoid outputs plus the cache needed for backprop."""
    w = p.weights
    if p.arch in ("logistic", "svm"):
        z = X @ w["w"] + w["b"]
        return z, {"X": X}
    z1 = X @ w["w1"].T + w["b1"]
    a1 = np.tanh(z1)
    z2 = a1 @ w["w2"] + w["b2"]
    return z2, {"X": X, "a1": a1}


def forward_batch(p: ClassifierParams, X: np.ndarray) -> np.ndarray:
    """Predicted probabilities for a feature matrix (n, k)."""
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or X.shape[1] != p.input_dim:
        raise ModelError(
            f"expected feature matrix (*, {p.input_dim}), got shape {X.shape}"
        )
    z, _ = _raw_outputs(p, X)
    return sigmoid(z)


def forward(p: ClassifierParams, x) -> float:
    """Predicted probability for one fused feature vector."""
    values = x.values if isinstance(x, FeatureVector) else np.asarray(x, dtype=float)
    if values.shape != (p.input_dim,):
        raise ModelError(f"expected vector of dim {p.input_dim}, got shape {values.shape}")
    return float(forward_batch(p, values[None, :])[0])


def bce_loss(yhat: np.ndarray, y: np.ndarray) -> float:
    """Mean binary cross-entropy with probabilities clipped to [eps, 1-eps]."""
    yhat = np.asarray(yhat, dtype=float)
    y = np.asarray(y, dtype=float)
    if yhat.shape != y.shape or yhat.ndim != 1:
        raise ModelError(f"shape mismatch: yhat {yhat.shape} vs y {y.shape}")
    if yhat.size == 0:
        raise ModelError("empty batch")
    q = np.clip(yhat, EPS, 1.0 - EPS)
    return float(-np.mean(y * np.log(q) + (1.0 - y) * np.log(1.0 - q)))


def hinge_loss(margins: np.ndarray, y: np.ndarray) -> float:
    """Mean hinge loss on raw margins against labels in {0, 1}."""
    margins = np.asarray(margins, dtype=float)
    y = np.asarray(y, dtype=float)
    if margins.size == 0:
        raise ModelError("empty batch")
    t = 2.0 * y - 1.0
    return float(np.mean(np.maximum(0.0, 1.0 - t * margins)))


def parity_surrogate(yhat: np.ndarray, groups: Sequence[str]) -> float:
    """Absolute gap between group-mean predicted probabilities.

    A batch missing one group contributes zero (mini-batches may be
    single-group); a warning is logged since the fairness term is then
    inactive for that step.
    """
    yhat = np.asarray(yhat, dtype=float)
    groups = np.asarray(groups, dtype=object)
    rural = groups == RURAL
    urban = groups == URBAN
    if not rural.any() or not urban.any():
        log.warning("parity surrogate saw a single-group batch; contributing 0")
        return 0.0
    return float(abs(yhat[rural].mean() - yhat[urban].mean()))


def total_loss(
    yhat: np.ndarray,
    y: np.ndarray,
    groups: Sequence[str],
    lam: float,
    margins: Optional[np.ndarray] = None,
) -> float:
    """Classification loss plus ``lam`` times the parity surrogate.

    Pass raw ``margins`` to use the hinge loss (SVM head); otherwise the
    classification term is binary cross-entropy on ``yhat``.
    """
    cls = bce_loss(yhat, y) if margins is None else hinge_loss(margins, y)
    return cls + lam * parity_surrogate(yhat, groups)


def _loss_terms(p: ClassifierParams, X, y, groups, lam: float):
    z, _ = _raw_outputs(p, np.asarray(X, dtype=float))
    yhat = sigmoid(z)
    if p.arch == "svm":
        cls = hinge_loss(z, y)
    else:
        cls = bce_loss(yhat, y)
    fair = parity_surrogate(yhat, groups)
    return cls, fair, cls + lam * fair


def model_loss(p: ClassifierParams, X, y, groups, lam: float) -> float:
    """Total training loss of the batch under parameters ``p``."""
    return _loss_terms(p, X, y, groups, lam)[2]


def _parity_coeffs(groups: np.ndarray, yhat: np.ndarray) -> np.ndarray:
    """Per-sample d(gap)/d(yhat): signed group-mean weights, 0 if one group
    is absent; uses the subgradient sign(gap), 0 at gap == 0."""
    rural = groups == RURAL
    urban = groups == URBAN
    if not rural.any() or not urban.any():
        return np.zeros_like(yhat)
    gap = yhat[rural].mean() - yhat[urban].mean()
    sign = np.sign(gap)
    coeffs = np.where(rural, 1.0 / rural.sum(), -1.0 / urban.sum())
    return sign * coeffs


def gradients(
    p: ClassifierParams, X, y, groups, lam: float
) -> dict[str, np.ndarray]:
    """Exact analytic gradient of the total loss for one batch."""
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    groups = np.asarray(groups, dtype=object)
    n = X.shape[0]
    if n == 0:
        raise ModelError("empty batch")
    if X.shape[1] != p.input_dim:
        raise ModelError(f"expected feature matrix (*, {p.input_dim}), got {X.shape}")

    z, cache = _raw_outputs(p, X)
    yhat = sigmoid(z)
    dprob = yhat * (1.0 - yhat)

    if p.arch == "svm":
        t = 2.0 * y - 1.0
        active = (1.0 - t * z) > 0
        dz_cls = np.where(active, -t, 0.0) / n
    else:
        dz_cls = (yhat - y) / n
    dz = dz_cls + lam * _parity_coeffs(groups, yhat) * dprob

    w = p.weights
    if p.arch in ("logistic", "svm"):
        return {"w": X.T @ dz, "b": np.asarray(dz.sum())}
    a1 = cache["a1"]
    dw2 = a1.T @ dz
    db2 = np.asarray(dz.sum())
    da1 = np.outer(dz, w["w2"])
    dz1 = da1 * (1.0 - a1 * a1)
    return {"w1": dz1.T @ X, "b1": dz1.sum(axis=0), "w2": dw2, "b2": db2}


def train(
    ds_train: Dataset,
    featurizer: Featurizer | FeaturizerConfig,
    cfg: TrainConfig,
) -> tuple[ClassifierParams, TrainHistory]:
    """Fit a classifier head on fused features by mini-batch SGD.

    Deterministic for a fixed (dataset, featurizer, config) triple: the
    seed drives weight init and per-epoch shuffles, and no wall-clock
    randomness enters the optimization. L2 decay applies to weight
    matrices only, never biases.
    """
    if isinstance(featurizer, FeaturizerConfig):
        featurizer = Featurizer(featurizer).fit(ds_train)
    y = ds_train.labels().astype(float)
    groups = ds_train.groups()
    X = featurizer.transform_dataset(ds_train)
    n = X.shape[0]

    rng = np.random.default_rng(cfg.seed)
    params = init_params(
        cfg.arch, X.shape[1], featurizer.layout_hash(), cfg.hidden, seed=cfg.seed
    )
    decayed = [k for k in params.weights if k.startswith("w")]

    stats = []
    for epoch in range(1, cfg.epochs + 1):
        started = time.perf_counter()
        order = rng.permutation(n)
        for start in range(0, n, cfg.batch_size):
            idx = order[start : start + cfg.batch_size]
            grads = gradients(params, X[idx], y[idx], groups[idx], cfg.lam)
            for name, g in grads.items():
                step = g + cfg.l2 * params.weights[name] if name in decayed else g
                params.weights[name] = params.weights[name] - cfg.learning_rate * step
        cls, fair, total = _loss_terms(params, X, y, groups, cfg.lam)
        if not math.isfinite(total):
            raise TrainingDiverged(f"loss diverged at epoch {epoch}")
        acc = float(((forward_batch(params, X) >= 0.5).astype(int) == y).mean())
        stats.append(
            EpochStats(
                loss_cls=cls,
                loss_fair=fair,
                loss_total=total,
                train_accuracy=acc,
                wall_seconds=time.perf_counter() - started,
            )
        )
    return params, TrainHistory(tuple(stats))


def predict_scores(
    p: ClassifierParams,
    records: Sequence[DistrictRecord] | Dataset,
    featurizer: Featurizer,
) -> list[tuple[str, float]]:
    """Priority scores (predicted insecurity probability) per record,
    in input order."""
    if isinstance(records, Dataset):
        ds = records
    else:
        ds = Dataset(records=tuple(records), num_districts=_max_district(records) + 1)
    if featurizer.layout_hash() != p.layout_hash:
        raise ModelError(
            "featurizer layout does not match the layout the model was trained on"
        )
    X = featurizer.transform_dataset(ds)
    probs = forward_batch(p, X)
    return [(r.record_id, float(s)) for r, s in zip(ds.records, probs)]


def _max_district(records: Sequence[DistrictRecord]) -> int:
    return max((r.district_id for r in records), default=0)


# -- model artifact ---------------------------------------------------------

ARTIFACT_FORMAT = "foodrisk-model"
ARTIFACT_VERSION = 1


@dataclass
class ModelArtifact:
    """Everything needed to score new records: weights, featurizer state,
    the training config used, and optional per-group decision thresholds."""

    params: ClassifierParams
    featurizer: Featurizer
    train_config: TrainConfig
    thresholds: Optional[dict] = None  # {"rural": t, "urban": t, "target_gap": g}


def save_artifact(path, artifact: ModelArtifact) -> None:
    p = artifact.params
    doc = {
        "format": ARTIFACT_FORMAT,
        "version": ARTIFACT_VERSION,
        "arch": {"kind": p.arch, "hidden": p.hidden},
        "input_dim": p.input_dim,
        "layout_hash": p.layout_hash,
        "weights": {k: v.tolist() for k, v in sorted(p.weights.items())},
        "featurizer": artifact.featurizer.to_dict(),
        "train_config": artifact.train_config.to_dict(),
    }
    if artifact.thresholds is not None:
        doc["thresholds"] = artifact.thresholds
    with open(path, "w", encoding="utf-8") as fh:
        jsonfmt.dump(doc, fh, indent=2)


def load_artifact(path) -> ModelArtifact:
    with open(path, encoding="utf-8") as fh:
        doc = json.load(fh)
    if doc.get("format") != ARTIFACT_FORMAT:
        raise ModelError(f"{path}: not a model artifact")
    featurizer = Featurizer.from_dict(doc["featurizer"])
    weights = {k: np.asarray(v, dtype=float) for k, v in doc["weights"].items()}
    params = ClassifierParams(
        arch=doc["arch"]["kind"],
        input_dim=int(doc["input_dim"]),
        layout_hash=int(doc["layout_hash"]),
        weights=weights,
        hidden=int(doc["arch"].get("hidden", 0)),
    )
    return ModelArtifact(
        params=params,
        featurizer=featurizer,
        train_config=TrainConfig.from_dict(doc["train_config"]),
        thresholds=doc.get("thresholds"),
    )
