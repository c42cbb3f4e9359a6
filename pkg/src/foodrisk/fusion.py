"""Min-max scaling of structured indicators and fusion with text vectors.

The :class:`Featurizer` bundles the whole record-to-vector path: text
provider (TF-IDF, hashed, or precomputed embeddings), indicator scaling,
and concatenation into one fused vector with a stable layout.
"""

from __future__ import annotations

import zlib
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np

from .data import Dataset, DataError, DistrictRecord, FeatureVector, INDICATOR_FIELDS
from . import text as textmod

PROVIDERS = ("tfidf", "hash", "external")


@dataclass(frozen=True)
class NormalizationSpec:
    """Per-indicator (min, max) fitted on training data only."""

    mins: np.ndarray
    maxs: np.ndarray

    def __post_init__(self):
        mins = np.asarray(self.mins, dtype=float)
        maxs = np.asarray(self.maxs, dtype=float)
        if mins.shape != maxs.shape or mins.ndim != 1:
            raise DataError("mins and maxs must be 1-D arrays of equal length")
        if not (np.all(np.isfinite(mins)) and np.all(np.isfinite(maxs))):
            raise DataError("normalization bounds must be finite")
        if np.any(mins > maxs):
            raise DataError("normalization requires min <= max per feature")
        object.__setattr__(self, "mins", mins)
        object.__setattr__(self, "maxs", maxs)

    def to_dict(self) -> dict:
        return {"mins": [float(v) for v in self.mins], "maxs": [float(v) for v in self.maxs]}

    @classmethod
    def from_dict(cls, d: dict) -> "NormalizationSpec":
        return cls(np.array(d["mins"], dtype=float), np.array(d["maxs"], dtype=float))


def fit_minmax(ds: Dataset) -> NormalizationSpec:
    """Per-indicator min/max over the given (training) records."""
    if len(ds) == 0:
        raise DataError("cannot fit normalization on an empty dataset")
    matrix = ds.indicator_matrix()
    return NormalizationSpec(mins=matrix.min(axis=0), maxs=matrix.max(axis=0))


def apply_minmax(spec: NormalizationSpec, values) -> np.ndarray:
    """Scale indicator values into [0, 1], clamping out-of-range inputs.

    A constant training feature (min == max) maps to 0.0.
    """
    if hasattr(values, "as_array"):
        arr = values.as_array()
    else:
        arr = np.asarray(values, dtype=float)
    if arr.shape != spec.mins.shape:
        raise DataError(
            f"expected {spec.mins.shape[0]} indicator values, got shape {arr.shape}"
        )
    span = spec.maxs - spec.mins
    out = np.zeros_like(arr)
    nonconst = span > 0
    out[nonconst] = (arr[nonconst] - spec.mins[nonconst]) / span[nonconst]
    return np.clip(out, 0.0, 1.0)


def fuse_features(text_vec, structured_vec) -> FeatureVector:
    """Concatenate text features (first) with scaled indicators (second).

    Segment order is part of the model contract and is pinned by the
    featurizer's layout hash.
    """
    t = np.asarray(text_vec, dtype=float)
    s = np.asarray(structured_vec, dtype=float)
    for name, arr in (("text", t), ("structured", s)):
        if arr.ndim != 1:
            raise DataError(f"{name} vector must be 1-D, got shape {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise DataError(f"{name} vector contains NaN or Inf")
    return FeatureVector(np.concatenate([t, s]))


@dataclass(frozen=True)
class FeaturizerConfig:
    """Configuration for the record-to-vector pipeline.

    ``use_text`` / ``use_structured`` switch off one fusion segment for
    ablation runs; at least one must stay on.
    """

    provider: str = "hash"
    max_features: int = 2048
    hash_dim: int = 256
    seed: int = 0
    stopwords_path: Optional[str] = None
    embeddings_path: Optional[str] = None
    use_text: bool = True
    use_structured: bool = True

    def __post_init__(self):
        if self.provider not in PROVIDERS:
            raise DataError(f"provider must be one of {PROVIDERS}, got {self.provider!r}")
        if not (self.use_text or self.use_structured):
            raise DataError("featurizer needs at least one of text/structured segments")
        if self.provider == "external" and self.use_text and self.embeddings_path is None:
            raise DataError("external provider requires embeddings_path")

    def to_dict(self) -> dict:
        return {
            "provider": self.provider,
            "max_features": self.max_features,
            "hash_dim": self.hash_dim,
            "seed": self.seed,
            "stopwords_path": self.stopwords_path,
            "embeddings_path": self.embeddings_path,
            "use_text": self.use_text,
            "use_structured": self.use_structured,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "FeaturizerConfig":
        return cls(**d)


class Featurizer:
    """Fitted record-to-vector pipeline; immutable once fitted."""

    def __init__(self, config: FeaturizerConfig):
        self.config = config
        self.stopwords = textmod.load_stopwords(config.stopwords_path)
        self.tfidf: Optional[textmod.TfidfModel] = None
        self.embeddings: Optional[textmod.EmbeddingTable] = None
        self.norm: Optional[NormalizationSpec] = None
        self._fitted = False

    # -- fitting ---------------------------------------------------------

    def fit(self, ds: Dataset) -> "Featurizer":
        cfg = self.config
        if cfg.use_text:
            if cfg.provider == "tfidf":
                corpus = [self._tokens(r.text) for r in ds.records]
                self.tfidf = textmod.fit_tfidf(corpus, cfg.max_features)
            elif cfg.provider == "external":
                self.embeddings = textmod.load_embeddings(cfg.embeddings_path)
        if cfg.use_structured:
            self.norm = fit_minmax(ds)
        self._fitted = True
        return self

    def _tokens(self, raw: str) -> list[str]:
        return textmod.tokenize(textmod.normalize_text(raw), self.stopwords)

    # -- geometry --------------------------------------------------------

    @property
    def text_dim(self) -> int:
        cfg = self.config
        if not cfg.use_text:
            return 0
        if cfg.provider == "tfidf":
            self._require_fitted()
            return len(self.tfidf.vocabulary)
        if cfg.provider == "hash":
            return cfg.hash_dim
        self._require_fitted()
        if self.embeddings.dim is None:
            raise textmod.TextError("embedding table is empty; no dimension defined")
        return self.embeddings.dim

    @property
    def structured_dim(self) -> int:
        return len(INDICATOR_FIELDS) if self.config.use_structured else 0

    @property
    def fused_dim(self) -> int:
        return self.text_dim + self.structured_dim

    def layout_hash(self) -> int:
        """Stable fingerprint of the fused-vector layout."""
        desc = "|".join(
            [
                f"provider={self.config.provider}",
                f"text_dim={self.text_dim}",
                f"structured={','.join(INDICATOR_FIELDS) if self.config.use_structured else ''}",
                "order=text,structured",
            ]
        )
        return zlib.crc32(desc.encode("utf-8"))

    # -- transforming ----------------------------------------------------

    def _require_fitted(self):
        if not self._fitted:
            raise DataError("featurizer must be fitted before use")

    def _text_vector(self, record: DistrictRecord) -> np.ndarray:
        cfg = self.config
        if cfg.provider == "tfidf":
            return textmod.transform_tfidf(self.tfidf, self._tokens(record.text))
        if cfg.provider == "hash":
            return textmod.hash_embed(self._tokens(record.text), cfg.hash_dim, cfg.seed)
        return self.embeddings.lookup(record.record_id)

    def transform_record(self, record: DistrictRecord) -> FeatureVector:
        self._require_fitted()
        parts = []
        if self.config.use_text:
            parts.append(self._text_vector(record))
        if self.config.use_structured:
            parts.append(apply_minmax(self.norm, record.indicators))
        if len(parts) == 2:
            return fuse_features(parts[0], parts[1])
        return FeatureVector(np.asarray(parts[0], dtype=float))

    def transform_dataset(self, ds: Dataset) -> np.ndarray:
        """Feature matrix (n_records, fused_dim); fails listing every record
        that has no precomputed embedding when the provider is external."""
        self._require_fitted()
        if self.config.provider == "external" and self.config.use_text:
            missing = [r.record_id for r in ds.records if r.record_id not in self.embeddings.entries]
            if missing:
                raise textmod.TextError(f"missing embeddings for records: {missing}")
        rows = [self.transform_record(r).values for r in ds.records]
        if not rows:
            return np.zeros((0, self.fused_dim), dtype=float)
        return np.stack(rows)

    # -- serialization ---------------------------------------------------

    def to_dict(self) -> dict:
        self._require_fitted()
        out = {
            "config": self.config.to_dict(),
            "stopwords": sorted(self.stopwords),
            "layout_hash": self.layout_hash(),
        }
        if self.tfidf is not None:
            out["tfidf"] = self.tfidf.to_dict()
        if self.norm is not None:
            out["normalization"] = self.norm.to_dict()
        return out

    @classmethod
    def from_dict(cls, d: dict) -> "Featurizer":
        feat = cls(FeaturizerConfig.from_dict(d["config"]))
        feat.stopwords = frozenset(d.get("stopwords", ()))
        if "tfidf" in d:
            feat.tfidf = textmod.TfidfModel.from_dict(d["tfidf"])
        if "normalization" in d:
            feat.norm = NormalizationSpec.from_dict(d["normalization"])
        if feat.config.provider == "external" and feat.config.use_text:
            feat.embeddings = textmod.load_embeddings(feat.config.embeddings_path)
        feat._fitted = True
        return feat
