"""Core domain types: district records, indicator sets, datasets, splits.

A :class:`Dataset` is immutable after load and safe to share across
workers; every operation that needs labels rejects unlabeled records
explicitly instead of guessing.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterable, Optional, Sequence

import numpy as np

RURAL = "rural"
URBAN = "urban"
GROUPS = (RURAL, URBAN)

# Indicator layout is fixed; vectorization and normalization rely on it.
INDICATOR_FIELDS = (
    "malnutrition_rate",
    "crop_yield_variability",
    "rainfall_deviation",
    "food_price_inflation",
    "pds_coverage",
    "vulnerability_index",
)

CSV_HEADER = (
    "record_id",
    "district_id",
    "group",
    *INDICATOR_FIELDS,
    "cost",
    "label",
    "text",
)

SCHEMA_VERSION = 1


class DataError(ValueError):
    """Invalid record, dataset, or file content."""


def _require_finite(name: str, value: float) -> float:
    if not math.isfinite(value):
        raise DataError(f"{name} must be finite, got {value!r}")
    return float(value)


@dataclass(frozen=True)
class IndicatorSet:
    """Structured socio-economic indicators for one observation."""

    malnutrition_rate: float
    crop_yield_variability: float
    rainfall_deviation: float
    food_price_inflation: float
    pds_coverage: float
    vulnerability_index: float

    def __post_init__(self):
        for name in INDICATOR_FIELDS:
            _require_finite(name, getattr(self, name))
        for name in ("malnutrition_rate", "pds_coverage"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise DataError(f"{name} must be in [0, 1], got {v!r}")

    def as_array(self) -> np.ndarray:
        return np.array([getattr(self, f) for f in INDICATOR_FIELDS], dtype=float)


@dataclass(frozen=True)
class DistrictRecord:
    """One observation: indicators plus free text, group, optional label, cost."""

    record_id: str
    district_id: int
    group: str
    indicators: IndicatorSet
    text: str = ""
    label: Optional[int] = None
    cost: float = 0.0

    def __post_init__(self):
        if self.group not in GROUPS:
            raise DataError(f"group must be one of {GROUPS}, got {self.group!r}")
        if self.label is not None and self.label not in (0, 1):
            raise DataError(f"label must be 0 or 1, got {self.label!r}")
        if self.district_id < 0:
            raise DataError(f"district_id must be >= 0, got {self.district_id}")
        cost = _require_finite("cost", self.cost)
        if cost < 0:
            raise DataError(f"cost must be >= 0, got {cost}")


@dataclass(frozen=True)
class FeatureVector:
    """Dense fused feature vector of fixed dimensionality."""

    values: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.values, dtype=float)
        if arr.ndim != 1:
            raise DataError(f"feature vector must be 1-D, got shape {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise DataError("feature vector contains NaN or Inf")
        object.__setattr__(self, "values", arr)

    @property
    def k(self) -> int:
        return int(self.values.shape[0])


@dataclass(frozen=True)
class Dataset:
    """Ordered, immutable collection of records with a declared district count."""

    records: tuple[DistrictRecord, ...]
    num_districts: int
    district_names: tuple[str, ...] = ()
    schema_version: int = SCHEMA_VERSION

    def __post_init__(self):
        object.__setattr__(self, "records", tuple(self.records))
        names = tuple(self.district_names) or tuple(
            f"district-{i:02d}" for i in range(self.num_districts)
        )
        if len(names) != self.num_districts:
            raise DataError(
                f"expected {self.num_districts} district names, got {len(names)}"
            )
        object.__setattr__(self, "district_names", names)
        seen = set()
        for r in self.records:
            if r.record_id in seen:
                raise DataError(f"duplicate record_id {r.record_id!r}")
            seen.add(r.record_id)
            if r.district_id >= self.num_districts:
                raise DataError(
                    f"record {r.record_id!r} has district_id {r.district_id} "
                    f">= num_districts {self.num_districts}"
                )

    def __len__(self) -> int:
        return len(self.records)

    def labels(self) -> np.ndarray:
        """Label array; raises if any record is unlabeled."""
        missing = [r.record_id for r in self.records if r.label is None]
        if missing:
            raise DataError(f"records without labels: {missing[:10]}")
        return np.array([r.label for r in self.records], dtype=int)

    def groups(self) -> np.ndarray:
        return np.array([r.group for r in self.records], dtype=object)

    def indicator_matrix(self) -> np.ndarray:
        return np.stack([r.indicators.as_array() for r in self.records])

    def positive_rate(self) -> float:
        y = self.labels()
        return float(y.mean())


def split_dataset(
    ds: Dataset, train_fraction: float, seed: int, stratify: bool = False
) -> tuple[Dataset, Dataset]:
    """Partition records into train/eval splits, deterministic per seed.

    With ``stratify`` the positive rate of each split stays within one
    percentage point of the parent's whenever sizes permit.
    """
    if not 0.0 < train_fraction < 1.0:
        raise DataError(f"train_fraction must be in (0, 1), got {train_fraction}")
    n = len(ds)
    if n < 2:
        raise DataError("need at least 2 records to split")
    rng = np.random.default_rng(seed)
    n_train = int(round(train_fraction * n))
    n_train = min(max(n_train, 1), n - 1)

    if stratify:
        unlabeled = [r.record_id for r in ds.records if r.label is None]
        if unlabeled:
            raise DataError(
                f"stratified split requires labels; unlabeled records: {unlabeled[:10]}"
            )
        y = ds.labels()
        strata = [np.flatnonzero(y == v) for v in (0, 1)]
        if any(len(s) == 0 for s in strata):
            raise DataError("stratified split requires both labels present")
        # Largest-remainder apportionment so stratum takes sum to n_train.
        quotas = [len(s) * train_fraction for s in strata]
        takes = [int(math.floor(q)) for q in quotas]
        remainders = sorted(
            range(len(strata)), key=lambda i: quotas[i] - takes[i], reverse=True
        )
        for i in remainders:
            if sum(takes) >= n_train:
                break
            takes[i] += 1
        train_idx: list[int] = []
        for s, t in zip(strata, takes):
            perm = rng.permutation(len(s))
            train_idx.extend(int(s[j]) for j in perm[:t])
    else:
        perm = rng.permutation(n)
        train_idx = [int(i) for i in perm[:n_train]]

    train_set = set(train_idx)
    train_records = tuple(r for i, r in enumerate(ds.records) if i in train_set)
    eval_records = tuple(r for i, r in enumerate(ds.records) if i not in train_set)
    mk = lambda recs: replace(ds, records=recs)
    return mk(train_records), mk(eval_records)


def _format_float(x: float) -> str:
    # repr gives the shortest round-trip form; stable across runs and platforms.
    return repr(float(x))


def save_csv(ds: Dataset, csv_path, sidecar_path=None) -> None:
    """Write the dataset CSV plus a sidecar JSON with district metadata."""
    csv_path = Path(csv_path)
    with open(csv_path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CSV_HEADER)
        for r in ds.records:
            writer.writerow(
                [
                    r.record_id,
                    r.district_id,
                    r.group,
                    *(_format_float(getattr(r.indicators, f)) for f in INDICATOR_FIELDS),
                    _format_float(r.cost),
                    "" if r.label is None else r.label,
                    r.text,
                ]
            )
    if sidecar_path is None:
        sidecar_path = csv_path.with_suffix(".districts.json")
    sidecar = {
        "schema_version": ds.schema_version,
        "num_districts": ds.num_districts,
        "district_names": list(ds.district_names),
    }
    with open(sidecar_path, "w", encoding="utf-8") as fh:
        json.dump(sidecar, fh, indent=2)
        fh.write("\n")


def load_csv(csv_path, sidecar_path=None) -> Dataset:
    """Read a dataset CSV and its sidecar; value-identical with :func:`save_csv`."""
    csv_path = Path(csv_path)
    if sidecar_path is None:
        sidecar_path = csv_path.with_suffix(".districts.json")
    with open(sidecar_path, encoding="utf-8") as fh:
        sidecar = json.load(fh)
    num_districts = int(sidecar["num_districts"])
    names = tuple(sidecar.get("district_names", ()))

    records = []
    with open(csv_path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or tuple(header) != CSV_HEADER:
            raise DataError(f"unexpected CSV header in {csv_path}: {header}")
        for lineno, row in enumerate(reader, start=2):
            if len(row) != len(CSV_HEADER):
                raise DataError(f"{csv_path}:{lineno}: expected {len(CSV_HEADER)} fields")
            (rid, district_id, group, *rest) = row
            ind_values = rest[: len(INDICATOR_FIELDS)]
            cost_s, label_s, text = rest[len(INDICATOR_FIELDS) :]
            try:
                indicators = IndicatorSet(*(float(v) for v in ind_values))
                records.append(
                    DistrictRecord(
                        record_id=rid,
                        district_id=int(district_id),
                        group=group,
                        indicators=indicators,
                        text=text,
                        label=None if label_s == "" else int(label_s),
                        cost=float(cost_s),
                    )
                )
            except (ValueError, DataError) as exc:
                raise DataError(f"{csv_path}:{lineno}: {exc}") from exc
    return Dataset(
        records=tuple(records),
        num_districts=num_districts,
        district_names=names,
        schema_version=int(sidecar.get("schema_version", SCHEMA_VERSION)),
    )
