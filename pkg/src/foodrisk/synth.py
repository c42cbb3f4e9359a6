"""Synthetic district-level food security data.

Records are driven by a two-part latent vulnerability score: a narrative
component read through severity-banded text and a structural component
read through noisy monotone indicators, compounding multiplicatively
when both run high. The binary label marks the most vulnerable tail at a
configurable positive rate. Rural districts get a latent shift so the
two groups have different base rates, which is what the fairness
machinery is there to handle.

Rainfall deviation and crop yield variability are encoded symmetrically
around 0.5 with a random direction, so their magnitude (not value)
carries signal; linear models cannot exploit them, a small nonlinear
one can.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from importlib import resources

import numpy as np

from .data import Dataset, DistrictRecord, IndicatorSet, RURAL, URBAN
from .model import sigmoid
from .text import hash_embed, normalize_text, tokenize
from . import jsonfmt


class SynthError(ValueError):
    """Invalid generator configuration."""


def load_phrase_bands() -> list[list[str]]:
    """Severity phrase bands, least to most severe."""
    raw = resources.files("foodrisk").joinpath("phrases.json").read_text("utf-8")
    return json.loads(raw)["bands"]


@dataclass(frozen=True)
class SynthConfig:
    num_records: int = 2000
    num_districts: int = 40
    positive_rate: float = 0.35
    bias_strength: float = 0.5
    noise: float = 0.8
    band_noise: float = 0.15
    rural_fraction: float = 0.5
    cost_low: float = 10.0
    cost_high: float = 100.0
    seed: int = 0

    def __post_init__(self):
        if self.num_records < 1:
            raise SynthError(f"num_records must be >= 1, got {self.num_records}")
        if not 1 <= self.num_districts <= self.num_records:
            raise SynthError(
                f"num_districts must be in [1, num_records], got {self.num_districts}"
            )
        if not 0.0 < self.positive_rate < 1.0:
            raise SynthError(f"positive_rate must be in (0, 1), got {self.positive_rate}")
        if not 0.0 <= self.rural_fraction <= 1.0:
            raise SynthError(f"rural_fraction must be in [0, 1], got {self.rural_fraction}")
        for name in ("bias_strength", "noise", "band_noise"):
            v = getattr(self, name)
            if not math.isfinite(v) or v < 0:
                raise SynthError(f"{name} must be finite and >= 0, got {v}")
        if not 0 <= self.cost_low <= self.cost_high:
            raise SynthError(
                f"need 0 <= cost_low <= cost_high, got {self.cost_low}, {self.cost_high}"
            )

    def to_dict(self) -> dict:
        return {
            "num_records": self.num_records,
            "num_districts": self.num_districts,
            "positive_rate": self.positive_rate,
            "bias_strength": self.bias_strength,
            "noise": self.noise,
            "band_noise": self.band_noise,
            "rural_fraction": self.rural_fraction,
            "cost_low": self.cost_low,
            "cost_high": self.cost_high,
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SynthConfig":
        return cls(**d)


def _compose_text(
    rng: np.random.Generator, bands: list[list[str]], base_band: int, blend: float
) -> str:
    """Sample phrases from the base severity band, blending in the next
    band with probability ``blend``; borderline reports read as a mix."""
    k = int(rng.integers(2, 5))
    remaining = {i: list(band) for i, band in enumerate(bands)}
    phrases = []
    for _ in range(k):
        band_i = base_band
        if base_band < len(bands) - 1 and rng.random() < blend:
            band_i = base_band + 1
        pool = remaining[band_i] or remaining[base_band]
        j = int(rng.integers(0, len(pool)))
        phrases.append(pool.pop(j))
    # mild raw-text dirt: casing, padding, the occasional o->0 scan error
    if rng.random() < 0.25:
        j = int(rng.integers(0, k))
        phrases[j] = phrases[j].upper()
    text = ". ".join(phrases) + "."
    if rng.random() < 0.2:
        text = text.replace("o", "0", 1)
    if rng.random() < 0.2:
        text = "  " + text.replace(". ", ".  ", 1)
    return text[0].upper() + text[1:]


def generate(cfg: SynthConfig) -> Dataset:
    rng = np.random.default_rng(cfg.seed)
    n, d = cfg.num_records, cfg.num_districts
    bands = load_phrase_bands()

    # district membership: shuffled round robin keeps district sizes even
    dperm = rng.permutation(d)
    n_rural = int(round(cfg.rural_fraction * d))
    rural_districts = set(int(x) for x in dperm[:n_rural])
    rperm = rng.permutation(n)
    district_ids = np.empty(n, dtype=int)
    district_ids[rperm] = np.arange(n) % d
    is_rural = np.array([int(di) in rural_districts for di in district_ids])

    # Severity has a narrative component (a, visible through text) and a
    # structural component (b, visible through indicators), compounding
    # multiplicatively when both run high. Neither modality alone recovers
    # the label well; fusing them does, and the interaction term is out of
    # reach for linear models. The rural shift flows through both observed
    # components, so the bias is learnable (and correctable) from features.
    shift = cfg.bias_strength * is_rural / 2.0
    a = rng.standard_normal(n) + shift
    b = rng.standard_normal(n) + shift
    z = a + b + 0.45 * a * b + 0.15 * rng.standard_normal(n)
    threshold = np.quantile(z, 1.0 - cfg.positive_rate)
    labels = (z >= threshold).astype(int)

    def noisy(base: np.ndarray, scale: float, shift_: float) -> np.ndarray:
        return sigmoid(scale * base + shift_ + 0.35 * rng.standard_normal(n))

    # One shared distortion per record keeps the monotone indicators from
    # averaging their noise away across columns; per-column jitter on top.
    z_mono = b + cfg.noise * rng.standard_normal(n)
    malnutrition = noisy(z_mono, 1.0, -0.8)
    inflation = noisy(z_mono, 0.7, -0.3)
    pds = noisy(z_mono, -0.9, 0.6)
    vulnerability = noisy(z_mono, 1.2, 0.0)
    # deviation-style channels: direction is random, magnitude tracks the
    # structural component, so only the magnitude carries signal; these are
    # the cleanest structured view, readable only by a nonlinear model
    z_mag = b + 0.15 * rng.standard_normal(n)
    rain_sign = np.where(rng.random(n) < 0.5, -1.0, 1.0)
    rainfall = 0.5 + 0.5 * rain_sign * noisy(z_mag, 1.4, 0.0)
    crop_sign = np.where(rng.random(n) < 0.5, -1.0, 1.0)
    crop_var = 0.5 + 0.5 * crop_sign * noisy(z_mag, 1.1, 0.0)

    # continuous severity coordinate for text: quartile band plus position
    # within it, which drives adjacent-band phrase blending
    z_text = a + cfg.band_noise * rng.standard_normal(n)
    coord = 4.0 * np.argsort(np.argsort(z_text)) / n
    band_idx = np.minimum(coord.astype(int), 3)
    blend = coord - band_idx

    costs = np.round(rng.uniform(cfg.cost_low, cfg.cost_high, n), 2)

    width = max(4, len(str(n - 1)))
    records = []
    for i in range(n):
        indicators = IndicatorSet(
            malnutrition_rate=float(malnutrition[i]),
            crop_yield_variability=float(crop_var[i]),
            rainfall_deviation=float(rainfall[i]),
            food_price_inflation=float(inflation[i]),
            pds_coverage=float(pds[i]),
            vulnerability_index=float(vulnerability[i]),
        )
        records.append(
            DistrictRecord(
                record_id=f"rec-{i:0{width}d}",
                district_id=int(district_ids[i]),
                group=RURAL if is_rural[i] else URBAN,
                indicators=indicators,
                text=_compose_text(rng, bands, int(band_idx[i]), float(blend[i])),
                label=int(labels[i]),
                cost=float(costs[i]),
            )
        )
    return Dataset(records=tuple(records), num_districts=d)


def emit_embeddings(ds: Dataset, path, dim: int = 64, seed: int = 0) -> None:
    """Write one hashed text embedding per record as JSON lines."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for rec in ds.records:
            tokens = tokenize(normalize_text(rec.text), stopwords=frozenset())
            vec = hash_embed(tokens, dim=dim, seed=seed)
            fh.write(
                jsonfmt.dumps({"record_id": rec.record_id, "vector": vec}) + "\n"
            )
