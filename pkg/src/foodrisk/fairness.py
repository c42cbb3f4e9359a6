"""Hard demographic-parity metric and post-hoc per-group threshold
calibration.

Calibration never touches scores: it keeps the advantaged group's
threshold fixed and sweeps the other group's threshold over its observed
score values until the positive-rate gap lands at (or under) the target.
A score exactly at a threshold counts as positive; gap values depend on
that convention.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data import GROUPS, RURAL, URBAN


class FairnessError(ValueError):
    """Degenerate group structure for the requested operation."""


@dataclass(frozen=True)
class GroupThresholds:
    """Per-group decision thresholds plus the gap target they aim at."""

    thresholds: dict[str, float]
    target_gap: float = 0.0

    def __post_init__(self):
        for g, t in self.thresholds.items():
            if not 0.0 < t < 1.0:
                raise FairnessError(f"threshold for {g!r} must be in (0, 1), got {t}")
        if self.target_gap < 0:
            raise FairnessError(f"target_gap must be >= 0, got {self.target_gap}")

    def to_dict(self) -> dict:
        return {**{g: float(t) for g, t in sorted(self.thresholds.items())},
                "target_gap": float(self.target_gap)}

    @classmethod
    def from_dict(cls, d: dict) -> "GroupThresholds":
        thresholds = {g: float(v) for g, v in d.items() if g != "target_gap"}
        return cls(thresholds=thresholds, target_gap=float(d.get("target_gap", 0.0)))


def _group_masks(groups) -> dict[str, np.ndarray]:
    groups = np.asarray(groups, dtype=object)
    masks = {g: groups == g for g in GROUPS}
    for g, mask in masks.items():
        if not mask.any():
            raise FairnessError(f"group {g!r} is empty")
    return masks


def demographic_parity_difference(decisions, groups) -> float:
    """Absolute difference of positive-decision rates between groups."""
    decisions = np.asarray(decisions, dtype=float)
    masks = _group_masks(groups)
    return float(abs(decisions[masks[RURAL]].mean() - decisions[masks[URBAN]].mean()))


def apply_thresholds(scores, groups, th: GroupThresholds) -> np.ndarray:
    """Binary decisions: 1 iff score >= the record's group threshold."""
    scores = np.asarray(scores, dtype=float)
    groups = np.asarray(groups, dtype=object)
    out = np.zeros(scores.shape[0], dtype=int)
    for i, (s, g) in enumerate(zip(scores, groups)):
        if g not in th.thresholds:
            raise FairnessError(f"no threshold for group {g!r}")
        out[i] = int(s >= th.thresholds[g])
    return out


def calibrate_group_thresholds(
    scores,
    groups,
    target_gap: float,
    base_threshold: float = 0.5,
    labels=None,
) -> GroupThresholds:
    """Pick per-group thresholds whose hard parity gap approaches
    ``target_gap``.

    The group with the higher positive rate at ``base_threshold`` keeps
    that threshold; the other group's threshold sweeps its sorted unique
    scores. Candidates reaching gap <= target are preferred whenever any
    exist; within the preferred pool the candidate minimizing
    |gap - target| wins, ties broken by higher accuracy on ``labels``
    when given, else by proximity to ``base_threshold``.
    """
    if not 0.0 <= target_gap < 1.0:
        raise FairnessError(f"target_gap must be in [0, 1), got {target_gap}")
    if not 0.0 < base_threshold < 1.0:
        raise FairnessError(f"base_threshold must be in (0, 1), got {base_threshold}")
    scores = np.asarray(scores, dtype=float)
    masks = _group_masks(groups)
    if labels is not None:
        labels = np.asarray(labels, dtype=int)

    rates = {g: float((scores[m] >= base_threshold).mean()) for g, m in masks.items()}
    if abs(rates[RURAL] - rates[URBAN]) <= target_gap:
        return GroupThresholds(
            thresholds={g: base_threshold for g in GROUPS}, target_gap=target_gap
        )

    advantaged = RURAL if rates[RURAL] >= rates[URBAN] else URBAN
    other = URBAN if advantaged == RURAL else RURAL
    other_scores = scores[masks[other]]
    adv_rate = rates[advantaged]

    candidates = np.unique(other_scores)
    best = None  # (feasible, |gap-target|, tiebreak, threshold)
    for t in candidates:
        t = float(t)
        if not 0.0 < t < 1.0:
            continue
        rate = float((other_scores >= t).mean())
        gap = abs(adv_rate - rate)
        feasible = gap <= target_gap
        if labels is not None:
            th = {advantaged: base_threshold, other: t}
            decisions = np.array(
                [int(s >= th[g]) for s, g in zip(scores, np.asarray(groups, dtype=object))]
            )
            tiebreak = -float((decisions == labels).mean())  # higher accuracy first
        else:
            tiebreak = abs(t - base_threshold)  # closer to base first
        key = (not feasible, abs(gap - target_gap), tiebreak, t)
        if best is None or key < best:
            best = key
    if best is None:
        raise FairnessError("no usable threshold candidates in (0, 1)")
    chosen = best[3]
    return GroupThresholds(
        thresholds={advantaged: base_threshold, other: chosen}, target_gap=target_gap
    )
