"""Budget-constrained intervention selection.

Given per-region utilities (model priority scores by default), costs,
and a budget, pick the subset maximizing total utility without exceeding
the budget, optionally guaranteeing minimum selected counts per group.
Three solvers share one instance semantics: an exact dynamic program, a
ratio-greedy heuristic, and an exhaustive oracle for small instances.

Costs are real-valued, so the exact solvers work on an integerized copy:
cost' = round(cost / resolution), budget' = floor(budget / resolution).
The induced cost error is bounded by n * resolution. All solvers break
utility ties toward the lexicographically smallest selected record-id
set, so exact solvers agree set-for-set, not just value-for-value.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .data import GROUPS

# Entry cap for the DP value table; beyond this the instance needs a
# coarser cost_resolution.
_DP_MAX_ENTRIES = 200_000_000


class AllocatorError(ValueError):
    """Invalid allocation problem."""


class InfeasibleFloors(AllocatorError):
    """No selection can satisfy the per-group floors within budget."""

    def __init__(self, group: str, message: str):
        super().__init__(f"floors infeasible (binding group {group!r}): {message}")
        self.group = group


@dataclass(frozen=True)
class Candidate:
    record_id: str
    utility: float
    cost: float
    group: str

    def __post_init__(self):
        if not math.isfinite(self.utility) or self.utility < 0:
            raise AllocatorError(f"utility must be finite and >= 0, got {self.utility}")
        if not math.isfinite(self.cost) or self.cost < 0:
            raise AllocatorError(
                f"candidate {self.record_id!r} has negative or non-finite cost {self.cost}"
            )
        if self.group not in GROUPS:
            raise AllocatorError(f"group must be one of {GROUPS}, got {self.group!r}")


@dataclass(frozen=True)
class AllocationProblem:
    candidates: tuple[Candidate, ...]
    budget: float
    floors: Optional[dict[str, int]] = None
    cost_resolution: float = 0.0  # 0 means: derive the default from budget

    def __post_init__(self):
        object.__setattr__(self, "candidates", tuple(self.candidates))
        if not math.isfinite(self.budget) or self.budget < 0:
            raise AllocatorError(f"budget must be finite and >= 0, got {self.budget}")
        seen = set()
        for c in self.candidates:
            if c.record_id in seen:
                raise AllocatorError(f"duplicate candidate record_id {c.record_id!r}")
            seen.add(c.record_id)
        if self.floors is not None:
            for g, k in self.floors.items():
                if g not in GROUPS:
                    raise AllocatorError(f"floor group must be one of {GROUPS}, got {g!r}")
                if k < 0:
                    raise AllocatorError(f"floor for {g!r} must be >= 0, got {k}")
        if self.cost_resolution < 0 or not math.isfinite(self.cost_resolution):
            raise AllocatorError(
                f"cost_resolution must be finite and >= 0, got {self.cost_resolution}"
            )

    @property
    def resolution(self) -> float:
        if self.cost_resolution > 0:
            return self.cost_resolution
        return self.budget / 10000.0 if self.budget > 0 else 1.0


@dataclass(frozen=True)
class AllocationResult:
    selected: tuple[str, ...]
    total_utility: float
    total_cost: float
    per_group_counts: dict[str, int]
    solver: str

    def to_dict(self) -> dict:
        return {
            "selected": list(self.selected),
            "total_utility": self.total_utility,
            "total_cost": self.total_cost,
            "per_group_counts": dict(sorted(self.per_group_counts.items())),
            "solver": self.solver,
        }


def build_problem(
    scores: Sequence[tuple],
    budget: float,
    floors: Optional[dict[str, int]] = None,
    utility_mode: str = "score",
    populations: Optional[dict[str, float]] = None,
    cost_resolution: float = 0.0,
) -> AllocationProblem:
    """Turn scored records into an allocation instance.

    ``scores`` holds (record_id, score, group, cost) tuples. Utility is
    the score itself, or score * population when ``utility_mode`` is
    ``"score_times_population"`` (requires a per-record population map).
    """
    if utility_mode not in ("score", "score_times_population"):
        raise AllocatorError(f"unknown utility_mode {utility_mode!r}")
    if utility_mode == "score_times_population" and populations is None:
        raise AllocatorError("utility_mode score_times_population needs populations")
    candidates = []
    for record_id, score, group, cost in scores:
        utility = float(score)
        if utility_mode == "score_times_population":
            try:
                utility *= float(populations[record_id])
            except KeyError:
                raise AllocatorError(f"no population for record {record_id!r}") from None
        candidates.append(Candidate(str(record_id), utility, float(cost), group))
    candidates.sort(key=lambda c: c.record_id)
    return AllocationProblem(
        candidates=tuple(candidates),
        budget=budget,
        floors=floors,
        cost_resolution=cost_resolution,
    )


# -- shared instance plumbing ------------------------------------------------


def _sorted_items(p: AllocationProblem) -> list[Candidate]:
    return sorted(p.candidates, key=lambda c: c.record_id)


def _integerize(p: AllocationProblem, items: list[Candidate]) -> tuple[np.ndarray, int]:
    res = p.resolution
    costs = np.array([int(np.rint(c.cost / res)) for c in items], dtype=np.int64)
    budget = int(math.floor(p.budget / res + 1e-9))
    return costs, budget


def _active_floors(p: AllocationProblem) -> dict[str, int]:
    if not p.floors:
        return {}
    return {g: int(k) for g, k in sorted(p.floors.items()) if k > 0}


def _check_floors(
    items: list[Candidate], costs: np.ndarray, budget: int, floors: dict[str, int]
) -> None:
    if not floors:
        return
    cheapest_total = 0
    contributions = {}
    for g, k in floors.items():
        group_costs = sorted(int(costs[i]) for i, c in enumerate(items) if c.group == g)
        if len(group_costs) < k:
            raise InfeasibleFloors(
                g, f"floor {k} exceeds the {len(group_costs)} available candidates"
            )
        contributions[g] = sum(group_costs[:k])
        cheapest_total += contributions[g]
    if cheapest_total > budget:
        binding = max(contributions, key=lambda g: (contributions[g], g))
        raise InfeasibleFloors(
            binding, "cheapest floor-satisfying selection exceeds the budget"
        )


def _make_result(
    p: AllocationProblem, items: list[Candidate], chosen_idx: Sequence[int], solver: str
) -> AllocationResult:
    chosen = sorted(chosen_idx)
    counts = {g: 0 for g in GROUPS}
    for i in chosen:
        counts[items[i].group] += 1
    return AllocationResult(
        selected=tuple(items[i].record_id for i in chosen),
        total_utility=math.fsum(items[i].utility for i in chosen),
        total_cost=math.fsum(items[i].cost for i in chosen),
        per_group_counts=counts,
        solver=solver,
    )


class _FloorState:
    """Mixed-radix encoding of remaining per-group deficits."""

    def __init__(self, floors: dict[str, int]):
        self.groups = list(floors)
        self.sizes = [floors[g] + 1 for g in self.groups]
        self.count = int(np.prod(self.sizes)) if self.groups else 1
        self.initial = self.encode([floors[g] for g in self.groups])

    def encode(self, deficits: Sequence[int]) -> int:
        idx = 0
        for d, size in zip(deficits, self.sizes):
            idx = idx * size + d
        return idx

    def child(self, state: int, group: str) -> int:
        """State after selecting one item of ``group`` (deficit drops by 1,
        floored at 0)."""
        if group not in self.groups:
            return state
        deficits = []
        rem = state
        for size in reversed(self.sizes):
            deficits.append(rem % size)
            rem //= size
        deficits.reverse()
        gi = self.groups.index(group)
        deficits[gi] = max(0, deficits[gi] - 1)
        return self.encode(deficits)


def solve_dp(p: AllocationProblem) -> AllocationResult:
    """Exact 0/1 knapsack over integerized costs, floors included.

    Builds suffix value tables S[i][w, state] = best utility using items
    i.. with capacity w and outstanding deficits ``state``, then walks
    forward preferring the smallest record ids among optimal completions,
    which yields the lexicographically smallest optimal selection.
    """
    items = _sorted_items(p)
    costs, budget = _integerize(p, items)
    floors = _active_floors(p)
    _check_floors(items, costs, budget, floors)
    n = len(items)
    fs = _FloorState(floors)

    entries = (n + 1) * (budget + 1) * fs.count
    if entries > _DP_MAX_ENTRIES:
        raise AllocatorError(
            f"DP table would need {entries} entries; increase cost_resolution"
        )

    neg_inf = -np.inf
    layers = [None] * (n + 1)
    base = np.full((budget + 1, fs.count), neg_inf)
    base[:, fs.encode([0] * len(fs.groups))] = 0.0
    layers[n] = base
    for i in range(n - 1, -1, -1):
        nxt = layers[i + 1]
        cur = nxt.copy()
        c, u = int(costs[i]), items[i].utility
        if c <= budget:
            for state in range(fs.count):
                child = fs.child(state, items[i].group)
                take = np.full(budget + 1, neg_inf)
                src = nxt[: budget + 1 - c, child]
                with np.errstate(invalid="ignore"):
                    take[c:] = u + src
                np.maximum(cur[:, state], take, out=cur[:, state])
        layers[i] = cur

    start_state = fs.initial
    best = layers[0][budget, start_state]
    if best == neg_inf:
        # Floors were checked feasible, so this only happens without floors
        # and an empty budget: empty selection.
        return _make_result(p, items, [], "dp")

    # Forward walk: take an item whenever taking it still reaches the
    # optimum; stop as soon as nothing more is needed.
    chosen: list[int] = []
    w, state, remaining = budget, start_state, best
    zero_state = fs.encode([0] * len(fs.groups))
    for i in range(n):
        if remaining == 0.0 and state == zero_state:
            break
        c, u = int(costs[i]), items[i].utility
        child = fs.child(state, items[i].group)
        if c <= w:
            suffix = layers[i + 1][w - c, child]
            if suffix != neg_inf and u + suffix == remaining:
                chosen.append(i)
                w -= c
                state = child
                remaining = suffix
                continue
        remaining = layers[i + 1][w, state]
    return _make_result(p, items, chosen, "dp")


def solve_bruteforce(p: AllocationProblem) -> AllocationResult:
    """Exhaustive oracle for instances with at most 20 candidates; same
    integerization and tie-break as the DP."""
    items = _sorted_items(p)
    n = len(items)
    if n > 20:
        raise AllocatorError(f"brute force capped at 20 candidates, got {n}")
    costs, budget = _integerize(p, items)
    floors = _active_floors(p)
    _check_floors(items, costs, budget, floors)
    if n == 0:
        return _make_result(p, items, [], "bruteforce")

    masks = np.arange(1 << n, dtype=np.int64)
    bits = ((masks[:, None] >> np.arange(n)) & 1).astype(np.int64)
    feasible = bits @ costs <= budget
    for g, k in floors.items():
        member = np.array([c.group == g for c in items], dtype=np.int64)
        feasible &= bits @ member >= k
    utilities = bits.astype(float) @ np.array([c.utility for c in items])
    utilities[~feasible] = -np.inf
    best = utilities.max()
    tied = np.flatnonzero(utilities == best)
    best_subset = min(
        tied, key=lambda m: tuple(items[i].record_id for i in range(n) if (int(m) >> i) & 1)
    )
    chosen = [i for i in range(n) if (int(best_subset) >> i) & 1]
    return _make_result(p, items, chosen, "bruteforce")


def _ratio(utility: float, cost: int) -> float:
    if cost == 0:
        return math.inf if utility > 0 else 0.0
    return utility / cost


def solve_greedy(p: AllocationProblem) -> AllocationResult:
    """Ratio-greedy heuristic: floors first, then best utility/cost fill.

    Floor picks reserve enough budget for the cheapest way to finish the
    remaining floors, so a feasible instance always stays feasible. Never
    exceeds the budget; may be arbitrarily short of the optimum on
    adversarial ratio instances.
    """
    items = _sorted_items(p)
    costs, budget = _integerize(p, items)
    floors = _active_floors(p)
    _check_floors(items, costs, budget, floors)

    n = len(items)
    order_key = lambda i: (-_ratio(items[i].utility, int(costs[i])), -items[i].utility, items[i].record_id)
    selected: set[int] = set()
    spent = 0
    deficits = dict(floors)

    def cheapest_reserve(exclude: set[int], skip_group: Optional[str] = None, skip_one: bool = False) -> int:
        total = 0
        for g, k in deficits.items():
            need = k - (1 if skip_one and g == skip_group else 0)
            if need <= 0:
                continue
            pool = sorted(int(costs[i]) for i in range(n) if items[i].group == g and i not in exclude)
            total += sum(pool[:need])
        return total

    for g in sorted(deficits):
        group_order = sorted((i for i in range(n) if items[i].group == g), key=order_key)
        while deficits[g] > 0:
            picked = None
            for i in group_order:
                if i in selected:
                    continue
                reserve = cheapest_reserve(selected | {i}, skip_group=g, skip_one=True)
                if spent + int(costs[i]) + reserve <= budget:
                    picked = i
                    break
            if picked is None:
                raise InfeasibleFloors(g, "could not satisfy floor within budget")
            selected.add(picked)
            spent += int(costs[picked])
            deficits[g] -= 1

    for i in sorted(range(n), key=order_key):
        if i in selected:
            continue
        if spent + int(costs[i]) <= budget:
            selected.add(i)
            spent += int(costs[i])
    return _make_result(p, items, sorted(selected), "greedy")
