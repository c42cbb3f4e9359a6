"""HTTP facade for interactive what-if analysis.

The model artifact and candidate dataset are loaded once at startup;
scores are computed there and cached, so each request only runs the
allocation (and optional threshold calibration) against immutable state.
Responses are rendered with the decimal-only JSON writer so identical
requests produce byte-identical bodies.

Request bodies are validated by hand: malformed input is a 400, while
422 is reserved for structurally valid what-if requests whose floors
cannot be met within budget (the body names the binding group).
"""

from __future__ import annotations

import math
import time
from typing import Optional

import numpy as np
from fastapi import FastAPI, Request, Response
from fastapi.middleware.cors import CORSMiddleware

from . import jsonfmt
from .allocate import AllocatorError, InfeasibleFloors, build_problem, solve_dp, solve_greedy
from .data import Dataset, GROUPS, INDICATOR_FIELDS, DistrictRecord, IndicatorSet
from .fairness import (
    GroupThresholds,
    apply_thresholds,
    calibrate_group_thresholds,
    demographic_parity_difference,
)
from .metrics import evaluate
from .model import ModelArtifact, forward, predict_scores

_SOLVERS = {"dp": solve_dp, "greedy": solve_greedy}
_UTILITY_MODES = ("score", "score_times_population")


class _BadRequest(ValueError):
    """Client payload rejected during manual validation."""


def _json_response(payload, status_code: int = 200) -> Response:
    return Response(
        content=jsonfmt.dumps(payload) + "\n",
        status_code=status_code,
        media_type="application/json",
    )


def _error(status_code: int, message: str, **extra) -> Response:
    return _json_response({"error": message, **extra}, status_code=status_code)


def _require_number(body: dict, key: str, required: bool = False):
    if key not in body:
        if required:
            raise _BadRequest(f"missing required field {key!r}")
        return None
    value = body[key]
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise _BadRequest(f"field {key!r} must be a number")
    if not math.isfinite(value):
        raise _BadRequest(f"field {key!r} must be finite")
    return float(value)


def _parse_whatif(body) -> dict:
    if not isinstance(body, dict):
        raise _BadRequest("request body must be a JSON object")
    allowed = {"budget", "floors", "target_gap", "utility_mode", "solver", "cost_resolution"}
    unknown = sorted(set(body) - allowed)
    if unknown:
        raise _BadRequest(f"unknown field {unknown[0]!r}")

    budget = _require_number(body, "budget", required=True)
    if budget < 0:
        raise _BadRequest("budget must be >= 0")

    floors = body.get("floors")
    if floors is not None:
        if not isinstance(floors, dict):
            raise _BadRequest("floors must be an object mapping group to count")
        parsed = {}
        for g, k in floors.items():
            if g not in GROUPS:
                raise _BadRequest(f"floors group must be one of {sorted(GROUPS)}, got {g!r}")
            if isinstance(k, bool) or not isinstance(k, int) or k < 0:
                raise _BadRequest(f"floor for {g!r} must be a non-negative integer")
            parsed[g] = k
        floors = parsed

    target_gap = _require_number(body, "target_gap")
    if target_gap is not None and not 0.0 <= target_gap < 1.0:
        raise _BadRequest("target_gap must be in [0, 1)")

    utility_mode = body.get("utility_mode", "score")
    if utility_mode not in _UTILITY_MODES:
        raise _BadRequest(f"utility_mode must be one of {_UTILITY_MODES}")

    solver = body.get("solver", "dp")
    if solver not in _SOLVERS:
        raise _BadRequest("solver must be 'dp' or 'greedy'")

    resolution = _require_number(body, "cost_resolution")
    if resolution is not None and resolution <= 0:
        raise _BadRequest("cost_resolution must be > 0")

    return {
        "budget": budget,
        "floors": floors,
        "target_gap": target_gap,
        "utility_mode": utility_mode,
        "solver": solver,
        "cost_resolution": resolution if resolution is not None else 0.0,
    }


def _parse_predict(body) -> DistrictRecord:
    if not isinstance(body, dict):
        raise _BadRequest("request body must be a JSON object")
    allowed = {"text", "indicators"}
    unknown = sorted(set(body) - allowed)
    if unknown:
        raise _BadRequest(f"unknown field {unknown[0]!r}")
    text = body.get("text", "")
    if not isinstance(text, str):
        raise _BadRequest("field 'text' must be a string")
    indicators = body.get("indicators")
    if not isinstance(indicators, dict):
        raise _BadRequest("field 'indicators' must be an object")
    unknown = sorted(set(indicators) - set(INDICATOR_FIELDS))
    if unknown:
        raise _BadRequest(f"unknown indicator {unknown[0]!r}")
    values = {}
    for name in INDICATOR_FIELDS:
        if name not in indicators:
            raise _BadRequest(f"missing indicator {name!r}")
        v = indicators[name]
        if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
            raise _BadRequest(f"indicator {name!r} must be a finite number")
        values[name] = float(v)
    try:
        iset = IndicatorSet(**values)
        return DistrictRecord(
            record_id="query", district_id=0, group=GROUPS[0], indicators=iset, text=text
        )
    except ValueError as exc:
        raise _BadRequest(str(exc)) from None


class _State:
    """Immutable per-app snapshot built at startup."""

    def __init__(self, artifact: ModelArtifact, candidates: Dataset, eval_data):
        self.artifact = artifact
        self.candidates = candidates
        scored = predict_scores(artifact.params, candidates, artifact.featurizer)
        self.scores = {rid: s for rid, s in scored}
        self.score_array = np.array([s for _, s in scored], dtype=float)
        self.groups = candidates.groups()
        labels = [r.label for r in candidates.records]
        self.labels = (
            np.array(labels, dtype=int) if all(l is not None for l in labels) else None
        )
        self.rows = [
            (r.record_id, self.scores[r.record_id], r.group, r.cost)
            for r in candidates.records
        ]
        order = sorted(
            range(len(candidates.records)),
            key=lambda i: (-self.score_array[i], candidates.records[i].record_id),
        )
        self.ranking = [
            {
                "record_id": candidates.records[i].record_id,
                "district_id": candidates.records[i].district_id,
                "district": candidates.district_names[candidates.records[i].district_id],
                "group": candidates.records[i].group,
                "score": float(self.score_array[i]),
                "cost": candidates.records[i].cost,
            }
            for i in order
        ]
        self.metrics_body = None
        if eval_data is not None:
            report = evaluate(artifact, eval_data)
            self.metrics_body = jsonfmt.dumps(report.to_dict(), indent=2) + "\n"

    def parity_gap(self, target_gap: Optional[float]) -> float:
        if target_gap is not None:
            th = calibrate_group_thresholds(
                self.score_array,
                self.groups,
                target_gap=target_gap,
                labels=self.labels,
            )
        elif self.artifact.thresholds is not None:
            th = GroupThresholds.from_dict(self.artifact.thresholds)
        else:
            th = GroupThresholds(thresholds={g: 0.5 for g in GROUPS})
        decisions = apply_thresholds(self.score_array, self.groups, th)
        return demographic_parity_difference(decisions, self.groups)

    def district_ranking(self) -> list[dict]:
        sums: dict[int, float] = {}
        counts: dict[int, int] = {}
        for r, s in zip(self.candidates.records, self.score_array):
            sums[r.district_id] = sums.get(r.district_id, 0.0) + float(s)
            counts[r.district_id] = counts.get(r.district_id, 0) + 1
        entries = [
            {
                "district_id": d,
                "district": self.candidates.district_names[d],
                "mean_score": sums[d] / counts[d],
                "records": counts[d],
            }
            for d in sums
        ]
        entries.sort(key=lambda e: (-e["mean_score"], e["district_id"]))
        return entries


def create_app(
    artifact: ModelArtifact,
    candidates: Dataset,
    eval_data: Optional[Dataset] = None,
    cors_origins: tuple[str, ...] = (),
) -> FastAPI:
    state = _State(artifact, candidates, eval_data)
    app = FastAPI(title="foodrisk what-if service", docs_url=None, redoc_url=None)
    if cors_origins:
        app.add_middleware(
            CORSMiddleware,
            allow_origins=list(cors_origins),
            allow_methods=["GET", "POST"],
            allow_headers=["*"],
        )

    @app.post("/v1/whatif")
    async def whatif(request: Request) -> Response:
        try:
            body = await request.json()
        except Exception:
            return _error(400, "request body is not valid JSON")
        try:
            req = _parse_whatif(body)
            problem = build_problem(
                state.rows,
                budget=req["budget"],
                floors=req["floors"],
                utility_mode=req["utility_mode"],
                cost_resolution=req["cost_resolution"],
            )
            started = time.perf_counter()
            result = _SOLVERS[req["solver"]](problem)
            solver_ms = (time.perf_counter() - started) * 1000.0
            gap = state.parity_gap(req["target_gap"])
        except InfeasibleFloors as exc:
            return _error(422, str(exc), group=exc.group)
        except (_BadRequest, AllocatorError, ValueError) as exc:
            return _error(400, str(exc))
        selected = set(result.selected)
        payload = result.to_dict()
        payload["parity_gap"] = gap
        payload["solver_ms"] = solver_ms
        payload["ranking"] = [
            {**row, "selected": row["record_id"] in selected} for row in state.ranking
        ]
        return _json_response(payload)

    @app.get("/v1/metrics")
    async def metrics() -> Response:
        if state.metrics_body is None:
            return _error(404, "no evaluation dataset configured")
        return Response(content=state.metrics_body, media_type="application/json")

    @app.post("/v1/predict")
    async def predict(request: Request) -> Response:
        try:
            body = await request.json()
        except Exception:
            return _error(400, "request body is not valid JSON")
        try:
            record = _parse_predict(body)
            features = state.artifact.featurizer.transform_record(record)
            score = forward(state.artifact.params, features.values)
        except (_BadRequest, ValueError) as exc:
            return _error(400, str(exc))
        return _json_response({"score": float(score)})

    @app.get("/v1/districts")
    async def districts() -> Response:
        return _json_response({"districts": state.district_ranking()})

    @app.exception_handler(Exception)
    async def internal_error(request: Request, exc: Exception) -> Response:
        return _error(500, "internal error")

    return app
