import json
import re

import numpy as np
import pytest
from fastapi.testclient import TestClient

import foodrisk as fr
from foodrisk.allocate import build_problem, solve_bruteforce
from foodrisk.metrics import evaluate, save_report
from foodrisk.service import create_app


@pytest.fixture(scope="module")
def setup(tmp_path_factory):
    ds = fr.generate(fr.SynthConfig(num_records=80, num_districts=8, seed=21))
    tr, ev = fr.split_dataset(ds, 0.7, seed=0, stratify=True)
    fc = fr.FeaturizerConfig(provider="hash", hash_dim=16, seed=0)
    feat = fr.Featurizer(fc).fit(tr)
    tc = fr.TrainConfig(arch="logistic", epochs=30, learning_rate=0.3, seed=0, lam=0.0)
    params, _ = fr.train(tr, feat, tc)
    art = fr.ModelArtifact(params=params, featurizer=feat, train_config=tc)
    return {"artifact": art, "train": tr, "eval": ev, "candidates": ev}


@pytest.fixture(scope="module")
def client(setup):
    app = create_app(setup["artifact"], setup["candidates"], eval_data=setup["eval"])
    with TestClient(app, raise_server_exceptions=False) as c:
        yield c


@pytest.fixture(scope="module")
def client_no_eval(setup):
    app = create_app(setup["artifact"], setup["candidates"])
    with TestClient(app, raise_server_exceptions=False) as c:
        yield c


def test_whatif_basic_shape(client, setup):
    r = client.post("/v1/whatif", json={"budget": 300.0})
    assert r.status_code == 200
    body = r.json()
    assert body["total_cost"] <= 300.0
    assert body["solver"] == "dp"
    assert 0.0 <= body["parity_gap"] <= 1.0
    assert body["solver_ms"] >= 0.0
    assert len(body["ranking"]) == len(setup["candidates"])
    scores = [row["score"] for row in body["ranking"]]
    assert scores == sorted(scores, reverse=True)
    selected = {row["record_id"] for row in body["ranking"] if row["selected"]}
    assert selected == set(body["selected"])


def test_whatif_matches_direct_solver(client, setup):
    r = client.post("/v1/whatif", json={"budget": 250.0}).json()
    art, cand = setup["artifact"], setup["candidates"]
    scored = fr.predict_scores(art.params, cand, art.featurizer)
    rows = [
        (rid, s, rec.group, rec.cost) for (rid, s), rec in zip(scored, cand.records)
    ]
    direct = fr.solve_dp(build_problem(rows, budget=250.0))
    assert tuple(r["selected"]) == direct.selected
    assert r["total_utility"] == direct.total_utility
    assert r["total_cost"] == direct.total_cost


def test_whatif_zero_budget_empty_allocation(client):
    r = client.post("/v1/whatif", json={"budget": 0})
    assert r.status_code == 200
    body = r.json()
    assert body["selected"] == []
    assert body["total_cost"] == 0.0
    assert "parity_gap" in body  # the gap is reported even with nothing funded


def test_whatif_budget_monotone(client):
    utilities = []
    for budget in (0, 50, 150, 400, 1000):
        r = client.post("/v1/whatif", json={"budget": budget}).json()
        utilities.append(r["total_utility"])
    assert utilities == sorted(utilities)


def test_whatif_bodies_byte_identical_up_to_timing(client):
    a = client.post("/v1/whatif", json={"budget": 200.0, "floors": {"rural": 1}})
    b = client.post("/v1/whatif", json={"budget": 200.0, "floors": {"rural": 1}})
    strip = lambda t: re.sub(r'"solver_ms":[0-9.]+', '"solver_ms":0', t)
    assert strip(a.text) == strip(b.text)
    assert a.headers["content-type"] == "application/json"


def test_whatif_floors_and_target_gap(client):
    r = client.post(
        "/v1/whatif",
        json={"budget": 400.0, "floors": {"rural": 2, "urban": 2}, "target_gap": 0.05},
    )
    assert r.status_code == 200
    body = r.json()
    assert body["per_group_counts"]["rural"] >= 2
    assert body["per_group_counts"]["urban"] >= 2


def test_whatif_greedy_solver(client):
    r = client.post("/v1/whatif", json={"budget": 200.0, "solver": "greedy"})
    assert r.status_code == 200
    assert r.json()["solver"] == "greedy"


def test_whatif_rejects_malformed_json(client):
    r = client.post(
        "/v1/whatif", content=b"{not json", headers={"content-type": "application/json"}
    )
    assert r.status_code == 400
    assert "JSON" in r.json()["error"]


def test_whatif_validation_errors(client):
    cases = [
        ({}, "budget"),
        ({"budget": -5}, "budget"),
        ({"budget": True}, "number"),
        ({"budget": 10, "bogus": 1}, "bogus"),
        ({"budget": 10, "floors": {"coastal": 1}}, "coastal"),
        ({"budget": 10, "floors": {"rural": -1}}, "rural"),
        ({"budget": 10, "floors": {"rural": 1.5}}, "rural"),
        ({"budget": 10, "target_gap": 1.0}, "target_gap"),
        ({"budget": 10, "solver": "annealing"}, "solver"),
        ({"budget": 10, "cost_resolution": 0}, "cost_resolution"),
        ({"budget": 10, "utility_mode": "square"}, "utility_mode"),
    ]
    for body, needle in cases:
        r = client.post("/v1/whatif", json=body)
        assert r.status_code == 400, body
        assert needle in r.json()["error"], body


def test_whatif_infeasible_floors_names_group(client):
    r = client.post("/v1/whatif", json={"budget": 5.0, "floors": {"urban": 30}})
    assert r.status_code == 422
    body = r.json()
    assert body["group"] == "urban"
    assert "urban" in body["error"]


def test_metrics_endpoint_bit_exact(client, setup, tmp_path):
    r = client.get("/v1/metrics")
    assert r.status_code == 200
    report = evaluate(setup["artifact"], setup["eval"])
    path = tmp_path / "report.json"
    save_report(report, path)
    assert r.content == path.read_bytes()


def test_metrics_404_without_eval_data(client_no_eval):
    r = client_no_eval.get("/v1/metrics")
    assert r.status_code == 404
    assert "evaluation" in r.json()["error"]


def test_predict_endpoint(client, setup):
    record = setup["candidates"].records[0]
    indicators = {
        name: getattr(record.indicators, name) for name in fr.INDICATOR_FIELDS
    }
    r = client.post("/v1/predict", json={"text": record.text, "indicators": indicators})
    assert r.status_code == 200
    score = r.json()["score"]
    art = setup["artifact"]
    scored = dict(fr.predict_scores(art.params, setup["candidates"], art.featurizer))
    assert score == pytest.approx(scored[record.record_id], abs=1e-12)


def test_predict_validation(client):
    ok_ind = {name: 0.2 for name in fr.INDICATOR_FIELDS}
    r = client.post("/v1/predict", json={"text": "dry wells", "indicators": ok_ind})
    assert r.status_code == 200

    incomplete = dict(ok_ind)
    incomplete.pop("pds_coverage")
    cases = [
        ({"indicators": ok_ind, "extra": 1}, "extra"),
        ({"text": 4, "indicators": ok_ind}, "text"),
        ({"text": "x"}, "indicators"),
        ({"text": "x", "indicators": incomplete}, "pds_coverage"),
        ({"text": "x", "indicators": {**ok_ind, "malnutrition_rate": 3.0}}, "malnutrition_rate"),
    ]
    for body, needle in cases:
        r = client.post("/v1/predict", json=body)
        assert r.status_code == 400, body
        assert needle in r.json()["error"], body


def test_districts_ranking(client, setup):
    r = client.get("/v1/districts")
    assert r.status_code == 200
    entries = r.json()["districts"]
    means = [e["mean_score"] for e in entries]
    assert means == sorted(means, reverse=True)
    assert sum(e["records"] for e in entries) == len(setup["candidates"])
    names = set(setup["candidates"].district_names)
    assert all(e["district"] in names for e in entries)


def test_whatif_latency_smoke(client):
    import time

    started = time.perf_counter()
    r = client.post("/v1/whatif", json={"budget": 500.0})
    elapsed = time.perf_counter() - started
    assert r.status_code == 200
    assert elapsed < 1.0
