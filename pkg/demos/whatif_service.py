"""
Budget what-if sweep against the HTTP service
=============================================

Runs the service in-process (no port needed) and replays the kind of
request train the browser UI sends while a user drags the budget
slider. Shows how the funded set grows with budget and that repeated
identical requests return byte-identical bodies.
"""

import re

from fastapi.testclient import TestClient

import foodrisk as fr
from foodrisk.metrics import evaluate
from foodrisk.service import create_app

ds = fr.generate(fr.SynthConfig(num_records=400, num_districts=12, seed=7))
train_ds, eval_ds = fr.split_dataset(ds, 0.75, seed=0, stratify=True)
feat = fr.Featurizer(fr.FeaturizerConfig(provider="hash", hash_dim=32, seed=0)).fit(train_ds)
tc = fr.TrainConfig(arch="logistic", epochs=120, learning_rate=0.3, lam=0.0, seed=0)
params, _ = fr.train(train_ds, feat, tc)
artifact = fr.ModelArtifact(params=params, featurizer=feat, train_config=tc)

app = create_app(artifact, candidates=eval_ds, eval_data=eval_ds)

with TestClient(app) as client:
    print("server-side evaluation:", client.get("/v1/metrics").json()["accuracy"])

    print("\nbudget    funded  cost        gap")
    for budget in (0, 200, 500, 1000, 2000):
        r = client.post(
            "/v1/whatif",
            json={"budget": budget, "floors": {"rural": 2}} if budget else {"budget": 0},
        )
        body = r.json()
        print(
            f"{budget:<9} {len(body['selected']):<7} "
            f"{body['total_cost']:<11.2f} {body['parity_gap']:.4f}"
        )

    # determinism check: identical request, identical bytes
    # (solver_ms is wall time and is masked before comparing)
    a = client.post("/v1/whatif", json={"budget": 500}).text
    b = client.post("/v1/whatif", json={"budget": 500}).text
    mask = lambda t: re.sub(r'"solver_ms":[0-9.]+', '"solver_ms":0', t)
    print("\nrepeat request byte-identical:", mask(a) == mask(b))
