import numpy as np
import pytest

import foodrisk as fr


def make_record(i, group="rural", label=0, text="stable supply", cost=10.0, district=0):
    ind = fr.IndicatorSet(
        malnutrition_rate=0.1 + 0.05 * (i % 7),
        crop_yield_variability=0.2 + 0.1 * (i % 5),
        rainfall_deviation=-0.5 + 0.25 * (i % 4),
        food_price_inflation=0.05 * (i % 6),
        pds_coverage=0.9 - 0.08 * (i % 8),
        vulnerability_index=0.3 + 0.07 * (i % 9),
    )
    return fr.DistrictRecord(
        record_id=f"rec-{i:04d}",
        district_id=district,
        group=group,
        indicators=ind,
        text=text,
        label=label,
        cost=cost,
    )


@pytest.fixture
def tiny_ds():
    """Eight handmade records covering both groups and both labels."""
    recs = []
    texts = [
        "markets stable and rainfall normal",
        "ration shops stocked this month",
        "crop failure reported in two blocks",
        "acute shortage and rising prices",
        "harvest on schedule no distress",
        "wells dry and fodder scarce",
        "mild price rise in pulses",
        "relief camps requested by villagers",
    ]
    for i in range(8):
        recs.append(
            make_record(
                i,
                group="rural" if i % 2 == 0 else "urban",
                label=1 if i in (2, 3, 5, 7) else 0,
                text=texts[i],
                cost=10.0 + i,
                district=i % 4,
            )
        )
    return fr.Dataset(records=tuple(recs), num_districts=4)


@pytest.fixture(scope="session")
def synth_ds():
    return fr.generate(fr.SynthConfig(num_records=240, num_districts=12, seed=7))


@pytest.fixture(scope="session")
def trained(synth_ds):
    """Small trained artifact plus its train/eval split; fast on purpose."""
    tr, ev = fr.split_dataset(synth_ds, 0.75, seed=0, stratify=True)
    fc = fr.FeaturizerConfig(provider="hash", hash_dim=16, seed=0)
    feat = fr.Featurizer(fc).fit(tr)
    tc = fr.TrainConfig(arch="logistic", epochs=40, learning_rate=0.3, seed=0, lam=0.0)
    params, history = fr.train(tr, feat, tc)
    art = fr.ModelArtifact(params=params, featurizer=feat, train_config=tc)
    return {"artifact": art, "train": tr, "eval": ev, "history": history}
