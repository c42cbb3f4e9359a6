import numpy as np
import pytest

import foodrisk as fr
from foodrisk import DataError

from conftest import make_record


def test_indicator_set_rejects_non_finite():
    with pytest.raises(DataError):
        fr.IndicatorSet(float("nan"), 0.1, 0.1, 0.1, 0.5, 0.1)
    with pytest.raises(DataError):
        fr.IndicatorSet(0.1, float("inf"), 0.1, 0.1, 0.5, 0.1)


def test_indicator_set_bounds_rates():
    # malnutrition_rate and pds_coverage are proportions
    with pytest.raises(DataError):
        fr.IndicatorSet(1.5, 0.1, 0.1, 0.1, 0.5, 0.1)
    with pytest.raises(DataError):
        fr.IndicatorSet(0.1, 0.1, 0.1, 0.1, -0.2, 0.1)
    # variability and deviation columns are unbounded
    fr.IndicatorSet(0.1, 5.0, -3.0, 2.0, 0.5, 9.0)


def test_record_validation():
    ind = fr.IndicatorSet(0.1, 0.2, 0.3, 0.4, 0.5, 0.6)
    with pytest.raises(DataError):
        fr.DistrictRecord("r0", 0, "coastal", ind)
    with pytest.raises(DataError):
        fr.DistrictRecord("r0", 0, "rural", ind, label=2)
    with pytest.raises(DataError):
        fr.DistrictRecord("r0", -1, "rural", ind)
    with pytest.raises(DataError):
        fr.DistrictRecord("r0", 0, "rural", ind, cost=-1.0)


def test_dataset_rejects_duplicate_ids():
    a = make_record(0)
    b = make_record(0)
    with pytest.raises(DataError, match="duplicate"):
        fr.Dataset(records=(a, b), num_districts=1)


def test_dataset_rejects_out_of_range_district():
    with pytest.raises(DataError):
        fr.Dataset(records=(make_record(0, district=5),), num_districts=2)


def test_dataset_default_district_names():
    ds = fr.Dataset(records=(make_record(0),), num_districts=3)
    assert len(ds.district_names) == 3
    assert ds.district_names[0] != ds.district_names[1]


def test_labels_reject_unlabeled():
    ind = fr.IndicatorSet(0.1, 0.2, 0.3, 0.4, 0.5, 0.6)
    rec = fr.DistrictRecord("r0", 0, "rural", ind)  # label=None
    ds = fr.Dataset(records=(rec,), num_districts=1)
    with pytest.raises(DataError, match="r0"):
        ds.labels()


def test_positive_rate_and_groups(tiny_ds):
    assert tiny_ds.positive_rate() == 0.5
    g = tiny_ds.groups()
    assert set(g) == {"rural", "urban"}
    assert tiny_ds.indicator_matrix().shape == (8, 6)


def test_csv_round_trip(tiny_ds, tmp_path):
    path = tmp_path / "data.csv"
    fr.save_csv(tiny_ds, path)
    back = fr.load_csv(path)
    assert back.num_districts == tiny_ds.num_districts
    assert back.district_names == tiny_ds.district_names
    assert len(back) == len(tiny_ds)
    for a, b in zip(tiny_ds.records, back.records):
        assert a == b


def test_csv_round_trip_unlabeled(tmp_path):
    rec = fr.DistrictRecord(
        "r0", 0, "urban", fr.IndicatorSet(0.1, 0.2, 0.3, 0.4, 0.5, 0.6), text="x, y"
    )
    ds = fr.Dataset(records=(rec,), num_districts=1)
    path = tmp_path / "d.csv"
    fr.save_csv(ds, path)
    back = fr.load_csv(path)
    assert back.records[0].label is None
    assert back.records[0].text == "x, y"


def test_csv_rejects_wrong_header(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("a,b,c\n1,2,3\n")
    (tmp_path / "bad.districts.json").write_text('{"num_districts": 1}')
    with pytest.raises(DataError, match="header"):
        fr.load_csv(path)


def test_split_sizes_and_disjoint(tiny_ds):
    tr, ev = fr.split_dataset(tiny_ds, 0.75, seed=3)
    assert len(tr) == 6 and len(ev) == 2
    assert {r.record_id for r in tr.records}.isdisjoint(
        {r.record_id for r in ev.records}
    )


def test_split_deterministic(tiny_ds):
    a1, b1 = fr.split_dataset(tiny_ds, 0.5, seed=11)
    a2, b2 = fr.split_dataset(tiny_ds, 0.5, seed=11)
    assert [r.record_id for r in a1.records] == [r.record_id for r in a2.records]
    a3, _ = fr.split_dataset(tiny_ds, 0.5, seed=12)
    assert [r.record_id for r in a1.records] != [r.record_id for r in a3.records]


def test_split_stratified_preserves_rate(synth_ds):
    tr, ev = fr.split_dataset(synth_ds, 0.75, seed=0, stratify=True)
    assert abs(tr.positive_rate() - synth_ds.positive_rate()) < 0.01
    assert abs(ev.positive_rate() - synth_ds.positive_rate()) < 0.02


def test_split_rejects_bad_fraction(tiny_ds):
    for frac in (0.0, 1.0, -0.1):
        with pytest.raises(DataError):
            fr.split_dataset(tiny_ds, frac, seed=0)


def test_split_preserves_record_order_within_split(tiny_ds):
    # splits keep the parent ordering, which downstream code relies on
    tr, ev = fr.split_dataset(tiny_ds, 0.75, seed=5)
    ids = [r.record_id for r in tiny_ds.records]
    assert [r.record_id for r in tr.records] == [
        i for i in ids if i in {r.record_id for r in tr.records}
    ]
    assert [r.record_id for r in ev.records] == [
        i for i in ids if i in {r.record_id for r in ev.records}
    ]
