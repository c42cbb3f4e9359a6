import numpy as np
import pytest

import foodrisk as fr
from foodrisk import DataError
from foodrisk.fusion import fit_minmax, apply_minmax, fuse_features


def test_minmax_hand_oracle(tiny_ds):
    spec = fit_minmax(tiny_ds)
    matrix = tiny_ds.indicator_matrix()
    np.testing.assert_array_equal(spec.mins, matrix.min(axis=0))
    np.testing.assert_array_equal(spec.maxs, matrix.max(axis=0))
    row = apply_minmax(spec, tiny_ds.records[3].indicators)
    for j in range(6):
        lo, hi = spec.mins[j], spec.maxs[j]
        raw = matrix[3, j]
        expected = 0.0 if hi == lo else (raw - lo) / (hi - lo)
        assert row[j] == pytest.approx(expected, abs=1e-15)


def test_minmax_constant_feature_maps_to_zero():
    const = fr.NormalizationSpec(
        mins=np.array([0.5, 0.0]), maxs=np.array([0.5, 2.0])
    )
    out = apply_minmax(const, np.array([0.5, 1.0]))
    assert out[0] == 0.0
    assert out[1] == 0.5


def test_minmax_clamps_out_of_range():
    spec = fr.NormalizationSpec(mins=np.array([0.0]), maxs=np.array([1.0]))
    assert apply_minmax(spec, np.array([2.5]))[0] == 1.0
    assert apply_minmax(spec, np.array([-3.0]))[0] == 0.0


def test_minmax_rejects_empty_and_shape_mismatch(tiny_ds):
    with pytest.raises(DataError):
        fit_minmax(fr.Dataset(records=(), num_districts=1))
    spec = fit_minmax(tiny_ds)
    with pytest.raises(DataError):
        apply_minmax(spec, np.zeros(3))


def test_normalization_spec_validation():
    with pytest.raises(DataError):
        fr.NormalizationSpec(mins=np.array([1.0]), maxs=np.array([0.0]))
    with pytest.raises(DataError):
        fr.NormalizationSpec(mins=np.array([np.nan]), maxs=np.array([1.0]))


def test_fuse_order_text_first():
    fused = fuse_features([1.0, 2.0], [3.0])
    np.testing.assert_array_equal(fused.values, [1.0, 2.0, 3.0])


def test_fuse_rejects_bad_vectors():
    with pytest.raises(DataError):
        fuse_features([np.nan], [1.0])
    with pytest.raises(DataError):
        fuse_features([[1.0, 2.0]], [1.0])


def test_featurizer_dims_and_layout(tiny_ds):
    fc = fr.FeaturizerConfig(provider="hash", hash_dim=16)
    feat = fr.Featurizer(fc).fit(tiny_ds)
    assert feat.text_dim == 16
    assert feat.structured_dim == 6
    assert feat.fused_dim == 22
    X = feat.transform_dataset(tiny_ds)
    assert X.shape == (8, 22)
    # layout hash is stable for identical geometry, changes when it differs
    feat2 = fr.Featurizer(fc).fit(tiny_ds)
    assert feat.layout_hash() == feat2.layout_hash()
    feat3 = fr.Featurizer(fr.FeaturizerConfig(provider="hash", hash_dim=32)).fit(tiny_ds)
    assert feat.layout_hash() != feat3.layout_hash()


def test_featurizer_ablation_flags(tiny_ds):
    text_only = fr.Featurizer(
        fr.FeaturizerConfig(provider="hash", hash_dim=16, use_structured=False)
    ).fit(tiny_ds)
    assert text_only.fused_dim == 16
    struct_only = fr.Featurizer(
        fr.FeaturizerConfig(provider="hash", use_text=False)
    ).fit(tiny_ds)
    assert struct_only.fused_dim == 6
    with pytest.raises(DataError):
        fr.FeaturizerConfig(use_text=False, use_structured=False)


def test_featurizer_tfidf_provider(tiny_ds):
    fc = fr.FeaturizerConfig(provider="tfidf", max_features=32)
    feat = fr.Featurizer(fc).fit(tiny_ds)
    X = feat.transform_dataset(tiny_ds)
    assert X.shape[1] == feat.fused_dim
    assert np.all(np.isfinite(X))


def test_featurizer_external_provider(tiny_ds, tmp_path):
    path = tmp_path / "emb.jsonl"
    lines = []
    for r in tiny_ds.records:
        vec = [float(r.district_id), 1.0, 0.0]
        lines.append('{"record_id": "%s", "vector": [%s]}' % (r.record_id, ", ".join(map(repr, vec))))
    path.write_text("\n".join(lines) + "\n")
    fc = fr.FeaturizerConfig(provider="external", embeddings_path=str(path))
    feat = fr.Featurizer(fc).fit(tiny_ds)
    assert feat.text_dim == 3
    X = feat.transform_dataset(tiny_ds)
    assert X.shape == (8, 9)


def test_featurizer_external_missing_record_is_reported(tiny_ds, tmp_path):
    path = tmp_path / "emb.jsonl"
    path.write_text('{"record_id": "rec-0000", "vector": [1.0]}\n')
    fc = fr.FeaturizerConfig(provider="external", embeddings_path=str(path))
    feat = fr.Featurizer(fc).fit(tiny_ds)
    with pytest.raises(fr.TextError, match="rec-0001"):
        feat.transform_dataset(tiny_ds)


def test_featurizer_requires_fit(tiny_ds):
    feat = fr.Featurizer(fr.FeaturizerConfig(provider="hash"))
    with pytest.raises(DataError, match="fitted"):
        feat.transform_dataset(tiny_ds)


def test_featurizer_serialization_round_trip(tiny_ds):
    fc = fr.FeaturizerConfig(provider="tfidf", max_features=16, seed=3)
    feat = fr.Featurizer(fc).fit(tiny_ds)
    back = fr.Featurizer.from_dict(feat.to_dict())
    np.testing.assert_array_equal(
        back.transform_dataset(tiny_ds), feat.transform_dataset(tiny_ds)
    )
    assert back.layout_hash() == feat.layout_hash()


def test_featurizer_rejects_unknown_provider():
    with pytest.raises(DataError):
        fr.FeaturizerConfig(provider="bert")
