import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from foodrisk import jsonfmt


def test_small_floats_stay_decimal():
    assert jsonfmt.format_float(1e-7) == "0.0000001"
    assert jsonfmt.format_float(2.5e21) == "2500000000000000000000"
    assert "e" not in jsonfmt.dumps({"x": 1e-12}).lower()


def test_format_float_round_trips():
    for x in (0.1, 1 / 3, 1e-300, -4.25, 123456.789):
        assert float(jsonfmt.format_float(x)) == x


@given(st.floats(allow_nan=False, allow_infinity=False))
@settings(max_examples=300, deadline=None)
def test_format_float_round_trips_property(x):
    assert float(jsonfmt.format_float(x)) == x


def test_rejects_non_finite():
    with pytest.raises(ValueError):
        jsonfmt.format_float(float("nan"))
    with pytest.raises(ValueError):
        jsonfmt.format_float(float("inf"))


def test_dumps_matches_json_semantics():
    obj = {"a": [1, 2.5, None, True, "s"], "b": {"c": -0.125}}
    assert json.loads(jsonfmt.dumps(obj)) == obj
    assert json.loads(jsonfmt.dumps(obj, indent=2)) == obj


def test_dumps_compact_and_indented_layout():
    assert jsonfmt.dumps({"a": 1, "b": [2, 3]}) == '{"a":1,"b":[2,3]}'
    assert jsonfmt.dumps({"a": [1]}, indent=2) == '{\n  "a": [\n    1\n  ]\n}'
    assert jsonfmt.dumps({}) == "{}"
    assert jsonfmt.dumps([]) == "[]"


def test_dumps_preserves_key_order():
    assert jsonfmt.dumps({"b": 1, "a": 2}) == '{"b":1,"a":2}'


def test_numpy_values_serialize():
    out = jsonfmt.dumps({"v": np.float64(0.5), "a": np.array([1.0, 2.0]), "n": np.int64(3)})
    assert json.loads(out) == {"v": 0.5, "a": [1.0, 2.0], "n": 3}


def test_rejects_non_string_keys_and_unknown_types():
    with pytest.raises(TypeError):
        jsonfmt.dumps({1: "x"})
    with pytest.raises(TypeError):
        jsonfmt.dumps({"x": object()})


def test_dump_appends_newline(tmp_path):
    path = tmp_path / "out.json"
    with open(path, "w") as fh:
        jsonfmt.dump({"a": 1}, fh)
    assert path.read_text() == '{"a":1}\n'
