import json
import math
import os

import numpy as np
from hypothesis import given
from hypothesis import strategies as st

from lorenz_lab.io import atomic_write_text, csv_text, dumps, read_polyline_csv, write_csv_atomic, write_json


@given(st.floats(allow_nan=False, allow_infinity=False))
def test_float_round_trip_is_exact(x):
    assert json.loads(dumps({"x": x}))["x"] == x


@given(st.lists(st.floats(allow_nan=False, allow_infinity=False), min_size=1, max_size=5))
def test_numpy_arrays_round_trip(xs):
    back = json.loads(dumps({"a": np.array(xs)}))["a"]
    assert back == xs


def test_nonfinite_become_null():
    out = json.loads(dumps({"a": math.nan, "b": [1.0, math.inf], "c": np.float64(-np.inf)}))
    assert out == {"a": None, "b": [1.0, None], "c": None}


def test_integral_floats_stay_floats():
    text = dumps({"a": 2.0, "b": 2, "c": np.int64(3), "d": np.bool_(True)})
    out = json.loads(text)
    assert isinstance(out["a"], float) and isinstance(out["b"], int)
    assert out["c"] == 3 and out["d"] is True


def test_atomic_write_replaces_and_leaves_no_temp(tmp_path):
    path = tmp_path / "sub" / "r.json"
    write_json(path, {"k": 1.5})
    write_json(path, {"k": 2.5})
    assert json.loads(path.read_text()) == {"k": 2.5}
    assert os.listdir(path.parent) == ["r.json"]


def test_atomic_write_keeps_old_file_on_failure(tmp_path):
    path = tmp_path / "r.txt"
    atomic_write_text(path, "old")


    try:
        atomic_write_text(path, object())
    except TypeError:
        pass
    assert path.read_text() == "old"
    assert os.listdir(tmp_path) == ["r.txt"]


def test_csv_round_trip(tmp_path):
    pts = np.random.default_rng(0).normal(size=(7, 3))
    path = tmp_path / "p.csv"
    write_csv_atomic(path, ["x", "y", "z"], pts)
    assert np.array_equal(read_polyline_csv(path), pts)
    assert csv_text(["a", "b"], [["s", 0.1]]) == "a,b\ns,0.10000000000000001\n"
