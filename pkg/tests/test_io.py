import json

import numpy as np

from opsize.io import format_value, to_jsonable, write_csv, write_json


def test_round_trip_floats(tmp_path):
    values = [0.1, 1 / 3, 1e-300, 123456789.123456789, np.float64(2.5)]
    path = tmp_path / "x.csv"
    write_csv(path, ["v"], [[v] for v in values])
    lines = path.read_text().splitlines()
    assert lines[0] == "v"
    assert [float(x) for x in lines[1:]] == [float(v) for v in values]


def test_format_value():
    assert format_value(True) == "true" and format_value(np.bool_(False)) == "false"
    assert format_value(np.int64(7)) == "7"
    assert format_value(0.1) == "0.1"


def test_json_schema_and_nonfinite(tmp_path):
    path = tmp_path / "r.json"
    write_json(path, {"a": np.array([1.0, np.inf]), "b": np.float32(0.5), "c": (1, 2)})
    body = json.loads(path.read_text())
    assert body["schema_version"] == 1
    assert body["a"] == [1.0, "inf"] and body["b"] == 0.5 and body["c"] == [1, 2]


def test_to_jsonable_complex():
    assert to_jsonable(complex(1, -2)) == [1.0, -2.0]


def test_nested_output_dir(tmp_path):
    path = tmp_path / "deep" / "dir" / "x.csv"
    write_csv(path, ["a"], [[1]])
    assert path.read_text() == "a\n1\n"
