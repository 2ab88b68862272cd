import csv
import io
import json
import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from eprworlds import report as rep
from eprworlds.correlation import theta_scan
from eprworlds.experiment import execute
from eprworlds.protocol import parse

from conftest import REPO


@given(st.floats(allow_nan=False, allow_infinity=False))
def test_seventeen_digits_round_trip(x):
    assert float(rep.fmt_float(x)) == x


def test_non_finite_refused():
    for bad in (math.nan, math.inf):
        with pytest.raises(ValueError):
            rep.fmt_float(bad)


def test_dumps_is_valid_json():
    obj = {"a": [0.1, 2, -0.0], "b": {"c": None, "d": True, "e": "θ"}, "f": [], "g": {}, "h": [{"x": 1.5}]}
    text = rep.dumps(obj)
    back = json.loads(text)
    assert back["a"] == [0.1, 2, 0]
    assert back["b"] == {"c": None, "d": True, "e": "θ"}
    assert back["h"] == [{"x": 1.5}]
    assert '"a": [0.10000000000000001, 2, 0]' in text


def test_scan_csv_shape():
    text = rep.scan_csv(theta_scan(0, 180, 5))
    assert "\r" not in text
    rows = list(csv.reader(io.StringIO(text)))
    assert tuple(rows[0]) == rep.SCAN_COLUMNS
    assert len(rows) == 6
    assert float(rows[3][1]) == pytest.approx(-math.cos(math.pi / 2), abs=1e-12)


def test_experiment_serializers_validate(schema):
    jsonschema = pytest.importorskip("jsonschema")
    for path in sorted((REPO / "experiments").glob("*.epr")):
        report = execute(parse(path.read_text()))
        obj = json.loads(rep.dumps(rep.experiment_json(report)))
        jsonschema.validate(obj, schema)
        rows = list(csv.reader(io.StringIO(rep.experiment_csv(report))))
        assert rows[0] == ["analysis", "line", "field", "value"]
        assert len(rows) > 1
