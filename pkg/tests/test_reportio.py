import json
import math

import numpy as np
import pytest

from cmnl import ParseError
from cmnl.reportio import (
    digest_inputs,
    dumps_document,
    dumps_report,
    make_report,
    parse_json,
)


def test_document_floats_round_trip():
    vals = [0.1, 1 / 3, 2.0999999999999996, 1e-17, 7.0]
    text = dumps_document({"vals": vals})
    assert json.loads(text)["vals"] == vals


def test_report_floats_twelve_digits():
    text = dumps_report({"x": 1 / 3})
    assert '"x": 0.333333333333' in text


def test_keys_sorted_and_stable():
    a = dumps_report({"b": 1, "a": 2, "c": {"z": 0, "y": 1}})
    b = dumps_report({"c": {"y": 1, "z": 0}, "a": 2, "b": 1})
    assert a == b
    assert a.index('"a"') < a.index('"b"') < a.index('"c"')


def test_numpy_values_serialize():
    doc = {"arr": np.array([[1.0, 2.0]]), "scalar": np.float64(0.5),
            "count": np.int64(3)}
    text = dumps_report(doc)
    parsed = json.loads(text)
    assert parsed == {"arr": [[1.0, 2.0]], "scalar": 0.5, "count": 3}


def test_non_finite_rejected():
    for bad in (math.inf, -math.inf, math.nan):
        with pytest.raises(ValueError, match="non-finite"):
            dumps_report({"x": bad})


def test_unserializable_rejected():
    with pytest.raises(TypeError):
        dumps_document({"x": object()})


def test_parse_json_error_names_source():
    with pytest.raises(ParseError, match="instance: invalid JSON"):
        parse_json("{oops", what="instance")


def test_digest_separator_sensitive():
    assert digest_inputs("ab", "c") != digest_inputs("a", "bc")
    assert digest_inputs("x") == digest_inputs("x")
    assert len(digest_inputs("x", "y")) == 16


def test_make_report_shape():
    rep = make_report("eval", "deadbeefdeadbeef", {"v": 1})
    assert rep == {
        "schema_version": 1,
        "command": "eval",
        "inputs_digest": "deadbeefdeadbeef",
        "results": {"v": 1},
    }
