import json
import os
import sys

# Add the project root to the Python path
sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '../..')))

from sequential_ks import SnResult
from utils.report_formatter import (
    error_report,
    fmt,
    format_report,
    normalize,
    render_fields,
    render_table,
    round_significant,
    success_report,
    to_json,
)


# Test cases
def test_round_significant():
    assert round_significant(2.2493412345) == 2.24934
    assert round_significant(0.000123456789) == 0.000123457
    assert round_significant(0.0) == 0.0
    assert fmt(2.2493412345) == "2.24934"
    assert fmt(None) == "-"


def test_envelope_drops_none_entries():
    report = format_report(data={"x": 1.0}, message="done", meta={"seed": 1, "grid": None})
    assert report == {"success": True, "data": {"x": 1.0}, "message": "done", "meta": {"seed": 1}}


def test_success_and_error_helpers():
    assert success_report(data=[1])["success"] is True
    failed = error_report("k-sample failed", error="unknown group X")
    assert failed["success"] is False
    assert failed["error"] == "unknown group X"
    assert "data" not in failed


def test_normalize_models_and_float_keys():
    result = SnResult(statistic=1.23456789, per_stage=(1.23456789,), critical_values={0.05: 1.2238734}, p_value=0.2)
    normalized = normalize(result)
    assert normalized["statistic"] == 1.23457
    assert normalized["per_stage"] == [1.23457]
    assert normalized["critical_values"] == {"0.05": 1.22387}


def test_json_is_sorted_and_stable():
    first = to_json(success_report(data={"b": 2, "a": 1}, meta={"seed": 3}))
    second = to_json(success_report(data={"a": 1, "b": 2}, meta={"seed": 3}))
    assert first == second
    assert list(json.loads(first)) == sorted(json.loads(first))


def test_render_fields_and_table():
    text = render_fields("Tn test", [("Statistic", "2.24934"), ("p-value", "0.03")])
    assert text.splitlines()[0] == "Tn test"
    assert "Statistic : 2.24934" in text
    table = render_table(["k", "alpha=0.05"], [[2, 1.8213456]])
    assert "1.82135" in table
    assert len(table.splitlines()) == 3
