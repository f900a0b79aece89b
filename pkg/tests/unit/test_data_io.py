import io
import json
import os
import sys

import numpy as np
import pytest

# Add the project root to the Python path
sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '../..')))

from data_io import (
    ecdf_from_survival,
    load_scenarios,
    read_grouped_csv,
    read_null_distribution,
    read_survival_csv,
    read_value_csv,
    survival_rows,
    write_null_distribution,
    write_survival_csv,
)
from exceptions import ConfigError, InputDataError
from null_distribution import simulate_limit_one
from samples import GroupedSamples, ecdf_eval

GROUPED_CSV = "group,value\nB,1\nA,3\nB,2\nA,4\nC,0.5\n"


@pytest.fixture
def grouped_file(tmp_path):
    path = tmp_path / "groups.csv"
    path.write_text(GROUPED_CSV, encoding="utf-8")
    return path


# Test cases
def test_read_grouped_csv_default_order(grouped_file):
    data, default_order = read_grouped_csv(grouped_file)
    assert default_order is True
    assert data.labels == ("B", "A", "C")
    assert data.groups[1].values == (3.0, 4.0)


def test_read_grouped_csv_with_hypothesis_order(grouped_file):
    data, default_order = read_grouped_csv(grouped_file, ["A", "B"])
    assert default_order is False
    assert data.labels == ("A", "B")
    assert data.sizes == (2, 2)


def test_unknown_group_is_an_input_error(grouped_file):
    with pytest.raises(InputDataError, match="unknown group"):
        read_grouped_csv(grouped_file, ["A", "Z"])


def test_fewer_than_two_groups(tmp_path):
    path = tmp_path / "one.csv"
    path.write_text("group,value\nA,1\nA,2\n", encoding="utf-8")
    with pytest.raises(InputDataError, match="at least 2 groups"):
        read_grouped_csv(path)


def test_bad_rows_are_reported_with_line_numbers(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("group,value\nA,1\nA,abc\nB,2,3\nB,nan\n", encoding="utf-8")
    with pytest.raises(InputDataError) as excinfo:
        read_grouped_csv(path)
    lines = [line for line, _ in excinfo.value.problems]
    assert lines == [3, 4, 5], f"Expected problems on lines 3-5, got {excinfo.value.problems}"
    assert "line 3" in str(excinfo.value)


def test_missing_file_and_header(tmp_path):
    with pytest.raises(InputDataError):
        read_grouped_csv(tmp_path / "absent.csv")
    path = tmp_path / "noheader.csv"
    path.write_text("A,1\nB,2\n", encoding="utf-8")
    with pytest.raises(InputDataError):
        read_grouped_csv(path)


def test_read_value_csv(tmp_path):
    path = tmp_path / "values.csv"
    path.write_text("value\n0.75\n0.25\n\n", encoding="utf-8")
    sample = read_value_csv(path)
    assert sample.values == (0.25, 0.75)
    empty = tmp_path / "empty.csv"
    empty.write_text("value\n", encoding="utf-8")
    with pytest.raises(InputDataError):
        read_value_csv(empty)


def test_survival_rows_example():
    data = GroupedSamples.from_mapping({"A": [1.0, 2.0], "B": [5.0]})
    assert survival_rows(data) == [("A", 1.0, 0.5), ("A", 2.0, 0.0), ("B", 5.0, 0.0)]


def test_survival_round_trip_reproduces_ecdf(tmp_path):
    rng = np.random.default_rng(6)
    data = GroupedSamples.from_arrays([
        np.round(rng.exponential(size=30), 1),
        rng.normal(size=17),
        [1.0, 2.0, 3.0],
        np.arange(1.0, 8.0),
    ])
    path = tmp_path / "curves.csv"
    with open(path, "w", encoding="utf-8", newline="") as handle:
        write_survival_csv(data, handle)

    curves = read_survival_csv(path)
    for group in data.groups:
        steps = curves[group.label]
        for x in group.values:
            assert ecdf_from_survival(steps, x) == ecdf_eval(group, x), f"{group.label} at {x}"
        assert ecdf_from_survival(steps, min(group.values) - 1.0) == 0.0
        assert ecdf_from_survival(steps, max(group.values)) == 1.0


def test_ecdf_from_survival_recovers_thirds_and_sevenths():
    thirds = [(1.0, 2 / 3), (2.0, 1 / 3), (3.0, 0.0)]
    assert ecdf_from_survival(thirds, 1.0) == 1 / 3
    assert ecdf_from_survival(thirds, 2.5) == 2 / 3
    sevenths = [(float(i), (7 - i) / 7) for i in range(1, 8)]
    assert [ecdf_from_survival(sevenths, float(i)) for i in range(1, 8)] == [i / 7 for i in range(1, 8)]


def test_survival_csv_header():
    out = io.StringIO()
    write_survival_csv(GroupedSamples.from_mapping({"A": [1.0, 2.0], "B": [0.0]}), out)
    assert out.getvalue().splitlines()[:3] == ["group,x,survival", "A,1.0,0.5", "A,2.0,0.0"]


def test_null_distribution_file(tmp_path):
    dist = simulate_limit_one(reps=10, grid_size=20, seed=3)
    path = tmp_path / "null.txt"
    write_null_distribution(path, dist)
    assert read_null_distribution(path) == dist


def test_load_scenarios(tmp_path):
    path = tmp_path / "power.json"
    path.write_text(json.dumps({
        "crit_reps": 500,
        "scenarios": [{
            "name": "shift",
            "k": 2,
            "n_vec": [50, 50],
            "distributions": [
                {"family": "normal", "mean": 0.5, "variance": 1},
                {"family": "normal", "mean": 0, "variance": 1},
            ],
            "reps": 100,
            "order": "simple",
        }],
    }), encoding="utf-8")
    config = load_scenarios(path)
    assert config.crit_reps == 500
    assert config.scenarios[0].distributions[0].describe() == "N(0.5,1)"


def test_load_scenarios_reports_field_errors(tmp_path):
    path = tmp_path / "power.json"
    path.write_text(json.dumps([{"k": 2, "n_vec": [5, 5], "distributions": [{"family": "uniform", "a": 0, "b": 1}] * 2, "reps": 0}]), encoding="utf-8")
    with pytest.raises(ConfigError) as excinfo:
        load_scenarios(path)
    assert any("reps" in error for error in excinfo.value.field_errors), excinfo.value.field_errors

    path.write_text("{not json", encoding="utf-8")
    with pytest.raises(ConfigError, match="not valid JSON"):
        load_scenarios(path)
