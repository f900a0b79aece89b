import json
import logging
import os
import sys

import pytest

# Add the project root to the Python path
sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '../..')))

from elorder_cli import EXIT_INPUT_ERROR, EXIT_INVALID_ARGUMENT, EXIT_OK, build_parser, main


@pytest.fixture
def two_groups(tmp_path):
    path = tmp_path / "two.csv"
    path.write_text("group,value\nA,3\nB,1\nA,4\nB,2\n", encoding="utf-8")
    return path


@pytest.fixture
def identical_groups(tmp_path):
    path = tmp_path / "same.csv"
    path.write_text("group,value\nA,1\nA,2\nB,1\nB,2\n", encoding="utf-8")
    return path


def run_json(capsys, argv):
    code = main(argv)
    out = capsys.readouterr().out
    return code, json.loads(out)


LIMIT_ARGS = ["--null", "limit", "--reps", "2000", "--grid", "200", "--no-cache", "--json"]


# Test cases
def test_k_sample_detects_ordering(capsys, two_groups):
    code, report = run_json(capsys, ["k-sample", str(two_groups), "--groups", "A,B", *LIMIT_ARGS])
    assert code == EXIT_OK
    assert report["success"] is True
    data = report["data"]
    assert data["statistic"] == pytest.approx(2.24934, abs=1e-5)
    assert data["p_value"] < 0.10
    assert data["groups"] == ["A", "B"]
    assert report["meta"]["method"] == "limit-k"
    assert report["meta"]["reps"] == 2000


def test_k_sample_identical_groups(capsys, identical_groups):
    code, report = run_json(capsys, ["k-sample", str(identical_groups), "--groups", "A,B", *LIMIT_ARGS])
    assert code == EXIT_OK
    assert report["data"]["statistic"] == 0.0
    assert report["data"]["p_value"] == 1.0
    assert report["data"]["ties"] == 2


def test_k_sample_text_with_sn(capsys, two_groups):
    code = main(["k-sample", str(two_groups), "--groups", "A,B", "--with-sn", "--null", "limit",
                 "--reps", "200", "--grid", "50", "--no-cache"])
    out = capsys.readouterr().out
    assert code == EXIT_OK
    assert "Tn test" in out
    assert "Sn test" in out
    assert "A > B" in out


def test_k_sample_is_deterministic_across_workers(capsys, two_groups):
    argv = ["k-sample", str(two_groups), "--groups", "A,B", *LIMIT_ARGS]
    main(argv)
    first = capsys.readouterr().out
    main(argv)
    second = capsys.readouterr().out
    main(argv + ["--workers", "2"])
    parallel = capsys.readouterr().out
    assert first == second == parallel


def test_k_sample_finite_null_uses_observed_sizes(capsys, two_groups):
    code, report = run_json(capsys, ["k-sample", str(two_groups), "--groups", "A,B",
                                     "--reps", "200", "--no-cache", "--json"])
    assert code == EXIT_OK
    assert report["meta"]["method"] == "finite-sample"
    assert report["meta"]["sizes"] == [2, 2]


def test_one_sample(capsys, tmp_path):
    path = tmp_path / "values.csv"
    path.write_text("value\n0.25\n0.75\n", encoding="utf-8")
    code, report = run_json(capsys, ["one-sample", str(path), "--f0", "uniform:a=0,b=1", "--star",
                                     "--reps", "300", "--grid", "100", "--no-cache", "--json"])
    assert code == EXIT_OK
    data = report["data"]
    assert data["statistic"] == pytest.approx(0.045229, abs=1e-5)
    assert data["companions"][0]["test"] == "Tn*"
    assert data["companions"][0]["details"] == {"ecdf_side": "right"}


def test_one_sample_single_observation(capsys, tmp_path):
    path = tmp_path / "one.csv"
    path.write_text("value\n0.3\n", encoding="utf-8")
    code, report = run_json(capsys, ["one-sample", str(path), "--f0", "uniform:a=0,b=1",
                                     "--reps", "50", "--grid", "50", "--no-cache", "--json"])
    assert code == EXIT_OK
    assert report["data"]["statistic"] == 0.0
    assert report["data"]["p_value"] == 1.0


def test_one_sample_bad_distribution(capsys, tmp_path):
    path = tmp_path / "values.csv"
    path.write_text("value\n0.5\n", encoding="utf-8")
    code = main(["one-sample", str(path), "--f0", "uniform:a=1,b=0", "--no-cache"])
    assert code == EXIT_INVALID_ARGUMENT
    assert "invalid distribution spec" in capsys.readouterr().err


def test_critvals_single_draw(capsys):
    code, report = run_json(capsys, ["critvals", "--k", "2", "--reps", "1", "--n", "5", "--no-cache", "--json"])
    assert code == EXIT_OK
    rows = report["data"]["rows"]
    assert [row["alpha"] for row in rows] == [0.01, 0.05, 0.1]
    assert len({row["critical_value"] for row in rows}) == 1


def test_critvals_writes_csv(capsys, tmp_path):
    out = tmp_path / "crit.csv"
    code = main(["critvals", "--k", "2..3", "--reps", "20", "--n", "5", "--no-cache", "--out", str(out)])
    assert code == EXIT_OK
    lines = out.read_text(encoding="utf-8").splitlines()
    assert lines[0] == "k,alpha,critical_value"
    assert len(lines) == 7
    assert "alpha=0.05" in capsys.readouterr().out


def test_survcurves_to_stdout(capsys, tmp_path):
    path = tmp_path / "data.csv"
    path.write_text("group,value\nA,1\nA,2\nB,0\n", encoding="utf-8")
    code = main(["survcurves", str(path)])
    lines = capsys.readouterr().out.splitlines()
    assert code == EXIT_OK
    assert lines == ["group,x,survival", "A,1.0,0.5", "A,2.0,0.0", "B,0.0,0.0"]


def test_survcurves_rejects_json(capsys, tmp_path):
    path = tmp_path / "data.csv"
    path.write_text("group,value\nA,1\nB,0\n", encoding="utf-8")
    assert main(["survcurves", str(path), "--json"]) == EXIT_INVALID_ARGUMENT
    captured = capsys.readouterr()
    assert captured.out == ""
    assert "unrecognized arguments: --json" in captured.err
    assert "json" not in vars(build_parser().parse_args(["survcurves", str(path)]))


def test_input_errors_exit_with_input_code(capsys, two_groups, tmp_path):
    assert main(["k-sample", str(two_groups), "--groups", "A,Z", "--no-cache"]) == EXIT_INPUT_ERROR
    bad = tmp_path / "bad.csv"
    bad.write_text("group,value\nA,1\nB,x\n", encoding="utf-8")
    assert main(["k-sample", str(bad), "--no-cache", "--json"]) == EXIT_INPUT_ERROR
    envelope = json.loads(capsys.readouterr().out)
    assert envelope["success"] is False
    assert "line 3" in envelope["error"]
    assert main(["k-sample", str(tmp_path / "missing.csv"), "--no-cache"]) == EXIT_INPUT_ERROR


def test_argument_errors_exit_with_argument_code(capsys, two_groups):
    assert main(["k-sample", str(two_groups), "--alphas", "1.5", "--no-cache"]) == EXIT_INVALID_ARGUMENT
    assert main(["k-sample", str(two_groups), "--bogus"]) == EXIT_INVALID_ARGUMENT
    assert main(["k-sample", str(two_groups), "--reps", "0"]) == EXIT_INVALID_ARGUMENT
    assert main(["k-sample", str(two_groups), "--order", "tree:root=1", "--with-sn", "--no-cache"]) == EXIT_INVALID_ARGUMENT
    assert main(["critvals", "--k", "1"]) == EXIT_INVALID_ARGUMENT
    assert main([]) == EXIT_INVALID_ARGUMENT


def test_help_exits_cleanly(capsys):
    assert main(["--help"]) == EXIT_OK
    assert "k-sample" in capsys.readouterr().out


def test_power_study(capsys, tmp_path):
    config = tmp_path / "power.json"
    config.write_text(json.dumps({"scenarios": [{
        "name": "normal shift",
        "k": 2,
        "n_vec": [10, 10],
        "distributions": [
            {"family": "normal", "mean": 1.0, "variance": 1.0},
            {"family": "normal", "mean": 0.0, "variance": 1.0},
        ],
        "reps": 40,
        "seed": 3,
    }]}), encoding="utf-8")
    out = tmp_path / "power.csv"
    code = main(["power", str(config), "--no-cache", "--out", str(out)])
    assert code == EXIT_OK
    header = out.read_text(encoding="utf-8").splitlines()[0].split(",")
    assert {"scenario", "Tn_rate", "Sn_rate", "Tn_crit"} <= set(header)
    assert "normal shift" in capsys.readouterr().out


def test_malformed_power_config(capsys, tmp_path):
    config = tmp_path / "power.json"
    config.write_text(json.dumps([{"k": 2, "n_vec": [10], "distributions": []}]), encoding="utf-8")
    assert main(["power", str(config), "--no-cache"]) == EXIT_INPUT_ERROR
    assert "invalid power configuration" in capsys.readouterr().err


def test_null_distribution_is_cached(capsys, caplog, two_groups, tmp_path):
    cache_dir = tmp_path / "cache"
    argv = ["k-sample", str(two_groups), "--groups", "A,B", "--null", "limit",
            "--reps", "100", "--grid", "50", "--cache-dir", str(cache_dir), "--json"]
    with caplog.at_level(logging.INFO):
        assert main(argv) == EXIT_OK
        first = capsys.readouterr().out
        assert len(list(cache_dir.glob("null-*.txt"))) == 1
        assert main(argv) == EXIT_OK
        second = capsys.readouterr().out
    assert first == second
    assert "Cache hit" in caplog.text
