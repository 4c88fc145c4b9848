import csv
import io
import json

import numpy as np
import pytest

from artifact.cli import EXIT_IO, EXIT_OK, EXIT_USAGE, main, parse_int_range


@pytest.fixture(scope="module")
def cache(tmp_path_factory):
    return tmp_path_factory.mktemp("cache")


@pytest.fixture(autouse=True)
def _isolated_env(monkeypatch, cache):
    monkeypatch.setenv("ARTIFACT_CACHE_DIR", str(cache))


def test_int_range():
    assert parse_int_range("1..6") == [1, 2, 3, 4, 5, 6]
    assert parse_int_range("2,5") == [2, 5]


def test_zeros_file_and_idempotence(tmp_path):
    out = tmp_path / "z0.json"
    assert main(["zeros", "--order", "0", "--count", "1", "--out", str(out)]) == EXIT_OK
    text = out.read_text()
    assert "2.404825557695773" in text
    assert main(["zeros", "--order", "0", "--count", "1", "--out", str(out)]) == EXIT_OK
    assert out.read_text() == text


def test_zeros_to_cache(tmp_path):
    assert main(["zeros", "--order", "2", "--count", "5", "--cache-dir", str(tmp_path)]) == EXIT_OK
    assert list(tmp_path.glob("*.json"))


def test_usage_errors(capsys):
    assert main(["zeros", "--order", "-1", "--count", "3"]) == EXIT_USAGE
    assert main(["zeros", "--order", "0", "--count", "3", "--bogus"]) == EXIT_USAGE
    assert main(["dispersion", "--alpha", "1.5", "--b", "0.25", "--m", "1"]) == EXIT_USAGE
    assert main(["nosuchcommand"]) == EXIT_USAGE
    assert main(["scan", "--help"]) == EXIT_OK
    assert "--m-max" in capsys.readouterr().out


def test_io_errors(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    bad = blocker / "sub" / "out.csv"
    assert main(["zeros", "--order", "0", "--count", "2", "--out", str(bad)]) == EXIT_IO
    assert main(["dispersion", "--config", str(tmp_path / "missing.json")]) == EXIT_IO


def _read_csv(path):
    return list(csv.DictReader(io.StringIO(path.read_text())))


def test_dispersion_csv(tmp_path):
    out = tmp_path / "d.csv"
    rc = main(["dispersion", "--alpha", "0.5", "--b", "0.25", "--m", "1..6", "--out", str(out)])
    assert rc == EXIT_OK
    rows = _read_csv(out)
    assert len(rows) == 6
    assert list(rows[0]) == ["alpha", "b", "m", "omega_sneddon", "omega_zero_sum", "abs_diff",
                             "minus_V1_0", "alpha_mb", "case_flags"]
    assert all(float(r["abs_diff"]) < 1e-6 for r in rows)
    first = out.read_text()
    assert main(["dispersion", "--alpha", "0.5", "--b", "0.25", "--m", "1..6", "--out", str(out),
                 "--threads", "1"]) == EXIT_OK
    assert out.read_text() == first


def test_config_precedence(tmp_path):
    conf = tmp_path / "c.json"
    conf.write_text(json.dumps({"alpha": [0.5], "b": [0.25], "m": "1..2"}))
    out = tmp_path / "d.csv"
    assert main(["dispersion", "--config", str(conf), "--out", str(out)]) == EXIT_OK
    assert [r["m"] for r in _read_csv(out)] == ["1", "2"]
    assert main(["dispersion", "--config", str(conf), "--m", "3", "--out", str(out)]) == EXIT_OK
    assert [r["m"] for r in _read_csv(out)] == ["3"]
    conf.write_text(json.dumps({"alpha": [0.5], "colour": "red"}))
    assert main(["dispersion", "--config", str(conf), "--b", "0.2", "--m", "1"]) == EXIT_USAGE


def test_scan_csv(tmp_path):
    out = tmp_path / "s.csv"
    assert main(["scan", "--alpha", "0.5", "--b", "0.25", "--m-max", "8", "--out", str(out)]) == 0
    (row,) = _read_csv(out)
    assert row["monotone"] == "true" and row["first_violation"] == ""


def test_verify(tmp_path):
    out = tmp_path / "v.txt"
    rc = main(["verify", "--alpha", "0.5", "--b", "0.25", "--m", "2", "--out", str(out)])
    text = out.read_text()
    assert rc == EXIT_OK, text
    assert "FAIL" not in text and text.count("PASS") >= 8


def test_branch_records(tmp_path):
    out = tmp_path / "b.jsonl"
    summary = tmp_path / "b.csv"
    rc = main(["branch", "--s-max", "0.01", "--ds", "0.002", "--out", str(out),
               "--csv", str(summary)])
    assert rc == EXIT_OK
    recs = [json.loads(line) for line in out.read_text().splitlines()]
    assert len(recs) == 5
    assert all(r["residual_inf"] < 1e-9 for r in recs)
    assert np.allclose([r["s"] for r in recs], [0.002, 0.004, 0.006, 0.008, 0.01])
    rows = _read_csv(summary)
    assert len(rows) == 5 and "a_12" in rows[0]
