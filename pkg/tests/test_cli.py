from __future__ import annotations

import csv
import io
import json

import jsonschema
import numpy as np
import pytest

from kahler_compact import cli
from kahler_compact import suites as su


def run_main(capsys, *argv):
    code = cli.main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


@pytest.fixture(autouse=True)
def no_output_dir(monkeypatch):
    monkeypatch.delenv(cli.OUTPUT_DIR_ENV, raising=False)


@pytest.fixture(scope="module")
def report_schema():
    return cli.load_schema("report_schema.json")


def test_verify_chart_suite(capsys, report_schema):
    code, out, err = run_main(capsys, "verify", "--suite", "chart", "--beta", "1,2", "--no-timestamp")
    assert code == 0
    doc = json.loads(out)
    jsonschema.validate(doc, report_schema)
    assert doc["summary"] == {"total": 2 * len(su.REGISTRY["chart"]), "failed": 0, "passed": True}
    assert "timestamp" not in doc and "timing" not in doc
    assert "checks passed" in err


def test_verify_reports_failures(capsys, report_schema):
    code, out, err = run_main(capsys, "verify", "--suite", "chart", "--tol", "jet_vs_difference=1e-300", "--no-timestamp")
    assert code == 1
    doc = json.loads(out)
    jsonschema.validate(doc, report_schema)
    failed = [c for c in doc["checks"] if not c["passed"]]
    assert [c["name"] for c in failed] == ["jet_vs_difference"]
    assert "FAIL chart/jet_vs_difference" in err


def test_timestamp_present_by_default(capsys, report_schema):
    code, out, _ = run_main(capsys, "regimes", "--beta", "1")
    doc = json.loads(out)
    jsonschema.validate(doc, report_schema)
    assert code == 0 and "timestamp" in doc and doc["timing"]["seconds"] >= 0


def test_regimes(capsys, report_schema):
    code, out, _ = run_main(capsys, "regimes", "--beta", "1.5,2,4", "--no-timestamp")
    assert code == 0
    doc = json.loads(out)
    jsonschema.validate(doc, report_schema)
    got = {r["beta"]: (r["regime"], r["einstein_constant"], r["zero_locus_r2"]) for r in doc["regimes"]}
    assert got == {
        1.5: ("positive-einstein", 6.75, None),
        2.0: ("ricci-flat-boundary", 0.0, None),
        4.0: ("ahe-split", -192.0, 3.0),
    }


def test_profile_csv(capsys):
    code, out, _ = run_main(capsys, "profile", "--beta", "3", "--r", "1.1:10:200", "--format", "csv", "--no-timestamp")
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    assert len(rows) == 200
    assert list(rows[0]) == ["beta", "r", "V", "R_hat", "u", "z"]
    r = np.array([float(row["r"]) for row in rows])
    rhat = np.array([float(row["R_hat"]) for row in rows])
    flip = np.nonzero(np.diff(np.sign(rhat)))[0]
    assert len(flip) == 1 and r[flip[0]] <= 2.0 <= r[flip[0] + 1]
    # u r^2 -> 1 at large r
    assert float(rows[-1]["u"]) * 100.0 == pytest.approx(1.0, abs=0.02)


def test_profile_json_extends_range(capsys, report_schema):
    code, out, _ = run_main(capsys, "profile", "--beta", "2", "--r", "1.005:2e4:3", "--no-timestamp")
    assert code == 0
    doc = json.loads(out)
    jsonschema.validate(doc, report_schema)
    prof = doc["profiles"][0]
    assert prof["columns"] == ["r", "V", "R_hat", "u", "z"] and len(prof["rows"]) == 3


def test_output_env_var(capsys, monkeypatch, tmp_path):
    monkeypatch.setenv(cli.OUTPUT_DIR_ENV, str(tmp_path / "reports"))
    code, out, _ = run_main(capsys, "regimes", "--beta", "3", "--no-timestamp")
    assert code == 0 and out == ""
    doc = json.loads((tmp_path / "reports" / "regimes.json").read_text())
    assert doc["regimes"][0]["zero_locus_r2"] == 4.0


def test_explicit_output_wins(capsys, monkeypatch, tmp_path):
    monkeypatch.setenv(cli.OUTPUT_DIR_ENV, str(tmp_path / "env"))
    dest = tmp_path / "mine.json"
    assert cli.main(["regimes", "--output", str(dest)]) == 0
    assert dest.exists() and not (tmp_path / "env").exists()


@pytest.mark.parametrize(
    "argv, msg",
    [
        (["verify", "--tol", "nope=1"], "unknown check name"),
        (["verify", "--tol", "flat_curvature=-1"], "tolerances"),
        (["verify", "--format", "csv"], "only available for profile"),
        (["profile", "--r", "5:2:10"], "lower end"),
        (["profile", "--r", "0.5:2:10"], "r_range"),
        (["profile", "--r", "1.5:2:1"], "r_range"),
        (["verify", "--beta", "-1"], "beta"),
        (["verify", "--points", "0"], "points"),
        (["verify", "--corpus", "/nonexistent/corpus.txt"], "corpus"),
    ],
)
def test_config_errors(capsys, argv, msg):
    code, out, err = run_main(capsys, *argv)
    assert code == 2 and out == ""
    assert msg in err


@pytest.mark.parametrize("argv", [[], ["frobnicate"], ["profile"], ["profile", "--r", "1:2"], ["verify", "--tol", "x"]])
def test_argument_errors(capsys, argv):
    code, _, _ = run_main(capsys, *argv)
    assert code == 2


def test_bad_corpus_file(capsys, tmp_path):
    bad = tmp_path / "bad.txt"
    bad.write_text("flat, z, (0, inf\n")
    code, _, err = run_main(capsys, "verify", "--suite", "potential", "--corpus", str(bad))
    assert code == 2 and "corpus" in err


def test_custom_corpus_is_checked(capsys, tmp_path):
    good = tmp_path / "good.txt"
    good.write_text("cubic_shift, z + z^2/10, (0, inf)\n")
    code, out, _ = run_main(capsys, "verify", "--suite", "potential", "--corpus", str(good), "--no-timestamp")
    assert code == 0
    assert json.loads(out)["config"]["corpus"] == str(good)


def test_config_schema_accepts_run_config():
    cfg = cli.RunConfig(command="profile", beta=[2.0], r_range=[1.1, 3.0, 5])
    jsonschema.validate(cfg.as_dict(), cli.load_schema("config_schema.json"))
    cfg.validate()


def test_same_seed_same_report():
    cfg = dict(command="verify", beta=[2.0], suites=["potential", "chart"], seed=11, timestamp=False)
    a = cli.render(cli.run(cli.RunConfig(**cfg)), "json")
    b = cli.render(cli.run(cli.RunConfig(**cfg)), "json")
    assert a == b


def test_registry_layout():
    assert tuple(su.REGISTRY) == su.SUITES
    names = [n for s in su.REGISTRY.values() for n in s]
    assert len(names) == len(set(names)) == len(su.default_tolerances())
    assert all(t > 0 for t in su.default_tolerances().values())


def test_run_check_records_errors():
    ctx = su.Context(-1.0, np.random.default_rng(0), {})
    res = su.run_check("lebrun", "scalar_flat", ctx)
    assert not res.passed and res.defect is None
    assert "cone parameter must be positive" in res.diagnostic
