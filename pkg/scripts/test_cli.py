"""
CLI tests: exit codes, report contents, engine agreement and determinism.
"""
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent.parent))

import json
import math

import pytest

from src.cli.main import main
from src.cli.reports import (
    TIMING_FIELDS,
    ErrorReport,
    RunReport,
    TradeoffCommandReport,
    ValidateReport,
)
from src.config import CONFIG_DIR

PROJECTIVE = str(CONFIG_DIR / "projective_d2.json")
RANDOM_D4 = str(CONFIG_DIR / "random_d4.json")
UNITARY = str(CONFIG_DIR / "unitary_family_d2.json")
INCOMPLETE = str(CONFIG_DIR / "incomplete_d2.json")


def run_cli(capsys, *argv):
    code = main(list(argv) + ["--log-level", "WARNING"])
    out = capsys.readouterr().out
    return code, out


def run_json(capsys, *argv):
    code, out = run_cli(capsys, *argv)
    return code, json.loads(out)


def strip_timing(report):
    return {k: v for k, v in report.items() if k not in TIMING_FIELDS}


def write_config(directory: Path, name: str, **overrides) -> str:
    base = json.loads(Path(PROJECTIVE).read_text(encoding="utf-8"))
    base.update(overrides)
    path = directory / name
    path.write_text(json.dumps(base), encoding="utf-8")
    return str(path)


# ---------------------------------------------------------------------------
# validate
# ---------------------------------------------------------------------------

def test_validate_complete_config(capsys):
    code, report = run_json(capsys, "validate", "--config", PROJECTIVE)
    assert code == 0
    assert report["passed"]
    assert report["inner_residual"] == 0.0
    assert len(report["instruments"]) == 7


def test_validate_incomplete_config_fails_verdict(capsys):
    code, report = run_json(capsys, "validate", "--config", INCOMPLETE)
    assert code == 1
    assert not report["passed"]
    failing = {v["name"] for v in report["verdicts"] if not v["passed"]}
    assert "inner_measurement" in failing
    assert "outer_measurement[dense]" in failing


# ---------------------------------------------------------------------------
# run
# ---------------------------------------------------------------------------

def test_run_single_trial(capsys):
    code, report = run_json(capsys, "run", "--config", PROJECTIVE)
    assert code == 0
    assert report["command"] == "run"
    assert report["analytic"]["p_nu"] == pytest.approx([7 / 8, 1 / 8], abs=1e-15)
    assert report["analytic"]["p_rev"] == pytest.approx(0.25, abs=1e-15)
    assert len(report["records"]) == 1


def test_run_both_engines_agree(capsys):
    code, report = run_json(capsys, "run", "--config", RANDOM_D4, "--engine", "both")
    assert code == 0
    block, dense = report["records"]
    assert (block["engine"], dense["engine"]) == ("block", "dense")
    assert (block["nu"], block["mu"]) == (dense["nu"], dense["mu"])
    assert any(v["name"] == "engine_agreement" and v["passed"] for v in report["verdicts"])


def test_run_is_deterministic(capsys):
    _, first = run_json(capsys, "run", "--config", RANDOM_D4, "--seed", "17")
    _, second = run_json(capsys, "run", "--config", RANDOM_D4, "--seed", "17")
    assert strip_timing(first) == strip_timing(second)
    assert first["seed"] == 17


def test_run_rejects_incomplete_measurement(capsys):
    code, report = run_json(capsys, "run", "--config", INCOMPLETE)
    assert code == 2
    assert report["error_code"] == "INCOMPLETE_MEASUREMENT"


# ---------------------------------------------------------------------------
# montecarlo
# ---------------------------------------------------------------------------

def test_montecarlo_bands(capsys):
    code, report = run_json(capsys, "montecarlo", "--config", RANDOM_D4, "--trials", "4000", "--threads", "2")
    names = [c["name"] for c in report["empirical"]]
    assert names == ["P[mu0]"] + [f"P[nu={k}]" for k in (1, 2, 3)] + [f"P[nu={k}|mu0]" for k in (1, 2, 3)]
    assert all(c["status"] == "ok" and c["count"] > 0 for c in report["empirical"])
    assert code == 0
    assert report["passed"]
    assert all(v["passed"] for v in report["verdicts"])


def test_montecarlo_is_deterministic_across_threads(capsys):
    _, single = run_json(capsys, "montecarlo", "--config", PROJECTIVE, "--trials", "1000")
    _, multi = run_json(capsys, "montecarlo", "--config", PROJECTIVE, "--trials", "1000", "--threads", "4")
    single, multi = strip_timing(single), strip_timing(multi)
    single.pop("threads")
    multi.pop("threads")
    assert single == multi


def test_montecarlo_both_engines(capsys):
    code, report = run_json(capsys, "montecarlo", "--config", PROJECTIVE, "--trials", "1000", "--engine", "both")
    assert code in (0, 1)
    assert any(v["name"] == "engine_agreement" and v["passed"] for v in report["verdicts"])


def test_montecarlo_posterior_undefined_at_right_angle(capsys, tmp_path):
    path = write_config(tmp_path, "right_angle.json", phi=math.pi / 2)
    code, report = run_json(capsys, "montecarlo", "--config", path, "--trials", "500")
    assert code == 0
    assert report["analytic"]["posterior_status"] == "undefined"
    assert report["analytic"]["posterior"] is None
    conditional = [c for c in report["empirical"] if c["name"].endswith("|mu0]")]
    assert conditional and all(c["status"] == "undefined" for c in conditional)


def test_montecarlo_writes_records(capsys, tmp_path):
    records = tmp_path / "records.jsonl"
    code, _ = run_json(
        capsys, "montecarlo", "--config", PROJECTIVE, "--trials", "50", "--records", str(records)
    )
    assert code == 0
    lines = records.read_text(encoding="utf-8").splitlines()
    assert len(lines) == 50
    first = json.loads(lines[0])
    assert first["trial"] == 0
    assert first["mu"] in ("mu0", "mu1")


# ---------------------------------------------------------------------------
# tradeoff
# ---------------------------------------------------------------------------

def test_tradeoff_projective_family(capsys):
    code, report = run_json(capsys, "tradeoff", "--config", PROJECTIVE)
    assert code == 0
    assert len(report["rows"]) == 11
    assert all(row["condition_holds"] for row in report["rows"])
    assert max(abs(d) for d in report["series"]["delta"]) <= 1e-10


def test_tradeoff_unitary_family(capsys):
    code, report = run_json(capsys, "tradeoff", "--config", UNITARY, "--phi-grid", "0.3,0.7854,1.2")
    assert code == 0
    assert [row["phi"] for row in report["rows"]] == [0.3, 0.7854, 1.2]
    assert all(row["delta"] > 0 for row in report["rows"])
    assert all(row["p_qrm"] == pytest.approx(1.0, abs=1e-12) for row in report["rows"])


# ---------------------------------------------------------------------------
# Output and invalid input
# ---------------------------------------------------------------------------

def test_out_file_and_text_format(capsys, tmp_path):
    out = tmp_path / "reports" / "validate.txt"
    code, text = run_cli(capsys, "validate", "--config", PROJECTIVE, "--format", "text", "--out", str(out))
    assert code == 0
    assert "VALIDATE" in text
    assert out.read_text(encoding="utf-8").strip() == text.strip()


@pytest.mark.parametrize("model, argv", [
    (ValidateReport, ["validate", "--config", PROJECTIVE]),
    (RunReport, ["run", "--config", RANDOM_D4, "--engine", "both"]),
    (RunReport, ["montecarlo", "--config", PROJECTIVE, "--trials", "200"]),
    (TradeoffCommandReport, ["tradeoff", "--config", UNITARY, "--phi-grid", "0,0.7854"]),
    (ErrorReport, ["run", "--config", INCOMPLETE]),
])
def test_json_reports_match_their_schema(capsys, model, argv):
    _, raw = run_cli(capsys, *argv)
    restored = model.model_validate_json(raw)
    assert strip_timing(json.loads(restored.model_dump_json())) == strip_timing(json.loads(raw))


def test_missing_file(capsys, tmp_path):
    code, report = run_json(capsys, "run", "--config", str(tmp_path / "nope.json"))
    assert code == 2
    assert report["error_code"] == "FILE_NOT_FOUND"


def test_malformed_json(capsys, tmp_path):
    path = tmp_path / "broken.json"
    path.write_text("{ not json", encoding="utf-8")
    code, report = run_json(capsys, "validate", "--config", str(path))
    assert code == 2
    assert report["error_code"] == "MALFORMED_JSON"


def test_schema_violation(capsys, tmp_path):
    path = write_config(tmp_path, "bad_n.json", n=3)
    code, report = run_json(capsys, "run", "--config", path)
    assert code == 2
    assert report["error_code"] == "VALIDATION_ERROR"


def test_invalid_state(capsys, tmp_path):
    rho = {"rows": 2, "cols": 2, "data": [[0.5, 0.0], [0.0, 0.0], [0.0, 0.0], [0.6, 0.0]]}
    path = write_config(tmp_path, "bad_rho.json", rho0=rho)
    code, report = run_json(capsys, "run", "--config", path)
    assert code == 2
    assert report["error_code"] == "INVALID_STATE"


@pytest.mark.parametrize("argv", [
    ["montecarlo", "--config", PROJECTIVE, "--trials", "0"],
    ["run", "--config", PROJECTIVE, "--engine", "tensor"],
    ["run", "--config", PROJECTIVE, "--seed", "-1"],
    ["frobnicate"],
])
def test_argument_errors(capsys, argv):
    assert main(argv) == 2
