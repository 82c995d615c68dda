"""End-to-end command-line checks: exit codes, JSON determinism, workflows."""

import json
import subprocess
import sys
from pathlib import Path

FIXTURE = Path(__file__).parent / "fixtures" / "s3s3_critical.json"


def run_cli(*args: str) -> subprocess.CompletedProcess:
    return subprocess.run(
        [sys.executable, "-m", "nkvol.cli", *args],
        capture_output=True,
        text=True,
    )


def test_catalog_list():
    p = run_cli("catalog", "list")
    assert p.returncode == 0
    assert "s3s3" in p.stdout and "torus6" in p.stdout


def test_catalog_emit_and_check(tmp_path):
    out = tmp_path / "s3s3.json"
    p = run_cli("catalog", "emit", "s3s3", "--out", str(out))
    assert p.returncode == 0
    q = run_cli("check", str(out), "--json")
    assert q.returncode == 0
    rep = json.loads(q.stdout)
    assert rep["verdicts"]["jacobi"] is True
    assert rep["verdicts"]["j_valid"] is True


def test_check_rejects_bad_manifest(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({
        "name": "bad", "dimension": 6,
        "structure_constants": [{"i": 1, "j": 3, "k": 2, "value": 1.0}],
    }))
    p = run_cli("check", str(bad))
    assert p.returncode == 2
    assert "j < k" in p.stdout or "malformed" in p.stdout


def test_check_rejects_unknown_field(tmp_path):
    bad = tmp_path / "bad2.json"
    bad.write_text(json.dumps({
        "name": "bad", "dimension": 6, "structure_constants": [], "bogus": 1,
    }))
    p = run_cli("check", str(bad))
    assert p.returncode == 2


def test_missing_file_is_input_error():
    p = run_cli("nk", "/nonexistent/file.json")
    assert p.returncode == 2


def test_nk_fixture_exit_zero():
    p = run_cli("nk", str(FIXTURE), "--json")
    assert p.returncode == 0, p.stdout
    rep = json.loads(p.stdout)
    assert rep["verdicts"]["torsion_criterion"] is True
    assert rep["verdicts"]["structure_equations"] is True
    assert rep["verdicts"]["nabla_antisymmetric_strict"] is True


def test_nk_plain_catalog_fails_verdict(tmp_path):
    out = tmp_path / "s3s3.json"
    run_cli("catalog", "emit", "s3s3", "--out", str(out))
    p = run_cli("nk", str(out))
    assert p.returncode == 1


def test_json_runs_byte_identical():
    a = run_cli("--json", "nk", str(FIXTURE))
    b = run_cli("nk", str(FIXTURE), "--json")
    assert a.returncode == b.returncode == 0
    assert a.stdout == b.stdout
    rep = json.loads(a.stdout)  # parses
    assert rep["manifest"]["name"] == "s3s3_critical"
    # and round-trips through the same printer byte-for-byte
    assert json.dumps(rep, indent=2, sort_keys=True) + "\n" == a.stdout


def test_torsion_and_nijenhuis_fixture():
    p = run_cli("torsion", str(FIXTURE), "--json")
    assert p.returncode == 0
    rep = json.loads(p.stdout)
    assert rep["verdicts"]["admits_connection"] is True
    assert rep["checks"]["solution_dimension"] == 1

    q = run_cli("nijenhuis", str(FIXTURE), "--json")
    assert q.returncode == 0
    rq = json.loads(q.stdout)
    assert rq["verdicts"]["routes_agree"] is True
    assert rq["checks"]["psi"] > 0


def test_cone_fixture():
    p = run_cli("cone", str(FIXTURE), "--json")
    assert p.returncode == 0
    rep = json.loads(p.stdout)
    assert rep["verdicts"]["stabilizer_14"] is True
    assert rep["verdicts"]["metric_proportional"] is True


def test_functional_gradient():
    p = run_cli("functional", str(FIXTURE), "--gradient", "--json")
    assert p.returncode == 0
    rep = json.loads(p.stdout)
    assert rep["checks"]["gradient_max_abs"] < 1e-8
    assert rep["checks"]["criticality_verdict"] == "critical"


def test_optimize_end_to_end(tmp_path):
    src = tmp_path / "p7.json"
    run_cli("catalog", "emit", "s3s3_perturbed", "--seed", "7", "--out", str(src))
    solved = tmp_path / "solved.json"
    p = run_cli("optimize", str(src), "--json", "--emit", str(solved))
    assert p.returncode == 0, p.stdout
    rep = json.loads(p.stdout)
    assert rep["verdicts"]["converged"] is True
    assert rep["verdicts"]["nk_suite"] is True
    trace = rep["checks"]["trace"]
    assert all(trace[i + 1] <= trace[i] for i in range(len(trace) - 1))
    assert rep["checks"]["final_objective"] < 1e-12
    # the emitted manifest is itself a passing fixture
    q = run_cli("nk", str(solved), "--json")
    assert q.returncode == 0
    # determinism: identical input and flags give byte-identical reports, and
    # a re-emitted manifest is byte-identical too
    p1 = run_cli("optimize", str(src), "--json")
    p2 = run_cli("optimize", str(src), "--json")
    assert p1.stdout == p2.stdout
    p3 = run_cli("optimize", str(src), "--json", "--emit", str(tmp_path / "solved2.json"))
    assert (tmp_path / "solved2.json").read_text() == solved.read_text()


def test_alt12_command(tmp_path):
    out = tmp_path / "s3s3.json"
    run_cli("catalog", "emit", "s3s3", "--out", str(out))
    p = run_cli("alt12", str(out), "--json")
    assert p.returncode == 0
    rep = json.loads(p.stdout)
    assert rep["checks"]["rank_full"] == 90
    assert rep["checks"]["rank_hermitian"] == 54
    assert rep["checks"]["span_with_cokernel"] == 72
