import json
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from blockriccati.cli import main

FIXTURES = Path(__file__).parent / "fixtures"


def fixture(name: str) -> str:
    return str(FIXTURES / name)


def run(tmp_path, *args):
    out = tmp_path / "report.json"
    code = main([*args, "--out", str(out)])
    report = json.loads(out.read_text()) if out.exists() else None
    return code, report


def test_check_exit_codes(tmp_path, capsys):
    code, report = run(tmp_path, "check", fixture("golden.json"))
    assert code == 0 and report["hypothesis"]["cyclic_ok"]

    code, report = run(tmp_path, "check", fixture("noncyclic.json"))
    assert code == 2
    assert report["hypothesis"]["krylov_rank"] == 1 and not report["hypothesis"]["cyclic_ok"]

    assert main(["check", fixture("bad_not_hermitian.json")]) == 1
    assert "A0 is not Hermitian" in capsys.readouterr().err


def test_report_header(tmp_path):
    _, report = run(tmp_path, "check", fixture("golden.json"), "--tol-rank", "1e-12")
    assert report["tool"]["name"] == "blockriccati"
    assert report["input_digest"].startswith("sha256:")
    assert report["tolerances"] == {"eig_cluster_tol": 1e-8, "rank_rtol": 1e-12, "residual_tol": 1e-8}


def test_classify_golden(tmp_path):
    code, report = run(tmp_path, "classify", fixture("golden.json"))
    assert code == 0
    entries = report["classification"]["eigenvalues"]
    assert len(entries) == 4
    excluded = report["classification"]["excluded_from_k_pp"]
    assert excluded == [pytest.approx(1.0, abs=1e-12)]
    one = next(e for e in entries if e["excluded_from_k_pp"])
    w = one["witnesses"][0]
    assert w["case"] == "iii"
    np.testing.assert_allclose(np.array(w["y"])[:, 0], [0, 1], atol=1e-8)
    np.testing.assert_allclose(np.array(w["x"])[:, 0], [-1, 0], atol=1e-8)
    assert report["atom_table"]["total_mass"] == pytest.approx(2.0)


def test_classify_scalar_and_restricted(tmp_path):
    code, report = run(tmp_path, "classify", fixture("scalar.json"))
    assert code == 0
    entries = report["classification"]["eigenvalues"]
    assert [e["cases"] for e in entries] == [["i"], ["i"]]
    np.testing.assert_allclose([e["lambda"] for e in entries], [-np.sqrt(2), np.sqrt(2)])

    code, report = run(tmp_path, "classify", fixture("noncyclic.json"))
    assert code == 0 and report["restricted_to_krylov_subspace"] == {"dimension": 1}

    code, report = run(tmp_path, "classify", fixture("decoupled.json"))
    assert code == 2 and "classification" not in report


def test_scan_unit_coupling_writes_plot(tmp_path):
    plot = tmp_path / "scan.csv"
    code, report = run(tmp_path, "scan", fixture("unit_coupling.json"), "--grid", "-2:2:401", "--plot", str(plot))
    assert code == 0
    atoms = report["scan"]["flagged_atoms"]
    np.testing.assert_allclose([a["lambda"] for a in atoms], [-1, 1], atol=1e-8)
    np.testing.assert_allclose([a["mass"] for a in atoms], [0.5, 0.5], rtol=0.05)
    assert report["scan"]["singular_continuous"] == []
    lines = plot.read_text().splitlines()
    assert lines[0] == "lambda,eps,trace_im_m"
    assert len(lines) == 1 + 401 * 7


def test_scan_golden_default_grid(tmp_path):
    code, report = run(tmp_path, "scan", fixture("golden.json"))
    assert code == 0
    scanned = [a["lambda"] for a in report["scan"]["flagged_atoms"]]
    exact = [a["lambda"] for a in report["atom_table"]["atoms"]]
    np.testing.assert_allclose(scanned, exact, atol=1e-6)
    assert (tmp_path / "report.plot.csv").exists()


@pytest.mark.parametrize(
    "args",
    [
        ["scan", fixture("bad_empty_grid.json")],
        ["scan", fixture("scalar.json"), "--grid", "1:0:5"],
        ["scan", fixture("scalar.json"), "--eps-ladder", "1e-8:1e-2:10"],
    ],
)
def test_scan_bad_grid(tmp_path, args):
    assert main(args) == 1


def test_solve_scalar_and_golden(tmp_path):
    code, report = run(tmp_path, "solve", fixture("scalar.json"))
    assert code == 0
    sol = report["solutions"][0]
    assert sol["X"][0][0][0] == pytest.approx(1 - np.sqrt(2), abs=1e-14)
    assert sol["residual"] <= 1e-12 and sol["verified"]

    code, report = run(tmp_path, "solve", fixture("golden.json"), "--all-oracle")
    assert code == 0
    assert report["oracle"]["complete"] and report["oracle"]["count"] == 6
    assert report["oracle"]["matches_constructed"] is not None
    assert all(s["verified"] for s in report["solutions"])
    lambdas = [p["lambda"] for p in report["solutions"][0]["lambda_set"]]
    assert all(abs(lam - 1) > 1e-6 for lam in lambdas)


def test_solve_no_certificate(tmp_path):
    code, report = run(tmp_path, "solve", fixture("no_certificate.json"))
    assert code == 3
    evidence = report["no_certificate"]
    assert evidence["k_pp_rank"] < evidence["n"]
    assert evidence["classification"]["excluded_from_k_pp"]
    assert report["solutions"] == []


def test_solve_is_deterministic(tmp_path):
    first, second = tmp_path / "a.json", tmp_path / "b.json"
    assert main(["solve", fixture("golden.json"), "--out", str(first)]) == 0
    assert main(["solve", fixture("golden.json"), "--out", str(second)]) == 0
    assert first.read_bytes() == second.read_bytes()


def test_verify_round_trip(tmp_path, capsys):
    report = tmp_path / "r.json"
    main(["solve", fixture("complex_entries.json"), "--all-oracle", "--out", str(report)])
    assert main(["verify", fixture("complex_entries.json"), str(report)]) == 0

    tampered = json.loads(report.read_text())
    tampered["solutions"][0]["residual"] += 1e-6
    report.write_text(json.dumps(tampered))
    assert main(["verify", fixture("complex_entries.json"), str(report)]) == 1
    assert main(["verify", fixture("scalar.json"), str(report)]) == 1


@pytest.mark.parametrize(
    "args",
    [
        ["solve", fixture("bad_syntax.json")],
        ["solve", fixture("bad_shape.json")],
        ["solve", fixture("bad_not_hermitian.json")],
        ["solve", fixture("missing.json")],
        ["solve"],
        ["nonsense"],
        ["solve", fixture("scalar.json"), "--tol-rank", "-1"],
    ],
)
def test_input_errors_exit_1(args):
    assert main(args) == 1


def test_stdout_report_and_module_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "blockriccati", "check", fixture("golden.json")],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["hypothesis"]["cyclic_ok"]
    proc = subprocess.run([sys.executable, "-m", "blockriccati", "check", fixture("noncyclic.json")], capture_output=True)
    assert proc.returncode == 2
