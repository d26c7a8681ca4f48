"""Command-line front end.

Exit codes: 0 success, 1 input error, 2 hypothesis failure, 3 no certificate.
Reports are JSON, written to ``--out`` or standard output.
"""
from __future__ import annotations

import csv
import json
import sys
from pathlib import Path

import click
import numpy as np

from .blockmodel import BlockOperator, check_hypothesis, restrict_to_subspace
from .eigclassify import classify_all
from .errors import BlockRiccatiError, DegenerateSpectrum
from .fileformat import ProblemFileError, decode_matrix, dumps_report, load_problem, parse_grid, parse_ladder
from .herglotz import atom_table, boundary_scan, default_eps_ladder
from .report import (
    atom_section,
    classification_section,
    hypothesis_section,
    no_certificate_section,
    report_header,
    same_matrix,
    scan_section,
    solution_entry,
)
from .riccati import NoCertificate, oracle_graph_solutions, riccati_residual, solve_existence

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_HYPOTHESIS = 2
EXIT_NO_CERTIFICATE = 3

ORACLE_MAX_DIM = 12
DEFAULT_GRID_POINTS = 401
VERIFY_ATOL = 1e-12


def _problem_options(fn):
    options = [
        click.argument("input_path", metavar="INPUT", type=click.Path(dir_okay=False)),
        click.option("--tol-eig", type=float, default=None, help="Relative eigenvalue clustering tolerance."),
        click.option("--tol-rank", type=float, default=None, help="Relative numerical-rank tolerance."),
        click.option("--tol-residual", type=float, default=None, help="Relative residual tolerance."),
        click.option("--out", "out_path", type=click.Path(dir_okay=False), default=None, help="Report path."),
    ]
    for opt in reversed(options):
        fn = opt(fn)
    return fn


def _load(input_path, tol_eig, tol_rank, tol_residual):
    overrides = {"eig_cluster_tol": tol_eig, "rank_rtol": tol_rank, "residual_tol": tol_residual}
    return load_problem(input_path, overrides)


def _emit(report: dict, out_path: str | None) -> None:
    text = dumps_report(report)
    if out_path is None:
        click.echo(text, nl=False)
    else:
        Path(out_path).write_text(text)


@click.group()
@click.version_option(package_name="artifact", prog_name="blockriccati")
def cli():
    """Spectral analysis and Riccati solutions for Hermitian block operators."""


@cli.command()
@_problem_options
def check(input_path, tol_eig, tol_rank, tol_residual, out_path):
    """Check that Ran V generates H0 under A0."""
    problem = _load(input_path, tol_eig, tol_rank, tol_residual)
    hyp = check_hypothesis(problem.op, problem.tol)
    report = report_header("check", problem.digest, problem.tol)
    report["hypothesis"] = hypothesis_section(hyp)
    _emit(report, out_path)
    return EXIT_OK if hyp.ok else EXIT_HYPOTHESIS


@cli.command()
@_problem_options
def classify(input_path, tol_eig, tol_rank, tol_residual, out_path):
    """Classify the eigenvalues of B and list the atoms of the H1 spectral measure."""
    problem = _load(input_path, tol_eig, tol_rank, tol_residual)
    op, tol = problem.op, problem.tol
    hyp = check_hypothesis(op, tol)
    report = report_header("classify", problem.digest, tol)
    report["hypothesis"] = hypothesis_section(hyp)
    if not hyp.cyclic_ok:
        if hyp.krylov_rank == 0:
            report["error"] = "V = 0: the cyclic subspace is trivial, nothing to classify"
            _emit(report, out_path)
            return EXIT_HYPOTHESIS
        op = restrict_to_subspace(op, hyp.krylov_basis)
        report["restricted_to_krylov_subspace"] = {"dimension": hyp.krylov_rank}
    report["classification"] = classification_section(classify_all(op, tol))
    report["atom_table"] = atom_section(atom_table(problem.op, tol))
    _emit(report, out_path)
    return EXIT_OK


def _default_grid(op: BlockOperator) -> np.ndarray:
    values = op.eig.eigenvalues
    lo, hi = float(values.min()), float(values.max())
    pad = max(0.1 * (hi - lo), 0.5)
    return np.linspace(lo - pad, hi + pad, DEFAULT_GRID_POINTS)


def _write_plot(path: str, scan) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["lambda", "eps", "trace_im_m"])
        for i, lam in enumerate(scan.grid):
            for k, eps in enumerate(scan.eps_ladder):
                writer.writerow([repr(float(lam)), repr(float(eps)), repr(float(scan.trace_im_values[i, k]))])


@cli.command()
@_problem_options
@click.option("--grid", "grid_spec", default=None, help="Scan grid as min:max:points.")
@click.option("--eps-ladder", "ladder_spec", default=None, help="Imaginary offsets as hi:lo:ratio.")
@click.option("--plot", "plot_path", type=click.Path(dir_okay=False), default=None, help="CSV plot data path.")
def scan(input_path, tol_eig, tol_rank, tol_residual, out_path, grid_spec, ladder_spec, plot_path):
    """Approach the real axis and flag singular points and atoms of tr Im M."""
    problem = _load(input_path, tol_eig, tol_rank, tol_residual)
    op, tol = problem.op, problem.tol
    if grid_spec is not None:
        grid = parse_grid(grid_spec)
    elif problem.grid is not None:
        grid = problem.grid
    else:
        grid = _default_grid(op)
    if ladder_spec is not None:
        ladder = parse_ladder(ladder_spec)
    elif problem.eps_ladder is not None:
        ladder = problem.eps_ladder
    else:
        ladder = default_eps_ladder()

    result = boundary_scan(op, grid, ladder, tol)
    if plot_path is None and out_path is not None:
        plot_path = str(Path(out_path).with_suffix(".plot.csv"))
    flags = {"grid": grid_spec, "eps_ladder": ladder_spec}
    report = report_header("scan", problem.digest, tol, flags)
    report["scan"] = scan_section(result)
    report["atom_table"] = atom_section(atom_table(op, tol))
    report["plot_file"] = Path(plot_path).name if plot_path else None
    if plot_path:
        _write_plot(plot_path, result)
    _emit(report, out_path)
    return EXIT_OK


@cli.command()
@_problem_options
@click.option("--all-oracle", is_flag=True, help="Also enumerate graph solutions from eigenvector subsets.")
def solve(input_path, tol_eig, tol_rank, tol_residual, out_path, all_oracle):
    """Construct and verify a bounded solution X."""
    problem = _load(input_path, tol_eig, tol_rank, tol_residual)
    op, tol = problem.op, problem.tol
    report = report_header("solve", problem.digest, tol, {"all_oracle": all_oracle})
    report["hypothesis"] = hypothesis_section(check_hypothesis(op, tol))
    result = solve_existence(op, tol)
    if isinstance(result, NoCertificate):
        report["no_certificate"] = no_certificate_section(result)
        report["solutions"] = []
        code = EXIT_NO_CERTIFICATE
    else:
        report["solutions"] = [solution_entry(op, result, "lambda_set", tol)]
        code = EXIT_OK if result.verified(op, tol) else EXIT_NO_CERTIFICATE
    if all_oracle:
        report["oracle"], found = _run_oracle(op, tol, result)
        report["solutions"] += [solution_entry(op, s, "oracle", tol) for s in found]
    _emit(report, out_path)
    return code


def _run_oracle(op: BlockOperator, tol, result) -> tuple[dict, list]:
    dim = op.d0 + op.n
    if dim > ORACLE_MAX_DIM:
        return {"ran": False, "reason": f"d0 + n = {dim} exceeds {ORACLE_MAX_DIM}"}, []
    complete = True
    try:
        found = oracle_graph_solutions(op, tol, max_dim=ORACLE_MAX_DIM)
    except DegenerateSpectrum:
        complete = False
        found = oracle_graph_solutions(op, tol, allow_degenerate=True, max_dim=ORACLE_MAX_DIM)
    match = None
    if not isinstance(result, NoCertificate):
        match = next((k for k, s in enumerate(found) if same_matrix(s.X, result.X, 1e-8)), None)
    return {"ran": True, "complete": complete, "count": len(found), "matches_constructed": match}, found


@cli.command()
@click.argument("input_path", metavar="INPUT", type=click.Path(dir_okay=False))
@click.argument("report_path", metavar="REPORT", type=click.Path(dir_okay=False))
def verify(input_path, report_path):
    """Recompute the residual of every solution recorded in REPORT."""
    report = json.loads(Path(report_path).read_text())
    tol = report.get("tolerances", {})
    problem = load_problem(input_path, tol)
    if report.get("input_digest") != problem.digest:
        raise ProblemFileError("report was produced from a different input file")
    worst = 0.0
    for k, entry in enumerate(report.get("solutions", [])):
        x = decode_matrix(entry["X"], f"solutions[{k}].X")
        diff = abs(riccati_residual(problem.op, x) - entry["residual"])
        worst = max(worst, diff)
        click.echo(f"solution {k}: recorded {entry['residual']!r}, recomputed diff {diff!r}")
    if worst > VERIFY_ATOL:
        click.echo(f"residual mismatch {worst!r} > {VERIFY_ATOL!r}", err=True)
        return EXIT_INPUT
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    """Run the CLI and return its exit code instead of exiting."""
    try:
        code = cli.main(args=argv, prog_name="blockriccati", standalone_mode=False)
    except click.ClickException as exc:
        exc.show()
        return EXIT_INPUT
    except click.Abort:
        return EXIT_INPUT
    except (BlockRiccatiError, ValueError, OSError) as exc:
        click.echo(f"error: {exc}", err=True)
        return EXIT_INPUT
    return code if isinstance(code, int) else EXIT_OK


def run() -> None:
    sys.exit(main())
