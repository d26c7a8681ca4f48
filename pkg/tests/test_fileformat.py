import json

import numpy as np
import pytest

from blockriccati.errors import DimensionMismatch, NotHermitian
from blockriccati.fileformat import (
    ProblemFileError,
    decode_matrix,
    dumps_report,
    encode_matrix,
    parse_grid,
    parse_ladder,
    parse_problem,
)


def problem_bytes(**data) -> bytes:
    base = {"a0": [[1, 0], [0, 0]], "a1": [[0, 0], [0, 0]], "v": [[1, 0], [1, 1]]}
    base.update(data)
    return json.dumps(base).encode()


def test_parse_minimal_problem():
    problem = parse_problem(problem_bytes())
    assert problem.op.d0 == 2 and problem.op.n == 2
    assert problem.grid is None and problem.eps_ladder is None
    assert problem.digest.startswith("sha256:") and len(problem.digest) == 7 + 64


def test_complex_entries_and_tolerance_overrides():
    raw = problem_bytes(
        a0=[[2, [0, 1]], [[0, -1], -1]],
        a1=[[0.5]],
        v=[[1], [[0.5, 0.5]]],
        tolerances={"residual_tol": 1e-9},
    )
    problem = parse_problem(raw, {"rank_rtol": 1e-12, "eig_cluster_tol": None})
    assert problem.op.A0[0, 1] == 1j and problem.op.V[1, 0] == 0.5 + 0.5j
    assert problem.tol.residual_tol == 1e-9
    assert problem.tol.rank_rtol == 1e-12
    assert problem.tol.eig_cluster_tol == 1e-8


def test_scan_settings():
    raw = problem_bytes(scan={"grid": {"min": -1, "max": 1, "points": 5}, "eps_ladder": [1e-2, 1e-3]})
    problem = parse_problem(raw)
    np.testing.assert_allclose(problem.grid, [-1, -0.5, 0, 0.5, 1])
    np.testing.assert_allclose(problem.eps_ladder, [1e-2, 1e-3])


@pytest.mark.parametrize(
    "raw",
    [
        b"{",
        b"[1, 2]",
        json.dumps({"a0": [[1]], "a1": [[1]]}).encode(),
        problem_bytes(a0=[[1, 0], [0]]),
        problem_bytes(a0=[[1, 0], [0, "x"]]),
        problem_bytes(a0=[[1, 0], [0, True]]),
        problem_bytes(a0=[]),
        problem_bytes(tolerances={"bogus": 1}),
        problem_bytes(tolerances={"rank_rtol": -1}),
        problem_bytes(scan={"grid": {"min": 0, "max": 1, "points": 0}}),
    ],
)
def test_malformed_problems(raw):
    with pytest.raises(ProblemFileError):
        parse_problem(raw)


def test_block_errors_name_the_block():
    with pytest.raises(NotHermitian, match="A0"):
        parse_problem(problem_bytes(a0=[[1, 2], [0, 1]]))
    with pytest.raises(DimensionMismatch):
        parse_problem(problem_bytes(v=[[1, 0]]))


def test_grid_and_ladder_strings():
    np.testing.assert_allclose(parse_grid("-2:2:5"), [-2, -1, 0, 1, 2])
    np.testing.assert_allclose(parse_grid("3:3:1"), [3])
    np.testing.assert_allclose(parse_ladder("1e-2:1e-8:10"), 10.0 ** -np.arange(2, 9))
    np.testing.assert_allclose(parse_ladder({"hi": 1, "lo": 0.25, "ratio": 2}), [1, 0.5, 0.25])
    for bad in ("1:2", "a:b:c", "1:0:10", "0:1:0"):
        with pytest.raises(ProblemFileError):
            parse_grid(bad)
    for bad in ("1e-2:1e-2:10", "1e-8:1e-2:10", "1:0.5:1", [1e-2], [1e-3, 1e-2], "x"):
        with pytest.raises(ProblemFileError):
            parse_ladder(bad)


def test_matrix_round_trip_is_exact():
    rng = np.random.default_rng(0)
    m = rng.normal(size=(3, 2)) + 1j * rng.normal(size=(3, 2))
    encoded = json.loads(dumps_report({"m": encode_matrix(m)}))["m"]
    np.testing.assert_array_equal(decode_matrix(encoded, "m"), m)


def test_negative_zero_is_normalised():
    assert dumps_report({"m": encode_matrix([[-0.0 + 0j]])}) == dumps_report({"m": encode_matrix([[0.0]])})
