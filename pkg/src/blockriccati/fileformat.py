"""Problem files in, report dictionaries out.

A problem file is JSON::

    {
      "a0": [[1, 0], [0, 0]],
      "a1": [[0, 0], [0, 0]],
      "v":  [[1, 0], [1, 1]],
      "tolerances": {"eig_cluster_tol": 1e-8, "rank_rtol": 1e-10, "residual_tol": 1e-8},
      "scan": {"grid": {"min": -3, "max": 3, "points": 401},
               "eps_ladder": {"hi": 1e-2, "lo": 1e-8, "ratio": 10}}
    }

Matrix entries are bare reals or ``[re, im]`` pairs.  ``tolerances`` and
``scan`` are optional.
"""
from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from .blockmodel import BlockOperator
from .errors import BlockRiccatiError
from .numkernel import ToleranceProfile

__all__ = [
    "ProblemFileError",
    "Problem",
    "load_problem",
    "parse_problem",
    "parse_grid",
    "parse_ladder",
    "encode_matrix",
    "encode_vector",
    "decode_matrix",
    "dumps_report",
]


class ProblemFileError(BlockRiccatiError, ValueError):
    pass


@dataclass(frozen=True)
class Problem:
    op: BlockOperator
    tol: ToleranceProfile
    grid: np.ndarray | None
    eps_ladder: np.ndarray | None
    digest: str


def _entry(value, where: str) -> complex:
    if isinstance(value, bool):
        raise ProblemFileError(f"{where}: boolean is not a number")
    if isinstance(value, (int, float)):
        return complex(float(value), 0.0)
    if (
        isinstance(value, list)
        and len(value) == 2
        and all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in value)
    ):
        return complex(float(value[0]), float(value[1]))
    raise ProblemFileError(f"{where}: expected a real or [re, im], got {value!r}")


def decode_matrix(data, name: str) -> np.ndarray:
    if not isinstance(data, list) or not data or not all(isinstance(r, list) for r in data):
        raise ProblemFileError(f"{name}: expected a non-empty list of rows")
    width = len(data[0])
    if width == 0 or any(len(r) != width for r in data):
        raise ProblemFileError(f"{name}: rows must be non-empty and of equal length")
    m = np.array([[_entry(v, f"{name}[{i}][{j}]") for j, v in enumerate(r)] for i, r in enumerate(data)])
    if not np.all(np.isfinite(m)):
        raise ProblemFileError(f"{name}: entries must be finite")
    return m


def parse_grid(spec) -> np.ndarray:
    """Grid from ``"min:max:points"`` or ``{"min": .., "max": .., "points": ..}``."""
    try:
        if isinstance(spec, str):
            lo, hi, pts = spec.split(":")
            lo, hi, pts = float(lo), float(hi), int(pts)
        else:
            lo, hi, pts = float(spec["min"]), float(spec["max"]), int(spec["points"])
    except (ValueError, KeyError, TypeError) as exc:
        raise ProblemFileError(f"malformed grid specification {spec!r}") from exc
    if pts < 1:
        raise ProblemFileError("grid must contain at least one point")
    if not (np.isfinite(lo) and np.isfinite(hi)) or hi < lo or (pts > 1 and hi == lo):
        raise ProblemFileError(f"invalid grid range [{lo}, {hi}]")
    return np.linspace(lo, hi, pts)


def parse_ladder(spec) -> np.ndarray:
    """Geometric ladder from ``"hi:lo:ratio"``, a dict, or an explicit list."""
    try:
        if isinstance(spec, list):
            ladder = np.array([float(v) for v in spec])
        else:
            if isinstance(spec, str):
                hi, lo, ratio = (float(v) for v in spec.split(":"))
            else:
                hi, lo, ratio = float(spec["hi"]), float(spec["lo"]), float(spec["ratio"])
            if not (hi > lo > 0 and ratio > 1):
                raise ProblemFileError(f"eps ladder needs hi > lo > 0 and ratio > 1, got {spec!r}")
            count = int(np.floor(np.log(hi / lo) / np.log(ratio) + 1e-9)) + 1
            ladder = hi / ratio ** np.arange(count)
    except (ValueError, KeyError, TypeError) as exc:
        if isinstance(exc, ProblemFileError):
            raise
        raise ProblemFileError(f"malformed eps ladder {spec!r}") from exc
    if ladder.size < 2 or not np.all(ladder > 0) or not np.all(np.diff(ladder) < 0):
        raise ProblemFileError("eps ladder must have >= 2 positive, strictly decreasing rungs")
    return ladder


def parse_problem(raw: bytes, overrides: dict | None = None) -> Problem:
    try:
        data = json.loads(raw)
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise ProblemFileError(f"not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise ProblemFileError("top level must be an object")
    missing = [k for k in ("a0", "a1", "v") if k not in data]
    if missing:
        raise ProblemFileError(f"missing keys: {', '.join(missing)}")

    tol_data = dict(data.get("tolerances") or {})
    unknown = set(tol_data) - {"eig_cluster_tol", "rank_rtol", "residual_tol"}
    if unknown:
        raise ProblemFileError(f"unknown tolerance keys: {sorted(unknown)}")
    tol_data.update({k: v for k, v in (overrides or {}).items() if v is not None})
    try:
        tol = ToleranceProfile(**{k: float(v) for k, v in tol_data.items()})
    except (TypeError, ValueError) as exc:
        raise ProblemFileError(f"invalid tolerances: {exc}") from exc

    a0 = decode_matrix(data["a0"], "a0")
    a1 = decode_matrix(data["a1"], "a1")
    v = decode_matrix(data["v"], "v")
    # NotHermitian / DimensionMismatch propagate with the block named
    op = BlockOperator(a0, a1, v, tol)

    scan = data.get("scan") or {}
    grid = parse_grid(scan["grid"]) if "grid" in scan else None
    ladder = parse_ladder(scan["eps_ladder"]) if "eps_ladder" in scan else None
    return Problem(op, tol, grid, ladder, "sha256:" + hashlib.sha256(raw).hexdigest())


def load_problem(path: str | Path, overrides: dict | None = None) -> Problem:
    try:
        raw = Path(path).read_bytes()
    except OSError as exc:
        raise ProblemFileError(f"cannot read {path}: {exc}") from exc
    return parse_problem(raw, overrides)


def _num(value: float) -> float:
    # normalise negative zero so reports do not depend on rounding noise sign
    value = float(value)
    return 0.0 if value == 0.0 else value


def encode_vector(vec) -> list:
    return [[_num(z.real), _num(z.imag)] for z in np.asarray(vec, dtype=complex).ravel()]


def encode_matrix(m) -> list:
    return [encode_vector(row) for row in np.atleast_2d(np.asarray(m, dtype=complex))]


def tolerances_dict(tol: ToleranceProfile) -> dict:
    return asdict(tol)


def dumps_report(report: dict) -> str:
    """Serialise deterministically; floats use Python's shortest round-trip repr."""
    return json.dumps(report, indent=2, allow_nan=True) + "\n"
