r"""Herglotz matrix of the ``H1`` compression and its boundary behaviour.

``M(z)`` is the ``H1`` block of the resolvent of ``B``.  It is available in
two independent forms: directly, by solving with ``B - z``, and through the
inverse Schur complement ``[(A1 - z) - V^H (A0 - z)^{-1} V]^{-1}``.  The
compressed spectral measure ``Omega`` is purely atomic in finite dimensions
and is read off the eigendecomposition of ``B``.

:func:`boundary_scan` approaches the real axis along a ladder of
``epsilon`` values and flags points where ``tr Im M(lambda + i eps)`` blows
up (singular support) and where ``eps * tr Im M`` converges to a positive
limit (atoms).  It is a numerical illustration only; :func:`atom_table` is
the exact source of truth.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import minimize_scalar

from .blockmodel import BlockOperator
from .numkernel import DEFAULT_TOL, ToleranceProfile, solve_linear

__all__ = [
    "HerglotzSample",
    "Atom",
    "AtomTable",
    "ScanReport",
    "m_resolvent",
    "m_schur",
    "herglotz_sample",
    "imaginary_part",
    "atom_table",
    "default_eps_ladder",
    "boundary_scan",
    "scan_function",
]

GROWTH_FACTOR = 5.0
ATOM_FLOOR = 1e-6


def _tol(op: BlockOperator, tol: ToleranceProfile | None) -> ToleranceProfile:
    return op.tol if tol is None else tol


def m_resolvent(op: BlockOperator, z: complex, tol: ToleranceProfile | None = None) -> np.ndarray:
    """Lower-right ``n x n`` block of ``(B - z)^{-1}``."""
    tol = _tol(op, tol)
    shifted = op.full - z * np.eye(op.d0 + op.n)
    rhs = np.zeros((op.d0 + op.n, op.n), dtype=complex)
    rhs[op.d0 :, :] = np.eye(op.n)
    return solve_linear(shifted, rhs, tol)[op.d0 :, :]


def m_schur(op: BlockOperator, z: complex, tol: ToleranceProfile | None = None) -> np.ndarray:
    """Inverse Schur complement ``[(A1 - z) - V^H (A0 - z)^{-1} V]^{-1}``."""
    tol = _tol(op, tol)
    inner = solve_linear(op.A0 - z * np.eye(op.d0), op.V, tol)
    schur = op.A1 - z * np.eye(op.n) - op.V.conj().T @ inner
    return solve_linear(schur, np.eye(op.n, dtype=complex), tol)


def imaginary_part(m: np.ndarray) -> np.ndarray:
    """``(M - M^H) / 2i``."""
    return (m - m.conj().T) / 2j


@dataclass(frozen=True)
class HerglotzSample:
    z: complex
    M: np.ndarray
    m: complex

    @property
    def im_min_eigenvalue(self) -> float:
        return float(np.linalg.eigvalsh(imaginary_part(self.M))[0])


def herglotz_sample(
    op: BlockOperator, z: complex, form: str = "schur", tol: ToleranceProfile | None = None
) -> HerglotzSample:
    if form == "schur":
        mat = m_schur(op, z, tol)
    elif form == "resolvent":
        mat = m_resolvent(op, z, tol)
    else:
        raise ValueError(f"unknown form {form!r}")
    return HerglotzSample(complex(z), mat, complex(np.trace(mat)))


@dataclass(frozen=True)
class Atom:
    lam: float
    mass: float
    omega_block: np.ndarray


@dataclass(frozen=True)
class AtomTable:
    entries: list[Atom]
    n: int

    @property
    def locations(self) -> np.ndarray:
        return np.array([a.lam for a in self.entries])

    @property
    def total_mass(self) -> float:
        return float(sum(a.mass for a in self.entries))

    def matrix_stieltjes(self, z: complex) -> np.ndarray:
        """``sum_k Omega_k / (lambda_k - z)``; equals ``M(z)`` off the real axis."""
        out = np.zeros((self.n, self.n), dtype=complex)
        for a in self.entries:
            out += a.omega_block / (a.lam - z)
        return out

    def stieltjes(self, z: complex) -> complex:
        return complex(sum(a.mass / (a.lam - z) for a in self.entries))


def atom_table(op: BlockOperator, tol: ToleranceProfile | None = None) -> AtomTable:
    """Atoms of the compressed spectral measure, one per eigenvalue cluster of ``B``.

    The block at an atom is ``P_H1 E_B({lambda}) J_H1``; its trace is the
    atom's mass.  Clusters whose eigenvectors have (numerically) no ``H1``
    component carry no mass and are omitted.
    """
    tol = _tol(op, tol)
    eig = op.eig
    entries = []
    for idx in eig.clusters(tol.cluster_radius(op.norm)):
        w1 = eig.vectors[op.d0 :, idx]
        block = w1 @ w1.conj().T
        block = 0.5 * (block + block.conj().T)
        mass = float(np.trace(block).real)
        if mass > tol.rank_rtol:
            entries.append(Atom(float(np.mean(eig.eigenvalues[idx])), mass, block))
    return AtomTable(entries, op.n)


def default_eps_ladder() -> np.ndarray:
    return 10.0 ** -np.arange(2, 9, dtype=float)


@dataclass(frozen=True)
class ScanReport:
    """Result of a boundary scan.

    ``trace_im_values[i, k]`` is ``tr Im M(grid[i] + i eps_ladder[k])``.  The
    flagged points are located by refining the grid's local maxima along the
    ladder, so they lie within one grid step of a grid point but need not be
    grid points themselves.
    """

    grid: np.ndarray
    eps_ladder: np.ndarray
    trace_im_values: np.ndarray
    flagged_singular: list[float]
    flagged_atoms: list[tuple[float, float]]
    growth_factor: float = GROWTH_FACTOR
    atom_floor: float = ATOM_FLOOR
    # finite dimensions: the singular continuous remainder should always be empty
    expected_sc_empty: bool = field(default=True)

    @property
    def singular_continuous(self) -> list[float]:
        atoms = {lam for lam, _ in self.flagged_atoms}
        return [s for s in self.flagged_singular if s not in atoms]


def _validate_scan_inputs(grid, eps_ladder) -> tuple[np.ndarray, np.ndarray]:
    grid = np.asarray(grid, dtype=float).ravel()
    ladder = np.asarray(eps_ladder, dtype=float).ravel()
    if grid.size == 0:
        raise ValueError("scan grid is empty")
    if not np.all(np.isfinite(grid)):
        raise ValueError("scan grid must be finite")
    if ladder.size < 2:
        raise ValueError("eps ladder needs at least two rungs")
    if not (np.all(ladder > 0) and np.all(np.diff(ladder) < 0)):
        raise ValueError("eps ladder must be positive and strictly decreasing")
    return grid, ladder


def _is_singular(values: np.ndarray, growth_factor: float) -> bool:
    """Growth by at least `growth_factor` on every rung of a tail of length >= 2."""
    ratios = values[1:] / np.where(values[:-1] > 0, values[:-1], np.inf)
    return bool(np.all(ratios[-2:] >= growth_factor))


def _atom_mass(values: np.ndarray, ladder: np.ndarray, atom_floor: float, stab_rtol: float) -> float | None:
    weighted = ladder * values
    last, prev = weighted[-1], weighted[-2]
    if last > atom_floor and abs(last - prev) <= stab_rtol * last:
        return float(last)
    return None


def _reciprocal_vertex(fn, center: float, eps: float) -> float:
    """One step towards the peak: ``1/fn`` is a parabola near an isolated atom."""
    h = eps
    g = [1.0 / fn(center + d, eps) for d in (-h, 0.0, h)]
    curv = g[0] - 2.0 * g[1] + g[2]
    if not np.all(np.isfinite(g)) or curv <= 0:
        return center
    shift = 0.5 * h * (g[0] - g[2]) / curv
    return center + float(np.clip(shift, -h, h))


def _refine_peak(fn, center: float, half_width: float, ladder: np.ndarray) -> float:
    """Follow the maximiser of ``fn(lam, eps)`` down the ladder."""
    lo, hi = center - half_width, center + half_width
    for k, eps in enumerate(ladder):
        res = minimize_scalar(
            lambda lam: -fn(lam, eps),
            bounds=(lo, hi),
            method="bounded",
            options={"xatol": 1e-3 * eps},
        )
        center = float(res.x)
        # bounded Brent stalls at sqrt(machine eps) relative accuracy
        for _ in range(3):
            center = _reciprocal_vertex(fn, center, eps)
        nxt = ladder[k + 1] if k + 1 < ladder.size else eps
        lo, hi = center - 10.0 * nxt, center + 10.0 * nxt
    return center


def scan_function(
    trace_im: Callable[[float, float], float],
    grid: Sequence[float],
    eps_ladder: Sequence[float],
    growth_factor: float = GROWTH_FACTOR,
    atom_floor: float = ATOM_FLOOR,
    stab_rtol: float = 1e-2,
) -> ScanReport:
    """Boundary scan of a scalar Herglotz function given by ``trace_im(lam, eps)``.

    ``trace_im`` must return ``Im f(lam + i eps)`` for the function under
    study.  See :func:`boundary_scan` for the flagging rules.
    """
    grid, ladder = _validate_scan_inputs(grid, eps_ladder)
    values = np.array([[trace_im(lam, eps) for eps in ladder] for lam in grid])

    candidates = set()
    for k in range(ladder.size):
        col = values[:, k]
        for i in range(grid.size):
            left = col[i - 1] if i > 0 else -np.inf
            right = col[i + 1] if i + 1 < grid.size else -np.inf
            if col[i] > left and col[i] >= right:
                candidates.add(i)

    step = float(np.min(np.diff(np.sort(grid)))) if grid.size > 1 else ladder[0]
    merge_radius = 10.0 * ladder[-1]
    singular: list[float] = []
    atoms: list[tuple[float, float]] = []
    for i in sorted(candidates):
        lam = _refine_peak(trace_im, float(grid[i]), max(step, ladder[0]), ladder)
        if any(abs(lam - s) <= merge_radius for s in singular):
            continue
        profile = np.array([trace_im(lam, eps) for eps in ladder])
        if not _is_singular(profile, growth_factor):
            continue
        singular.append(lam)
        mass = _atom_mass(profile, ladder, atom_floor, stab_rtol)
        if mass is not None:
            atoms.append((lam, mass))
    order = np.argsort(singular)
    singular = [singular[j] for j in order]
    atoms.sort()
    return ScanReport(grid, ladder, values, singular, atoms, growth_factor, atom_floor)


def boundary_scan(
    op: BlockOperator,
    grid: Sequence[float],
    eps_ladder: Sequence[float] | None = None,
    tol: ToleranceProfile | None = None,
    growth_factor: float = GROWTH_FACTOR,
    atom_floor: float = ATOM_FLOOR,
) -> ScanReport:
    r"""Scan ``tr Im M(lambda + i eps)`` over `grid` and a decreasing `eps_ladder`.

    A point is flagged singular when the trace grows by at least
    `growth_factor` per rung over the last rungs of the ladder, and flagged
    as an atom when, in addition, ``eps * tr Im M`` settles above
    `atom_floor`; the settled value is the estimated atom mass.
    """
    tol = _tol(op, tol)
    ladder = default_eps_ladder() if eps_ladder is None else eps_ladder
    eps_min = float(np.min(ladder)) if np.size(ladder) else 1.0
    # near-real shifts are legitimately ill-conditioned; accept them
    scan_tol = replace(tol, rank_rtol=min(tol.rank_rtol, 1e-3 * eps_min / op.norm))

    def trace_im(lam: float, eps: float) -> float:
        return float(np.trace(m_resolvent(op, complex(lam, eps), scan_tol)).imag)

    return scan_function(trace_im, grid, ladder, growth_factor, atom_floor)
