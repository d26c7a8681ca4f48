"""Dense complex matrix kernel.

Everything here works on ``numpy`` complex arrays.  The eigensolver is a
parallel-ordered cyclic Jacobi method for Hermitian matrices; it is slower than
LAPACK but simple, deterministic and accurate to working precision on the
small problems this package targets.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, NoConvergence, NotHermitian, Singular

__all__ = [
    "ToleranceProfile",
    "HermitianEigenDecomposition",
    "as_matrix",
    "hermitian_eig",
    "numerical_rank",
    "reduced_resolvent",
    "solve_linear",
    "cluster_eigenvalues",
    "orthonormal_basis",
    "null_space",
]


@dataclass(frozen=True)
class ToleranceProfile:
    """Numerical thresholds shared by all operations.

    Parameters
    ----------
    eig_cluster_tol
        Eigenvalues closer than ``eig_cluster_tol * scale`` form one cluster,
        where ``scale`` is the spectral norm of the operator being analysed.
    rank_rtol
        Singular values below ``rank_rtol`` times the largest one count as zero.
    residual_tol
        Acceptance threshold for relative residuals of operator identities.
    """

    eig_cluster_tol: float = 1e-8
    rank_rtol: float = 1e-10
    residual_tol: float = 1e-8

    def __post_init__(self):
        for name in ("eig_cluster_tol", "rank_rtol", "residual_tol"):
            value = getattr(self, name)
            if not (np.isfinite(value) and value > 0):
                raise ValueError(f"{name} must be strictly positive, got {value!r}")

    def cluster_radius(self, scale: float) -> float:
        return self.eig_cluster_tol * (scale if scale > 0 else 1.0)


DEFAULT_TOL = ToleranceProfile()


def as_matrix(data, name: str = "matrix") -> np.ndarray:
    """Convert `data` to a finite 2-D complex array."""
    m = np.array(data, dtype=complex)
    if m.ndim == 1:
        m = m.reshape(-1, 1)
    if m.ndim != 2:
        raise DimensionMismatch(f"{name} must be two-dimensional, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError(f"{name} contains non-finite entries")
    return m


def cluster_eigenvalues(values: np.ndarray, radius: float) -> list[np.ndarray]:
    """Group ascending `values` into chains whose consecutive gaps are <= `radius`."""
    values = np.asarray(values, dtype=float)
    if values.size == 0:
        return []
    breaks = np.flatnonzero(np.diff(values) > radius) + 1
    return np.split(np.arange(values.size), breaks)


@dataclass(frozen=True)
class HermitianEigenDecomposition:
    """Ascending eigenvalues and orthonormal eigenvectors (as columns)."""

    eigenvalues: np.ndarray
    vectors: np.ndarray

    @property
    def dim(self) -> int:
        return self.eigenvalues.size

    @property
    def norm(self) -> float:
        """Spectral norm of the decomposed matrix."""
        if self.dim == 0:
            return 0.0
        return float(np.max(np.abs(self.eigenvalues)))

    def clusters(self, radius: float) -> list[np.ndarray]:
        return cluster_eigenvalues(self.eigenvalues, radius)

    def cluster_values(self, radius: float) -> list[float]:
        return [float(np.mean(self.eigenvalues[idx])) for idx in self.clusters(radius)]

    def near(self, lam: float, radius: float) -> np.ndarray:
        """Indices of eigenvalues within `radius` of `lam`."""
        return np.flatnonzero(np.abs(self.eigenvalues - lam) <= radius)

    def projection(self, indices) -> np.ndarray:
        """Orthogonal projection onto the span of the selected eigenvectors."""
        w = self.vectors[:, indices]
        return w @ w.conj().T

    def reconstruct(self) -> np.ndarray:
        return (self.vectors * self.eigenvalues) @ self.vectors.conj().T


def check_hermitian(m: np.ndarray, tol: ToleranceProfile, name: str) -> None:
    if m.shape[0] != m.shape[1]:
        raise DimensionMismatch(f"{name} must be square, got shape {m.shape}")
    scale = np.linalg.norm(m)
    defect = np.linalg.norm(m - m.conj().T)
    if defect > tol.rank_rtol * max(scale, np.finfo(float).tiny):
        raise NotHermitian(
            f"{name} is not Hermitian: ||M - M^H||_F = {defect:.3e}, ||M||_F = {scale:.3e}"
        )


def _round_robin(m: int) -> list[tuple[np.ndarray, np.ndarray]]:
    """Pairings of ``range(m)`` (m even) so every pair meets once per sweep."""
    players = list(range(m))
    rounds = []
    for _ in range(m - 1):
        half = m // 2
        p = np.array(players[:half])
        q = np.array(players[half:][::-1])
        rounds.append((np.minimum(p, q), np.maximum(p, q)))
        players = [players[0], players[-1]] + players[1:-1]
    return rounds


def _jacobi_rotations(a: np.ndarray, p: np.ndarray, q: np.ndarray, tiny: float) -> np.ndarray:
    """Block-diagonal unitary annihilating ``a[p, q]`` for all disjoint pairs at once."""
    n = a.shape[0]
    app = a[p, p].real
    aqq = a[q, q].real
    apq = a[p, q]
    mag = np.abs(apq)
    active = mag > tiny
    c = np.ones(p.size)
    s = np.zeros(p.size)
    phase = np.ones(p.size, dtype=complex)
    if np.any(active):
        mag_a = mag[active]
        theta = (aqq[active] - app[active]) / (2.0 * mag_a)
        sign = np.where(theta >= 0, 1.0, -1.0)
        t = sign / (np.abs(theta) + np.sqrt(theta * theta + 1.0))
        c[active] = 1.0 / np.sqrt(t * t + 1.0)
        s[active] = t * c[active]
        phase[active] = np.conj(apq[active]) / mag_a
    j = np.eye(n, dtype=complex)
    j[p, p] = c
    j[p, q] = s
    j[q, p] = -s * phase
    j[q, q] = c * phase
    return j


def hermitian_eig(
    m, tol: ToleranceProfile = DEFAULT_TOL, max_sweeps: int = 60
) -> HermitianEigenDecomposition:
    """Eigendecomposition of a Hermitian matrix by cyclic Jacobi sweeps.

    Disjoint index pairs are rotated together (round-robin ordering), so each
    sweep costs ``n - 1`` dense products instead of ``n(n-1)/2`` row updates.

    Raises
    ------
    NotHermitian
        If ``||M - M^H||_F > rank_rtol * ||M||_F``.
    NoConvergence
        If the off-diagonal mass does not vanish within `max_sweeps` sweeps.
    """
    m = as_matrix(m)
    check_hermitian(m, tol, "matrix")
    n = m.shape[0]
    a = 0.5 * (m + m.conj().T)
    if n == 0:
        return HermitianEigenDecomposition(np.zeros(0), np.zeros((0, 0), dtype=complex))

    size = n + (n % 2)
    if size != n:
        # the padding index is decoupled and never mixes with real indices
        a = np.pad(a, ((0, 1), (0, 1)))
    v = np.eye(size, dtype=complex)
    rounds = _round_robin(size)

    norm_f = np.linalg.norm(a)
    eps = np.finfo(float).eps
    target = eps * max(norm_f, np.finfo(float).tiny)
    tiny = np.finfo(float).tiny * 1e4

    for _ in range(max_sweeps):
        off = np.linalg.norm(a - np.diag(np.diag(a)))
        if off <= target:
            break
        for p, q in rounds:
            j = _jacobi_rotations(a, p, q, tiny)
            a = j.conj().T @ a @ j
            a[p, q] = 0.0
            a[q, p] = 0.0
            v = v @ j
        a = 0.5 * (a + a.conj().T)
    else:
        off = np.linalg.norm(a - np.diag(np.diag(a)))
        if off > 64 * target:
            raise NoConvergence(
                f"Jacobi iteration did not converge in {max_sweeps} sweeps (off-norm {off:.3e})"
            )

    values = np.diag(a).real[:n]
    vectors = v[:n, :n]
    order = np.argsort(values, kind="stable")
    return HermitianEigenDecomposition(values[order], vectors[:, order])


def numerical_rank(m, tol: ToleranceProfile = DEFAULT_TOL) -> int:
    """Count singular values above ``rank_rtol`` times the largest one."""
    m = as_matrix(m)
    if m.size == 0:
        return 0
    sv = np.linalg.svd(m, compute_uv=False)
    if sv[0] == 0.0:
        return 0
    return int(np.count_nonzero(sv > tol.rank_rtol * sv[0]))


def orthonormal_basis(m, tol: ToleranceProfile = DEFAULT_TOL, reference: float | None = None) -> np.ndarray:
    """Orthonormal basis of the column space of `m`.

    Directions with singular value below ``rank_rtol * reference`` are dropped;
    `reference` defaults to the largest singular value.
    """
    m = as_matrix(m)
    if m.size == 0:
        return np.zeros((m.shape[0], 0), dtype=complex)
    u, sv, _ = np.linalg.svd(m, full_matrices=False)
    ref = sv[0] if reference is None else reference
    if ref == 0.0:
        return np.zeros((m.shape[0], 0), dtype=complex)
    return u[:, sv > tol.rank_rtol * ref]


def null_space(m, tol: ToleranceProfile = DEFAULT_TOL, reference: float | None = None) -> np.ndarray:
    """Orthonormal basis (columns) of the numerical kernel of `m`."""
    m = as_matrix(m)
    cols = m.shape[1]
    if m.shape[0] == 0 or cols == 0:
        return np.eye(cols, dtype=complex)
    _, sv, vh = np.linalg.svd(m, full_matrices=True)
    ref = sv[0] if reference is None else reference
    rank = int(np.count_nonzero(sv > tol.rank_rtol * ref)) if ref > 0 else 0
    return vh[rank:].conj().T


def reduced_resolvent(
    eig: HermitianEigenDecomposition,
    lam: float,
    tol: ToleranceProfile = DEFAULT_TOL,
    radius: float | None = None,
) -> np.ndarray:
    r"""Boundary value of the resolvent off the eigenspace at `lam`.

    Returns :math:`\sum_{|\mu_i - \lambda| > r} (\mu_i - \lambda)^{-1} v_i v_i^*`,
    which is the limit of :math:`(A - \lambda \mp i\varepsilon)^{-1}(I - E(\{\lambda\}))`
    as :math:`\varepsilon \to 0^+`.  The cluster radius `r` defaults to
    ``tol.cluster_radius(eig.norm)``.
    """
    if radius is None:
        radius = tol.cluster_radius(eig.norm)
    shift = eig.eigenvalues - lam
    keep = np.abs(shift) > radius
    w = eig.vectors[:, keep]
    return (w / shift[keep]) @ w.conj().T


def solve_linear(m, rhs, tol: ToleranceProfile = DEFAULT_TOL) -> np.ndarray:
    """Solve ``M X = rhs`` for square, numerically nonsingular `M`.

    Raises
    ------
    Singular
        If ``numerical_rank(M) < dim`` or the computed solution fails the
        backward-error check.
    """
    m = as_matrix(m)
    rhs_arr = np.asarray(rhs, dtype=complex)
    vector = rhs_arr.ndim == 1
    rhs_m = rhs_arr.reshape(-1, 1) if vector else rhs_arr
    if m.shape[0] != m.shape[1]:
        raise DimensionMismatch(f"matrix must be square, got shape {m.shape}")
    if rhs_m.shape[0] != m.shape[0]:
        raise DimensionMismatch(f"rhs has {rhs_m.shape[0]} rows, matrix has {m.shape[0]}")
    if m.shape[0] == 0:
        x = np.zeros_like(rhs_m)
        return x.ravel() if vector else x
    rank = numerical_rank(m, tol)
    if rank < m.shape[0]:
        raise Singular(f"matrix is numerically singular (rank {rank} < {m.shape[0]})")
    x = np.linalg.solve(m, rhs_m)
    resid = np.linalg.norm(m @ x - rhs_m)
    bound = tol.residual_tol * (np.linalg.norm(m) * np.linalg.norm(x) + np.linalg.norm(rhs_m))
    if resid > bound:
        raise Singular(f"linear solve residual {resid:.3e} exceeds {bound:.3e}")
    return x.ravel() if vector else x
