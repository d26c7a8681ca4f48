"""Block operator ``B = [[A0, V], [V^H, A1]]`` and its standing assumptions.

Coordinates ``0 .. d0-1`` of the assembled matrix belong to ``H0`` and
coordinates ``d0 .. d0+n-1`` to ``H1``; the inclusion of ``H1`` and its adjoint
(the compression onto ``H1``) are plain index slices under this convention.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import DimensionMismatch
from .numkernel import (
    DEFAULT_TOL,
    HermitianEigenDecomposition,
    ToleranceProfile,
    check_hermitian,
    as_matrix,
    hermitian_eig,
)

__all__ = [
    "BlockOperator",
    "HypothesisReport",
    "assemble_full",
    "check_hypothesis",
    "krylov_basis",
    "multiplicity_of_spectrum",
    "restrict_to_subspace",
]


@dataclass(frozen=True, eq=False)
class BlockOperator:
    """Self-adjoint block operator with Hermitian diagonal blocks.

    ``A0`` is ``d0 x d0``, ``A1`` is ``n x n`` and ``V`` (the coupling from
    ``H1`` to ``H0``) is ``d0 x n``.  Inputs are validated and the diagonal
    blocks are symmetrised on construction.
    """

    A0: np.ndarray
    A1: np.ndarray
    V: np.ndarray
    tol: ToleranceProfile = DEFAULT_TOL

    def __post_init__(self):
        a0 = as_matrix(self.A0, "A0")
        a1 = as_matrix(self.A1, "A1")
        v = as_matrix(self.V, "V")
        check_hermitian(a0, self.tol, "A0")
        check_hermitian(a1, self.tol, "A1")
        d0, n = a0.shape[0], a1.shape[0]
        if d0 < 1 or n < 1:
            raise DimensionMismatch("both blocks must have dimension >= 1")
        if v.shape != (d0, n):
            raise DimensionMismatch(f"V must have shape ({d0}, {n}), got {v.shape}")
        object.__setattr__(self, "A0", 0.5 * (a0 + a0.conj().T))
        object.__setattr__(self, "A1", 0.5 * (a1 + a1.conj().T))
        object.__setattr__(self, "V", v)

    @property
    def d0(self) -> int:
        return self.A0.shape[0]

    @property
    def n(self) -> int:
        return self.A1.shape[0]

    @cached_property
    def full(self) -> np.ndarray:
        return assemble_full(self)

    @cached_property
    def norm(self) -> float:
        """Spectral norm of the assembled operator (1.0 if it vanishes)."""
        value = float(np.linalg.norm(self.full, 2))
        return value if value > 0 else 1.0

    @cached_property
    def eig(self) -> HermitianEigenDecomposition:
        return hermitian_eig(self.full, self.tol)

    @cached_property
    def eig_a0(self) -> HermitianEigenDecomposition:
        return hermitian_eig(self.A0, self.tol)

    @property
    def cluster_radius(self) -> float:
        """Eigenvalue grouping radius, scaled by ``||B||``."""
        return self.tol.cluster_radius(self.norm)

    def h0(self, vec: np.ndarray) -> np.ndarray:
        return vec[: self.d0]

    def h1(self, vec: np.ndarray) -> np.ndarray:
        return vec[self.d0 :]

    def with_tol(self, tol: ToleranceProfile) -> "BlockOperator":
        return BlockOperator(self.A0, self.A1, self.V, tol)


def assemble_full(op: BlockOperator) -> np.ndarray:
    """The ``(d0+n) x (d0+n)`` matrix ``[[A0, V], [V^H, A1]]``."""
    return np.block([[op.A0, op.V], [op.V.conj().T, op.A1]])


def krylov_basis(
    a: np.ndarray, start: np.ndarray, tol: ToleranceProfile = DEFAULT_TOL
) -> np.ndarray:
    """Orthonormal basis of ``span{a^k s : k >= 0, s in Ran start}``.

    Built by block Arnoldi with re-orthogonalisation; a new direction is kept
    only if its norm after orthogonalisation exceeds ``rank_rtol`` times
    ``max(||a||, ||start||)``.  This has the same column space as the raw
    Krylov matrix ``[S, aS, a^2 S, ...]`` but does not suffer from its
    exponential ill-conditioning.
    """
    a = as_matrix(a)
    start = as_matrix(start)
    dim = a.shape[0]
    s_norm = np.linalg.norm(start, 2) if start.size else 0.0
    if s_norm == 0.0:
        return np.zeros((dim, 0), dtype=complex)
    ref = max(np.linalg.norm(a, 2), s_norm)
    threshold = tol.rank_rtol * ref

    def extend(basis, block):
        for _ in range(2):
            if basis.shape[1]:
                block = block - basis @ (basis.conj().T @ block)
        u, sv, _ = np.linalg.svd(block, full_matrices=False)
        return u[:, sv > threshold]

    basis = extend(np.zeros((dim, 0), dtype=complex), start)
    block = basis
    while block.shape[1] and basis.shape[1] < dim:
        block = extend(basis, a @ block)
        basis = np.hstack([basis, block])
    return basis


@dataclass(frozen=True)
class HypothesisReport:
    hermitian_ok: bool
    cyclic_ok: bool
    krylov_rank: int
    krylov_basis: np.ndarray
    n: int
    d0: int

    @property
    def rank_gap(self) -> int:
        return self.d0 - self.krylov_rank

    @property
    def ok(self) -> bool:
        return self.hermitian_ok and self.cyclic_ok


def check_hypothesis(op: BlockOperator, tol: ToleranceProfile | None = None) -> HypothesisReport:
    """Check that ``Ran V`` is a cyclic generating subspace for ``A0``.

    Failures are reported in the returned value, never raised.  Hermiticity
    is enforced when the ``BlockOperator`` is built, so ``hermitian_ok`` is
    always true for a constructed operator.
    """
    tol = tol or op.tol
    basis = krylov_basis(op.A0, op.V, tol)
    rank = basis.shape[1]
    return HypothesisReport(
        hermitian_ok=True,
        cyclic_ok=rank == op.d0,
        krylov_rank=rank,
        krylov_basis=basis,
        n=op.n,
        d0=op.d0,
    )


def restrict_to_subspace(op: BlockOperator, basis: np.ndarray) -> BlockOperator:
    """Compress ``A0`` and ``V`` onto an ``A0``-invariant subspace containing ``Ran V``."""
    q = np.asarray(basis, dtype=complex)
    a0 = q.conj().T @ op.A0 @ q
    return BlockOperator(0.5 * (a0 + a0.conj().T), op.A1, q.conj().T @ op.V, op.tol)


def multiplicity_of_spectrum(m, tol: ToleranceProfile = DEFAULT_TOL) -> int:
    """Largest eigenvalue multiplicity of a Hermitian matrix (0 for an empty one)."""
    eig = hermitian_eig(m, tol)
    if eig.dim == 0:
        return 0
    clusters = eig.clusters(tol.cluster_radius(eig.norm))
    return max(len(c) for c in clusters)
