"""Eigenvalue trichotomy for the block operator.

Every eigenvector ``(y0, y1)`` of ``B`` at ``lambda`` satisfies
``(A0 - lambda) y0 = -V y1`` and ``(A1 - lambda) y1 = -V^H y0``.  Writing
``E`` for the eigenprojection of ``A0`` at ``lambda`` and ``R`` for the reduced
resolvent, ``(I - E) y0 = -R V y1`` and hence

    (A1 - lambda) y1 = V^H R V y1 - V^H E y0.

The ``H1`` part ``y = y1`` is a witness of

* CASE_I   when ``lambda`` is not an eigenvalue of ``A0``,
* CASE_II  when it is, but ``E y0 = 0``,
* CASE_III otherwise, with ``x = E y0`` in the kernel of ``A0 - lambda``.

Witnesses of the first two kinds are the ones usable for building graph
solutions (the point part of ``K_pp``).
"""
from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .blockmodel import BlockOperator
from .errors import ClassificationResidual
from .numkernel import ToleranceProfile, null_space, reduced_resolvent

__all__ = [
    "CaseTag",
    "Witness",
    "EigenvalueClassification",
    "classify_all",
    "k_pp_members",
    "k_sc_members",
    "k_pp_integral",
    "canonical_phase",
]


class CaseTag(str, enum.Enum):
    CASE_I = "i"
    CASE_II = "ii"
    CASE_III = "iii"


@dataclass(frozen=True)
class Witness:
    y: np.ndarray
    tag: CaseTag
    x: np.ndarray | None
    residual: float

    @property
    def in_k_pp(self) -> bool:
        return self.tag is not CaseTag.CASE_III


@dataclass(frozen=True)
class EigenvalueClassification:
    """Classification of one eigenvalue cluster of ``B``.

    ``decoupled`` counts eigen-directions with no ``H1`` component.  These
    only occur when ``Ran V`` is not cyclic for ``A0``; then
    ``len(witnesses) == multiplicity - decoupled``.
    """

    lam: float
    multiplicity: int
    witnesses: tuple[Witness, ...]
    in_spec_a0: bool
    decoupled: int = 0

    @property
    def tags(self) -> list[CaseTag]:
        return [w.tag for w in self.witnesses]

    @property
    def has_case_iii(self) -> bool:
        return any(w.tag is CaseTag.CASE_III for w in self.witnesses)


def canonical_phase(vec: np.ndarray, rtol: float = 1e-12) -> complex:
    """Unit phase making the first non-negligible coordinate real positive."""
    mags = np.abs(vec)
    if mags.size == 0 or mags.max() == 0:
        return 1.0
    k = int(np.flatnonzero(mags > rtol * mags.max())[0])
    return complex(np.conj(vec[k]) / mags[k])


def _orthonormal_witnesses(w0, w1, coeffs):
    """Rotate eigenvectors ``W @ coeffs`` so their ``H1`` parts are orthonormal.

    Returns the ``H0`` and ``H1`` parts of the rotated eigenvectors.
    """
    if coeffs.shape[1] == 0:
        return w0[:, :0], w1[:, :0]
    y = w1 @ coeffs
    u, s, vh = np.linalg.svd(y, full_matrices=False)
    c = coeffs @ vh.conj().T / s
    y0 = w0 @ c
    y1 = w1 @ c
    for j in range(y1.shape[1]):
        ph = canonical_phase(y1[:, j])
        y0[:, j] *= ph
        y1[:, j] *= ph
    return y0, y1


def classify_all(op: BlockOperator, tol: ToleranceProfile | None = None) -> list[EigenvalueClassification]:
    """Classify every eigenvalue cluster of ``B``.

    Within a cluster the ``CASE_I``/``CASE_II`` subspace (eigenvectors whose
    ``H0`` part has no component in ``ker(A0 - lambda)``) is extracted first
    and completed by ``CASE_III`` witnesses.  Witness sets of each kind are
    orthonormal in ``H1`` with a canonical phase.  Every witness is checked
    against its case equation.

    Raises
    ------
    ClassificationResidual
        If a witness fails its case equation.
    """
    tol = op.tol if tol is None else tol
    radius = tol.cluster_radius(op.norm)
    eig = op.eig
    eig_a0 = op.eig_a0
    a1, v = op.A1, op.V
    v_norm = np.linalg.norm(v, 2)
    out = []
    for idx in eig.clusters(radius):
        lam = float(np.mean(eig.eigenvalues[idx]))
        w = eig.vectors[:, idx]
        w0, w1 = w[: op.d0], w[op.d0 :]
        near = eig_a0.near(lam, radius)
        in_spec = near.size > 0
        e = eig_a0.projection(near)
        r = reduced_resolvent(eig_a0, lam, tol, radius)

        # eigenvectors are unit vectors, so thresholds are absolute
        coupled = _complement(null_space(w1, tol, reference=1.0), len(idx))
        decoupled = len(idx) - coupled.shape[1]
        kernel_free = null_space(e @ w0 @ coupled, tol, reference=1.0)
        regular = coupled @ kernel_free
        irregular = coupled @ _complement(kernel_free, coupled.shape[1])

        witnesses = []
        resid_scale = np.linalg.norm(a1 - lam * np.eye(op.n), 2) + v_norm**2 * np.linalg.norm(r, 2) + v_norm
        bound = tol.residual_tol * max(resid_scale, 1.0)
        kinds = ((regular, CaseTag.CASE_II if in_spec else CaseTag.CASE_I), (irregular, CaseTag.CASE_III))
        for coeffs, tag in kinds:
            y0s, y1s = _orthonormal_witnesses(w0, w1, coeffs)
            for j in range(y1s.shape[1]):
                y, y0 = y1s[:, j], y0s[:, j]
                lhs = (a1 - lam * np.eye(op.n)) @ y - v.conj().T @ (r @ (v @ y))
                x = None
                if tag is CaseTag.CASE_III:
                    x = e @ y0
                    lhs = lhs + v.conj().T @ x
                res = float(np.linalg.norm(lhs))
                if res > bound * max(1.0, np.linalg.norm(y0)):
                    raise ClassificationResidual(
                        f"case {tag.value} equation at lambda={lam:.12g} has residual {res:.3e} > {bound:.3e}"
                    )
                witnesses.append(Witness(y, tag, x, res))
        out.append(EigenvalueClassification(lam, len(idx), tuple(witnesses), in_spec, decoupled))
    return out


def _complement(basis: np.ndarray, dim: int) -> np.ndarray:
    """Orthonormal basis of the orthogonal complement of span(`basis`) in C^dim."""
    if basis.shape[1] == 0:
        return np.eye(dim, dtype=complex)
    if basis.shape[1] >= dim:
        return np.zeros((dim, 0), dtype=complex)
    q, _ = np.linalg.qr(basis, mode="complete")
    return q[:, basis.shape[1] :]


def k_pp_members(classifications: list[EigenvalueClassification]) -> list[tuple[float, np.ndarray]]:
    """All ``(lambda, y)`` witnesses of case I or II."""
    return [(c.lam, w.y) for c in classifications for w in c.witnesses if w.in_k_pp]


def k_sc_members(classifications: list[EigenvalueClassification]) -> list[tuple[float, np.ndarray]]:
    """Always empty: a finite-dimensional ``A0`` has no singular continuous spectrum."""
    return []


def k_pp_integral(op: BlockOperator, lam: float, y: np.ndarray, tol: ToleranceProfile | None = None) -> float:
    r"""``\int |t - lambda|^{-2} d<Vy, E_{A0}(t) Vy>``; ``inf`` if ``Vy`` charges ``lambda``."""
    tol = op.tol if tol is None else tol
    radius = tol.cluster_radius(op.norm)
    eig = op.eig_a0
    coeffs = eig.vectors.conj().T @ (op.V @ np.asarray(y, dtype=complex))
    weights = np.abs(coeffs) ** 2
    dist = np.abs(eig.eigenvalues - lam)
    at_lam = dist <= radius
    vy_norm2 = float(np.sum(weights))
    if np.any(weights[at_lam] > (tol.rank_rtol**2) * max(vy_norm2, 1.0)):
        return float("inf")
    return float(np.sum(weights[~at_lam] / dist[~at_lam] ** 2))
