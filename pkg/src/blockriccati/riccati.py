"""Graph solutions of ``A1 X - X A0 - X V X + V^H = 0``.

Given ``n`` linearly independent witnesses ``y_k`` with eigenvalues
``lambda_k`` (case I/II of :mod:`blockriccati.eigclassify`), the solution is

    X = sum_k P_k^H V^H R(lambda_k),

where ``P_k`` is the oblique projection onto ``span{y_k}`` along the other
witnesses and ``R`` is the reduced resolvent of ``A0``.  The graph
``{x + X x}`` is then the ``B``-invariant subspace complementary to the
eigenvectors selected by the witnesses.

:func:`oracle_graph_solutions` enumerates graph subspaces directly from the
eigenvectors of ``B`` and serves as an independent check.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .blockmodel import BlockOperator, check_hypothesis, restrict_to_subspace
from .eigclassify import EigenvalueClassification, classify_all
from .errors import (
    CaseEquationFailed,
    DegenerateSpectrum,
    DependentWitnesses,
    DimensionMismatch,
    Singular,
)
from .numkernel import ToleranceProfile, numerical_rank, reduced_resolvent, solve_linear

__all__ = [
    "LambdaSet",
    "ObliqueProjectionFamily",
    "RiccatiSolution",
    "NoCertificate",
    "build_lambda",
    "oblique_projections",
    "build_X_lambda",
    "riccati_residual",
    "residual_scale",
    "graph_invariance_defect",
    "solve_existence",
    "oracle_graph_solutions",
]


@dataclass(frozen=True)
class LambdaSet:
    """``n`` witness pairs ``(y_k, lambda_k)``; ``Y`` holds the unit vectors ``y_k`` as columns."""

    pairs: tuple[tuple[np.ndarray, float], ...]
    Y: np.ndarray

    @property
    def lambdas(self) -> list[float]:
        return [lam for _, lam in self.pairs]

    @property
    def sigma_min(self) -> float:
        return float(np.linalg.svd(self.Y, compute_uv=False)[-1])


@dataclass(frozen=True)
class ObliqueProjectionFamily:
    projections: list[np.ndarray]


@dataclass(frozen=True)
class RiccatiSolution:
    """A bounded solution ``X: H0 -> H1`` with its verification diagnostics.

    ``subset`` records, for oracle solutions, the indices of the eigenvalues
    of ``B`` whose eigenvectors span the graph.  ``restricted`` is set when
    the solution was computed on the cyclic subspace generated by ``Ran V``
    and extended by zero.
    """

    X: np.ndarray
    residual: float
    graph_defect: float
    scale: float
    lambda_set: LambdaSet | None = None
    subset: tuple[int, ...] | None = None
    restricted: bool = False
    bounded: bool = True

    def verified(self, op: BlockOperator, tol: ToleranceProfile | None = None) -> bool:
        tol = op.tol if tol is None else tol
        return (
            self.residual <= tol.residual_tol * self.scale
            and self.graph_defect <= tol.residual_tol * op.norm
        )


@dataclass(frozen=True)
class NoCertificate:
    """No solution could be certified by the sufficient conditions implemented here.

    This is not a proof of non-existence.
    """

    reason: str
    n: int
    k_pp_count: int
    k_pp_rank: int
    classifications: list[EigenvalueClassification] = field(default_factory=list)


def _check_x(op: BlockOperator, x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=complex)
    if x.shape != (op.n, op.d0):
        raise DimensionMismatch(f"X must have shape ({op.n}, {op.d0}), got {x.shape}")
    return x


def riccati_residual(op: BlockOperator, X) -> float:
    """Frobenius norm of ``A1 X - X A0 - X V X + V^H``."""
    x = _check_x(op, X)
    lhs = op.A1 @ x - x @ op.A0 - x @ op.V @ x + op.V.conj().T
    return float(np.linalg.norm(lhs))


def residual_scale(op: BlockOperator, X) -> float:
    """``(||A0|| + ||A1|| + ||V||) (1 + ||X||)^2`` in spectral norms."""
    x = _check_x(op, X)
    blocks = sum(np.linalg.norm(m, 2) for m in (op.A0, op.A1, op.V))
    return float(max(blocks, np.finfo(float).tiny) * (1.0 + np.linalg.norm(x, 2)) ** 2)


def graph_invariance_defect(op: BlockOperator, X) -> float:
    """``||(I - G) B G||_2`` for the orthogonal projection ``G`` onto ``{x + X x}``."""
    x = _check_x(op, X)
    basis = np.vstack([np.eye(op.d0, dtype=complex), x])
    q, _ = np.linalg.qr(basis)
    bq = op.full @ q
    return float(np.linalg.norm(bq - q @ (q.conj().T @ bq), 2))


def _pair_residuals(op: BlockOperator, y: np.ndarray, lam: float, tol: ToleranceProfile) -> tuple[float, float, float]:
    """Residual of the regular case equation, size of ``E V y`` and the check bound."""
    radius = tol.cluster_radius(op.norm)
    eig_a0 = op.eig_a0
    r = reduced_resolvent(eig_a0, lam, tol, radius)
    e = eig_a0.projection(eig_a0.near(lam, radius))
    vy = op.V @ y
    eq = (op.A1 - lam * np.eye(op.n)) @ y - op.V.conj().T @ (r @ vy)
    v_norm = np.linalg.norm(op.V, 2)
    scale = np.linalg.norm(op.A1 - lam * np.eye(op.n), 2) + v_norm**2 * np.linalg.norm(r, 2) + v_norm
    return float(np.linalg.norm(eq)), float(np.linalg.norm(e @ vy)), tol.residual_tol * max(scale, 1.0)


def build_lambda(
    op: BlockOperator, pairs: Sequence[tuple[np.ndarray, float]], tol: ToleranceProfile | None = None
) -> LambdaSet:
    """Validate ``n`` pairs ``(y, lambda)`` and assemble a :class:`LambdaSet`.

    Raises
    ------
    DimensionMismatch
        If the number of pairs is not ``n`` or a vector has the wrong length.
    DependentWitnesses
        If the ``y`` vectors are numerically dependent.
    CaseEquationFailed
        If a pair violates ``(A1 - lambda) y = V^H R(lambda) V y`` or ``V y``
        charges the eigenspace of ``A0`` at ``lambda``.
    """
    tol = op.tol if tol is None else tol
    if len(pairs) != op.n:
        raise DimensionMismatch(f"need exactly n = {op.n} pairs, got {len(pairs)}")
    normalised = []
    for y, lam in pairs:
        y = np.asarray(y, dtype=complex).ravel()
        if y.shape != (op.n,):
            raise DimensionMismatch(f"witness has length {y.size}, expected {op.n}")
        norm = np.linalg.norm(y)
        if norm == 0:
            raise DependentWitnesses("zero witness vector")
        normalised.append((y / norm, float(lam)))
    Y = np.column_stack([y for y, _ in normalised])
    if numerical_rank(Y, tol) < op.n:
        raise DependentWitnesses(f"witness matrix has rank {numerical_rank(Y, tol)} < {op.n}")
    for k, (y, lam) in enumerate(normalised):
        eq, charge, bound = _pair_residuals(op, y, lam, tol)
        if eq > bound or charge > bound:
            raise CaseEquationFailed(
                f"pair {k} (lambda={lam:.12g}): equation residual {eq:.3e}, "
                f"eigenspace charge {charge:.3e}, bound {bound:.3e}"
            )
    return LambdaSet(tuple(normalised), Y)


def oblique_projections(lam_set: LambdaSet, tol: ToleranceProfile | None = None) -> ObliqueProjectionFamily:
    """``P_k = Y e_k e_k^T Y^{-1}``: range ``span{y_k}``, kernel spanned by the other ``y_j``."""
    tol = ToleranceProfile() if tol is None else tol
    Y = lam_set.Y
    n = Y.shape[0]
    y_inv = solve_linear(Y, np.eye(n, dtype=complex), tol)
    return ObliqueProjectionFamily([np.outer(Y[:, k], y_inv[k, :]) for k in range(n)])


def _diagnose(op: BlockOperator, x: np.ndarray, **kwargs) -> RiccatiSolution:
    return RiccatiSolution(
        X=x,
        residual=riccati_residual(op, x),
        graph_defect=graph_invariance_defect(op, x),
        scale=residual_scale(op, x),
        **kwargs,
    )


def build_X_lambda(op: BlockOperator, lam_set: LambdaSet, tol: ToleranceProfile | None = None) -> RiccatiSolution:
    """``X = sum_k P_k^H V^H R(lambda_k)`` together with its residual and graph defect."""
    tol = op.tol if tol is None else tol
    radius = tol.cluster_radius(op.norm)
    family = oblique_projections(lam_set, tol)
    vh = op.V.conj().T
    x = np.zeros((op.n, op.d0), dtype=complex)
    for p, lam in zip(family.projections, lam_set.lambdas):
        x += p.conj().T @ vh @ reduced_resolvent(op.eig_a0, lam, tol, radius)
    return _diagnose(op, x, lambda_set=lam_set)


def _sigma_min(cols: list[np.ndarray]) -> float:
    if not cols:
        return 1.0
    return float(np.linalg.svd(np.column_stack(cols), compute_uv=False)[-1])


def _select_greedy(members: list[tuple[float, np.ndarray]], n: int, tol: ToleranceProfile) -> list[int] | None:
    """Greedy choice of ``n`` independent witnesses plus one swap pass maximising ``sigma_min(Y)``."""
    order = sorted(range(len(members)), key=lambda i: (abs(members[i][0]), members[i][0]))
    chosen: list[int] = []
    for i in order:
        if len(chosen) == n:
            break
        if _sigma_min([members[j][1] for j in chosen] + [members[i][1]]) > tol.rank_rtol:
            chosen.append(i)
    if len(chosen) < n:
        return None
    best = _sigma_min([members[j][1] for j in chosen])
    for pos in range(n):
        for cand in order:
            if cand in chosen:
                continue
            trial = chosen.copy()
            trial[pos] = cand
            value = _sigma_min([members[j][1] for j in trial])
            if value > best * (1.0 + 1e-12):
                chosen, best = trial, value
    return chosen


def solve_existence(op: BlockOperator, tol: ToleranceProfile | None = None) -> RiccatiSolution | NoCertificate:
    """Construct and verify a bounded solution, or explain why none was certified.

    1. If ``Ran V`` is not cyclic for ``A0``, solve on the cyclic subspace it
       generates and extend the solution by zero on the complement.
    2. Classify the eigenvalues of ``B``.
    3. If some eigenvalue carries ``n`` regular witnesses, use them all
       (among several such eigenvalues, the one giving the smallest ``||X||``).
    4. Otherwise pick ``n`` independent regular witnesses greedily by ``|lambda|``,
       then improve ``sigma_min(Y)`` with one pass of single swaps.
    5. Build ``X`` and verify residual and graph invariance.
    """
    tol = op.tol if tol is None else tol
    hyp = check_hypothesis(op, tol)
    if not hyp.cyclic_ok:
        basis = hyp.krylov_basis
        if basis.shape[1] == 0:
            return _diagnose(op, np.zeros((op.n, op.d0), dtype=complex), restricted=True)
        sub = solve_existence(restrict_to_subspace(op, basis), tol)
        if isinstance(sub, NoCertificate):
            return sub
        x = sub.X @ basis.conj().T
        return _diagnose(op, x, lambda_set=sub.lambda_set, restricted=True)

    classes = classify_all(op, tol)
    members = [(c.lam, w.y) for c in classes for w in c.witnesses if w.in_k_pp]
    rank = numerical_rank(np.column_stack([y for _, y in members]), tol) if members else 0

    candidates: list[RiccatiSolution] = []
    for c in classes:
        regular = [w.y for w in c.witnesses if w.in_k_pp]
        if len(regular) == op.n:
            lam_set = build_lambda(op, [(y, c.lam) for y in regular], tol)
            candidates.append(build_X_lambda(op, lam_set, tol))
    if candidates:
        # first minimum wins, so ties resolve towards the smaller eigenvalue
        best = min(candidates, key=lambda s: np.linalg.norm(s.X))
        if best.verified(op, tol):
            return best

    chosen = _select_greedy(members, op.n, tol)
    if chosen is None:
        return NoCertificate(
            reason=(
                f"only {rank} independent regular witnesses (need {op.n}); "
                "no eigenvalue carries a full set"
            ),
            n=op.n,
            k_pp_count=len(members),
            k_pp_rank=rank,
            classifications=classes,
        )
    lam_set = build_lambda(op, [(members[i][1], members[i][0]) for i in chosen], tol)
    sol = build_X_lambda(op, lam_set, tol)
    if not sol.verified(op, tol):
        return NoCertificate(
            reason=(
                f"constructed X failed verification (residual {sol.residual:.3e}, "
                f"graph defect {sol.graph_defect:.3e})"
            ),
            n=op.n,
            k_pp_count=len(members),
            k_pp_rank=rank,
            classifications=classes,
        )
    return sol


def oracle_graph_solutions(
    op: BlockOperator,
    tol: ToleranceProfile | None = None,
    allow_degenerate: bool = False,
    max_dim: int = 14,
) -> list[RiccatiSolution]:
    """All bounded solutions whose graphs are spanned by ``d0`` eigenvectors of ``B``.

    For every ``d0``-subset ``S`` of eigenvectors with invertible ``H0`` block
    ``W0``, emits ``X = W1 W0^{-1}``.  With a simple spectrum this is every
    bounded solution.  For a degenerate spectrum (``allow_degenerate=True``)
    only subsets of the computed eigenbasis are tried, so the list may be
    incomplete.

    Raises
    ------
    DegenerateSpectrum
        If ``B`` has a repeated eigenvalue and `allow_degenerate` is false.
    """
    tol = op.tol if tol is None else tol
    dim = op.d0 + op.n
    if dim > max_dim:
        raise ValueError(f"subset enumeration limited to d0 + n <= {max_dim}, got {dim}")
    eig = op.eig
    clusters = eig.clusters(tol.cluster_radius(op.norm))
    if not allow_degenerate and any(len(c) > 1 for c in clusters):
        raise DegenerateSpectrum("B has a repeated eigenvalue; oracle enumeration would be incomplete")
    vecs = eig.vectors
    found: list[RiccatiSolution] = []
    for subset in itertools.combinations(range(dim), op.d0):
        w = vecs[:, subset]
        w0, w1 = w[: op.d0], w[op.d0 :]
        if numerical_rank(w0, tol) < op.d0:
            continue
        try:
            x = solve_linear(w0.T, w1.T, tol).T
        except Singular:
            continue
        sol = _diagnose(op, x, subset=tuple(subset))
        if sol.residual > tol.residual_tol * sol.scale:
            continue
        if any(np.max(np.abs(s.X - x)) <= tol.residual_tol * (1.0 + np.abs(x).max()) for s in found):
            continue
        found.append(sol)
    return found
