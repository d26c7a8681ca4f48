"""Spectral analysis and graph solutions for Hermitian 2x2 block operators.

``B = [[A0, V], [V^H, A1]]`` acting on ``H0 + H1`` with finite-dimensional
blocks.  The package classifies the eigenvalues of ``B``, evaluates the
Herglotz matrix of its ``H1`` compression and constructs verified solutions
of ``A1 X - X A0 - X V X + V^H = 0``.
"""

__version__ = "0.1.0"

from .blockmodel import BlockOperator, HypothesisReport, check_hypothesis, multiplicity_of_spectrum
from .eigclassify import CaseTag, EigenvalueClassification, Witness, classify_all
from .errors import BlockRiccatiError
from .herglotz import AtomTable, ScanReport, atom_table, boundary_scan, m_resolvent, m_schur
from .numkernel import ToleranceProfile, hermitian_eig
from .riccati import (
    NoCertificate,
    RiccatiSolution,
    build_lambda,
    build_X_lambda,
    oracle_graph_solutions,
    riccati_residual,
    solve_existence,
)

__all__ = [
    "__version__",
    "AtomTable",
    "BlockOperator",
    "BlockRiccatiError",
    "CaseTag",
    "EigenvalueClassification",
    "HypothesisReport",
    "NoCertificate",
    "RiccatiSolution",
    "ScanReport",
    "ToleranceProfile",
    "Witness",
    "atom_table",
    "boundary_scan",
    "build_X_lambda",
    "build_lambda",
    "check_hypothesis",
    "classify_all",
    "hermitian_eig",
    "m_resolvent",
    "m_schur",
    "multiplicity_of_spectrum",
    "oracle_graph_solutions",
    "riccati_residual",
    "solve_existence",
]
