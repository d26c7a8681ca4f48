"""Turn library results into plain, JSON-ready dictionaries.

Every section only holds lists, strings, bools, ints and floats, so a report
serialises identically on every run.  Complex numbers are ``[re, im]``.
"""
from __future__ import annotations

import numpy as np

from . import __version__
from .blockmodel import BlockOperator, HypothesisReport
from .eigclassify import EigenvalueClassification
from .fileformat import encode_matrix, encode_vector, tolerances_dict
from .herglotz import AtomTable, ScanReport
from .numkernel import ToleranceProfile
from .riccati import NoCertificate, RiccatiSolution

__all__ = [
    "report_header",
    "hypothesis_section",
    "classification_section",
    "atom_section",
    "scan_section",
    "solution_entry",
    "no_certificate_section",
]


def report_header(command: str, digest: str, tol: ToleranceProfile, flags: dict | None = None) -> dict:
    return {
        "tool": {"name": "blockriccati", "version": __version__},
        "command": command,
        "input_digest": digest,
        "tolerances": tolerances_dict(tol),
        "flags": flags or {},
    }


def hypothesis_section(hyp: HypothesisReport) -> dict:
    return {
        "hermitian_ok": hyp.hermitian_ok,
        "cyclic_ok": hyp.cyclic_ok,
        "krylov_rank": hyp.krylov_rank,
        "rank_gap": hyp.rank_gap,
        "d0": hyp.d0,
        "n": hyp.n,
    }


def classification_section(classes: list[EigenvalueClassification]) -> dict:
    entries = []
    for c in classes:
        witnesses = []
        for w in c.witnesses:
            item = {"case": w.tag.value, "y": encode_vector(w.y), "residual": w.residual, "in_k_pp": w.in_k_pp}
            if w.x is not None:
                item["x"] = encode_vector(w.x)
            witnesses.append(item)
        entries.append(
            {
                "lambda": c.lam,
                "multiplicity": c.multiplicity,
                "in_spec_a0": c.in_spec_a0,
                "decoupled": c.decoupled,
                "cases": [t.value for t in c.tags],
                "excluded_from_k_pp": c.has_case_iii,
                "witnesses": witnesses,
            }
        )
    return {
        "eigenvalues": entries,
        "excluded_from_k_pp": [c.lam for c in classes if c.has_case_iii],
        "k_pp_count": sum(w.in_k_pp for c in classes for w in c.witnesses),
    }


def atom_section(table: AtomTable) -> dict:
    return {
        "atoms": [{"lambda": a.lam, "mass": a.mass, "block": encode_matrix(a.omega_block)} for a in table.entries],
        "total_mass": table.total_mass,
    }


def scan_section(scan: ScanReport) -> dict:
    grid = scan.grid
    return {
        "grid": {"min": float(grid.min()), "max": float(grid.max()), "points": int(grid.size)},
        "eps_ladder": [float(e) for e in scan.eps_ladder],
        "growth_factor": scan.growth_factor,
        "atom_floor": scan.atom_floor,
        "flagged_singular": [float(s) for s in scan.flagged_singular],
        "flagged_atoms": [{"lambda": float(lam), "mass": float(m)} for lam, m in scan.flagged_atoms],
        "singular_continuous": [float(s) for s in scan.singular_continuous],
        "singular_continuous_expected_empty": scan.expected_sc_empty,
    }


def solution_entry(op: BlockOperator, sol: RiccatiSolution, source: str, tol: ToleranceProfile) -> dict:
    entry = {
        "source": source,
        "X": encode_matrix(sol.X),
        "residual": sol.residual,
        "graph_defect": sol.graph_defect,
        "scale": sol.scale,
        "verified": sol.verified(op, tol),
        "restricted": sol.restricted,
    }
    if sol.lambda_set is not None:
        entry["lambda_set"] = [{"lambda": lam, "y": encode_vector(y)} for y, lam in sol.lambda_set.pairs]
    if sol.subset is not None:
        entry["subset"] = list(sol.subset)
    return entry


def no_certificate_section(nc: NoCertificate) -> dict:
    return {
        "reason": nc.reason,
        "n": nc.n,
        "k_pp_count": nc.k_pp_count,
        "k_pp_rank": nc.k_pp_rank,
        "note": "no certificate is not a proof that no solution exists",
        "classification": classification_section(nc.classifications),
    }


def same_matrix(a: np.ndarray, b: np.ndarray, rtol: float) -> bool:
    return bool(np.max(np.abs(a - b)) <= rtol * (1.0 + np.max(np.abs(a))))

