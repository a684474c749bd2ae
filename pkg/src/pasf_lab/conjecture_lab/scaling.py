"""Scalability via a linear solve, and the raw Kothe-Lorch condition checks."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..frames import PASF, frame_operator, is_riesz_basis
from ..lp_core import op_norm

SCALABLE_RESIDUAL = 1e-9


@dataclass(frozen=True)
class ScalingResult:
    c: np.ndarray
    residual: float
    scalable: bool
    a: np.ndarray
    b: np.ndarray
    signed: bool

    def apply(self, P: PASF) -> PASF:
        return P.with_elements(F=self.a[:, None] * P.F, T=P.T * self.b[None, :], label=f"{P.label} scaled".strip())

    def to_dict(self) -> dict:
        return {
            "c": [float(v) for v in self.c],
            "residual": self.residual,
            "scalable": self.scalable,
            "a": [float(v) for v in self.a],
            "b": [float(v) for v in self.b],
            "uses_negative_scalars": self.signed,
        }


def scaling_solve(P: PASF) -> ScalingResult:
    """Minimum-norm c with sum_j c_j tau_j f_j = I; a_j b_j = c_j.

    The sign of c_j is carried by the functional scalar a_j so that the
    product a_j b_j reproduces c_j exactly.
    """
    d, n = P.d, P.n
    A = np.einsum("in,nk->ikn", P.T, P.F).reshape(d * d, n)
    c, *_ = np.linalg.lstsq(A, np.eye(d).ravel(), rcond=None)
    residual = float(np.linalg.norm(A @ c - np.eye(d).ravel()))
    root = np.sqrt(np.abs(c))
    return ScalingResult(
        c=c,
        residual=residual,
        scalable=residual <= SCALABLE_RESIDUAL,
        a=np.sign(c) * root,
        b=root,
        signed=bool(np.any(c < -SCALABLE_RESIDUAL)),
    )


def kothe_lorch_check(P: PASF, tol: float = 1e-9, *, seed: int = 0) -> dict:
    """Report the three conditions separately; no verdict is synthesized."""
    rb = is_riesz_basis(P, tol)
    S = frame_operator(P)
    defect = op_norm(S - np.eye(P.d), P.r, P.r, seed=seed).upper
    tn, fn = P.vector_norms(), P.functional_norms()
    sandwich = {
        "inf_tau": float(tn.min()),
        "sup_tau": float(tn.max()),
        "inf_f": float(fn.min()),
        "sup_f": float(fn.max()),
    }
    sandwich["ok"] = sandwich["inf_tau"] > tol and sandwich["inf_f"] > tol
    return {
        "riesz_basis": {"ok": rb.ok, "defect": rb.defect},
        "expansion_identity": {"ok": defect <= tol, "defect": defect},
        "norm_sandwich": sandwich,
        "verdict": None,
        "citation": "Kothe-Lorch problem",
    }
