"""Duffin-Schaeffer style iterative reconstruction for p-ASFs."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .frames import PASF, frame_bounds, frame_operator
from .lp_core import op_norm, p_norm

CONDITION_SLACK = 1e-12


@dataclass(frozen=True)
class AlgorithmCondition:
    condition_value: float
    ratio_bound: float
    holds: bool
    a: float
    b: float


@dataclass
class ReconstructionTrace:
    iterates: list[np.ndarray]
    errors: list[float]
    ratio_bound: float
    condition_value: float
    condition_holds: bool
    error_kind: str
    converged: bool = False
    a: float = 0.0
    b: float = 0.0
    notes: list[str] = field(default_factory=list)

    @property
    def bound_guaranteed(self) -> bool:
        return self.condition_holds and self.error_kind == "error"

    def to_dict(self, include_iterates: bool = False) -> dict:
        out = {
            "errors": [float(e) for e in self.errors],
            "ratio_bound": self.ratio_bound,
            "condition_value": self.condition_value,
            "condition_holds": self.condition_holds,
            "error_kind": self.error_kind,
            "converged": self.converged,
            "a": self.a,
            "b": self.b,
        }
        if include_iterates:
            out["iterates"] = [[float(v) for v in x] for x in self.iterates]
        return out


def check_algorithm_condition(P: PASF, *, seed: int = 0) -> AlgorithmCondition:
    """Evaluate ||I - 2/(a+b) S||_r against (b-a)/(b+a) with certified a, b."""
    fb = frame_bounds(P, seed=seed)
    a, b = fb.a, fb.b
    if not a > 0.0:
        raise ValueError("frame has no positive lower bound; the algorithm needs a > 0")
    S = frame_operator(P)
    cv = op_norm(np.eye(P.d) - (2.0 / (a + b)) * S, P.r, P.r, seed=seed).upper
    ratio = (b - a) / (b + a)
    return AlgorithmCondition(cv, ratio, cv <= ratio + CONDITION_SLACK, a, b)


def duffin_schaeffer(
    P: PASF,
    c,
    max_iters: int = 100,
    tol: float = 1e-12,
    ground_truth=None,
    *,
    seed: int = 0,
) -> ReconstructionTrace:
    """Reconstruct x from coefficients c (intended as F x).

    Iterates x_k = x_{k-1} + 2/(a+b) (T c - S x_{k-1}) from x_0 = 0, which is
    the measurement-only form of x_{k-1} + 2/(a+b) S (x - x_{k-1}).  The
    tracked quantity is ||x_k - x||_r when ``ground_truth`` is given, else the
    residual ||T c - S x_k||_r; iteration stops once it drops to ``tol``.
    """
    c = np.asarray(c, dtype=float).ravel()
    if c.size != P.n:
        raise ValueError(f"coefficient vector has length {c.size}, frame has n = {P.n}")
    cond = check_algorithm_condition(P, seed=seed)
    S = frame_operator(P)
    step = 2.0 / (cond.a + cond.b)
    rhs = P.T @ c
    truth = None if ground_truth is None else np.asarray(ground_truth, dtype=float).ravel()

    def tracked(x):
        if truth is not None:
            return p_norm(x - truth, P.r)
        return p_norm(rhs - S @ x, P.r)

    x = np.zeros(P.d)
    iterates, errors = [x.copy()], [tracked(x)]
    converged = errors[0] <= tol
    for _ in range(max_iters):
        if converged:
            break
        x = x + step * (rhs - S @ x)
        iterates.append(x.copy())
        errors.append(tracked(x))
        converged = errors[-1] <= tol

    notes = []
    if not cond.holds:
        notes.append("hypothesis fails: geometric error bound not guaranteed")
    return ReconstructionTrace(
        iterates=iterates,
        errors=errors,
        ratio_bound=cond.ratio_bound,
        condition_value=cond.condition_value,
        condition_holds=cond.holds,
        error_kind="error" if truth is not None else "residual",
        converged=converged,
        a=cond.a,
        b=cond.b,
        notes=notes,
    )
