"""Norm-profile inequalities, majorization and constructive inverse design."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import least_squares

from ..frames import PASF
from ..lp_core import check_exponent, functional_norm, p_norm
from .search import HOLDS, INCONCLUSIVE, Budget, BudgetCounter, SearchReport

DESIGN_MODES = ("tight-with-norms", "frame-operator-with-norms")
WITNESS_RESIDUAL = 1e-6
DEFAULT_STARTS = 64
REL_SLACK = 1e-12


@dataclass(frozen=True)
class NormProfile:
    a: tuple[float, ...]
    b: tuple[float, ...]
    c: tuple[float, ...]
    exponents: tuple[float, float, float] = (2.0, 2.0, 2.0)

    def __post_init__(self):
        a, b, c = (tuple(float(v) for v in x) for x in (self.a, self.b, self.c))
        if not len(a) == len(b) == len(c):
            raise ValueError("a, b, c must have equal length")
        if any(v < 0 for v in a + b + c):
            raise ValueError("norm profile entries must be nonnegative")
        ex = tuple(float(e) for e in self.exponents)
        if len(ex) != 3 or any(not e > 0 for e in ex):
            raise ValueError("exponents (p, q, r) must be three positive reals")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "exponents", ex)

    @property
    def n(self) -> int:
        return len(self.a)

    def families(self):
        p, q, r = self.exponents
        return (("a", self.a, p), ("b", self.b, q), ("c", self.c, r))


def _leq(x: float, y: float) -> bool:
    return x <= y + REL_SLACK * max(1.0, abs(x), abs(y))


def fundamental_inequality_check(profile: NormProfile, d: int) -> dict:
    """max_j v_j^e <= (1/d) sum_j v_j^e for each family (a, p), (b, q), (c, r)."""
    if d < 1 or profile.n < d:
        raise ValueError(f"need n >= d >= 1, got n = {profile.n}, d = {d}")
    out = {}
    for name, vals, e in profile.families():
        powered = np.asarray(vals) ** e
        lhs, rhs = float(powered.max()), float(powered.sum() / d)
        out[name] = {"ok": _leq(lhs, rhs), "max": lhs, "mean_bound": rhs}
    out["combined"] = all(out[k]["ok"] for k in ("a", "b", "c"))
    return out


def majorization_check(profile: NormProfile, lam) -> dict:
    """Prefix domination by lam and equal totals, per family, after sorting descending."""
    lam = np.asarray(lam, dtype=float).ravel()
    if lam.size == 0 or np.any(lam <= 0):
        raise ValueError("lambda must be a nonempty list of positive reals")
    if np.any(np.diff(lam) > 0):
        raise ValueError("lambda must be sorted in descending order")
    d = lam.size
    lam_prefix = np.cumsum(lam)
    out = {}
    for name, vals, e in profile.families():
        powered = np.sort(np.asarray(vals) ** e)[::-1]
        prefix = np.cumsum(powered)
        failures = [m + 1 for m in range(min(d, powered.size)) if not _leq(prefix[m], lam_prefix[m])]
        total_ok = abs(prefix[-1] - lam_prefix[-1]) <= REL_SLACK * max(1.0, lam_prefix[-1]) * 10
        out[name] = {"ok": not failures and total_ok, "prefix_failures": failures, "total_equal": bool(total_ok)}
    out["combined"] = all(out[k]["ok"] for k in ("a", "b", "c"))
    return out


def _structured_start(d, n, targets):
    cols = [min(d - 1, (j * d) // n) for j in range(n)]
    T = np.zeros((d, n))
    F = np.zeros((n, d))
    for j, k in enumerate(cols):
        T[k, j] = 1.0 if targets is None else targets.b[j]
        F[j, k] = 1.0 if targets is None else targets.a[j]
    return F, T


def inverse_design_search(
    mode: str,
    d: int,
    n: int,
    targets: NormProfile | None = None,
    S_target=None,
    budget: Budget | None = None,
    seed: int = 0,
    *,
    p: float = 2.0,
    r: float = 2.0,
    starts: int = DEFAULT_STARTS,
) -> SearchReport:
    """Penalized multistart search for a frame with prescribed norms.

    Only ever produces existence witnesses; failure is reported as
    inconclusive since local optimization cannot prove nonexistence.
    """
    if mode not in DESIGN_MODES:
        raise ValueError(f"mode must be one of {DESIGN_MODES}")
    if n < d or d < 1:
        raise ValueError(f"infeasible shape: need n >= d >= 1, got n = {n}, d = {d}")
    r = check_exponent(r)
    if targets is not None and targets.n != n:
        raise ValueError("target profile length differs from n")
    if mode == "frame-operator-with-norms":
        if S_target is None:
            raise ValueError("frame-operator mode requires S_target")
        S_target = np.asarray(S_target, dtype=float)
        if S_target.shape != (d, d):
            raise ValueError("S_target must be d x d")
        ev = np.linalg.eigvals(S_target)
        if np.any(np.abs(ev.imag) > 1e-12) or np.any(ev.real <= 0):
            raise ValueError("S_target must have positive eigenvalues")
    if targets is None and mode == "tight-with-norms":
        raise ValueError("tight mode needs norm targets")

    def residuals(x):
        F = x[: n * d].reshape(n, d)
        T = x[n * d :].reshape(d, n)
        S = T @ F
        if mode == "tight-with-norms":
            lam = np.trace(S) / d
            core = (S - lam * np.eye(d)).ravel()
        else:
            core = (S - S_target).ravel()
        if targets is None:
            return core
        fa = [functional_norm(F[j], r) - targets.a[j] for j in range(n)]
        tb = [p_norm(T[:, j], r) - targets.b[j] for j in range(n)]
        pc = [abs(F[j] @ T[:, j]) - targets.c[j] for j in range(n)]
        return np.concatenate([core, fa, tb, pc])

    counter = BudgetCounter(budget)
    rng = np.random.default_rng(seed)
    F0, T0 = _structured_start(d, n, targets)
    if mode == "frame-operator-with-norms" and targets is None:
        F0 = np.linalg.pinv(T0) @ S_target
    inits = [np.concatenate([F0.ravel(), T0.ravel()])]
    scale = 1.0 if targets is None else max(1.0, max(targets.a + targets.b))
    best_val, best_x = np.inf, None
    for s in range(starts):
        x0 = inits[0] if s == 0 else scale * rng.standard_normal(2 * n * d) / np.sqrt(d)
        val0 = float(np.sum(residuals(x0) ** 2))
        if val0 <= 1e-24:
            x, val = x0, val0
            counter.tick()
        else:
            sol = least_squares(residuals, x0, method="trf", xtol=1e-15, ftol=1e-15, gtol=1e-15, max_nfev=2000)
            x, val = sol.x, float(np.sum(sol.fun ** 2))
            counter.tick(int(sol.nfev))
        if val < best_val:
            best_val, best_x = val, x
        if best_val <= 1e-20 or counter.exhausted:
            break

    F = best_x[: n * d].reshape(n, d)
    T = best_x[n * d :].reshape(d, n)
    witness = {"F": F.tolist(), "T": T.tolist(), "residual": best_val, "p": float(p), "r": float(r)}
    citation = "Fundamental inequality conjecture" if mode == "tight-with-norms" else "Conjecture GCONJECTURE"
    status = HOLDS if best_val <= WITNESS_RESIDUAL else INCONCLUSIVE
    return SearchReport(
        status,
        witness if status == HOLDS else None,
        counter.nodes,
        "local-search",
        seed,
        counter.wall_budget_exceeded,
        citation,
        {"mode": mode, "best_residual": best_val, "starts_used": s + 1, "d": d, "n": n},
    )


def witness_pasf(report: SearchReport) -> PASF:
    w = report.witness
    return PASF(np.array(w["F"]), np.array(w["T"]), w["p"], w["r"], "inverse-design witness")
