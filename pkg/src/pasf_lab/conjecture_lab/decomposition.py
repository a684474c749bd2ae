"""Decompositions of the synthesis matrix over p-orthonormal bases.

For r = p != 2 the p-orthonormal bases of X are exactly the signed
permutation images of the standard pair, so the search is a finite
enumeration.  For r = p = 2 the isometry group is O(d) and the search is a
multistart least-squares fit over Cayley-parameterized orthogonal matrices.
"""
from __future__ import annotations

import itertools

import numpy as np
from scipy.optimize import least_squares

from ..frames import PASF, is_riesz_basis
from ..lp_core import is_isometry, signed_permutations
from .search import EXHAUSTIVE, HOLDS, INCONCLUSIVE, LOCAL_SEARCH, Budget, BudgetCounter, SearchReport

MODES = ("lin-comb", "multiple-of-sum", "onb-plus-riesz")
CITATIONS = {"lin-comb": "Conjecture 13", "multiple-of-sum": "Conjecture 14", "onb-plus-riesz": "Conjecture 141"}
EXACT_FIT = 1e-10
MAX_ENUM_DIM = 4
ORTHO_STARTS = 16
INVERTIBLE_COND = 1e12


def _fit_lincomb(Qs, T):
    A = np.stack([Q.ravel() for Q in Qs], axis=1)
    lam, *_ = np.linalg.lstsq(A, T.ravel(), rcond=None)
    return lam, float(np.max(np.abs(A @ lam - T.ravel())))


def _fit_multiple(Qs, T):
    B = sum(Qs)
    nb = float(np.sum(B * B))
    if nb == 0.0:
        return 0.0, float(np.max(np.abs(T)))
    mu = float(np.sum(B * T)) / nb
    return mu, float(np.max(np.abs(mu * B - T)))


def _invertible(R) -> bool:
    return np.linalg.matrix_rank(R) == R.shape[0] and np.linalg.cond(R) < INVERTIBLE_COND


def _enumerate(T, mode, M, counter):
    d = T.shape[0]
    group = list(signed_permutations(d))
    if mode == "onb-plus-riesz":
        for mu in (1.0, 2.0, -1.0):
            for Q in group:
                if not counter.tick():
                    return None, False
                R = T / mu - Q
                if _invertible(R):
                    return {"mu": mu, "Q": [Q], "R": R, "lambdas": [mu], "residual": 0.0}, True
        return None, True
    for m in range(1, M + 1):
        combos = (
            itertools.combinations(range(len(group)), m)
            if mode == "lin-comb"
            else itertools.combinations_with_replacement(range(len(group)), m)
        )
        for combo in combos:
            if not counter.tick():
                return None, False
            Qs = [group[i] for i in combo]
            if mode == "lin-comb":
                lam, res = _fit_lincomb(Qs, T)
                if res <= EXACT_FIT:
                    return {"lambdas": [float(v) for v in lam], "Q": Qs, "residual": res}, True
            else:
                mu, res = _fit_multiple(Qs, T)
                if res <= EXACT_FIT:
                    return {"mu": mu, "lambdas": [mu] * m, "Q": Qs, "residual": res}, True
    return None, True


def _cayley(a: np.ndarray, d: int) -> np.ndarray:
    K = np.zeros((d, d))
    K[np.triu_indices(d, 1)] = a
    K = K - K.T
    I = np.eye(d)
    return np.linalg.solve(I + K, I - K)


def _orthogonal_search(T, mode, M, counter, seed):
    d = T.shape[0]
    k = d * (d - 1) // 2
    U, s, Vt = np.linalg.svd(T)
    polar = U @ Vt
    if mode == "onb-plus-riesz":
        for mu in (1.0, 2.0, -1.0):
            for Q in (np.eye(d), -np.eye(d), polar, -polar):
                counter.tick()
                R = T / mu - Q
                if _invertible(R):
                    return {"mu": mu, "Q": [Q], "R": R, "lambdas": [mu], "residual": 0.0}, True
        return None, True
    rng = np.random.default_rng(seed)
    # every Q is D Cayley(a) with D in {I, reflection}, covering both components of O(d)
    refl = np.eye(d)
    refl[-1, -1] = -1.0
    for m in range(1, M + 1):
        for start in range(ORTHO_STARTS):
            flips = [refl if (start >> i) & 1 else np.eye(d) for i in range(m)]
            if start == 0:
                x0 = np.zeros(m * k)
                flips = [polar] + [np.eye(d)] * (m - 1)
            else:
                x0 = rng.standard_normal(m * k)

            def build(x):
                return [flips[i] @ _cayley(x[i * k : (i + 1) * k], d) for i in range(m)]

            def resid(x):
                Qs = build(x)
                if mode == "lin-comb":
                    lam, _ = _fit_lincomb(Qs, T)
                    return (sum(l * Q for l, Q in zip(lam, Qs)) - T).ravel()
                mu, _ = _fit_multiple(Qs, T)
                return (mu * sum(Qs) - T).ravel()

            if k == 0:
                x = x0
                counter.tick()
            else:
                sol = least_squares(resid, x0, xtol=1e-15, ftol=1e-15, gtol=1e-15, max_nfev=400)
                x = sol.x
                counter.tick(int(sol.nfev))
            Qs = build(x)
            if mode == "lin-comb":
                lam, res = _fit_lincomb(Qs, T)
                payload = {"lambdas": [float(v) for v in lam], "Q": Qs, "residual": res}
            else:
                mu, res = _fit_multiple(Qs, T)
                payload = {"mu": mu, "lambdas": [mu] * m, "Q": Qs, "residual": res}
            if res <= EXACT_FIT:
                return payload, False
            if counter.exhausted:
                return None, False
    return None, False


def _search(T, mode, M, counter, seed, euclidean):
    if euclidean:
        return _orthogonal_search(T, mode, M, counter, seed)
    return _enumerate(T, mode, M, counter)


def _jsonable(payload):
    if payload is None:
        return None
    out = {k: v for k, v in payload.items() if k not in ("Q", "R")}
    out["Q"] = [Q.tolist() for Q in payload["Q"]]
    if "R" in payload:
        out["R"] = payload["R"].tolist()
    return out


def decomposition_search(
    P: PASF,
    mode: str,
    M: int = 2,
    budget: Budget | None = None,
    *,
    seed: int = 0,
    tol: float = 1e-9,
) -> SearchReport:
    """Express T over p-orthonormal bases; the functional side is reported alongside."""
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}")
    if P.n != P.d:
        raise ValueError("decomposition needs a square system (n = d)")
    if P.r != P.p and P.d > 1:
        raise ValueError("p-orthonormal bases of (R^d, r) exist only when r = p (d >= 2)")
    if M < 1:
        raise ValueError("M must be at least 1")
    euclidean = P.p == 2.0 or P.d == 1
    if not euclidean and P.d > MAX_ENUM_DIM:
        raise ValueError(f"exhaustive isometry enumeration is limited to d <= {MAX_ENUM_DIM}")
    if mode == "lin-comb" and not is_riesz_basis(P, tol):
        raise ValueError("lin-comb mode requires a Riesz basis input")
    T = np.array(P.T)
    counter = BudgetCounter(budget)
    payload, complete = _search(T, mode, M, counter, seed, euclidean)
    f_payload, _ = _search(np.array(P.F), mode, M, BudgetCounter(budget), seed, euclidean)
    strategy = LOCAL_SEARCH if euclidean and P.d > 1 else EXHAUSTIVE
    details = {"mode": mode, "M": M, "complete": complete, "f_side": _jsonable(f_payload)}
    if payload is not None:
        recon = (
            payload["mu"] * (payload["Q"][0] + payload["R"])
            if mode == "onb-plus-riesz"
            else sum(l * Q for l, Q in zip(payload["lambdas"], payload["Q"]))
        )
        payload["reconstruction_error"] = float(np.max(np.abs(recon - T)))
        payload["isometries_ok"] = all(bool(is_isometry(Q, P.r, 1e-9)) for Q in payload["Q"])
        if mode == "onb-plus-riesz":
            payload["riesz_part_invertible"] = bool(_invertible(payload["R"]))
        return SearchReport(
            HOLDS, _jsonable(payload), counter.nodes, strategy, seed, counter.wall_budget_exceeded,
            CITATIONS[mode], details,
        )
    return SearchReport(
        INCONCLUSIVE, None, counter.nodes, strategy, seed, counter.wall_budget_exceeded, CITATIONS[mode], details
    )
