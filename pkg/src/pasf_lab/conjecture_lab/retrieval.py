"""Exact phase and norm retrieval certification over the reals via sign patterns."""
from __future__ import annotations

import itertools

import numpy as np

from ..frames import PASF
from ..lp_core import dual_exponent, p_norm
from .search import EXHAUSTIVE, HOLDS, INCONCLUSIVE, REFUTED, SearchReport

MAX_N = 20
SAMPLES = 2000


def _null_space(A: np.ndarray, tol: float) -> np.ndarray:
    _, s, vt = np.linalg.svd(A)
    scale = s[0] if s.size else 0.0
    rank = int(np.sum(s > tol * max(scale, 1.0)))
    return vt[rank:].T


def _is_signed_row_match(X: np.ndarray, Y: np.ndarray, tol: float) -> bool:
    """True when rows of Y are a signed rearrangement of rows of X."""
    unused = list(range(X.shape[0]))
    for row in Y:
        for pos, i in enumerate(unused):
            if np.max(np.abs(X[i] - row)) <= tol or np.max(np.abs(X[i] + row)) <= tol:
                unused.pop(pos)
                break
        else:
            return False
    return True


def _snap(v: np.ndarray) -> np.ndarray:
    near = np.round(v)
    return np.where(np.abs(v - near) <= 1e-12, near, v)


def _normalize(x, y):
    """Scale to max-abs 1, put the pair with fewer negative x entries first, snap near-integers."""
    scale = max(np.max(np.abs(x)), np.max(np.abs(y)))
    x, y = x / scale, y / scale
    if np.sum(y < -1e-12) < np.sum(x < -1e-12):
        x, y = y, x
    nz = np.flatnonzero(np.abs(x) > 1e-12)
    if nz.size and x[nz[0]] < 0:
        x, y = -x, -y
    return _snap(x), _snap(y)


def _phase_witness(A, K, d, tol):
    """A kernel element (x, y) with y != +-x and |Ax| = |Ay|, or None."""
    cols = [K[:, i] for i in range(K.shape[1])]
    cands = cols + [u + v for u, v in itertools.combinations(cols, 2)] + [u - v for u, v in itertools.combinations(cols, 2)]
    rng = np.random.default_rng(0)
    cands += [K @ rng.standard_normal(K.shape[1]) for _ in range(16)]
    for v in cands:
        x, y = v[:d].copy(), v[d:].copy()
        if np.max(np.abs(v)) <= tol:
            continue
        x, y = _normalize(x, y)
        if min(np.max(np.abs(y - x)), np.max(np.abs(y + x))) > 1e-6:
            if np.max(np.abs(np.abs(A @ x) - np.abs(A @ y))) <= 1e-12 * max(1.0, np.max(np.abs(A))):
                return x, y
    return None


def retrieval_check(
    P: PASF,
    side: str = "vector",
    kind: str = "phase",
    *,
    tol: float = 1e-9,
    seed: int = 0,
    samples: int = SAMPLES,
) -> SearchReport:
    """Decide phase or norm retrieval for the vector side (F) or functional side (T^t)."""
    if side not in ("vector", "functional"):
        raise ValueError("side must be 'vector' or 'functional'")
    if kind not in ("phase", "norm"):
        raise ValueError("kind must be 'phase' or 'norm'")
    if P.n > MAX_N:
        raise ValueError(f"sign enumeration limited to n <= {MAX_N}")
    A = P.F if side == "vector" else P.T.T
    n, d = A.shape
    norm_e = P.r if side == "vector" else dual_exponent(P.r)
    rng = np.random.default_rng(seed)
    nodes = 0
    uncertified = []
    citation = "Phase retrieval" if kind == "phase" else "Norm retrieval"

    for tail in itertools.product((1.0, -1.0), repeat=n - 1):
        eps = np.array((1.0,) + tail)
        nodes += 1
        K = _null_space(np.hstack([eps[:, None] * A, -A]), tol)
        if K.shape[1] == 0:
            continue
        Kx, Ky = K[:d], K[d:]
        plus = np.max(np.abs(Ky - Kx)) <= tol
        minus = np.max(np.abs(Ky + Kx)) <= tol
        if plus or minus:
            continue
        if kind == "phase":
            w = _phase_witness(A, K, d, tol)
            if w is None:
                uncertified.append([int(e) for e in eps])
                continue
            x, y = w
            return SearchReport(
                REFUTED,
                {"x": x.tolist(), "y": y.tolist(), "sign_pattern": [int(e) for e in eps], "side": side},
                nodes, EXHAUSTIVE, seed, False, citation,
            )
        # norm retrieval on this kernel
        if _is_signed_row_match(Kx, Ky, tol):
            continue
        if norm_e == 2.0 and np.max(np.abs(Ky.T @ Ky - Kx.T @ Kx)) <= tol:
            continue
        for _ in range(samples):
            z = rng.standard_normal(K.shape[1])
            x, y = Kx @ z, Ky @ z
            gap = abs(p_norm(x, norm_e) - p_norm(y, norm_e))
            if gap > 1e-9 * max(1.0, p_norm(x, norm_e)):
                x, y = _normalize(x, y)
                return SearchReport(
                    REFUTED,
                    {"x": x.tolist(), "y": y.tolist(), "sign_pattern": [int(e) for e in eps], "side": side,
                     "norm_gap": abs(p_norm(x, norm_e) - p_norm(y, norm_e))},
                    nodes, EXHAUSTIVE, seed, False, citation,
                )
        uncertified.append([int(e) for e in eps])

    details = {"patterns_checked": nodes, "side": side, "kind": kind, "norm_exponent": norm_e}
    if uncertified:
        details["uncertified_patterns"] = uncertified
        return SearchReport(INCONCLUSIVE, None, nodes, EXHAUSTIVE, seed, False, citation, details)
    return SearchReport(HOLDS, {"patterns_checked": nodes}, nodes, EXHAUSTIVE, seed, False, citation, details)
