"""Finite-dimensional l^r arithmetic and certified operator-norm brackets.

Every frame bound in the package is computed here.  Operator norms are
reported as an :class:`OperatorNormEstimate`: a two-sided bracket plus a
witness vector that reproduces the achieved end of the bracket, so callers
can always re-check what they were told.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Iterator

import numpy as np
from scipy import optimize

__all__ = [
    "INF",
    "OperatorNormEstimate",
    "IsometryResult",
    "check_exponent",
    "dual_exponent",
    "p_norm",
    "functional_norm",
    "dual_vector",
    "norm_ratio",
    "op_norm",
    "gain_lower_bound",
    "is_isometry",
    "is_signed_permutation",
    "signed_permutations",
]

INF = math.inf

DEFAULT_STARTS = 64
MAX_ITERS = 500
CONV_TOL = 1e-12
HEURISTIC_SLACK = 0.05
# sign-vertex enumeration is exact but exponential in the enumerated side
VERTEX_LIMIT = 16
MAX_SIGNED_PERM_DIM = 8

EXACT_METHODS = frozenset(
    {
        "exact-diagonal",
        "exact-p1",
        "exact-pinf",
        "exact-spectral",
        "exact-vertex",
        "exact-kernel",
    }
)


@dataclass(frozen=True)
class OperatorNormEstimate:
    """Bracket ``lower <= value <= upper`` on a sup- or inf-type gain.

    For ``kind == "sup"`` (an operator norm) the witness achieves ``lower``;
    for ``kind == "inf"`` (a lower gain) it achieves ``upper``.  Either way
    :attr:`achieved` is the value reproduced by evaluating the witness.
    """

    lower: float
    upper: float
    witness: np.ndarray
    method: str
    r_in: float
    r_out: float
    starts: int = 0
    seed: int = 0
    kind: str = "sup"
    heuristic: bool = False

    @property
    def exact(self) -> bool:
        return self.method in EXACT_METHODS

    @property
    def achieved(self) -> float:
        return self.lower if self.kind == "sup" else self.upper

    @property
    def value(self) -> float:
        """Best point estimate: the achieved end of the bracket."""
        return self.achieved

    def to_dict(self) -> dict:
        return {
            "lower": self.lower,
            "upper": self.upper,
            "witness": [float(v) for v in self.witness],
            "method": self.method,
            "r_in": _exp_json(self.r_in),
            "r_out": _exp_json(self.r_out),
            "starts": self.starts,
            "seed": self.seed,
            "kind": self.kind,
            "heuristic": self.heuristic,
        }


@dataclass(frozen=True)
class IsometryResult:
    ok: bool
    witness: np.ndarray | None = None
    ratio: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "ok", bool(self.ok))

    def __bool__(self) -> bool:
        return self.ok


def _exp_json(e: float):
    return "inf" if e == INF else e


def check_exponent(e) -> float:
    if isinstance(e, str) and e.lower() in ("inf", "infinity"):
        return INF
    e = float(e)
    if not e >= 1.0:
        raise ValueError(f"exponent must be >= 1, got {e}")
    return e


def dual_exponent(e) -> float:
    """Conjugate index q with 1/p + 1/q = 1."""
    e = check_exponent(e)
    if e == 1.0:
        return INF
    if e == INF:
        return 1.0
    return e / (e - 1.0)


def p_norm(v, e) -> float:
    e = check_exponent(e)
    a = np.abs(np.asarray(v, dtype=float)).ravel()
    if a.size == 0:
        return 0.0
    if e == INF:
        return float(a.max())
    if e == 1.0:
        return float(a.sum())
    m = a.max()
    if m == 0.0:
        return 0.0
    if e == 2.0:
        return float(m * math.sqrt(np.sum((a / m) ** 2)))
    return float(m * np.sum((a / m) ** e) ** (1.0 / e))


def functional_norm(row, r) -> float:
    """Norm of ``x -> row @ x`` on (R^d, ||.||_r), i.e. the dual-exponent norm."""
    return p_norm(row, dual_exponent(r))


def dual_vector(x, e) -> np.ndarray:
    """Unit vector y in the e*-norm with ``y @ x == ||x||_e``."""
    e = check_exponent(e)
    x = np.asarray(x, dtype=float)
    nx = p_norm(x, e)
    if nx == 0.0:
        return np.zeros_like(x)
    if e == 1.0:
        return np.sign(x)
    if e == INF:
        y = np.zeros_like(x)
        k = int(np.argmax(np.abs(x)))
        y[k] = np.sign(x[k])
        return y
    a = np.abs(x) / nx
    return np.sign(x) * a ** (e - 1.0)


def norm_ratio(A, x, r_in, r_out) -> float:
    nx = p_norm(x, r_in)
    if nx == 0.0:
        raise ValueError("witness must be nonzero")
    return p_norm(np.asarray(A, dtype=float) @ np.asarray(x, dtype=float), r_out) / nx


def _as_matrix(A) -> np.ndarray:
    A = np.asarray(A, dtype=float)
    if A.ndim == 1:
        A = A.reshape(1, -1)
    if A.ndim != 2 or A.size == 0:
        raise ValueError("operator must be a nonempty 2-D array")
    if not np.all(np.isfinite(A)):
        raise ValueError("operator has non-finite entries")
    return A


def _basis(n: int, j: int) -> np.ndarray:
    x = np.zeros(n)
    x[j] = 1.0
    return x


def _canonical_direction(x: np.ndarray) -> np.ndarray:
    """Scale to max-abs 1 with the first significant entry positive."""
    x = np.asarray(x, dtype=float)
    m = np.max(np.abs(x))
    if m == 0.0:
        return x
    x = x / m
    x[np.abs(x) < 1e-14] = 0.0
    nz = np.flatnonzero(x)
    if nz.size and x[nz[0]] < 0:
        x = -x
    return x


def _sign_vertices(k: int) -> Iterator[np.ndarray]:
    # one representative per +-pair: first coordinate fixed to +1
    for tail in itertools.product((1.0, -1.0), repeat=k - 1):
        yield np.array((1.0,) + tail)


def _closed_form(A: np.ndarray, r_in: float, r_out: float):
    m, n = A.shape
    if m == n and r_in == r_out and np.count_nonzero(A - np.diag(np.diag(A))) == 0:
        k = int(np.argmax(np.abs(np.diag(A))))
        return float(abs(A[k, k])), _basis(n, k), "exact-diagonal"
    if r_in == 1.0:
        cols = [p_norm(A[:, j], r_out) for j in range(n)]
        j = int(np.argmax(cols))
        return cols[j], _basis(n, j), "exact-p1"
    if r_out == INF:
        q = dual_exponent(r_in)
        rows = [p_norm(A[i], q) for i in range(m)]
        i = int(np.argmax(rows))
        x = dual_vector(A[i], q)
        if not np.any(x):
            x = _basis(n, 0)
        return rows[i], x, "exact-pinf"
    if r_in == 2.0 and r_out == 2.0:
        _, s, vt = np.linalg.svd(A)
        return float(s[0]), vt[0].copy(), "exact-spectral"
    if r_out == 1.0 and m <= VERTEX_LIMIT:
        q = dual_exponent(r_in)
        best, best_z = -1.0, None
        for z in _sign_vertices(m):
            val = p_norm(A.T @ z, q)
            if val > best:
                best, best_z = val, z
        x = dual_vector(A.T @ best_z, q)
        if not np.any(x):
            x = _basis(n, 0)
        return best, x, "exact-vertex"
    if r_in == INF and n <= VERTEX_LIMIT:
        best, best_x = -1.0, None
        for x in _sign_vertices(n):
            val = p_norm(A @ x, r_out)
            if val > best:
                best, best_x = val, x
        return best, best_x, "exact-vertex"
    return None


def _boyd_single(A, x, r_in, r_out, q_in, max_iters, tol):
    x = x / p_norm(x, r_in)
    g = p_norm(A @ x, r_out)
    for _ in range(max_iters):
        y = A @ x
        if not np.any(y):
            break
        z = A.T @ dual_vector(y, r_out)
        if p_norm(z, q_in) <= z @ x * (1.0 + tol):
            break
        x_new = dual_vector(z, q_in)
        nx = p_norm(x_new, r_in)
        if nx == 0.0:
            break
        x_new = x_new / nx
        g_new = p_norm(A @ x_new, r_out)
        if g_new <= g * (1.0 + tol):
            if g_new > g:
                x, g = x_new, g_new
            break
        x, g = x_new, g_new
    return g, x


def _interpolation_upper(A: np.ndarray, r: float) -> float:
    n1 = float(np.abs(A).sum(axis=0).max())
    ninf = float(np.abs(A).sum(axis=1).max())
    n2 = float(np.linalg.svd(A, compute_uv=False)[0])
    bounds = [n1 ** (1.0 / r) * ninf ** (1.0 - 1.0 / r)]
    if r < 2.0:
        theta = 2.0 * (1.0 - 1.0 / r)
        bounds.append(n1 ** (1.0 - theta) * n2**theta)
    else:
        theta = 1.0 - 2.0 / r
        bounds.append(n2 ** (1.0 - theta) * ninf**theta)
    return min(bounds)


def op_norm(
    A,
    r_in,
    r_out,
    *,
    starts: int = DEFAULT_STARTS,
    seed: int = 0,
    max_iters: int = MAX_ITERS,
    tol: float = CONV_TOL,
) -> OperatorNormEstimate:
    """Bracket ``sup ||A x||_{r_out} / ||x||_{r_in}``.

    Closed forms are used where they exist (diagonal, r_in = 1, r_out = inf,
    spectral, sign-vertex enumeration for small r_out = 1 or r_in = inf).
    Otherwise Boyd's power iteration runs from every signed standard basis
    vector plus seeded random unit vectors.  Its upper end is a Riesz-Thorin
    interpolation bound when r_in == r_out, else ``lower * 1.05`` flagged
    heuristic.
    """
    r_in, r_out = check_exponent(r_in), check_exponent(r_out)
    A = _as_matrix(A)
    m, n = A.shape

    closed = _closed_form(A, r_in, r_out)
    if closed is not None:
        value, x, method = closed
        lower = norm_ratio(A, x, r_in, r_out)
        return OperatorNormEstimate(
            lower=lower,
            upper=max(float(value), lower),
            witness=x,
            method=method,
            r_in=r_in,
            r_out=r_out,
            seed=seed,
        )

    q_in = dual_exponent(r_in)
    rng = np.random.default_rng(seed)
    x0s = []
    for j in range(n):
        x0s.append(_basis(n, j))
        x0s.append(-_basis(n, j))
    while len(x0s) < starts:
        v = rng.standard_normal(n)
        x0s.append(v / p_norm(v, r_in))

    best_g, best_x = -1.0, None
    for x0 in x0s:
        g, x = _boyd_single(A, x0, r_in, r_out, q_in, max_iters, tol)
        if g > best_g:
            best_g, best_x = g, x
    lower = norm_ratio(A, best_x, r_in, r_out)

    if r_in == r_out:
        upper, heuristic = max(_interpolation_upper(A, r_in), lower), False
    else:
        upper, heuristic = lower * (1.0 + HEURISTIC_SLACK), True
    return OperatorNormEstimate(
        lower=lower,
        upper=upper,
        witness=best_x,
        method="boyd-multistart",
        r_in=r_in,
        r_out=r_out,
        starts=len(x0s),
        seed=seed,
        heuristic=heuristic,
    )


def _min_ratio_multistart(A, r_in, r_out, x0s, max_iters):
    def ratio(x):
        nx = p_norm(x, r_in)
        if nx == 0.0:
            return np.inf
        return p_norm(A @ x, r_out) / nx

    best, best_x = np.inf, None
    for x0 in x0s:
        res = optimize.minimize(
            ratio, x0, method="Powell", options={"maxiter": max_iters, "xtol": 1e-10, "ftol": 1e-13}
        )
        x = res.x if ratio(res.x) <= ratio(x0) else x0
        val = ratio(x)
        if val < best:
            best, best_x = val, x
    return best_x


def gain_lower_bound(
    A,
    r_in,
    r_out,
    *,
    starts: int = DEFAULT_STARTS,
    seed: int = 0,
    max_iters: int = MAX_ITERS,
    tol: float = CONV_TOL,
) -> OperatorNormEstimate:
    """Bracket ``inf ||A x||_{r_out} / ||x||_{r_in}`` (kind ``"inf"``).

    ``lower`` is the certified bound; the witness achieves ``upper``.
    """
    r_in, r_out = check_exponent(r_in), check_exponent(r_out)
    A = _as_matrix(A)
    m, n = A.shape

    _, s, vt = np.linalg.svd(A)
    rank_tol = max(m, n) * np.finfo(float).eps * (s[0] if s.size else 0.0)
    rank = int(np.sum(s > rank_tol))
    if rank < n:
        w = _canonical_direction(vt[-1])
        return OperatorNormEstimate(
            lower=0.0,
            upper=norm_ratio(A, w, r_in, r_out),
            witness=w,
            method="exact-kernel",
            r_in=r_in,
            r_out=r_out,
            seed=seed,
            kind="inf",
        )

    if m == n:
        inv = np.linalg.inv(A)
        est = op_norm(inv, r_out, r_in, starts=starts, seed=seed, max_iters=max_iters, tol=tol)
        x = inv @ est.witness
        return OperatorNormEstimate(
            lower=1.0 / est.upper,
            upper=norm_ratio(A, x, r_in, r_out),
            witness=x,
            method=est.method,
            r_in=r_in,
            r_out=r_out,
            starts=est.starts,
            seed=seed,
            kind="inf",
            heuristic=est.heuristic,
        )

    if r_in == 2.0 and r_out == 2.0:
        x = vt[n - 1].copy()
        val = norm_ratio(A, x, r_in, r_out)
        return OperatorNormEstimate(
            lower=min(float(s[n - 1]), val),
            upper=val,
            witness=x,
            method="exact-spectral",
            r_in=r_in,
            r_out=r_out,
            seed=seed,
            kind="inf",
        )

    # tall, full column rank: any left inverse L gives ||x|| <= ||L|| ||A x||
    left = np.linalg.pinv(A)
    est = op_norm(left, r_out, r_in, starts=starts, seed=seed, max_iters=max_iters, tol=tol)
    rng = np.random.default_rng(seed)
    x0s = [vt[n - 1].copy(), left @ est.witness]
    for j in range(n):
        x0s.append(_basis(n, j))
    n_random = max(0, min(starts, 2 * n + 8) - len(x0s))
    x0s.extend(rng.standard_normal(n) for _ in range(n_random))
    x = _min_ratio_multistart(A, r_in, r_out, x0s, max_iters)
    upper = norm_ratio(A, x, r_in, r_out)
    return OperatorNormEstimate(
        lower=min(1.0 / est.upper, upper),
        upper=upper,
        witness=x,
        method="multistart-min",
        r_in=r_in,
        r_out=r_out,
        starts=len(x0s),
        seed=seed,
        kind="inf",
        heuristic=est.heuristic,
    )


def is_signed_permutation(A, tol: float = 1e-9) -> bool:
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        return False
    absA = np.abs(A)
    unit = np.abs(absA - 1.0) <= tol
    small = absA <= tol
    if not np.all(unit | small):
        return False
    return bool(np.all(unit.sum(axis=0) == 1) and np.all(unit.sum(axis=1) == 1))


def _isometry_witness(A: np.ndarray, r: float, tol: float) -> tuple[np.ndarray, float]:
    n = A.shape[1]
    rng = np.random.default_rng(0)
    # basis vectors first (cleanest witness), then pair sums, then random
    tiers = [
        [_basis(n, j) for j in range(n)],
        [_basis(n, i) + s * _basis(n, j) for i, j in itertools.combinations(range(n), 2) for s in (1.0, -1.0)],
        [rng.standard_normal(n) for _ in range(4000)],
    ]
    best_dev, best_x = -1.0, _basis(n, 0)
    for tier in tiers:
        for x in tier:
            dev = abs(norm_ratio(A, x, r, r) - 1.0)
            if dev > best_dev:
                best_dev, best_x = dev, x
        if best_dev > tol:
            break
    return best_x, norm_ratio(A, best_x, r, r)


def is_isometry(A, r, tol: float = 1e-9) -> IsometryResult:
    """Decide whether A preserves the l^r norm.

    r = 2 checks A^T A = I.  Otherwise the isometries of l^r_d are exactly
    the signed permutation matrices, so the test is structural.
    """
    r = check_exponent(r)
    A = _as_matrix(A)
    if A.shape[0] != A.shape[1]:
        raise ValueError("isometry test needs a square matrix")
    if r == 2.0:
        gram = A.T @ A
        if np.max(np.abs(gram - np.eye(A.shape[0]))) <= tol:
            return IsometryResult(True)
        w, v = np.linalg.eigh(gram)
        k = int(np.argmax(np.abs(w - 1.0)))
        x = _canonical_direction(v[:, k])
        return IsometryResult(False, x, norm_ratio(A, x, r, r))
    if is_signed_permutation(A, tol):
        return IsometryResult(True)
    x, ratio = _isometry_witness(A, r, tol)
    return IsometryResult(False, x, ratio)


def signed_permutations(d: int) -> Iterator[np.ndarray]:
    """All 2^d d! signed permutation matrices, Q[i, perm[i]] = sign[i].

    Order: permutations lexicographically, then sign tuples with +1 first.
    """
    if d < 1:
        raise ValueError("dimension must be >= 1")
    if d > MAX_SIGNED_PERM_DIM:
        raise ValueError(f"signed permutation enumeration capped at d = {MAX_SIGNED_PERM_DIM}")
    rows = np.arange(d)
    for perm in itertools.permutations(range(d)):
        for signs in itertools.product((1.0, -1.0), repeat=d):
            Q = np.zeros((d, d))
            Q[rows, list(perm)] = signs
            yield Q
