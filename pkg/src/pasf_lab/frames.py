"""The finite p-ASF data model and its classification predicates.

A :class:`PASF` on X = (R^d, ||.||_r) stores the functionals as the rows of
``F`` (n x d) and the vectors as the columns of ``T`` (d x n).  The analysis
operator is ``F``, the synthesis operator is ``T`` and the frame operator is
``S = T @ F``.  Indices are 0-based throughout.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .lp_core import (
    INF,
    OperatorNormEstimate,
    check_exponent,
    dual_exponent,
    functional_norm,
    gain_lower_bound,
    is_isometry,
    op_norm,
    p_norm,
)

DEFAULT_TOL = 1e-9
COND_CAP = 1e6
MAX_REDRAWS = 100

# classification tags, weakest first
REJECTED = "not-bessel-model"
BESSEL_ONLY = "bessel-only"
ASF = "asf"
TIGHT = "tight"
PARSEVAL = "parseval"
RIESZ_BASIS = "riesz-basis"
P_ORTHONORMAL_BASIS = "p-orthonormal-basis"
TAG_ORDER = (REJECTED, BESSEL_ONLY, ASF, TIGHT, PARSEVAL, RIESZ_BASIS, P_ORTHONORMAL_BASIS)


def _frozen(a) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class PASF:
    F: np.ndarray
    T: np.ndarray
    p: float = 2.0
    r: float = 2.0
    label: str = ""

    def __post_init__(self):
        F = np.array(self.F, dtype=float)
        T = np.array(self.T, dtype=float)
        if F.ndim != 2 or T.ndim != 2:
            raise ValueError("F and T must be 2-D")
        n, d = F.shape
        if T.shape != (d, n):
            raise ValueError(f"T has shape {T.shape}, expected {(d, n)} to match F {F.shape}")
        if n < 1 or d < 1:
            raise ValueError("need n >= 1 and d >= 1")
        if not (np.all(np.isfinite(F)) and np.all(np.isfinite(T))):
            raise ValueError("frame entries must be finite")
        object.__setattr__(self, "F", _frozen(F))
        object.__setattr__(self, "T", _frozen(T))
        object.__setattr__(self, "p", check_exponent(self.p))
        object.__setattr__(self, "r", check_exponent(self.r))
        if self.p == INF:
            raise ValueError("sequence exponent p must be finite")

    @property
    def n(self) -> int:
        return self.F.shape[0]

    @property
    def d(self) -> int:
        return self.F.shape[1]

    def vector_norms(self) -> np.ndarray:
        return np.array([p_norm(self.T[:, j], self.r) for j in range(self.n)])

    def functional_norms(self) -> np.ndarray:
        return np.array([functional_norm(self.F[j], self.r) for j in range(self.n)])

    def pairings(self) -> np.ndarray:
        """f_j(tau_j) for every j."""
        return np.einsum("jk,kj->j", self.F, self.T)

    def restrict(self, index_set: Sequence[int]) -> "PASF":
        idx = _check_indices(self, index_set)
        return PASF(self.F[idx], self.T[:, idx], self.p, self.r, self.label)

    def with_elements(self, F=None, T=None, label=None) -> "PASF":
        return PASF(
            self.F if F is None else F,
            self.T if T is None else T,
            self.p,
            self.r,
            self.label if label is None else label,
        )


@dataclass(frozen=True)
class FrameBounds:
    a: float
    b: float
    a_cert: OperatorNormEstimate
    b_cert: OperatorNormEstimate


@dataclass(frozen=True)
class FrameClass:
    tag: str
    lam: float | None = None
    evidence: dict = field(default_factory=dict)

    def at_least(self, tag: str) -> bool:
        return TAG_ORDER.index(self.tag) >= TAG_ORDER.index(tag)


@dataclass(frozen=True)
class Check:
    """Boolean predicate outcome with the reasons behind it."""

    ok: bool
    diagnostics: tuple[str, ...] = ()
    values: dict = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "ok", bool(self.ok))

    def __bool__(self) -> bool:
        return self.ok


@dataclass(frozen=True)
class RieszBasisResult:
    ok: bool
    defect: float
    gram_rank: int
    defect_cert: OperatorNormEstimate | None = None

    def __post_init__(self):
        object.__setattr__(self, "ok", bool(self.ok))

    def __bool__(self) -> bool:
        return self.ok


@dataclass(frozen=True)
class RieszBoundPair:
    lower: float
    upper: float
    lower_cert: OperatorNormEstimate
    upper_cert: OperatorNormEstimate
    index_set: tuple[int, ...]
    is_riesz: bool
    pair_ok: bool
    pair_defect: float

    def to_dict(self) -> dict:
        return {
            "index_set": list(self.index_set),
            "lower": self.lower,
            "upper": self.upper,
            "is_riesz": self.is_riesz,
            "pair_ok": self.pair_ok,
            "pair_defect": self.pair_defect,
            "lower_cert": self.lower_cert.to_dict(),
            "upper_cert": self.upper_cert.to_dict(),
        }


@dataclass(frozen=True)
class Intertwiner:
    V: np.ndarray
    isometry: bool


def _check_indices(P: PASF, index_set) -> list[int]:
    idx = sorted(int(i) for i in index_set)
    if not idx:
        raise ValueError("index set must be nonempty")
    if len(set(idx)) != len(idx):
        raise ValueError("index set has repeated entries")
    if idx[0] < 0 or idx[-1] >= P.n:
        raise IndexError(f"index out of range for n = {P.n}: {idx}")
    return idx


def make_pasf(kind: str, *, p=2.0, r=2.0, label: str | None = None, **params) -> PASF:
    """Build a PASF of the given kind.

    Kinds: ``standard`` (d), ``duplicated-standard`` (d, k, normalize),
    ``random`` (d, n, seed, cond_cap) and ``explicit`` (F, T).  Duplicated
    frames order the copies consecutively, e_0 k times then e_1 k times;
    with ``normalize`` (default) the functionals carry 1/k so that S = I.
    """
    if kind == "standard":
        d = int(params.pop("d"))
        _no_extra(params)
        I = np.eye(d)
        return PASF(I, I, p, r, label or f"standard d={d}")
    if kind == "duplicated-standard":
        d, k = int(params.pop("d")), int(params.pop("k", 2))
        normalize = bool(params.pop("normalize", True))
        _no_extra(params)
        if d < 1 or k < 1:
            raise ValueError("need d >= 1 and k >= 1")
        T = np.repeat(np.eye(d), k, axis=1)
        F = T.T / k if normalize else T.T.copy()
        return PASF(F, T, p, r, label or f"duplicated-standard d={d} k={k}")
    if kind == "random":
        d = int(params.pop("d"))
        n = int(params.pop("n", d))
        if "seed" not in params:
            raise ValueError("random frames require a seed")
        seed = int(params.pop("seed"))
        cap = float(params.pop("cond_cap", COND_CAP))
        _no_extra(params)
        if n < d:
            raise ValueError("random frames need n >= d for an invertible frame operator")
        rng = np.random.default_rng(seed)
        for _ in range(MAX_REDRAWS):
            F = rng.standard_normal((n, d))
            T = rng.standard_normal((d, n))
            if np.linalg.cond(T @ F) <= cap:
                return PASF(F, T, p, r, label or f"random d={d} n={n} seed={seed}")
        raise ValueError(f"no frame with cond(S) <= {cap} after {MAX_REDRAWS} draws")
    if kind == "explicit":
        F, T = params.pop("F"), params.pop("T")
        _no_extra(params)
        return PASF(F, T, p, r, label or "explicit")
    raise ValueError(f"unknown frame kind {kind!r}")


def _no_extra(params: dict) -> None:
    if params:
        raise ValueError(f"unexpected parameters: {sorted(params)}")


def frame_operator(P: PASF) -> np.ndarray:
    return P.T @ P.F


def frame_bounds(P: PASF, *, seed: int = 0) -> FrameBounds:
    S = frame_operator(P)
    b_cert = op_norm(S, P.r, P.r, seed=seed)
    a_cert = gain_lower_bound(S, P.r, P.r, seed=seed)
    return FrameBounds(a=a_cert.lower, b=b_cert.upper, a_cert=a_cert, b_cert=b_cert)


def tightness(P: PASF, tol: float = DEFAULT_TOL) -> tuple[bool, float, float]:
    """(is_tight, lambda, ||S - lambda I||) with lambda = trace(S) / d."""
    S = frame_operator(P)
    lam = float(np.trace(S)) / P.d
    defect = op_norm(S - lam * np.eye(P.d), P.r, P.r).upper
    return (lam != 0.0 and defect <= tol * abs(lam)), lam, defect


def is_riesz_basis(P: PASF, tol: float = DEFAULT_TOL) -> RieszBasisResult:
    """Test F S^{-1} T = I on the coefficient space l^p_n."""
    S = frame_operator(P)
    a = gain_lower_bound(S, P.r, P.r)
    b = op_norm(S, P.r, P.r).upper
    if a.upper <= tol * max(1.0, b):
        return RieszBasisResult(False, INF, int(np.linalg.matrix_rank(S)))
    G = P.F @ np.linalg.solve(S, P.T)
    cert = op_norm(G - np.eye(P.n), P.p, P.p)
    rank = int(np.linalg.matrix_rank(G))
    return RieszBasisResult(cert.upper <= tol, cert.upper, rank, cert)


def is_p_orthonormal(
    P: PASF, index_set=None, mode: str = "sequence", tol: float = DEFAULT_TOL
) -> Check:
    """Check the p-orthonormal sequence (or basis) conditions on ``index_set``.

    (i) biorthogonality, (ii) the analysis map X -> l^p has norm <= 1 (= 1 in
    basis mode), (iii) the synthesis map l^p -> X is an isometry onto its
    range.  Basis mode also needs the full index set with n = d.
    """
    if mode not in ("sequence", "basis"):
        raise ValueError(f"unknown mode {mode!r}")
    idx = list(range(P.n)) if index_set is None else _check_indices(P, index_set)
    if mode == "basis" and (len(idx) != P.n or P.n != P.d):
        raise ValueError("basis mode needs the full index set and n == d (spanning family)")
    FI, TI = P.F[idx], P.T[:, idx]
    k = len(idx)
    diags: list[str] = []
    values: dict = {}

    for pos, j in enumerate(idx):
        tn, fn = p_norm(TI[:, pos], P.r), functional_norm(FI[pos], P.r)
        if abs(tn - 1.0) > tol:
            diags.append(f"||tau[{j}]|| = {tn:.12g} != 1")
        if abs(fn - 1.0) > tol:
            diags.append(f"||f[{j}]|| = {fn:.12g} != 1")

    bio = FI @ TI
    bio_err = float(np.max(np.abs(bio - np.eye(k))))
    values["biorthogonality_error"] = bio_err
    ok_bio = bio_err <= tol
    if not ok_bio:
        diags.append(f"f_i(tau_j) deviates from delta_ij by {bio_err:.3g}")

    analysis = op_norm(FI, P.r, P.p)
    values["analysis_norm"] = (analysis.lower, analysis.upper)
    ok_analysis = analysis.upper <= 1.0 + tol
    if mode == "basis":
        ok_analysis = ok_analysis and analysis.lower >= 1.0 - tol
    if not ok_analysis:
        diags.append(f"analysis norm in [{analysis.lower:.12g}, {analysis.upper:.12g}], need <= 1")

    ok_synth, how = _synthesis_isometric(TI, P.p, P.r, tol)
    values["synthesis_check"] = how
    if not ok_synth:
        diags.append(f"synthesis is not an l^p isometry ({how})")

    ok = ok_bio and ok_analysis and ok_synth
    if mode == "basis":
        invertible = np.linalg.matrix_rank(TI) == P.d
        if not invertible:
            diags.append("synthesis matrix is not invertible")
        ok = ok and invertible
    return Check(ok, tuple(diags), values)


def _synthesis_isometric(TI: np.ndarray, p: float, r: float, tol: float) -> tuple[bool, str]:
    d, k = TI.shape
    if p == r and p != 2.0:
        support = np.abs(TI) > tol
        disjoint = np.all(support.sum(axis=1) <= 1)
        if disjoint:
            norms = [p_norm(TI[:, j], r) for j in range(k)]
            ok = all(abs(v - 1.0) <= tol for v in norms)
            if k == d:
                ok = ok and bool(is_isometry(TI, r, tol))
            return ok, "disjoint-support exact"
    if p == 2.0 and r == 2.0:
        err = float(np.max(np.abs(TI.T @ TI - np.eye(k))))
        return err <= tol, f"gram error {err:.3g}"
    upper = op_norm(TI, p, r).upper
    lower = gain_lower_bound(TI, p, r).lower
    return (upper <= 1.0 + tol and lower >= 1.0 - tol), f"gain in [{lower:.12g}, {upper:.12g}]"


def classify(P: PASF, tol: float = DEFAULT_TOL) -> FrameClass:
    evidence: dict = {}
    S = frame_operator(P)
    if not np.all(np.isfinite(S)):
        return FrameClass(REJECTED, evidence={"finite": False})
    bounds = frame_bounds(P)
    evidence["bounds"] = (bounds.a, bounds.b)
    singular = bounds.a_cert.upper <= tol * max(1.0, bounds.b)
    evidence["singular"] = singular
    if singular:
        return FrameClass(BESSEL_ONLY, evidence=evidence)

    tight, lam, defect = tightness(P, tol)
    evidence["tight"] = {"ok": tight, "lambda": lam, "defect": defect}
    parseval = tight and abs(lam - 1.0) <= tol
    evidence["parseval"] = parseval

    riesz = is_riesz_basis(P, tol)
    evidence["riesz_basis"] = {"ok": riesz.ok, "defect": riesz.defect, "gram_rank": riesz.gram_rank}
    if riesz.ok and P.n == P.d:
        onb = is_p_orthonormal(P, mode="basis", tol=tol)
        evidence["p_orthonormal_basis"] = {"ok": onb.ok, "diagnostics": list(onb.diagnostics)}
        if onb.ok:
            return FrameClass(P_ORTHONORMAL_BASIS, 1.0, evidence)
    if riesz.ok:
        return FrameClass(RIESZ_BASIS, lam if tight else None, evidence)
    if parseval:
        return FrameClass(PARSEVAL, 1.0, evidence)
    if tight:
        return FrameClass(TIGHT, lam, evidence)
    return FrameClass(ASF, evidence=evidence)


def _span_basis(TI: np.ndarray, tol: float) -> np.ndarray:
    u, s, _ = np.linalg.svd(TI, full_matrices=False)
    if s.size == 0 or s[0] == 0.0:
        return u[:, :0]
    rank = int(np.sum(s > max(tol, TI.shape[0] * np.finfo(float).eps) * s[0]))
    return u[:, :rank]


def riesz_sequence_bounds(P: PASF, index_set=None, tol: float = DEFAULT_TOL, *, seed: int = 0) -> RieszBoundPair:
    """Synthesis-side Riesz bounds on ``index_set`` plus the restricted-pair check.

    The pair check restricts each f_j to W = span{tau_j} using an
    orthonormal (in l^2) basis of W and tests F_W S_W^{-1} T_W = I there.
    """
    idx = list(range(P.n)) if index_set is None else _check_indices(P, index_set)
    TI, FI = P.T[:, idx], P.F[idx]
    upper = op_norm(TI, P.p, P.r, seed=seed)
    lower = gain_lower_bound(TI, P.p, P.r, seed=seed)
    is_riesz = lower.lower > tol

    Q = _span_basis(TI, tol)
    pair_ok, pair_defect = False, INF
    if Q.shape[1] == len(idx):
        TW, FW = Q.T @ TI, FI @ Q
        SW = TW @ FW
        if np.linalg.matrix_rank(SW) == Q.shape[1]:
            G = FW @ np.linalg.solve(SW, TW)
            pair_defect = op_norm(G - np.eye(len(idx)), P.p, P.p).upper
            pair_ok = pair_defect <= max(tol, 1e-9)
    return RieszBoundPair(
        lower=lower.lower,
        upper=upper.upper,
        lower_cert=lower,
        upper_cert=upper,
        index_set=tuple(idx),
        is_riesz=is_riesz,
        pair_ok=pair_ok,
        pair_defect=pair_defect,
    )


def unit_norm_check(P: PASF, index_set=None, tol: float = DEFAULT_TOL) -> Check:
    """||f_j|| = ||tau_j|| = |f_j(tau_j)| = 1 on the index set."""
    idx = list(range(P.n)) if index_set is None else _check_indices(P, index_set)
    fn, tn, pr = P.functional_norms(), P.vector_norms(), np.abs(P.pairings())
    diags = []
    for j in idx:
        for name, v in (("||f||", fn[j]), ("||tau||", tn[j]), ("|f(tau)|", pr[j])):
            if abs(v - 1.0) > tol:
                diags.append(f"{name}[{j}] = {v:.12g} != 1")
    return Check(not diags, tuple(diags))


def is_eps_riesz(P: PASF, index_set, eps: float, tol: float = DEFAULT_TOL) -> bool:
    if not 0.0 < eps < 1.0:
        raise ValueError("eps must lie in (0, 1)")
    if not unit_norm_check(P, index_set, tol):
        return False
    rb = riesz_sequence_bounds(P, index_set, tol)
    return rb.lower >= 1.0 - eps - tol and rb.upper <= 1.0 + eps + tol


def recover_intertwiner(B1: PASF, B2: PASF, tol: float = DEFAULT_TOL) -> Intertwiner:
    """The isometry V with B2 = (f V^{-1}, V tau) for two p-orthonormal bases."""
    for name, B in (("first", B1), ("second", B2)):
        if B.n != B.d:
            raise ValueError(f"{name} input is not a p-orthonormal basis (n != d)")
        chk = is_p_orthonormal(B, mode="basis", tol=tol)
        if not chk:
            raise ValueError(f"{name} input is not a p-orthonormal basis: {'; '.join(chk.diagnostics)}")
    if B1.d != B2.d:
        raise ValueError("bases live in different dimensions")
    V = B2.T @ np.linalg.inv(B1.T)
    if np.max(np.abs(V @ B1.T - B2.T)) > tol:
        raise ArithmeticError("V tau^(1) != tau^(2)")
    if np.max(np.abs(B1.F @ np.linalg.inv(V) - B2.F)) > tol:
        raise ArithmeticError("f^(1) V^{-1} != f^(2)")
    return Intertwiner(V, bool(is_isometry(V, B1.r, tol)))
