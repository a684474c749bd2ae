"""Continuous p-ASFs on an interval, discretized by quadrature."""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .conjecture_lab import akemann_weaver_search, feichtinger_search, weaver_search
from .conjecture_lab.search import INCONCLUSIVE, HOLDS, LOCAL_SEARCH, Budget, BudgetCounter, SearchReport
from .frames import PASF, frame_operator
from .lp_core import INF, check_exponent, dual_exponent, op_norm, p_norm

RULES = ("trapezoid", "midpoint", "gauss-legendre")
BRIDGE_KINDS = ("feichtinger", "weaver", "akemann-weaver")
COARSENING_NOTE = "measurable sets are represented by unions of quadrature node cells"
AW_COARSE_BLOCKS = 8
AW_DIRECT_LIMIT = 20


@dataclass(frozen=True)
class ContinuousPASF:
    """Families alpha -> f_alpha (row) and alpha -> tau_alpha (column) on [lo, hi].

    ``f`` and ``tau`` take a 1-D array of parameters and return an (N, d)
    array, one row per parameter; ``weight`` returns the density values.
    """

    domain: tuple[float, float]
    weight: Callable[[np.ndarray], np.ndarray]
    f: Callable[[np.ndarray], np.ndarray]
    tau: Callable[[np.ndarray], np.ndarray]
    d: int
    p: float = 2.0
    r: float = 2.0
    label: str = ""

    def __post_init__(self):
        lo, hi = (float(v) for v in self.domain)
        if not (math.isfinite(lo) and math.isfinite(hi) and lo < hi):
            raise ValueError("domain must be a finite interval lo < hi")
        object.__setattr__(self, "domain", (lo, hi))
        object.__setattr__(self, "p", check_exponent(self.p))
        object.__setattr__(self, "r", check_exponent(self.r))
        if self.p == INF:
            raise ValueError("p must be finite")

    def sample(self, alphas) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        a = np.asarray(alphas, dtype=float)
        w = np.broadcast_to(np.asarray(self.weight(a), dtype=float), a.shape).copy()
        Fv = np.asarray(self.f(a), dtype=float).reshape(a.size, self.d)
        Tv = np.asarray(self.tau(a), dtype=float).reshape(a.size, self.d)
        if not (np.all(np.isfinite(w)) and np.all(np.isfinite(Fv)) and np.all(np.isfinite(Tv))):
            raise ValueError("family evaluations must be finite")
        if np.any(w < 0):
            raise ValueError("density must be nonnegative")
        return w, Fv, Tv

    def scaled(self, lam: float) -> "ContinuousPASF":
        w = self.weight
        return ContinuousPASF(self.domain, lambda a: lam * np.asarray(w(a), dtype=float), self.f, self.tau,
                              self.d, self.p, self.r, self.label)

    @classmethod
    def from_table(cls, alphas, weights, f_rows, tau_cols, p=2.0, r=2.0, label="tabulated") -> "ContinuousPASF":
        """Piecewise-linear interpolation of tabulated samples."""
        a = np.asarray(alphas, dtype=float)
        order = np.argsort(a)
        a = a[order]
        w = np.asarray(weights, dtype=float)[order]
        Fr = np.atleast_2d(np.asarray(f_rows, dtype=float))[order]
        Tc = np.atleast_2d(np.asarray(tau_cols, dtype=float))[order]
        if a.size < 2 or Fr.shape != Tc.shape or Fr.shape[0] != a.size:
            raise ValueError("table needs at least two rows with matching f and tau widths")
        d = Fr.shape[1]

        def interp(table):
            return lambda x: np.stack([np.interp(x, a, table[:, k]) for k in range(d)], axis=-1)

        return cls((a[0], a[-1]), lambda x: np.interp(x, a, w), interp(Fr), interp(Tc), d, p, r, label)


@dataclass(frozen=True)
class Quadrature:
    nodes: np.ndarray
    weights: np.ndarray
    rule: str

    def __post_init__(self):
        nodes = np.asarray(self.nodes, dtype=float)
        weights = np.asarray(self.weights, dtype=float)
        if nodes.ndim != 1 or nodes.size == 0 or nodes.shape != weights.shape:
            raise ValueError("quadrature needs matching nonempty node and weight arrays")
        if np.any(np.diff(nodes) < 0):
            raise ValueError("nodes must be sorted")
        if np.any(weights <= 0):
            raise ValueError("weights must be positive")
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "weights", weights)

    @property
    def N(self) -> int:
        return self.nodes.size

    @classmethod
    def from_nodes(cls, nodes) -> "Quadrature":
        """Trapezoid weights on arbitrary sorted nodes."""
        x = np.asarray(nodes, dtype=float)
        if x.size < 2:
            raise ValueError("need at least two nodes")
        h = np.diff(x)
        w = np.zeros_like(x)
        w[:-1] += h / 2
        w[1:] += h / 2
        return cls(x, w, "trapezoid")


def make_quadrature(rule: str, N: int, domain) -> Quadrature:
    lo, hi = (float(v) for v in domain)
    if not lo < hi:
        raise ValueError("domain must satisfy lo < hi")
    if rule not in RULES:
        raise ValueError(f"rule must be one of {RULES}")
    length = hi - lo
    if rule == "trapezoid":
        if N < 2:
            raise ValueError("trapezoid needs N >= 2")
        nodes = np.linspace(lo, hi, N)
        w = np.full(N, length / (N - 1))
        w[0] = w[-1] = length / (2 * (N - 1))
    elif rule == "midpoint":
        if N < 1:
            raise ValueError("midpoint needs N >= 1")
        nodes = lo + (np.arange(N) + 0.5) * length / N
        w = np.full(N, length / N)
    else:
        if N < 1:
            raise ValueError("gauss-legendre needs N >= 1")
        x, gw = np.polynomial.legendre.leggauss(N)
        nodes = lo + (x + 1) * length / 2
        w = gw * length / 2
    return Quadrature(nodes, w, rule)


def circle_example(p: float = 2.0) -> ContinuousPASF:
    """tau_alpha = (cos a, sin a), f_alpha(x, y) = x cos a + y sin a on [0, 2 pi] in (R^2, l^1)."""

    def unit(a):
        a = np.asarray(a, dtype=float)
        return np.stack([np.cos(a), np.sin(a)], axis=-1)

    return ContinuousPASF((0.0, 2 * math.pi), lambda a: np.ones_like(np.asarray(a, dtype=float)),
                          unit, unit, 2, p, 1.0, f"circle p={p:g}")


def _check_domain(C: ContinuousPASF, Q: Quadrature) -> None:
    lo, hi = C.domain
    span = hi - lo
    if Q.nodes[0] < lo - 1e-12 * span or Q.nodes[-1] > hi + 1e-12 * span:
        raise ValueError("quadrature nodes fall outside the domain")


def _mass(C: ContinuousPASF, Q: Quadrature):
    _check_domain(C, Q)
    w, Fv, Tv = C.sample(Q.nodes)
    return w * Q.weights, Fv, Tv


def cont_frame_operator(C: ContinuousPASF, Q: Quadrature) -> np.ndarray:
    """sum_i w_i q_i tau(alpha_i) f(alpha_i)."""
    m, Fv, Tv = _mass(C, Q)
    return (Tv.T * m) @ Fv


def discretize(C: ContinuousPASF, Q: Quadrature) -> PASF:
    """Sampled pair with (wq)^(1/q) on functionals and (wq)^(1/p) on vectors.

    The exponents add to one, so the discrete frame operator equals the
    quadrature frame operator identically.  At p = 1 the functional factor
    is (wq)^0 = 1 and all mass sits on the vectors.
    """
    m, Fv, Tv = _mass(C, Q)
    q = dual_exponent(C.p)
    inv_q = 0.0 if q == INF else 1.0 / q
    Fd = (m ** inv_q)[:, None] * Fv
    Td = (Tv * (m ** (1.0 / C.p))[:, None]).T
    label = f"{C.label} {Q.rule} N={Q.N}".strip()
    if C.p == 1.0:
        label += " (p=1: functional factor (wq)^0)"
    return PASF(Fd, Td, C.p, C.r, label)


@dataclass(frozen=True)
class ContinuousNormEstimates:
    analysis: float
    synthesis: float
    samples: int
    seed: int
    analysis_witness: np.ndarray
    analysis_trace: np.ndarray

    def to_dict(self) -> dict:
        return {
            "analysis": self.analysis,
            "synthesis": self.synthesis,
            "samples": self.samples,
            "seed": self.seed,
            "analysis_witness": self.analysis_witness.tolist(),
            "kind": "lower-estimate",
        }


def _sample_directions(d: int, samples: int, r: float, seed: int) -> np.ndarray:
    # basis directions first, then seeded random ones; a longer run extends a shorter one
    basis = np.concatenate([np.eye(d), -np.eye(d)])
    rng = np.random.default_rng(seed)
    extra = max(0, samples - basis.shape[0])
    X = np.concatenate([basis, rng.standard_normal((extra, d))])[:samples]
    norms = np.array([p_norm(x, r) for x in X])
    return X / norms[:, None]


def cont_norm_estimates(C: ContinuousPASF, Q: Quadrature, samples: int = 4096, seed: int = 0) -> ContinuousNormEstimates:
    """Sampled analysis norm and discretized synthesis norm, both lower estimates.

    Norms use the L^p-compatible split: the analysis sum carries (wq) inside
    the p-th power and the synthesis matrix carries (wq)^(1/q) per column.
    """
    if samples < 1:
        raise ValueError("samples must be positive")
    m, Fv, Tv = _mass(C, Q)
    X = _sample_directions(C.d, samples, C.r, seed)
    vals = (m[None, :] * np.abs(X @ Fv.T) ** C.p).sum(axis=1) ** (1.0 / C.p)
    trace = np.maximum.accumulate(vals)
    best = int(np.argmax(vals))
    q = dual_exponent(C.p)
    inv_q = 0.0 if q == INF else 1.0 / q
    Ts = (Tv * (m ** inv_q)[:, None]).T
    synth = op_norm(Ts, C.p, C.r, seed=seed).lower if np.any(Ts) else 0.0
    return ContinuousNormEstimates(float(vals[best]), float(synth), samples, seed, X[best], trace)


def cont_riesz_defect(C: ContinuousPASF, Q: Quadrature, *, seed: int = 0) -> float:
    """||F_d S^{-1} T_d - I||_{p->p} on the node space."""
    P = discretize(C, Q)
    S = frame_operator(P)
    if np.linalg.matrix_rank(S) < P.d:
        raise ValueError("discretized frame operator is singular")
    G = P.F @ np.linalg.solve(S, P.T)
    return op_norm(G - np.eye(P.n), P.p, P.p, seed=seed).upper


def node_cells(C: ContinuousPASF, Q: Quadrature) -> list[tuple[float, float]]:
    lo, hi = C.domain
    mids = (Q.nodes[1:] + Q.nodes[:-1]) / 2
    edges = np.concatenate([[lo], mids, [hi]])
    return [(float(edges[i]), float(edges[i + 1])) for i in range(Q.N)]


def intervals_of(indices, cells) -> list[list[float]]:
    """Merge the cells of the given nodes into maximal intervals."""
    out: list[list[float]] = []
    for i in sorted(indices):
        a, b = cells[i]
        if out and abs(out[-1][1] - a) <= 1e-15 * max(1.0, abs(a)):
            out[-1][1] = b
        else:
            out.append([a, b])
    return out


def continuous_conjecture_bridge(
    C: ContinuousPASF,
    Q: Quadrature,
    which: str,
    params: dict | None = None,
    budget: Budget | None = None,
    seed: int = 0,
) -> SearchReport:
    """Run a discrete harness on the discretized family and report interval unions."""
    params = dict(params or {})
    if which not in BRIDGE_KINDS:
        raise ValueError(f"which must be one of {BRIDGE_KINDS}")
    P = discretize(C, Q)
    cells = node_cells(C, Q)
    if which == "feichtinger":
        rep = feichtinger_search(P, float(params.pop("a_min")), params.pop("max_M", None), budget, seed=seed)
        parts = rep.witness["parts"] if rep.witness else []
    elif which == "weaver":
        rep = weaver_search(
            P, float(params.pop("b")), float(params.pop("eps")), int(params.pop("M")),
            budget=budget, seed=seed, check_norms=False,
        )
        rep.details["norm_precondition_note"] = "per-element norm bound skipped for sampled families"
        parts = rep.witness["parts"] if rep.witness else []
    else:
        rep = _bridge_akemann_weaver(P, params, budget, seed)
        parts = [rep.witness["subset"]] if rep.witness else []
    if params:
        raise ValueError(f"unknown bridge parameters: {sorted(params)}")
    rep.details["intervals"] = [intervals_of(part, cells) for part in parts]
    rep.details["coarsening"] = COARSENING_NOTE
    rep.details["quadrature"] = {"rule": Q.rule, "N": Q.N}
    return rep


def _bridge_akemann_weaver(P: PASF, params: dict, budget, seed) -> SearchReport:
    w = params.pop("weights", 0.5)
    weights = np.broadcast_to(np.asarray(w, dtype=float), (P.n,)).copy()
    blocks = int(params.pop("coarse_blocks", AW_COARSE_BLOCKS))
    threshold = params.pop("threshold", None)
    sn = op_norm(frame_operator(P), P.r, P.r, seed=seed).upper
    scale = max(1.0, sn)
    Ps = P.with_elements(F=np.asarray(P.F) / scale)
    if P.n <= AW_DIRECT_LIMIT:
        rep = akemann_weaver_search(Ps, weights, budget, threshold=threshold, seed=seed)
        rep.details["bessel_scale"] = 1.0 / scale
        return rep

    # coarse exhaustive search over contiguous node blocks, then single-node flips
    counter = BudgetCounter(budget)
    target = (Ps.T * weights) @ Ps.F
    bounds = np.linspace(0, P.n, blocks + 1).round().astype(int)

    def disc(x):
        return op_norm((Ps.T * x) @ Ps.F - target, P.r, P.r, seed=seed).upper

    best, best_x = INF, None
    for bits in itertools.product((0.0, 1.0), repeat=blocks):
        counter.tick()
        x = np.zeros(P.n)
        for k, bit in enumerate(bits):
            x[bounds[k] : bounds[k + 1]] = bit
        v = disc(x)
        if v < best - 1e-12:
            best, best_x = v, x
    improved = True
    while improved and not counter.exhausted:
        improved = False
        for j in range(P.n):
            counter.tick()
            best_x[j] = 1.0 - best_x[j]
            v = disc(best_x)
            if v < best - 1e-12:
                best, improved = v, True
            else:
                best_x[j] = 1.0 - best_x[j]
    status = HOLDS if threshold is None or best <= threshold else INCONCLUSIVE
    subset = [int(j) for j in np.flatnonzero(best_x)]
    return SearchReport(
        status, {"subset": subset, "discrepancy": best}, counter.nodes, LOCAL_SEARCH, seed,
        counter.wall_budget_exceeded, "Conjecture AW",
        {"discrepancy": best, "bessel_scale": 1.0 / scale, "coarse_blocks": blocks, "threshold": threshold},
    )
