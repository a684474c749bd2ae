"""Partition and subset harnesses: Feichtinger, R_eps, Weaver and Akemann-Weaver."""
from __future__ import annotations

import random

import numpy as np

from ..frames import (
    PASF,
    frame_operator,
    is_eps_riesz,
    is_riesz_basis,
    riesz_sequence_bounds,
    unit_norm_check,
)
from ..lp_core import INF, functional_norm, gain_lower_bound, is_isometry, op_norm, p_norm
from .search import (
    EXHAUSTIVE,
    EXHAUSTIVE_N,
    GREEDY,
    HOLDS,
    INCONCLUSIVE,
    LOCAL_SEARCH,
    REFUTED,
    Budget,
    BudgetCounter,
    PartitionCertificate,
    PartOracle,
    SearchReport,
    canonical_labels,
    greedy_partition,
    labels_to_parts,
    min_hereditary_partition,
    restricted_growth_strings,
)

CRITERIA = ("feichtinger", "weaver", "r-eps")
GREEDY_RESTARTS = 16
LOCAL_RESTARTS = 8
AW_EXHAUSTIVE_N = 20
AW_CHUNK = 1 << 15
# closed-form r values for batched subset norms
_BATCHED_R = (1.0, 2.0, INF)
VERIFY_SEED_OFFSET = 7919
TIE_SLACK = 1e-12


def _norm_sandwich(P: PASF, tol: float) -> list[str]:
    out = []
    for name, norms in (("tau", P.vector_norms()), ("f", P.functional_norms())):
        lo = float(np.min(norms))
        if not lo > tol:
            out.append(f"inf ||{name}_j|| = {lo:.6g}; need 0 < inf")
    return out


def _auto_strategy(strategy: str, n: int) -> str:
    if strategy == "auto":
        return EXHAUSTIVE if n <= EXHAUSTIVE_N else GREEDY
    if strategy not in (EXHAUSTIVE, GREEDY, LOCAL_SEARCH):
        raise ValueError(f"unknown strategy {strategy!r}")
    return strategy


def _hereditary_search(
    P: PASF,
    part_ok: PartOracle,
    max_M: int,
    budget: Budget | None,
    strategy: str,
    seed: int,
):
    counter = BudgetCounter(budget)
    if strategy == EXHAUSTIVE:
        M, labels, complete = min_hereditary_partition(P.n, part_ok, max_M, counter)
    else:
        labels = greedy_partition(P.n, part_ok, seed, GREEDY_RESTARTS, counter)
        M = None if labels is None else max(labels) + 1
        if M is not None and M > max_M:
            M, labels = None, None
        complete = False
    return M, labels, complete, counter


def _finish_partition_report(
    P, M, labels, complete, counter, strategy, seed, citation, criterion, thresholds, per_part_fn, extra
) -> SearchReport:
    details = dict(extra)
    details["part_evaluations"] = extra.get("part_evaluations", 0)
    if M is not None:
        parts = labels_to_parts(labels)
        cert = PartitionCertificate(
            parts=parts,
            per_part=[per_part_fn(part) for part in parts],
            criterion=criterion,
            thresholds=thresholds,
        )
        cert.verified = verify_certificate(cert, P)
        details["M"] = M
        details["minimal"] = strategy == EXHAUSTIVE
        return SearchReport(
            HOLDS, cert.to_dict(), counter.nodes, strategy, seed, counter.wall_budget_exceeded, citation, details
        )
    details["M"] = None
    details["complete"] = complete
    if counter.exhausted:
        details["budget_exhausted"] = True
    return SearchReport(
        INCONCLUSIVE, None, counter.nodes, strategy, seed, counter.wall_budget_exceeded, citation, details
    )


def feichtinger_search(
    P: PASF,
    a_min: float,
    max_M: int | None = None,
    budget: Budget | None = None,
    *,
    strategy: str = "auto",
    seed: int = 0,
    tol: float = 1e-9,
) -> SearchReport:
    """Minimal partition into Riesz sequences with lower bound >= a_min."""
    if not a_min > 0:
        raise ValueError("a_min must be positive")
    bad = _norm_sandwich(P, tol)
    if bad:
        raise ValueError("norm sandwich precondition fails: " + "; ".join(bad))
    max_M = P.n if max_M is None else int(max_M)
    if max_M < 1:
        raise ValueError("max_M must be at least 1")
    strategy = _auto_strategy(strategy, P.n)

    def ok(part):
        return riesz_sequence_bounds(P, part, tol, seed=seed).lower >= a_min

    oracle = PartOracle(ok)
    M, labels, complete, counter = _hereditary_search(P, oracle, max_M, budget, strategy, seed)
    S = frame_operator(P)
    citation = "Conjecture FB" if np.linalg.matrix_rank(S) == P.d else "Conjecture FS"
    return _finish_partition_report(
        P, M, labels, complete, counter, strategy, seed, citation, "feichtinger",
        {"a_min": float(a_min)},
        lambda part: riesz_sequence_bounds(P, part, tol, seed=seed).to_dict(),
        {"part_evaluations": oracle.evaluations, "max_M": max_M},
    )


def r_eps_search(
    P: PASF,
    eps: float,
    max_M: int | None = None,
    budget: Budget | None = None,
    *,
    strategy: str = "auto",
    seed: int = 0,
    tol: float = 1e-9,
) -> SearchReport:
    """Minimal partition into unit-norm eps-Riesz sequences."""
    if not 0.0 < eps < 1.0:
        raise ValueError("eps must lie in (0, 1)")
    un = unit_norm_check(P, None, tol)
    if not un:
        raise ValueError("unit-norm precondition fails: " + "; ".join(un.diagnostics[:4]))
    if not (is_riesz_basis(P, tol) or riesz_sequence_bounds(P, None, tol, seed=seed).lower > tol):
        raise ValueError("input is neither a Riesz basis nor a Riesz sequence")
    max_M = P.n if max_M is None else int(max_M)
    strategy = _auto_strategy(strategy, P.n)
    oracle = PartOracle(lambda part: is_eps_riesz(P, part, eps, tol))
    M, labels, complete, counter = _hereditary_search(P, oracle, max_M, budget, strategy, seed)
    return _finish_partition_report(
        P, M, labels, complete, counter, strategy, seed, "Conjecture 11", "r-eps",
        {"eps": float(eps)},
        lambda part: riesz_sequence_bounds(P, part, tol, seed=seed).to_dict(),
        {"part_evaluations": oracle.evaluations, "max_M": max_M},
    )


# Weaver


def _weaver_citation(unit_norm: bool, tight: bool, spectrum_nonneg: bool) -> str:
    if spectrum_nonneg:
        return "Conjecture 12.3"
    if unit_norm:
        return "Conjecture 12.2"
    if tight:
        return "Conjecture 12.1"
    return "Conjecture 12"


def _weaver_preconditions(P, b, unit_norm, tight, spectrum_nonneg, tol, seed):
    S = frame_operator(P)
    if unit_norm:
        chk = unit_norm_check(P, None, max(tol, 1e-9))
        if not chk:
            raise ValueError("unit_norm flag set but input is not unit norm: " + "; ".join(chk.diagnostics[:4]))
    else:
        fmax = float(np.max(P.functional_norms()))
        tmax = float(np.max(P.vector_norms()))
        if fmax > 1 + 1e-9 or tmax > 1 + 1e-9:
            raise ValueError(f"norm precondition fails: max ||f_j|| = {fmax:.6g}, max ||tau_j|| = {tmax:.6g}")
    sn = op_norm(S, P.r, P.r, seed=seed)
    if sn.lower > b + 1e-9:
        raise ValueError(f"||S|| = {sn.lower:.9g} exceeds b = {b}")
    if tight and not is_isometry(S / b, P.r, max(tol, 1e-9)):
        raise ValueError("tight flag set but S is not b times an isometry")
    if spectrum_nonneg:
        ev = np.linalg.eigvals(S)
        if np.any(np.abs(ev.imag) > 1e-9) or np.any(ev.real < -1e-9):
            raise ValueError("spectrum_nonneg flag set but the spectrum of S is not in [0, inf)")
    return S, sn


class _PartNorms:
    """Cached (lower, upper) of ||sum_{j in I} tau_j f_j||_{r->r} keyed by bitmask."""

    def __init__(self, P: PASF, seed: int):
        self.P = P
        self.seed = seed
        self.cache: dict[int, tuple[float, float]] = {0: (0.0, 0.0)}
        self.all_exact = True

    def __call__(self, mask: int) -> tuple[float, float]:
        hit = self.cache.get(mask)
        if hit is None:
            idx = [j for j in range(self.P.n) if mask >> j & 1]
            est = op_norm(self.P.T[:, idx] @ self.P.F[idx], self.P.r, self.P.r, seed=self.seed)
            self.all_exact &= est.exact
            hit = (est.lower, est.upper)
            self.cache[mask] = hit
        return hit


def _masks(labels, M):
    masks = [0] * M
    for j, lab in enumerate(labels):
        masks[lab] |= 1 << j
    return masks


def weaver_search(
    P: PASF,
    b: float,
    eps: float,
    M: int,
    *,
    unit_norm: bool = False,
    tight: bool = False,
    spectrum_nonneg: bool = False,
    budget: Budget | None = None,
    strategy: str = "auto",
    seed: int = 0,
    tol: float = 1e-9,
    check_norms: bool = True,
) -> SearchReport:
    """Minimize max_k ||S_k|| over partitions into at most M parts.

    ``check_norms=False`` skips the per-element norm precondition, which the
    continuous bridge needs for families that are only bounded in aggregate.
    """
    if not b > eps > 0:
        raise ValueError("need b > eps > 0")
    if M < 1:
        raise ValueError("M must be at least 1")
    if check_norms:
        S, sn = _weaver_preconditions(P, b, unit_norm, tight, spectrum_nonneg, tol, seed)
    else:
        S = frame_operator(P)
        sn = op_norm(S, P.r, P.r, seed=seed)
    strategy = _auto_strategy(strategy, P.n)
    if strategy == GREEDY:
        strategy = LOCAL_SEARCH
    target = b - eps
    norms = _PartNorms(P, seed)
    counter = BudgetCounter(budget)

    best_up = (INF, None)
    best_lo = INF
    complete = False
    if strategy == EXHAUSTIVE:
        complete = True
        for labels in restricted_growth_strings(P.n, M):
            if not counter.tick():
                complete = False
                break
            vals = [norms(m) for m in _masks(labels, M)]
            up = max(v[1] for v in vals)
            lo = max(v[0] for v in vals)
            if up < best_up[0] - TIE_SLACK:
                best_up = (up, labels)
            best_lo = min(best_lo, lo)
    else:
        best_up = _weaver_local(P.n, M, norms, seed, counter)

    value, labels = best_up
    details = {
        "b": float(b),
        "eps": float(eps),
        "M": int(M),
        "target": target,
        "min_max_part_norm": value,
        "full_norm": sn.upper,
        "all_norms_exact": norms.all_exact,
        "flags": {"unit_norm": unit_norm, "tight": tight, "spectrum_nonneg": spectrum_nonneg},
        "norm_precondition_checked": check_norms,
    }
    witness = None
    if labels is not None:
        parts = labels_to_parts(labels)
        per_part = []
        for part in parts:
            lo, up = norms(sum(1 << j for j in part))
            per_part.append({"index_set": part, "op_norm_lower": lo, "op_norm_upper": up})
        subadd = sn.lower <= sum(pp["op_norm_upper"] for pp in per_part) + 1e-9
        details["subadditive_consistent"] = bool(subadd)
        cert = PartitionCertificate(parts, per_part, "weaver", {"b": float(b), "eps": float(eps)})
        witness = cert.to_dict()

    if labels is not None and value <= target + TIE_SLACK:
        cert.verified = verify_certificate(cert, P)
        witness = cert.to_dict()
        status = HOLDS
    elif complete and best_lo > target + TIE_SLACK:
        status = REFUTED
        details["min_max_part_norm_lower"] = best_lo
    else:
        status = INCONCLUSIVE
    return SearchReport(
        status, witness, counter.nodes, strategy, seed, counter.wall_budget_exceeded,
        _weaver_citation(unit_norm, tight, spectrum_nonneg), details,
    )


def _weaver_local(n, M, norms, seed, counter):
    rng = random.Random(seed)
    best = (INF, None)
    for _ in range(LOCAL_RESTARTS):
        labels = [rng.randrange(M) for _ in range(n)]

        def score(lab):
            vals = sorted((norms(m)[1] for m in _masks(lab, M)), reverse=True)
            return tuple(vals)

        cur = score(labels)
        improved = True
        while improved and not counter.exhausted:
            improved = False
            for j in range(n):
                for lab in range(M):
                    if lab == labels[j]:
                        continue
                    if not counter.tick():
                        break
                    old = labels[j]
                    labels[j] = lab
                    s = score(labels)
                    if s < cur:
                        cur, improved = s, True
                    else:
                        labels[j] = old
        cand = canonical_labels(labels)
        if cur[0] < best[0] - TIE_SLACK or (abs(cur[0] - best[0]) <= TIE_SLACK and cand < best[1]):
            best = (cur[0], cand)
        if counter.exhausted:
            break
    return best


# Akemann-Weaver


def _batched_norms(mats: np.ndarray, r: float) -> np.ndarray:
    if r == 2.0:
        return np.linalg.norm(mats, 2, axis=(1, 2))
    if r == 1.0:
        return np.abs(mats).sum(axis=1).max(axis=1)
    return np.abs(mats).sum(axis=2).max(axis=1)


def _bits(k: int, n: int) -> np.ndarray:
    # index 0 is the most significant bit, so enumeration order is lexicographic
    return np.array([(k >> (n - 1 - i)) & 1 for i in range(n)], dtype=float)


def akemann_weaver_search(
    P: PASF,
    weights,
    budget: Budget | None = None,
    *,
    threshold: float | None = None,
    strategy: str = "auto",
    seed: int = 0,
    exhaustive_limit: int = AW_EXHAUSTIVE_N,
) -> SearchReport:
    """Subset whose partial frame operator best approximates sum_j w_j tau_j f_j."""
    w = np.asarray(weights, dtype=float).ravel()
    if w.size != P.n:
        raise ValueError(f"need {P.n} weights, got {w.size}")
    if np.any(~np.isfinite(w)) or np.any(w < 0) or np.any(w > 1):
        raise ValueError("weights must lie in [0, 1]")
    S = frame_operator(P)
    sn = op_norm(S, P.r, P.r, seed=seed)
    if sn.lower > 1 + 1e-9:
        raise ValueError(f"Bessel bound ||S|| = {sn.lower:.9g} exceeds 1")
    if strategy == "auto":
        strategy = EXHAUSTIVE if P.n <= exhaustive_limit else GREEDY
    target = (P.T * w) @ P.F
    counter = BudgetCounter(budget)
    exact = P.r in _BATCHED_R

    def disc(x):
        est = op_norm((P.T * x) @ P.F - target, P.r, P.r, seed=seed)
        return est

    best_val, best_bits, complete = INF, None, False
    if strategy == EXHAUSTIVE:
        n = P.n
        total = 1 << n
        complete = True
        if exact:
            shifts = np.arange(n - 1, -1, -1)
            for start in range(0, total, AW_CHUNK):
                ks = np.arange(start, min(total, start + AW_CHUNK))
                if not counter.tick(len(ks)):
                    complete = False
                    break
                ind = ((ks[:, None] >> shifts[None, :]) & 1).astype(float)
                mats = np.einsum("cn,dn,ne->cde", ind, P.T, P.F) - target
                vals = _batched_norms(mats, P.r)
                k = int(np.argmin(vals))
                if vals[k] < best_val - TIE_SLACK:
                    best_val, best_bits = float(vals[k]), ind[k]
        else:
            for k in range(total):
                if not counter.tick():
                    complete = False
                    break
                x = _bits(k, n)
                v = disc(x).upper
                if v < best_val - TIE_SLACK:
                    best_val, best_bits = v, x
    else:
        best_val, best_bits = _aw_greedy(P, w, disc, seed, counter)

    subset = [] if best_bits is None else [int(j) for j in np.flatnonzero(best_bits)]
    est = disc(np.zeros(P.n) if best_bits is None else best_bits)
    details = {
        "weights": [float(v) for v in w],
        "discrepancy": est.upper,
        "discrepancy_lower": est.lower,
        "method": est.method,
        "bessel_bound": sn.upper,
        "threshold": threshold,
    }
    witness = {"subset": subset, "discrepancy": est.upper}
    if threshold is None or est.upper <= threshold + TIE_SLACK:
        status = HOLDS
    elif complete and exact:
        status = REFUTED
    else:
        status = INCONCLUSIVE
    return SearchReport(
        status, witness, counter.nodes, strategy, seed, counter.wall_budget_exceeded, "Conjecture AW", details
    )


def _aw_greedy(P, w, disc, seed, counter):
    rng = random.Random(seed)
    best = (INF, None)
    for attempt in range(LOCAL_RESTARTS):
        order = list(range(P.n))
        if attempt:
            rng.shuffle(order)
        x = w.copy()
        for j in order:
            counter.tick()
            trial = []
            for v in (0.0, 1.0):
                x[j] = v
                trial.append(disc(x).upper)
            x[j] = 0.0 if trial[0] <= trial[1] else 1.0
        cur = disc(x).upper
        improved = True
        while improved and not counter.exhausted:
            improved = False
            for j in range(P.n):
                counter.tick()
                x[j] = 1.0 - x[j]
                v = disc(x).upper
                if v < cur - TIE_SLACK:
                    cur, improved = v, True
                else:
                    x[j] = 1.0 - x[j]
        if cur < best[0] - TIE_SLACK or (
            abs(cur - best[0]) <= TIE_SLACK and tuple(x) < tuple(best[1])
        ):
            # among ties prefer the lexicographically smallest bitstring (lowest index first set)
            best = (cur, x.copy())
        if counter.exhausted:
            break
    return best


# Certificates


def _independent_lower(TI: np.ndarray, p: float, r: float, seed: int) -> float:
    if p == 2.0 and r == 2.0:
        s = np.linalg.svd(TI, compute_uv=False)
        return float(s[-1]) if TI.shape[0] >= TI.shape[1] else 0.0
    return gain_lower_bound(TI, p, r, seed=seed, starts=96).lower


def _independent_upper(A: np.ndarray, r_in: float, r_out: float, seed: int) -> float:
    if r_in == r_out == 2.0:
        return float(np.linalg.norm(A, 2))
    if r_in == r_out == 1.0:
        return float(np.abs(A).sum(axis=0).max())
    if r_in == r_out == INF:
        return float(np.abs(A).sum(axis=1).max())
    return op_norm(A, r_in, r_out, seed=seed, starts=96).upper


def verify_certificate(cert: PartitionCertificate | dict, P: PASF, *, seed: int = 0, tol: float = 1e-9) -> bool:
    """Re-check a partition certificate from scratch with fresh seeds."""
    if isinstance(cert, dict):
        cert = PartitionCertificate.from_dict(cert)
    if cert.criterion not in CRITERIA:
        raise ValueError(f"malformed certificate: unknown criterion {cert.criterion!r}")
    need = {"feichtinger": ("a_min",), "weaver": ("b", "eps"), "r-eps": ("eps",)}[cert.criterion]
    for key in need:
        if key not in cert.thresholds:
            raise ValueError(f"malformed certificate: missing threshold {key!r}")
    flat = [i for part in cert.parts for i in part]
    if any(i < 0 or i >= P.n for i in flat):
        raise ValueError("malformed certificate: index out of range")
    if any(not part for part in cert.parts):
        return False
    if len(flat) != len(set(flat)) or set(flat) != set(range(P.n)):
        return False
    fresh = seed + VERIFY_SEED_OFFSET
    th = cert.thresholds
    for part in cert.parts:
        idx = sorted(part)
        TI, FI = P.T[:, idx], P.F[idx]
        if cert.criterion == "feichtinger":
            if _independent_lower(TI, P.p, P.r, fresh) < float(th["a_min"]) - 1e-12:
                return False
        elif cert.criterion == "weaver":
            if _independent_upper(TI @ FI, P.r, P.r, fresh) > float(th["b"]) - float(th["eps"]) + 1e-12:
                return False
        else:
            eps = float(th["eps"])
            for j in idx:
                vals = (p_norm(P.T[:, j], P.r), functional_norm(P.F[j], P.r), abs(float(P.F[j] @ P.T[:, j])))
                if any(abs(v - 1.0) > tol for v in vals):
                    return False
            lo = _independent_lower(TI, P.p, P.r, fresh)
            up = _independent_upper(TI, P.p, P.r, fresh)
            if lo < 1.0 - eps - tol or up > 1.0 + eps + tol:
                return False
    return True
