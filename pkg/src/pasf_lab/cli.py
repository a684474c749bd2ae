"""Command-line front end.

Every subcommand writes ``report.json`` (deterministic for fixed argv and
input bytes) and ``run_record.json`` (timestamps, thread count, cache flag)
under ``--output-dir``.  Exit codes: 0 holds, 1 refuted, 2 inconclusive,
64 usage, 65 schema, 66 missing input, 74 I/O.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .conjecture_lab import (
    NormProfile,
    akemann_weaver_search,
    decomposition_search,
    dynamical_build,
    feichtinger_search,
    fundamental_inequality_check,
    inverse_design_search,
    majorization_check,
    r_eps_search,
    retrieval_check,
    scaling_solve,
    verify_certificate,
    weaver_search,
)
from .conjecture_lab.search import HOLDS, INCONCLUSIVE, REFUTED, Budget, PartitionCertificate
from .continuous import (
    RULES,
    ContinuousPASF,
    circle_example,
    cont_frame_operator,
    cont_norm_estimates,
    cont_riesz_defect,
    continuous_conjecture_bridge,
    discretize,
    make_quadrature,
)
from .frames import (
    PASF,
    classify,
    frame_bounds,
    is_riesz_basis,
    make_pasf,
    riesz_sequence_bounds,
)
from .lp_core import dual_exponent, p_norm
from .reconstruct import duffin_schaeffer
from .serialization import (
    SchemaError,
    atomic_write,
    dumps,
    frame_to_dict,
    load_frame,
    load_json,
    sha256_bytes,
)

EXIT_HOLDS, EXIT_REFUTED, EXIT_INCONCLUSIVE = 0, 1, 2
EXIT_USAGE, EXIT_SCHEMA, EXIT_NOINPUT, EXIT_IO = 64, 65, 66, 74
STATUS_EXIT = {HOLDS: EXIT_HOLDS, REFUTED: EXIT_REFUTED, INCONCLUSIVE: EXIT_INCONCLUSIVE}
THREADS_ENV = "PASF_LAB_THREADS"
REPORT_NAME = "report.json"
RECORD_NAME = "run_record.json"
CACHE_DIR = ".cache"
# operational settings that never influence results
OPERATIONAL = ("threads", "output_dir", "no_cache", "config")

SUBCOMMANDS = (
    "analyze", "certify-riesz", "partition", "scale", "reconstruct", "retrieval",
    "dynamics", "continuous", "inequality", "decompose", "verify",
)
FRAME_SUBCOMMANDS = {"analyze", "certify-riesz", "partition", "scale", "reconstruct", "retrieval", "decompose", "verify"}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


@dataclass
class Outcome:
    exit_code: int
    status: str
    citation: str
    result: dict
    files: dict = field(default_factory=dict)
    warnings: list = field(default_factory=list)


# parser construction

_DEFAULTS: dict[str, dict] = {}


def _opt(parser, sub, *flags, default=None, **kw):
    action = parser.add_argument(*flags, default=argparse.SUPPRESS, **kw)
    _DEFAULTS.setdefault(sub, {})[action.dest] = default
    return action


def _common(p, sub):
    _opt(p, sub, "--seed", type=int, default=0)
    _opt(p, sub, "--budget-nodes", type=int, default=20_000_000)
    _opt(p, sub, "--budget-seconds", type=float, default=None)
    _opt(p, sub, "--tol", type=float, default=1e-9)
    _opt(p, sub, "--threads", type=int, default=None)
    _opt(p, sub, "--output-dir", default="pasf_out")
    _opt(p, sub, "--no-cache", action="store_true", default=False)
    _opt(p, sub, "--config", default=None, help="JSON file of option values")


def _frame_opts(p, sub):
    _opt(p, sub, "--frame", default=None, help="PASF JSON file")
    _opt(p, sub, "--builtin", choices=("standard", "duplicated-standard", "random"), default=None)
    _opt(p, sub, "--d", type=int, default=None)
    _opt(p, sub, "--n", type=int, default=None)
    _opt(p, sub, "--k", type=int, default=2)
    _opt(p, sub, "--p", type=float, default=2.0)
    _opt(p, sub, "--r", type=float, default=None)
    _opt(p, sub, "--frame-seed", type=int, default=0)
    _opt(p, sub, "--no-normalize", action="store_true", default=False)


def build_parser() -> argparse.ArgumentParser:
    _DEFAULTS.clear()
    parser = _Parser(prog="pasf-lab", description="Numerical laboratory for p-approximate Schauder frames.")
    parser.add_argument("--version", action="version", version=f"pasf-lab {__version__}")
    subs = parser.add_subparsers(dest="subcommand", required=True, parser_class=_Parser)

    def add(name, help_text, frame=True):
        p = subs.add_parser(name, help=help_text)
        _common(p, name)
        if frame:
            _frame_opts(p, name)
        return p

    add("analyze", "classify a frame and report its bounds")

    p = add("certify-riesz", "Riesz basis or Riesz sequence certificate")
    _opt(p, "certify-riesz", "--index-set", default=None, help="comma-separated indices")

    p = add("partition", "Feichtinger, Weaver, R_eps or Akemann-Weaver search")
    s = "partition"
    _opt(p, s, "--criterion", choices=("feichtinger", "weaver", "r-eps", "akemann-weaver"), default=None)
    _opt(p, s, "--a-min", type=float, default=None)
    _opt(p, s, "--max-M", type=int, default=None)
    _opt(p, s, "--b", type=float, default=None)
    _opt(p, s, "--eps", type=float, default=None)
    _opt(p, s, "--M", type=int, default=None)
    _opt(p, s, "--weights", default=None, help="one value or a comma-separated list")
    _opt(p, s, "--threshold", type=float, default=None)
    _opt(p, s, "--unit-norm", action="store_true", default=False)
    _opt(p, s, "--tight", action="store_true", default=False)
    _opt(p, s, "--spectrum-nonneg", action="store_true", default=False)
    _opt(p, s, "--strategy", choices=("auto", "exhaustive", "greedy", "local-search"), default="auto")
    _opt(p, s, "--sweep-M", default=None, help="Weaver objective for each listed M (CSV)")

    add("scale", "solve the scaling problem")

    p = add("reconstruct", "iterative frame reconstruction")
    s = "reconstruct"
    _opt(p, s, "--x", default=None, help="ground-truth vector; coefficients are F x")
    _opt(p, s, "--coeffs", default=None, help="coefficient vector c")
    _opt(p, s, "--noise", type=float, default=0.0, help="l2 size of seeded coefficient noise")
    _opt(p, s, "--max-iters", type=int, default=100)
    _opt(p, s, "--include-iterates", action="store_true", default=False)

    p = add("retrieval", "phase or norm retrieval certificate")
    _opt(p, "retrieval", "--side", choices=("vector", "functional"), default="vector")
    _opt(p, "retrieval", "--kind", choices=("phase", "norm"), default="phase")

    p = add("dynamics", "assemble (f_k U^m, V^m tau_k) and classify it", frame=False)
    _opt(p, "dynamics", "--system", default=None, help="JSON with f, tau, U, V, M, p, r")

    p = add("continuous", "continuous families via quadrature", frame=False)
    s = "continuous"
    _opt(p, s, "--family", choices=("circle",), default="circle")
    _opt(p, s, "--table", default=None, help="CSV rows: alpha, w, f_1..f_d, tau_1..tau_d")
    _opt(p, s, "--p", type=float, default=2.0)
    _opt(p, s, "--r", type=float, default=None, help="space exponent for tabulated families")
    _opt(p, s, "--rule", choices=RULES, default="trapezoid")
    _opt(p, s, "--N", type=int, default=16)
    _opt(p, s, "--task", choices=("operator", "norms", "discretize", "defect", "bridge"), default="operator")
    _opt(p, s, "--samples", type=int, default=4096)
    _opt(p, s, "--which", choices=("feichtinger", "weaver", "akemann-weaver"), default=None)
    _opt(p, s, "--a-min", type=float, default=None)
    _opt(p, s, "--max-M", type=int, default=None)
    _opt(p, s, "--b", type=float, default=None)
    _opt(p, s, "--eps", type=float, default=None)
    _opt(p, s, "--M", type=int, default=None)
    _opt(p, s, "--weights", default=None)
    _opt(p, s, "--threshold", type=float, default=None)
    _opt(p, s, "--sweep-N", default=None, help="frame-operator error for each listed N (CSV)")

    p = add("inequality", "fundamental inequality, majorization, inverse design", frame=False)
    s = "inequality"
    _opt(p, s, "--profile", default=None, help="JSON with a, b, c, exponents")
    _opt(p, s, "--d", type=int, default=None)
    _opt(p, s, "--n", type=int, default=None)
    _opt(p, s, "--lambda", dest="lam", default=None, help="comma-separated eigenvalues, descending")
    _opt(p, s, "--design", choices=("tight-with-norms", "frame-operator-with-norms"), default=None)
    _opt(p, s, "--S-target", default=None, help="JSON matrix")
    _opt(p, s, "--p", type=float, default=2.0)
    _opt(p, s, "--r", type=float, default=2.0)
    _opt(p, s, "--starts", type=int, default=64)

    p = add("decompose", "decompose T over p-orthonormal bases")
    _opt(p, "decompose", "--mode", choices=("lin-comb", "multiple-of-sum", "onb-plus-riesz"), default="lin-comb")
    _opt(p, "decompose", "--M", type=int, default=2)

    p = add("verify", "re-verify a partition certificate")
    _opt(p, "verify", "--certificate", default=None, help="certificate or report JSON")
    return parser


# helpers


def _floats(text, name) -> np.ndarray:
    try:
        return np.array([float(v) for v in str(text).split(",") if v.strip() != ""])
    except ValueError as exc:
        raise UsageError(f"--{name} expects comma-separated numbers") from exc


def _ints(text, name) -> list[int]:
    try:
        return [int(v) for v in str(text).split(",") if v.strip() != ""]
    except ValueError as exc:
        raise UsageError(f"--{name} expects comma-separated integers") from exc


def _need(cfg, *keys):
    missing = [k for k in keys if cfg.get(k) is None]
    if missing:
        raise UsageError("missing required option(s): " + ", ".join("--" + k.replace("_", "-") for k in missing))


def _budget(cfg) -> Budget:
    return Budget(cfg["budget_nodes"], cfg["budget_seconds"])


def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([repr(v) if isinstance(v, float) else v for v in row])
    return buf.getvalue()


def _report_outcome(rep, files=None) -> Outcome:
    return Outcome(STATUS_EXIT[rep.status], rep.status, rep.citation, rep.to_dict(), files or {})


def _frame_input(cfg) -> tuple[PASF, str, list[str]]:
    if cfg.get("frame") and cfg.get("builtin"):
        raise UsageError("give either --frame or --builtin, not both")
    if cfg.get("frame"):
        P, warnings, digest = load_frame(cfg["frame"])
        return P, digest, warnings
    if not cfg.get("builtin"):
        raise UsageError("an input frame is required (--frame or --builtin)")
    kind = cfg["builtin"]
    _need(cfg, "d")
    p = cfg["p"]
    r = p if cfg.get("r") is None else cfg["r"]
    params = {"d": cfg["d"]}
    if kind == "duplicated-standard":
        params.update(k=cfg["k"], normalize=not cfg["no_normalize"])
    elif kind == "random":
        params.update(n=cfg["n"] if cfg.get("n") is not None else cfg["d"], seed=cfg["frame_seed"])
    P = make_pasf(kind, p=p, r=r, **params)
    spec = {"builtin": kind, "p": p, "r": r, **params}
    return P, sha256_bytes(dumps(spec).encode()), []


# handlers


def _analyze(P, cfg, _) -> Outcome:
    cls = classify(P, cfg["tol"])
    fb = frame_bounds(P, seed=cfg["seed"])
    rb = is_riesz_basis(P, cfg["tol"])
    result = {
        "class": cls.tag,
        "lambda": cls.lam,
        "evidence": cls.evidence,
        "frame_bounds": {"a": fb.a, "b": fb.b, "a_cert": fb.a_cert.to_dict(), "b_cert": fb.b_cert.to_dict()},
        "riesz_basis": {"ok": rb.ok, "defect": rb.defect, "gram_rank": rb.gram_rank},
        "frame": {"n": P.n, "d": P.d, "p": P.p, "r": P.r, "label": P.label},
    }
    return Outcome(EXIT_HOLDS, HOLDS, "p-ASF definition", result)


def _certify(P, cfg, _) -> Outcome:
    if cfg.get("index_set"):
        rsb = riesz_sequence_bounds(P, _ints(cfg["index_set"], "index-set"), cfg["tol"], seed=cfg["seed"])
        ok = rsb.is_riesz
        result = {"mode": "sequence", **rsb.to_dict()}
    else:
        rb = is_riesz_basis(P, cfg["tol"])
        ok = rb.ok
        result = {"mode": "basis", "ok": rb.ok, "defect": rb.defect, "gram_rank": rb.gram_rank}
    status = HOLDS if ok else REFUTED
    return Outcome(STATUS_EXIT[status], status, "Riesz characterization", result)


def _partition(P, cfg, _) -> Outcome:
    crit = cfg.get("criterion")
    _need(cfg, "criterion")
    budget, seed, tol = _budget(cfg), cfg["seed"], cfg["tol"]
    strategy = cfg["strategy"]
    if crit == "feichtinger":
        _need(cfg, "a_min")
        return _report_outcome(feichtinger_search(P, cfg["a_min"], cfg.get("max_M"), budget,
                                                  strategy=strategy, seed=seed, tol=tol))
    if crit == "r-eps":
        _need(cfg, "eps")
        return _report_outcome(r_eps_search(P, cfg["eps"], cfg.get("max_M"), budget,
                                            strategy=strategy, seed=seed, tol=tol))
    if crit == "akemann-weaver":
        _need(cfg, "weights")
        w = _floats(cfg["weights"], "weights")
        w = np.full(P.n, w[0]) if w.size == 1 else w
        aw_strategy = "auto" if strategy in ("auto",) else ("exhaustive" if strategy == "exhaustive" else "greedy")
        return _report_outcome(akemann_weaver_search(P, w, budget, threshold=cfg.get("threshold"),
                                                     strategy=aw_strategy, seed=seed))
    _need(cfg, "b", "eps", "M")
    flags = dict(unit_norm=cfg["unit_norm"], tight=cfg["tight"], spectrum_nonneg=cfg["spectrum_nonneg"])

    def run_m(M):
        return weaver_search(P, cfg["b"], cfg["eps"], M, budget=budget, strategy=strategy, seed=seed, tol=tol, **flags)

    rep = run_m(cfg["M"])
    files = {}
    if cfg.get("sweep_M"):
        rows = []
        for M in _ints(cfg["sweep_M"], "sweep-M"):
            r = rep if M == cfg["M"] else run_m(M)
            rows.append([M, r.details["min_max_part_norm"], r.status, r.nodes_examined])
        files["weaver_sweep.csv"] = _csv_text(["M", "min_max_part_norm", "status", "nodes_examined"], rows)
    return _report_outcome(rep, files)


def _scale(P, cfg, _) -> Outcome:
    res = scaling_solve(P)
    result = res.to_dict()
    if res.scalable:
        result["scaled_class"] = classify(res.apply(P), 1e-8).tag
    status = HOLDS if res.scalable else REFUTED
    return Outcome(STATUS_EXIT[status], status, "Scaling problem", result)


def _reconstruct(P, cfg, _) -> Outcome:
    if (cfg.get("x") is None) == (cfg.get("coeffs") is None):
        raise UsageError("give exactly one of --x or --coeffs")
    truth = None
    if cfg.get("x") is not None:
        truth = _floats(cfg["x"], "x")
        if truth.size != P.d:
            raise UsageError(f"--x needs {P.d} entries")
        c = P.F @ truth
    else:
        c = _floats(cfg["coeffs"], "coeffs")
    if cfg["noise"] > 0:
        eta = np.random.default_rng(cfg["seed"]).standard_normal(P.n)
        c = c + cfg["noise"] * eta / np.linalg.norm(eta)
    trace = duffin_schaeffer(P, c, cfg["max_iters"], cfg["tol"], truth, seed=cfg["seed"])
    result = trace.to_dict(cfg["include_iterates"])
    result["notes"] = trace.notes
    status = HOLDS if trace.converged else INCONCLUSIVE
    files = {"errors.csv": _csv_text(["k", trace.error_kind], [[k, e] for k, e in enumerate(trace.errors)])}
    return Outcome(STATUS_EXIT[status], status, "Frame algorithm", result, files)


def _retrieval(P, cfg, _) -> Outcome:
    return _report_outcome(retrieval_check(P, cfg["side"], cfg["kind"], tol=cfg["tol"], seed=cfg["seed"]))


def _decompose(P, cfg, _) -> Outcome:
    return _report_outcome(decomposition_search(P, cfg["mode"], cfg["M"], _budget(cfg), seed=cfg["seed"], tol=cfg["tol"]))


def _verify(P, cfg, extra) -> Outcome:
    data = extra["certificate"]
    if isinstance(data, dict) and "criterion" not in data:
        for path in (("result", "witness"), ("witness",)):
            node = data
            for key in path:
                node = node.get(key) if isinstance(node, dict) else None
            if isinstance(node, dict) and "criterion" in node:
                data = node
                break
    if not isinstance(data, dict):
        raise SchemaError("certificate must be a JSON object")
    try:
        cert = PartitionCertificate.from_dict(data)
        ok = verify_certificate(cert, P, seed=cfg["seed"], tol=cfg["tol"])
    except ValueError as exc:
        raise SchemaError(str(exc)) from exc
    status = HOLDS if ok else REFUTED
    result = {"verified": ok, "criterion": cert.criterion, "M": cert.M, "thresholds": cert.thresholds}
    return Outcome(STATUS_EXIT[status], status, "certificate re-verification", result)


def _dynamics(cfg, extra) -> Outcome:
    sysd = extra["system"]
    try:
        P = dynamical_build(sysd["f"], np.array(sysd["tau"], dtype=float).T, sysd["U"], sysd["V"],
                            int(sysd["M"]), sysd.get("p", 2.0), sysd.get("r", sysd.get("p", 2.0)))
    except KeyError as exc:
        raise SchemaError(f"system file lacks {exc}") from exc
    cls = classify(P, cfg["tol"])
    rb = is_riesz_basis(P, cfg["tol"])
    result = {"class": cls.tag, "lambda": cls.lam, "riesz_basis": {"ok": rb.ok, "defect": rb.defect},
              "n": P.n, "d": P.d}
    files = {"frame.json": json.dumps(frame_to_dict(P), indent=1) + "\n"}
    return Outcome(EXIT_HOLDS, HOLDS, "Dynamical sampling problem", result, files)


def _load_table(path, p, r) -> tuple[ContinuousPASF, str]:
    raw = Path(path).read_bytes()
    rows = []
    for line in raw.decode("utf-8").splitlines():
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        try:
            rows.append([float(v) for v in line.split(",")])
        except ValueError:
            if rows:
                raise SchemaError(f"non-numeric row in table: {line!r}")
            continue  # header
    arr = np.array(rows)
    if arr.ndim != 2 or arr.shape[1] < 4 or (arr.shape[1] - 2) % 2:
        raise SchemaError("table needs columns alpha, w, f_1..f_d, tau_1..tau_d")
    if not np.all(np.isfinite(arr)):
        raise SchemaError("table has non-finite entries")
    d = (arr.shape[1] - 2) // 2
    C = ContinuousPASF.from_table(arr[:, 0], arr[:, 1], arr[:, 2 : 2 + d], arr[:, 2 + d :], p, r, Path(path).name)
    return C, sha256_bytes(raw)


def _continuous(cfg, extra) -> Outcome:
    C = extra["family"]
    circle = extra["circle"]
    Q = make_quadrature(cfg["rule"], cfg["N"], C.domain)
    task = cfg["task"]
    files = {}
    citation = "Continuous example" if circle else "Continuous p-ASF definition"
    if cfg.get("sweep_N"):
        Ns = _ints(cfg["sweep_N"], "sweep-N")
        ref = np.pi * np.eye(2) if circle else cont_frame_operator(C, make_quadrature(cfg["rule"], max(Ns), C.domain))
        rows = [[N, cfg["rule"], float(np.linalg.norm(cont_frame_operator(C, make_quadrature(cfg["rule"], N, C.domain)) - ref, 2))]
                for N in Ns]
        files["quadrature_sweep.csv"] = _csv_text(["N", "rule", "frame_operator_error"], rows)
    if task == "operator":
        S = cont_frame_operator(C, Q)
        result = {"S": S}
        if circle:
            result["error_vs_pi_identity"] = float(np.linalg.norm(S - np.pi * np.eye(2), 2))
    elif task == "norms":
        est = cont_norm_estimates(C, Q, cfg["samples"], cfg["seed"])
        result = est.to_dict()
        if circle:
            q = dual_exponent(C.p)
            result["analysis_bound"] = (2 * np.pi) ** (1 / C.p)
            result["synthesis_bound"] = 2 * (2 * np.pi) ** (0.0 if q == np.inf else 1 / q)
    elif task == "discretize":
        P = discretize(C, Q)
        cls = classify(P, cfg["tol"])
        result = {"class": cls.tag, "lambda": cls.lam, "label": P.label}
        files["frame.json"] = json.dumps(frame_to_dict(P), indent=1) + "\n"
    elif task == "defect":
        result = {"defect": cont_riesz_defect(C, Q, seed=cfg["seed"]), "N": Q.N,
                  "caveat": "per-resolution evidence only; node space has dimension N"}
    else:
        _need(cfg, "which")
        which = cfg["which"]
        if which == "feichtinger":
            _need(cfg, "a_min")
            params = {"a_min": cfg["a_min"], "max_M": cfg.get("max_M")}
        elif which == "weaver":
            _need(cfg, "b", "eps", "M")
            params = {"b": cfg["b"], "eps": cfg["eps"], "M": cfg["M"]}
        else:
            w = _floats(cfg["weights"], "weights") if cfg.get("weights") else np.array([0.5])
            params = {"weights": w if w.size > 1 else float(w[0]), "threshold": cfg.get("threshold")}
        rep = continuous_conjecture_bridge(C, Q, which, params, _budget(cfg), cfg["seed"])
        return _report_outcome(rep, files)
    return Outcome(EXIT_HOLDS, HOLDS, citation, result, files)


def _inequality(cfg, extra) -> Outcome:
    prof = extra.get("profile")
    if cfg.get("design"):
        _need(cfg, "d")
        n = cfg.get("n") or (prof.n if prof is not None else None)
        if n is None:
            raise UsageError("--n is required when no profile is given")
        S_target = None
        if cfg.get("S_target"):
            try:
                S_target = np.array(json.loads(cfg["S_target"]), dtype=float)
            except (json.JSONDecodeError, ValueError) as exc:
                raise UsageError("--S-target must be a JSON matrix") from exc
        rep = inverse_design_search(cfg["design"], cfg["d"], n, prof, S_target, _budget(cfg), cfg["seed"],
                                    p=cfg["p"], r=cfg["r"], starts=cfg["starts"])
        return _report_outcome(rep)
    if prof is None:
        raise UsageError("--profile is required")
    _need(cfg, "d")
    result = {"fundamental": fundamental_inequality_check(prof, cfg["d"])}
    ok = result["fundamental"]["combined"]
    if cfg.get("lam"):
        result["majorization"] = majorization_check(prof, _floats(cfg["lam"], "lambda"))
        ok = ok and result["majorization"]["combined"]
    status = HOLDS if ok else REFUTED
    return Outcome(STATUS_EXIT[status], status, "Fundamental inequality conjecture", result)


FRAME_HANDLERS = {
    "analyze": _analyze,
    "certify-riesz": _certify,
    "partition": _partition,
    "scale": _scale,
    "reconstruct": _reconstruct,
    "retrieval": _retrieval,
    "decompose": _decompose,
    "verify": _verify,
}


# inputs, config, cache


def _gather_inputs(sub, cfg):
    """Load everything the subcommand reads; returns (frame, extra, digest, warnings)."""
    warnings: list[str] = []
    digests: list[str] = []
    P, extra = None, {}
    if sub in FRAME_SUBCOMMANDS:
        P, dg, warnings = _frame_input(cfg)
        digests.append(dg)
    if sub == "verify":
        _need(cfg, "certificate")
        data, dg = load_json(cfg["certificate"])
        extra["certificate"] = data
        digests.append(dg)
    elif sub == "dynamics":
        _need(cfg, "system")
        data, dg = load_json(cfg["system"])
        if not isinstance(data, dict):
            raise SchemaError("system file must hold a JSON object")
        extra["system"] = data
        digests.append(dg)
    elif sub == "continuous":
        if cfg.get("table"):
            r = cfg["p"] if cfg.get("r") is None else cfg["r"]
            C, dg = _load_table(cfg["table"], cfg["p"], r)
            extra.update(family=C, circle=False)
        else:
            C = circle_example(cfg["p"])
            dg = sha256_bytes(dumps({"family": "circle", "p": cfg["p"]}).encode())
            extra.update(family=C, circle=True)
        digests.append(dg)
    elif sub == "inequality":
        if cfg.get("profile"):
            data, dg = load_json(cfg["profile"])
            try:
                extra["profile"] = NormProfile(data["a"], data["b"], data["c"], tuple(data.get("exponents", (2, 2, 2))))
            except (KeyError, TypeError) as exc:
                raise SchemaError(f"profile file malformed: {exc}") from exc
            digests.append(dg)
        else:
            digests.append(sha256_bytes(b"no-profile"))
    digest = digests[0] if len(digests) == 1 else sha256_bytes("".join(digests).encode())
    return P, extra, digest, warnings


def _load_config(path, sub) -> dict:
    try:
        data, _ = load_json(path)
    except FileNotFoundError:
        raise
    if not isinstance(data, dict):
        raise UsageError("config file must hold a JSON object")
    known = set(_DEFAULTS[sub]) - {"config"}
    out = {}
    for key, value in data.items():
        dest = key.lstrip("-").replace("-", "_")
        if dest == "lambda":
            dest = "lam"
        if dest not in known:
            raise UsageError(f"unknown config key {key!r} for {sub}")
        out[dest] = value
    return out


def _resolve(argv) -> tuple[str, dict]:
    parser = build_parser()
    ns = vars(parser.parse_args(argv))
    sub = ns.pop("subcommand")
    cfg = dict(_DEFAULTS[sub])
    if ns.get("config"):
        cfg.update(_load_config(ns["config"], sub))
    cfg.update(ns)
    if cfg["budget_nodes"] is None or cfg["budget_nodes"] <= 0:
        raise UsageError("--budget-nodes must be positive")
    if cfg["budget_seconds"] is not None and cfg["budget_seconds"] <= 0:
        raise UsageError("--budget-seconds must be positive")
    if cfg["tol"] is None or not cfg["tol"] > 0:
        raise UsageError("--tol must be positive")
    return sub, cfg


def _threads(cfg) -> int:
    env = os.environ.get(THREADS_ENV)
    if env:
        try:
            value = int(env)
        except ValueError as exc:
            raise UsageError(f"{THREADS_ENV} must be an integer") from exc
    elif cfg.get("threads") is not None:
        value = int(cfg["threads"])
    else:
        value = os.cpu_count() or 1
    if value < 1:
        raise UsageError("thread count must be positive")
    return value


def _cache_key(sub, resolved, digest) -> str:
    blob = dumps({"subcommand": sub, "config": resolved, "input_digest": digest, "version": __version__})
    return sha256_bytes(blob.encode())


def _cache_lookup(out_dir: Path, key: str):
    path = out_dir / CACHE_DIR / f"{key}.json"
    if not path.exists():
        return None
    try:
        entry = json.loads(path.read_text(encoding="utf-8"))
        if entry.get("key") != key or not isinstance(entry.get("report"), str):
            raise ValueError("key mismatch")
        return entry
    except (OSError, ValueError) as exc:
        print(f"warning: skipping corrupted cache record {path.name}: {exc}", file=sys.stderr)
        return None


def _execute(argv) -> int:
    started = time.time()
    sub, cfg = _resolve(argv)
    threads = _threads(cfg)
    P, extra, digest, warnings = _gather_inputs(sub, cfg)
    resolved = {k: v for k, v in sorted(cfg.items()) if k not in OPERATIONAL}
    out_dir = Path(cfg["output_dir"])
    key = _cache_key(sub, resolved, digest)

    entry = None if cfg["no_cache"] else _cache_lookup(out_dir, key)
    cached = entry is not None
    if entry is None:
        if sub in FRAME_HANDLERS:
            outcome = FRAME_HANDLERS[sub](P, cfg, extra)
        elif sub == "dynamics":
            outcome = _dynamics(cfg, extra)
        elif sub == "continuous":
            outcome = _continuous(cfg, extra)
        else:
            outcome = _inequality(cfg, extra)
        outcome.warnings = warnings + outcome.warnings
        report = {
            "tool_version": __version__,
            "subcommand": sub,
            "citation": outcome.citation,
            "status": outcome.status,
            "exit_code": outcome.exit_code,
            "config": resolved,
            "input_digest": digest,
            "warnings": outcome.warnings,
            "result": outcome.result,
        }
        entry = {"key": key, "report": dumps(report), "exit_code": outcome.exit_code, "files": outcome.files,
                 "warnings": outcome.warnings}
        if not cfg["no_cache"]:
            atomic_write(out_dir / CACHE_DIR / f"{key}.json", json.dumps(entry, sort_keys=True))

    atomic_write(out_dir / REPORT_NAME, entry["report"])
    for name, text in sorted(entry["files"].items()):
        atomic_write(out_dir / name, text)
    record = {
        "tool_version": __version__,
        "subcommand": sub,
        "argv": list(argv),
        "config": {k: v for k, v in sorted(cfg.items())},
        "input_digest": digest,
        "threads": threads,
        "cached": cached,
        "cache_key": key,
        "started": started,
        "finished": time.time(),
        "warnings": entry.get("warnings", []),
        "report": REPORT_NAME,
    }
    atomic_write(out_dir / RECORD_NAME, dumps(record))
    for w in entry.get("warnings", []):
        print(f"warning: {w}", file=sys.stderr)
    print(f"{sub}: exit {entry['exit_code']} -> {out_dir / REPORT_NAME}" + (" (cached)" if cached else ""))
    return int(entry["exit_code"])


def run(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        return _execute(argv)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SchemaError as exc:
        print(f"schema error: {exc}", file=sys.stderr)
        return EXIT_SCHEMA
    except FileNotFoundError as exc:
        print(f"no input: {exc}", file=sys.stderr)
        return EXIT_NOINPUT
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (ValueError, IndexError) as exc:
        print(f"precondition failed: {exc}", file=sys.stderr)
        return EXIT_USAGE


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
