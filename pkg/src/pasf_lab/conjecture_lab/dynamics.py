"""Iterated systems (f_k U^m, V^m tau_k) for the dynamical sampling problem."""
from __future__ import annotations

import numpy as np

from ..frames import PASF


def dynamical_build(generators_f, generators_tau, U, V, horizon: int, p: float = 2.0, r: float = 2.0) -> PASF:
    """Rows f_k U^m and columns V^m tau_k, indexed by (k, m) lexicographically."""
    Gf = np.atleast_2d(np.asarray(generators_f, dtype=float))
    Gt = np.asarray(generators_tau, dtype=float)
    if Gt.ndim == 1:
        Gt = Gt[:, None]
    U = np.asarray(U, dtype=float)
    V = np.asarray(V, dtype=float)
    d = U.shape[0] if U.ndim == 2 else -1
    if U.shape != (d, d) or V.shape != (d, d):
        raise ValueError("U and V must be square and of equal size")
    if Gf.shape[1] != d or Gt.shape[0] != d:
        raise ValueError(f"generators must live in dimension {d}")
    if Gf.shape[0] != Gt.shape[1]:
        raise ValueError("need as many functional generators as vector generators")
    if horizon < 1:
        raise ValueError("horizon must be at least 1")
    rows, cols = [], []
    for k in range(Gf.shape[0]):
        f, t = Gf[k], Gt[:, k]
        for _ in range(horizon):
            rows.append(f)
            cols.append(t)
            f, t = f @ U, V @ t
    return PASF(np.array(rows), np.array(cols).T, p, r, f"dynamical K={Gf.shape[0]} M={horizon}")
