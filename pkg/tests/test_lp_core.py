import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from pasf_lab.lp_core import (
    INF,
    dual_exponent,
    functional_norm,
    gain_lower_bound,
    is_isometry,
    op_norm,
    p_norm,
    signed_permutations,
)

finite = st.floats(-10, 10, allow_nan=False, allow_infinity=False)
matrices = st.integers(1, 4).flatmap(
    lambda m: st.integers(1, 4).flatmap(lambda n: arrays(float, (m, n), elements=finite))
)


def _sampled_ratio(A, r_in, r_out, k=4000, seed=0):
    rng = np.random.default_rng(seed)
    X = rng.standard_normal((k, A.shape[1]))
    return max(p_norm(A @ x, r_out) / p_norm(x, r_in) for x in X)


def test_dual_exponent_pairs():
    assert dual_exponent(2.0) == 2.0
    assert dual_exponent(1.0) == INF
    assert dual_exponent(INF) == 1.0
    assert dual_exponent(3.0) == pytest.approx(1.5)


@pytest.mark.parametrize("bad", [0.5, 0.0, -1.0, float("nan")])
def test_rejects_bad_exponent(bad):
    with pytest.raises(ValueError):
        p_norm(np.ones(2), bad)


def test_p_norm_values():
    v = np.array([3.0, -4.0])
    assert p_norm(v, 2.0) == pytest.approx(5.0)
    assert p_norm(v, 1.0) == 7.0
    assert p_norm(v, INF) == 4.0
    assert functional_norm(v, 1.0) == 4.0


@settings(max_examples=60, deadline=None)
@given(matrices)
def test_spectral_norm_matches_svd(A):
    est = op_norm(A, 2.0, 2.0)
    s = np.linalg.norm(A, 2)
    assert est.lower <= est.upper + 1e-12
    assert est.upper == pytest.approx(s, rel=1e-9, abs=1e-12)


@settings(max_examples=60, deadline=None)
@given(matrices)
def test_one_and_inf_norms_are_exact(A):
    assert op_norm(A, 1.0, 1.0).upper == pytest.approx(np.abs(A).sum(axis=0).max(), abs=1e-12)
    assert op_norm(A, INF, INF).upper == pytest.approx(np.abs(A).sum(axis=1).max(), abs=1e-12)


@pytest.mark.parametrize("r_in,r_out", [(1.5, 1.5), (3.0, 3.0), (1.5, 3.0), (3.0, 1.5), (2.0, 1.0), (INF, 1.0)])
def test_general_norm_brackets_samples(r_in, r_out):
    rng = np.random.default_rng(4)
    for _ in range(5):
        A = rng.standard_normal((3, 3))
        est = op_norm(A, r_in, r_out, seed=1)
        sampled = _sampled_ratio(A, r_in, r_out)
        assert sampled <= est.upper * (1 + 1e-9)
        assert est.lower >= sampled * (1 - 1e-3)
        w = est.witness
        assert p_norm(A @ w, r_out) / p_norm(w, r_in) == pytest.approx(est.lower, rel=1e-9)


def test_riesz_thorin_upper_is_valid():
    A = np.array([[1.0, 2.0], [-3.0, 0.5]])
    est = op_norm(A, 3.0, 3.0)
    rt = np.abs(A).sum(0).max() ** (1 / 3) * np.abs(A).sum(1).max() ** (2 / 3)
    assert est.upper <= rt + 1e-12


def test_op_norm_is_seed_deterministic():
    A = np.random.default_rng(0).standard_normal((4, 3))
    a, b = op_norm(A, 1.5, 3.0, seed=7), op_norm(A, 1.5, 3.0, seed=7)
    assert a.to_dict() == b.to_dict()


def test_gain_lower_bound_spectral():
    A = np.array([[2.0, 0.0], [0.0, 0.5]])
    g = gain_lower_bound(A, 2.0, 2.0)
    assert g.lower <= 0.5 + 1e-12 <= g.upper + 1e-12
    assert g.upper == pytest.approx(0.5)


def test_gain_of_singular_matrix_is_zero():
    g = gain_lower_bound(np.array([[1.0, 1.0], [1.0, 1.0]]), 3.0, 3.0)
    assert g.upper <= 1e-12


def test_signed_permutation_count_and_isometry():
    for d in range(1, 4):
        perms = list(signed_permutations(d))
        assert len(perms) == 2**d * math.factorial(d)
        assert len({Q.tobytes() for Q in perms}) == len(perms)
        assert all(is_isometry(Q, 3.0) for Q in perms)


def test_rotation_is_isometry_only_for_two():
    c, s = math.cos(0.3), math.sin(0.3)
    R = np.array([[c, -s], [s, c]])
    assert is_isometry(R, 2.0)
    res = is_isometry(R, 3.0)
    assert not res
    assert res.witness is not None
    assert isinstance(bool(res), bool)


def test_zero_matrix_norm():
    est = op_norm(np.zeros((2, 3)), 1.5, 2.5)
    assert est.upper == 0.0
