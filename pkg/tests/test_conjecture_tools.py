import numpy as np
import pytest

from pasf_lab.conjecture_lab import (
    HOLDS,
    INCONCLUSIVE,
    REFUTED,
    NormProfile,
    decomposition_search,
    dynamical_build,
    fundamental_inequality_check,
    inverse_design_search,
    kothe_lorch_check,
    majorization_check,
    retrieval_check,
    scaling_solve,
    witness_pasf,
)
from pasf_lab.frames import PASF, classify, frame_operator, make_pasf
from pasf_lab.lp_core import is_isometry


# scaling


def test_scaling_recovers_known_scalars():
    ang = 2 * np.pi * np.arange(3) / 3
    T0 = np.sqrt(2 / 3) * np.stack([np.cos(ang), np.sin(ang)])
    s = np.array([0.5, 2.0, 1.5])
    P = PASF(T0.T.copy(), T0 / s, 2.0, 2.0)
    res = scaling_solve(P)
    assert res.scalable and np.allclose(res.c, s)
    assert not res.signed
    assert np.allclose(frame_operator(res.apply(P)), np.eye(2))


def test_scaling_flags_signed_solutions():
    P = PASF(np.eye(2), -np.eye(2), 2.0, 2.0)
    res = scaling_solve(P)
    assert res.scalable and res.signed
    assert classify(res.apply(P)).tag in ("parseval", "p-orthonormal-basis")


def test_scaling_obstruction():
    P = PASF(np.array([[1.0, 0.0], [1.0, 0.0]]), np.array([[1.0, 1.0], [0.0, 1.0]]), 2.0, 2.0)
    res = scaling_solve(P)
    assert not res.scalable and res.residual > 1e-3
    assert set(res.to_dict()) >= {"c", "residual", "scalable"}


def test_kothe_lorch_reports_without_verdict():
    out = kothe_lorch_check(make_pasf("standard", d=2))
    assert out["verdict"] is None
    assert out["riesz_basis"]["ok"] and out["expansion_identity"]["ok"] and out["norm_sandwich"]["ok"]


# retrieval


def test_phase_witness_is_genuine():
    rep = retrieval_check(make_pasf("standard", d=2), kind="phase")
    assert rep.status == REFUTED
    assert rep.witness == {"x": [1.0, 1.0], "y": [1.0, -1.0], "sign_pattern": [1, -1], "side": "vector"}


def test_three_vectors_retrieve_phase_on_both_sides():
    F = np.array([[1.0, 0.0], [0.0, 1.0], [1.0, 1.0]])
    P = PASF(F, F.T.copy(), 2.0, 2.0)
    assert retrieval_check(P, side="vector").status == HOLDS
    assert retrieval_check(P, side="functional").status == HOLDS


def test_norm_retrieval_fails_for_collinear_pair():
    F = np.array([[1.0, 0.0], [1.0, 0.0]])
    P = PASF(F, F.T.copy(), 3.0, 3.0)
    rep = retrieval_check(P, kind="norm")
    assert rep.status == REFUTED
    x, y = np.array(rep.witness["x"]), np.array(rep.witness["y"])
    assert np.allclose(np.abs(F @ x), np.abs(F @ y))
    assert abs(np.sum(np.abs(x) ** 3) - np.sum(np.abs(y) ** 3)) > 1e-6


def test_retrieval_argument_checks():
    P = make_pasf("standard", d=2)
    with pytest.raises(ValueError):
        retrieval_check(P, side="both")
    with pytest.raises(ValueError):
        retrieval_check(make_pasf("duplicated-standard", d=1, k=21), kind="phase")


# decomposition


def test_multiple_of_sum():
    T = np.array([[2.0, 2.0], [-2.0, 2.0]])
    P = PASF(np.linalg.inv(T), T, 3.0, 3.0)
    rep = decomposition_search(P, "multiple-of-sum")
    assert rep.status == HOLDS and rep.witness["mu"] == pytest.approx(2.0)
    assert rep.witness["reconstruction_error"] <= 1e-12 and rep.witness["isometries_ok"]
    assert rep.citation == "Conjecture 14"


def test_onb_plus_riesz():
    T = np.array([[3.0, 1.0], [0.0, 2.0]])
    P = PASF(np.linalg.inv(T), T, 1.0, 1.0)
    rep = decomposition_search(P, "onb-plus-riesz")
    assert rep.status == HOLDS and rep.witness["riesz_part_invertible"]
    assert rep.witness["reconstruction_error"] <= 1e-12


def test_euclidean_lincomb_uses_orthogonal_search():
    c, s = np.cos(0.7), np.sin(0.7)
    R = np.array([[c, -s], [s, c]])
    T = 2.0 * R + 0.5 * np.eye(2)
    P = PASF(np.linalg.inv(T), T, 2.0, 2.0)
    rep = decomposition_search(P, "lin-comb", M=2)
    assert rep.status == HOLDS and rep.strategy == "local-search"
    assert all(is_isometry(np.array(Q), 2.0) for Q in rep.witness["Q"])


def test_lincomb_over_signed_perms_can_be_inconclusive():
    T = np.array([[1.0, 2.0], [3.0, 5.0]])
    P = PASF(np.linalg.inv(T), T, 3.0, 3.0)
    rep = decomposition_search(P, "lin-comb", M=1)
    assert rep.status == INCONCLUSIVE and rep.details["complete"]


def test_decomposition_preconditions():
    with pytest.raises(ValueError):
        decomposition_search(make_pasf("duplicated-standard", d=2, k=2), "lin-comb")
    with pytest.raises(ValueError):
        decomposition_search(make_pasf("standard", d=2, p=3.0, r=2.0), "lin-comb")
    with pytest.raises(ValueError):
        decomposition_search(make_pasf("standard", d=2), "mystery")


# inequalities


def test_fundamental_inequality():
    ok = NormProfile(a=(1, 1, 1), b=(1, 1, 1), c=(1, 1, 1))
    assert fundamental_inequality_check(ok, 2)["combined"]
    bad = NormProfile(a=(3, 1, 1), b=(1, 1, 1), c=(1, 1, 1))
    res = fundamental_inequality_check(bad, 2)
    assert not res["combined"] and not res["a"]["ok"] and res["b"]["ok"]
    with pytest.raises(ValueError):
        fundamental_inequality_check(ok, 4)


def test_majorization():
    prof = NormProfile(a=(1, 1, 1), b=(1, 1, 1), c=(1, 1, 1))
    assert majorization_check(prof, [1.5, 1.5])["combined"]
    res = majorization_check(prof, [2.5, 0.5])
    assert res["combined"]
    res = majorization_check(prof, [1.0, 1.0])
    assert not res["a"]["total_equal"]
    with pytest.raises(ValueError):
        majorization_check(prof, [0.5, 2.5])


def test_inverse_design_standard_targets():
    prof = NormProfile(a=(1, 1), b=(1, 1), c=(1, 1))
    rep = inverse_design_search("tight-with-norms", 2, 2, prof, seed=0, starts=8)
    assert rep.status == HOLDS
    P = witness_pasf(rep)
    assert np.allclose(P.functional_norms(), 1) and np.allclose(P.vector_norms(), 1)


def test_inverse_design_frame_operator_target():
    S = np.diag([2.0, 1.0])
    rep = inverse_design_search("frame-operator-with-norms", 2, 3, None, S, seed=0, starts=8)
    assert rep.status == HOLDS
    assert np.allclose(frame_operator(witness_pasf(rep)), S, atol=1e-6)


def test_inverse_design_bad_shape():
    with pytest.raises(ValueError):
        inverse_design_search("tight-with-norms", 3, 2)


# dynamics


def test_dynamics_swap_is_orthonormal_basis():
    U = V = np.array([[0.0, 1.0], [1.0, 0.0]])
    P = dynamical_build(np.array([[1.0, 0.0]]), np.array([[1.0], [0.0]]), U, V, 2, p=3.0, r=3.0)
    assert classify(P).tag == "p-orthonormal-basis"


def test_dynamics_zero_operator_is_bessel_only():
    P = dynamical_build(np.array([[1.0, 0.0]]), np.array([[1.0], [0.0]]), np.eye(2), np.zeros((2, 2)), 3)
    assert classify(P).tag == "bessel-only"


def test_dynamics_validation():
    with pytest.raises(ValueError):
        dynamical_build(np.array([[1.0, 0.0]]), np.array([[1.0], [0.0]]), np.eye(2), np.eye(3), 2)
    with pytest.raises(ValueError):
        dynamical_build(np.array([[1.0, 0.0]]), np.array([[1.0], [0.0]]), np.eye(2), np.eye(2), 0)
