import numpy as np
import pytest

from pasf_lab.frames import PASF, make_pasf
from pasf_lab.reconstruct import check_algorithm_condition, duffin_schaeffer


def test_condition_on_diagonal():
    P = make_pasf("explicit", F=np.eye(2), T=np.diag([1.0, 3.0]))
    cond = check_algorithm_condition(P)
    assert cond.holds
    assert cond.condition_value == pytest.approx(0.5)
    assert cond.ratio_bound == pytest.approx(0.5)


def test_error_contracts_at_exact_rate():
    P = make_pasf("explicit", F=np.eye(2), T=np.diag([1.0, 3.0]))
    x = np.array([1.0, 1.0])
    tr = duffin_schaeffer(P, P.F @ x, max_iters=20, ground_truth=x)
    ratios = np.array(tr.errors[1:6]) / np.array(tr.errors[:5])
    assert np.allclose(ratios, 0.5)
    assert tr.bound_guaranteed


def test_shear_fails_condition():
    P = make_pasf("explicit", F=np.eye(2), T=np.array([[1.0, 5.0], [0.0, 1.0]]))
    tr = duffin_schaeffer(P, np.ones(2), max_iters=5)
    assert not tr.condition_holds
    assert tr.notes


def test_parseval_single_step():
    ang = 2 * np.pi * np.arange(5) / 5
    T = np.sqrt(2 / 5) * np.stack([np.cos(ang), np.sin(ang)])
    P = PASF(T.T.copy(), T, 2.0, 2.0)
    x = np.array([0.3, -2.0])
    tr = duffin_schaeffer(P, P.F @ x, ground_truth=x)
    assert tr.converged and len(tr.errors) == 2
    assert np.allclose(tr.iterates[-1], x)


def test_residual_mode_without_truth():
    P = make_pasf("explicit", F=np.eye(2), T=np.diag([1.0, 2.0]))
    tr = duffin_schaeffer(P, np.array([1.0, 2.0]))
    assert tr.error_kind == "residual" and tr.converged
    assert set(tr.to_dict(include_iterates=True)) >= {"errors", "iterates", "ratio_bound"}


def test_bad_inputs():
    P = make_pasf("standard", d=2)
    with pytest.raises(ValueError):
        duffin_schaeffer(P, np.ones(3))
    singular = make_pasf("explicit", F=np.eye(2), T=np.diag([1.0, 0.0]))
    with pytest.raises(ValueError):
        check_algorithm_condition(singular)
