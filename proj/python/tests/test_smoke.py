import math

import numpy as np
import pytest

import dhymlab


def test_pointwise_algebra():
    assert dhymlab.eigenvalues([3.0, 5.0]) == pytest.approx([3.0, 5.0])
    h = np.array([[2.0, 1j], [-1j, 2.0]])
    assert dhymlab.eigenvalues(h) == pytest.approx([1.0, 3.0])
    assert dhymlab.lagrangian_angle([1.0, 1.0]) == pytest.approx(math.pi / 2)
    assert dhymlab.zeta_det(np.eye(2), [1.0, 1.0]) == pytest.approx((1 + 1j) ** 2)
    assert np.allclose(dhymlab.eta_form(np.eye(2), [3.0, 5.0]), np.diag([10.0, 26.0]))
    assert dhymlab.arctan_concavity(-1.0) == pytest.approx(0.5)
    assert dhymlab.glz_condition2_value(2.0) == pytest.approx(-0.06)


def test_non_hermitian_rejected():
    with pytest.raises(ValueError):
        dhymlab.eigenvalues(np.array([[1.0, 2.0], [3.0, 1.0]]))


def test_limit_converges_to_j_trace():
    lam = [1.0, 2.0, 3.0]
    target = dhymlab.j_trace(lam)
    assert target == pytest.approx(11.0 / 6.0)
    errs = [abs(dhymlab.dhym_to_j_limit(lam, k) - target) for k in (10, 20, 40)]
    assert errs[0] / errs[1] == pytest.approx(4.0, abs=0.5)


def test_grid_fields():
    phi = dhymlab.random_potential(2, 8, 0.1, 3)
    assert phi.shape == (8, 8, 8, 8)
    h = dhymlab.complex_hessian(phi, 2, 8)
    assert h.shape == (8, 8, 8, 8, 2, 2)
    assert np.max(np.abs(h - np.conj(np.swapaxes(h, -1, -2)))) == 0.0
    assert dhymlab.bianchi_residual(phi, 2, 8) <= 1e-12
    z = dhymlab.central_charge(np.eye(2), [0.0, 0.0], np.zeros_like(phi), 8)["Z"]
    assert z == pytest.approx(1.0)


def test_wrong_field_size():
    with pytest.raises(ValueError):
        dhymlab.complex_hessian(np.zeros(10), 2, 8)


def test_flow_and_newton_agree():
    phi0 = dhymlab.random_potential(1, 16, 0.05, 2)
    flow = dhymlab.flow_dhym([2.0], phi0, 16)
    assert flow["verdict"] == "CONVERGED_RIGID"
    newton = dhymlab.newton_dhym([2.0], flow["target"], phi0, 16)
    assert newton["verdict"] == "CONVERGED"
    gap = (newton["phi"] - newton["phi"].mean()) - (flow["phi"] - flow["phi"].mean())
    assert np.max(np.abs(gap)) <= 1e-6


def test_jflow_inconsistent_constant():
    phi0 = dhymlab.random_potential(1, 8, 0.01, 2)
    flow = dhymlab.flow_j([1.0], [2.0], phi0, 8, c=0.9)
    assert flow["verdict"] == "NON_CONVERGED"


def test_identity_trials():
    r = dhymlab.identity_trials("at_solution", 2, 50, 1)
    assert r["max_rel_err"] <= 1e-10
    assert r["min_final_value"] >= 0.0


def test_shrinker():
    r = dhymlab.shoot("dhym", 1.0, theta0=math.pi / 2, s_max=20)
    assert r["classification"] == "QUADRATIC"
    assert r["profile"].shape[1] == 4
    scan = dhymlab.rigidity_scan("j", [0.9, 1.0, 1.1], c=2.0, s_max=20)
    assert len(scan["rows"]) == 3
    assert scan["property_holds"]
    assert scan["csv"].startswith("q0,")
