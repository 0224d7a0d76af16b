import numpy as np
import pytest

from massflow.geometry import scalar_curvature
from massflow.staticfields import (P_field, appendix_check, boundary_condition_check,
                                   derived_data, field_equation_residuals, gibbons_solution,
                                   lemma1_residuals, perturbation, sample_points, uv_residuals)


@pytest.mark.parametrize("Q", [0.0, 0.5, 1.2])
def test_gibbons_solves_field_equations(Q):
    data = gibbons_solution(1.0, Q)
    p = sample_points(1.0)
    assert np.max(np.abs(field_equation_residuals(data, p))) < 1e-8
    der = derived_data(data)
    assert np.max(np.abs(uv_residuals(der, p))) < 1e-8
    assert np.max(P_field(der, p)) < 1e-10


def test_perturbed_data_is_detected():
    data = perturbation(gibbons_solution(1.0, 0.5), V_scale=1.01)
    p = sample_points(1.0)
    assert np.max(np.abs(field_equation_residuals(data, p))) > 1e-5
    der = derived_data(perturbation(gibbons_solution(1.0, 0.5), U_scale=1.05))
    assert np.max(P_field(der, p)) > 1e-10
    assert np.max(np.abs(lemma1_residuals(der, p))) > 1e-7


def test_q_zero_reduces_to_schwarzschild():
    data = gibbons_solution(1.0, 0.0)
    p = sample_points(1.0)
    assert np.max(np.abs(scalar_curvature(data.chart, p))) < 1e-12


def test_horizon_boundary_data():
    bc = boundary_condition_check(gibbons_solution(1.0, 0.5))
    assert bc["V_at_horizon"] == 0.0
    assert abs(bc["limits"]["grad_V_norm2"] - 1 / 16) < 1e-4
    assert abs(bc["limits"]["grad_V_dot_grad_phi"]) < 1e-4


def test_parameter_guards():
    with pytest.raises(ValueError):
        gibbons_solution(-1.0, 0.0)
    with pytest.raises(ValueError):
        gibbons_solution(1.0, 1.5)


def test_full_residual_summary():
    out = appendix_check(2.0, 0.7)
    assert out["passed"], [k for k, c in out["checks"].items() if not c["passed"]]
    assert out["sample_radii"] == [6.0, 8.0, 20.0]
    assert out["positivity_passed"]
