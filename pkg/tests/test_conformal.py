import numpy as np
import pytest
import sympy as sp
from hypothesis import given, settings, strategies as st

from massflow.conformal import (FACTORS, ConformalFactor, ConformalFamily, FactorError,
                                conformal_mass_delta, half_over_r, neumann_capped, one,
                                validate_conformal_hypotheses)
from massflow.fields import R_SYMBOL, RadialField
from massflow.geometry import HALF, euclidean, laplace_beltrami, schwarzschild_isotropic


def test_neumann_capped_closed_form():
    f = neumann_capped(2.0, 1.5)
    r = R_SYMBOL
    dfr = sp.diff(f.field.expr, r)
    assert sp.simplify(dfr + (r - sp.Rational(3, 2)) ** 2 / r**4) == 0
    lap = sp.simplify(sp.diff(r**2 * dfr, r) / r**2)
    assert sp.simplify(lap - 2 * sp.Rational(3, 2) / r**5 * (sp.Rational(3, 2) - r)) == 0


@settings(max_examples=15, deadline=None)
@given(st.floats(0.1, 3.0), st.floats(0.5, 4.0))
def test_neumann_capped_superharmonic_outside_cap(a, r0):
    f = neumann_capped(a, r0)
    rng = np.random.default_rng(0)
    d = rng.normal(size=(30, 3))
    p = d / np.linalg.norm(d, axis=1)[:, None] * rng.uniform(r0, 20 * r0, size=(30, 1))
    assert np.all(laplace_beltrami(euclidean(inner_radius=r0), f.field, p) <= 1e-12 / r0**2)


@pytest.mark.parametrize("kind,expected", [("full", 1.0), ("half", 0.5)])
def test_mass_delta(kind, expected):
    assert abs(conformal_mass_delta(half_over_r(1.0), kind=kind).extrapolated - expected) < 1e-12
    assert abs(conformal_mass_delta(neumann_capped(1.0), kind=kind).extrapolated - expected) < 1e-5


def test_mass_delta_of_power():
    got = conformal_mass_delta(half_over_r(1.0).power(0.3)).extrapolated
    assert abs(got - 0.3) < 1e-6


def test_family_endpoints():
    base = euclidean()
    fam = ConformalFamily(base, half_over_r(1.0), 0.0)
    p = np.array([[2.0, 1.0, 0.5]])
    np.testing.assert_array_equal(fam.at_lambda.metric(p), base.metric(p))
    np.testing.assert_allclose(fam.with_lambda(1.0).at_lambda.metric(p), fam.prime.metric(p))
    with pytest.raises(ValueError):
        ConformalFamily(base, one(), 1.5)


def test_nonpositive_factor_rejected():
    bad = ConformalFactor(RadialField(1 - 3 / R_SYMBOL), "bad")
    with pytest.raises(FactorError):
        bad.jet(np.array([[2.0, 0, 0]]))
    # positive outside r = 3, so only the Neumann condition fails there
    rep = validate_conformal_hypotheses(bad, euclidean(inner_radius=4.0))
    assert rep.failed() == ["neumann_inner"]


def test_validator_flags_missing_neumann_condition():
    rep = validate_conformal_hypotheses(half_over_r(1.0), euclidean())
    assert rep.failed() == ["neumann_inner"]
    assert abs(next(c for c in rep.checks if c.name == "neumann_inner").value - 0.5) < 1e-12


@pytest.mark.parametrize("chart", [euclidean(), euclidean(HALF), schwarzschild_isotropic(1.0),
                                   schwarzschild_isotropic(1.0, HALF)])
def test_validator_accepts_capped_factor(chart):
    rep = validate_conformal_hypotheses(neumann_capped(1.0, chart.inner_radius), chart)
    assert rep.passed, rep.failed()
    assert ("max_abs_dy3_f_on_sigma" in rep.info) == chart.is_half


def test_validator_rejects_slow_decay():
    slow = ConformalFactor(RadialField(1 + 1 / sp.sqrt(R_SYMBOL)), "slow")
    assert "decay_value" in validate_conformal_hypotheses(slow, euclidean()).failed()


def test_factor_table():
    assert set(FACTORS) == {"one", "half_over_r", "neumann_capped"}
