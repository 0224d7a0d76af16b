import numpy as np
from hypothesis import given, strategies as st

from massflow.quadrature import circle_rule, fsum, sphere_rule


def test_sphere_area_and_moments():
    r = sphere_rule(12, 24)
    assert abs(r.integrate(np.ones(len(r.weights))) - 4 * np.pi) < 1e-13
    z = r.nodes[:, 2]
    assert abs(r.integrate(z**2) - 4 * np.pi / 3) < 1e-13
    assert abs(r.integrate(z**3)) < 1e-14


def test_hemisphere():
    r = sphere_rule(12, 24, hemisphere=True)
    assert np.all(r.nodes[:, 2] > 0)
    assert abs(r.integrate(r.nodes[:, 2]) - np.pi) < 1e-13


def test_circle():
    c = circle_rule(16)
    assert np.all(c.nodes[:, 2] == 0)
    assert abs(c.integrate(c.nodes[:, 0] ** 2) - np.pi) < 1e-13


@given(st.lists(st.floats(-1e6, 1e6), min_size=1, max_size=50))
def test_fsum_order_independent(values):
    assert fsum(values) == fsum(values[::-1])
