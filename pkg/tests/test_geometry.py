import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from massflow.fields import X_SYMBOLS, CartesianField, LinearField, RadialField, R_SYMBOL
from massflow.geometry import (HALF, ConformalChart, ConstantMetricChart, CoordinatePlane,
                               CoordinateSphere, DomainError, LinearPullbackChart, MetricError,
                               christoffel, euclidean, laplace_beltrami,
                               laplace_beltrami_divergence, mean_curvature, metric_jet,
                               normal_derivative, scalar_curvature, schwarzschild_isotropic)


def pts(n=20, seed=0, r=(1.5, 6.0)):
    rng = np.random.default_rng(seed)
    d = rng.normal(size=(n, 3))
    d /= np.linalg.norm(d, axis=1)[:, None]
    return d * rng.uniform(*r, size=(n, 1))


def test_euclidean_is_flat():
    p = pts()
    assert np.max(np.abs(scalar_curvature(euclidean(), p))) == 0.0
    assert np.max(np.abs(christoffel(metric_jet(euclidean(), p)))) == 0.0


def test_christoffel_symmetric_in_lower_indices():
    G = christoffel(metric_jet(schwarzschild_isotropic(1.0), pts()))
    np.testing.assert_allclose(G, np.swapaxes(G, -1, -2), atol=1e-15)


@pytest.mark.parametrize("M", [0.5, 1.0, 3.0])
def test_schwarzschild_scalar_flat(M):
    p = pts(r=(M, 10 * M))
    assert np.max(np.abs(scalar_curvature(schwarzschild_isotropic(M), p))) < 1e-10 / M**2


def test_finite_difference_jets_match_analytic():
    ch = schwarzschild_isotropic(1.0)
    p = pts(10)
    a, b = metric_jet(ch, p), metric_jet(ch.finite_difference(), p)
    np.testing.assert_allclose(b.dg, a.dg, atol=1e-9)
    np.testing.assert_allclose(b.ddg, a.ddg, atol=1e-6)


def test_laplacian_forms_agree():
    x, y, z = X_SYMBOLS
    u = CartesianField(x * y + z**3 / (1 + x**2))
    ch = schwarzschild_isotropic(1.0)
    p = pts()
    np.testing.assert_allclose(laplace_beltrami(ch, u, p),
                               laplace_beltrami_divergence(ch, u, p), rtol=1e-10, atol=1e-12)


def test_sphere_mean_curvature_sign():
    sph = CoordinateSphere(2.0)
    p = 2.0 * pts(10) / np.linalg.norm(pts(10), axis=1)[:, None]
    # normal out of the exterior region points to the origin
    np.testing.assert_allclose(mean_curvature(euclidean(), sph, p), -1.0, atol=1e-13)
    np.testing.assert_allclose(mean_curvature(euclidean(), sph, p, "inward"), 1.0, atol=1e-13)
    with pytest.raises(ValueError):
        mean_curvature(euclidean(), sph, p, "up")


def test_horizon_minimal_and_plane_totally_geodesic():
    ch = schwarzschild_isotropic(1.0)
    d = pts(10)
    p = 0.5 * d / np.linalg.norm(d, axis=1)[:, None]
    assert np.max(np.abs(mean_curvature(ch, CoordinateSphere(0.5), p))) < 1e-12
    q = pts(10)
    q[:, 2] = 0.0
    assert np.max(np.abs(mean_curvature(ch.with_kind(HALF), CoordinatePlane(), q))) < 1e-12


def test_normal_derivative_of_radius():
    r = RadialField(R_SYMBOL)
    d = pts(5)
    p = 3.0 * d / np.linalg.norm(d, axis=1)[:, None]
    np.testing.assert_allclose(normal_derivative(euclidean(), CoordinateSphere(3.0), r, p), -1.0)


def test_conformal_chart_matches_schwarzschild():
    psi = RadialField(1 + 1 / (2 * R_SYMBOL))
    p = pts()
    a = metric_jet(ConformalChart(euclidean(inner_radius=0.5), psi, 4.0), p)
    b = metric_jet(schwarzschild_isotropic(1.0), p)
    np.testing.assert_allclose(a.g, b.g, rtol=1e-14)
    np.testing.assert_allclose(a.ddg, b.ddg, rtol=1e-12, atol=1e-14)


@settings(max_examples=20, deadline=None)
@given(st.lists(st.floats(-0.4, 0.4), min_size=9, max_size=9))
def test_linear_pullback_preserves_scalar_curvature(entries):
    A = np.eye(3) + np.array(entries).reshape(3, 3)
    ch = LinearPullbackChart(euclidean(inner_radius=0.1), A)
    assert np.max(np.abs(scalar_curvature(ch, pts(5, r=(3.0, 5.0))))) < 1e-12


def test_domain_checks():
    with pytest.raises(DomainError):
        metric_jet(euclidean(), [[0.1, 0.0, 0.0]])
    with pytest.raises(DomainError):
        metric_jet(euclidean(HALF), [[0.0, 0.0, -3.0]])
    with pytest.raises(MetricError):
        metric_jet(ConstantMetricChart(-np.eye(3)), [[2.0, 0.0, 0.0]])


def test_linear_field_harmonic_in_flat_space():
    p = pts()
    assert np.max(np.abs(laplace_beltrami(euclidean(), LinearField((0, 0, 1)), p))) == 0.0
