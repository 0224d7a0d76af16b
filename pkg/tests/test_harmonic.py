import numpy as np
import pytest

from massflow.geometry import FULL, HALF, euclidean, schwarzschild_isotropic
from massflow.harmonic import (INNER, INTERIOR, OUTER, SIGMA, DiscreteField, DomainSpec,
                               build_grid, residual_report, solve_harmonic)


def test_domain_spec_validation():
    with pytest.raises(ValueError):
        DomainSpec("slab")
    with pytest.raises(ValueError):
        DomainSpec(FULL, 1.0, 4.0)
    with pytest.raises(ValueError):
        DomainSpec(HALF, alpha=(1.0, 0.0, 0.0))
    assert DomainSpec(FULL, alpha=(0.0, 3.0, 4.0)).alpha == (0.0, 0.6, 0.8)


def test_grid_layout():
    g = build_grid(DomainSpec(HALF, 1.0, 8.0), (16, 12, 24))
    assert g.shape == (16, 12, 24)
    assert g.theta[-1] == np.pi / 2 and np.all(g.points[:, -1, :, 2] == 0.0)
    # the inner/plane corner ring belongs to the plane
    assert np.all(g.classification[0, :-1] == INNER) and np.all(g.classification[-1] == OUTER)
    assert np.all(g.classification[:-1, -1] == SIGMA)
    assert g.counts()["interior"] == int(np.sum(g.classification == INTERIOR)) == 14 * 11 * 24
    np.testing.assert_allclose(g.r[[0, -1]], [1.0, 8.0])
    with pytest.raises(ValueError):
        build_grid(DomainSpec(), (8, 12, 24))
    with pytest.raises(ValueError):
        build_grid(DomainSpec(), (16, 12, 25))


def test_flat_half_space_reproduces_coordinate():
    f, system = solve_harmonic(euclidean(HALF), DomainSpec(HALF, 1.0, 8.0), (16, 12, 24),
                               "dirichlet")
    rep = residual_report(f, euclidean(HALF), system)
    assert rep["dirichlet_residual"] < 1e-12
    assert abs(rep["min_sigma_gradient"] - 1.0) < 1e-12
    p = np.array([[1.7, -0.4, 0.9], [3.0, 2.0, 0.0]])
    j = f.jet(p)
    np.testing.assert_allclose(j.value, p[:, 2], atol=1e-12)
    np.testing.assert_allclose(j.grad, [[0, 0, 1.0]] * 2, atol=1e-12)


def test_interpolated_dipole_close_to_exact():
    def dipole(x):
        r = np.linalg.norm(x, axis=-1)
        return x[..., 2] * (1 + 1 / (2 * r**3))
    f, _ = solve_harmonic(euclidean(), DomainSpec(FULL, 1.0, 8.0), (32, 24, 48), "neumann", dipole)
    p = np.array([[1.3, 0.2, 0.7], [0.0, 2.5, -1.1], [0.3, 0.0, 4.0]])
    assert np.max(np.abs(f.value(p) - dipole(p))) < 1e-3


def test_schwarzschild_neumann_solve():
    ch = schwarzschild_isotropic(1.0)
    f, system = solve_harmonic(ch, DomainSpec(FULL, 0.5, 32.0), (24, 12, 24))
    rep = residual_report(f, ch, system)
    assert f.info.relative_residual < 1e-10
    assert rep["neumann_residual"] < 0.05
    # w is odd in x3 by symmetry of the problem
    g = f.grid
    np.testing.assert_allclose(f.values, -f.values[:, ::-1, :], atol=1e-9)
    assert g.is_half is False


def test_field_text_round_trip():
    f, _ = solve_harmonic(schwarzschild_isotropic(1.0, HALF), DomainSpec(HALF, 0.5, 8.0),
                          (16, 12, 24))
    text = f.to_text()
    back = DiscreteField.from_text(text)
    assert back.to_text() == text
    np.testing.assert_array_equal(back.values, f.values)
    with pytest.raises(ValueError):
        DiscreteField.from_text('{"format": "other"}\n1.0\n')


def test_solve_is_deterministic():
    spec = DomainSpec(HALF, 0.5, 8.0)
    a, _ = solve_harmonic(schwarzschild_isotropic(1.0, HALF), spec, (16, 12, 24))
    b, _ = solve_harmonic(schwarzschild_isotropic(1.0, HALF), spec, (16, 12, 24))
    assert a.to_text() == b.to_text()
