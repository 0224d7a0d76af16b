"""Quantitative acceptance suite: one test per criterion, one summary line each.

Tolerances are the contract; they are not to be loosened.
"""
import filecmp
import math

import numpy as np
import pytest

from massflow import cli
from massflow.conformal import (ConformalFamily, half_over_r, mean_curvature_lambda,
                                neumann_capped, one, scalar_curvature_lambda)
from massflow.fields import X_SYMBOLS, CartesianField
from massflow.geometry import (FULL, HALF, ConformalChart, CoordinatePlane, CoordinateSphere,
                               euclidean, mean_curvature, scalar_curvature,
                               schwarzschild_isotropic)
from massflow.harmonic import DomainSpec, solve_harmonic
from massflow.inequality import solve_and_report
from massflow.mass import adm_mass, half_space_mass
from massflow.staticfields import appendix_check

RADII = (8.0, 16.0, 32.0, 64.0)


def shell_points(n, seed, half=False, r_min=1.5, r_max=10.0):
    rng = np.random.default_rng(seed)
    d = rng.normal(size=(n, 3))
    d /= np.linalg.norm(d, axis=1)[:, None]
    if half:
        d[:, 2] = np.abs(d[:, 2])
    return d * rng.uniform(r_min, r_max, size=(n, 1))


def plane_points(n, seed, r_min=1.5, r_max=10.0):
    rng = np.random.default_rng(seed)
    phi = rng.uniform(0, 2 * np.pi, n)
    rho = rng.uniform(r_min, r_max, n)
    return np.stack([rho * np.cos(phi), rho * np.sin(phi), np.zeros(n)], axis=-1)


def sphere_points(n, seed, radius, half=False):
    d = shell_points(n, seed, half)
    return radius * d / np.linalg.norm(d, axis=1)[:, None]


def bump():
    x, y, z = X_SYMBOLS
    q = 1 + x**2 + y**2 + z**2
    return CartesianField(1 + 0.3 * x**2 * y / q**2 + 0.1 * z / q, "bump")


FAMILIES = [(euclidean, half_over_r), (euclidean, neumann_capped),
            (lambda: schwarzschild_isotropic(1.0), half_over_r),
            (lambda: schwarzschild_isotropic(1.0), neumann_capped)]


def _families():
    for mk_base, mk_fac in FAMILIES:
        base = mk_base()
        fac = mk_fac(1.0, base.inner_radius) if mk_fac is neumann_capped else mk_fac(1.0)
        yield base, fac


def test_curvature_engine(criterion):
    p = shell_points(100, 0)
    R = scalar_curvature(schwarzschild_isotropic(1.0), p)
    psi = bump()
    j = psi.jet(p)
    ref = -8 * j.value**-5 * np.trace(j.hess, axis1=-2, axis2=-1)
    Rc = scalar_curvature(ConformalChart(euclidean(), psi, 4.0), p)
    rel = np.max(np.abs(Rc - ref) / np.abs(ref))
    ok = criterion(1, "curvature engine", np.max(np.abs(R)) < 1e-8 and rel < 1e-6,
                   f"max|R_schw|={np.max(np.abs(R)):.2e} conformal rel={rel:.2e}")
    assert ok


def test_scalar_curvature_conformal_law(criterion):
    p = shell_points(100, 1)
    worst_mid = worst_end = 0.0
    for base, fac in _families():
        for lam in (0.0, 0.25, 0.5, 0.75, 1.0):
            fam = ConformalFamily(base, fac, lam)
            a = scalar_curvature_lambda(fam, p)
            b = scalar_curvature(fam.at_lambda, p)
            if lam in (0.0, 1.0):
                worst_end = max(worst_end, float(np.max(np.abs(a - b))))
            else:
                worst_mid = max(worst_mid, float(np.max(np.abs(a - b) / np.abs(b))))
    ok = criterion(2, "scalar curvature law", worst_mid < 1e-6 and worst_end < 1e-10,
                   f"rel={worst_mid:.2e} endpoints abs={worst_end:.2e}")
    assert ok


def test_mean_curvature_conformal_law(criterion):
    worst = 0.0
    for base, fac in _families():
        half = base.with_kind(HALF)
        pp = plane_points(100, 2, base.inner_radius * 1.5, base.inner_radius * 10)
        ps = sphere_points(100, 3, base.inner_radius)
        for lam in (0.0, 0.25, 0.5, 0.75, 1.0):
            famh = ConformalFamily(half, fac, lam)
            fam = ConformalFamily(base, fac, lam)
            e1 = np.abs(mean_curvature_lambda(famh, CoordinatePlane(), pp)
                        - mean_curvature(famh.at_lambda, CoordinatePlane(), pp))
            sph = CoordinateSphere(base.inner_radius)
            e2 = np.abs(mean_curvature_lambda(fam, sph, ps) - mean_curvature(fam.at_lambda, sph, ps))
            worst = max(worst, float(np.max(e1)), float(np.max(e2)))
    # Neumann factor on the minimal Schwarzschild horizon: H_lambda vanishes
    base = schwarzschild_isotropic(1.0)
    fac = neumann_capped(1.0, base.inner_radius)
    ps = sphere_points(100, 4, base.inner_radius)
    sph = CoordinateSphere(base.inner_radius)
    hmax = max(float(np.max(np.abs(mean_curvature(ConformalFamily(base, fac, lam).at_lambda,
                                                   sph, ps))))
               for lam in (0.0, 0.25, 0.5, 0.75, 1.0))
    ok = criterion(3, "mean curvature law", worst < 1e-6 and hmax < 1e-10,
                   f"err={worst:.2e} minimal max|H_l|={hmax:.2e}")
    assert ok


def test_adm_mass(criterion):
    m = adm_mass(schwarzschild_isotropic(1.0), RADII)
    e = adm_mass(euclidean(), RADII)
    ok = criterion(4, "ADM mass", abs(m.extrapolated - 1) < 1e-4 and abs(e.extrapolated) < 1e-10,
                   f"schw={m.extrapolated:.8f} euclid={e.extrapolated:.1e}")
    assert ok


@pytest.mark.parametrize("kind", [FULL, HALF])
def test_mass_linearity(criterion, kind):
    base = euclidean(kind)
    fac = half_over_r(1.0)
    mass = adm_mass if kind == FULL else half_space_mass
    m0 = mass(base, RADII).extrapolated
    m1 = mass(ConformalFamily(base, fac, 1.0).prime, RADII).extrapolated
    worst, line = 0.0, 0.0
    for lam in (0.0, 0.25, 0.5, 0.75, 1.0):
        m = mass(ConformalFamily(base, fac, lam).at_lambda, RADII).extrapolated
        worst = max(worst, abs(m - (1 - lam) * m0 - lam * m1))
        line = max(line, abs(m - lam * m1))
    ok = criterion(5, f"mass linearity ({kind})", worst < 1e-4,
                   f"dev={worst:.2e} m(g')={m1:.6f} line dev={line:.1e}")
    assert ok


def test_half_space_mass(criterion):
    rep = half_space_mass(schwarzschild_isotropic(1.0, HALF), RADII)
    circ = max(abs(s.circle_term) for s in rep.samples)
    ok = criterion(6, "half-space mass", abs(rep.extrapolated - 0.5) < 1e-3 and circ < 1e-10,
                   f"m_sigma={rep.extrapolated:.8f} max circle={circ:.1e}")
    assert ok


def dipole(x):
    r = np.linalg.norm(x, axis=-1)
    return x[..., 2] * (1 + 1 / (2 * r**3))


def test_harmonic_solver(criterion):
    errs = []
    for res in ((16, 12, 24), (32, 24, 48)):
        f, _ = solve_harmonic(euclidean(), DomainSpec(FULL, 1.0, 8.0), res, "neumann", dipole)
        errs.append(float(np.max(np.abs(f.values - dipole(f.grid.points)))))
    order = math.log2(errs[0] / errs[1])
    f, _ = solve_harmonic(euclidean(HALF), DomainSpec(HALF, 1.0, 8.0), (16, 12, 24), "dirichlet")
    flat = float(np.max(np.abs(f.values - f.grid.points[..., 2])))
    ok = criterion(7, "harmonic solver", order >= 1.7 and flat < 1e-10,
                   f"dipole errs={errs[0]:.2e},{errs[1]:.2e} order={order:.2f} y3 err={flat:.1e}")
    assert ok


INEQUALITY_CASES = {
    "euclidean equality": (lambda: ConformalFamily(euclidean(), one(), 0.5), HALF, "dirichlet"),
    "schwarzschild lambda=0": (lambda: ConformalFamily(schwarzschild_isotropic(1.0), one(), 0.0),
                               HALF, "neumann"),
    "conformal lambda=1/2": (lambda: ConformalFamily(schwarzschild_isotropic(1.0),
                                                     neumann_capped(1.0, 0.5), 0.5),
                             HALF, "neumann"),
}


@pytest.mark.slow
@pytest.mark.parametrize("name", list(INEQUALITY_CASES))
def test_inequality_slack(criterion, name):
    mk, kind, ic = INEQUALITY_CASES[name]
    rep, _, _ = solve_and_report(mk(), kind, inner_condition=ic)
    drift = rep.details["rhs_drift"]
    ok = rep.slack >= -1e-4 and not rep.truncation_flag and drift < 0.01
    if name == "euclidean equality":
        ok = ok and abs(rep.slack) < 1e-6
    ok = criterion(8, name, ok, f"slack={rep.slack:.3e} drift={drift:.2%}")
    assert ok


def test_static_black_hole(criterion):
    out = appendix_check(1.0, 0.5)
    c = out["checks"]
    want = ["field_equations", "uv_equations", "lemma1_i", "lemma1_ii", "P_max",
            "mass_gamma", "mass_eta", "psi_asymptotics"]
    limits = {"field_equations": 1e-8, "uv_equations": 1e-8, "lemma1_i": 1e-7,
              "lemma1_ii": 1e-7, "P_max": 1e-10, "mass_gamma": 1e-3, "mass_eta": 1e-3,
              "psi_asymptotics": 1e-2}
    assert out["sample_radii"] == [3.0, 4.0, 10.0]
    ok = all(c[k]["value"] < limits[k] for k in want)
    worst = ", ".join(f"{k}={c[k]['value']:.1e}" for k in want)
    ok = criterion(9, "static black hole", ok, worst)
    assert ok


DETERMINISM_RUNS = [
    ["mass", "--chart", "schwarzschild_isotropic(1)"],
    ["half-mass", "--chart", "schwarzschild_isotropic(1)"],
    ["conformal-check", "--chart", "schwarzschild_isotropic(1)", "--factor", "neumann_capped(1)"],
    ["solve-harmonic", "--chart", "schwarzschild_isotropic(1)", "--kind", "half",
     "--resolution", "16,12,24"],
    ["check-inequality", "--chart", "schwarzschild_isotropic(1)", "--kind", "half",
     "--resolution", "16,12,24"],
    ["appendix-check"],
]


@pytest.mark.slow
def test_determinism(criterion, tmp_path):
    same, compared = True, 0
    for argv in DETERMINISM_RUNS:
        dirs = []
        for k in range(2):
            d = tmp_path / f"{argv[0]}-{k}"
            assert cli.main(argv + ["--out", str(d)]) == 0
            dirs.append(d)
        names = sorted(p.name for p in dirs[0].iterdir())
        assert names == sorted(p.name for p in dirs[1].iterdir())
        match, mismatch, errors = filecmp.cmpfiles(dirs[0], dirs[1], names, shallow=False)
        compared += len(names)
        same = same and not mismatch and not errors
    ok = criterion(10, "determinism", same, f"{compared} files byte-compared")
    assert ok
