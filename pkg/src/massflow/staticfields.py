"""Static charged dilaton black hole data and the identities built on it.

The Gibbons solution is written in area-radius form and converted to a
Cartesian radial-form chart, so every curvature quantity below comes from the
same pointwise engine used elsewhere.  The conformal factors ``chi`` and
``psi`` and the auxiliary functions ``u``, ``v`` are closed-form radial
fields with analytic jets.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import sympy as sp

from .fields import R_SYMBOL, RadialField
from .geometry import (ConformalChart, RadialFormChart, gibbons_metric_profiles,
                       gradient_inner, laplace_beltrami, metric_jet, scalar_curvature)
from .mass import _neville_at_zero, adm_mass
from .quadrature import sphere_rule

SQRT2 = math.sqrt(2.0)
SQRT2_S = sp.sqrt(2)
TOL_FIELD = 1e-8
TOL_UV = 1e-8
TOL_IDENTITY = 1e-7
TOL_P = 1e-10
TOL_MASS = 1e-3
TOL_PSI = 1e-2


@dataclass
class StaticData:
    M: float
    Q: float
    V: RadialField
    phi: RadialField
    U: RadialField
    chart: RadialFormChart
    V_scale: float = 1.0
    U_scale: float = 1.0

    @property
    def horizon(self) -> float:
        return 2.0 * self.M

    def exprs(self):
        return self.V.expr, self.phi.expr, self.U.expr


def gibbons_solution(M: float = 1.0, Q: float = 0.5) -> StaticData:
    """``g = V^-2 dr^2 + (1 - Q^2/(M r)) r^2 dw^2``, ``V^2 = 1 - 2M/r``,
    ``e^(2 phi) = 1 - Q^2/(M r)``, ``U = Q/r`` on ``r > 2M``."""
    if not M > 0:
        raise ValueError("M must be positive")
    if not Q**2 < 2 * M**2:
        raise ValueError("need Q^2 < 2 M^2")
    return _static(M, Q, 1.0, 1.0)


def perturbation(data: StaticData, V_scale: float = 1.0, U_scale: float = 1.0) -> StaticData:
    """Same metric with ``V`` and ``U`` rescaled (generally not a solution)."""
    return _static(data.M, data.Q, data.V_scale * V_scale, data.U_scale * U_scale)


def _static(M, Q, V_scale, U_scale):
    r = R_SYMBOL
    Ms, Qs = sp.nsimplify(M), sp.nsimplify(Q)
    vs, us = sp.nsimplify(V_scale), sp.nsimplify(U_scale)
    V = RadialField(vs * sp.sqrt(1 - 2 * Ms / r), "V")
    phi = RadialField(sp.log(1 - Qs**2 / (Ms * r)) / 2, "phi")
    U = RadialField(us * Qs / r, "U")
    B, C = gibbons_metric_profiles(M, Q)
    chart = RadialFormChart(f"gibbons({M:g},{Q:g})", B, C, inner_radius=2.0 * M)
    return StaticData(float(M), float(Q), V, phi, U, chart, float(V_scale), float(U_scale))


# ---------------------------------------------------------------------------
# field equations


def _grads(data, p):
    jet = metric_jet(data.chart, p)
    V, ph, U = data.V.jet(p), data.phi.jet(p), data.U.jet(p)
    return jet, V, ph, U


def field_equation_residuals(data: StaticData, p) -> np.ndarray:
    """Residuals ``(..., 4)`` of the scalar-curvature, lapse, electric and dilaton equations."""
    jet, V, ph, U = _grads(data, p)
    ip = lambda a, b: gradient_inner(jet, a.grad, b.grad)
    e = np.exp(-2 * ph.value)
    dU2 = ip(U, U)
    R = scalar_curvature(data.chart, p)
    r1 = R - 2 * dU2 * e / V.value**2 - 2 * ip(ph, ph)
    r2 = laplace_beltrami(data.chart, V, p) - e * dU2 / V.value
    r3 = laplace_beltrami(data.chart, U, p) - ip(V, U) / V.value - 2 * ip(ph, U)
    r4 = laplace_beltrami(data.chart, ph, p) + ip(V, ph) / V.value - e * dU2 / V.value**2
    return np.stack([r1, r2, r3, r4], axis=-1)


def boundary_condition_check(data: StaticData, n_dirs: int = 4, ks=(2, 3, 4, 5)) -> dict:
    """Horizon quantities sampled at ``r = 2M(1 + 10^-k)`` and extrapolated to ``r = 2M``.

    Extrapolation is polynomial in ``sqrt(r - 2M)``; ``V`` itself is
    evaluated on the horizon, where it vanishes exactly.
    """
    dirs = sphere_rule(n_dirs, 2 * n_dirs).nodes
    rh = data.horizon
    radii = np.array([rh * (1 + 10.0**-k) for k in ks])
    names = ("grad_V_dot_grad_phi", "grad_V_dot_grad_U", "grad_V_norm2", "cos_angle_V_U")
    table = {n: [] for n in names}
    spread = []
    for r in radii:
        pts = r * dirs
        jet, V, ph, U = _grads(data, pts)
        vv = gradient_inner(jet, V.grad, V.grad)
        uu = gradient_inner(jet, U.grad, U.grad)
        vu = gradient_inner(jet, V.grad, U.grad)
        vals = (gradient_inner(jet, V.grad, ph.grad), vu, vv,
                np.where(uu > 0, vu / np.sqrt(vv * np.maximum(uu, 1e-300)), 0.0))
        for n, v in zip(names, vals):
            table[n].append(float(np.mean(v)))
        spread.append(float(np.max(vv) - np.min(vv)))
    t = np.sqrt(radii - rh)
    out = {"radii": radii.tolist(), "samples": table,
           "limits": {n: _neville_at_zero(t, table[n]) for n in names},
           "grad_V_norm2_angular_spread": max(spread)}
    out["V_at_horizon"] = abs(float(data.V.expr.subs(R_SYMBOL, sp.nsimplify(rh))))
    return out


# ---------------------------------------------------------------------------
# conformal data


class DerivedConformalData:
    """``u, v, chi, psi`` and the conformal charts ``gamma = chi^4 g``, ``eta = psi^4 g``."""

    def __init__(self, data: StaticData):
        self.data = data
        V, ph, U = data.exprs()
        ep = sp.exp(ph)
        u = 1 + V * ep + SQRT2_S * U
        v = 1 + V * ep - SQRT2_S * U
        self.u = RadialField(u, "u")
        self.v = RadialField(v, "v")
        self.chi = RadialField(sp.exp(-ph / 2) * sp.sqrt(u * v) / 2, "chi")
        self.psi = RadialField(sp.exp(-ph / 2) * (ep + V) / 2, "psi")
        self.f_ratio = RadialField(sp.sqrt(u * v) / (ep + V), "f")
        self.e2phi = RadialField(sp.exp(2 * ph), "e2phi")
        g = data.chart
        self.gamma = ConformalChart(g, self.chi, 4.0, name="gamma")
        self.eta = ConformalChart(g, self.psi, 4.0, name="eta")
        self.e2g = ConformalChart(g, self.e2phi, 1.0, name="e2phi_g")

    def X(self, p):
        """Covector ``sqrt(2) V^-1 e^-phi dU``."""
        d = self.data
        V, ph, U = d.V.jet(p), d.phi.jet(p), d.U.jet(p)
        return (SQRT2 / V.value * np.exp(-ph.value))[..., None] * U.grad

    def positivity(self, p) -> dict:
        d = self.data
        ev = np.exp(d.phi.value(p)) + d.V.value(p)
        return {"u": float(np.min(self.u.value(p))), "v": float(np.min(self.v.value(p))),
                "exp_phi_plus_V": float(np.min(ev)), "chi": float(np.min(self.chi.value(p))),
                "psi": float(np.min(self.psi.value(p)))}


def derived_data(data: StaticData) -> DerivedConformalData:
    return DerivedConformalData(data)


def uv_residuals(derived: DerivedConformalData, p) -> np.ndarray:
    """``Delta u - <du, X + dphi>`` and ``Delta v + <dv, X - dphi>`` in ``g``."""
    g = derived.data.chart
    jet = metric_jet(g, p)
    X = derived.X(p)
    dphi = derived.data.phi.jet(p).grad
    uj, vj = derived.u.jet(p), derived.v.jet(p)
    ru = laplace_beltrami(g, uj, p) - gradient_inner(jet, uj.grad, X + dphi)
    rv = laplace_beltrami(g, vj, p) + gradient_inner(jet, vj.grad, X - dphi)
    return np.stack([ru, rv], axis=-1)


def P_field(derived: DerivedConformalData, p) -> np.ndarray:
    """``|du/u - dv/v - X|_g^2``."""
    uj, vj = derived.u.jet(p), derived.v.jet(p)
    if np.any(uj.value <= 0) or np.any(vj.value <= 0):
        raise ValueError("u and v must be positive")
    w = uj.grad / uj.value[..., None] - vj.grad / vj.value[..., None] - derived.X(p)
    jet = metric_jet(derived.data.chart, p)
    return gradient_inner(jet, w, w)


def lemma1_residuals(derived: DerivedConformalData, p) -> np.ndarray:
    """``psi^4 R_eta - e^2phi R_e2phi_g`` and ``chi^4 R_gamma - 2P + e^2phi R_e2phi_g``."""
    e2 = derived.e2phi.value(p)
    base = e2 * scalar_curvature(derived.e2g, p)
    r1 = derived.psi.value(p) ** 4 * scalar_curvature(derived.eta, p) - base
    r2 = derived.chi.value(p) ** 4 * scalar_curvature(derived.gamma, p) - 2 * P_field(derived, p) + base
    return np.stack([r1, r2], axis=-1)


def conformal_combination(derived: DerivedConformalData, p) -> np.ndarray:
    """``R_eta + f^4 R_gamma``; equals ``2 P psi^-4`` on solutions."""
    f = derived.f_ratio.value(p)
    return scalar_curvature(derived.eta, p) + f**4 * scalar_curvature(derived.gamma, p)


def gamma_eta_masses(derived: DerivedConformalData, radii=None, probe=(50.0, 100.0, 200.0)):
    """ADM masses of ``gamma`` and ``eta`` plus the asymptotics of ``psi`` and ``f``.

    Returns ``(gamma_report, eta_report, asymptotics)``.
    """
    M = derived.data.M
    if radii is None:
        radii = [16.0 * M * 2.0**k for k in range(4)]
    rg = adm_mass(derived.gamma, radii)
    re = adm_mass(derived.eta, radii)
    probe = np.asarray(probe, dtype=float)
    psi = derived.psi.profile(probe)[0]
    f = derived.f_ratio.profile(probe)[0]
    r_one_minus_psi = probe * (1 - psi)
    asym = {"r": probe.tolist(), "r_one_minus_psi": r_one_minus_psi.tolist(),
            "r_one_minus_psi_limit": _neville_at_zero(1 / probe, r_one_minus_psi),
            "r2_abs_f_minus_1": (probe**2 * np.abs(f - 1)).tolist()}
    return rg, re, asym


# ---------------------------------------------------------------------------
# full suite


def sample_points(M: float, factors=(1.5, 2.0, 5.0), n_dirs: int = 3):
    """Points on spheres ``r = 2M * factor`` (``r = 3, 4, 10`` for ``M = 1``)."""
    dirs = sphere_rule(n_dirs, 2 * n_dirs).nodes
    return np.concatenate([2 * M * c * dirs for c in factors])


def appendix_check(M: float = 1.0, Q: float = 0.5) -> dict:
    """Every appendix residual suite with its tolerance and verdict."""
    data = gibbons_solution(M, Q)
    der = derived_data(data)
    p = sample_points(M)
    fe = np.abs(field_equation_residuals(data, p)).max(axis=0)
    uv = np.abs(uv_residuals(der, p)).max(axis=0)
    lm = np.abs(lemma1_residuals(der, p)).max(axis=0)
    P = P_field(der, p)
    t4 = conformal_combination(der, p) - 2 * P / der.psi.value(p) ** 4
    lsum = lemma1_residuals(der, p).sum(axis=-1)
    bc = boundary_condition_check(data)
    rg, re, asym = gamma_eta_masses(der)
    pos = der.positivity(p)
    chi2 = np.max(np.abs(der.chi.value(p) ** 2
                         - 0.25 * np.exp(-data.phi.value(p)) * der.u.value(p) * der.v.value(p)))
    checks = {
        "field_equations": (float(fe.max()), TOL_FIELD),
        "uv_equations": (float(uv.max()), TOL_UV),
        "lemma1_i": (float(lm[0]), TOL_IDENTITY),
        "lemma1_ii": (float(lm[1]), TOL_IDENTITY),
        "lemma1_sum": (float(np.max(np.abs(lsum - 2 * P))), TOL_IDENTITY),
        "P_max": (float(np.max(P)), TOL_P),
        "combination_identity": (float(np.max(np.abs(t4))), TOL_IDENTITY),
        "chi_consistency": (float(chi2), 1e-12),
        "mass_gamma": (abs(rg.extrapolated), TOL_MASS),
        "mass_eta": (abs(re.extrapolated), TOL_MASS),
        "psi_asymptotics": (abs(asym["r_one_minus_psi_limit"] - M / 2), TOL_PSI),
        "V_at_horizon": (bc["V_at_horizon"], 0.0),
        "grad_V_norm2_angular_spread": (bc["grad_V_norm2_angular_spread"], 1e-8),
    }
    out = {"M": float(M), "Q": float(Q), "sample_radii": [2 * M * c for c in (1.5, 2.0, 5.0)],
           "checks": {k: {"value": v, "tolerance": t, "passed": bool(v <= t)}
                      for k, (v, t) in checks.items()},
           "field_equation_residuals": fe.tolist(), "uv_residuals": uv.tolist(),
           "lemma1_residuals": lm.tolist(), "positivity": pos,
           "positivity_passed": all(v > 0 for v in pos.values()),
           "boundary_conditions": bc, "mass_gamma": rg.to_dict(), "mass_eta": re.to_dict(),
           "asymptotics": asym}
    out["passed"] = all(c["passed"] for c in out["checks"].values()) and out["positivity_passed"]
    return out
