"""Finite-radius ADM and half-space mass integrals with radius extrapolation."""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq, least_squares

from .geometry import MetricChart, metric_jet
from .quadrature import circle_rule, fsum, sphere_rule

NOT_ASYMPTOTIC = "asymptotic regime not reached"
SLOW = "slow convergence"

MASS_COLUMNS = ("rho", "value", "surface_term", "circle_term")


class QuadratureError(RuntimeError):
    """Sphere integral changed under refinement by more than the tolerance."""


@dataclass(frozen=True)
class MassSample:
    rho: float
    value: float
    surface_term: float
    circle_term: float = 0.0


@dataclass
class MassReport:
    samples: list
    extrapolated: float
    error_estimate: float
    fit_exponent: float
    flags: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "samples": [{c: float(getattr(s, c)) for c in MASS_COLUMNS} for s in self.samples],
            "extrapolated": float(self.extrapolated),
            "error_estimate": float(self.error_estimate),
            "fit_exponent": None if not math.isfinite(self.fit_exponent) else float(self.fit_exponent),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(MASS_COLUMNS)
        for s in self.samples:
            w.writerow([repr(float(getattr(s, c))) for c in MASS_COLUMNS])
        return buf.getvalue()

    @classmethod
    def from_dict(cls, d: dict) -> "MassReport":
        samples = [MassSample(**{c: s[c] for c in MASS_COLUMNS}) for s in d["samples"]]
        p = d["fit_exponent"]
        return cls(samples, d["extrapolated"], d["error_estimate"],
                   float("nan") if p is None else p)


# ---------------------------------------------------------------------------
# extrapolation


def _neville_at_zero(h, v):
    """Value at ``h = 0`` of the interpolating polynomial through ``(h, v)``."""
    P = list(map(float, v))
    h = list(map(float, h))
    n = len(P)
    for m in range(1, n):
        for i in range(n - m):
            P[i] = (h[i + m] * P[i] - h[i] * P[i + 1]) / (h[i + m] - h[i])
    return P[0]


def _three_point_fit(rho, v):
    """Exact fit of ``m + c rho^-p`` through three samples; ``None`` if impossible."""
    d1, d2 = v[1] - v[0], v[2] - v[1]
    if d2 == 0.0 or d1 == 0.0 or d1 / d2 <= 0.0:
        return None
    q = d1 / d2
    t1, t2 = rho[1] / rho[0], rho[2] / rho[1]
    if math.isclose(t1, t2, rel_tol=1e-12):
        if q <= 1.0:
            return None
        p = math.log(q) / math.log(t1)
    else:
        def eq(p):
            a, b, c = (rho[k] ** -p for k in range(3))
            return (a - b) - q * (b - c)
        try:
            p = brentq(eq, 1e-6, 50.0, xtol=1e-15)
        except ValueError:
            return None
    b, c = rho[1] ** -p, rho[2] ** -p
    coef = d2 / (c - b)
    return v[2] - coef * c, coef, p


def asymptotic_flags(samples) -> list:
    v = np.array([s.value for s in samples])
    d = np.diff(v)
    flags = []
    nz = d[np.abs(d) > 1e-14 * max(1.0, float(np.max(np.abs(v))))]
    if len(nz) >= 2 and (np.any(np.sign(nz[1:]) != np.sign(nz[:-1]))
                         or np.any(np.abs(nz[1:]) > np.abs(nz[:-1]))):
        flags.append(NOT_ASYMPTOTIC)
    return flags


def extrapolate_mass(samples, model: str = "richardson"):
    """Extrapolate finite-radius mass integrals to ``rho -> infinity``.

    Returns ``(extrapolated, error_estimate, fit_exponent)``.

    ``model="richardson"`` fits a polynomial in ``1/rho`` through all samples;
    ``model="power"`` least-squares fits ``m + c rho^-p``.  In both cases the
    error estimate is half the disagreement of the last two extrapolants and
    ``fit_exponent`` is the ``p`` of the three-point power fit to the largest
    radii (``nan`` when the samples do not determine it).
    """
    if len(samples) < 3:
        raise ValueError("extrapolation needs at least 3 samples")
    rho = np.array([s.rho for s in samples], dtype=float)
    v = np.array([s.value for s in samples], dtype=float)
    if np.any(np.diff(rho) <= 0):
        raise ValueError("radii must be strictly increasing")
    if np.all(v == v[0]):
        return float(v[0]), 0.0, float("nan")
    last = _three_point_fit(rho[-3:], v[-3:])
    p = last[2] if last else float("nan")
    if model == "richardson":
        h = 1.0 / rho
        full = _neville_at_zero(h, v)
        reduced = _neville_at_zero(h[1:], v[1:])
        return full, 0.5 * abs(full - reduced), p
    if model == "power":
        if last is None:
            return float(v[-1]), 0.5 * abs(v[-1] - v[-2]), p
        fit = least_squares(lambda x: x[0] + x[1] * rho ** -x[2] - v, list(last),
                            xtol=1e-15, ftol=1e-15, gtol=1e-15)
        m = float(fit.x[0])
        prev = _three_point_fit(rho[-4:-1], v[-4:-1]) if len(v) >= 4 else None
        other = prev[0] if prev else float(v[-1])
        return m, 0.5 * abs(last[0] - other), p
    raise ValueError(f"unknown extrapolation model {model!r}")


def build_report(samples, model="richardson") -> MassReport:
    m, err, p = extrapolate_mass(samples, model)
    flags = asymptotic_flags(samples)
    if math.isfinite(p) and p < 0.8:
        flags.append(SLOW)
    return MassReport(list(samples), m, err, p, flags)


def default_radii(chart: MetricChart, count: int = 4):
    rho0 = 16.0 * chart.inner_radius
    return [rho0 * 2.0**k for k in range(count)]


# ---------------------------------------------------------------------------
# integrands


def adm_integrand(chart: MetricChart, p, n0) -> np.ndarray:
    """``sum_ij (d_i g_ij - d_j g_ii) n0_j`` with coordinate partials."""
    dg = metric_jet(chart, p).dg
    mu = np.einsum("...iji->...j", dg) - np.einsum("...iij->...j", dg)
    return np.einsum("...j,...j->...", mu, np.asarray(n0, dtype=float))


def _adm_surface(chart, rho, rule):
    pts = rho * rule.nodes
    return rule.integrate(adm_integrand(chart, pts, rule.nodes)) * rho**2 / (16.0 * np.pi)


def _circle_term(chart, rho, rule):
    pts = rho * rule.nodes
    g = metric_jet(chart, pts).g
    # <d_y3, theta0>_g with theta0 the outward co-normal of the equator in the plane
    integrand = np.einsum("...j,...j->...", g[..., 2, :], rule.nodes)
    return rule.integrate(integrand) * rho / (16.0 * np.pi)


def _checked(fine, coarse, qtol):
    if abs(fine - coarse) > qtol * max(1.0, abs(fine)):
        raise QuadratureError(
            f"sphere integral not converged: {fine!r} vs coarse {coarse!r}")
    return fine


def adm_mass(chart: MetricChart, radii=None, n_theta: int = 48, n_phi: int = 96,
             qtol: float = 1e-9, model: str = "richardson") -> MassReport:
    """ADM mass of a full-exterior chart from coordinate-sphere flux integrals."""
    if chart.is_half:
        raise ValueError("adm_mass needs a full-exterior chart; use half_space_mass")
    radii = default_radii(chart) if radii is None else list(radii)
    if len(radii) < 3:
        raise ValueError("adm_mass needs at least 3 radii")
    fine, coarse = sphere_rule(n_theta, n_phi), sphere_rule(n_theta // 2, n_phi // 2)
    samples = []
    for rho in radii:
        val = _checked(_adm_surface(chart, rho, fine), _adm_surface(chart, rho, coarse), qtol)
        samples.append(MassSample(float(rho), val, val, 0.0))
    return build_report(samples, model)


def half_space_mass(chart: MetricChart, radii=None, n_theta: int = 48, n_phi: int = 96,
                    qtol: float = 1e-9, model: str = "richardson") -> MassReport:
    """Half-space mass: hemisphere flux plus the equatorial co-normal term."""
    if not chart.is_half:
        raise ValueError("half_space_mass needs a half-exterior chart")
    radii = default_radii(chart) if radii is None else list(radii)
    if len(radii) < 3:
        raise ValueError("half_space_mass needs at least 3 radii")
    fine = sphere_rule(n_theta, n_phi, hemisphere=True)
    coarse = sphere_rule(n_theta // 2, n_phi // 2, hemisphere=True)
    cfine, ccoarse = circle_rule(n_phi), circle_rule(n_phi // 2)
    samples = []
    for rho in radii:
        surf = _checked(_adm_surface(chart, rho, fine), _adm_surface(chart, rho, coarse), qtol)
        circ = _checked(_circle_term(chart, rho, cfine), _circle_term(chart, rho, ccoarse), qtol)
        samples.append(MassSample(float(rho), surf + circ, surf, circ))
    return build_report(samples, model)
