"""Conformal families ``g_lambda = f^(4 lambda) g`` and their transformation laws."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import sympy as sp

from .fields import R_SYMBOL, ConstantField, PowerField, RadialField, ScalarField
from .geometry import (HALF, ConformalChart, CoordinatePlane, CoordinateSphere,
                       MetricChart, gradient_inner, laplace_beltrami, mean_curvature,
                       metric_jet, normal_derivative, scalar_curvature)
from .mass import MassSample, build_report, default_radii
from .quadrature import fsum, sphere_rule


class FactorError(ValueError):
    """Conformal factor is not positive where it is evaluated."""


@dataclass
class ConformalFactor:
    """A positive scalar ``f -> 1`` at infinity, with its assumed decay rate ``q``."""

    field: ScalarField
    name: str = "f"
    params: dict = field(default_factory=dict)
    q: float = 0.75

    def jet(self, p):
        j = self.field.jet(p)
        if np.any(j.value <= 0):
            raise FactorError(f"conformal factor {self.name} is not positive")
        return j

    def value(self, p):
        return self.jet(p).value

    def power(self, k: float) -> "ConformalFactor":
        """The factor ``f**k`` (same decay class)."""
        return ConformalFactor(PowerField(self.field, k), f"({self.name})^{k:g}",
                               dict(self.params, power=k), self.q)


def one() -> ConformalFactor:
    return ConformalFactor(ConstantField(1.0, "one"), "one", {})


def half_over_r(a: float = 1.0) -> ConformalFactor:
    """``1 + a / (2 r)``; raises the mass by ``a``."""
    a_s = sp.nsimplify(a)
    return ConformalFactor(RadialField(1 + a_s / (2 * R_SYMBOL), f"half_over_r({a:g})"),
                           "half_over_r", {"a": float(a)})


def neumann_capped(a: float = 1.0, r0: float = 1.0) -> ConformalFactor:
    """``1 + (a/2)(1/r - r0/r^2 + r0^2/(3 r^3))``.

    ``f' = -(a/2)(r - r0)^2 / r^4`` so ``d_r f(r0) = 0``; ``f`` is Euclidean
    superharmonic for ``r >= r0`` and raises the mass by ``a``.
    """
    r = R_SYMBOL
    a_s, r0_s = sp.nsimplify(a), sp.nsimplify(r0)
    expr = 1 + a_s / 2 * (1 / r - r0_s / r**2 + r0_s**2 / (3 * r**3))
    return ConformalFactor(RadialField(expr, f"neumann_capped({a:g},{r0:g})"),
                           "neumann_capped", {"a": float(a), "r0": float(r0)})


FACTORS = {"one": one, "half_over_r": half_over_r, "neumann_capped": neumann_capped}


class ConformalFamily:
    """The triple ``(g, f, lambda)``; ``at_lambda`` is ``f^(4 lambda) g``."""

    def __init__(self, base: MetricChart, factor: ConformalFactor, lam: float = 0.5):
        if not 0.0 <= lam <= 1.0:
            raise ValueError("lambda must lie in [0, 1]")
        self.base = base
        self.factor = factor
        self.lam = float(lam)
        self.prime = ConformalChart(base, factor.field, 4.0, name=f"{factor.name}^4*{base.name}")
        self.at_lambda = ConformalChart(base, factor.field, 4.0 * lam,
                                        name=f"{factor.name}^{4 * lam:g}*{base.name}")

    def with_lambda(self, lam: float) -> "ConformalFamily":
        return ConformalFamily(self.base, self.factor, lam)

    def hypothesis_scalar(self, p):
        """``(1 - lambda) R_g + lambda f^4 R'``."""
        lam = self.lam
        f = self.factor.jet(p).value
        return (1 - lam) * scalar_curvature(self.base, p) + lam * f**4 * scalar_curvature(self.prime, p)

    def hypothesis_mean(self, surface, p, normal="outward"):
        """``(1 - lambda) H_g + lambda f^2 H'`` on a coordinate surface."""
        lam = self.lam
        f = self.factor.jet(p).value
        return ((1 - lam) * mean_curvature(self.base, surface, p, normal)
                + lam * f**2 * mean_curvature(self.prime, surface, p, normal))

    def __repr__(self):
        return f"ConformalFamily({self.base.name}, {self.factor.name}, lambda={self.lam:g})"


def scalar_curvature_lambda(fam: ConformalFamily, p) -> np.ndarray:
    """``R_lambda = f^(-4l)[(1-l) R_g + l f^4 R' + 8 l (1-l) f^-2 |grad f|_g^2]``."""
    lam = fam.lam
    fj = fam.factor.jet(p)
    jet = metric_jet(fam.base, p)
    grad2 = gradient_inner(jet, fj.grad, fj.grad)
    f = fj.value
    bracket = fam.hypothesis_scalar(p) + 8 * lam * (1 - lam) * grad2 / f**2
    return f ** (-4 * lam) * bracket


def mean_curvature_lambda(fam: ConformalFamily, surface, p, normal="outward") -> np.ndarray:
    """``H_lambda = f^(-2l)[(1-l) H_g + l f^2 H']``."""
    f = fam.factor.jet(p).value
    return f ** (-2 * fam.lam) * fam.hypothesis_mean(surface, p, normal)


# ---------------------------------------------------------------------------
# mass change


def conformal_mass_delta(factor: ConformalFactor, radii=None, kind: str = "full",
                         n_theta: int = 48, n_phi: int = 96, inner_radius: float = 1.0):
    """Per-radius ``-(1/2 pi) int_{S_rho} d_r f`` and its limit as a :class:`MassReport`.

    ``kind="half"`` integrates over the upper hemisphere only; the
    equatorial circle contributes nothing to the mass change.
    """
    if kind not in ("full", "half"):
        raise ValueError("kind must be 'full' or 'half'")
    rule = sphere_rule(n_theta, n_phi, hemisphere=(kind == "half"))
    if radii is None:
        radii = [16.0 * inner_radius * 2.0**k for k in range(4)]
    samples = []
    for rho in radii:
        dr = np.einsum("...i,...i->...", factor.jet(rho * rule.nodes).grad, rule.nodes)
        val = -rule.integrate(dr) * rho**2 / (2.0 * np.pi)
        samples.append(MassSample(float(rho), val, val, 0.0))
    return build_report(samples)


# ---------------------------------------------------------------------------
# hypothesis validation


@dataclass
class Check:
    name: str
    passed: bool
    value: float
    threshold: float
    note: str = ""

    def to_dict(self):
        return {"name": self.name, "passed": bool(self.passed),
                "value": _finite_or_none(self.value),
                "threshold": _finite_or_none(self.threshold), "note": self.note}


def _finite_or_none(x):
    x = float(x)
    return x if math.isfinite(x) else None


@dataclass
class ValidationReport:
    checks: list
    info: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def failed(self):
        return [c.name for c in self.checks if not c.passed]

    def to_dict(self):
        return {"passed": self.passed, "checks": [c.to_dict() for c in self.checks],
                "info": {k: _finite_or_none(v) for k, v in self.info.items()}}


def _ray_directions(half: bool):
    rule = sphere_rule(4, 8, hemisphere=half)
    return rule.nodes


def _decay_bounded(values, floor=1e-12):
    """All-ray maxima at increasing radii: bounded if the tail does not grow."""
    v = np.asarray(values)
    if np.max(v) < floor:
        return True
    k = len(v) // 2
    return bool(np.max(v[k:]) <= 1.5 * np.max(v[:k]) + floor)


def _shell_l1(factor, chart, r_in, r_out, n_s=48):
    """``int |Delta_g f| dV_g`` over the coordinate shell ``r_in < r < r_out``."""
    rule = sphere_rule(16, 32, hemisphere=chart.is_half)
    t, wt = np.polynomial.legendre.leggauss(n_s)
    s0, s1 = math.log(r_in), math.log(r_out)
    s = 0.5 * (s1 - s0) * (t + 1) + s0
    ws = 0.5 * (s1 - s0) * wt
    r = np.exp(s)
    pts = r[:, None, None] * rule.nodes[None, :, :]
    lap = np.abs(laplace_beltrami(chart, factor.field, pts))
    vol = metric_jet(chart, pts).sqrt_det * (r**3)[:, None]
    return fsum(ws[:, None] * rule.weights[None, :] * lap * vol)


def validate_conformal_hypotheses(factor: ConformalFactor, chart: MetricChart,
                                  neumann_tol: float = 1e-9) -> ValidationReport:
    """Sample the decay, Neumann and integrability hypotheses on ``f``.

    Decay checks can only be consistent with ``O(r^-q)``; they pass when the
    weighted quantities do not grow along the sampled rays.
    """
    half = chart.is_half
    dirs = _ray_directions(half)
    r_in = chart.inner_radius
    radii = r_in * 2.0 ** np.arange(1, 13)
    pts = radii[:, None, None] * dirs[None, :, :]
    fj = factor.field.jet(pts)
    jet = metric_jet(chart, pts)
    q = factor.q
    checks = [Check("positive", bool(np.all(fj.value > 0)), float(np.min(fj.value)), 0.0,
                    "min f on sampled rays")]
    dev = np.max(np.abs(fj.value - 1) * radii[:, None] ** q, axis=1)
    checks.append(Check("decay_value", _decay_bounded(dev), float(dev[-1]), float("nan"),
                        f"|f-1| r^q, q={q:g}; consistent with decay if bounded"))
    gn = np.sqrt(gradient_inner(jet, fj.grad, fj.grad))
    gdev = np.max(gn * radii[:, None] ** (1 + q), axis=1)
    checks.append(Check("decay_gradient", _decay_bounded(gdev), float(gdev[-1]), float("nan"),
                        "r^(1+q) |grad f|_g; consistent with decay if bounded"))

    bnodes = sphere_rule(8, 16, hemisphere=half).nodes
    sphere = CoordinateSphere(r_in)
    dn = normal_derivative(chart, sphere, factor.field, r_in * bnodes)
    checks.append(Check("neumann_inner", bool(np.max(np.abs(dn)) < neumann_tol),
                        float(np.max(np.abs(dn))), neumann_tol, "max |d_n f| on inner boundary"))

    R1 = 64.0 * r_in
    l1a = _shell_l1(factor, chart, r_in, R1)
    l1b = _shell_l1(factor, chart, r_in, 2 * R1)
    stable = math.isfinite(l1b) and (l1b < 1e-12 or abs(l1b - l1a) <= 0.05 * l1b)
    checks.append(Check("laplacian_l1", stable, l1b, 0.05,
                        "int |Delta_g f| dV_g stable under doubling the outer radius"))

    info = {"laplacian_l1_inner_shell": l1a}
    if half:
        # d_y3 f on the boundary plane is not part of the hypothesis set
        rho = radii[:, None]
        phi = np.linspace(0, 2 * np.pi, 16, endpoint=False)
        ring = np.stack([np.cos(phi), np.sin(phi), np.zeros_like(phi)], axis=-1)
        plane_pts = rho[:, :, None] * ring[None, :, :]
        dy3 = factor.field.jet(plane_pts).grad[..., 2]
        info["max_abs_dy3_f_on_sigma"] = float(np.max(np.abs(dy3)))
        plane = CoordinatePlane()
        info["max_abs_dn_f_on_sigma"] = float(np.max(np.abs(
            normal_derivative(chart, plane, factor.field, plane_pts))))
    return ValidationReport(checks, info)
