"""Both sides of the full-space and half-space mass inequalities on solved fields."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .conformal import ConformalFamily, one
from .geometry import FULL, HALF, CoordinatePlane, MetricChart, hessian_from_jets, metric_jet
from .harmonic import SIGMA, DomainSpec, Grid, assemble_operator, build_grid, solve
from .mass import adm_mass, half_space_mass
from .quadrature import fsum

EPS_GRAD = 1e-10
TRUNCATION_TOL = 0.01
REPORT_KEYS = ("lhs_mass", "lhs_error", "rhs_bulk", "rhs_boundary", "slack",
               "hypothesis_min_scalar", "hypothesis_min_mean", "eps_grad", "truncation_flag")


def _num(x):
    if x is None:
        return None
    x = float(x)
    return x if math.isfinite(x) else None


@dataclass
class InequalityReport:
    lhs_mass: float
    lhs_error: float
    rhs_bulk: float
    rhs_boundary: float
    hypothesis_min_scalar: float
    hypothesis_min_mean: float
    eps_grad: float = EPS_GRAD
    truncation_flag: bool = False
    details: dict = field(default_factory=dict)

    @property
    def slack(self) -> float:
        return self.lhs_mass - self.rhs_bulk - self.rhs_boundary

    @property
    def hypotheses_hold(self) -> bool:
        ok = self.hypothesis_min_scalar >= -1e-9
        if math.isfinite(self.hypothesis_min_mean):
            ok = ok and self.hypothesis_min_mean >= -1e-9
        return bool(ok)

    def to_dict(self) -> dict:
        d = {k: _num(getattr(self, k)) for k in REPORT_KEYS if k != "truncation_flag"}
        d["truncation_flag"] = bool(self.truncation_flag)
        return {k: d[k] for k in REPORT_KEYS}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


# ---------------------------------------------------------------------------
# integrands


def _as_family(obj) -> ConformalFamily:
    if isinstance(obj, ConformalFamily):
        return obj
    return ConformalFamily(obj, one(), 0.0)


def _pieces(fam, w, p):
    chart = fam.at_lambda
    jet = metric_jet(chart, p)
    wj = w.jet(p)
    return jet, wj


def _grad_norm(jet, grad):
    return np.sqrt(np.maximum(np.einsum("...i,...ij,...j->...", grad, jet.g_inv, grad), 0.0))


def bulk_integrand(fam, w, p, eps_grad: float = EPS_GRAD, hypothesis=None) -> np.ndarray:
    """``|Hess_l w|^2 / max(|grad w|, eps) + ((1-l) R_g + l f^4 R') |grad w|``.

    Norms and the Hessian are taken in ``g_lambda``; ``w`` is any object with
    a ``jet(p)`` method (a :class:`~massflow.harmonic.DiscreteField` or an
    analytic field).  ``hypothesis`` may pass precomputed
    ``(1-l) R_g + l f^4 R'`` values at ``p``.
    """
    fam = _as_family(fam)
    jet, wj = _pieces(fam, w, p)
    H = hessian_from_jets(jet, wj)
    Hup = np.einsum("...ia,...ab->...ib", jet.g_inv, H)
    h2 = np.einsum("...ib,...bi->...", Hup, Hup)
    n = _grad_norm(jet, wj.grad)
    if hypothesis is None:
        hypothesis = fam.hypothesis_scalar(p)
    return h2 / np.maximum(n, eps_grad) + hypothesis * n


def boundary_integrand(fam, w, p) -> np.ndarray:
    """``((1-l) H_g + l f^2 H') |grad w|_lambda`` on the plane ``y3 = 0``."""
    fam = _as_family(fam)
    jet, wj = _pieces(fam, w, p)
    return fam.hypothesis_mean(CoordinatePlane(), p) * _grad_norm(jet, wj.grad)


# ---------------------------------------------------------------------------
# quadrature on the solver grid


def _trapezoid_s(grid: Grid):
    w = np.full(grid.shape[0], grid.h_s)
    w[0] = w[-1] = 0.5 * grid.h_s
    return w


def bulk_integral(fam, w, grid: Grid, eps_grad: float = EPS_GRAD):
    """``(1/16 pi) int bulk_integrand dV_lambda`` and the minimum hypothesis scalar."""
    fam = _as_family(fam)
    fam_k = ConformalFamily(fam.base.with_kind(grid.spec.kind), fam.factor, fam.lam)
    pts = grid.points
    hyp = fam_k.hypothesis_scalar(pts)
    vals = bulk_integrand(fam_k, w, pts, eps_grad, hyp)
    wt = np.full(grid.shape[1], grid.h_theta)
    if grid.is_half:
        wt[-1] *= 0.5
    r = grid.r
    weights = (_trapezoid_s(grid)[:, None, None] * wt[None, :, None] * grid.h_phi
               * (r**3)[:, None, None] * np.sin(grid.theta)[None, :, None])
    dv = metric_jet(fam_k.at_lambda, pts).sqrt_det
    total = fsum(weights * dv * vals) / (16 * np.pi)
    return total, float(np.min(hyp))


def boundary_integral(fam, w, grid: Grid):
    """``(1/8 pi) int_Sigma boundary_integrand dA_lambda`` and the minimum hypothesis mean."""
    fam = _as_family(fam)
    if not grid.is_half:
        return 0.0, float("nan")
    fam_k = ConformalFamily(fam.base.with_kind(HALF), fam.factor, fam.lam)
    pts = grid.points[:, -1, :, :]
    vals = boundary_integrand(fam_k, w, pts)
    g = metric_jet(fam_k.at_lambda, pts).g
    da = np.sqrt(np.linalg.det(g[..., :2, :2])) * (grid.r**2)[:, None]
    weights = _trapezoid_s(grid)[:, None] * grid.h_phi
    total = fsum(weights * da * vals) / (8 * np.pi)
    return total, float(np.min(fam_k.hypothesis_mean(CoordinatePlane(), pts)))


# ---------------------------------------------------------------------------
# reports


def _report(fam, w, grid, radii, eps_grad, doubled, lhs_fn):
    fam = _as_family(fam)
    lhs_chart = fam.at_lambda.with_kind(grid.spec.kind)
    mass = lhs_fn(lhs_chart, radii)
    bulk, hmin = bulk_integral(fam, w, grid, eps_grad)
    bnd, mmin = boundary_integral(fam, w, grid)
    details = {"mass_flags": list(mass.flags), "grid": grid.metadata()}
    flag = False
    if doubled is not None:
        w2, grid2 = doubled
        b2, _ = bulk_integral(fam, w2, grid2, eps_grad)
        s2, _ = boundary_integral(fam, w2, grid2)
        rhs1, rhs2 = bulk + bnd, b2 + s2
        drift = abs(rhs2 - rhs1) / max(abs(rhs2), 1e-8)
        details["rhs_doubled"] = rhs2
        details["rhs_drift"] = drift
        flag = drift > TRUNCATION_TOL
    return InequalityReport(mass.extrapolated, mass.error_estimate, bulk, bnd, hmin, mmin,
                            eps_grad, flag, details)


def theorem1_report(fam, w, grid: Grid, radii=None, eps_grad: float = EPS_GRAD,
                    doubled=None) -> InequalityReport:
    """Half-space inequality for ``g_lambda``: ``m_Sigma(g_lambda)`` against bulk plus plane terms.

    ``doubled`` is an optional ``(field, grid)`` solved with twice the outer
    radius; the truncation flag is raised if the right-hand side moves by
    more than 1 %.
    """
    if not grid.is_half:
        raise ValueError("theorem1_report needs a half-space grid")
    return _report(fam, w, grid, radii, eps_grad, doubled, half_space_mass)


def trivial_factor_report(chart: MetricChart, w, grid: Grid, radii=None,
                        eps_grad: float = EPS_GRAD, doubled=None) -> InequalityReport:
    """The ``lambda = 0`` half-space inequality (trivial conformal factor)."""
    return theorem1_report(ConformalFamily(chart, one(), 0.0), w, grid, radii, eps_grad, doubled)


def bkks_report(chart, w, grid: Grid, radii=None, eps_grad: float = EPS_GRAD,
                doubled=None) -> InequalityReport:
    """Full-space inequality: ADM mass against the bulk term (no boundary term).

    ``chart`` may be a :class:`MetricChart` or a :class:`ConformalFamily`.
    """
    if grid.is_half:
        raise ValueError("bkks_report needs a full-exterior grid")
    return _report(chart, w, grid, radii, eps_grad, doubled, adm_mass)


def doubled_resolution(grid: Grid):
    """Resolution with twice the outer radius at the same radial spacing."""
    n_r, n_t, n_p = grid.shape
    return (n_r + int(round(math.log(2.0) / grid.h_s)), n_t, n_p)


def solve_and_report(fam, kind: str = HALF, resolution=(40, 24, 48), outer_radius=None,
                     inner_condition: str = "neumann", radii=None,
                     eps_grad: float = EPS_GRAD, check_truncation: bool = True):
    """Solve ``Delta_lambda w = 0`` and assemble the matching inequality report.

    Returns ``(report, field, grid)``.  The outer radius defaults to
    ``128 * inner_radius``.
    """
    fam = _as_family(fam)
    chart = fam.at_lambda.with_kind(kind)
    inner = chart.inner_radius
    outer = 128.0 * inner if outer_radius is None else float(outer_radius)
    alpha = (0.0, 0.0, 1.0)
    spec = DomainSpec(kind, inner, outer, alpha)
    grid = build_grid(spec, resolution)
    w = solve(assemble_operator(grid, chart, inner_condition))
    doubled = None
    if check_truncation:
        spec2 = DomainSpec(kind, inner, 2 * outer, alpha)
        grid2 = build_grid(spec2, doubled_resolution(grid))
        w2 = solve(assemble_operator(grid2, chart, inner_condition))
        doubled = (w2, grid2)
    fn = theorem1_report if kind == HALF else bkks_report
    fam_k = ConformalFamily(fam.base.with_kind(kind), fam.factor, fam.lam)
    rep = fn(fam_k, w, grid, radii, eps_grad, doubled)
    rep.details["solve"] = {"iterations": w.info.iterations,
                            "relative_residual": w.info.relative_residual}
    return rep, w, grid
