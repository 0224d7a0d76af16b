"""Pointwise tensor calculus on single-patch coordinate charts.

Conventions for array layouts (leading ``...`` is any batch shape):

* ``g[..., i, j]``           metric components
* ``dg[..., i, j, k]``       = d_k g_ij
* ``ddg[..., i, j, k, l]``   = d_l d_k g_ij
* ``gamma[..., k, i, j]``    = Gamma^k_ij

Mean curvature is ``H = div_g(nu)`` for the chosen unit normal ``nu``; with
``normal="outward"`` (the default) ``nu`` points out of the exterior region,
so the Euclidean coordinate sphere bounding an excised ball has ``H = -2/rho``
and ``H = +2/rho`` when the normal points toward infinity.
"""
from __future__ import annotations

import copy
from dataclasses import dataclass

import numpy as np
import sympy as sp

from .fields import (R_SYMBOL, ConstantField, PowerField, ScalarField, ScalarJet2,
                     _lambdify, as_points, radial_jet)

FULL = "full_exterior"
HALF = "half_exterior"

_DOMAIN_TOL = 1e-12
SURFACE_TOL = 1e-9


class DomainError(ValueError):
    """Point outside the chart domain."""


class MetricError(ValueError):
    """Metric not symmetric positive definite (or not finite) at a point."""


@dataclass(frozen=True)
class MetricJet2:
    g: np.ndarray
    dg: np.ndarray
    ddg: np.ndarray
    g_inv: np.ndarray
    sqrt_det: np.ndarray


@dataclass(frozen=True)
class CoordinatePlane:
    """The boundary plane ``y3 = 0`` of a half-space chart."""

    def level(self, p):
        p = as_points(p)
        shape = p.shape[:-1]
        grad = np.zeros(shape + (3,))
        grad[..., 2] = 1.0
        return ScalarJet2(p[..., 2].copy(), grad, np.zeros(shape + (3, 3)))

    def offset(self, p):
        return np.abs(as_points(p)[..., 2])


@dataclass(frozen=True)
class CoordinateSphere:
    """Coordinate sphere ``|x| = rho``."""

    rho: float

    def level(self, p):
        x = as_points(p)
        r = np.linalg.norm(x, axis=-1)
        return radial_jet(x, r, r, np.ones_like(r), np.zeros_like(r))

    def offset(self, p):
        return np.abs(np.linalg.norm(as_points(p), axis=-1) - self.rho) / max(1.0, self.rho)


# ---------------------------------------------------------------------------
# charts


class MetricChart:
    """A smooth metric on a coordinate region of R^3 or of the half-space.

    Subclasses implement :meth:`metric` and :meth:`analytic_jet`; callers go
    through :func:`metric_jet`, which validates the point and honours
    ``derivative_mode``.
    """

    def __init__(self, name: str, domain_kind: str = FULL, inner_radius: float = 1.0):
        if domain_kind not in (FULL, HALF):
            raise ValueError(f"unknown domain kind {domain_kind!r}")
        if not inner_radius > 0:
            raise ValueError("inner_radius must be positive")
        self.name = name
        self.domain_kind = domain_kind
        self.inner_radius = float(inner_radius)
        self.derivative_mode = "analytic"
        self.fd_scale = 1e-3

    def metric(self, p) -> np.ndarray:
        raise NotImplementedError

    def analytic_jet(self, p):
        """Return ``(g, dg, ddg)`` at ``p`` (no domain checks)."""
        raise NotImplementedError

    def with_kind(self, domain_kind: str) -> "MetricChart":
        out = copy.copy(self)
        out.domain_kind = domain_kind
        return out

    def finite_difference(self, scale: float = 1e-3) -> "MetricChart":
        """Copy of this chart whose jets come from 4th-order differences of ``g``.

        The step at ``p`` is ``scale * max(1, |p|)``.
        """
        out = copy.copy(self)
        out.derivative_mode = "finite_difference"
        out.fd_scale = float(scale)
        return out

    @property
    def is_half(self) -> bool:
        return self.domain_kind == HALF

    def check_domain(self, p) -> np.ndarray:
        p = as_points(p)
        if not np.all(np.isfinite(p)):
            raise DomainError("non-finite coordinates")
        r = np.linalg.norm(p, axis=-1)
        if np.any(r < self.inner_radius * (1.0 - _DOMAIN_TOL)):
            raise DomainError(f"point inside excised ball of radius {self.inner_radius}")
        if self.is_half and np.any(p[..., 2] < -_DOMAIN_TOL * np.maximum(1.0, r)):
            raise DomainError("point below the boundary plane y3 = 0")
        return p

    def __repr__(self) -> str:
        return f"<{type(self).__name__} {self.name} {self.domain_kind}>"


class RadialFormChart(MetricChart):
    """``g_ij = B(r) delta_ij + C(r) x_i x_j`` from sympy profiles in ``r``.

    Euclidean, isotropic Schwarzschild and the area-radius form of static
    spherically symmetric metrics all have this shape.
    """

    def __init__(self, name, B, C=0, domain_kind=FULL, inner_radius=1.0):
        super().__init__(name, domain_kind, inner_radius)
        r = R_SYMBOL
        self.B_expr = sp.sympify(B)
        self.C_expr = sp.sympify(C)
        self._B = [_lambdify(sp.diff(self.B_expr, r, n), (r,)) for n in range(3)]
        self._C = [_lambdify(sp.diff(self.C_expr, r, n), (r,)) for n in range(3)]
        self._has_C = self.C_expr != 0

    def metric(self, p):
        x = as_points(p)
        r = np.linalg.norm(x, axis=-1)
        g = self._B[0](r)[..., None, None] * np.eye(3)
        if self._has_C:
            g = g + self._C[0](r)[..., None, None] * x[..., :, None] * x[..., None, :]
        return g

    def analytic_jet(self, p):
        x = as_points(p)
        r = np.linalg.norm(x, axis=-1)
        eye = np.eye(3)
        B = radial_jet(x, r, *(f(r) for f in self._B))
        g = B.value[..., None, None] * eye
        dg = np.einsum("ij,...k->...ijk", eye, B.grad)
        ddg = np.einsum("ij,...kl->...ijkl", eye, B.hess)
        if self._has_C:
            C = radial_jet(x, r, *(f(r) for f in self._C))
            xx = x[..., :, None] * x[..., None, :]
            # d_k (x_i x_j) = delta_ik x_j + x_i delta_jk
            dxx = np.einsum("ik,...j->...ijk", eye, x) + np.einsum("...i,jk->...ijk", x, eye)
            ddxx = np.einsum("ik,jl->ijkl", eye, eye) + np.einsum("il,jk->ijkl", eye, eye)
            g = g + C.value[..., None, None] * xx
            dg = dg + np.einsum("...ij,...k->...ijk", xx, C.grad) + C.value[..., None, None, None] * dxx
            ddg = (ddg + np.einsum("...ij,...kl->...ijkl", xx, C.hess)
                   + np.einsum("...ijk,...l->...ijkl", dxx, C.grad)
                   + np.einsum("...ijl,...k->...ijkl", dxx, C.grad)
                   + C.value[..., None, None, None, None] * ddxx)
        return g, dg, ddg


class ConformalChart(MetricChart):
    """``F(x)**k * base``; jets by the product and chain rules."""

    def __init__(self, base: MetricChart, field: ScalarField, power: float, name=None):
        super().__init__(name or f"({field.name})^{power:g}*{base.name}",
                         base.domain_kind, base.inner_radius)
        self.base = base
        self.field = field
        self.power = float(power)

    def _factor(self, p):
        return PowerField(self.field, self.power).jet(p)

    def with_kind(self, domain_kind):
        out = copy.copy(self)
        out.domain_kind = domain_kind
        out.base = self.base.with_kind(domain_kind)
        return out

    def metric(self, p):
        F = self.field.value(p) ** self.power
        return F[..., None, None] * self.base.metric(p)

    def analytic_jet(self, p):
        g0, dg0, ddg0 = self.base.analytic_jet(p)
        F = self._factor(p)
        v = F.value
        g = v[..., None, None] * g0
        dg = v[..., None, None, None] * dg0 + np.einsum("...ij,...k->...ijk", g0, F.grad)
        ddg = (v[..., None, None, None, None] * ddg0
               + np.einsum("...ijk,...l->...ijkl", dg0, F.grad)
               + np.einsum("...ijl,...k->...ijkl", dg0, F.grad)
               + np.einsum("...ij,...kl->...ijkl", g0, F.hess))
        return g, dg, ddg


class LinearPullbackChart(MetricChart):
    """Pullback of ``base`` under the linear map ``x -> A x``."""

    def __init__(self, base: MetricChart, A, name=None):
        self.A = np.asarray(A, dtype=float)
        super().__init__(name or f"pullback({base.name})", base.domain_kind,
                         base.inner_radius * np.linalg.norm(np.linalg.inv(self.A), 2))
        self.base = base

    def check_domain(self, p):
        p = as_points(p)
        self.base.check_domain(p @ self.A.T)
        return p

    def metric(self, p):
        g = self.base.metric(as_points(p) @ self.A.T)
        return np.einsum("ai,...ab,bj->...ij", self.A, g, self.A)

    def analytic_jet(self, p):
        g, dg, ddg = self.base.analytic_jet(as_points(p) @ self.A.T)
        A = self.A
        g = np.einsum("ai,...ab,bj->...ij", A, g, A)
        dg = np.einsum("ai,bj,ck,...abc->...ijk", A, A, A, dg, optimize=True)
        ddg = np.einsum("ai,bj,ck,dl,...abcd->...ijkl", A, A, A, A, ddg, optimize=True)
        return g, dg, ddg


class ConstantMetricChart(MetricChart):
    """A constant (hence flat) metric, possibly non-diagonal."""

    def __init__(self, matrix, name="constant", domain_kind=FULL, inner_radius=1.0):
        super().__init__(name, domain_kind, inner_radius)
        self.matrix = np.asarray(matrix, dtype=float)

    def metric(self, p):
        p = as_points(p)
        return np.broadcast_to(self.matrix, p.shape[:-1] + (3, 3)).copy()

    def analytic_jet(self, p):
        p = as_points(p)
        shape = p.shape[:-1]
        return (self.metric(p), np.zeros(shape + (3, 3, 3)), np.zeros(shape + (3, 3, 3, 3)))


# built-in charts --------------------------------------------------------------


def euclidean(domain_kind: str = FULL, inner_radius: float = 1.0) -> RadialFormChart:
    return RadialFormChart("euclidean", 1, 0, domain_kind, inner_radius)


def schwarzschild_isotropic(M: float = 1.0, domain_kind: str = FULL) -> RadialFormChart:
    """``(1 + M/2r)^4 delta``; the horizon ``r = M/2`` is the inner boundary."""
    if not M > 0:
        raise ValueError("M must be positive")
    M = sp.nsimplify(M)
    psi = 1 + M / (2 * R_SYMBOL)
    return RadialFormChart(f"schwarzschild_isotropic({float(M):g})", psi**4, 0,
                           domain_kind, float(M) / 2)


def gibbons_metric_profiles(M, Q):
    """``(B, C)`` profiles of the charged dilaton metric in Cartesian form."""
    r = R_SYMBOL
    M, Q = sp.nsimplify(M), sp.nsimplify(Q)
    A = 1 / (1 - 2 * M / r)          # g_rr = V^-2
    B = 1 - Q**2 / (M * r)           # areal factor e^{2 phi}
    return B, sp.simplify((A - B) / r**2)


# ---------------------------------------------------------------------------
# jets


def _fd_weights(offsets, deriv):
    offsets = np.asarray(offsets, dtype=float)
    n = len(offsets)
    V = np.array([offsets**m for m in range(n)])
    rhs = np.zeros(n)
    rhs[deriv] = float(np.prod(np.arange(1, deriv + 1)))
    return np.linalg.solve(V, rhs)


_C1 = (np.array([-2.0, -1.0, 1.0, 2.0]), np.array([1.0, -8.0, 8.0, -1.0]) / 12.0)
_C2 = (np.array([-2.0, -1.0, 0.0, 1.0, 2.0]), np.array([-1.0, 16.0, -30.0, 16.0, -1.0]) / 12.0)
_F1 = (np.arange(5.0), _fd_weights(np.arange(5.0), 1))
_F2 = (np.arange(6.0), _fd_weights(np.arange(6.0), 2))


def _fd_group(chart, p, h, one_sided):
    """Finite-difference jets for points sharing the y3 stencil type."""
    n = len(p)
    e = np.eye(3)
    st1 = [(_F1 if (one_sided and k == 2) else _C1) for k in range(3)]
    st2 = [(_F2 if (one_sided and k == 2) else _C2) for k in range(3)]

    def g_at(shift):
        return chart.metric(p + shift * h[:, None])

    g = chart.metric(p)
    dg = np.zeros((n, 3, 3, 3))
    ddg = np.zeros((n, 3, 3, 3, 3))
    for k in range(3):
        offs, w = st1[k]
        dg[..., k] = sum(wi * g_at(o * e[k]) for o, wi in zip(offs, w)) / h[:, None, None]
        offs, w = st2[k]
        ddg[..., k, k] = sum(wi * g_at(o * e[k]) for o, wi in zip(offs, w)) / (h**2)[:, None, None]
    for k in range(3):
        for l in range(k + 1, 3):
            ok, wk = st1[k]
            ol, wl = st1[l]
            acc = 0.0
            for a, wa in zip(ok, wk):
                for b, wb in zip(ol, wl):
                    acc = acc + wa * wb * g_at(a * e[k] + b * e[l])
            ddg[..., k, l] = ddg[..., l, k] = acc / (h**2)[:, None, None]
    return g, dg, ddg


def _fd_jet(chart, p):
    shape = p.shape[:-1]
    flat = p.reshape(-1, 3)
    h = chart.fd_scale * np.maximum(1.0, np.linalg.norm(flat, axis=-1))
    one_sided = (flat[:, 2] < 2.0 * h) if chart.is_half else np.zeros(len(flat), bool)
    g = np.zeros((len(flat), 3, 3))
    dg = np.zeros((len(flat), 3, 3, 3))
    ddg = np.zeros((len(flat), 3, 3, 3, 3))
    for mask, side in ((~one_sided, False), (one_sided, True)):
        if np.any(mask):
            g[mask], dg[mask], ddg[mask] = _fd_group(chart, flat[mask], h[mask], side)
    return g.reshape(shape + (3, 3)), dg.reshape(shape + (3, 3, 3)), ddg.reshape(shape + (3, 3, 3, 3))


def _check_spd(g):
    if not np.all(np.isfinite(g)):
        raise MetricError("metric not finite")
    m1 = g[..., 0, 0]
    m2 = g[..., 0, 0] * g[..., 1, 1] - g[..., 0, 1] * g[..., 1, 0]
    m3 = np.linalg.det(g)
    if np.any(m1 <= 0) or np.any(m2 <= 0) or np.any(m3 <= 0):
        raise MetricError("metric not positive definite")
    return m3


def metric_jet(chart: MetricChart, p) -> MetricJet2:
    """Metric and its first two coordinate derivatives at ``p``."""
    p = chart.check_domain(p)
    if chart.derivative_mode == "analytic":
        g, dg, ddg = chart.analytic_jet(p)
    else:
        g, dg, ddg = _fd_jet(chart, p)
    det = _check_spd(g)
    return MetricJet2(g, dg, ddg, np.linalg.inv(g), np.sqrt(det))


def _lowered(dg):
    # Gamma_{l ij} = (d_i g_jl + d_j g_il - d_l g_ij) / 2
    return 0.5 * (np.einsum("...jli->...lij", dg) + np.einsum("...ilj->...lij", dg) - np.einsum("...ijl->...lij", dg))


def christoffel(jet: MetricJet2) -> np.ndarray:
    """Levi-Civita symbols ``Gamma[..., k, i, j]``."""
    return np.einsum("...kl,...lij->...kij", jet.g_inv, _lowered(jet.dg))


def christoffel_derivative(jet: MetricJet2) -> np.ndarray:
    """``dGamma[..., k, i, j, m] = d_m Gamma^k_ij``."""
    L = _lowered(jet.dg)
    dd = jet.ddg
    dL = 0.5 * (np.einsum("...jlim->...lijm", dd) + np.einsum("...iljm->...lijm", dd)
                - np.einsum("...ijlm->...lijm", dd))
    dginv = -np.einsum("...ka,...abm,...bl->...klm", jet.g_inv, jet.dg, jet.g_inv, optimize=True)
    return np.einsum("...klm,...lij->...kijm", dginv, L) + np.einsum("...kl,...lijm->...kijm", jet.g_inv, dL)


def scalar_curvature_from_jet(jet: MetricJet2) -> np.ndarray:
    G = christoffel(jet)
    dG = christoffel_derivative(jet)
    ric = (np.einsum("...kijk->...ij", dG) - np.einsum("...kikj->...ij", dG)
           + np.einsum("...kkl,...lij->...ij", G, G) - np.einsum("...kjl,...lik->...ij", G, G))
    return np.einsum("...ij,...ij->...", jet.g_inv, ric)


def scalar_curvature(chart: MetricChart, p) -> np.ndarray:
    return scalar_curvature_from_jet(metric_jet(chart, p))


def _scalar_jet(u, p) -> ScalarJet2:
    if isinstance(u, ScalarJet2):
        return u
    return u.jet(p)


def hessian_from_jets(mjet: MetricJet2, ujet: ScalarJet2) -> np.ndarray:
    return ujet.hess - np.einsum("...kij,...k->...ij", christoffel(mjet), ujet.grad)


def covariant_hessian(chart: MetricChart, u, p) -> np.ndarray:
    """``(nabla^2 u)_ij = d_i d_j u - Gamma^k_ij d_k u``.

    ``u`` is a :class:`~massflow.fields.ScalarField` or a precomputed jet.
    """
    return hessian_from_jets(metric_jet(chart, p), _scalar_jet(u, p))


def laplace_beltrami(chart: MetricChart, u, p) -> np.ndarray:
    jet = metric_jet(chart, p)
    H = hessian_from_jets(jet, _scalar_jet(u, p))
    return np.einsum("...ij,...ij->...", jet.g_inv, H)


def laplace_beltrami_divergence(chart: MetricChart, u, p) -> np.ndarray:
    """Divergence form ``(1/sqrt g) d_i (sqrt g g^ij d_j u)``, independent of Christoffels."""
    jet = metric_jet(chart, p)
    uj = _scalar_jet(u, p)
    dlog = 0.5 * np.einsum("...ab,...abi->...i", jet.g_inv, jet.dg)
    dginv = -np.einsum("...ia,...abm,...bj->...ijm", jet.g_inv, jet.dg, jet.g_inv, optimize=True)
    div_ginv = np.einsum("...iji->...j", dginv)
    return (np.einsum("...ij,...ij->...", jet.g_inv, uj.hess)
            + np.einsum("...j,...j->...", div_ginv, uj.grad)
            + np.einsum("...i,...ij,...j->...", dlog, jet.g_inv, uj.grad))


def gradient_inner(jet: MetricJet2, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """``g^ij a_i b_j`` for covectors ``a``, ``b``."""
    return np.einsum("...i,...ij,...j->...", a, jet.g_inv, b)


def gradient_norm(chart: MetricChart, u, p) -> np.ndarray:
    jet = metric_jet(chart, p)
    du = _scalar_jet(u, p).grad
    return np.sqrt(np.maximum(gradient_inner(jet, du, du), 0.0))


def _orientation(normal: str) -> float:
    if normal == "outward":
        return -1.0
    if normal == "inward":
        return 1.0
    raise ValueError(f"normal must be 'outward' or 'inward', got {normal!r}")


def _on_surface(surface, p):
    if np.any(surface.offset(p) > SURFACE_TOL):
        raise ValueError(f"point not on {surface}")


def mean_curvature(chart: MetricChart, surface, p, normal: str = "outward") -> np.ndarray:
    """Mean curvature ``div_g(nu)`` of a coordinate plane or sphere.

    The exterior region lies on the side where the level function
    (``y3`` or ``|x|``) increases; ``normal="outward"`` points away from it.
    """
    _on_surface(surface, p)
    jet = metric_jet(chart, p)
    s = surface.level(p)
    H = hessian_from_jets(jet, s)
    up = np.einsum("...ij,...j->...i", jet.g_inv, s.grad)
    n2 = np.einsum("...i,...i->...", up, s.grad)
    n = np.sqrt(n2)
    lap = np.einsum("...ij,...ij->...", jet.g_inv, H)
    hnn = np.einsum("...i,...ij,...j->...", up, H, up) / n2
    return _orientation(normal) * (lap - hnn) / n


def normal_derivative(chart: MetricChart, surface, u, p, normal: str = "outward") -> np.ndarray:
    """``d_nu u`` for the unit normal of :func:`mean_curvature`."""
    _on_surface(surface, p)
    jet = metric_jet(chart, p)
    s = surface.level(p)
    du = _scalar_jet(u, p).grad
    return _orientation(normal) * gradient_inner(jet, s.grad, du) / np.sqrt(gradient_inner(jet, s.grad, s.grad))


ONE = ConstantField(1.0, name="one")
