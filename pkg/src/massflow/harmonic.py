"""Finite-volume solver for harmonic functions asymptotic to a linear coordinate.

The grid is uniform in ``(s, theta, phi)`` with ``s = log r``.  The unknown is
the deviation ``v = w - alpha.x``; its equation
``d_a(A^ab d_b v) = -sqrt(G) Delta_g(alpha.x)`` with
``A^ab = sqrt(G) G^ab`` is discretised cell by cell, giving a symmetric
system whenever the metric is diagonal in spherical coordinates.

Boundary conditions: zero ``g``-normal derivative on the inner sphere
(or Dirichlet data in test mode), ``w = 0`` on the plane ``y3 = 0`` for
half-space grids and ``w = alpha.x`` on the truncation sphere.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sps
import scipy.sparse.linalg as spla
import sympy as sp

from .fields import LinearField, ScalarJet2, _lambdify, as_points
from .geometry import FULL, HALF, MetricChart, gradient_inner, laplace_beltrami, metric_jet

INTERIOR, INNER, SIGMA, OUTER = 0, 1, 2, 3
CLASS_NAMES = {INTERIOR: "interior", INNER: "inner_boundary", SIGMA: "sigma_boundary",
               OUTER: "outer_boundary"}
MIN_RESOLUTION = (16, 12, 24)
FORMAT = "massflow-field"
FORMAT_VERSION = 1


class SolverError(RuntimeError):
    """Iterative solve failed to reach the requested residual."""


@dataclass(frozen=True)
class DomainSpec:
    kind: str = FULL
    inner_radius: float = 1.0
    outer_radius: float = 64.0
    alpha: tuple = (0.0, 0.0, 1.0)

    def __post_init__(self):
        if self.kind not in (FULL, HALF):
            raise ValueError(f"unknown domain kind {self.kind!r}")
        if not self.inner_radius > 0:
            raise ValueError("inner_radius must be positive")
        if not self.outer_radius >= 8 * self.inner_radius:
            raise ValueError("outer_radius must be at least 8 * inner_radius")
        a = np.asarray(self.alpha, dtype=float)
        if a.shape != (3,) or not np.linalg.norm(a) > 0:
            raise ValueError("alpha must be a nonzero 3-vector")
        a = a / np.linalg.norm(a)
        if self.kind == HALF and not np.allclose(a, (0, 0, 1), atol=1e-14):
            raise ValueError("half-space problems are asymptotic to y3")
        object.__setattr__(self, "alpha", tuple(float(c) for c in a))

    def to_dict(self):
        return {"kind": self.kind, "inner_radius": self.inner_radius,
                "outer_radius": self.outer_radius, "alpha": list(self.alpha)}


def _spherical_points(r, theta, phi, sigma_exact=False):
    st, ct = np.sin(theta), np.cos(theta)
    if sigma_exact:
        ct = np.where(np.isclose(theta, np.pi / 2, rtol=0, atol=1e-14), 0.0, ct)
    return np.stack([r * st * np.cos(phi), r * st * np.sin(phi), r * ct], axis=-1)


@dataclass
class Grid:
    spec: DomainSpec
    s: np.ndarray
    theta: np.ndarray
    phi: np.ndarray
    h_s: float
    h_theta: float
    h_phi: float
    points: np.ndarray          # (n_r, n_theta, n_phi, 3)
    classification: np.ndarray  # (n_r, n_theta, n_phi) int codes

    @property
    def shape(self):
        return self.classification.shape

    @property
    def size(self):
        return int(self.classification.size)

    @property
    def r(self):
        return np.exp(self.s)

    @property
    def is_half(self):
        return self.spec.kind == HALF

    def counts(self):
        return {CLASS_NAMES[c]: int(np.sum(self.classification == c)) for c in CLASS_NAMES}

    def metadata(self):
        return {"dims": list(self.shape), "h_s": self.h_s, "h_theta": self.h_theta,
                "h_phi": self.h_phi, **self.spec.to_dict()}


def build_grid(spec: DomainSpec, resolution=(32, 24, 48)) -> Grid:
    """Structured spherical (or hemispherical) grid with node classification.

    ``theta`` is cell centred, so no node sits on the polar axis.  Half grids
    end on the ring ``theta = pi/2``, which carries the plane condition.
    """
    n_r, n_t, n_p = (int(n) for n in resolution)
    if n_r < MIN_RESOLUTION[0] or n_t < MIN_RESOLUTION[1] or n_p < MIN_RESOLUTION[2]:
        raise ValueError(f"resolution must be at least {MIN_RESOLUTION}")
    if n_p % 2:
        raise ValueError("n_phi must be even (pole reflection pairs phi with phi + pi)")
    s0, s1 = math.log(spec.inner_radius), math.log(spec.outer_radius)
    h_s = (s1 - s0) / (n_r - 1)
    s = s0 + h_s * np.arange(n_r)
    s[-1] = s1
    if spec.kind == HALF:
        h_t = (np.pi / 2) / (n_t - 0.5)
    else:
        h_t = np.pi / n_t
    theta = (np.arange(n_t) + 0.5) * h_t
    if spec.kind == HALF:
        theta[-1] = np.pi / 2
    h_p = 2 * np.pi / n_p
    phi = h_p * np.arange(n_p)
    S, T, P = np.meshgrid(s, theta, phi, indexing="ij")
    points = _spherical_points(np.exp(S), T, P, sigma_exact=spec.kind == HALF)
    cls = np.full(S.shape, INTERIOR, dtype=np.int8)
    cls[0] = INNER
    if spec.kind == HALF:
        cls[:, -1, :] = SIGMA
    cls[-1] = OUTER
    return Grid(spec, s, theta, phi, h_s, h_t, h_p, points, cls)


# ---------------------------------------------------------------------------
# coordinate maps


def _xi_derivatives():
    x, y, z = sp.symbols("x y z", real=True)
    rr = sp.sqrt(x**2 + y**2 + z**2)
    rho = sp.sqrt(x**2 + y**2)
    xi = [sp.log(rr), sp.atan2(rho, z), sp.atan2(y, x)]
    X = (x, y, z)
    J = [[sp.diff(e, a) for a in X] for e in xi]
    H = [[[sp.diff(J[c][i], X[j]) for j in range(3)] for i in range(3)]
         for c in range(3)]
    fJ = [[_lambdify(e, X) for e in row] for row in J]
    fH = [[[_lambdify(e, X) for e in row] for row in m] for m in H]
    return fJ, fH


_XI_CACHE = {}


def xi_jacobians(p):
    """``J[c, i] = d xi_c / d x_i`` and ``H[c, i, j]`` for ``xi = (log r, theta, phi)``."""
    if not _XI_CACHE:
        _XI_CACHE["fns"] = _xi_derivatives()
    fJ, fH = _XI_CACHE["fns"]
    p = as_points(p)
    args = (p[..., 0], p[..., 1], p[..., 2])
    J = np.stack([np.stack([f(*args) for f in row], axis=-1) for row in fJ], axis=-2)
    H = np.stack([np.stack([np.stack([f(*args) for f in row], axis=-1) for row in m], axis=-2)
                  for m in fH], axis=-3)
    return J, H


def _tangents(r, theta, phi):
    """``d x / d xi_a`` as rows ``(..., a, i)``."""
    st, ct, sf, cf = np.sin(theta), np.cos(theta), np.sin(phi), np.cos(phi)
    xs = np.stack([r * st * cf, r * st * sf, r * ct], axis=-1)
    xt = np.stack([r * ct * cf, r * ct * sf, -r * st], axis=-1)
    xp = np.stack([-r * st * sf, r * st * cf, np.zeros_like(r)], axis=-1)
    return np.stack([xs, xt, xp], axis=-2)


def _conductivity(chart, s, theta, phi, sigma_exact=False):
    """``A^ab = sqrt(G) G^ab`` in ``xi`` coordinates plus ``sqrt(G)``."""
    r = np.exp(s)
    x = _spherical_points(r, theta, phi, sigma_exact)
    jet = metric_jet(chart, x)
    T = _tangents(r, theta, phi)
    # G_ab = T_a g T_b; then A = sqrt(G) G^-1
    G = np.einsum("...ai,...ij,...bj->...ab", T, jet.g, T)
    sqrtG = np.sqrt(np.linalg.det(G))
    return sqrtG[..., None, None] * np.linalg.inv(G), sqrtG, jet, x


# ---------------------------------------------------------------------------
# assembly


@dataclass
class LinearSystem:
    grid: Grid
    chart_name: str
    operator: sps.csr_matrix    # discrete -d_a(A^ab d_b .) on all nodes (Dirichlet rows empty)
    rhs: np.ndarray             # balancing right-hand side per node
    weight: np.ndarray          # vol * sqrt(G) per node (row normalisation)
    dirichlet_mask: np.ndarray
    dirichlet_values: np.ndarray  # v on Dirichlet nodes (0 elsewhere)
    inner_condition: str
    symmetric: bool
    alpha: np.ndarray

    def reduced(self):
        u = ~self.dirichlet_mask.ravel()
        d = ~u
        A = self.operator[u][:, u].tocsr()
        b = self.rhs.ravel()[u] - self.operator[u][:, d] @ self.dirichlet_values.ravel()[d]
        return A, b, u


def _alpha_dot(alpha, x):
    return np.einsum("...i,i->...", x, alpha)


def assemble_operator(grid: Grid, chart: MetricChart, inner_condition: str = "neumann",
                      dirichlet=None, cross_tol: float = 1e-13) -> LinearSystem:
    """Assemble the cell-balance system for ``v = w - alpha.x``.

    ``dirichlet`` optionally maps node points ``(..., 3)`` to prescribed ``w``
    on Dirichlet nodes (exact-solution tests); by default ``w = 0`` on the
    plane and ``w = alpha.x`` elsewhere.
    """
    if inner_condition not in ("neumann", "dirichlet"):
        raise ValueError("inner_condition must be 'neumann' or 'dirichlet'")
    if grid.is_half != chart.is_half:
        chart = chart.with_kind(grid.spec.kind)
    alpha = np.asarray(grid.spec.alpha)
    n_r, n_t, n_p = grid.shape
    hs, ht, hp = grid.h_s, grid.h_theta, grid.h_phi
    S, T, P = np.meshgrid(grid.s, grid.theta, grid.phi, indexing="ij")
    half_grid = grid.is_half

    A_node, sqrtG, jet, x = _conductivity(chart, S, T, P, sigma_exact=half_grid)
    lap_lin = laplace_beltrami(chart, LinearField(alpha), x)

    vol = np.full(S.shape, hs * ht * hp)
    vol[0] *= 0.5
    vol[-1] *= 0.5
    fac_tp = np.ones(n_r)               # theta/phi face area factor per s-layer
    fac_tp[0] = fac_tp[-1] = 0.5

    idx = np.arange(grid.size).reshape(grid.shape)
    rows, cols, vals = [], [], []

    def couple(ia, ib, c):
        c = np.asarray(c).ravel()
        ia, ib = ia.ravel(), ib.ravel()
        rows.extend((ia, ib, ia, ib))
        cols.extend((ib, ia, ia, ib))
        vals.extend((-c, -c, c, c))

    # s faces between layers i and i+1
    sf = 0.5 * (grid.s[:-1] + grid.s[1:])
    Sf, Tf, Pf = np.meshgrid(sf, grid.theta, grid.phi, indexing="ij")
    A_s, _, _, _ = _conductivity(chart, Sf, Tf, Pf, sigma_exact=half_grid)
    couple(idx[:-1], idx[1:], A_s[..., 0, 0] * ht * hp / hs)

    # theta faces between rows j and j+1 (pole faces carry no flux)
    tf = (np.arange(1, n_t) * ht)
    St, Tt, Pt = np.meshgrid(grid.s, tf, grid.phi, indexing="ij")
    A_t, _, _, _ = _conductivity(chart, St, Tt, Pt)
    c_t = A_t[..., 1, 1] * hs * hp / ht * fac_tp[:, None, None]
    couple(idx[:, :-1], idx[:, 1:], c_t)

    # phi faces, periodic
    pf = grid.phi + 0.5 * hp
    Sp, Tp, Pp = np.meshgrid(grid.s, grid.theta, pf, indexing="ij")
    A_p, _, _, _ = _conductivity(chart, Sp, Tp, Pp, sigma_exact=half_grid)
    c_p = A_p[..., 2, 2] * hs * ht / hp * fac_tp[:, None, None]
    couple(idx, np.roll(idx, -1, axis=2), c_p)

    diag_scale = max(np.max(np.abs(A_node[..., a, a])) for a in range(3))
    cross = max(np.max(np.abs(A_node[..., a, b])) for a, b in ((0, 1), (0, 2), (1, 2)))
    symmetric = True
    if cross > cross_tol * diag_scale:
        symmetric = False
        h = (hs, ht, hp)
        sl = (slice(1, n_r - 1), slice(1, n_t - 1), slice(None))
        inner = idx[sl]
        for a, b in ((0, 1), (0, 2), (1, 2), (1, 0), (2, 0), (2, 1)):
            coef = -(hs * ht * hp) / (4 * h[a] * h[b])
            for sa in (1, -1):
                Asa = _shift(A_node[..., a, b], a, sa)[sl]
                for sb in (1, -1):
                    nb = _shift(_shift(idx, a, sa), b, sb)[sl]
                    rows.append(inner.ravel())
                    cols.append(nb.ravel())
                    vals.append((coef * sa * sb * Asa).ravel())

    L = sps.csr_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
                       shape=(grid.size, grid.size))
    L.sum_duplicates()

    weight = vol * sqrtG
    rhs = weight * lap_lin

    cls = grid.classification
    dmask = (cls == OUTER) | (cls == SIGMA)
    if inner_condition == "dirichlet":
        dmask |= cls == INNER
    else:
        # conormal flux of alpha.x through the inner sphere: A^sb d_b(alpha.x)
        Tn = _tangents(np.exp(S[0]), T[0], P[0])
        q = np.einsum("...b,...bi,i->...", A_node[0, :, :, 0, :], Tn, alpha)
        rhs[0] += q * ht * hp * (~dmask[0])
    # alpha.x is exactly 0 on the plane, so there v = w
    lin = _alpha_dot(alpha, x)
    if dirichlet is None:
        target = np.where(cls == SIGMA, 0.0, lin)
    else:
        target = np.asarray(dirichlet(x), dtype=float)
    dvals = np.where(dmask, target - lin, 0.0)

    # Dirichlet rows are not part of the operator
    keep = sps.diags((~dmask).ravel().astype(float))
    L = (keep @ L).tocsr()
    L.eliminate_zeros()
    rhs = np.where(dmask, 0.0, rhs)
    return LinearSystem(grid, chart.name, L, rhs, weight, dmask, dvals, inner_condition,
                        symmetric, alpha)


def _shift(a, axis, step):
    """Array of neighbour entries ``a[idx + step e_axis]`` (periodic; caller trims)."""
    return np.roll(a, -step, axis=axis)


# ---------------------------------------------------------------------------
# solve


@dataclass
class SolveInfo:
    iterations: int
    relative_residual: float
    method: str


class _NumpyRandomState:
    """Pin numpy's global RNG for setup code that draws random start vectors."""

    def __enter__(self):
        self.state = np.random.get_state()
        np.random.seed(0)

    def __exit__(self, *exc):
        np.random.set_state(self.state)


def solve(system: LinearSystem, rtol: float = 1e-10, maxiter: int = 1000) -> "DiscreteField":
    """Preconditioned CG (GMRES when the system is not symmetric) from ``v = 0``."""
    import pyamg  # heavy import kept local

    A, b, u = system.reduced()
    v = system.dirichlet_values.ravel().copy()
    bnorm = float(np.linalg.norm(b))
    if bnorm == 0.0:
        v[u] = 0.0
        info = SolveInfo(0, 0.0, "trivial")
        return DiscreteField(system.grid, v.reshape(system.grid.shape), info,
                             system.inner_condition)
    d = np.sqrt(np.abs(A.diagonal()))
    Dm = sps.diags(1.0 / d)
    As = (Dm @ A @ Dm).tocsr()
    bs = b / d
    with _NumpyRandomState():
        ml = pyamg.smoothed_aggregation_solver(As, symmetry="symmetric" if system.symmetric
                                               else "nonsymmetric", max_coarse=500)
    M = ml.aspreconditioner(cycle="V")
    count = [0]

    def cb(_):
        count[0] += 1

    x0 = np.zeros_like(bs)
    if system.symmetric:
        y, flag = spla.cg(As, bs, x0=x0, rtol=rtol * 1e-2, maxiter=maxiter, M=M, callback=cb)
        method = "cg+sa"
    else:
        y, flag = spla.gmres(As, bs, x0=x0, rtol=rtol * 1e-2, maxiter=maxiter, M=M,
                             restart=50, callback=cb, callback_type="pr_norm")
        method = "gmres+sa"
    sol = y / d
    rel = float(np.linalg.norm(A @ sol - b) / bnorm)
    if not rel < rtol:
        raise SolverError(f"{method} stopped at relative residual {rel:.3e} (flag {flag})")
    v[u] = sol
    info = SolveInfo(count[0], rel, method)
    return DiscreteField(system.grid, v.reshape(system.grid.shape), info, system.inner_condition)


def solve_harmonic(chart: MetricChart, spec: DomainSpec, resolution=(32, 24, 48),
                   inner_condition="neumann", dirichlet=None):
    """Build, assemble and solve; returns ``(field, system)``."""
    grid = build_grid(spec, resolution)
    system = assemble_operator(grid, chart, inner_condition, dirichlet)
    return solve(system), system


# ---------------------------------------------------------------------------
# discrete fields


def _lagrange5(t):
    """Weights and first/second derivative weights of 5-point Lagrange at nodes 0..4."""
    t = np.asarray(t, dtype=float)
    nodes = np.arange(5.0)
    d = t[..., None] - nodes  # (..., 5)
    w0 = np.empty(t.shape + (5,))
    w1 = np.zeros(t.shape + (5,))
    w2 = np.zeros(t.shape + (5,))
    for m in range(5):
        others = [n for n in range(5) if n != m]
        denom = np.prod([m - n for n in others])
        w0[..., m] = np.prod([d[..., n] for n in others], axis=0) / denom
        for a in others:
            rest = [n for n in others if n != a]
            w1[..., m] += np.prod([d[..., n] for n in rest], axis=0) / denom
            for b in rest:
                rest2 = [n for n in rest if n != b]
                w2[..., m] += np.prod([d[..., n] for n in rest2], axis=0) / denom
    return w0, w1, w2


class DiscreteField:
    """Nodal values of ``w`` with degree-4 tensor interpolation in ``(s, theta, phi)``.

    The deviation ``v = w - alpha.x`` is the interpolated quantity; the linear
    part is added back analytically in :meth:`jet`.
    """

    def __init__(self, grid: Grid, v: np.ndarray, info: SolveInfo | None = None,
                 inner_condition: str = "neumann"):
        self.grid = grid
        self.v = np.asarray(v, dtype=float)
        self.info = info
        self.inner_condition = inner_condition
        self.alpha = np.asarray(grid.spec.alpha)

    @property
    def values(self) -> np.ndarray:
        return self.v + _alpha_dot(self.alpha, self.grid.points)

    # interpolation ----------------------------------------------------
    def _axis_windows(self, s, theta, phi):
        g = self.grid
        n_r, n_t, n_p = g.shape
        ts = (s - g.s[0]) / g.h_s
        i0 = np.clip(np.rint(ts).astype(int) - 2, 0, n_r - 5)
        tt = theta / g.h_theta - 0.5
        j0 = np.rint(tt).astype(int) - 2
        if g.is_half:
            j0 = np.minimum(j0, n_t - 5)
        tp = phi / g.h_phi
        k0 = np.rint(tp).astype(int) - 2
        return (i0, ts - i0), (j0, tt - j0), (k0, tp - k0)

    def _gather(self, i0, j0, k0):
        n_r, n_t, n_p = self.grid.shape
        o = np.arange(5)
        I = i0[..., None, None, None] + o[:, None, None]
        J = j0[..., None, None, None] + o[None, :, None]
        # rows past a pole are the rows on the other side, rotated by pi in phi
        flip = (J < 0) | (J >= n_t)
        J = np.where(J < 0, -1 - J, np.where(J >= n_t, 2 * n_t - 1 - J, J))
        K = k0[..., None, None, None] + o[None, None, :] + np.where(flip, n_p // 2, 0)
        I, J, K = np.broadcast_arrays(I, J, K % n_p)
        return self.v[I, J, K]

    def xi_jet(self, p):
        """``v`` with its first and second ``xi``-derivatives at points ``p``."""
        p = as_points(p)
        r = np.linalg.norm(p, axis=-1)
        s = np.log(r)
        theta = np.arccos(np.clip(p[..., 2] / r, -1.0, 1.0))
        phi = np.mod(np.arctan2(p[..., 1], p[..., 0]), 2 * np.pi)
        (i0, ts), (j0, tt), (k0, tp) = self._axis_windows(s, theta, phi)
        vals = self._gather(i0, j0, k0)
        ws, wt, wp = _lagrange5(ts), _lagrange5(tt), _lagrange5(tp)
        g = self.grid
        h = np.array([g.h_s, g.h_theta, g.h_phi])

        # contract phi first, then theta, then s
        by_p = [np.einsum("...abc,...c->...ab", vals, wp[c]) for c in range(3)]
        by_tp = {(b, c): np.einsum("...ab,...b->...a", by_p[c], wt[b])
                 for b in range(3) for c in range(3) if b + c <= 2}

        def contract(a, b, c):
            return np.einsum("...a,...a->...", by_tp[b, c], ws[a])

        val = contract(0, 0, 0)
        grad = np.stack([contract(1, 0, 0), contract(0, 1, 0), contract(0, 0, 1)], axis=-1) / h
        hess = np.empty(p.shape[:-1] + (3, 3))
        orders = {(0, 0): (2, 0, 0), (1, 1): (0, 2, 0), (2, 2): (0, 0, 2),
                  (0, 1): (1, 1, 0), (0, 2): (1, 0, 1), (1, 2): (0, 1, 1)}
        for (a, b), o in orders.items():
            hess[..., a, b] = hess[..., b, a] = contract(*o) / (h[a] * h[b])
        return val, grad, hess

    def deviation_jet(self, p) -> ScalarJet2:
        """Cartesian jet of ``v = w - alpha.x``."""
        val, gx, hx = self.xi_jet(p)
        J, H = xi_jacobians(p)
        grad = np.einsum("...a,...ai->...i", gx, J)
        hess = (np.einsum("...ab,...ai,...bj->...ij", hx, J, J)
                + np.einsum("...a,...aij->...ij", gx, H))
        return ScalarJet2(val, grad, hess)

    def jet(self, p) -> ScalarJet2:
        return self.deviation_jet(p) + LinearField(self.alpha).jet(p)

    def value(self, p):
        return self.jet(p).value

    # serialisation ----------------------------------------------------
    def to_text(self) -> str:
        header = {"format": FORMAT, "version": FORMAT_VERSION, "dims": list(self.grid.shape),
                  **self.grid.spec.to_dict(), "inner_condition": self.inner_condition}
        lines = [json.dumps(header, sort_keys=True)]
        lines.extend(repr(float(x)) for x in self.values.ravel())
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "DiscreteField":
        lines = text.splitlines()
        header = json.loads(lines[0])
        if header.get("format") != FORMAT or header.get("version") != FORMAT_VERSION:
            raise ValueError("not a massflow field file")
        spec = DomainSpec(header["kind"], header["inner_radius"], header["outer_radius"],
                          tuple(header["alpha"]))
        grid = build_grid(spec, header["dims"])
        w = np.array([float(x) for x in lines[1:1 + grid.size]])
        if w.size != grid.size:
            raise ValueError("field file is truncated")
        w = w.reshape(grid.shape)
        v = w - _alpha_dot(np.asarray(spec.alpha), grid.points)
        return cls(grid, v, None, header["inner_condition"])


# ---------------------------------------------------------------------------
# diagnostics


def discrete_laplacian(system: LinearSystem, w: np.ndarray) -> np.ndarray:
    """Discrete ``Delta_g`` of nodal ``w`` on operator rows (nan on Dirichlet nodes)."""
    v = np.asarray(w, dtype=float) - _alpha_dot(system.alpha, system.grid.points)
    r = (system.rhs.ravel() - system.operator @ v.ravel()).reshape(system.grid.shape)
    # rows balance -d(A dv) = weight * Delta(alpha.x); residual is weight * Delta_g w
    out = -r / system.weight
    # Neumann rows also carry the boundary flux, so they are not a pure Laplacian
    return np.where(system.dirichlet_mask, np.nan, out)


def residual_report(field: DiscreteField, chart: MetricChart, system: LinearSystem) -> dict:
    """Residuals of the interior equation and the three boundary conditions."""
    grid = system.grid
    cls = grid.classification
    lap = discrete_laplacian(system, field.values)
    interior = cls == INTERIOR
    out = {"max_interior_residual": float(np.max(np.abs(lap[interior])))}
    if chart.is_half != grid.is_half:
        chart = chart.with_kind(grid.spec.kind)
    inner = cls == INNER
    if system.inner_condition == "neumann" and np.any(inner):
        pts = grid.points[inner]
        jet = metric_jet(chart, pts)
        wj = field.jet(pts)
        nrm = pts / np.linalg.norm(pts, axis=-1)[..., None]
        dn = gradient_inner(jet, nrm, wj.grad) / np.sqrt(gradient_inner(jet, nrm, nrm))
        out["neumann_residual"] = float(np.max(np.abs(dn)))
    else:
        out["neumann_residual"] = 0.0
    dm = system.dirichlet_mask
    target = _alpha_dot(system.alpha, grid.points) + system.dirichlet_values
    out["dirichlet_residual"] = float(np.max(np.abs((field.values - target)[dm])))
    if grid.is_half:
        pts = grid.points[cls == SIGMA]
        pts = pts[np.linalg.norm(pts, axis=-1) < grid.spec.outer_radius * (1 - 1e-12)]
        jet = metric_jet(chart, pts)
        gw = field.jet(pts).grad
        out["min_sigma_gradient"] = float(np.min(np.sqrt(gradient_inner(jet, gw, gw))))
    else:
        out["min_sigma_gradient"] = None
    return out
