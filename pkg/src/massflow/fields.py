"""Closed-form scalar fields on coordinate regions of R^3.

Every field exposes ``jet(p)`` returning value, coordinate gradient and
coordinate Hessian at a batch of points ``p`` of shape ``(..., 3)``.
Derivatives are analytic: radial and Cartesian fields are built from sympy
expressions that are differentiated once at construction and lambdified.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import sympy as sp

R_SYMBOL = sp.Symbol("r", positive=True)
X_SYMBOLS = sp.symbols("x0 x1 x2", real=True)


@dataclass(frozen=True)
class ScalarJet2:
    """Value, gradient ``(..., 3)`` and Hessian ``(..., 3, 3)`` of a scalar."""

    value: np.ndarray
    grad: np.ndarray
    hess: np.ndarray

    def __add__(self, other: "ScalarJet2") -> "ScalarJet2":
        return ScalarJet2(self.value + other.value, self.grad + other.grad,
                          self.hess + other.hess)


def as_points(p) -> np.ndarray:
    p = np.asarray(p, dtype=float)
    if p.shape[-1] != 3:
        raise ValueError(f"points must have trailing dimension 3, got {p.shape}")
    return p


def _lambdify(expr, args):
    """Lambdify ``expr`` so that constants broadcast to the argument shape."""
    fn = sp.lambdify(args, expr, modules="numpy", cse=True)

    def call(*vals):
        out = fn(*vals)
        return np.broadcast_to(np.asarray(out, dtype=float), np.shape(vals[0])).copy()

    return call


class ScalarField:
    """Base class; subclasses implement :meth:`jet`."""

    name = "field"

    def jet(self, p) -> ScalarJet2:
        raise NotImplementedError

    def value(self, p) -> np.ndarray:
        return self.jet(p).value

    def __repr__(self) -> str:
        return f"{type(self).__name__}({self.name})"


class ConstantField(ScalarField):
    def __init__(self, c: float = 1.0, name: str | None = None):
        self.c = float(c)
        self.name = name or f"const({self.c:g})"

    def jet(self, p):
        p = as_points(p)
        shape = p.shape[:-1]
        return ScalarJet2(np.full(shape, self.c), np.zeros(shape + (3,)),
                          np.zeros(shape + (3, 3)))


class LinearField(ScalarField):
    """``alpha . x + c``."""

    def __init__(self, alpha, c: float = 0.0, name: str | None = None):
        self.alpha = np.asarray(alpha, dtype=float)
        self.c = float(c)
        self.name = name or "linear"

    def jet(self, p):
        p = as_points(p)
        shape = p.shape[:-1]
        return ScalarJet2(p @ self.alpha + self.c,
                          np.broadcast_to(self.alpha, shape + (3,)).copy(),
                          np.zeros(shape + (3, 3)))


class RadialField(ScalarField):
    """Field ``h(|x - center|)`` given as a sympy expression in :data:`R_SYMBOL`."""

    def __init__(self, expr, name: str = "radial", center=(0.0, 0.0, 0.0)):
        self.expr = sp.sympify(expr)
        self.name = name
        self.center = np.asarray(center, dtype=float)
        r = R_SYMBOL
        d1 = sp.diff(self.expr, r)
        d2 = sp.diff(d1, r)
        self._h = _lambdify(self.expr, (r,))
        self._dh = _lambdify(d1, (r,))
        self._ddh = _lambdify(d2, (r,))

    def profile(self, r):
        """Return ``(h, h', h'')`` at radii ``r``."""
        r = np.asarray(r, dtype=float)
        return self._h(r), self._dh(r), self._ddh(r)

    def jet(self, p):
        x = as_points(p) - self.center
        r = np.linalg.norm(x, axis=-1)
        h, dh, ddh = self.profile(r)
        return radial_jet(x, r, h, dh, ddh)


def radial_jet(x, r, h, dh, ddh) -> ScalarJet2:
    """Cartesian jet of a radial profile with derivatives ``dh``, ``ddh``."""
    n = x / r[..., None]
    nn = n[..., :, None] * n[..., None, :]
    eye = np.eye(3)
    grad = dh[..., None] * n
    hess = ddh[..., None, None] * nn + (dh / r)[..., None, None] * (eye - nn)
    return ScalarJet2(h, grad, hess)


class CartesianField(ScalarField):
    """Field given as a sympy expression in :data:`X_SYMBOLS`."""

    def __init__(self, expr, name: str = "cartesian"):
        self.expr = sp.sympify(expr)
        self.name = name
        xs = X_SYMBOLS
        grad = [sp.diff(self.expr, a) for a in xs]
        self._f = _lambdify(self.expr, xs)
        self._g = [_lambdify(e, xs) for e in grad]
        self._h = [[_lambdify(sp.diff(grad[i], xs[j]), xs) for j in range(3)]
                   for i in range(3)]

    def jet(self, p):
        p = as_points(p)
        args = (p[..., 0], p[..., 1], p[..., 2])
        value = self._f(*args)
        grad = np.stack([g(*args) for g in self._g], axis=-1)
        hess = np.stack([np.stack([h(*args) for h in row], axis=-1)
                         for row in self._h], axis=-2)
        return ScalarJet2(value, grad, hess)


class PowerField(ScalarField):
    """``base ** k`` with jets from the chain rule."""

    def __init__(self, base: ScalarField, k: float, name: str | None = None):
        self.base = base
        self.k = float(k)
        self.name = name or f"({base.name})^{self.k:g}"

    def jet(self, p):
        b = self.base.jet(p)
        k = self.k
        if k == 0.0:
            shape = b.value.shape
            return ScalarJet2(np.ones(shape), np.zeros(shape + (3,)),
                              np.zeros(shape + (3, 3)))
        if k == 1.0:
            return b
        v = b.value ** k
        d1 = k * b.value ** (k - 1.0)
        d2 = k * (k - 1.0) * b.value ** (k - 2.0)
        grad = d1[..., None] * b.grad
        hess = (d1[..., None, None] * b.hess
                + d2[..., None, None] * b.grad[..., :, None] * b.grad[..., None, :])
        return ScalarJet2(v, grad, hess)
