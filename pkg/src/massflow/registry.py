"""Named charts and conformal factors, addressable by short spec strings.

Spec strings look like function calls: ``"schwarzschild_isotropic(1)"``,
``"gibbons(1, 0.5)"``, ``"conformal(euclidean, half_over_r(1), 0.5)"``.
A bare name uses defaults (or ``--M``/``--Q`` overrides in the CLI).
Parsing goes through :mod:`ast`; nothing is evaluated.
"""
from __future__ import annotations

import ast

from . import conformal
from .conformal import ConformalFactor, ConformalFamily
from .geometry import FULL, MetricChart, euclidean, schwarzschild_isotropic


class RegistryError(ValueError):
    """Unknown name or malformed spec string."""


def _parse(spec: str):
    try:
        node = ast.parse(spec.strip(), mode="eval").body
    except SyntaxError as exc:
        raise RegistryError(f"malformed spec {spec!r}") from exc
    return node


def _node_call(node):
    if isinstance(node, ast.Name):
        return node.id, []
    if isinstance(node, ast.Call) and isinstance(node.func, ast.Name) and not node.keywords:
        return node.func.id, list(node.args)
    raise RegistryError(f"expected name or call, got {ast.dump(node)}")


def _number(node) -> float:
    if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
        return float(node.value)
    if isinstance(node, ast.UnaryOp) and isinstance(node.op, ast.USub):
        return -_number(node.operand)
    if isinstance(node, ast.BinOp) and isinstance(node.op, ast.Div):
        return _number(node.left) / _number(node.right)
    raise RegistryError(f"expected a number, got {ast.unparse(node)}")


def _gibbons(M=1.0, Q=0.5):
    from .staticfields import gibbons_solution
    return gibbons_solution(M, Q).chart


CHARTS = {"euclidean": lambda: euclidean(),
          "schwarzschild_isotropic": schwarzschild_isotropic,
          "gibbons": _gibbons}
CHART_PARAMS = {"euclidean": (), "schwarzschild_isotropic": ("M",), "gibbons": ("M", "Q")}


def _chart(node, overrides):
    name, args = _node_call(node)
    if name == "conformal":
        if len(args) != 3:
            raise RegistryError("conformal(base, factor, lambda) takes three arguments")
        base = _chart(args[0], overrides)
        fac = _factor(args[1], base.inner_radius)
        return ConformalFamily(base, fac, _number(args[2])).at_lambda
    if name not in CHARTS:
        raise RegistryError(f"unknown chart {name!r}; known: {sorted(CHARTS) + ['conformal']}")
    params = CHART_PARAMS[name]
    if len(args) > len(params):
        raise RegistryError(f"{name} takes at most {len(params)} parameters")
    vals = [_number(a) for a in args]
    for p in params[len(vals):]:
        if overrides.get(p) is not None:
            vals.append(float(overrides[p]))
        else:
            break
    return CHARTS[name](*vals)


def parse_chart(spec: str, M: float | None = None, Q: float | None = None,
                kind: str = FULL) -> MetricChart:
    """Chart for a spec string, switched to the requested domain kind."""
    return _chart(_parse(spec), {"M": M, "Q": Q}).with_kind(kind)


def _factor(node, inner_radius: float) -> ConformalFactor:
    name, args = _node_call(node)
    if name not in conformal.FACTORS:
        raise RegistryError(f"unknown factor {name!r}; known: {sorted(conformal.FACTORS)}")
    vals = [_number(a) for a in args]
    if name == "neumann_capped" and len(vals) < 2:
        vals = (vals or [1.0]) + [inner_radius]
    try:
        return conformal.FACTORS[name](*vals)
    except TypeError as exc:
        raise RegistryError(f"bad parameters for factor {name}: {vals}") from exc


def parse_factor(spec: str, inner_radius: float = 1.0) -> ConformalFactor:
    """Factor for a spec string; ``neumann_capped`` defaults ``r0`` to ``inner_radius``."""
    return _factor(_parse(spec), inner_radius)


def parse_base_and_factor(chart_spec: str, factor_spec: str, M=None, Q=None, kind=FULL):
    chart = parse_chart(chart_spec, M, Q, kind)
    return chart, parse_factor(factor_spec, chart.inner_radius)
