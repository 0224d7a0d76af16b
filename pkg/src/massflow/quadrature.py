"""Product quadrature on the unit sphere, hemisphere and equatorial circle.

Gauss-Legendre in ``cos(theta)`` times the trapezoid rule in ``phi``; the
hemisphere maps the Gauss nodes onto ``cos(theta) in [0, 1]``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


def fsum(values) -> float:
    """Correctly rounded sum in node-index order (order independent result)."""
    return math.fsum(np.asarray(values, dtype=float).ravel().tolist())


@dataclass(frozen=True)
class SphereRule:
    nodes: np.ndarray      # (N, 3) unit vectors
    weights: np.ndarray    # (N,) solid-angle weights
    n_theta: int
    n_phi: int
    hemisphere: bool

    @property
    def degree(self) -> int:
        """Polynomial degree integrated exactly."""
        return min(2 * self.n_theta - 1, self.n_phi - 1)

    def integrate(self, values) -> float:
        return fsum(self.weights * values)


def sphere_rule(n_theta: int = 48, n_phi: int = 96, hemisphere: bool = False) -> SphereRule:
    mu, wmu = np.polynomial.legendre.leggauss(n_theta)
    if hemisphere:
        mu, wmu = 0.5 * (mu + 1.0), 0.5 * wmu
    phi = 2.0 * np.pi * np.arange(n_phi) / n_phi
    sin_t = np.sqrt(1.0 - mu**2)
    M, P = np.meshgrid(mu, phi, indexing="ij")
    S, _ = np.meshgrid(sin_t, phi, indexing="ij")
    nodes = np.stack([S * np.cos(P), S * np.sin(P), M], axis=-1).reshape(-1, 3)
    weights = np.outer(wmu, np.full(n_phi, 2.0 * np.pi / n_phi)).ravel()
    return SphereRule(nodes, weights, n_theta, n_phi, hemisphere)


@dataclass(frozen=True)
class CircleRule:
    nodes: np.ndarray      # (N, 3) unit vectors in the plane y3 = 0
    weights: np.ndarray    # (N,) arc-length weights on the unit circle

    def integrate(self, values) -> float:
        return fsum(self.weights * values)


def circle_rule(n_phi: int = 96) -> CircleRule:
    phi = 2.0 * np.pi * np.arange(n_phi) / n_phi
    nodes = np.stack([np.cos(phi), np.sin(phi), np.zeros(n_phi)], axis=-1)
    return CircleRule(nodes, np.full(n_phi, 2.0 * np.pi / n_phi))
