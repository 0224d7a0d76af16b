"""Numerical conformal positive-mass toolkit.

Modules: :mod:`geometry` (pointwise curvature), :mod:`conformal`
(conformal families), :mod:`mass` (ADM and half-space masses),
:mod:`harmonic` (asymptotically linear harmonic functions),
:mod:`inequality` (mass inequalities), :mod:`staticfields` (static charged
dilaton black hole) and :mod:`cli`.
"""
__version__ = "0.1.0"
