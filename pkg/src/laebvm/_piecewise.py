"""Shared low-level numerics: panel Gauss quadrature and piecewise polynomials.

Everything here operates on plain numpy arrays.  Panels are half-open
segments between consecutive entries of a strictly increasing ``breaks``
array; piecewise polynomials are stored as power-basis coefficients in the
local offset ``x - breaks[s]``, ascending degree, shape ``(deg+1, nseg)``.
"""

from __future__ import annotations

import numpy as np

# 5-point Gauss-Legendre rule on [-1, 1]; exact for polynomials of degree 9.
_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(5)


def gauss_panel_integrals(f, breaks):
    """Integral of ``f`` over each panel of ``breaks`` by 5-point Gauss.

    ``f`` must accept a 2-d array of evaluation points.  Returns an array of
    per-panel integrals, shape ``(len(breaks) - 1,)``.
    """
    breaks = np.asarray(breaks, dtype=float)
    a = breaks[:-1]
    half = 0.5 * (breaks[1:] - a)
    # points[q, s] = node q mapped into panel s
    points = a + half * (_GL_NODES[:, None] + 1.0)
    vals = f(points)
    return half * np.einsum("q,qs->s", _GL_WEIGHTS, vals)


def gauss_partial_integrals(f, lower, upper):
    """Vectorized ``∫_lower[i]^upper[i] f`` by a single 5-point Gauss panel each.

    Intended for short intervals where ``f`` is smooth; callers must split at
    any breakpoints of ``f`` themselves.
    """
    lower = np.asarray(lower, dtype=float)
    upper = np.asarray(upper, dtype=float)
    half = 0.5 * (upper - lower)
    points = lower + half * (_GL_NODES[:, None] + 1.0)
    vals = f(points)
    return half * np.einsum("q,qi->i", _GL_WEIGHTS, vals)


def refine_breaks(knots, max_step, min_subdiv=1):
    """Subdivide each interval of ``knots`` into panels of length <= max_step.

    Each original interval is split into at least ``min_subdiv`` equal parts.
    Returns the refined strictly increasing array (knots are preserved).
    """
    knots = np.asarray(knots, dtype=float)
    pieces = [knots[:1]]
    for a, b in zip(knots[:-1], knots[1:]):
        nsub = max(min_subdiv, int(np.ceil((b - a) / max_step)))
        pieces.append(np.linspace(a, b, nsub + 1)[1:])
    return np.concatenate(pieces)


def hermite_coefficients(breaks, values, slopes):
    """Cubic Hermite power-basis coefficients on each panel.

    Matches ``values`` and ``slopes`` at both panel ends.  Returns an array of
    shape ``(4, nseg)`` with ascending-degree coefficients in ``x - breaks[s]``.
    """
    h = np.diff(breaks)
    v0, v1 = values[:-1], values[1:]
    d0, d1 = slopes[:-1], slopes[1:]
    dv = v1 - v0
    c2 = (3.0 * dv - (2.0 * d0 + d1) * h) / h**2
    c3 = (-2.0 * dv + (d0 + d1) * h) / h**3
    return np.vstack([v0, d0, c2, c3])


class PiecewisePoly:
    """Piecewise polynomial with shared breakpoints, ascending power basis.

    Evaluation outside ``[breaks[0], breaks[-1]]`` extrapolates the first or
    last segment; callers are expected to clip or mask beforehand.
    """

    __slots__ = ("breaks", "coef")

    def __init__(self, breaks, coef):
        self.breaks = np.asarray(breaks, dtype=float)
        self.coef = np.asarray(coef, dtype=float)
        if self.coef.shape[1] != self.breaks.size - 1:
            raise ValueError("coefficient array does not match breaks")

    def segment_index(self, x):
        idx = np.searchsorted(self.breaks, x, side="right") - 1
        return np.clip(idx, 0, self.breaks.size - 2)

    def __call__(self, x, idx=None):
        x = np.asarray(x, dtype=float)
        if idx is None:
            idx = self.segment_index(x)
        delta = x - self.breaks[idx]
        out = self.coef[-1][idx].copy()
        for row in self.coef[-2::-1]:
            out *= delta
            out += row[idx]
        return out

    def derivative_values(self, x):
        """Evaluate d/dx of the piecewise polynomial at ``x``."""
        x = np.asarray(x, dtype=float)
        idx = self.segment_index(x)
        delta = x - self.breaks[idx]
        deg = self.coef.shape[0] - 1
        out = deg * self.coef[-1][idx]
        for power in range(deg - 1, 0, -1):
            out *= delta
            out += power * self.coef[power][idx]
        return out


def trapezoid_log_norm(log_values, nodes):
    """log of the trapezoid-rule integral of exp(log_values) over nodes."""
    m = float(np.max(log_values))
    if not np.isfinite(m):
        return -np.inf
    return m + np.log(np.trapezoid(np.exp(log_values - m), nodes))
