"""Score functions and the exponentially tilted nuisance densities they induce.

A score is a bounded continuous function stored as grid samples on the
compactified coordinate ``u in [0, 1]`` with monotone-cubic interpolation
between samples.  Two tilt maps turn scores into probability densities:

* ``esscher_shift``: ``eta(x) = exp(-alpha*x + int_0^x ell) / Z`` on
  ``[0, inf)``, integrable because ``alpha`` exceeds the score bound; the
  result is strictly decreasing with a sub-exponential tail.
* ``esscher_scale``: ``eta(x) = exp(s*x + int_0^x ell) / Z`` on ``[0, 1]``,
  monotone increasing and bounded between ``exp(-2s)`` and ``exp(2s)``.

All log-density arithmetic goes through the cumulative score integral and a
cached log-normalizer; densities are never exponentiated and re-logged.
Instances are immutable after construction and safe to share across threads
(lazy caches are rebuilt idempotently).
"""

from __future__ import annotations

import json
import math

import numpy as np
from scipy.interpolate import PchipInterpolator

from ._piecewise import (
    PiecewisePoly,
    gauss_panel_integrals,
    gauss_partial_integrals,
    hermite_coefficients,
    refine_breaks,
)

HALF_LINE = "half_line"
UNIT_INTERVAL = "unit_interval"

# Unnormalized mass allowed beyond the truncation point of a shift density,
# relative to a lower bound on the normalizer.
_TAIL_MASS = 1e-13
# Panel-length cap keeping 5-point Gauss at ~1e-12 relative accuracy on
# exp(-beta*t) integrands with beta up to alpha + S, and the cubic Hermite
# table of the cumulative score integral below ~1e-8.
_PANEL_SCALE = 1.5
_PANEL_CAP = 0.5


def _compactify(t):
    return (2.0 / np.pi) * np.arctan(t)


def _uncompactify(u):
    return np.tan(0.5 * np.pi * u)


class ScoreFunction:
    """Bounded continuous function on ``[0, inf]`` or ``[0, 1]``.

    Parameters
    ----------
    domain_kind : str
        ``"half_line"`` or ``"unit_interval"``.
    grid : array_like
        Strictly increasing abscissae of the compactified coordinate,
        covering ``[0, 1]`` (for the half line, ``u = 2*arctan(t)/pi``).
    values : array_like
        Samples at the grid nodes, uniformly bounded by ``bound``.
    bound : float
        Radius of the sup-norm ball the function belongs to.
    """

    def __init__(self, domain_kind, grid, values, bound):
        if domain_kind not in (HALF_LINE, UNIT_INTERVAL):
            raise ValueError(f"unknown domain_kind {domain_kind!r}")
        grid = np.asarray(grid, dtype=float)
        values = np.asarray(values, dtype=float)
        if grid.ndim != 1 or grid.size < 2:
            raise ValueError("grid needs at least 2 points")
        if values.shape != grid.shape:
            raise ValueError("grid and values must have matching shapes")
        if not np.all(np.diff(grid) > 0):
            raise ValueError("grid must be strictly increasing")
        if abs(grid[0]) > 1e-12 or abs(grid[-1] - 1.0) > 1e-12:
            raise ValueError("grid must cover the full compactified domain [0, 1]")
        if not np.all(np.isfinite(values)):
            raise ValueError("score values must be finite")
        bound = float(bound)
        if not bound > 0:
            raise ValueError("bound must be positive")
        if np.max(np.abs(values)) > bound + 1e-12:
            raise ValueError("score values exceed the stated bound")
        grid = grid.copy()
        grid[0], grid[-1] = 0.0, 1.0
        self.domain_kind = domain_kind
        self.grid = grid
        self.values = values.copy()
        self.bound = bound
        self._pchip = PchipInterpolator(grid, values, extrapolate=True)
        self._antideriv = self._pchip.antiderivative() if domain_kind == UNIT_INTERVAL else None
        self._halfline_cache = None  # (breaks, prefix), grown on demand

    @classmethod
    def constant(cls, level, domain_kind, bound=None, n=257):
        """Constant score on a uniform grid; ``bound`` defaults sensibly."""
        if bound is None:
            bound = max(abs(level), 1.0)
        grid = np.linspace(0.0, 1.0, n)
        return cls(domain_kind, grid, np.full(n, float(level)), bound)

    @classmethod
    def from_compact_samples(cls, domain_kind, values, bound):
        """Score from samples on the uniform compactified grid."""
        values = np.asarray(values, dtype=float)
        grid = np.linspace(0.0, 1.0, values.size)
        return cls(domain_kind, grid, values, bound)

    def compact_eval(self, u):
        """Evaluate at the compactified coordinate ``u in [0, 1]``."""
        return self._pchip(np.clip(u, 0.0, 1.0))

    def __call__(self, t):
        """Evaluate at the native coordinate (``t >= 0`` or ``x in [0, 1]``)."""
        t = np.asarray(t, dtype=float)
        if self.domain_kind == HALF_LINE:
            return self._pchip(_compactify(t))
        return self._pchip(np.clip(t, 0.0, 1.0))

    @property
    def limit_value(self):
        """Value at the far end of the domain (last grid sample)."""
        return float(self.values[-1])

    # -- cumulative integral ------------------------------------------------

    def _halfline_table(self, t_max):
        cache = self._halfline_cache
        if cache is None or cache[0][-1] < t_max:
            breaks = _halfline_breaks(self.grid, max(t_max, 8.0), cap=_PANEL_SCALE, tail_growth=32.0)
            prefix = np.concatenate(([0.0], np.cumsum(gauss_panel_integrals(self, breaks))))
            cache = (breaks, prefix)
            self._halfline_cache = cache
        return cache

    def cumulative(self, x):
        """``int_0^x`` of the score in the native coordinate."""
        x = np.asarray(x, dtype=float)
        if np.any(x < -1e-12):
            raise ValueError("cumulative integral requested left of the domain")
        xc = np.maximum(x, 0.0)
        if self.domain_kind == UNIT_INTERVAL:
            if np.any(xc > 1.0 + 1e-12):
                raise ValueError("cumulative integral requested beyond x = 1")
            return self._antideriv(np.minimum(xc, 1.0))
        flat = np.atleast_1d(xc).ravel()
        breaks, prefix = self._halfline_table(float(flat.max(initial=0.0)))
        idx = np.clip(np.searchsorted(breaks, flat, side="right") - 1, 0, breaks.size - 2)
        out = prefix[idx] + gauss_partial_integrals(self, breaks[idx], flat)
        return out.reshape(xc.shape) if xc.ndim else float(out[0])

    def to_dict(self):
        return {
            "domain_kind": self.domain_kind,
            "grid": self.grid.tolist(),
            "values": self.values.tolist(),
            "bound": self.bound,
        }

    @classmethod
    def from_dict(cls, d):
        return cls(d["domain_kind"], d["grid"], d["values"], d["bound"])


def _halfline_breaks(grid_u, t_max, cap, tail_growth=None, min_subdiv=1):
    """Quadrature breakpoints on [0, t_max] aligned with the mapped grid nodes.

    Long gaps are subdivided to at most ``cap``; with ``tail_growth`` set, the
    allowed panel length grows like ``t / tail_growth`` far out, where the
    interpolated score is nearly flat.  ``min_subdiv`` forces extra splits of
    every mapped node interval, which tightens the cubic Hermite table of the
    cumulative integral (error falls like the fourth power of the panel
    length).
    """
    u_cut = _compactify(t_max)
    t_knots = _uncompactify(grid_u[grid_u < u_cut])
    knots = np.append(t_knots[t_knots < t_max - 1e-12], t_max)
    pieces = [knots[:1]]
    for a, b in zip(knots[:-1], knots[1:]):
        step = cap if tail_growth is None else max(cap, a / tail_growth)
        nsub = max(min_subdiv, int(np.ceil((b - a) / step)))
        pieces.append(np.linspace(a, b, nsub + 1)[1:])
    return np.concatenate(pieces)


class NuisanceDensity:
    """Probability density produced by one of the two tilt maps.

    Not constructed directly; use :func:`esscher_shift` or
    :func:`esscher_scale`.  Exposes log-density, pointwise derivative ratio,
    the jump size at the varying support endpoint, and a piecewise-polynomial
    view of the log-density for batch evaluation.
    """

    def __init__(self, *, kind, score, alpha, s, log_normalizer, jump_at_zero,
                 jump_at_one, g_poly, exact_table, t_max):
        self.kind = kind
        self.score = score
        self.alpha = alpha
        self.s = s
        self.log_normalizer = log_normalizer
        self.jump_at_zero = jump_at_zero
        self.jump_at_one = jump_at_one
        self._g_poly = g_poly
        self._exact_table = exact_table  # (breaks, prefix) for the shift kind
        self._t_max = t_max
        self._sampler = None  # lazy inverse-CDF table

    @property
    def support_upper(self):
        return math.inf if self.kind == "shift" else 1.0

    def log_density(self, x):
        """log eta(x); ``-inf`` outside the domain.  Vectorized."""
        x = np.asarray(x, dtype=float)
        scalar = x.ndim == 0
        xf = np.atleast_1d(x).astype(float)
        out = np.full(xf.shape, -np.inf)
        if self.kind == "scale":
            inside = (xf >= -1e-12) & (xf <= 1.0 + 1e-12)
            if np.any(inside):
                out[inside] = self._g_poly(np.clip(xf[inside], 0.0, 1.0))
        else:
            inside = xf >= -1e-12
            if np.any(inside):
                xi = np.maximum(xf[inside], 0.0)
                breaks, prefix = self._exact_table
                near = xi <= self._t_max
                vals = np.empty(xi.shape)
                if np.any(near):
                    xn = xi[near]
                    idx = np.clip(np.searchsorted(breaks, xn, side="right") - 1, 0, breaks.size - 2)
                    cum = prefix[idx] + gauss_partial_integrals(self.score, breaks[idx], xn)
                    vals[near] = -self.alpha * xn + cum - self.log_normalizer
                if np.any(~near):
                    # beyond the table the score is essentially its limit value;
                    # relative mass out here is below 1e-12 by construction
                    g_end = (-self.alpha * self._t_max + prefix[-1] - self.log_normalizer)
                    slope = self.score.limit_value - self.alpha
                    vals[~near] = g_end + slope * (xi[~near] - self._t_max)
                out[inside] = vals
        return float(out[0]) if scalar else out

    def density(self, x):
        with np.errstate(over="ignore"):
            return np.exp(self.log_density(x))

    def dlog_density(self, x):
        """Derivative ratio eta'(x)/eta(x) on the domain interior."""
        if self.kind == "shift":
            return self.score(x) - self.alpha
        return self.score(x) + self.s

    def piecewise_log_density(self):
        """Piecewise-polynomial log-density table (valid on the domain)."""
        return self._g_poly

    @property
    def jump(self):
        """Jump size at the varying support endpoint."""
        return self.jump_at_zero if self.kind == "shift" else self.jump_at_one

    # -- inverse CDF ----------------------------------------------------------

    def _build_sampler(self, table_nodes=4097):
        if self.kind == "scale":
            knots = self.score.grid
        else:
            knots = self._exact_table[0]
        per = max(1, int(np.ceil((table_nodes - 1) / (knots.size - 1))))
        breaks = refine_breaks(knots, max_step=np.inf, min_subdiv=per)
        if self.kind == "scale":
            masses = gauss_panel_integrals(lambda x: np.exp(self._g_poly(x)), breaks)
        else:
            a, half = breaks[:-1], 0.5 * np.diff(breaks)
            prefix = np.concatenate(([0.0], np.cumsum(gauss_panel_integrals(self.score, breaks))))
            gl_nodes, gl_weights = np.polynomial.legendre.leggauss(5)
            vals = np.empty((5, a.size))
            for q, xi in enumerate(gl_nodes):
                pts = a + half * (xi + 1.0)
                cum = prefix[:-1] + gauss_partial_integrals(self.score, a, pts)
                vals[q] = np.exp(-self.alpha * pts + cum - self.log_normalizer)
            masses = half * np.einsum("q,qs->s", gl_weights, vals)
        cdf = np.concatenate(([0.0], np.cumsum(masses)))
        # drop float-tied nodes in the far tail so the inverse stays monotone
        keep = np.concatenate(([True], np.diff(cdf) > 1e-15))
        cdf, nodes = cdf[keep], breaks[keep]
        self._sampler = (PchipInterpolator(cdf, nodes, extrapolate=False), float(cdf[-1]))

    def ppf(self, u):
        """Quantile function via the cumulative table and monotone interpolation.

        The table holds ~4097 nodes; for the shift kind the mass beyond the
        table end (below 1e-12) maps to the last node.
        """
        if self._sampler is None:
            self._build_sampler()
        inverse, u_max = self._sampler
        u = np.clip(np.asarray(u, dtype=float), 0.0, u_max)
        return inverse(u)

    # -- serialization -------------------------------------------------------

    def to_dict(self):
        return {
            "kind": self.kind,
            "alpha": self.alpha,
            "s": self.s,
            "log_normalizer": self.log_normalizer,
            "score": self.score.to_dict(),
        }

    def to_json(self):
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, d):
        score = ScoreFunction.from_dict(d["score"])
        if d["kind"] == "shift":
            eta = esscher_shift(score, d["alpha"])
        else:
            eta = esscher_scale(score, d["s"])
        if abs(eta.log_normalizer - d["log_normalizer"]) > 1e-8:
            raise ValueError("serialized log_normalizer disagrees with reconstruction")
        return eta

    @classmethod
    def from_json(cls, text):
        return cls.from_dict(json.loads(text))


def esscher_shift(score, alpha):
    """Tilt a half-line score into a decreasing density on ``[0, inf)``.

    Requires ``alpha > score.bound`` so that the unnormalized density
    ``exp(-alpha*x + int_0^x ell)`` is integrable.  The normalizer is computed
    by panel Gauss quadrature up to a truncation point whose remaining mass is
    below 1e-13 of the total, with the analytic tail estimate added back.
    """
    if score.domain_kind != HALF_LINE:
        raise ValueError("esscher_shift needs a half_line score")
    alpha = float(alpha)
    s_bound = score.bound
    if not np.isfinite(alpha) or alpha <= s_bound:
        raise ValueError(f"alpha must exceed the score bound ({alpha} <= {s_bound})")
    gap = alpha - s_bound
    t_end = math.log((alpha + s_bound) / (gap * _TAIL_MASS)) / gap + min(4.0 / gap, 50.0)
    breaks = _halfline_breaks(score.grid, t_end,
                              cap=min(_PANEL_SCALE / (alpha + s_bound), _PANEL_CAP), min_subdiv=3)
    ell = score(breaks)
    prefix = np.concatenate(([0.0], np.cumsum(gauss_panel_integrals(score, breaks))))

    # normalizer: Gauss panels of exp(-alpha*t + C(t)); C at the inner nodes
    # is the panel prefix plus a nested partial integral of the score
    a = breaks[:-1]
    half = 0.5 * np.diff(breaks)
    gl_nodes, gl_weights = np.polynomial.legendre.leggauss(5)
    panel_vals = np.empty((5, a.size))
    for q, xi in enumerate(gl_nodes):
        pts = a + half * (xi + 1.0)
        cum = prefix[:-1] + gauss_partial_integrals(score, a, pts)
        panel_vals[q] = np.exp(-alpha * pts + cum)
    z0 = float(np.sum(half * np.einsum("q,qs->s", gl_weights, panel_vals)))
    tail = math.exp(-alpha * breaks[-1] + prefix[-1]) / (alpha - float(ell[-1]))
    log_normalizer = math.log(z0 + tail)

    cum_coef = hermite_coefficients(breaks, prefix, ell)
    coef = np.vstack([
        cum_coef[0] - alpha * a - log_normalizer,
        cum_coef[1] - alpha,
        cum_coef[2],
        cum_coef[3],
    ])
    # linear continuation segment past the table end
    g_end = -alpha * breaks[-1] + prefix[-1] - log_normalizer
    coef = np.hstack([coef, [[g_end], [float(ell[-1]) - alpha], [0.0], [0.0]]])
    g_poly = PiecewisePoly(np.append(breaks, breaks[-1] + 1.0), coef)

    return NuisanceDensity(
        kind="shift", score=score, alpha=alpha, s=None,
        log_normalizer=log_normalizer,
        jump_at_zero=math.exp(-log_normalizer), jump_at_one=None,
        g_poly=g_poly, exact_table=(breaks, prefix), t_max=float(breaks[-1]),
    )


def esscher_scale(score, s):
    """Tilt a unit-interval score into an increasing density on ``[0, 1]``.

    The cumulative score integral is the exact antiderivative of the
    monotone-cubic interpolant, so the log-density table is exact piecewise
    quartic and the normalizer quadrature is limited only by panel Gauss
    accuracy on ``exp`` of a quartic.
    """
    if score.domain_kind != UNIT_INTERVAL:
        raise ValueError("esscher_scale needs a unit_interval score")
    s = float(s)
    if not np.isfinite(s) or s <= 0:
        raise ValueError("S must be a positive real")
    if np.max(np.abs(score.values)) > s + 1e-12:
        raise ValueError("score lies outside the ball of radius S")
    anti = score._antideriv

    def unnorm_log(x):
        return s * x + anti(x)

    breaks = refine_breaks(score.grid, max_step=1.0 / 64.0)
    z = float(np.sum(gauss_panel_integrals(lambda x: np.exp(unnorm_log(x)), breaks)))
    log_normalizer = math.log(z)

    knots = anti.x
    seg = knots[:-1]
    coef = anti.c[::-1].copy()  # ascending degree, shape (5, nseg)
    coef[0] += s * seg - log_normalizer
    coef[1] += s
    g_poly = PiecewisePoly(knots, coef)

    return NuisanceDensity(
        kind="scale", score=score, alpha=None, s=s,
        log_normalizer=log_normalizer,
        jump_at_zero=None, jump_at_one=math.exp(s + float(anti(1.0)) - log_normalizer),
        g_poly=g_poly, exact_table=None, t_max=1.0,
    )


def esscher_shift_many(scores, alpha):
    """Map many half-line scores through :func:`esscher_shift` at once.

    When the scores share a grid and bound (as draws from one prior sampler
    do), the interpolation and quadrature run stacked over the batch; results
    agree with the one-at-a-time construction.  Falls back to the scalar path
    on heterogeneous input.
    """
    if not scores:
        return []
    grid, bound = scores[0].grid, scores[0].bound
    homogeneous = all(
        s.domain_kind == HALF_LINE and s.bound == bound and np.array_equal(s.grid, grid)
        for s in scores
    )
    if not homogeneous:
        return [esscher_shift(s, alpha) for s in scores]
    alpha = float(alpha)
    if not np.isfinite(alpha) or alpha <= bound:
        raise ValueError(f"alpha must exceed the score bound ({alpha} <= {bound})")
    values = np.column_stack([s.values for s in scores])  # (K, J)
    pch = PchipInterpolator(grid, values, axis=0, extrapolate=True)

    def ell_at(t):
        return pch(_compactify(t))

    gap = alpha - bound
    t_end = math.log((alpha + bound) / (gap * _TAIL_MASS)) / gap + min(4.0 / gap, 50.0)
    breaks = _halfline_breaks(grid, t_end,
                              cap=min(_PANEL_SCALE / (alpha + bound), _PANEL_CAP), min_subdiv=3)
    nseg = breaks.size - 1
    nscore = values.shape[1]
    a = breaks[:-1]
    half = 0.5 * np.diff(breaks)
    gl_nodes, gl_weights = np.polynomial.legendre.leggauss(5)
    pts = a + half * (gl_nodes[:, None] + 1.0)  # (5, nseg)
    panel = half[:, None] * np.einsum("q,qsj->sj", gl_weights, ell_at(pts))
    prefix = np.vstack([np.zeros(nscore), np.cumsum(panel, axis=0)])  # (nseg+1, J)
    ell = ell_at(breaks)  # (nseg+1, J)

    z0 = np.zeros(nscore)
    for q, xi in enumerate(gl_nodes):
        upper = a + half * (xi + 1.0)
        inner_half = 0.5 * (upper - a)
        inner = a + inner_half * (gl_nodes[:, None] + 1.0)  # (5, nseg)
        cum = prefix[:-1] + inner_half[:, None] * np.einsum("q,qsj->sj", gl_weights, ell_at(inner))
        z0 += gl_weights[q] * np.einsum("s,sj->j", half, np.exp(-alpha * upper[:, None] + cum))
    tail = np.exp(-alpha * breaks[-1] + prefix[-1]) / (alpha - ell[-1])
    log_normalizer = np.log(z0 + tail)  # (J,)

    h = np.diff(breaks)[:, None]
    dv = prefix[1:] - prefix[:-1]
    d0, d1 = ell[:-1], ell[1:]
    c2 = (3.0 * dv - (2.0 * d0 + d1) * h) / h**2
    c3 = (-2.0 * dv + (d0 + d1) * h) / h**3
    g_end = -alpha * breaks[-1] + prefix[-1] - log_normalizer
    breaks_ext = np.append(breaks, breaks[-1] + 1.0)
    out = []
    for j, score in enumerate(scores):
        coef = np.empty((4, nseg + 1))
        coef[0, :nseg] = prefix[:-1, j] - alpha * a - log_normalizer[j]
        coef[1, :nseg] = d0[:, j] - alpha
        coef[2, :nseg] = c2[:, j]
        coef[3, :nseg] = c3[:, j]
        coef[:, nseg] = (g_end[j], float(ell[-1, j]) - alpha, 0.0, 0.0)
        out.append(NuisanceDensity(
            kind="shift", score=score, alpha=alpha, s=None,
            log_normalizer=float(log_normalizer[j]),
            jump_at_zero=math.exp(-float(log_normalizer[j])), jump_at_one=None,
            g_poly=PiecewisePoly(breaks_ext, coef),
            exact_table=(breaks, prefix[:, j]), t_max=float(breaks[-1]),
        ))
    return out


def esscher_scale_many(scores, s):
    """Batch version of :func:`esscher_scale` for scores on a shared grid."""
    if not scores:
        return []
    grid, bound = scores[0].grid, scores[0].bound
    homogeneous = all(
        sc.domain_kind == UNIT_INTERVAL and sc.bound == bound and np.array_equal(sc.grid, grid)
        for sc in scores
    )
    if not homogeneous:
        return [esscher_scale(sc, s) for sc in scores]
    s = float(s)
    if not np.isfinite(s) or s <= 0:
        raise ValueError("S must be a positive real")
    values = np.column_stack([sc.values for sc in scores])
    if np.max(np.abs(values)) > s + 1e-12:
        raise ValueError("score lies outside the ball of radius S")
    anti = PchipInterpolator(grid, values, axis=0, extrapolate=True).antiderivative()
    breaks = refine_breaks(grid, max_step=1.0 / 64.0)
    pts = breaks[:-1] + 0.5 * np.diff(breaks) * (np.polynomial.legendre.leggauss(5)[0][:, None] + 1.0)
    gl_w = np.polynomial.legendre.leggauss(5)[1]
    vals = np.exp(s * pts[..., None] + anti(pts))  # (5, nseg, J)
    z = np.einsum("s,q,qsj->j", 0.5 * np.diff(breaks), gl_w, vals)
    log_normalizer = np.log(z)
    coef_all = anti.c[::-1]  # (5, nseg, J) ascending
    seg = anti.x[:-1]
    at_one = anti(1.0)
    out = []
    for j, score in enumerate(scores):
        coef = coef_all[:, :, j].copy()
        coef[0] += s * seg - log_normalizer[j]
        coef[1] += s
        out.append(NuisanceDensity(
            kind="scale", score=score, alpha=None, s=s,
            log_normalizer=float(log_normalizer[j]),
            jump_at_zero=None,
            jump_at_one=math.exp(s + float(at_one[j]) - float(log_normalizer[j])),
            g_poly=PiecewisePoly(anti.x, coef), exact_table=None, t_max=1.0,
        ))
    return out


def log_lipschitz_check(eta, theta0, theta, x, slack=1e-10):
    """Check the pointwise log-Lipschitz bound on the model density ratio.

    For the shift kind the bound is ``exp((alpha + S)|theta - theta0|)`` and
    ``x`` must lie in both supports (``x >= max(theta0, theta)``).  For the
    scale kind the constant is ``(2 + 8S)/theta0``, valid for ``theta`` within
    ``theta0/2`` of ``theta0``, and ``x`` must satisfy ``x <= min(theta0, theta)``.
    """
    theta0 = float(theta0)
    theta = float(theta)
    x = float(x)
    if eta.kind == "shift":
        if x < min(theta0, theta):
            raise ValueError("x lies outside both supports")
        m = eta.alpha + eta.score.bound
        log_ratio = eta.log_density(x - theta) - eta.log_density(x - theta0)
    else:
        if theta0 <= 0 or theta <= 0:
            raise ValueError("scale parameters must be positive")
        if abs(theta - theta0) >= 0.5 * theta0:
            raise ValueError("theta outside the theta0/2 ball where the constant is valid")
        if x < 0 or x > max(theta0, theta):
            raise ValueError("x lies outside both supports")
        m = (2.0 + 8.0 * eta.s) / theta0
        log_ratio = (eta.log_density(x / theta) - math.log(theta)
                     - eta.log_density(x / theta0) + math.log(theta0))
    return bool(log_ratio <= m * abs(theta - theta0) + slack)
