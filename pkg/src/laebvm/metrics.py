"""Hellinger and Kullback-Leibler machinery for model and nuisance distances.

The Hellinger distance used throughout is the normalized one,
``H(P,Q)^2 = 1 - int sqrt(p q) = 0.5 * int (sqrt p - sqrt q)^2``, so that
``H`` ranges over ``[0, 1]`` and two shifted exponentials with rate ``lam``
and offset ``delta`` satisfy ``H^2 = 1 - exp(-lam*delta/2)``.  All
quadratures split the axis at every support endpoint, where the integrands
are not smooth, and use composite Gauss panels in between.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import models
from ._piecewise import gauss_panel_integrals

_KN_H_GRID = 64  # nodes of the finite h-grid standing in for sup over |h| <= M


@dataclass(frozen=True)
class DistPair:
    """Two density evaluators with known supports on a common axis.

    ``tail_rate`` bounds the exponential decay used to truncate unbounded
    supports; the default suits unit-rate tails.
    """

    p: object
    q: object
    support_p: tuple
    support_q: tuple
    tail_rate: float = 1.0


def _segments(pair):
    ends = [pair.support_p[0], pair.support_p[1], pair.support_q[0], pair.support_q[1]]
    finite = sorted({float(e) for e in ends if math.isfinite(e)})
    if any(not math.isfinite(e) for e in ends):
        finite.append(max(finite) + 80.0 / pair.tail_rate)
    return finite


def _integrate(pair, fn, panels_per_segment=256):
    total = 0.0
    pts = _segments(pair)
    for a, b in zip(pts[:-1], pts[1:]):
        breaks = np.linspace(a, b, panels_per_segment + 1)
        total += float(np.sum(gauss_panel_integrals(fn, breaks)))
    return total


def hellinger(pair):
    """Normalized Hellinger distance between the two densities of a pair."""
    def integrand(x):
        return (np.sqrt(pair.p(x)) - np.sqrt(pair.q(x))) ** 2
    return math.sqrt(max(0.5 * _integrate(pair, integrand), 0.0))


def affinity(pair):
    """``int sqrt(p q)``; satisfies ``H^2 = 1 - affinity``."""
    def integrand(x):
        return np.sqrt(pair.p(x) * pair.q(x))
    return _integrate(pair, integrand)


def model_pair(spec, theta_a, eta_a, theta_b, eta_b):
    """DistPair of two model distributions from one spec."""
    pa, sa = models.model_density(spec, theta_a, eta_a)
    pb, sb = models.model_density(spec, theta_b, eta_b)
    rate = 1.0
    if spec.kind == models.PARAMETRIC:
        rate = spec.lam
    elif spec.kind == models.SEMI_SHIFT:
        etas = [e for e in (eta_a, eta_b) if e is not None] or [spec.eta0]
        rate = min(e.alpha - e.score.bound for e in etas)
    return DistPair(pa, pb, sa, sb, tail_rate=rate)


def d_H_nuisance(eta1, eta2, theta0, kind):
    """Hellinger distance between the models at the common ``theta0``."""
    if eta1.kind != eta2.kind:
        raise ValueError("nuisance densities must share their kind")
    if kind not in ("shift", "scale"):
        raise ValueError(f"unknown kind {kind!r}")
    model_kind = models.SEMI_SHIFT if kind == "shift" else models.SEMI_SCALE
    spec = models.ModelSpec(kind=model_kind, theta0=float(theta0), eta0=eta1)
    return hellinger(model_pair(spec, theta0, eta1, theta0, eta2))


@dataclass(frozen=True)
class HellingerRateReport:
    """``sqrt(n) * H`` between the perturbed and unperturbed models per draw."""

    n_list: tuple
    h: float
    sqrt_n_h: np.ndarray  # shape (len(n_list), n_draws)
    max_per_n: np.ndarray
    growth: float
    bounded: bool


def hellinger_rate_check(spec, eta_draws, h, n_list, growth_tol=0.10):
    """Scaled Hellinger distances along ``theta0 + h/n``; boundedness verdict.

    ``bounded`` holds when the max over draws grows by less than
    ``growth_tol`` from the first to the last sample size.
    """
    n_list = tuple(int(n) for n in n_list)
    if sorted(n_list) != list(n_list):
        raise ValueError("n_list must be increasing")
    draws = list(eta_draws) if eta_draws else [None]
    out = np.empty((len(n_list), len(draws)))
    for i, n in enumerate(n_list):
        theta_n = spec.theta0 + h / n
        for j, eta in enumerate(draws):
            pair = model_pair(spec, theta_n, eta, spec.theta0, eta)
            out[i, j] = math.sqrt(n) * hellinger(pair)
    max_per_n = out.max(axis=1)
    growth = float(max_per_n[-1] / max_per_n[0] - 1.0) if max_per_n[0] > 0 else 0.0
    return HellingerRateReport(
        n_list=n_list, h=float(h), sqrt_n_h=out, max_per_n=max_per_n,
        growth=growth, bounded=bool(growth < growth_tol),
    )


@dataclass(frozen=True)
class KlDiagnostics:
    """Numeric moments behind the KL-type neighborhood memberships.

    ``k_*`` are the plain moments at ``theta0``; ``kn_*`` take the sup over a
    finite grid of ``|h| <= M`` (the off-grid error is controlled by the
    log-Lipschitz modulus reported in ``h_grid_modulus``).  Membership flags
    compare each moment against ``rho**2``.
    """

    rho: float
    m: float
    n: int
    k_first: float
    k_second: float
    kn_first: float
    kn_second: float
    h_grid_modulus: float
    in_k: bool = field(init=False)
    in_kn: bool = field(init=False)

    def __post_init__(self):
        r2 = self.rho**2
        object.__setattr__(self, "in_k", self.k_first <= r2 and self.k_second <= r2)
        object.__setattr__(self, "in_kn", self.kn_first <= r2 and self.kn_second <= r2)


def _p0_breaks(spec, panels=512):
    pdf0, (lo, hi) = models.model_density(spec, spec.theta0, None)
    if not math.isfinite(hi):
        rate = spec.lam if spec.kind == models.PARAMETRIC else spec.eta0.alpha - spec.eta0.score.bound
        hi = lo + 80.0 / rate
    return pdf0, np.linspace(lo, hi, panels + 1)


def kl_neighborhood_diagnostics(spec, eta, rho, m, n):
    """Evaluate the two plain and two sup-type moment conditions for ``eta``."""
    rho = float(rho)
    pdf0, breaks = _p0_breaks(spec)

    def log_ratio_at(theta):
        def fn(x):
            num = models.model_log_density(spec, theta, eta, x)
            den = models.model_log_density(spec, spec.theta0, None, x)
            return num - den
        return fn

    lr0 = log_ratio_at(spec.theta0)
    k_first = _integrate_p0(pdf0, breaks, lambda x: -_finite(lr0(x)))
    k_second = _integrate_p0(pdf0, breaks, lambda x: _finite(lr0(x)) ** 2)

    h_grid = np.linspace(-m, m, _KN_H_GRID)

    def sup_term(x):
        best = None
        den = models.model_log_density(spec, spec.theta0, None, x)
        for h in h_grid:
            num = models.model_log_density(spec, spec.theta0 + h / n, eta, x)
            term = np.where(np.isfinite(num), -(num - den), 0.0)
            best = term if best is None else np.maximum(best, term)
        return best

    kn_first = _integrate_p0(pdf0, breaks, sup_term)
    kn_second = _integrate_p0(pdf0, breaks, lambda x: sup_term(x) ** 2)

    if spec.kind == models.SEMI_SCALE:
        modulus = (2.0 + 8.0 * eta.s) * m / (spec.theta0 * n)
    elif spec.kind == models.SEMI_SHIFT:
        modulus = (eta.alpha + eta.score.bound) * m / n
    else:
        modulus = spec.lam * m / n
    return KlDiagnostics(
        rho=rho, m=float(m), n=int(n),
        k_first=k_first, k_second=k_second,
        kn_first=kn_first, kn_second=kn_second,
        h_grid_modulus=float(modulus),
    )


def _finite(v):
    return np.where(np.isfinite(v), v, 0.0)


def _integrate_p0(pdf0, breaks, fn):
    def weighted(x):
        return pdf0(x) * fn(x)
    return float(np.sum(gauss_panel_integrals(weighted, breaks)))


def int_bounds_check(eta, eps, slack=1e-10):
    """Sandwich check: the head mass sits within ``eta(0)*eps -/+ eps*int|eta'|``."""
    eps = float(eps)
    if eps <= 0 or eps > eta.support_upper:
        raise ValueError("eps must lie inside the domain")
    breaks = np.linspace(0.0, eps, 129)
    head = float(np.sum(gauss_panel_integrals(eta.density, breaks)))
    abs_slope = float(np.sum(gauss_panel_integrals(
        lambda x: eta.density(x) * np.abs(eta.dlog_density(x)), breaks)))
    center = math.exp(eta.log_density(0.0)) * eps
    tol = slack * max(1.0, center)
    return bool(center - eps * abs_slope - tol <= head <= center + eps * abs_slope + tol)


def cone_condition_probe(spec, eta_draws, h, n_list):
    """Diagnostic curves for the Hellinger cone condition; nothing is asserted.

    For each draw, the ratio of the perturbed-to-unperturbed Hellinger
    distance over the draw's distance to the truth, per sample size.
    """
    denom = np.array([
        hellinger(model_pair(spec, spec.theta0, eta, spec.theta0, None))
        for eta in eta_draws
    ])
    curves = np.empty((len(n_list), len(eta_draws)))
    for i, n in enumerate(n_list):
        theta_n = spec.theta0 + h / n
        for j, eta in enumerate(eta_draws):
            num = hellinger(model_pair(spec, theta_n, eta, spec.theta0, eta))
            curves[i, j] = num / denom[j] if denom[j] > 0 else np.inf
    return {"n_list": tuple(int(n) for n in n_list), "d_h_to_truth": denom, "ratios": curves}


def marginal_lr_probe(spec, data, eta_draws, m_n, theta_points=128):
    """Empirical stand-in for the uniform likelihood-ratio sup condition.

    Maximizes the per-observation mean log ratio over a finite theta grid
    outside the ``|h| <= m_n`` window and over the supplied draws only, so the
    result is a diagnostic, not a proof.
    """
    n = data.n
    window = m_n / n
    if spec.kind == models.SEMI_SCALE:
        lo, hi = max(1e-6, spec.theta0 - 2.0), data.max
        grid = np.linspace(lo, hi, theta_points)
        grid = grid[np.abs(grid - spec.theta0) > window]
    else:
        grid = np.linspace(spec.theta0 - 2.0, data.min, theta_points)
        grid = grid[np.abs(grid - spec.theta0) > window]
    worst = -math.inf
    for eta in eta_draws:
        for theta in grid:
            num = models.model_log_density(spec, theta, eta, data.x)
            den = models.model_log_density(spec, spec.theta0, eta, data.x)
            if np.all(np.isfinite(num)):
                worst = max(worst, float(np.mean(num - den)))
    return {
        "max_mean_log_ratio": worst,
        "reference_minus_c_mn_over_n": -m_n / n,
        "label": "diagnostic, not a proof",
    }
