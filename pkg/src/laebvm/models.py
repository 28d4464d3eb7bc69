"""Observation models: sampling, likelihood ratios, and the local expansion.

Three model kinds share one interface:

* ``parametric_shift_exp``: densities ``lam * exp(-lam*(x - theta))`` on
  ``[theta, inf)`` with known rate ``lam``.
* ``semiparam_shift``: ``x -> eta(x - theta)`` on ``[theta, inf)`` for a
  nuisance density ``eta`` of the shift kind.
* ``semiparam_scale``: ``x -> eta(x/theta)/theta`` on ``[0, theta]`` for a
  nuisance density of the scale kind, ``theta > 0``.

The local parameter is ``h = n*(theta - theta0)``.  The boundary statistic is
``delta_n = n*(min(x) - theta0)`` for the shift-type kinds and
``delta_n = -n*(theta0 - max(x))`` for the scale kind; the rate of the
limiting exponential is the density jump at the moving support endpoint.
"""

from __future__ import annotations

import hashlib
import io
import json
import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .nuisance import NuisanceDensity

PARAMETRIC = "parametric_shift_exp"
SEMI_SHIFT = "semiparam_shift"
SEMI_SCALE = "semiparam_scale"
KINDS = (PARAMETRIC, SEMI_SHIFT, SEMI_SCALE)

# absolute slack when testing support membership in the theta parametrization;
# grid posteriors place theta exactly at the boundary, where x - theta can
# round one ulp below zero
_SNAP = 1e-12


@dataclass(frozen=True)
class ModelSpec:
    """Model kind plus its fixed constants."""

    kind: str
    theta0: float
    eta0: NuisanceDensity | None = None
    lam: float | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown model kind {self.kind!r}")
        if self.kind == PARAMETRIC:
            if self.lam is None or not self.lam > 0:
                raise ValueError("parametric kind requires lam > 0")
        else:
            if self.eta0 is None:
                raise ValueError(f"{self.kind} requires eta0")
            expected = "shift" if self.kind == SEMI_SHIFT else "scale"
            if self.eta0.kind != expected:
                raise ValueError(f"eta0 has kind {self.eta0.kind!r}, expected {expected!r}")
        if self.kind == SEMI_SCALE and not self.theta0 > 0:
            raise ValueError("scale kind requires theta0 > 0")

    @property
    def orientation(self):
        """Side of the boundary the posterior lives on: h <= delta_n or h >= delta_n."""
        return "positive" if self.kind == SEMI_SCALE else "negative"

    @property
    def gamma0(self):
        """Rate of the limiting exponential under the true parameters."""
        if self.kind == PARAMETRIC:
            return float(self.lam)
        if self.kind == SEMI_SHIFT:
            return float(self.eta0.jump_at_zero)
        return float(self.eta0.jump_at_one) / self.theta0

    def gamma_for(self, eta):
        """Limit rate of the theta-submodel at a given nuisance density."""
        if self.kind == PARAMETRIC or eta is None:
            return self.gamma0
        if self.kind == SEMI_SHIFT:
            return float(eta.jump_at_zero)
        return float(eta.jump_at_one) / self.theta0

    @cached_property
    def _hash_hex(self):
        d = {"kind": self.kind, "theta0": self.theta0, "lam": self.lam,
             "eta0": self.eta0.to_dict() if self.eta0 is not None else None}
        blob = json.dumps(d, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()[:16]

    def hash_hex(self):
        return self._hash_hex


@dataclass(frozen=True)
class Dataset:
    """Immutable i.i.d. sample with cached extremes and its seed."""

    x: np.ndarray
    seed: int
    _logp0: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "x", np.asarray(self.x, dtype=float))

    @property
    def n(self):
        return self.x.size

    @property
    def min(self):
        return float(self.x.min())

    @property
    def max(self):
        return float(self.x.max())

    def log_lik_at_true(self, spec):
        """Sum of log model densities at the true parameters (cached)."""
        key = spec.hash_hex()
        if key not in self._logp0:
            self._logp0[key] = float(np.sum(model_log_density(spec, spec.theta0, None, self.x)))
        return self._logp0[key]

    def to_csv(self, path, spec_hash=""):
        with open(path, "w") as fh:
            fh.write(f"# seed={self.seed} n={self.n} spec={spec_hash}\n")
            fh.write("x\n")
            for v in self.x:
                fh.write(f"{float(v)!r}\n")

    @classmethod
    def from_csv(cls, path):
        with open(path) as fh:
            header = fh.readline()
            seed = int(header.split("seed=")[1].split()[0])
            body = fh.read()
        x = np.loadtxt(io.StringIO(body), skiprows=1)
        return cls(x=np.atleast_1d(x), seed=seed)


@dataclass(frozen=True)
class LaeQuantities:
    delta_n: float
    gamma: float


def sample(spec, theta, eta, n, seed):
    """Draw ``n`` i.i.d. observations; deterministic given ``seed``.

    The parametric kind uses the closed-form quantile transform; the
    semiparametric kinds invert the density's cumulative table (binary search
    plus local monotone interpolation).  ``eta=None`` means the spec's eta0.
    """
    n = int(n)
    if n < 1:
        raise ValueError("n must be at least 1")
    theta = float(theta)
    if spec.kind == SEMI_SCALE and theta <= 0:
        raise ValueError("scale kind requires theta > 0")
    rng = np.random.default_rng(seed)
    if spec.kind == PARAMETRIC:
        x = theta + rng.exponential(1.0 / spec.lam, size=n)
    else:
        eta = eta if eta is not None else spec.eta0
        u = rng.random(n)
        base = eta.ppf(u)
        x = theta + base if spec.kind == SEMI_SHIFT else theta * base
    return Dataset(x=x, seed=int(seed))


def support_interval(spec, theta):
    if spec.kind == SEMI_SCALE:
        return (0.0, float(theta))
    return (float(theta), math.inf)


def model_log_density(spec, theta, eta, x):
    """Vectorized log of the model density at parameter ``theta``."""
    x = np.asarray(x, dtype=float)
    theta = float(theta)
    if spec.kind == PARAMETRIC:
        out = np.where(x >= theta - _SNAP,
                       math.log(spec.lam) - spec.lam * np.maximum(x - theta, 0.0),
                       -np.inf)
        return out
    eta = eta if eta is not None else spec.eta0
    if spec.kind == SEMI_SHIFT:
        return eta.log_density(x - theta)
    if theta <= 0:
        return np.full(x.shape, -np.inf)
    pts = x / theta
    out = np.where(pts <= 1.0 + _SNAP, eta.log_density(np.minimum(pts, 1.0)), -np.inf)
    return out - math.log(theta)


def model_density(spec, theta, eta=None):
    """Density evaluator and its support, for quadrature consumers."""
    def pdf(x):
        with np.errstate(over="ignore"):
            return np.exp(model_log_density(spec, theta, eta, x))
    return pdf, support_interval(spec, theta)


def log_lik_ratio(spec, theta, eta, data):
    """Log likelihood ratio against the true parameters; ``-inf`` off support.

    Sum over observations of ``log p(x; theta, eta) - log p(x; theta0, eta0)``.
    Exactly ``-inf`` when any observation falls outside the support of the
    candidate model (up to a 1e-12 snap at the boundary).
    """
    theta = float(theta)
    if spec.kind == PARAMETRIC:
        if theta > data.min + _SNAP:
            return -np.inf
        return data.n * spec.lam * (theta - spec.theta0)
    eta = eta if eta is not None else spec.eta0
    if spec.kind == SEMI_SHIFT:
        if theta > data.min + _SNAP:
            return -np.inf
        pts = np.maximum(data.x - theta, 0.0)
        num = float(np.sum(eta.log_density(pts)))
    else:
        if theta <= 0 or data.max > theta * (1.0 + _SNAP):
            return -np.inf
        pts = np.minimum(data.x / theta, 1.0)
        num = float(np.sum(eta.log_density(pts))) - data.n * math.log(theta)
    return num - data.log_lik_at_true(spec)


def lae_quantities(spec, data):
    """Boundary statistic and limit rate for data generated at the truth."""
    if spec.kind == SEMI_SCALE:
        delta = -data.n * (spec.theta0 - data.max)
    else:
        delta = data.n * (data.min - spec.theta0)
    return LaeQuantities(delta_n=float(delta), gamma=spec.gamma0)


def loglik_local(spec, h, eta, data):
    """Log likelihood ratio against the truth at local parameter ``h``.

    Evaluates ``sum_i log p(x_i; theta0 + h/n, eta) - log p(x_i; theta0, eta0)``
    without a round-trip through the theta parametrization, so the parametric
    closed form is exact.  Returns ``-inf`` outside the boundary constraint
    (``h > delta_n`` for shift-type kinds, ``h < delta_n`` for scale).
    """
    h = float(h)
    q = lae_quantities(spec, data)
    if spec.kind == PARAMETRIC:
        return spec.lam * h if h <= q.delta_n else -np.inf
    eta = eta if eta is not None else spec.eta0
    n = data.n
    if spec.kind == SEMI_SHIFT:
        if h > q.delta_n:
            return -np.inf
        base = data.x - spec.theta0
        num = np.sum(eta.log_density(np.maximum(base - h / n, 0.0)))
    else:
        if h < q.delta_n:
            return -np.inf
        theta = spec.theta0 + h / n
        num = np.sum(eta.log_density(np.minimum(data.x / theta, 1.0))) - n * math.log(theta)
    return float(num - data.log_lik_at_true(spec))


def lae_remainder(spec, h, eta, data):
    """Expansion remainder ``R_n(h)``; ``None`` outside the support constraint.

    ``R_n(h)`` is the log likelihood ratio of the eta-submodel between ``h``
    and ``0`` minus the linear term ``h * gamma``; the local expansion
    predicts it vanishes in probability as ``n`` grows.
    """
    q = lae_quantities(spec, data)
    outside = h > q.delta_n if spec.orientation == "negative" else h < q.delta_n
    if outside:
        return None
    if spec.kind == PARAMETRIC:
        return 0.0
    value = loglik_local(spec, h, eta, data) - loglik_local(spec, 0.0, eta, data)
    return float(value - h * spec.gamma_for(eta))


def mle_and_debiased(spec, data):
    """Boundary estimator and its de-biased version.

    Shift-type kinds: ``min(x)`` and ``min(x) - 1/(n*gamma)`` with the oracle
    jump.  Scale kind: ``max(x)`` and ``max(x) + 1/(n*gamma_hat)`` with the
    plug-in jump ``eta0(1)/max(x)``; the scale correction is a convention of
    this artifact, not an established estimator.
    """
    n = data.n
    if spec.kind == SEMI_SCALE:
        theta_hat = data.max
        gamma_hat = float(spec.eta0.jump_at_one) / theta_hat
        return theta_hat, theta_hat + 1.0 / (n * gamma_hat)
    theta_hat = data.min
    return theta_hat, theta_hat - 1.0 / (n * spec.gamma0)
