"""Priors: a thick prior on the boundary parameter and Brownian-path score priors.

The score prior draws ``Z ~ N(0,1)`` and a Brownian path ``W`` on ``[0, 1]``,
then squashes ``Z + W`` through ``psi(x) = 2*arctan(x)/pi`` and scales by the
ball radius, so every path lands strictly inside the sup-norm ball.  For the
half-line variant the Brownian time is the compactified coordinate, which is
exactly the grid the score functions are stored on.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.interpolate import PchipInterpolator

from .nuisance import HALF_LINE, UNIT_INTERVAL, ScoreFunction


@dataclass(frozen=True)
class ThetaPrior:
    """Prior on the boundary parameter with a pointwise log-density."""

    kind: str  # gaussian | uniform | grid
    params: tuple

    @classmethod
    def gaussian(cls, mean, sd):
        if not sd > 0:
            raise ValueError("sd must be positive")
        return cls("gaussian", (float(mean), float(sd)))

    @classmethod
    def uniform(cls, a, b):
        if not b > a:
            raise ValueError("need a < b")
        return cls("uniform", (float(a), float(b)))

    @classmethod
    def from_grid(cls, grid, values):
        """Custom prior from density samples; normalized by trapezoid rule."""
        grid = np.asarray(grid, dtype=float)
        values = np.asarray(values, dtype=float)
        if np.any(values < 0) or not np.all(np.diff(grid) > 0):
            raise ValueError("grid prior needs nonnegative values on an increasing grid")
        mass = np.trapezoid(values, grid)
        interp = PchipInterpolator(grid, values / mass, extrapolate=False)
        return cls("grid", (grid, values / mass, interp))

    def log_density(self, theta):
        theta = np.asarray(theta, dtype=float)
        if self.kind == "gaussian":
            mean, sd = self.params
            return -0.5 * math.log(2.0 * math.pi) - math.log(sd) - 0.5 * ((theta - mean) / sd) ** 2
        if self.kind == "uniform":
            a, b = self.params
            inside = (theta >= a) & (theta <= b)
            return np.where(inside, -math.log(b - a), -np.inf)
        interp = self.params[2]
        vals = interp(theta)
        with np.errstate(divide="ignore", invalid="ignore"):
            out = np.log(np.nan_to_num(vals, nan=0.0))
        return out


def log_theta_prior(prior, theta):
    """log pi(theta); ``-inf`` outside the support."""
    out = prior.log_density(theta)
    return float(out) if np.ndim(theta) == 0 else out


@dataclass(frozen=True)
class ScorePriorSampler:
    """Brownian-path score prior; stateless in ``(master_seed, index)``.

    ``variant`` is ``"compactified"`` for half-line scores and
    ``"unit_interval"`` for scores on ``[0, 1]``; the path construction is the
    same on the stored grid, only the domain tag of the emitted score differs.
    """

    bound: float
    variant: str = "compactified"
    grid_size: int = 257
    master_seed: int = 0

    def __post_init__(self):
        if not self.bound > 0:
            raise ValueError("bound must be positive")
        if self.variant not in ("compactified", "unit_interval"):
            raise ValueError(f"unknown variant {self.variant!r}")
        if self.grid_size < 2:
            raise ValueError("grid_size must be at least 2")

    @property
    def domain_kind(self):
        return HALF_LINE if self.variant == "compactified" else UNIT_INTERVAL

    def sample_score(self, index):
        """Draw one score path; bit-reproducible given ``(master_seed, index)``."""
        rng = np.random.default_rng(np.random.SeedSequence(self.master_seed, spawn_key=(int(index),)))
        grid = np.linspace(0.0, 1.0, self.grid_size)
        z = rng.standard_normal()
        steps = rng.standard_normal(self.grid_size - 1) * np.sqrt(np.diff(grid))
        w = np.concatenate(([0.0], np.cumsum(steps)))
        values = self.bound * (2.0 / np.pi) * np.arctan(z + w)
        return ScoreFunction(self.domain_kind, grid, values, self.bound)

    def sample_scores(self, start, count):
        return [self.sample_score(i) for i in range(start, start + count)]
