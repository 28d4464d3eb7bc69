import math

import numpy as np
import pytest

from laebvm import models, posterior
from laebvm.posterior import ExpLimit, GridConfig, PosteriorGrid
from laebvm.priors import ThetaPrior

FLAT = ThetaPrior.uniform(-60.0, 60.0)
GAUSS = ThetaPrior.gaussian(0.0, 1.0)


def limit_as_grid(limit, nodes):
    """Discretize a limit law on given nodes with its exact normalizer."""
    with np.errstate(divide="ignore"):
        lu = np.log(limit.density(nodes))
    return PosteriorGrid(
        h_nodes=nodes, log_unnorm=lu, log_norm_const=0.0,
        delta_n=limit.location, gamma_hat=limit.rate,
        orientation=limit.orientation, theta0=0.0, n=100,
    )


class TestConjugateCase:
    def test_tv_within_quadrature_error(self, parametric_spec):
        for seed in range(5):
            data = models.sample(parametric_spec, 0.0, None, 100, seed=seed)
            post = posterior.marginal_posterior(parametric_spec, data, FLAT)
            assert posterior.tv_to_limit(post, post.limit()) <= 1e-6

    def test_point_estimates_match_closed_forms(self, parametric_spec):
        data = models.sample(parametric_spec, 0.0, None, 100, seed=3)
        post = posterior.marginal_posterior(parametric_spec, data, FLAT)
        mean, median, limit_mean = posterior.bayes_point_estimates(post)
        assert mean == pytest.approx(data.min - 1.0 / 100.0, abs=1e-8)
        assert median == pytest.approx(data.min - math.log(2.0) / 100.0, abs=1e-8)
        assert limit_mean == pytest.approx(data.min - 1.0 / 100.0, abs=1e-12)

    def test_posterior_density_is_truncated_exponential(self, parametric_spec):
        data = models.sample(parametric_spec, 0.0, None, 50, seed=9)
        post = posterior.marginal_posterior(parametric_spec, data, FLAT)
        q = post.limit().density(post.h_nodes)
        p = post.density_nodes()
        assert np.max(np.abs(p - q)) < 1e-6 * np.max(q)


class TestGrid:
    def test_boundary_node_and_support(self, parametric_spec):
        data = models.sample(parametric_spec, 0.0, None, 200, seed=1)
        post = posterior.marginal_posterior(parametric_spec, data, FLAT)
        assert post.h_nodes[-1] == pytest.approx(post.delta_n, abs=1e-14)
        assert post.density_nodes()[-1] > 0.0
        # grid refinement near the boundary
        gap = np.diff(post.h_nodes)[-1]
        assert gap <= 1.0 / (10.0 * data.n * post.gamma_hat)

    def test_scale_orientation_grid(self, scale_spec):
        data = models.sample(scale_spec, 2.0, None, 100, seed=5)
        post = posterior.marginal_posterior(
            scale_spec, data, ThetaPrior.uniform(0.5, 4.0),
            [scale_spec.eta0])
        assert post.h_nodes[0] == pytest.approx(post.delta_n, abs=1e-12)
        assert np.diff(post.h_nodes)[0] <= 1.0 / (10.0 * data.n * post.gamma_hat)

    def test_degenerate_grid_rejected(self, parametric_spec):
        with pytest.raises(ValueError):
            GridConfig(nodes=8)

    def test_normalization_exact_over_nodes(self, parametric_spec):
        data = models.sample(parametric_spec, 0.0, None, 100, seed=8)
        post = posterior.marginal_posterior(parametric_spec, data, GAUSS)
        assert np.trapezoid(post.density_nodes(), post.h_nodes) == pytest.approx(1.0, abs=1e-12)

    def test_prior_must_cover_grid(self, parametric_spec):
        data = models.sample(parametric_spec, 0.0, None, 100, seed=8)
        with pytest.raises(ValueError):
            posterior.marginal_posterior(parametric_spec, data,
                                         ThetaPrior.uniform(5.0, 6.0))


class TestIntegratedLogLik:
    def test_single_draw_reduces_to_linear(self, shift_spec):
        data = models.sample(shift_spec, 0.0, None, 100, seed=2)
        q = models.lae_quantities(shift_spec, data)
        for h in (-2.0, -0.5, 0.0, q.delta_n):
            got = posterior.integrated_log_lik(shift_spec, h, [shift_spec.eta0], data)
            assert got == pytest.approx(h * 1.0, abs=1e-7)

    def test_beyond_boundary_is_minus_inf(self, shift_spec, scale_spec):
        data = models.sample(shift_spec, 0.0, None, 100, seed=2)
        q = models.lae_quantities(shift_spec, data)
        assert posterior.integrated_log_lik(shift_spec, q.delta_n + 1.0,
                                            [shift_spec.eta0], data) == -np.inf
        d2 = models.sample(scale_spec, 2.0, None, 100, seed=2)
        q2 = models.lae_quantities(scale_spec, d2)
        assert posterior.integrated_log_lik(scale_spec, q2.delta_n - 1.0,
                                            [scale_spec.eta0], d2) == -np.inf

    def test_requires_nonempty_draws(self, shift_spec):
        data = models.sample(shift_spec, 0.0, None, 50, seed=2)
        with pytest.raises(ValueError):
            posterior.integrated_log_lik(shift_spec, 0.0, [], data)

    def test_matches_extended_precision_oracle(self, shift_spec, shift_prior_draws):
        data = models.sample(shift_spec, 0.0, None, 40, seed=6)
        for h in (-1.5, -0.2):
            got = posterior.integrated_log_lik(shift_spec, h, shift_prior_draws, data)
            vals = np.array([
                models.loglik_local(shift_spec, h, eta, data)
                for eta in shift_prior_draws
            ], dtype=np.longdouble)
            oracle = float(np.log(np.mean(np.exp(vals))))
            assert got == pytest.approx(oracle, rel=1e-6, abs=1e-9)

    def test_grid_path_agrees_with_pointwise(self, shift_spec, shift_prior_draws):
        data = models.sample(shift_spec, 0.0, None, 100, seed=14)
        q = models.lae_quantities(shift_spec, data)
        hs = np.array([-4.0, -1.0, 0.0, q.delta_n])
        grid_vals = posterior.integrated_loglik_grid(shift_spec, data, hs, shift_prior_draws)
        for h, gv in zip(hs, grid_vals):
            exact = posterior.integrated_log_lik(shift_spec, h, shift_prior_draws, data)
            assert gv == pytest.approx(exact, abs=2e-5)


class TestTotalVariation:
    def test_limit_against_itself_discretized(self):
        limit = ExpLimit(0.8, 1.3, "negative")
        nodes = posterior.boundary_grid(0.8, 1.3, 100, GridConfig(), "negative")
        grid = limit_as_grid(limit, nodes)
        assert posterior.tv_to_limit(grid, limit) <= 1e-9

    def test_rate_mismatch_frozen_value(self):
        # closed form for NExp(D, g) vs NExp(D, 2g): crossing at ln2/g, TV = 1/4
        limit1 = ExpLimit(0.5, 1.0, "negative")
        limit2 = ExpLimit(0.5, 2.0, "negative")
        nodes = posterior.boundary_grid(0.5, 2.0, 10_000, GridConfig(nodes=4096), "negative")
        grid = limit_as_grid(limit1, nodes)
        assert posterior.tv_to_limit(grid, limit2) == pytest.approx(0.25, abs=1e-4)

    def test_mismatched_location_rejected(self, parametric_spec):
        data = models.sample(parametric_spec, 0.0, None, 100, seed=4)
        post = posterior.marginal_posterior(parametric_spec, data, FLAT)
        with pytest.raises(ValueError):
            posterior.tv_to_limit(post, ExpLimit(post.delta_n + 0.5, post.gamma_hat))
        with pytest.raises(ValueError):
            posterior.tv_to_limit(post, ExpLimit(post.delta_n, post.gamma_hat, "positive"))

    def test_prior_scale_invariance(self, parametric_spec):
        data = models.sample(parametric_spec, 0.0, None, 100, seed=4)
        post = posterior.marginal_posterior(parametric_spec, data, FLAT)
        shifted = PosteriorGrid(
            h_nodes=post.h_nodes, log_unnorm=post.log_unnorm + 7.3,
            log_norm_const=post.log_norm_const + 7.3,
            delta_n=post.delta_n, gamma_hat=post.gamma_hat,
            orientation=post.orientation, theta0=post.theta0, n=post.n,
        )
        assert np.max(np.abs(shifted.density_nodes() - post.density_nodes())) < 1e-12
        assert posterior.tv_to_limit(shifted, post.limit()) == pytest.approx(
            posterior.tv_to_limit(post, post.limit()), abs=1e-12)

    def test_triangle_inequality_on_grids(self):
        rng = np.random.default_rng(0)
        nodes = np.linspace(-10.0, 0.0, 512)
        def random_grid():
            lu = -np.abs(rng.normal(0, 1)) * (nodes - nodes[-1]) ** 2 + rng.normal() * nodes
            from laebvm._piecewise import trapezoid_log_norm
            return PosteriorGrid(nodes, lu, trapezoid_log_norm(lu, nodes),
                                 0.0, 1.0, "negative", 0.0, 100)
        for _ in range(25):
            a, b, c = random_grid(), random_grid(), random_grid()
            ab = posterior.tv_between_grids(a, b)
            bc = posterior.tv_between_grids(b, c)
            ac = posterior.tv_between_grids(a, c)
            assert ac <= ab + bc + 1e-8

    def test_symmetry(self):
        rng = np.random.default_rng(3)
        nodes = np.linspace(-10.0, 0.0, 256)
        lu1 = nodes * 1.0
        lu2 = nodes * 2.0
        from laebvm._piecewise import trapezoid_log_norm
        g1 = PosteriorGrid(nodes, lu1, trapezoid_log_norm(lu1, nodes), 0.0, 1.0, "negative", 0.0, 10)
        g2 = PosteriorGrid(nodes, lu2, trapezoid_log_norm(lu2, nodes), 0.0, 1.0, "negative", 0.0, 10)
        assert posterior.tv_between_grids(g1, g2) == pytest.approx(
            posterior.tv_between_grids(g2, g1), abs=1e-15)


class TestSemiparametricPosterior:
    def test_mean_stable_under_grid_refinement(self, shift_spec, shift_prior_draws):
        data = models.sample(shift_spec, 0.0, None, 50, seed=21)
        post = posterior.marginal_posterior(shift_spec, data, GAUSS, shift_prior_draws)
        post10 = posterior.marginal_posterior(
            shift_spec, data, GAUSS, shift_prior_draws, GridConfig(nodes=20480))
        m1, _, _ = posterior.bayes_point_estimates(post)
        m2, _, _ = posterior.bayes_point_estimates(post10)
        assert m1 == pytest.approx(m2, abs=5e-7)

    def test_posterior_mean_jump_near_truth(self, shift_spec, shift_prior_draws):
        data = models.sample(shift_spec, 0.0, None, 400, seed=2)
        gam = posterior.posterior_mean_jump(shift_spec, data, shift_prior_draws)
        assert 0.5 < gam < 1.5

    def test_integrated_lae_trend(self, shift_spec, shift_prior_draws):
        # log s_n(h) - log s_n(0) - h*gamma shrinks with n in the median
        meds = []
        for n in (100, 10_000):
            vals = []
            for r in range(20):
                data = models.sample(shift_spec, 0.0, None, n, seed=3000 + r)
                q = models.lae_quantities(shift_spec, data)
                h = min(1.0, q.delta_n)
                hs = np.array([0.0, h])
                ls = posterior.integrated_loglik_grid(shift_spec, data, hs, shift_prior_draws)
                vals.append(abs(ls[1] - ls[0] - h * q.gamma))
            meds.append(np.median(vals))
        assert meds[1] < meds[0]


class TestExpLimit:
    def test_density_and_mass(self):
        lim = ExpLimit(1.0, 2.0, "negative")
        assert lim.density(1.0) == pytest.approx(2.0)
        assert lim.density(2.0) == 0.0
        assert lim.mass_beyond(-1.0) == pytest.approx(math.exp(-4.0))
        assert lim.mean == pytest.approx(0.5)
        pos = ExpLimit(-1.0, 0.5, "positive")
        assert pos.density(-2.0) == 0.0
        assert pos.mean == pytest.approx(1.0)

    def test_validation(self):
        with pytest.raises(ValueError):
            ExpLimit(0.0, -1.0)
        with pytest.raises(ValueError):
            ExpLimit(0.0, 1.0, "sideways")


class TestCsvExport:
    def test_posterior_grid_csv(self, parametric_spec, tmp_path):
        data = models.sample(parametric_spec, 0.0, None, 50, seed=1)
        post = posterior.marginal_posterior(parametric_spec, data, FLAT)
        path = tmp_path / "post.csv"
        post.to_csv(path)
        lines = path.read_text().splitlines()
        assert lines[0] == "h,density"
        assert len(lines) == post.h_nodes.size + 1
        h, d = map(float, lines[-1].split(","))
        assert h == pytest.approx(post.delta_n)
        assert d > 0
