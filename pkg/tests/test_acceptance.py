"""Acceptance criteria, one test per criterion, each printing a verdict line.

Run with ``pytest -s tests/test_acceptance.py`` to see the per-criterion
lines.  Tolerances and sizes are fixed here, not configurable.
"""

import math
import time

import numpy as np
import pytest
from scipy import stats

from laebvm import ScoreFunction, esscher_scale, esscher_shift
from laebvm import harness, metrics, models, posterior
from laebvm.harness import derive_seed
from laebvm.nuisance import esscher_scale_many, esscher_shift_many, log_lipschitz_check
from laebvm.priors import ScorePriorSampler

MASTER_SEED = 20260801


def report(criterion, passed, budget_s, elapsed_s, detail):
    verdict = "PASS" if passed else "FAIL"
    print(f"\n[criterion {criterion}] {verdict} in {elapsed_s:.1f}s "
          f"(budget {budget_s}s): {detail}")
    assert passed, f"criterion {criterion}: {detail}"
    assert elapsed_s < budget_s, f"criterion {criterion} exceeded budget: {elapsed_s:.1f}s"


def test_criterion_1_risk_table(tmp_path):
    started = time.perf_counter()
    res = harness.run({
        "experiment": "risk",
        "model": {"kind": "parametric_shift_exp", "theta0": 0.0, "lambda": 1.0},
        "n_list": [50], "replicates": 100_000,
        "master_seed": MASTER_SEED, "output_dir": str(tmp_path / "risk"),
    }, threads=1)
    elapsed = time.perf_counter() - started
    mle = res.metric("sq_mle", 50, "mean")
    deb = res.metric("sq_debiased", 50, "mean")
    ok = abs(mle - 2.0) <= 0.05 and abs(deb - 1.0) <= 0.03
    report(1, ok, 10, elapsed,
           f"E[(n(mle-theta0))^2]={mle:.4f} (want 2.00+-0.05), "
           f"E[(n(debiased-theta0))^2]={deb:.4f} (want 1.00+-0.03)")


def test_criterion_2_exact_pivotality():
    started = time.perf_counter()
    spec = models.ModelSpec(kind=models.PARAMETRIC, theta0=0.0, lam=1.0)
    reps = 10_000
    crit = 1.63 / math.sqrt(reps)
    stats_by_n = {}
    for n in (10, 10_000):
        gaps = np.empty(reps)
        for r in range(reps):
            data = models.sample(spec, 0.0, None, n, derive_seed(MASTER_SEED, "pivot", n, r))
            gaps[r] = n * data.min
        stats_by_n[n] = stats.kstest(gaps, "expon").statistic
    elapsed = time.perf_counter() - started
    ok = all(d < crit for d in stats_by_n.values())
    report(2, ok, 5, elapsed,
           f"KS(n=10)={stats_by_n[10]:.4f}, KS(n=10000)={stats_by_n[10_000]:.4f}, "
           f"critical={crit:.4f}")


def test_criterion_3_parametric_bvm(tmp_path):
    started = time.perf_counter()
    res = harness.run({
        "experiment": "bvm_parametric",
        "model": {"kind": "parametric_shift_exp", "theta0": 0.0, "lambda": 1.0},
        "theta_prior": {"kind": "gaussian", "mean": 0.0, "sd": 1.0},
        "n_list": [25, 100, 400], "replicates": 200,
        "master_seed": MASTER_SEED, "output_dir": str(tmp_path / "bvmp"),
    })
    elapsed = time.perf_counter() - started
    med = [res.metric("tv", n, "median") for n in (25, 100, 400)]
    ok = med[0] > med[1] > med[2] and med[2] < 0.05
    report(3, ok, 120, elapsed,
           f"median TV = {med[0]:.2e} > {med[1]:.2e} > {med[2]:.2e}, last < 0.05")


def test_criterion_4_conjugate_exactness(tmp_path):
    started = time.perf_counter()
    res = harness.run({
        "experiment": "bvm_parametric",
        "model": {"kind": "parametric_shift_exp", "theta0": 0.0, "lambda": 1.0},
        "theta_prior": {"kind": "uniform", "a": -60.0, "b": 60.0},
        "n_list": [100], "replicates": 50,
        "master_seed": MASTER_SEED, "output_dir": str(tmp_path / "conj"),
    })
    elapsed = time.perf_counter() - started
    worst = max(r["tv"] for r in res.rows)
    report(4, worst <= 1e-6, 10, elapsed,
           f"max TV over 50 replicates = {worst:.2e} (want <= 1e-6)")


def test_criterion_5_semiparametric_shift_bvm(tmp_path):
    started = time.perf_counter()
    res = harness.run({
        "experiment": "bvm_shift",
        "model": {"kind": "semiparam_shift", "theta0": 0.0, "alpha": 1.0,
                  "score": {"kind": "constant", "level": 0.0}},
        "score_prior": {"bound": 0.5, "grid_size": 257},
        "n_list": [50, 200], "replicates": 100, "nuisance_draws": 500,
        "master_seed": MASTER_SEED, "output_dir": str(tmp_path / "bvms"),
    })
    elapsed = time.perf_counter() - started
    med50 = res.metric("tv", 50, "median")
    med200 = res.metric("tv", 200, "median")
    report(5, med200 < med50, 1200, elapsed,
           f"median TV: n=50 {med50:.4f} -> n=200 {med200:.4f} (want decrease)")


def test_criterion_6_semiparametric_scale_bvm(tmp_path):
    started = time.perf_counter()
    # the score prior must cover the model's full ball (radius S = 1), as the
    # posterior-limit theorem's support hypothesis requires
    res = harness.run({
        "experiment": "bvm_scale",
        "model": {"kind": "semiparam_scale", "theta0": 2.0, "s": 1.0,
                  "score": {"kind": "constant", "level": 0.0}},
        "score_prior": {"bound": 1.0, "grid_size": 257},
        "n_list": [50, 200], "replicates": 100, "nuisance_draws": 500,
        "master_seed": MASTER_SEED, "output_dir": str(tmp_path / "bvmc"),
    })
    elapsed = time.perf_counter() - started
    med50 = res.metric("tv", 50, "median")
    med200 = res.metric("tv", 200, "median")
    report(6, med200 < med50, 1200, elapsed,
           f"median TV: n=50 {med50:.4f} -> n=200 {med200:.4f} (want decrease)")


def test_criterion_7_lae_remainder(tmp_path):
    started = time.perf_counter()
    res = harness.run({
        "experiment": "lae_check",
        "model": {"kind": "semiparam_shift", "theta0": 0.0, "alpha": 1.0,
                  "score": {"kind": "sine", "amplitude": 0.3, "periods": 1.5}},
        "n_list": [100, 1000, 10_000], "replicates": 200,
        "master_seed": MASTER_SEED, "output_dir": str(tmp_path / "lae"),
    })
    elapsed = time.perf_counter() - started
    med = {}
    for n in (100, 1000, 10_000):
        rows = [r for r in res.rows if r["n"] == n]
        med[n] = (np.median([abs(r["r_neg"]) for r in rows]),
                  np.median([abs(r["r_pos"]) for r in rows]))
    ok = all(med[100][k] > med[1000][k] > med[10_000][k] for k in (0, 1))
    report(7, ok, 120, elapsed,
           "median |R_n| at h=-1: " + " > ".join(f"{med[n][0]:.4f}" for n in (100, 1000, 10_000))
           + "; at h=+1^D: " + " > ".join(f"{med[n][1]:.4f}" for n in (100, 1000, 10_000)))


def test_criterion_8_hellinger_rate(tmp_path):
    started = time.perf_counter()
    res = harness.run({
        "experiment": "hellinger_rate",
        "model": {"kind": "semiparam_shift", "theta0": 0.0, "alpha": 1.0,
                  "score": {"kind": "constant", "level": 0.0}},
        "score_prior": {"bound": 0.5, "grid_size": 257},
        "n_list": [100, 1000, 10_000], "replicates": 100,
        "params": {"h_values": [1.0]},
        "master_seed": MASTER_SEED, "output_dir": str(tmp_path / "hell"),
    })
    growth = res.report["metrics"]["growth"]
    # parametric closed-form anchor at n = 10^4
    spec = models.ModelSpec(kind=models.PARAMETRIC, theta0=0.0, lam=1.0)
    anchor = metrics.hellinger_rate_check(spec, [], 1.0, [10_000]).max_per_n[0]
    expect = math.sqrt(10_000 * (1.0 - math.exp(-1.0 / 20_000.0)))
    elapsed = time.perf_counter() - started
    ok = growth < 0.10 and abs(anchor - expect) < 1e-3
    report(8, ok, 300, elapsed,
           f"max sqrt(n)H growth over n = {growth:+.2%} (want < +10%); "
           f"parametric anchor |{anchor:.6f} - {expect:.6f}| < 1e-3")


def test_criterion_9_property_suites():
    started = time.perf_counter()
    failures = []

    # Esscher properties over 1000 random scores (500 shift + 500 scale)
    shift_sampler = ScorePriorSampler(bound=0.5, variant="compactified",
                                      master_seed=derive_seed(MASTER_SEED, "p9", "shift"))
    shift_etas = esscher_shift_many(shift_sampler.sample_scores(0, 500), 1.0)
    scale_sampler = ScorePriorSampler(bound=1.0, variant="unit_interval",
                                      master_seed=derive_seed(MASTER_SEED, "p9", "scale"))
    scale_etas = esscher_scale_many(scale_sampler.sample_scores(0, 500), 1.0)

    from laebvm._piecewise import gauss_panel_integrals
    u = shift_etas[0].score.grid
    knots = np.tan(0.5 * np.pi * u[u < 1.0])
    x_shift = np.sort(np.random.default_rng(0).uniform(0, 15, 200))
    x_scale = np.linspace(0.0, 1.0, 201)
    for eta in shift_etas:
        kt = np.append(knots[knots < eta._t_max], eta._t_max)
        breaks = np.concatenate([[0.0]] + [np.linspace(a, b, 5)[1:] for a, b in zip(kt[:-1], kt[1:])])
        fn = lambda t: np.exp(eta.log_density(t.ravel())).reshape(t.shape)
        mass = float(np.sum(gauss_panel_integrals(fn, breaks)))
        if abs(mass - 1.0) > 1e-8:
            failures.append(f"shift normalization off by {mass - 1.0:.2e}")
        vals = eta.log_density(x_shift)
        if not np.all(np.diff(vals) < 0):
            failures.append("shift density not decreasing")
        bound = math.log(eta.jump_at_zero) - (eta.alpha - eta.score.bound) * x_shift
        if not np.all(vals <= bound + 1e-9):
            failures.append("shift tail bound violated")
    for eta in scale_etas:
        mass = float(np.sum(gauss_panel_integrals(
            lambda x: np.exp(eta.log_density(x.ravel())).reshape(x.shape),
            np.linspace(0, 1, 513))))
        if abs(mass - 1.0) > 1e-8:
            failures.append(f"scale normalization off by {mass - 1.0:.2e}")
        vals = eta.log_density(x_scale)
        if not (np.all(np.diff(vals) >= -1e-12)
                and np.all(vals >= -2 * eta.s - 1e-9) and np.all(vals <= 2 * eta.s + 1e-9)):
            failures.append("scale monotonicity/boundedness violated")

    # log-Lipschitz over 1000 random (eta, theta, x)
    rng = np.random.default_rng(derive_seed(MASTER_SEED, "p9", "lip"))
    for k in range(500):
        eta = shift_etas[rng.integers(500)]
        theta0, theta = rng.normal(), rng.normal()
        x = max(theta0, theta) + rng.exponential()
        if not log_lipschitz_check(eta, theta0, theta, x):
            failures.append(f"shift log-Lipschitz violated at case {k}")
    for k in range(500):
        eta = scale_etas[rng.integers(500)]
        theta0 = rng.uniform(1.0, 3.0)
        theta = theta0 + rng.uniform(-0.49, 0.49) * theta0
        x = rng.uniform(0.0, min(theta0, theta))
        if not log_lipschitz_check(eta, theta0, theta, x):
            failures.append(f"scale log-Lipschitz violated at case {k}")

    # head-mass sandwich over 1000 random (eta, eps)
    for k in range(500):
        eta = shift_etas[rng.integers(500)]
        if not metrics.int_bounds_check(eta, float(rng.uniform(0.01, 3.0))):
            failures.append(f"shift head-mass sandwich violated at case {k}")
    for k in range(500):
        eta = scale_etas[rng.integers(500)]
        if not metrics.int_bounds_check(eta, float(rng.uniform(0.01, 1.0))):
            failures.append(f"scale head-mass sandwich violated at case {k}")

    # prior ball membership over 1e5 paths
    ball_sampler = ScorePriorSampler(bound=0.5, variant="compactified",
                                     master_seed=derive_seed(MASTER_SEED, "p9", "ball"))
    bad = 0
    for i in range(100_000):
        if np.max(np.abs(ball_sampler.sample_score(i).values)) > 0.5:
            bad += 1
    if bad:
        failures.append(f"{bad} of 100000 prior paths left the ball")

    # Hellinger metric axioms over 500 random triples
    pool = shift_etas[:40]
    cache = {}
    def dist(i, j):
        key = (min(i, j), max(i, j))
        if key not in cache:
            cache[key] = metrics.d_H_nuisance(pool[key[0]], pool[key[1]], 0.0, "shift")
        return cache[key]
    for k in range(500):
        i, j, l = rng.choice(len(pool), size=3, replace=False)
        dij, djl, dil = dist(i, j), dist(j, l), dist(i, l)
        if abs(dij - dist(j, i)) > 1e-12:
            failures.append("hellinger asymmetry")
        if dil > dij + djl + 1e-8:
            failures.append(f"triangle violated on triple {k}")

    elapsed = time.perf_counter() - started
    detail = "all property suites clean" if not failures else "; ".join(failures[:5])
    report(9, not failures, 300, elapsed, detail)
