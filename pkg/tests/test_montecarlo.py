from __future__ import annotations

import math

import numpy as np
import pytest
from scipy import integrate, special, stats

from fisherkit import montecarlo as mc
from fisherkit.models import builtin_model

BERN = builtin_model("bernoulli")


def median_variance_laplace(n: int, b: float = 1.0) -> float:
    """Exact variance of the sample median of n = 2m + 1 Laplace(0, b) draws."""
    m = (n - 1) // 2
    logc = special.gammaln(n + 1) - 2 * special.gammaln(m + 1)

    def integrand(x):
        logtail = math.log(0.5) - x / b  # log(1 - F(x)) for x >= 0
        return x * x * math.exp(logc + m * math.log1p(-math.exp(logtail)) + (m + 1) * logtail) / b

    val, _ = integrate.quad(integrand, 0, math.inf, limit=200)
    return 2.0 * val


class TestGenerator:
    def test_reproducible(self):
        cfg = mc.SimConfig(BERN, (0.5,), 25, 500, seed=3)
        a = mc.simulate_estimates(cfg).estimates
        np.testing.assert_array_equal(a, mc.simulate_estimates(cfg).estimates)

    def test_replicates_do_not_depend_on_k(self):
        short = mc.simulate_estimates(mc.SimConfig(BERN, (0.3,), 20, 100, 9)).estimates
        long = mc.simulate_estimates(mc.SimConfig(BERN, (0.3,), 20, 20000, 9)).estimates
        np.testing.assert_array_equal(short, long[:100])

    def test_threads_match_serial(self, monkeypatch):
        cfg = mc.SimConfig(builtin_model("cauchy"), (0.0,), 15, 20000, 1)
        serial = mc.simulate_estimates(cfg, "median").estimates
        monkeypatch.setenv("FISHERKIT_THREADS", "4")
        np.testing.assert_array_equal(serial, mc.simulate_estimates(cfg, "median").estimates)

    def test_uniform_range(self):
        u = mc.uniforms(mc.replicate_seeds(0, 0, 100), 1000)
        assert u.min() > 0 and u.max() < 1
        assert stats.kstest(u.ravel(), "uniform").pvalue > 1e-3

    def test_categorical_frequencies(self):
        m = builtin_model("m1")
        cfg = mc.SimConfig(m, (0.4,), 1000, 1000, 5)
        draws = mc._draw_block(cfg, 0, 1000).ravel()
        freq = np.bincount(draws, minlength=3) / draws.size
        p = m.probs(np.array([0.4]))
        assert np.all(np.abs(freq - p) <= 4 * np.sqrt(p * (1 - p) / draws.size))


class TestConfig:
    def test_rejects_bad(self):
        with pytest.raises(ValueError):
            mc.SimConfig(BERN, (0.5,), 0, 10)
        with pytest.raises(ValueError):
            mc.SimConfig(BERN, (1.5,), 10, 10)

    def test_degenerate_theta(self):
        s = mc.simulate_estimates(mc.SimConfig(BERN, (1.0,), 25, 200), halfwidth=0.0)
        assert np.all(s.estimates == 1.0) and s.hit_rate == 1.0

    def test_json(self):
        meta = mc.SimConfig(BERN, (0.5,), 5, 5).to_json()
        assert meta["generator"]["name"] == "splitmix64-counter"


class TestBernoulli:
    def test_hit_rate_matches_exact(self):
        s = mc.simulate_estimates(mc.SimConfig(BERN, (0.5,), 25, 100_000), halfwidth=0.1)
        assert abs(s.hit_rate - mc.exact_hit_rate(25, 0.5, 0.1)) < 0.005

    @pytest.mark.parametrize("theta,n", [(0.5, 25), (0.3, 50), (0.1, 100)])
    def test_wald_coverage_matches_exact(self, theta, n):
        s = mc.coverage_experiment(mc.SimConfig(BERN, (theta,), n, 50_000, 11))
        exact = mc.exact_wald_coverage(n, theta)
        assert abs(s.hit_rate - exact) <= 3 * math.sqrt(exact * (1 - exact) / 50_000)

    def test_boundary_counted(self):
        s = mc.coverage_experiment(mc.SimConfig(BERN, (0.02,), 10, 2000))
        assert s.boundary > 0
        assert s.hit_rate * 2000 + s.boundary <= 2000

    def test_variance(self):
        v = mc.variance_check(mc.SimConfig(BERN, (0.3,), 100, 50_000, 2))
        assert v.ratio == pytest.approx(1.0, abs=0.03)


class TestContinuous:
    def test_gaussian_coverage(self):
        s = mc.coverage_experiment(mc.SimConfig(builtin_model("gaussian", sigma=1.0), (0.0,), 10, 100_000))
        assert abs(s.hit_rate - 0.95) <= 3 * s.mc_stderr

    def test_laplace_median_exact(self):
        n = 101
        v = mc.variance_check(mc.SimConfig(builtin_model("laplace"), (0.0,), n, 40_000), "median")
        assert abs(v.mc_variance - median_variance_laplace(n)) <= 4 * v.mc_stderr

    def test_laplace_median_approaches_asymptote(self):
        ratios = [median_variance_laplace(n) * n for n in (11, 101, 1001, 10001)]
        assert all(a > b for a, b in zip(ratios, ratios[1:]))
        assert ratios[-1] == pytest.approx(1.0, abs=0.03)

    def test_laplace_mean_twice_median(self):
        v = mc.variance_check(mc.SimConfig(builtin_model("laplace"), (0.0,), 200, 20_000), "mean")
        assert v.ratio == pytest.approx(1.0, abs=0.05)

    def test_cauchy_median(self):
        v = mc.variance_check(mc.SimConfig(builtin_model("cauchy"), (0.0,), 101, 20_000), "median")
        assert v.ratio == pytest.approx(1.0, abs=0.05)

    def test_cauchy_mle(self):
        v = mc.variance_check(mc.SimConfig(builtin_model("cauchy"), (0.0,), 101, 20_000), "mle")
        assert v.ratio == pytest.approx(1.0, abs=0.05)

    def test_cauchy_mean_does_not_concentrate(self):
        def iqr(n):
            e = mc.simulate_estimates(mc.SimConfig(builtin_model("cauchy"), (0.0,), n, 4000), "mean").estimates
            q1, q3 = np.percentile(e, [25, 75])
            return q3 - q1
        assert iqr(1000) > 0.8 * iqr(10)

    def test_cauchy_mean_has_no_variance(self):
        with pytest.raises(ValueError):
            mc.asymptotic_variance(builtin_model("cauchy"), 0.0, 10, "mean")
