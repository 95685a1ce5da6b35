"""One PASS/FAIL line per acceptance criterion, at the stated tolerances.

The lines are printed live (visible with ``-s``) and repeated in an
"acceptance criteria" section of the terminal summary.
"""
from __future__ import annotations

import math
import time

import numpy as np
import pytest

from conftest import ACCEPTANCE_LINES
from fisherkit import bayes, coding, geometry, mdl
from fisherkit import frequentist as freq
from fisherkit import montecarlo as mc
from fisherkit.fisher import (fisher_hessian_form, fisher_iid, fisher_information,
                              fisher_score_form, score_mean, statistic_information)
from fisherkit.models import CountVector, bent_coin_map, builtin_model

BERN = builtin_model("bernoulli")
BENT = builtin_model("bent-coin")
M1, M2 = builtin_model("m1"), builtin_model("m2")
J = (0.6, 0.8)


class Checks:
    def __init__(self):
        self.failed: list[str] = []

    def __call__(self, label: str, ok) -> None:
        if not bool(ok):
            self.failed.append(label)

    def near(self, label: str, got: float, want: float, tol: float) -> None:
        if not abs(got - want) <= tol:
            self.failed.append(f"{label}: {got:.6g} vs {want:.6g} (tol {tol:g})")


def report(number: int, title: str, checks: Checks, elapsed: float, budget: float | None):
    if budget is not None and elapsed >= budget:
        checks.failed.append(f"runtime {elapsed:.2f}s >= {budget:g}s")
    status = "PASS" if not checks.failed else "FAIL"
    line = f"[{status}] criterion {number}: {title} ({elapsed:.2f}s)"
    if checks.failed:
        line += " :: " + "; ".join(checks.failed)
    print(line)
    ACCEPTANCE_LINES.append(line)
    assert not checks.failed, line


def test_criterion_1_frequentist():
    c, t0 = Checks(), time.perf_counter()
    pi = freq.prediction_interval(BERN, 0.5, 10)
    c.near("prediction lower", pi.lower, 0.19, 0.01)
    c.near("prediction upper", pi.upper, 0.81, 0.01)
    for counts, lo, hi in [((3, 7), 0.42, 0.98), ((4, 6), 0.29, 0.90)]:
        ci = freq.confidence_interval(BERN, CountVector(counts))
        c.near(f"CI{counts} lower", ci.lower, lo, 0.01)
        c.near(f"CI{counts} upper", ci.upper, hi, 0.01)
    c("design n=25", freq.design_sample_size(BERN, 0.1, 0.68, worst_case=True) == 25)
    c.near("laplace halfwidth", freq.prediction_interval(builtin_model("laplace"), 0.0, 100).halfwidth,
           0.196, 0.001)
    lap = builtin_model("laplace", b=1 / math.sqrt(2))
    cau = builtin_model("cauchy")
    c("laplace MLE n=50", freq.design_sample_size(lap, 0.196, 0.95, theta=0.0) == 50)
    c("cauchy MLE n=200", freq.design_sample_size(cau, 0.196, 0.95, theta=0.0) == 200)
    median_var = {r.estimator: r for r in freq.estimator_comparison(cau)}["median"].asymptotic_variance
    c("cauchy median n=247", freq.design_sample_size(cau, 0.196, 0.95, variance=median_var) == 247)
    report(1, "frequentist golden values", c, time.perf_counter() - t0, 1.0)


def test_criterion_2_bayesian():
    c, t0 = Checks(), time.perf_counter()
    y = CountVector((3, 7))
    m = bent_coin_map()

    def masses(prior_fn, model, mapped):
        prior = prior_fn()
        post = bayes.grid_posterior(prior, model, y)
        if mapped:
            prior, post = bayes.pushforward(prior, m), bayes.pushforward(post, m)
        return (bayes.interval_probability(prior, J).mass,
                bayes.interval_probability(post, J).mass)

    cases = [("uniform-theta", lambda: bayes.uniform_prior((0.0, 1.0), 2048), BERN, False, 0.20, 0.54),
             ("uniform-phi", lambda: bayes.uniform_prior((-math.pi, math.pi), 2048), BENT, True, 0.13, 0.29),
             ("jeffreys", lambda: bayes.jeffreys_prior(BERN, 2048), BERN, False, 0.14, 0.53)]
    for name, fn, model, mapped, want_prior, want_post in cases:
        p, q = masses(fn, model, mapped)
        c.near(f"{name} prior", p, want_prior, 0.01)
        c.near(f"{name} posterior", q, want_post, 0.01)
    jt, jp = bayes.jeffreys_prior(BERN, 2048), bayes.jeffreys_prior(BENT, 2048)
    c.near("V theta", jt.normalizer, math.pi, 1e-6)
    c.near("V phi", jp.normalizer, math.pi, 1e-6)
    c.near("theta quartile", bayes.quantile(jt, 0.25), 0.15, 0.01)
    c.near("phi quartile", bayes.quantile(jp, 0.25), -2.8, 0.05)
    report(2, "Bayesian golden values", c, time.perf_counter() - t0, 5.0)


def test_criterion_3_invariance():
    c, t0 = Checks(), time.perf_counter()
    y = CountVector((3, 7))
    m = bent_coin_map()
    via_theta = bayes.grid_posterior(bayes.jeffreys_prior(BERN, 2048), BERN, y)
    via_phi = bayes.pushforward(bayes.grid_posterior(bayes.jeffreys_prior(BENT, 2048), BENT, y), m)
    gap = float(np.max(np.abs(via_phi.density / via_theta.density - 1.0)))
    c(f"jeffreys node-wise gap {gap:.2e}", gap <= 1e-4)
    ut = bayes.grid_posterior(bayes.uniform_prior((0.0, 1.0), 2048), BERN, y)
    up = bayes.pushforward(bayes.grid_posterior(bayes.uniform_prior((-math.pi, math.pi), 2048), BENT, y), m)
    diff = abs(bayes.interval_probability(ut, J).mass - bayes.interval_probability(up, J).mass)
    c(f"uniform pipelines differ by {diff:.3f}", diff > 0.2)
    report(3, "Jeffreys invariance vs uniform", c, time.perf_counter() - t0, None)


def test_criterion_4_geometry():
    c, t0 = Checks(), time.perf_counter()
    for name, want in [("bernoulli", math.pi), ("m2", math.pi), ("m1", math.sqrt(2) * math.pi),
                       ("categorical-beta", 2 * math.pi)]:
        c.near(f"volume {name}", geometry.model_volume(builtin_model(name)), want, 1e-6)
    theta, d = 0.6 * math.pi, 0.2 * math.pi
    tv = geometry.tangent(BENT, theta, d)
    c.near("tangent x=0", tv.components[0], -0.17, 0.01)
    c.near("tangent x=1", tv.components[1], 0.14, 0.01)
    c.near("tangent length", float(np.linalg.norm(tv.components)), 0.22, 0.01)
    c.near("sqrt I", math.sqrt(fisher_information(BENT, theta).scalar), 0.35, 0.01)
    report(4, "geometry golden values", c, time.perf_counter() - t0, 1.0)


def test_criterion_5_mdl():
    c, t0 = Checks(), time.perf_counter()
    table = [((12, 1, 17), (42, 26), "mpt-only-mixed"), ((14, 10, 6), (34, 34), "tie"),
             ((12, 16, 2), (29, 32), "mpt-individual-word")]
    for counts, (a, b), verdict in table:
        y = CountVector(counts)
        rep = mdl.select([M1, M2], y, "FIA", tie_tolerance=0.5)
        got = [round(v.total) for v in rep.values]
        c(f"FIA {counts} = {got}", abs(got[0] - a) <= 1 and abs(got[1] - b) <= 1)
        c(f"verdict {counts} = {rep.preferred}", rep.preferred == verdict)
    y9 = CountVector((3, 3, 3))
    c.near("GoF M1", mdl.goodness_of_fit(M1, y9), 10.4, 0.05)
    c.near("GoF M2", mdl.goodness_of_fit(M2, y9), 9.9, 0.05)
    nml = mdl.nml_exact(M2, 30)
    Y = mdl.count_vectors(30, 3)
    c("496 vectors", Y.shape[1] == 496)
    total = math.fsum(nml.code(CountVector(tuple(v))) for v in Y.T)
    c.near("NML sum", total, 1.0, 1e-10)
    y30 = CountVector((12, 1, 17))
    c.near("FIA vs DL", mdl.fia(M2, y30).total, mdl.description_length(M2, y30), 1.0)
    report(5, "MDL golden values", c, time.perf_counter() - t0, 10.0)


def test_criterion_6_coding():
    c, t0 = Checks(), time.perf_counter()
    p, q = [0.25, 0.5, 0.25], [0.01, 0.18, 0.81]
    c.near("entropy", coding.entropy(p), 1.5, 1e-12)
    c.near("cross-entropy", coding.cross_entropy(p, q), 2.97, 0.01)
    c("kraft (2,1,2)", coding.kraft_check((2, 1, 2)) == (1.0, True))
    bits = coding.encode_example("MRMLLMMM")
    c(f"fixture {bits}", bits == "01101010000" and len(bits) == 11)
    report(6, "coding golden values", c, time.perf_counter() - t0, None)


def _random_points(rng, count):
    models = [BERN, BENT, M1, M2, builtin_model("binomial", n=7), builtin_model("cauchy"),
              builtin_model("gaussian"), builtin_model("categorical-beta"),
              builtin_model("categorical-gamma")]
    out = []
    while len(out) < count:
        model = models[len(out) % len(models)]
        lo = np.where(np.isfinite(model.lower), model.lower, -3.0)
        hi = np.where(np.isfinite(model.upper), model.upper, 3.0)
        t = rng.uniform(lo + 0.05 * (hi - lo), hi - 0.05 * (hi - lo))
        if model.in_domain(t):
            out.append((model, t))
    return out


def test_criterion_7_properties():
    c, t0 = Checks(), time.perf_counter()
    rng = np.random.default_rng(20241015)

    worst_mean = worst_form = worst_num = 0.0
    for model, t in _random_points(rng, 50):
        i_score = fisher_score_form(model, t).entries
        scale = np.max(np.abs(i_score))
        worst_mean = max(worst_mean, float(np.max(np.abs(score_mean(model, t)))) / math.sqrt(scale))
        worst_form = max(worst_form, float(np.max(np.abs(fisher_hessian_form(model, t).entries - i_score))) / scale)
        worst_num = max(worst_num, float(np.max(np.abs(fisher_score_form(model, t, "numeric").entries - i_score))) / scale)
    c(f"score mean {worst_mean:.1e}", worst_mean <= 1e-5)
    c(f"score vs Hessian form {worst_form:.1e}", worst_form <= 1e-5)
    c(f"numeric vs analytic {worst_num:.1e}", worst_num <= 1e-5)

    for theta in (0.2, 0.5, 0.9):
        for n in (1, 10, 100):
            got = fisher_iid(BERN, theta, n).scalar
            want = n * fisher_information(BERN, theta).scalar
            c(f"I_Xn at {theta},{n}", abs(got - want) <= 1e-12 * want)

    worst_suff = 0.0
    for theta in np.linspace(0.04, 0.96, 20):
        r = statistic_information(BERN, builtin_model("binomial", n=12), theta, 12)
        worst_suff = max(worst_suff, abs(r.statistic_information - r.sample_information) / r.sample_information)
    c(f"binomial sufficiency {worst_suff:.1e}", worst_suff <= 1e-8)

    gibbs = 0
    for _ in range(1000):
        w = int(rng.integers(2, 7))
        p, q = rng.dirichlet(np.ones(w)), rng.dirichlet(np.ones(w))
        gibbs += coding.cross_entropy(p, q) < coding.entropy(p) - 1e-12
    c(f"Gibbs violations {gibbs}", gibbs == 0)

    worst_kl = 0.0
    for model in (M1, M2):
        for y in mdl.count_vectors(9, 3).T:
            proj = geometry.kl_projection(model, y / 9.0)
            est = freq.mle(model, CountVector(tuple(int(v) for v in y)))
            worst_kl = max(worst_kl, abs(float(proj.theta[0]) - float(est[0])))
    c(f"KL projection vs MLE {worst_kl:.1e}", worst_kl <= 1e-8)

    gauss = mc.coverage_experiment(mc.SimConfig(builtin_model("gaussian", sigma=1.0), (0.0,), 10, 100_000))
    c(f"gaussian coverage {gauss.hit_rate:.5f}", abs(gauss.hit_rate - 0.95) <= 3 * gauss.mc_stderr)

    hits = mc.simulate_estimates(mc.SimConfig(BERN, (0.5,), 25, 100_000), halfwidth=0.1)
    exact = mc.exact_hit_rate(25, 0.5, 0.1)
    c(f"bernoulli hit rate {hits.hit_rate:.5f} vs {exact:.5f}", abs(hits.hit_rate - exact) <= 0.005)
    report(7, "property suites", c, time.perf_counter() - t0, 60.0)


def test_criterion_8_large_n():
    c, t0 = Checks(), time.perf_counter()
    Y = mdl.simplex_mesh(100) * 1e4
    f = mdl.classify(M1, M2, Y, "FIA")
    b = mdl.classify(M1, M2, Y, "BIC")
    disagree = int(np.count_nonzero(f != b))
    c(f"{disagree} disagreements over {Y.shape[1]} mesh points", disagree == 0)
    report(8, "FIA and BIC agree at n=1e4", c, time.perf_counter() - t0, None)
