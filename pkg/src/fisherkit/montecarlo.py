"""Seeded simulation of estimator sampling distributions and interval coverage.

Random numbers come from SplitMix64 used as a counter-based generator:
replicate i gets the seed ``mix(seed + G*(i+1))`` and its j-th uniform is
``mix(seed_i + G*(j+1))`` mapped to (0, 1), where ``G`` is the 64-bit golden
ratio increment.  Replicates therefore do not depend on how many others are
drawn or on the order in which they are computed.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy import stats

from .fisher import fisher_information
from .frequentist import estimator_comparison, mle, z_multiplier
from .mdl import worker_count
from .models import ParametricModel

GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
GENERATOR = {
    "name": "splitmix64-counter",
    "replicate_seed": "mix(seed + 0x9E3779B97F4A7C15 * (i + 1))",
    "draw": "mix(replicate_seed + 0x9E3779B97F4A7C15 * (j + 1))",
    "uniform": "((x >> 11) + 0.5) * 2**-53",
}
CHUNK = 8192
ESTIMATORS = ("mle", "mean", "median")


def mix64(z: np.ndarray) -> np.ndarray:
    """SplitMix64 finalizer on a uint64 array (wrapping arithmetic)."""
    z = np.asarray(z, dtype=np.uint64)
    with np.errstate(over="ignore"):
        z = (z ^ (z >> np.uint64(30))) * _M1
        z = (z ^ (z >> np.uint64(27))) * _M2
    return z ^ (z >> np.uint64(31))


def replicate_seeds(seed: int, start: int, stop: int) -> np.ndarray:
    i = np.arange(start + 1, stop + 1, dtype=np.uint64)
    with np.errstate(over="ignore"):
        return mix64(np.uint64(seed % 2**64) + GOLDEN * i)


def uniforms(seeds: np.ndarray, count: int) -> np.ndarray:
    """count uniforms in (0, 1) per replicate seed, shape (len(seeds), count)."""
    j = np.arange(1, count + 1, dtype=np.uint64)
    with np.errstate(over="ignore"):
        x = mix64(seeds[:, None] + GOLDEN * j[None, :])
    return ((x >> np.uint64(11)).astype(np.float64) + 0.5) * 2.0**-53


@dataclass(frozen=True)
class SimConfig:
    model: ParametricModel
    theta_true: tuple
    n: int
    k: int
    seed: int = 0

    def __post_init__(self):
        t = self.model.as_theta(self.theta_true)
        if self.k < 1 or self.n < 1:
            raise ValueError("n and k must be positive")
        if not self.model.is_finite:
            self.model.check(t)
        else:
            p = self.model.probs(t, closed=True)
            if np.any(p < 0) or abs(p.sum() - 1) > 1e-9:
                raise ValueError("theta_true does not give a valid pmf")
        object.__setattr__(self, "theta_true", tuple(float(v) for v in t))

    @property
    def theta(self) -> np.ndarray:
        return np.array(self.theta_true)

    def to_json(self) -> dict:
        return {"model": self.model.spec, "theta_true": list(self.theta_true), "n": self.n,
                "k": self.k, "seed": self.seed, "generator": GENERATOR}


@dataclass(frozen=True)
class SimSummary:
    estimates: np.ndarray
    hit_rate: Optional[float] = None
    mc_stderr: Optional[float] = None
    boundary: int = 0
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.hit_rate is not None and not 0.0 <= self.hit_rate <= 1.0:
            raise ValueError("hit rate must lie in [0, 1]")

    @property
    def mean(self) -> float:
        return math.fsum(self.estimates) / self.estimates.size

    @property
    def variance(self) -> float:
        m = self.mean
        return math.fsum((self.estimates - m) ** 2) / (self.estimates.size - 1)

    def to_json(self) -> dict:
        return {"k": int(self.estimates.size), "mean": self.mean, "variance": self.variance,
                "hit_rate": self.hit_rate, "mc_stderr": self.mc_stderr,
                "boundary": self.boundary, **self.meta}


# ---------------------------------------------------------------------------
# sampling and estimation
# ---------------------------------------------------------------------------


def _draw_block(config: SimConfig, start: int, stop: int) -> np.ndarray:
    """Samples for replicates [start, stop): category indices or reals, shape (m, n)."""
    u = uniforms(replicate_seeds(config.seed, start, stop), config.n)
    model, t = config.model, config.theta
    if model.is_finite:
        cum = np.cumsum(model.probs(t, closed=True))
        cum[-1] = 1.0
        return np.searchsorted(cum, u, side="right")
    return np.asarray(model.ppf(u, t), dtype=float)


def _estimate_block(config: SimConfig, sample: np.ndarray, estimator: str) -> np.ndarray:
    model = config.model
    if model.is_finite:
        w = model.outcomes.size
        counts = np.stack([(sample == c).sum(axis=1) for c in range(w)]).astype(float)
        if estimator != "mle":
            values = np.asarray(model.outcomes.labels, dtype=float)
            if estimator == "mean":
                return (values[sample]).mean(axis=1)
            return np.median(values[sample], axis=1)
        with np.errstate(invalid="ignore", divide="ignore"):
            return np.asarray(model.mle(counts), dtype=float)[0]
    if estimator == "mean":
        return sample.mean(axis=1)
    if estimator == "median":
        return np.median(sample, axis=1)
    if model.name == "gaussian" and model.dim == 1:
        return sample.mean(axis=1)
    if model.name == "laplace":
        return np.median(sample, axis=1)
    if model.name == "cauchy":
        return _cauchy_mle(model, sample)
    return np.array([mle(model, row)[0] for row in sample])


def _cauchy_mle(model: ParametricModel, sample: np.ndarray, iters: int = 50) -> np.ndarray:
    # Newton from the median; rows that do not settle on a maximum use the scalar solver
    t = np.median(sample, axis=1)
    for _ in range(iters):
        r = sample - t[:, None]
        q = 1.0 + r * r
        g = (2.0 * r / q).sum(axis=1)
        h = (2.0 * (r * r - 1.0) / (q * q)).sum(axis=1)
        step = np.where(h < 0, -g / np.where(h < 0, h, -1.0), 0.0)
        t = t + step
        if np.all(np.abs(step) < 1e-13 * (1.0 + np.abs(t))):
            break
    r = sample - t[:, None]
    q = 1.0 + r * r
    g = (2.0 * r / q).sum(axis=1)
    h = (2.0 * (r * r - 1.0) / (q * q)).sum(axis=1)
    bad = ~((np.abs(g) < 1e-8 * sample.shape[1]) & (h < 0))
    for i in np.nonzero(bad)[0]:
        t[i] = mle(model, sample[i])[0]
    return t


def _run(config: SimConfig, estimator: str) -> np.ndarray:
    if estimator not in ESTIMATORS:
        raise ValueError(f"estimator must be one of {ESTIMATORS}")
    if config.model.dim != 1:
        raise ValueError("simulation covers 1-d models")
    blocks = [(s, min(s + CHUNK, config.k)) for s in range(0, config.k, CHUNK)]

    def work(b):
        return _estimate_block(config, _draw_block(config, *b), estimator)

    workers = worker_count()
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(work, blocks))
    else:
        parts = [work(b) for b in blocks]
    return np.concatenate(parts)


def _rate(hits: np.ndarray) -> tuple[float, float]:
    r = float(np.count_nonzero(hits)) / hits.size
    return r, math.sqrt(r * (1.0 - r) / hits.size)


def simulate_estimates(config: SimConfig, estimator: str = "mle",
                       halfwidth: Optional[float] = None) -> SimSummary:
    """k replicate estimates; with ``halfwidth`` the hit rate of |est - theta| <= halfwidth."""
    est = _run(config, estimator)
    rate = se = None
    if halfwidth is not None:
        rate, se = _rate(np.abs(est - config.theta[0]) <= halfwidth + 1e-12)
    return SimSummary(est, rate, se, 0, {"estimator": estimator, "config": config.to_json()})


def _unit_information(model: ParametricModel, theta: np.ndarray) -> np.ndarray:
    try:
        out = np.asarray(model.fisher(theta[None, :]), dtype=float)
        if out.size == theta.size:
            return out.reshape(theta.shape)
        if out.size == 1:
            return np.full(theta.shape, float(out.ravel()[0]))
    except (TypeError, ValueError, IndexError):
        pass
    return np.array([fisher_information(model, v).scalar for v in theta])


def coverage_experiment(config: SimConfig, level: float = 0.95) -> SimSummary:
    """Fraction of replicate Wald intervals containing theta_true.

    Replicates whose MLE is on the boundary have no Wald interval; they count
    as non-covering and are reported in ``boundary``.
    """
    model = config.model
    est = _run(config, "mle")
    lo, hi = model.lower[0], model.upper[0]
    interior = (est > lo) & (est < hi)
    info = np.full(est.shape, np.nan)
    info[interior] = _unit_information(model, est[interior])
    half = z_multiplier(level) / np.sqrt(config.n * info)
    covered = interior & (np.abs(est - config.theta[0]) <= half)
    rate, se = _rate(covered)
    return SimSummary(est, rate, se, int(np.count_nonzero(~interior)),
                      {"level": level, "config": config.to_json()})


@dataclass(frozen=True)
class VarianceCheck:
    mc_variance: float
    asymptotic_variance: float
    ratio: float
    mc_stderr: float

    def to_json(self) -> dict:
        return {"mc_variance": self.mc_variance, "asymptotic_variance": self.asymptotic_variance,
                "ratio": self.ratio, "mc_stderr": self.mc_stderr}


def asymptotic_variance(model: ParametricModel, theta, n: int, estimator: str = "mle") -> float:
    """Var of the estimator implied by its per-observation asymptotic variance over n."""
    if estimator == "mle" or model.is_finite:
        return 1.0 / (n * fisher_information(model, theta).scalar)
    rows = {r.estimator: r for r in estimator_comparison(model)}
    if estimator not in rows or not rows[estimator].defined:
        raise ValueError(f"no finite asymptotic variance for the {estimator} under {model.name}")
    return rows[estimator].asymptotic_variance / n


def variance_check(config: SimConfig, estimator: str = "mle") -> VarianceCheck:
    est = _run(config, estimator)
    m = math.fsum(est) / est.size
    dev = est - m
    var = math.fsum(dev**2) / (est.size - 1)
    m4 = math.fsum(dev**4) / est.size
    se = math.sqrt(max(m4 - var**2, 0.0) / est.size)
    av = asymptotic_variance(config.model, config.theta, config.n, estimator)
    return VarianceCheck(var, av, var / av, se)


# ---------------------------------------------------------------------------
# exact binomial oracles
# ---------------------------------------------------------------------------


def exact_hit_rate(n: int, theta: float, halfwidth: float) -> float:
    """P(|Y/n - theta| <= halfwidth) for Y ~ Binomial(n, theta)."""
    y = np.arange(n + 1)
    ok = np.abs(y / n - theta) <= halfwidth + 1e-12
    return math.fsum(stats.binom.pmf(y[ok], n, theta))


def exact_wald_coverage(n: int, theta: float, level: float = 0.95) -> float:
    """Exact coverage of the Bernoulli Wald interval; boundary y never covers."""
    y = np.arange(1, n)
    th = y / n
    half = z_multiplier(level) * np.sqrt(th * (1 - th) / n)
    ok = np.abs(th - theta) <= half
    return math.fsum(stats.binom.pmf(y[ok], n, theta))
