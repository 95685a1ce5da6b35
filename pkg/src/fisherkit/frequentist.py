"""Maximum likelihood, Wald-type intervals, point-null tests and sample-size design."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy import optimize, special

from .fisher import fisher_information
from .models import ParametricModel, as_counts, loglik_counts

# The worked examples use these two multipliers verbatim.
FIXED_Z = {0.95: 1.96, 0.68: 1.0}
WORST_CASE_GRID = 1e-3


class DegenerateIntervalError(ValueError):
    """The MLE sits on the boundary, where the Wald interval has zero width."""


def z_multiplier(level: float) -> float:
    if not 0.0 < level < 1.0:
        raise ValueError(f"level must lie in (0, 1), got {level}")
    for key, z in FIXED_Z.items():
        if abs(level - key) < 1e-12:
            return z
    return float(special.ndtri(0.5 + 0.5 * level))


@dataclass(frozen=True)
class WaldInterval:
    center: float
    halfwidth: float
    level: float

    def __post_init__(self):
        if not 0.0 < self.level < 1.0:
            raise ValueError("level must lie in (0, 1)")
        if self.halfwidth < 0:
            raise ValueError("halfwidth must be nonnegative")

    @property
    def lower(self) -> float:
        return self.center - self.halfwidth

    @property
    def upper(self) -> float:
        return self.center + self.halfwidth

    @property
    def length(self) -> float:
        return 2.0 * self.halfwidth

    def contains(self, value: float) -> bool:
        return self.lower <= value <= self.upper

    def to_json(self) -> dict:
        return {
            "center": self.center, "halfwidth": self.halfwidth,
            "lower": self.lower, "upper": self.upper, "level": self.level,
            "rounded": {"lower": round(self.lower, 2), "upper": round(self.upper, 2),
                        "length": round(self.length, 2)},
        }


@dataclass(frozen=True)
class TestResult:
    estimate: float
    interval: WaldInterval
    reject: bool
    level: float

    __test__ = False  # keep pytest from collecting this class

    def to_json(self) -> dict:
        return {"estimate": self.estimate, "interval": self.interval.to_json(),
                "reject": self.reject, "level": self.level}


# ---------------------------------------------------------------------------
# MLE
# ---------------------------------------------------------------------------


def _golden_refine(objective, grid: np.ndarray) -> float:
    vals = np.array([objective(g) for g in grid])
    i = int(np.clip(np.nanargmin(vals), 1, len(grid) - 2))
    res = optimize.minimize_scalar(objective, bracket=(grid[i - 1], grid[i], grid[i + 1]),
                                   method="golden", options={"xtol": 1e-12})
    return float(res.x)


def _generic_mle(model: ParametricModel, data) -> np.ndarray:
    if model.dim != 1:
        raise ValueError(f"no closed-form MLE for the {model.dim}-d model {model.name}")
    if model.is_finite:
        lo, hi = model.lower[0], model.upper[0]
        grid = np.linspace(lo, hi, 2001)[1:-1]

        def nll(t):
            return -loglik_counts(model, data, t) if model.in_domain(t) else math.inf
    else:
        x = np.asarray(data, dtype=float)
        q1, med, q3 = np.percentile(x, [25, 50, 75])
        spread = max(q3 - q1, 1e-3)
        grid = np.linspace(med - 10 * spread, med + 10 * spread, 801)

        def nll(t):
            if not model.in_domain(t):
                return math.inf
            return -math.fsum(model.logf(x, np.array([t])))
    t = _golden_refine(nll, grid)
    # golden section stalls near sqrt(machine eps); polish on the score
    if model.score is not None and not model.is_finite:
        def total_score(v):
            return math.fsum(np.atleast_1d(model.score(x, np.array([v]))).ravel())
        step = grid[1] - grid[0]
        a, b = t - step, t + step
        if total_score(a) > 0 > total_score(b):
            t = optimize.brentq(total_score, a, b, xtol=1e-14)
    return np.array([t])


def mle(model: ParametricModel, data) -> np.ndarray:
    """Maximum likelihood estimate; closed form where the model has one.

    Finite models accept a CountVector or raw outcomes and may return a
    boundary value (e.g. 0 when no successes were observed).
    """
    if model.is_finite:
        counts = as_counts(model, data)
        if counts.n == 0:
            raise ValueError("MLE undefined for empty data (n = 0)")
        if model.mle is not None:
            return np.atleast_1d(model.mle(counts.array)).astype(float)
        return _generic_mle(model, counts)
    x = np.asarray(data, dtype=float)
    if x.size == 0:
        raise ValueError("MLE undefined for empty data (n = 0)")
    if model.mle is not None:
        return np.atleast_1d(model.mle(x)).astype(float)
    return _generic_mle(model, x)


def _sample_size(model: ParametricModel, data) -> int:
    if model.is_finite:
        return as_counts(model, data).n
    return int(np.asarray(data).size)


# ---------------------------------------------------------------------------
# intervals and tests
# ---------------------------------------------------------------------------


def prediction_interval(model: ParametricModel, theta0, n: int, level: float = 0.95) -> WaldInterval:
    """theta0 +/- z * sqrt(I^{-1}(theta0) / n): where the MLE lands under theta0."""
    if model.dim != 1:
        raise ValueError("prediction intervals are defined for 1-d models")
    t = model.check(theta0)
    info = fisher_information(model, t).scalar
    if not info > 0:
        raise ValueError(f"Fisher information at {t[0]} is {info}; interval undefined")
    half = z_multiplier(level) * math.sqrt(1.0 / (n * info))
    return WaldInterval(float(t[0]), half, level)


def confidence_interval(model: ParametricModel, data, level: float = 0.95) -> WaldInterval:
    est = mle(model, data)
    if not model.in_domain(est):
        raise DegenerateIntervalError(
            f"MLE {est.tolist()} lies on the boundary of the parameter space; "
            "the Wald interval is degenerate there (use an exact interval instead)"
        )
    return prediction_interval(model, est, _sample_size(model, data), level)


def null_test(model: ParametricModel, data, theta0, level: float = 0.05) -> TestResult:
    """Reject H0: theta = theta0 when the MLE falls outside the 1-level prediction interval."""
    interval = prediction_interval(model, theta0, _sample_size(model, data), 1.0 - level)
    est = float(mle(model, data)[0])
    return TestResult(est, interval, not interval.contains(est), level)


# ---------------------------------------------------------------------------
# design
# ---------------------------------------------------------------------------


def least_informative(model: ParametricModel, step: float = WORST_CASE_GRID) -> float:
    """Parameter value minimising unit information on a regular grid."""
    lo, hi = model.lower[0], model.upper[0]
    if not (math.isfinite(lo) and math.isfinite(hi)):
        lo, hi = -10.0, 10.0
    grid = np.arange(lo + step, hi - step / 2, step)
    info = np.array([fisher_information(model, g).scalar for g in grid])
    best = int(np.argmin(info))
    if not info[best] > 0:
        raise ValueError(f"{model.name}: Fisher information is not bounded away from zero")
    return float(grid[best])


def design_sample_size(model: ParametricModel, halfwidth: float, coverage: float = 0.68, *,
                       theta=None, worst_case: bool = False,
                       variance: Optional[float] = None) -> int:
    """Smallest n with z(coverage) * sqrt(variance / n) <= halfwidth.

    ``variance`` is the per-observation asymptotic variance of the estimator;
    it defaults to the inverse unit information at ``theta`` (or at the least
    informative point when ``worst_case``), i.e. the MLE.
    """
    if halfwidth <= 0:
        raise ValueError("halfwidth must be positive")
    if variance is None:
        if worst_case:
            theta = least_informative(model)
        elif theta is None:
            if model.fisher is None:
                raise ValueError("give theta, worst_case=True or an explicit variance")
            theta = 0.0 if not math.isfinite(model.lower[0]) else None
            if theta is None:
                raise ValueError("give theta or worst_case=True")
        info = fisher_information(model, theta).scalar
        if not info > 0:
            raise ValueError("Fisher information is zero; no finite sample size suffices")
        variance = 1.0 / info
    if not math.isfinite(variance):
        raise ValueError("estimator has infinite variance; no finite sample size suffices")
    target = (z_multiplier(coverage) / halfwidth) ** 2 * variance
    # guard against 50.000000000000014-style float noise
    return max(1, math.ceil(target * (1.0 - 1e-12)))


@dataclass(frozen=True)
class EstimatorRow:
    estimator: str
    asymptotic_variance: float
    defined: bool = True

    def to_json(self) -> dict:
        v = self.asymptotic_variance
        return {"estimator": self.estimator, "asymptotic_variance": v if self.defined else None,
                "defined": self.defined}


def estimator_comparison(model: ParametricModel) -> list[EstimatorRow]:
    """Per-observation asymptotic variances (n * Var) of mean, median and MLE."""
    name = model.name
    if name == "gaussian" and model.dim == 1:
        s2 = model.params["sigma"] ** 2
        return [EstimatorRow("mean", s2), EstimatorRow("mle", s2)]
    if name == "laplace":
        b2 = model.params["b"] ** 2
        return [EstimatorRow("mean", 2.0 * b2), EstimatorRow("median", b2),
                EstimatorRow("mle", b2)]
    if name == "cauchy":
        return [EstimatorRow("mean", math.inf, defined=False),
                EstimatorRow("median", math.pi**2 / 4.0),
                EstimatorRow("mle", 1.0 / model.fisher(np.zeros(1))[0, 0])]
    raise ValueError("estimator_comparison covers gaussian (known sigma), laplace and cauchy")
