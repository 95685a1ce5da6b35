"""Fisher information: score-variance and negative-expected-Hessian forms."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .models import ParametricModel
from .quadrature import quad

SCORE_STEP = 1e-6
HESSIAN_STEP = 1e-3
STEP_MARGIN = 20.0
SUFFICIENCY_RTOL = 1e-8


@dataclass(frozen=True)
class FisherMatrix:
    entries: np.ndarray

    def __post_init__(self):
        m = np.atleast_2d(np.asarray(self.entries, dtype=float))
        if m.shape[0] != m.shape[1]:
            raise ValueError("Fisher information must be square")
        scale = max(1.0, float(np.max(np.abs(m))))
        if np.max(np.abs(m - m.T)) > 1e-9 * scale:
            raise ValueError("Fisher information must be symmetric")
        m = 0.5 * (m + m.T)
        if np.min(np.linalg.eigvalsh(m)) < -1e-9 * scale:
            raise ValueError("Fisher information must be positive semidefinite")
        m.setflags(write=False)
        object.__setattr__(self, "entries", m)

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    @property
    def scalar(self) -> float:
        if self.dim != 1:
            raise ValueError("Fisher information is a matrix, not a scalar")
        return float(self.entries[0, 0])

    @property
    def det(self) -> float:
        return float(np.linalg.det(self.entries))

    def __mul__(self, k: float) -> "FisherMatrix":
        return FisherMatrix(self.entries * k)

    __rmul__ = __mul__

    def to_json(self):
        return self.entries.tolist()


# ---------------------------------------------------------------------------
# finite differences
# ---------------------------------------------------------------------------


def _steps(model: ParametricModel, t: np.ndarray, rel: float) -> np.ndarray:
    """Per-coordinate steps rel*(1+|t_i|), shrunk so t +/- STEP_MARGIN*h stays in the domain.

    The margin keeps the stencil well inside the domain, where the
    log-likelihood's curvature scale is much larger than the step.
    """
    h = rel * (1.0 + np.abs(t))
    for i in range(model.dim):
        for _ in range(60):
            e = np.zeros_like(t)
            e[i] = STEP_MARGIN * h[i]
            if model.in_domain(t + e) and model.in_domain(t - e):
                break
            h[i] *= 0.5
    return h


def numeric_score(model: ParametricModel, x, theta) -> np.ndarray:
    t = model.check(theta)
    h = _steps(model, t, SCORE_STEP)
    out = np.empty(model.dim)
    for i in range(model.dim):
        e = np.zeros_like(t)
        e[i] = h[i]
        out[i] = (model.logf(x, t + e) - model.logf(x, t - e)) / (2.0 * h[i])
    return out


def numeric_hessian(model: ParametricModel, x, theta) -> np.ndarray:
    """Richardson-extrapolated central differences over steps h and h/2.

    Differentiates the analytic score when there is one (far less roundoff
    where the information is tiny), else takes second differences of logf.
    """
    t = model.check(theta)
    h = _steps(model, t, HESSIAN_STEP)
    fd = _jacobian_fd if model.score is not None else _hessian_fd
    return (4.0 * fd(model, x, t, 0.5 * h) - fd(model, x, t, h)) / 3.0


def _jacobian_fd(model: ParametricModel, x, t: np.ndarray, h: np.ndarray) -> np.ndarray:
    d = model.dim
    J = np.empty((d, d))
    for i in range(d):
        e = np.zeros(d)
        e[i] = h[i]
        hi = np.atleast_1d(model.score(x, t + e)).ravel()
        lo = np.atleast_1d(model.score(x, t - e)).ravel()
        J[:, i] = (hi - lo) / (2.0 * h[i])
    return 0.5 * (J + J.T)


def _hessian_fd(model: ParametricModel, x, t: np.ndarray, h: np.ndarray) -> np.ndarray:
    d = model.dim
    f0 = model.logf(x, t)
    H = np.empty((d, d))
    for i in range(d):
        ei = np.zeros(d)
        ei[i] = h[i]
        H[i, i] = (model.logf(x, t + ei) - 2.0 * f0 + model.logf(x, t - ei)) / h[i] ** 2
        for j in range(i + 1, d):
            ej = np.zeros(d)
            ej[j] = h[j]
            H[i, j] = H[j, i] = (
                model.logf(x, t + ei + ej) - model.logf(x, t + ei - ej)
                - model.logf(x, t - ei + ej) + model.logf(x, t - ei - ej)
            ) / (4.0 * h[i] * h[j])
    return H


# ---------------------------------------------------------------------------
# expectations under p_theta
# ---------------------------------------------------------------------------


def _breakpoints(lo, hi, center, scale):
    pts = [center + s * scale for s in (-100, -10, -1, 0, 1, 10, 100)]
    return [p for p in pts if lo < p < hi]


def expectation(model: ParametricModel, theta, fn: Callable, shape: tuple) -> np.ndarray:
    """E_theta[fn(x)] for an array-valued fn of the given shape.

    Finite outcomes are summed exactly; continuous outcomes are integrated by
    adaptive quadrature over the model's truncation window.
    """
    t = model.check(theta)
    if model.is_finite:
        p = model.probs(t)
        acc = np.zeros(shape)
        for x, px in zip(model.outcomes.labels, p):
            if px > 0:
                acc = acc + px * np.asarray(fn(x), dtype=float).reshape(shape)
        return acc
    lo, hi, center, scale = model.truncation(t)
    pts = _breakpoints(lo, hi, center, scale)
    out = np.empty(shape)
    cache: dict[float, np.ndarray] = {}

    def val(x):
        if x not in cache:
            cache[x] = np.asarray(fn(x), dtype=float).reshape(shape) * math.exp(model.logf(x, t))
        return cache[x]

    for idx in np.ndindex(*shape):
        out[idx] = quad(lambda x, idx=idx: val(x)[idx], lo, hi, points=pts,
                        what=f"expectation over {model.name} outcomes")
    return out


def _score_fn(model: ParametricModel, method: Optional[str]):
    if method is None:
        method = "analytic" if model.score is not None else "numeric"
    if method == "analytic":
        if model.score is None:
            raise ValueError(f"{model.name} has no analytic score; use method='numeric'")
        return lambda x, t: np.atleast_1d(model.score(x, t))
    if method == "numeric":
        return lambda x, t: numeric_score(model, x, t)
    raise ValueError(f"method must be 'analytic' or 'numeric', got {method!r}")


def score_mean(model: ParametricModel, theta, method: Optional[str] = None) -> np.ndarray:
    t = model.check(theta)
    s = _score_fn(model, method)
    return expectation(model, t, lambda x: s(x, t), (model.dim,))


def fisher_score_form(model: ParametricModel, theta, method: Optional[str] = None) -> FisherMatrix:
    """E[score score^T] under p_theta."""
    t = model.check(theta)
    s = _score_fn(model, method)

    def outer(x):
        v = s(x, t)
        return np.outer(v, v)

    return FisherMatrix(expectation(model, t, outer, (model.dim, model.dim)))


def fisher_hessian_form(model: ParametricModel, theta) -> FisherMatrix:
    """-E[d^2 log f / dtheta dtheta^T]; non-smooth models fall back to the score form."""
    t = model.check(theta)
    if not model.smooth:
        return fisher_score_form(model, t)
    H = expectation(model, t, lambda x: numeric_hessian(model, x, t), (model.dim, model.dim))
    return FisherMatrix(-H)


def fisher_information(model: ParametricModel, theta) -> FisherMatrix:
    """Unit information: the closed form when the model has one, else numeric score form."""
    t = model.check(theta)
    if model.fisher is not None:
        return FisherMatrix(model.fisher(t))
    return fisher_score_form(model, t, "numeric")


def fisher_iid(model: ParametricModel, theta, n: int) -> FisherMatrix:
    if int(n) != n or n < 1:
        raise ValueError("n must be a positive integer")
    return fisher_information(model, theta) * int(n)


@dataclass(frozen=True)
class StatisticInformation:
    sample_information: float
    statistic_information: float
    sufficient: bool


def statistic_information(base: ParametricModel, statistic_model: ParametricModel, theta,
                          n: int, method: Optional[str] = None) -> StatisticInformation:
    """Compare I_{X^n}(theta) with the information in a statistic T.

    ``statistic_model`` is the sampling distribution of T (binomial(n) for the
    success count, the base model itself for T = X_1).  Both informations are
    computed from score expectations, not closed forms.
    """
    if base.dim != statistic_model.dim:
        raise ValueError("base and statistic models have different parameter dimensions")
    t = base.check(theta)
    i_xn = fisher_score_form(base, t, method).entries * int(n)
    i_t = fisher_score_form(statistic_model, t, method).entries
    if i_xn.size != 1:
        raise ValueError("statistic_information compares scalar informations only")
    a, b = float(i_xn[0, 0]), float(i_t[0, 0])
    equal = abs(a - b) <= SUFFICIENCY_RTOL * max(abs(a), abs(b))
    return StatisticInformation(a, b, equal)
