"""Outcome spaces, probability vectors, count data and parametric model families.

Every model used in the worked examples is available through
:func:`builtin_model`.  Finite-outcome models carry a ``pmf`` that is also
valid on the closed parameter box (so boundary MLEs can be evaluated with the
``0 * log 0 = 0`` convention), while ``logf`` enforces the open domain.
"""
from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field, replace
from typing import Any, Callable, Hashable, Optional, Sequence

import numpy as np
from scipy import special

PROB_TOL = 1e-12


class DomainError(ValueError):
    """Parameter point outside the open parameter domain."""


class UnknownModelError(ValueError):
    pass


# ---------------------------------------------------------------------------
# basic containers
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class OutcomeSpace:
    """Either an ordered list of finite labels or a real interval."""

    labels: Optional[tuple] = None
    interval: Optional[tuple[float, float]] = None

    def __post_init__(self):
        if (self.labels is None) == (self.interval is None):
            raise ValueError("exactly one of labels / interval must be given")
        if self.labels is not None:
            if len(self.labels) < 2 or len(set(self.labels)) != len(self.labels):
                raise ValueError("finite outcome space needs >= 2 distinct labels")
        else:
            lo, hi = self.interval
            if not lo < hi:
                raise ValueError("continuous outcome space needs lower < upper")

    @classmethod
    def finite(cls, labels: Sequence[Hashable]) -> "OutcomeSpace":
        return cls(labels=tuple(labels))

    @classmethod
    def continuous(cls, lower: float = -math.inf, upper: float = math.inf) -> "OutcomeSpace":
        return cls(interval=(float(lower), float(upper)))

    @property
    def is_finite(self) -> bool:
        return self.labels is not None

    @property
    def size(self) -> int:
        if not self.is_finite:
            raise ValueError("continuous outcome space has no size")
        return len(self.labels)

    def index(self, label) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            # tolerate "1" vs 1 style label mismatches coming from text input
            for i, lab in enumerate(self.labels):
                if str(lab) == str(label):
                    return i
            raise ValueError(f"outcome {label!r} not in outcome space {self.labels}") from None


@dataclass(frozen=True)
class ProbVector:
    probs: tuple[float, ...]

    def __post_init__(self):
        p = np.asarray(self.probs, dtype=float)
        if p.ndim != 1 or p.size < 1:
            raise ValueError("ProbVector must be a 1-d vector")
        if np.any(p < 0):
            raise ValueError("ProbVector entries must be nonnegative")
        if abs(math.fsum(p) - 1.0) > PROB_TOL * max(1, p.size):
            raise ValueError(f"ProbVector entries sum to {math.fsum(p)!r}, not 1")
        object.__setattr__(self, "probs", tuple(float(v) for v in p))

    @property
    def array(self) -> np.ndarray:
        return np.asarray(self.probs)

    def __len__(self) -> int:
        return len(self.probs)


@dataclass(frozen=True)
class CountVector:
    """Counts of each outcome, in outcome-space order."""

    counts: tuple[int, ...]

    def __post_init__(self):
        c = tuple(int(v) for v in self.counts)
        if any(v < 0 for v in c):
            raise ValueError("counts must be nonnegative")
        if any(int(v) != v for v in self.counts):
            raise ValueError("counts must be integers")
        object.__setattr__(self, "counts", c)

    @property
    def n(self) -> int:
        return sum(self.counts)

    @property
    def array(self) -> np.ndarray:
        return np.asarray(self.counts, dtype=float)

    def empirical(self) -> ProbVector:
        if self.n == 0:
            raise ValueError("empirical pmf undefined for n = 0")
        return ProbVector(tuple(c / self.n for c in self.counts))

    def to_json(self) -> dict:
        return {"counts": list(self.counts), "n": self.n}

    @classmethod
    def from_json(cls, obj) -> "CountVector":
        if isinstance(obj, dict):
            cv = cls(tuple(obj["counts"]))
            if "n" in obj and int(obj["n"]) != cv.n:
                raise ValueError(f"counts sum to {cv.n}, but n = {obj['n']}")
            return cv
        return cls(tuple(obj))


# ---------------------------------------------------------------------------
# parametric models
# ---------------------------------------------------------------------------

Theta = np.ndarray


@dataclass(frozen=True)
class ParametricModel:
    """A family f(x | theta) over a fixed outcome space.

    ``lower``/``upper`` describe the open parameter box; ``constraint`` can
    further restrict it (the simplex for ``categorical-beta``).  For finite
    outcomes ``pmf(theta)`` returns all w chances at once and is the primitive
    the other evaluators are built on.
    """

    name: str
    dim: int
    lower: tuple[float, ...]
    upper: tuple[float, ...]
    outcomes: OutcomeSpace
    logf: Callable[[Any, Theta], float]
    score: Optional[Callable[[Any, Theta], np.ndarray]] = None
    fisher: Optional[Callable[[Theta], np.ndarray]] = None
    pmf: Optional[Callable[[Theta], np.ndarray]] = None
    params: dict = field(default_factory=dict)
    constraint: Optional[Callable[[Theta], bool]] = None
    inner_bounds: Optional[Callable[[float], tuple[float, float]]] = None
    truncation: Optional[Callable[[Theta], tuple[float, float, float, float]]] = None
    ppf: Optional[Callable[[np.ndarray, Theta], np.ndarray]] = None
    mle: Optional[Callable[[Any], Theta]] = None
    smooth: bool = True
    param_names: tuple[str, ...] = ()

    @property
    def is_finite(self) -> bool:
        return self.outcomes.is_finite

    @property
    def spec(self) -> dict:
        return {"name": self.name, "params": dict(self.params)}

    def as_theta(self, theta) -> Theta:
        t = np.atleast_1d(np.asarray(theta, dtype=float)).ravel()
        if t.size != self.dim:
            raise DomainError(f"{self.name} expects a {self.dim}-d parameter, got {t.size} values")
        return t

    def in_domain(self, theta) -> bool:
        t = self.as_theta(theta)
        lo, hi = np.asarray(self.lower), np.asarray(self.upper)
        if not (np.all(t > lo) and np.all(t < hi)):
            return False
        return self.constraint is None or bool(self.constraint(t))

    def check(self, theta) -> Theta:
        t = self.as_theta(theta)
        if not self.in_domain(t):
            raise DomainError(
                f"theta={t.tolist()} outside the open domain of {self.name} "
                f"(lower={self.lower}, upper={self.upper})"
            )
        return t

    def probs(self, theta, closed: bool = False) -> np.ndarray:
        """All w outcome chances; ``closed=True`` admits boundary points."""
        if not self.is_finite:
            raise ValueError(f"{self.name} has continuous outcomes")
        t = self.as_theta(theta) if closed else self.check(theta)
        return np.asarray(self.pmf(t), dtype=float)

    def prob_vector(self, theta) -> ProbVector:
        return ProbVector(tuple(self.probs(theta)))


def _finite_model(name, dim, lower, upper, labels, pmf, score_matrix=None, fisher=None, **kw):
    """Build a finite model whose evaluators all derive from ``pmf``."""
    space = OutcomeSpace.finite(labels)

    def logf(x, theta):
        with np.errstate(divide="ignore"):
            return float(np.log(pmf(theta)[space.index(x)]))

    score = None
    if score_matrix is not None:
        def score(x, theta):
            return np.atleast_1d(score_matrix(theta)[space.index(x)])
    return ParametricModel(name=name, dim=dim, lower=tuple(lower), upper=tuple(upper),
                           outcomes=space, logf=logf, score=score, fisher=fisher, pmf=pmf, **kw)


def _xlogy_counts(counts: np.ndarray, p: np.ndarray) -> float:
    return float(math.fsum(special.xlogy(counts, p)))


# --- bernoulli / binomial --------------------------------------------------

def _bernoulli() -> ParametricModel:
    def pmf(t):
        return np.array([1.0 - t[0], t[0]])

    def score_matrix(t):
        th = t[0]
        return np.array([[-1.0 / (1.0 - th)], [1.0 / th]])

    def fisher(t):
        th = t[0]
        return np.array([[1.0 / (th * (1.0 - th))]])

    def mle(counts):
        c = np.asarray(counts, dtype=float)
        return np.array([c[1] / c.sum(axis=0)])

    return _finite_model("bernoulli", 1, (0.0,), (1.0,), (0, 1), pmf, score_matrix, fisher,
                         mle=mle, param_names=("theta",))


def _binomial(n: int) -> ParametricModel:
    n = int(n)
    if n < 1:
        raise ValueError("binomial needs n >= 1")
    k = np.arange(n + 1)
    logc = special.gammaln(n + 1) - special.gammaln(k + 1) - special.gammaln(n - k + 1)

    def pmf(t):
        th = t[0]
        with np.errstate(divide="ignore", invalid="ignore"):
            lp = logc + special.xlogy(k, th) + special.xlog1py(n - k, -th)
        return np.exp(lp)

    def score_matrix(t):
        th = t[0]
        return ((k - n * th) / (th * (1.0 - th)))[:, None]

    def fisher(t):
        th = t[0]
        return np.array([[n / (th * (1.0 - th))]])

    def mle(counts):
        c = np.asarray(counts, dtype=float)
        return np.array([np.tensordot(k, c, axes=(0, 0)) / (n * c.sum(axis=0))])

    return _finite_model("binomial", 1, (0.0,), (1.0,), tuple(range(n + 1)), pmf, score_matrix,
                         fisher, params={"n": n}, mle=mle, param_names=("theta",))


# --- multinomial processing trees ------------------------------------------

MPT_LABELS = ("L", "M", "R")


def _mpt_individual_word() -> ParametricModel:
    def pmf(t):
        v = t[0]
        return np.array([(1.0 - v) ** 2, 2.0 * v * (1.0 - v), v * v])

    def score_matrix(t):
        v = t[0]
        return np.array([[-2.0 / (1.0 - v)], [1.0 / v - 1.0 / (1.0 - v)], [2.0 / v]])

    def fisher(t):
        v = t[0]
        return np.array([[2.0 / (v * (1.0 - v))]])

    def mle(counts):
        yl, ym, yr = np.asarray(counts, dtype=float)
        n = yl + ym + yr
        return np.array([(ym + 2.0 * yr) / (2.0 * n)])

    return _finite_model("mpt-individual-word", 1, (0.0,), (1.0,), MPT_LABELS, pmf, score_matrix,
                         fisher, mle=mle, param_names=("vartheta",))


def _mpt_only_mixed() -> ParametricModel:
    def pmf(t):
        a = t[0]
        return np.array([(1.0 - a) / 2.0, a, (1.0 - a) / 2.0])

    def score_matrix(t):
        a = t[0]
        return np.array([[-1.0 / (1.0 - a)], [1.0 / a], [-1.0 / (1.0 - a)]])

    def fisher(t):
        a = t[0]
        return np.array([[1.0 / (a * (1.0 - a))]])

    def mle(counts):
        yl, ym, yr = np.asarray(counts, dtype=float)
        return np.array([ym / (yl + ym + yr)])

    return _finite_model("mpt-only-mixed", 1, (0.0,), (1.0,), MPT_LABELS, pmf, score_matrix,
                         fisher, mle=mle, param_names=("alpha",))


# --- categorical (trinomial) -----------------------------------------------

def _categorical_beta() -> ParametricModel:
    def pmf(t):
        b1, b2 = t
        return np.array([b1, b2, 1.0 - b1 - b2])

    def score_matrix(t):
        b1, b2 = t
        b3 = 1.0 - b1 - b2
        return np.array([[1.0 / b1, 0.0], [0.0, 1.0 / b2], [-1.0 / b3, -1.0 / b3]])

    def fisher(t):
        # derived from the negative expected Hessian; det = 1 / (b1 b2 b3)
        b1, b2 = t
        b3 = 1.0 - b1 - b2
        return np.array([[(1.0 - b2) / b1, 1.0], [1.0, (1.0 - b1) / b2]]) / b3

    def mle(counts):
        c = np.asarray(counts, dtype=float)
        return c[:2] / c.sum(axis=0)

    return _finite_model(
        "categorical-beta", 2, (0.0, 0.0), (1.0, 1.0), MPT_LABELS, pmf, score_matrix, fisher,
        constraint=lambda t: t[0] + t[1] < 1.0,
        inner_bounds=lambda b1: (0.0, 1.0 - b1),
        mle=mle, param_names=("beta1", "beta2"),
    )


def _categorical_gamma() -> ParametricModel:
    def pmf(t):
        g1, g2 = t
        return np.array([g1, (1.0 - g1) * g2, (1.0 - g1) * (1.0 - g2)])

    def score_matrix(t):
        g1, g2 = t
        return np.array([
            [1.0 / g1, 0.0],
            [-1.0 / (1.0 - g1), 1.0 / g2],
            [-1.0 / (1.0 - g1), -1.0 / (1.0 - g2)],
        ])

    def fisher(t):
        g1, g2 = t
        return np.array([[1.0 / (g1 * (1.0 - g1)), 0.0], [0.0, (1.0 - g1) / (g2 * (1.0 - g2))]])

    def mle(counts):
        yl, ym, yr = np.asarray(counts, dtype=float)
        n = yl + ym + yr
        rest = ym + yr
        with np.errstate(invalid="ignore", divide="ignore"):
            g2 = np.where(rest > 0, ym / np.where(rest > 0, rest, 1.0), 0.0)
        return np.array([yl / n, g2])

    return _finite_model("categorical-gamma", 2, (0.0, 0.0), (1.0, 1.0), MPT_LABELS, pmf,
                         score_matrix, fisher, inner_bounds=lambda g1: (0.0, 1.0),
                         mle=mle, param_names=("gamma1", "gamma2"))


# --- continuous location families ------------------------------------------

def _laplace(b: float) -> ParametricModel:
    b = float(b)
    if b <= 0:
        raise ValueError("laplace needs b > 0")

    def logf(x, t):
        return -np.log(2.0 * b) - np.abs(np.asarray(x) - t[0]) / b

    def score(x, t):
        return np.atleast_1d(np.sign(np.asarray(x) - t[0]) / b)

    def ppf(u, t):
        u = np.asarray(u)
        return t[0] - b * np.sign(u - 0.5) * np.log1p(-2.0 * np.abs(u - 0.5))

    return ParametricModel(
        name="laplace", dim=1, lower=(-math.inf,), upper=(math.inf,),
        outcomes=OutcomeSpace.continuous(), logf=logf, score=score,
        fisher=lambda t: np.array([[1.0 / b**2]]), params={"b": b},
        truncation=lambda t: (t[0] - 40 * b, t[0] + 40 * b, t[0], b),
        ppf=ppf, mle=lambda x: np.array([float(np.median(x))]), smooth=False,
        param_names=("theta",),
    )


def _gaussian(sigma: Optional[float] = None) -> ParametricModel:
    if sigma is not None:
        s = float(sigma)
        if s <= 0:
            raise ValueError("gaussian needs sigma > 0")

        def logf(x, t):
            z = (np.asarray(x) - t[0]) / s
            return -0.5 * z * z - np.log(s) - 0.5 * np.log(2 * np.pi)

        return ParametricModel(
            name="gaussian", dim=1, lower=(-math.inf,), upper=(math.inf,),
            outcomes=OutcomeSpace.continuous(), logf=logf,
            score=lambda x, t: np.atleast_1d((np.asarray(x) - t[0]) / s**2),
            fisher=lambda t: np.array([[1.0 / s**2]]), params={"sigma": s},
            truncation=lambda t: (t[0] - 40 * s, t[0] + 40 * s, t[0], s),
            ppf=lambda u, t: t[0] + s * special.ndtri(u),
            mle=lambda x: np.array([float(np.mean(x))]), param_names=("mu",),
        )

    def logf(x, t):
        mu, sd = t
        z = (np.asarray(x) - mu) / sd
        return -0.5 * z * z - np.log(sd) - 0.5 * np.log(2 * np.pi)

    def score(x, t):
        mu, sd = t
        d = np.asarray(x) - mu
        return np.array([d / sd**2, d * d / sd**3 - 1.0 / sd])

    def mle(x):
        x = np.asarray(x, dtype=float)
        return np.array([float(np.mean(x)), float(np.std(x))])

    return ParametricModel(
        name="gaussian", dim=2, lower=(-math.inf, 0.0), upper=(math.inf, math.inf),
        outcomes=OutcomeSpace.continuous(), logf=logf, score=score,
        fisher=lambda t: np.array([[1.0 / t[1] ** 2, 0.0], [0.0, 2.0 / t[1] ** 2]]),
        truncation=lambda t: (t[0] - 40 * t[1], t[0] + 40 * t[1], t[0], t[1]),
        ppf=lambda u, t: t[0] + t[1] * special.ndtri(u), mle=mle,
        param_names=("mu", "sigma"),
    )


def _cauchy() -> ParametricModel:
    def logf(x, t):
        d = np.asarray(x) - t[0]
        return -np.log(np.pi) - np.log1p(d * d)

    def score(x, t):
        d = np.asarray(x) - t[0]
        return np.atleast_1d(2.0 * d / (1.0 + d * d))

    return ParametricModel(
        name="cauchy", dim=1, lower=(-math.inf,), upper=(math.inf,),
        outcomes=OutcomeSpace.continuous(), logf=logf, score=score,
        fisher=lambda t: np.array([[0.5]]),
        truncation=lambda t: (t[0] - 1e4, t[0] + 1e4, t[0], 1.0),
        ppf=lambda u, t: t[0] + np.tan(np.pi * (np.asarray(u) - 0.5)),
        param_names=("theta",),
    )


# ---------------------------------------------------------------------------
# reparameterization
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Reparameterization:
    """theta = forward(phi) for a 1-d model; ``domain`` is the new (phi) interval."""

    forward: Callable[[np.ndarray], np.ndarray]
    inverse: Callable[[np.ndarray], np.ndarray]
    derivative: Callable[[np.ndarray], np.ndarray]
    domain: tuple[float, float]
    image: tuple[float, float]
    name: str = "reparameterization"

    def inverse_derivative(self, theta):
        """d phi / d theta, evaluated at theta."""
        with np.errstate(divide="ignore"):
            return 1.0 / self.derivative(self.inverse(theta))

    def grid(self, size: int = 1001) -> np.ndarray:
        lo, hi = self.domain
        pad = (hi - lo) * 1e-6
        return np.linspace(lo + pad, hi - pad, size)

    def validate(self, size: int = 1001, tol: float = 1e-10) -> None:
        phi = self.grid(size)
        theta = self.forward(phi)
        steps = np.diff(theta)
        if not (np.all(steps > 0) or np.all(steps < 0)):
            raise ValueError(f"{self.name}: forward map is not monotone on its domain grid")
        back = self.forward(self.inverse(theta))
        if np.max(np.abs(back - theta)) > tol:
            raise ValueError(f"{self.name}: forward(inverse(theta)) != theta on the grid")


def bent_coin_map() -> Reparameterization:
    """theta = 1/2 + (1/2) (phi / pi)^3 on phi in (-pi, pi)."""
    pi3 = np.pi**3
    return Reparameterization(
        forward=lambda p: 0.5 + 0.5 * (np.asarray(p) / np.pi) ** 3,
        inverse=lambda t: np.pi * np.cbrt(2.0 * np.asarray(t) - 1.0),
        derivative=lambda p: 1.5 * np.asarray(p) ** 2 / pi3,
        domain=(-np.pi, np.pi),
        image=(0.0, 1.0),
        name="bent-coin",
    )


def reparameterize(model: ParametricModel, mapping: Reparameterization,
                   name: Optional[str] = None) -> ParametricModel:
    """New 1-d model with logf'(x, phi) = logf(x, h(phi)); score and FI by the chain rule."""
    if model.dim != 1:
        raise ValueError("reparameterize supports 1-d models only")
    mapping.validate()
    h, dh = mapping.forward, mapping.derivative

    def to_base(p):
        return np.atleast_1d(h(np.asarray(p, dtype=float)))

    score = fisher = pmf = mle = None
    if model.score is not None:
        def score(x, p):
            return model.score(x, to_base(p)) * dh(p[0])
    if model.fisher is not None:
        def fisher(p):
            return model.fisher(to_base(p)) * dh(p[0]) ** 2
    if model.pmf is not None:
        def pmf(p):
            return model.pmf(to_base(p))
    if model.mle is not None:
        def mle(data):
            return np.atleast_1d(mapping.inverse(model.mle(data)))

    lo, hi = mapping.domain
    return replace(
        model,
        name=name or f"{model.name}@{mapping.name}",
        lower=(lo,), upper=(hi,),
        logf=lambda x, p: model.logf(x, to_base(p)),
        score=score, fisher=fisher, pmf=pmf, mle=mle,
        constraint=None, inner_bounds=None, truncation=None, ppf=None,
        params={**model.params},
        param_names=("phi",),
    )


# ---------------------------------------------------------------------------
# registry
# ---------------------------------------------------------------------------

_ALIASES = {
    "mpt1": "mpt-individual-word",
    "mpt2": "mpt-only-mixed",
    "m1": "mpt-individual-word",
    "m2": "mpt-only-mixed",
    "normal": "gaussian",
}

BUILTIN_NAMES = (
    "bernoulli", "binomial", "laplace", "gaussian", "cauchy", "mpt-individual-word",
    "mpt-only-mixed", "categorical-beta", "categorical-gamma", "bent-coin",
)


def builtin_model(name: str, **params) -> ParametricModel:
    """Look up one of the named model families.

    ``binomial`` needs ``n``; ``laplace`` takes ``b`` (default 1);
    ``gaussian`` is the 2-d (mu, sigma) family unless ``sigma`` is given, in
    which case it is the known-scale location model.
    """
    key = _ALIASES.get(name.lower(), name.lower())
    if key == "bernoulli":
        return _bernoulli()
    if key == "binomial":
        if "n" not in params:
            raise ValueError("binomial requires parameter n")
        return _binomial(params["n"])
    if key == "laplace":
        return _laplace(params.get("b", 1.0))
    if key == "gaussian":
        return _gaussian(params.get("sigma"))
    if key == "cauchy":
        return _cauchy()
    if key == "mpt-individual-word":
        return _mpt_individual_word()
    if key == "mpt-only-mixed":
        return _mpt_only_mixed()
    if key == "categorical-beta":
        return _categorical_beta()
    if key == "categorical-gamma":
        return _categorical_gamma()
    if key == "bent-coin":
        return reparameterize(_bernoulli(), bent_coin_map(), name="bent-coin")
    raise UnknownModelError(
        f"unknown model {name!r}; valid identifiers: {', '.join(BUILTIN_NAMES)}"
        f" (aliases: {', '.join(sorted(_ALIASES))})"
    )


def model_from_json(obj: dict) -> ParametricModel:
    return builtin_model(obj["name"], **obj.get("params", {}))


# ---------------------------------------------------------------------------
# data handling
# ---------------------------------------------------------------------------


def sufficient_counts(model: ParametricModel, raw: Sequence) -> CountVector:
    if not model.is_finite:
        raise ValueError(f"{model.name} has continuous outcomes; no count reduction")
    space = model.outcomes
    tally = Counter(space.index(x) for x in raw)
    return CountVector(tuple(tally.get(i, 0) for i in range(space.size)))


def as_counts(model: ParametricModel, data) -> CountVector:
    if isinstance(data, CountVector):
        if len(data.counts) != model.outcomes.size:
            raise ValueError(
                f"{model.name} has {model.outcomes.size} outcomes, got {len(data.counts)} counts"
            )
        return data
    return sufficient_counts(model, data)


def loglik_counts(model: ParametricModel, counts: CountVector, theta, closed: bool = False) -> float:
    """sum_w y_w log f(w | theta) with 0 log 0 = 0."""
    p = model.probs(theta, closed=closed)
    return _xlogy_counts(counts.array, p)


def loglik_iid(model: ParametricModel, data, theta) -> float:
    """Log-likelihood of iid data (raw outcomes or a CountVector)."""
    t = model.check(theta)
    if model.is_finite:
        return loglik_counts(model, as_counts(model, data), t)
    x = np.asarray(data, dtype=float)
    return float(math.fsum(np.atleast_1d(model.logf(x, t))))
