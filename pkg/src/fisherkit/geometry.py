"""Square-root embedding on the radius-2 sphere, tangent vectors, volumes and KL projection."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import optimize

from .bayes import jeffreys_normalizer
from .fisher import fisher_information
from .models import ParametricModel, ProbVector
from .quadrature import QuadratureError, integrate_endpoint_singular

SPHERE_RADIUS = 2.0
ORTHO_TOL = 1e-9
KL_GRID_STEP = 1e-4


@dataclass(frozen=True)
class SpherePoint:
    coords: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.coords, dtype=float)
        if np.any(c < 0):
            raise ValueError("sphere coordinates must be nonnegative")
        if abs(np.linalg.norm(c) - SPHERE_RADIUS) > 1e-10:
            raise ValueError(f"norm {np.linalg.norm(c)} is not {SPHERE_RADIUS}")
        c.setflags(write=False)
        object.__setattr__(self, "coords", c)


@dataclass(frozen=True)
class TangentVector:
    base: SpherePoint
    components: np.ndarray
    dparam: float

    def __post_init__(self):
        v = np.asarray(self.components, dtype=float)
        scale = max(1.0, float(np.max(np.abs(v))))
        if abs(float(np.dot(v, self.base.coords))) > 1e-8 * scale:
            raise ValueError("tangent vector is not orthogonal to its base point")
        object.__setattr__(self, "components", v)

    @property
    def length(self) -> float:
        return float(np.linalg.norm(self.components))

    def to_json(self) -> dict:
        return {"base": self.base.coords.tolist(), "components": self.components.tolist(),
                "dparam": self.dparam, "length": self.length,
                "rounded": {"components": [round(float(c), 2) for c in self.components],
                            "length": round(self.length, 2)}}


def embed(p) -> SpherePoint:
    """m = 2 sqrt(p)."""
    pv = p if isinstance(p, ProbVector) else ProbVector(tuple(np.asarray(p, dtype=float)))
    return SpherePoint(2.0 * np.sqrt(pv.array))


def embed_model(model: ParametricModel, theta) -> SpherePoint:
    return embed(model.prob_vector(theta))


def _require_curve(model: ParametricModel):
    if model.dim != 1 or not model.is_finite:
        raise ValueError("tangent vectors need a 1-d model with finite outcomes")


def tangent(model: ParametricModel, theta, dtheta: float) -> TangentVector:
    """Components (1/2) score(x) m_theta(x) dtheta, one per outcome."""
    _require_curve(model)
    t = model.check(theta)
    base = embed_model(model, t)
    if model.score is not None:
        s = np.array([model.score(x, t)[0] for x in model.outcomes.labels])
    else:
        from .fisher import numeric_score
        s = np.array([numeric_score(model, x, t)[0] for x in model.outcomes.labels])
    return TangentVector(base, 0.5 * s * base.coords * float(dtheta), float(dtheta))


def tangent_length(model: ParametricModel, theta, dtheta: float) -> float:
    """sqrt(I(theta)) |dtheta|."""
    _require_curve(model)
    return math.sqrt(fisher_information(model, theta).scalar) * abs(float(dtheta))


def arc_length(model: ParametricModel, a: float, b: float) -> float:
    """Fisher-Rao length of the model curve between parameters a < b."""
    def root(t):
        return math.sqrt(fisher_information(model, t).scalar)
    return integrate_endpoint_singular(root, a, b, what=f"arc length of {model.name}")


def _sqrt_det(model: ParametricModel, t1: float, t2: float) -> float:
    t = np.array([t1, t2])
    if not model.in_domain(t):
        return 0.0
    d = np.linalg.det(fisher_information(model, t).entries)
    return math.sqrt(max(d, 0.0))


def model_volume(model: ParametricModel) -> float:
    """Integral of sqrt(det I) over the parameter domain (d = 1 or 2).

    In two dimensions the inner integral runs over the second coordinate at
    fixed first coordinate, both in the sin^2 coordinate of their ranges.
    """
    if model.dim == 1:
        return jeffreys_normalizer(model)
    if model.dim != 2:
        raise ValueError("model_volume supports d = 1 and d = 2")
    lo, hi = model.lower[0], model.upper[0]
    if not all(math.isfinite(v) for v in (*model.lower, *model.upper)):
        raise QuadratureError(f"volume of {model.name} diverges on an unbounded domain", math.inf)
    bounds = model.inner_bounds or (lambda _: (model.lower[1], model.upper[1]))

    def inner(t1):
        a, b = bounds(t1)
        return integrate_endpoint_singular(lambda t2: _sqrt_det(model, t1, t2), a, b,
                                           what="inner volume integral", epsrel=1e-10)

    return integrate_endpoint_singular(inner, lo, hi, what=f"volume of {model.name}",
                                       epsrel=1e-9)


# ---------------------------------------------------------------------------
# KL projection
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class KLProjection:
    theta: np.ndarray
    pmf: ProbVector
    divergence: float
    boundary: bool

    def to_json(self) -> dict:
        return {"theta": self.theta.tolist(), "pmf": list(self.pmf.probs),
                "divergence": self.divergence, "boundary": self.boundary}


def _pmf_grid(model: ParametricModel, grid: np.ndarray) -> np.ndarray:
    """pmf at many parameter values, shape (w, len(grid))."""
    w = model.outcomes.size
    try:
        p = np.asarray(model.pmf(grid[None, :]), dtype=float)
        if p.shape == (w, grid.size):
            return p
    except (ValueError, IndexError, TypeError):
        pass
    return np.stack([model.probs(g, closed=True) for g in grid], axis=1)


def _kl_terms(p: np.ndarray, q: np.ndarray) -> np.ndarray:
    """KL(p || q) along the last axis of q, with 0 log 0 = 0 and p log(p/0) = inf."""
    pos = p > 0
    with np.errstate(divide="ignore"):
        logs = np.where(pos[:, None], np.log(np.where(pos[:, None], q, 1.0)), 0.0)
    ent = float(np.sum(p[pos] * np.log(p[pos])))
    return ent - (p[:, None] * logs).sum(axis=0)


def kl_projection(model: ParametricModel, empirical) -> KLProjection:
    """theta minimizing KL(empirical || f(.|theta)) over the closed parameter interval."""
    _require_curve(model)
    p = empirical.array if isinstance(empirical, ProbVector) else ProbVector(tuple(empirical)).array
    lo, hi = model.lower[0], model.upper[0]
    grid = np.linspace(lo, hi, int(round((hi - lo) / KL_GRID_STEP)) + 1)
    kl = _kl_terms(p, _pmf_grid(model, grid))
    kl[~np.isfinite(kl)] = np.inf
    i = int(np.argmin(kl))  # first minimum: ties go to the smaller theta
    if i in (0, grid.size - 1):
        theta = grid[i]
        boundary = True
    else:
        boundary = False
        a, b = grid[i - 1], grid[i + 1]

        def dkl(t):
            # derivative of KL is -E_p[score]
            return -sum(pw * model.score(x, np.array([t]))[0]
                        for x, pw in zip(model.outcomes.labels, p) if pw > 0)

        if model.score is not None and dkl(a) < 0 < dkl(b):
            theta = optimize.brentq(dkl, a, b, xtol=1e-15, rtol=4 * np.finfo(float).eps)
        else:
            def obj(t):
                return float(_kl_terms(p, _pmf_grid(model, np.array([t])))[0])
            theta = optimize.minimize_scalar(obj, bounds=(a, b), method="bounded",
                                             options={"xatol": 1e-12}).x
    t = np.array([float(theta)])
    q = model.probs(t, closed=True)
    div = float(_kl_terms(p, q[:, None])[0])
    return KLProjection(t, ProbVector(tuple(q / q.sum())), div, boundary)


def orthogonality(model: ParametricModel, theta) -> np.ndarray:
    """Boolean matrix: parameter directions i, j (i != j) are Fisher-orthogonal."""
    if model.dim < 2:
        raise ValueError("orthogonality needs d >= 2")
    info = fisher_information(model, theta).entries
    out = np.abs(info) < ORTHO_TOL
    np.fill_diagonal(out, False)
    return out


def model_curve(model: ParametricModel, size: int = 200) -> np.ndarray:
    """Sphere coordinates along a 1-d model, one row per parameter value."""
    _require_curve(model)
    lo, hi = model.lower[0], model.upper[0]
    grid = np.linspace(lo, hi, size)
    return np.column_stack([grid, 2.0 * np.sqrt(_pmf_grid(model, grid).T)])
