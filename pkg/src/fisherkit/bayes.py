"""Grid-based priors and posteriors on a 1-d parameter interval.

A :class:`GridDistribution` stores, for each node, the density value and the
probability of the node's cell (cells are bounded by midpoints between nodes
and the two domain endpoints).  Cell masses are integrated rather than read
off the density, because Jeffreys-type densities blow up at the endpoints and
trapezoid sums over such densities converge far too slowly.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .fisher import fisher_information
from .models import CountVector, ParametricModel, Reparameterization, as_counts
from .quadrature import QuadratureError, cell_integrals, integrate_endpoint_singular

DEFAULT_GRID = 2048
MIN_GRID = 64
NODE_OFFSET = 1e-9
MASS_TOL = 1e-6


@dataclass(frozen=True)
class IntervalProbability:
    interval: tuple[float, float]
    mass: float

    def __post_init__(self):
        if not -1e-12 <= self.mass <= 1.0 + 1e-12:
            raise ValueError(f"mass {self.mass} is not a probability")

    def to_json(self) -> dict:
        return {"interval": list(self.interval), "mass": self.mass, "mass_2dp": round(self.mass, 2)}


@dataclass(frozen=True)
class GridDistribution:
    nodes: np.ndarray
    density: np.ndarray
    masses: np.ndarray
    domain: tuple[float, float]
    density_fn: Optional[Callable[[np.ndarray], np.ndarray]] = field(default=None, compare=False)
    normalizer: Optional[float] = None
    label: str = ""

    def __post_init__(self):
        x = np.asarray(self.nodes, dtype=float)
        d = np.asarray(self.density, dtype=float)
        m = np.asarray(self.masses, dtype=float)
        if x.ndim != 1 or x.size < 2 or not np.all(np.diff(x) > 0):
            raise ValueError("nodes must be strictly increasing")
        if d.shape != x.shape or m.shape != x.shape:
            raise ValueError("nodes, density and masses must have equal length")
        if np.any(d < 0) or np.any(m < 0) or not np.all(np.isfinite(m)):
            raise ValueError("density and masses must be nonnegative and finite")
        lo, hi = self.domain
        if not (lo < x[0] and x[-1] < hi):
            raise ValueError("nodes must lie inside the open domain")
        total = math.fsum(m)
        if abs(total - 1.0) > MASS_TOL:
            raise ValueError(f"cell masses sum to {total}, not 1")
        for name, arr in (("nodes", x), ("density", d), ("masses", m)):
            arr = arr.copy()
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def size(self) -> int:
        return self.nodes.size

    @property
    def edges(self) -> np.ndarray:
        return _edges(self.nodes, self.domain)

    def cdf(self, x) -> np.ndarray:
        """Piecewise-linear CDF through the exact cumulative masses at cell edges."""
        cum = np.concatenate([[0.0], np.cumsum(self.masses)])
        cum /= cum[-1]
        return np.interp(np.asarray(x, dtype=float), self.edges, cum)

    def trapezoid_total(self) -> float:
        return float(np.trapezoid(self.density, self.nodes))

    def to_rows(self) -> list[tuple[float, float]]:
        return list(zip(self.nodes.tolist(), self.density.tolist()))


def _edges(nodes: np.ndarray, domain) -> np.ndarray:
    mid = 0.5 * (nodes[1:] + nodes[:-1])
    return np.concatenate([[domain[0]], mid, [domain[1]]])


def grid_nodes(domain, size: int = DEFAULT_GRID) -> np.ndarray:
    lo, hi = map(float, domain)
    if not (math.isfinite(lo) and math.isfinite(hi) and lo < hi):
        raise ValueError(f"grid needs a bounded interval, got {domain}")
    if size < MIN_GRID:
        raise ValueError(f"grid size must be at least {MIN_GRID}")
    delta = (hi - lo) * NODE_OFFSET
    return np.linspace(lo + delta, hi - delta, size)


def _vectorized(fn: Callable, xs: np.ndarray) -> np.ndarray:
    """Evaluate a parameter-point function at many 1-d points."""
    xs = np.asarray(xs, dtype=float)
    flat = xs.ravel()
    try:
        out = np.asarray(fn(flat[None, :]), dtype=float).reshape(-1)
        if out.size == flat.size:
            return out.reshape(xs.shape)
    except (ValueError, IndexError, TypeError):
        pass
    return np.array([float(np.asarray(fn(np.array([v]))).ravel()[0]) for v in flat]).reshape(xs.shape)


def from_density(density_fn: Callable[[np.ndarray], np.ndarray], domain, size: int = DEFAULT_GRID,
                 normalizer: Optional[float] = None, label: str = "") -> GridDistribution:
    """Grid a normalized density; cell masses by Gauss-Legendre in the sin^2 coordinate."""
    nodes = grid_nodes(domain, size)
    edges = _edges(nodes, domain)
    masses = cell_integrals(density_fn, edges, *domain)
    masses = np.clip(masses, 0.0, None)
    total = math.fsum(masses)
    if abs(total - 1.0) > MASS_TOL:
        raise QuadratureError(f"density for {label or 'grid'} integrates to {total}, not 1",
                              abs(total - 1.0))
    return GridDistribution(nodes, density_fn(nodes), masses / total, tuple(map(float, domain)),
                            density_fn, normalizer, label)


# ---------------------------------------------------------------------------
# priors
# ---------------------------------------------------------------------------


def uniform_prior(domain, size: int = DEFAULT_GRID) -> GridDistribution:
    lo, hi = map(float, domain)
    level = 1.0 / (hi - lo)
    return from_density(lambda x: np.full(np.shape(x), level), (lo, hi), size,
                        normalizer=hi - lo, label="uniform")


def sqrt_information(model: ParametricModel) -> Callable[[np.ndarray], np.ndarray]:
    if model.dim != 1:
        raise ValueError("Jeffreys priors here are 1-d; use geometry.model_volume for d = 2")
    if model.fisher is not None:
        return lambda x: np.sqrt(_vectorized(lambda t: model.fisher(t)[0, 0], x))
    return lambda x: np.sqrt(np.vectorize(lambda v: fisher_information(model, v).scalar)(x))


def jeffreys_normalizer(model: ParametricModel) -> float:
    """V = integral of sqrt(I(theta)) over the open parameter interval."""
    root = sqrt_information(model)
    lo, hi = model.lower[0], model.upper[0]
    if not (math.isfinite(lo) and math.isfinite(hi)):
        raise QuadratureError(f"sqrt Fisher information of {model.name} is constant on an "
                              "unbounded domain and cannot be normalized", math.inf)
    return integrate_endpoint_singular(lambda t: float(root(np.array([t]))[0]), lo, hi,
                                       what=f"Jeffreys normalizer for {model.name}")


def jeffreys_prior(model: ParametricModel, size: int = DEFAULT_GRID) -> GridDistribution:
    root = sqrt_information(model)
    V = jeffreys_normalizer(model)
    domain = (model.lower[0], model.upper[0])
    return from_density(lambda x: root(x) / V, domain, size, normalizer=V, label="jeffreys")


# ---------------------------------------------------------------------------
# updating and transforming
# ---------------------------------------------------------------------------


def log_likelihood_curve(model: ParametricModel, counts: CountVector) -> Callable:
    """theta -> log f(y | theta) for count data, vectorized over 1-d theta."""
    y = counts.array

    def single(t):
        p = model.probs(t, closed=True)
        with np.errstate(divide="ignore"):
            return float(np.sum(np.where(y > 0, y * np.log(np.where(y > 0, p, 1.0)), 0.0)))

    def curve(xs):
        xs = np.asarray(xs, dtype=float)
        try:
            p = np.asarray(model.pmf(xs.ravel()[None, :]), dtype=float)
            if p.shape == (y.size, xs.size):
                with np.errstate(divide="ignore"):
                    lp = np.where(y[:, None] > 0, np.log(np.where(y[:, None] > 0, p, 1.0)), 0.0)
                return (y[:, None] * lp).sum(axis=0).reshape(xs.shape)
        except (ValueError, IndexError, TypeError):
            pass
        return np.vectorize(single)(xs)

    return curve


def grid_posterior(prior: GridDistribution, model: ParametricModel, data) -> GridDistribution:
    """Prior times likelihood, normalized; computed in log space."""
    if model.dim != 1 or not model.is_finite:
        raise ValueError("grid_posterior needs a 1-d finite-outcome model")
    domain = (model.lower[0], model.upper[0])
    if not np.allclose(domain, prior.domain):
        raise ValueError(f"prior domain {prior.domain} differs from model domain {domain}")
    counts = as_counts(model, data)
    loglik = log_likelihood_curve(model, counts)
    shift = float(np.max(loglik(prior.nodes)))

    def lik(x):
        return np.exp(loglik(x) - shift)

    edges = prior.edges
    # prior cell mass times a Simpson average of the (smooth) likelihood over the
    # cell; robust even when the prior density is singular inside a cell
    unnorm = prior.masses * (lik(edges[:-1]) + 4.0 * lik(prior.nodes) + lik(edges[1:])) / 6.0
    Z = math.fsum(unnorm)
    if not Z > 0:
        raise ValueError("zero marginal likelihood: data impossible under every grid point")
    masses = np.clip(unnorm, 0.0, None) / Z
    if prior.density_fn is not None:
        pf = prior.density_fn

        def post_fn(x):
            return pf(x) * lik(x) / Z
        density = post_fn(prior.nodes)
    else:
        post_fn = None
        density = prior.density * lik(prior.nodes) / Z
    return GridDistribution(prior.nodes, density, masses, prior.domain, post_fn, None,
                            f"posterior[{prior.label}]")


def pushforward(dist: GridDistribution, mapping: Reparameterization,
                size: Optional[int] = None) -> GridDistribution:
    """Distribution of theta = mapping.forward(phi) for phi ~ dist, on a uniform theta grid."""
    mapping.validate()
    if not np.allclose(mapping.domain, dist.domain):
        raise ValueError(f"map domain {mapping.domain} differs from distribution domain {dist.domain}")
    image = tuple(map(float, mapping.image))
    nodes = grid_nodes(image, size or dist.size)
    edges = _edges(nodes, image)
    inner = mapping.inverse(edges[1:-1])
    increasing = mapping.forward(np.array([dist.nodes[-1]]))[0] > mapping.forward(
        np.array([dist.nodes[0]]))[0]
    cum = dist.cdf(inner)
    cum = np.concatenate([[0.0], cum, [1.0]]) if increasing else np.concatenate([[0.0], 1.0 - cum, [1.0]])
    masses = np.clip(np.diff(cum), 0.0, None)
    masses /= math.fsum(masses)
    if dist.density_fn is not None:
        g = dist.density_fn

        def new_fn(x):
            x = np.asarray(x, dtype=float)
            return g(mapping.inverse(x)) * np.abs(mapping.inverse_derivative(x))
        density = new_fn(nodes)
    else:
        new_fn = None
        density = masses / np.diff(edges)
    return GridDistribution(nodes, density, masses, image, new_fn, dist.normalizer,
                            f"{dist.label}@{mapping.name}")


def interval_probability(dist: GridDistribution, interval) -> IntervalProbability:
    a, b = map(float, interval)
    lo, hi = dist.domain
    if not a < b:
        raise ValueError("interval needs a < b")
    if a < lo or b > hi:
        raise ValueError(f"interval ({a}, {b}) extends outside the domain ({lo}, {hi})")
    mass = float(dist.cdf(b) - dist.cdf(a))
    return IntervalProbability((a, b), min(max(mass, 0.0), 1.0))


def quantile(dist: GridDistribution, q: float) -> float:
    if not 0.0 < q < 1.0:
        raise ValueError("q must lie in (0, 1)")
    cum = np.concatenate([[0.0], np.cumsum(dist.masses)])
    cum /= cum[-1]
    edges = dist.edges
    k = int(np.searchsorted(cum, q, side="left"))
    k = min(max(k, 1), len(cum) - 1)
    c0, c1 = cum[k - 1], cum[k]
    frac = 0.0 if c1 == c0 else (q - c0) / (c1 - c0)
    return float(edges[k - 1] + frac * (edges[k] - edges[k - 1]))
