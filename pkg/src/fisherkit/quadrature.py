"""Adaptive quadrature helpers.

Integrals over bounded intervals are taken after the substitution
``x = a + (b - a) sin^2(u)``, which turns inverse-square-root endpoint
singularities (the shape of sqrt(Fisher information) for every bounded
builtin model) into smooth integrands.  The adaptive rule itself is
QUADPACK's Gauss-Kronrod via :func:`scipy.integrate.quad`.
"""
from __future__ import annotations

import math
import warnings
from typing import Callable, Sequence

import numpy as np
from scipy import integrate

EPSABS = 1e-9
EPSREL = 1e-7


class QuadratureError(RuntimeError):
    """Adaptive quadrature did not reach the requested tolerance."""

    def __init__(self, message: str, achieved: float):
        super().__init__(f"{message} (achieved error estimate {achieved:.3g})")
        self.achieved = achieved


def quad(fn: Callable[[float], float], a: float, b: float, *, points: Sequence[float] = (),
         epsabs: float = EPSABS, epsrel: float = EPSREL, limit: int = 256,
         what: str = "integral") -> float:
    """Gauss-Kronrod quadrature that raises instead of warning."""
    pts = sorted(p for p in points if a < p < b) or None
    with warnings.catch_warnings():
        warnings.simplefilter("error", integrate.IntegrationWarning)
        try:
            if pts is not None and math.isfinite(a) and math.isfinite(b):
                value, err = integrate.quad(fn, a, b, points=pts, epsabs=epsabs,
                                            epsrel=epsrel, limit=limit)
            else:
                value, err = integrate.quad(fn, a, b, epsabs=epsabs, epsrel=epsrel, limit=limit)
        except integrate.IntegrationWarning as exc:
            # rerun quietly to report what was achieved
            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                _, err = integrate.quad(fn, a, b, epsabs=epsabs, epsrel=epsrel, limit=limit)
            raise QuadratureError(f"{what} on [{a}, {b}] failed to converge: {exc}", err) from None
    if not math.isfinite(value):
        raise QuadratureError(f"{what} on [{a}, {b}] is not finite", math.inf)
    return value


def sin2_map(a: float, b: float):
    """x(u) and dx/du for x = a + (b - a) sin^2(u), u in [0, pi/2]."""
    width = b - a

    def x_of(u):
        return a + width * np.sin(u) ** 2

    def jac(u):
        return width * np.sin(2.0 * u)

    def u_of(x):
        return np.arcsin(np.sqrt(np.clip((np.asarray(x) - a) / width, 0.0, 1.0)))

    return x_of, jac, u_of


def integrate_endpoint_singular(fn: Callable[[float], float], a: float, b: float,
                                what: str = "integral", **kw) -> float:
    """Integrate fn over the open interval (a, b), tolerating x^{-1/2}-type ends."""
    if not (math.isfinite(a) and math.isfinite(b)):
        raise QuadratureError(f"{what}: interval ({a}, {b}) is unbounded", math.inf)
    x_of, jac, _ = sin2_map(a, b)

    def g(u):
        if u <= 0.0 or u >= math.pi / 2:
            return 0.0
        x = float(x_of(u))
        if not a < x < b:
            return 0.0
        return fn(x) * float(jac(u))

    return quad(g, 0.0, math.pi / 2, what=what, **kw)


_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(10)


def cell_integrals(fn: Callable[[np.ndarray], np.ndarray], edges: np.ndarray,
                   a: float, b: float) -> np.ndarray:
    """Integral of a vectorised fn over each cell [edges[i], edges[i+1]].

    Each cell is mapped into the sin^2 coordinate of the whole interval (a, b)
    and integrated by 10-point Gauss-Legendre there, so cells touching an
    endpoint with an x^{-1/2} singularity are still accurate.
    """
    x_of, jac, u_of = sin2_map(a, b)
    u = u_of(edges)
    lo, hi = u[:-1], u[1:]
    half = 0.5 * (hi - lo)
    mid = 0.5 * (hi + lo)
    uu = mid[:, None] + half[:, None] * _GL_NODES[None, :]
    vals = fn(x_of(uu)) * jac(uu)
    return (vals * _GL_WEIGHTS[None, :]).sum(axis=1) * half
