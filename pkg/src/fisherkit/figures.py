"""Deterministic CSV data behind the standard plots (no rendering)."""
from __future__ import annotations

import csv
import io
import math
from typing import Callable, Iterable, Sequence

import numpy as np

from . import bayes, geometry, mdl
from .models import CountVector, bent_coin_map, builtin_model

FIGURES = (
    "fisher-bernoulli", "likelihood", "posterior-theta", "posterior-phi", "jeffreys-prior",
    "sphere-bernoulli", "sphere-mpt", "noncurve", "classification",
)


def fmt(v) -> str:
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".17g")
    if isinstance(v, (np.integer,)):
        return str(int(v))
    return str(v)


def to_csv(header: Sequence[str], rows: Iterable[Sequence]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([fmt(v) for v in r])
    return buf.getvalue()


def write_csv(path: str, header: Sequence[str], rows: Iterable[Sequence]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        fh.write(to_csv(header, rows))


def _open_grid(resolution: int, lo: float = 0.0, hi: float = 1.0) -> np.ndarray:
    return bayes.grid_nodes((lo, hi), max(resolution, bayes.MIN_GRID))


def _fisher_bernoulli(res, counts):
    t = _open_grid(res)
    return ("theta", "information"), zip(t, 1.0 / (t * (1.0 - t)))


def _likelihood(res, counts):
    y = counts or CountVector((3, 7))
    curve = bayes.log_likelihood_curve(builtin_model("bernoulli"), y)
    t = _open_grid(res)
    return ("theta", "likelihood"), zip(t, np.exp(curve(t)))


def _posterior_theta(res, counts):
    y = counts or CountVector((3, 7))
    prior = bayes.uniform_prior((0.0, 1.0), max(res, bayes.MIN_GRID))
    post = bayes.grid_posterior(prior, builtin_model("bernoulli"), y)
    return ("theta", "prior", "posterior"), zip(prior.nodes, prior.density, post.density)


def _posterior_phi(res, counts):
    y = counts or CountVector((3, 7))
    size = max(res, bayes.MIN_GRID)
    prior = bayes.uniform_prior((-math.pi, math.pi), size)
    post = bayes.grid_posterior(prior, builtin_model("bent-coin"), y)
    m = bent_coin_map()
    pt, qt = bayes.pushforward(prior, m), bayes.pushforward(post, m)
    return (("phi", "prior_phi", "posterior_phi", "theta", "prior_theta", "posterior_theta"),
            zip(prior.nodes, prior.density, post.density, pt.nodes, pt.density, qt.density))


def _jeffreys(res, counts):
    size = max(res, bayes.MIN_GRID)
    jt = bayes.jeffreys_prior(builtin_model("bernoulli"), size)
    jp = bayes.jeffreys_prior(builtin_model("bent-coin"), size)
    return ("theta", "jeffreys_theta", "phi", "jeffreys_phi"), zip(jt.nodes, jt.density,
                                                                   jp.nodes, jp.density)


def _sphere_bernoulli(res, counts):
    c = geometry.model_curve(builtin_model("bernoulli"), res)
    return ("theta", "m_0", "m_1"), c.tolist()


def _sphere_mpt(res, counts):
    rows = []
    for key in ("mpt-individual-word", "mpt-only-mixed"):
        c = geometry.model_curve(builtin_model(key), res)
        rows.extend([key, *r] for r in c.tolist())
    return ("model", "param", "m_L", "m_M", "m_R"), rows


def _noncurve(res, counts, n=30):
    curve = mdl.non_decision_curve(builtin_model("m1"), builtin_model("m2"), n, res)
    return ("p_L", "p_M", "p_R"), curve.to_rows()


def _classification(res, counts, n=30):
    Y, verdicts = mdl.classification_map(builtin_model("m1"), builtin_model("m2"), n)
    return ("y_L", "y_M", "y_R", "preferred"), ([*y, v] for y, v in zip(Y.tolist(), verdicts))


_BUILDERS: dict[str, Callable] = {
    "fisher-bernoulli": _fisher_bernoulli, "likelihood": _likelihood,
    "posterior-theta": _posterior_theta, "posterior-phi": _posterior_phi,
    "jeffreys-prior": _jeffreys, "sphere-bernoulli": _sphere_bernoulli,
    "sphere-mpt": _sphere_mpt, "noncurve": _noncurve, "classification": _classification,
}


def figure_data(name: str, resolution: int = 1000, counts: CountVector | None = None,
                n: int = 30) -> str:
    if name not in _BUILDERS:
        raise ValueError(f"unknown figure {name!r}; choose from {', '.join(FIGURES)}")
    if resolution < 2:
        raise ValueError("resolution must be at least 2")
    kw = {"n": n} if name in ("noncurve", "classification") else {}
    header, rows = _BUILDERS[name](resolution, counts, **kw)
    return to_csv(header, rows)
