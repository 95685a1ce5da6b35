"""Model selection by description length: AIC, BIC, FIA and exact NML (natural logs)."""
from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Optional, Sequence

import numpy as np
from scipy import special

from .models import CountVector, ParametricModel, as_counts, builtin_model

TIE_TOLERANCE = 0.5
MAX_ENUMERATION = 10**4
MAX_OUTCOMES = 6
CRITERIA = ("AIC", "BIC", "FIA", "NML-DL")


def worker_count() -> int:
    raw = os.environ.get("FISHERKIT_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


@dataclass(frozen=True)
class CriterionValue:
    model: str
    criterion: str
    goodness_of_fit: float
    dimensionality: float
    geometric_complexity: float
    total: float

    def __post_init__(self):
        if self.goodness_of_fit < -1e-12:
            raise ValueError("goodness of fit must be nonnegative")
        if self.criterion == "FIA":
            parts = self.goodness_of_fit + self.dimensionality + self.geometric_complexity
            if abs(parts - self.total) > 1e-12 * max(1.0, abs(self.total)):
                raise ValueError("FIA total differs from the sum of its parts")

    def to_json(self) -> dict:
        return {"model": self.model, "criterion": self.criterion,
                "goodness_of_fit": self.goodness_of_fit, "dimensionality": self.dimensionality,
                "geometric_complexity": self.geometric_complexity, "total": self.total,
                "total_rounded": round(self.total)}


@dataclass(frozen=True)
class SelectionReport:
    values: tuple[CriterionValue, ...]
    preferred: str
    tie_tolerance: float = TIE_TOLERANCE

    @property
    def criterion(self) -> str:
        return self.values[0].criterion

    def to_json(self) -> dict:
        return {"criterion": self.criterion, "values": [v.to_json() for v in self.values],
                "preferred": self.preferred, "tie_tolerance": self.tie_tolerance}


# ---------------------------------------------------------------------------
# batched log-likelihood at the MLE
# ---------------------------------------------------------------------------


def _require_finite(model: ParametricModel):
    if not model.is_finite:
        raise ValueError(f"{model.name} has continuous outcomes; MDL criteria need finite outcomes")
    if model.mle is None:
        raise ValueError(f"{model.name} has no closed-form MLE")


def max_loglik(model: ParametricModel, Y: np.ndarray) -> np.ndarray:
    """log f(y | theta_hat(y)) for each column of Y (w x N), real counts allowed.

    Boundary MLEs are fine: 0 log 0 = 0.
    """
    _require_finite(model)
    Y = np.asarray(Y, dtype=float)
    if Y.ndim == 1:
        return max_loglik(model, Y[:, None])[0:1].reshape(())
    with np.errstate(invalid="ignore", divide="ignore"):
        theta = np.asarray(model.mle(Y), dtype=float)
        try:
            P = np.asarray(model.pmf(theta), dtype=float)
            if P.shape != Y.shape:
                raise ValueError
        except (ValueError, IndexError, TypeError):
            P = np.stack([model.probs(theta[:, j], closed=True) for j in range(Y.shape[1])], axis=1)
        return special.xlogy(Y, P).sum(axis=0)


def goodness_of_fit(model: ParametricModel, data) -> float:
    """-log f(y | theta_hat) for the observed sequence (no multinomial coefficient)."""
    counts = as_counts(model, data)
    if counts.n == 0:
        return 0.0
    return max(0.0, -float(max_loglik(model, counts.array)))


def _n(data_counts: CountVector) -> int:
    if data_counts.n == 0:
        raise ValueError("criteria undefined for n = 0")
    return data_counts.n


def aic(model: ParametricModel, data) -> CriterionValue:
    counts = as_counts(model, data)
    _n(counts)
    g = goodness_of_fit(model, counts)
    return CriterionValue(model.name, "AIC", g, 2.0 * model.dim, 0.0, 2.0 * g + 2.0 * model.dim)


def bic(model: ParametricModel, data) -> CriterionValue:
    counts = as_counts(model, data)
    n = _n(counts)
    g = goodness_of_fit(model, counts)
    pen = model.dim * math.log(n)
    return CriterionValue(model.name, "BIC", g, pen, 0.0, 2.0 * g + pen)


def _model_key(model: ParametricModel) -> tuple:
    return (model.name, tuple(sorted(model.params.items())))


@lru_cache(maxsize=64)
def _volume_for(key: tuple) -> float:
    from .geometry import model_volume
    name, params = key
    return model_volume(builtin_model(name, **dict(params)))


def log_volume(model: ParametricModel) -> float:
    try:
        v = _volume_for(_model_key(model))
    except ValueError:
        from .geometry import model_volume
        v = model_volume(model)
    return math.log(v)


def fia(model: ParametricModel, data) -> CriterionValue:
    """GoF + (d/2) log(n / 2 pi) + log V."""
    counts = as_counts(model, data)
    n = _n(counts)
    g = goodness_of_fit(model, counts)
    dim_term = 0.5 * model.dim * math.log(n / (2.0 * math.pi))
    geo = log_volume(model)
    return CriterionValue(model.name, "FIA", g, dim_term, geo, g + dim_term + geo)


# ---------------------------------------------------------------------------
# exact NML
# ---------------------------------------------------------------------------


def count_vectors(n: int, w: int) -> np.ndarray:
    """All compositions of n into w nonnegative parts, lexicographic, shape (w, N)."""
    if w == 1:
        return np.array([[n]])
    if w == 2:
        k = np.arange(n, -1, -1)
        return np.vstack([k, n - k])
    parts = []
    for first in range(n, -1, -1):
        rest = count_vectors(n - first, w - 1)
        parts.append(np.vstack([np.full(rest.shape[1], first), rest]))
    return np.hstack(parts)


def log_multinomial(Y: np.ndarray) -> np.ndarray:
    Y = np.asarray(Y, dtype=float)
    n = Y.sum(axis=0)
    return special.gammaln(n + 1) - special.gammaln(Y + 1).sum(axis=0)


def _chunk_terms(model: ParametricModel, n: int, w: int, first: int) -> np.ndarray:
    rest = count_vectors(n - first, w - 1)
    Y = np.vstack([np.full(rest.shape[1], first), rest])
    return log_multinomial(Y) + max_loglik(model, Y)


@dataclass(frozen=True)
class NMLResult:
    model: str
    n: int
    log_denominator: float
    n_vectors: int
    _model: ParametricModel = field(repr=False, compare=False, default=None)

    @property
    def denominator(self) -> float:
        return math.exp(self.log_denominator)

    def sequence_code(self, counts) -> float:
        """f(x^n | theta_hat) / denominator for one sequence with these counts."""
        c = as_counts(self._model, counts)
        self._check(c)
        return math.exp(float(max_loglik(self._model, c.array)) - self.log_denominator)

    def code(self, counts) -> float:
        """Probability of the count vector: multinomial(n; y) times the sequence code."""
        c = as_counts(self._model, counts)
        self._check(c)
        lm = float(log_multinomial(c.array[:, None])[0])
        return math.exp(lm + float(max_loglik(self._model, c.array)) - self.log_denominator)

    def _check(self, c: CountVector):
        if c.n != self.n:
            raise ValueError(f"NML table is for n = {self.n}, counts sum to {c.n}")

    def to_json(self) -> dict:
        return {"model": self.model, "n": self.n, "log_denominator": self.log_denominator,
                "denominator": self.denominator, "n_vectors": self.n_vectors}


def nml_exact(model: ParametricModel, n: int) -> NMLResult:
    """Exact NML normalizer: sum over count vectors of multinomial * max likelihood."""
    _require_finite(model)
    n = int(n)
    if not 1 <= n <= MAX_ENUMERATION:
        raise ValueError(f"exact NML enumeration needs 1 <= n <= {MAX_ENUMERATION}")
    w = model.outcomes.size
    if w > MAX_OUTCOMES:
        raise ValueError(f"exact NML enumeration supports at most {MAX_OUTCOMES} outcomes")
    firsts = list(range(n + 1))
    workers = worker_count()
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            chunks = list(pool.map(lambda f: _chunk_terms(model, n, w, f), firsts))
    else:
        chunks = [_chunk_terms(model, n, w, f) for f in firsts]
    # per-chunk log-sum-exp, combined in a fixed order: deterministic for any worker count
    partial = np.array([special.logsumexp(c) for c in chunks])
    log_den = float(special.logsumexp(partial))
    total = sum(c.size for c in chunks)
    return NMLResult(model.name, n, log_den, total, model)


@lru_cache(maxsize=128)
def _nml_cached(key: tuple, n: int) -> float:
    name, params = key
    return nml_exact(builtin_model(name, **dict(params)), n).log_denominator


def log_nml_denominator(model: ParametricModel, n: int) -> float:
    try:
        return _nml_cached(_model_key(model), int(n))
    except ValueError:
        return nml_exact(model, n).log_denominator


def description_length(model: ParametricModel, data) -> float:
    """-log of the NML sequence code: goodness of fit plus log normalizer."""
    counts = as_counts(model, data)
    n = _n(counts)
    return goodness_of_fit(model, counts) + log_nml_denominator(model, n)


def nml_criterion(model: ParametricModel, data) -> CriterionValue:
    counts = as_counts(model, data)
    n = _n(counts)
    g = goodness_of_fit(model, counts)
    comp = log_nml_denominator(model, n)
    return CriterionValue(model.name, "NML-DL", g, 0.0, comp, g + comp)


# ---------------------------------------------------------------------------
# selection
# ---------------------------------------------------------------------------

_DISPATCH = {"AIC": aic, "BIC": bic, "FIA": fia, "NML-DL": nml_criterion}


def verdict(names: Sequence[str], totals: Sequence[float], tie_tolerance: float = TIE_TOLERANCE) -> str:
    order = np.argsort(totals, kind="stable")
    best = order[0]
    if len(order) > 1 and totals[order[1]] - totals[best] <= tie_tolerance:
        return "tie"
    return names[best]


def select(models: Sequence[ParametricModel], data, criterion: str = "FIA",
           tie_tolerance: float = TIE_TOLERANCE) -> SelectionReport:
    crit = criterion.upper()
    if crit not in _DISPATCH:
        raise ValueError(f"criterion must be one of {', '.join(CRITERIA)}")
    if len(models) < 2:
        raise ValueError("select needs at least two models")
    labels = models[0].outcomes.labels
    if any(m.outcomes.labels != labels for m in models):
        raise ValueError("models must share one outcome space")
    values = tuple(_DISPATCH[crit](m, data) for m in models)
    names = [v.model for v in values]
    return SelectionReport(values, verdict(names, [v.total for v in values], tie_tolerance),
                           tie_tolerance)


# ---------------------------------------------------------------------------
# simplex maps
# ---------------------------------------------------------------------------


def _criterion_batch(model: ParametricModel, Y: np.ndarray, criterion: str) -> np.ndarray:
    """Criterion totals for many count columns sharing the same n."""
    n = float(Y[:, 0].sum())
    g = -max_loglik(model, Y)
    d = model.dim
    crit = criterion.upper()
    if crit == "FIA":
        return g + 0.5 * d * math.log(n / (2.0 * math.pi)) + log_volume(model)
    if crit == "BIC":
        return 2.0 * g + d * math.log(n)
    if crit == "AIC":
        return 2.0 * g + 2.0 * d
    if crit == "NML-DL":
        return g + log_nml_denominator(model, int(round(n)))
    raise ValueError(f"criterion must be one of {', '.join(CRITERIA)}")


def simplex_mesh(resolution: int) -> np.ndarray:
    """All (i, j, k) / resolution with i + j + k = resolution, shape (3, N)."""
    return count_vectors(resolution, 3) / float(resolution)


def classify(model_a: ParametricModel, model_b: ParametricModel, Y: np.ndarray,
             criterion: str = "FIA", tie_tolerance: float = TIE_TOLERANCE) -> np.ndarray:
    """Verdict per column of Y: model_a name, model_b name or 'tie'."""
    ta = _criterion_batch(model_a, Y, criterion)
    tb = _criterion_batch(model_b, Y, criterion)
    out = np.where(ta < tb, model_a.name, model_b.name).astype(object)
    out[np.abs(ta - tb) <= tie_tolerance] = "tie"
    return out


def classification_map(model_a: ParametricModel, model_b: ParametricModel, n: int,
                       criterion: str = "FIA", tie_tolerance: float = TIE_TOLERANCE):
    """Verdicts for every integer count vector with total n (496 of them at n = 30)."""
    Y = count_vectors(int(n), model_a.outcomes.size)
    return Y.T.astype(int), classify(model_a, model_b, Y, criterion, tie_tolerance)


@dataclass(frozen=True)
class NonDecisionCurve:
    points: np.ndarray
    n: float
    diagnostic: str = ""

    def to_rows(self):
        return [tuple(p) for p in self.points.tolist()]


def fia_difference(model_a: ParametricModel, model_b: ParametricModel, n: float,
                   P: np.ndarray) -> np.ndarray:
    """FIA_a - FIA_b at relaxed counts n * p for each column of P."""
    Y = n * np.asarray(P, dtype=float)
    return _criterion_batch(model_a, Y, "FIA") - _criterion_batch(model_b, Y, "FIA")


def non_decision_curve(model_a: ParametricModel, model_b: ParametricModel, n: float,
                       resolution: int = 200, tol: float = 1e-6) -> NonDecisionCurve:
    """Zero set of the FIA difference on the simplex, found along mesh lines.

    Lines run at fixed p_L (varying p_M) and at fixed p_M (varying p_L); each
    sign change between neighbouring mesh points is bisected to ``tol``.
    """
    if model_a.outcomes.size != 3 or model_b.outcomes.size != 3:
        raise ValueError("non-decision curves are drawn on the 3-outcome simplex")
    R = int(resolution)
    found = []
    nonzero = False

    def point(axis, fixed, s):
        # axis 0: fix p_L, vary p_M; axis 1: fix p_M, vary p_L
        if axis == 0:
            return np.array([fixed, s, 1.0 - fixed - s])
        return np.array([s, fixed, 1.0 - fixed - s])

    for axis in (0, 1):
        for i in range(R + 1):
            fixed = i / R
            s = np.arange(R - i + 1) / R
            P = np.stack([point(axis, fixed, v) for v in s], axis=1)
            P = np.clip(P, 0.0, 1.0)
            D = fia_difference(model_a, model_b, n, P)
            nonzero = nonzero or bool(np.any(np.abs(D) > 1e-12))
            for j in np.nonzero(np.sign(D[:-1]) * np.sign(D[1:]) < 0)[0]:
                lo, hi, dlo = s[j], s[j + 1], D[j]
                while hi - lo > tol:
                    mid = 0.5 * (lo + hi)
                    dm = fia_difference(model_a, model_b, n,
                                        np.clip(point(axis, fixed, mid), 0, 1)[:, None])[0]
                    if np.sign(dm) == np.sign(dlo):
                        lo, dlo = mid, dm
                    else:
                        hi = mid
                found.append(np.clip(point(axis, fixed, 0.5 * (lo + hi)), 0.0, 1.0))
            found.extend(np.clip(point(axis, fixed, s[j]), 0, 1) for j in np.nonzero(D == 0)[0])
    if not nonzero:
        return NonDecisionCurve(np.empty((0, 3)), n, "FIA difference vanishes on the whole mesh")
    if not found:
        return NonDecisionCurve(np.empty((0, 3)), n, "no sign change of the FIA difference on the mesh")
    pts = np.unique(np.round(np.array(found), 12), axis=0)
    return NonDecisionCurve(pts, n)
