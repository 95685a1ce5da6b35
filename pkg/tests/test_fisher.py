from __future__ import annotations

import math

import numpy as np
import numpy.testing as npt
import pytest
from hypothesis import given
from hypothesis import strategies as st

from fisherkit.fisher import (FisherMatrix, fisher_hessian_form, fisher_iid, fisher_information,
                              fisher_score_form, score_mean, statistic_information)
from fisherkit.models import DomainError, builtin_model


def random_point(model, rng):
    if model.dim == 2 and model.name.startswith("categorical"):
        u = rng.uniform(0.05, 0.9)
        return np.array([u, rng.uniform(0.05, 0.9) * (1 - u)])
    if model.name == "gaussian" and model.dim == 2:
        return np.array([rng.normal(), rng.uniform(0.5, 2.0)])
    lo, hi = model.lower[0], model.upper[0]
    if math.isfinite(lo):
        return np.array([lo + (hi - lo) * rng.uniform(0.05, 0.95)])
    return np.array([rng.normal(scale=3.0)])


class TestClosedForms:
    def test_bernoulli(self):
        assert fisher_information(builtin_model("bernoulli"), 0.5).scalar == pytest.approx(4.0)

    def test_gaussian_matrix(self):
        npt.assert_allclose(fisher_information(builtin_model("gaussian"), [0, 1]).entries,
                            [[1, 0], [0, 2]])

    def test_categorical_beta(self):
        info = fisher_information(builtin_model("categorical-beta"), [1 / 3, 1 / 3])
        npt.assert_allclose(info.entries, [[6, 3], [3, 6]])
        assert info.det == pytest.approx(27.0)

    @given(b1=st.floats(0.02, 0.96), frac=st.floats(0.02, 0.98))
    def test_categorical_beta_determinant(self, b1, frac):
        b2 = frac * (1 - b1)
        b3 = 1 - b1 - b2
        info = fisher_information(builtin_model("categorical-beta"), [b1, b2])
        assert info.det == pytest.approx(1 / (b1 * b2 * b3), rel=1e-9)

    def test_bent_coin(self):
        phi = 0.6 * math.pi
        closed = 3 * phi**2 / math.sqrt(math.pi**6 - phi**6)
        got = math.sqrt(fisher_information(builtin_model("bent-coin"), phi).scalar)
        assert got == pytest.approx(closed, rel=1e-12)

    def test_boundary_raises(self):
        with pytest.raises(DomainError):
            fisher_information(builtin_model("bernoulli"), 1.0)


class TestFisherMatrix:
    def test_rejects_asymmetric(self):
        with pytest.raises(ValueError):
            FisherMatrix(np.array([[1.0, 2.0], [0.0, 1.0]]))

    def test_rejects_indefinite(self):
        with pytest.raises(ValueError):
            FisherMatrix(np.array([[1.0, 2.0], [2.0, 1.0]]))

    def test_scalar_of_matrix(self):
        with pytest.raises(ValueError):
            FisherMatrix(np.eye(2)).scalar


MODELS = ["bernoulli", "mpt-individual-word", "mpt-only-mixed", "categorical-beta",
          "categorical-gamma", "gaussian", "laplace", "cauchy", "bent-coin"]


class TestIdentities:
    @pytest.mark.parametrize("name", MODELS)
    def test_score_mean_zero(self, name):
        m = builtin_model(name)
        rng = np.random.default_rng(3)
        for _ in range(3):
            npt.assert_allclose(score_mean(m, random_point(m, rng)), 0.0, atol=1e-7)

    @pytest.mark.parametrize("name", MODELS)
    def test_numeric_matches_analytic_score_form(self, name):
        m = builtin_model(name)
        t = random_point(m, np.random.default_rng(5))
        a = fisher_score_form(m, t, "analytic").entries
        b = fisher_score_form(m, t, "numeric").entries
        npt.assert_allclose(b, a, rtol=1e-5, atol=1e-8)

    @pytest.mark.parametrize("name", MODELS)
    def test_score_form_matches_closed_form(self, name):
        m = builtin_model(name)
        t = random_point(m, np.random.default_rng(11))
        npt.assert_allclose(fisher_score_form(m, t).entries, m.fisher(t), rtol=1e-6, atol=1e-9)

    def test_laplace_hessian_falls_back(self):
        m = builtin_model("laplace")
        assert fisher_hessian_form(m, 0.3).scalar == pytest.approx(1.0, rel=1e-6)

    @given(theta=st.floats(0.02, 0.98), n=st.integers(1, 500))
    def test_iid_additivity(self, theta, n):
        m = builtin_model("bernoulli")
        assert fisher_iid(m, theta, n).scalar == pytest.approx(n / (theta * (1 - theta)))

    def test_iid_rejects_bad_n(self):
        with pytest.raises(ValueError):
            fisher_iid(builtin_model("bernoulli"), 0.5, 0)


class TestSufficiency:
    @pytest.mark.parametrize("theta", np.linspace(0.05, 0.95, 20))
    def test_binomial_keeps_information(self, theta):
        n = 10
        res = statistic_information(builtin_model("bernoulli"), builtin_model("binomial", n=n),
                                    theta, n)
        assert res.sufficient
        assert abs(res.statistic_information - res.sample_information) <= 1e-8 * res.sample_information

    def test_first_observation_loses_information(self):
        m = builtin_model("bernoulli")
        res = statistic_information(m, m, 0.3, 10)
        assert not res.sufficient
        assert res.sample_information == pytest.approx(10 * res.statistic_information)
