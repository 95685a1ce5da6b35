from __future__ import annotations

import math

import numpy as np
import numpy.testing as npt
import pytest
from hypothesis import given
from hypothesis import strategies as st

from fisherkit.models import (BUILTIN_NAMES, CountVector, DomainError, OutcomeSpace, ProbVector,
                              Reparameterization, UnknownModelError, bent_coin_map, builtin_model,
                              loglik_counts, loglik_iid, model_from_json, reparameterize,
                              sufficient_counts)

FINITE = ["bernoulli", "mpt-individual-word", "mpt-only-mixed", "categorical-beta",
          "categorical-gamma", "bent-coin"]


class TestContainers:
    def test_probvector_rejects_bad_sum(self):
        with pytest.raises(ValueError):
            ProbVector((0.5, 0.6))

    def test_probvector_rejects_negative(self):
        with pytest.raises(ValueError):
            ProbVector((1.5, -0.5))

    def test_counts(self):
        c = CountVector((12, 1, 17))
        assert c.n == 30
        npt.assert_allclose(c.empirical().array, [0.4, 1 / 30, 17 / 30])

    def test_counts_json_roundtrip(self):
        c = CountVector((3, 4))
        assert CountVector.from_json(c.to_json()) == c
        with pytest.raises(ValueError):
            CountVector.from_json({"counts": [1, 2], "n": 4})

    def test_empirical_needs_data(self):
        with pytest.raises(ValueError):
            CountVector((0, 0)).empirical()

    def test_outcome_space(self):
        with pytest.raises(ValueError):
            OutcomeSpace.finite(["a"])
        with pytest.raises(ValueError):
            OutcomeSpace.continuous(1.0, 0.0)
        assert OutcomeSpace.finite("LMR").index("M") == 1


class TestRegistry:
    @pytest.mark.parametrize("name", [n for n in BUILTIN_NAMES if n != "binomial"])
    def test_builtin(self, name):
        m = builtin_model(name)
        assert m.dim in (1, 2)

    def test_binomial_needs_n(self):
        with pytest.raises(ValueError):
            builtin_model("binomial")
        assert builtin_model("binomial", n=10).outcomes.size == 11

    def test_unknown_lists_valid(self):
        with pytest.raises(UnknownModelError, match="bernoulli"):
            builtin_model("poisson")

    def test_aliases(self):
        assert builtin_model("mpt1").name == "mpt-individual-word"
        assert builtin_model("M2").name == "mpt-only-mixed"

    def test_json(self):
        assert model_from_json({"name": "laplace", "params": {"b": 2.0}}).params["b"] == 2.0


class TestDomain:
    def test_boundary_rejected(self):
        m = builtin_model("bernoulli")
        for t in (0.0, 1.0, -0.1):
            with pytest.raises(DomainError):
                m.check(t)

    def test_simplex_constraint(self):
        m = builtin_model("categorical-beta")
        assert m.in_domain([0.3, 0.3])
        assert not m.in_domain([0.6, 0.6])

    def test_wrong_dimension(self):
        with pytest.raises(DomainError):
            builtin_model("gaussian").check([0.0])

    def test_closed_pmf_at_boundary(self):
        npt.assert_allclose(builtin_model("m2").probs([0.0], closed=True), [0.5, 0.0, 0.5])


class TestPmf:
    @pytest.mark.parametrize("name", FINITE)
    @given(u=st.floats(0.01, 0.99), v=st.floats(0.01, 0.99))
    def test_sums_to_one(self, name, u, v):
        m = builtin_model(name)
        if m.dim == 1:
            lo, hi = m.lower[0], m.upper[0]
            theta = [lo + u * (hi - lo)]
        else:
            theta = [u, v * (1 - u)]
        assert abs(m.probs(theta).sum() - 1.0) < 1e-12

    def test_mpt_values(self):
        npt.assert_allclose(builtin_model("m1").probs([0.5]), [0.25, 0.5, 0.25])
        npt.assert_allclose(builtin_model("m2").probs([1 / 3]), [1 / 3] * 3)

    def test_binomial_pmf(self):
        from scipy import stats
        m = builtin_model("binomial", n=10)
        npt.assert_allclose(m.probs([0.3]), stats.binom.pmf(np.arange(11), 10, 0.3), rtol=1e-12)

    def test_gamma_equals_beta_pmf(self):
        g, b = builtin_model("categorical-gamma"), builtin_model("categorical-beta")
        g1, g2 = 0.2, 0.6
        npt.assert_allclose(g.probs([g1, g2]), b.probs([g1, (1 - g1) * g2]))


class TestData:
    def test_sufficient_counts(self):
        m = builtin_model("m1")
        assert sufficient_counts(m, list("MRMLLMMM")).counts == (2, 5, 1)

    def test_loglik_zero_counts(self):
        m = builtin_model("m2")
        assert loglik_counts(m, CountVector((3, 0, 3)), [0.0], closed=True) == pytest.approx(
            6 * math.log(0.5))

    def test_loglik_iid_matches_counts(self):
        m = builtin_model("bernoulli")
        raw = [1, 0, 1, 1, 0, 1, 1, 1, 0, 1]
        assert loglik_iid(m, raw, 0.7) == pytest.approx(7 * math.log(0.7) + 3 * math.log(0.3))


class TestReparameterization:
    def test_bent_coin_roundtrip(self):
        m = bent_coin_map()
        m.validate()
        phi = np.linspace(-3, 3, 13)
        npt.assert_allclose(m.inverse(m.forward(phi)), phi, atol=1e-12)

    def test_non_monotone_rejected(self):
        bad = Reparameterization(forward=lambda p: np.asarray(p) ** 2, inverse=np.sqrt,
                                 derivative=lambda p: 2 * np.asarray(p), domain=(-1.0, 1.0),
                                 image=(0.0, 1.0), name="square")
        with pytest.raises(ValueError, match="monotone"):
            bad.validate()

    def test_bent_coin_pmf(self):
        m = builtin_model("bent-coin")
        npt.assert_allclose(m.probs([0.0]), [0.5, 0.5])

    def test_reparameterize_needs_1d(self):
        with pytest.raises(ValueError):
            reparameterize(builtin_model("gaussian"), bent_coin_map())
