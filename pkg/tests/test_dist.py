import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from mixppl.dist import (BooleanDistrib, Categorical, Density, Dirac, Gaussian, Mass, Mixture, Poisson,
                         TruncatedGauss, Unif, UniformChoice, cdf_at, evaluate_at, make_kernel, sample_kernel)
from mixppl.errors import InvalidParametersError, UnsupportedModelError

USA_GPA = Mixture([(TruncatedGauss(3, 1, 0, 4), 0.9998), (4.0, 0.0001), (0.0, 0.0001)])
INDIA_GPA = Mixture([(TruncatedGauss(5, 4, 0, 10), 0.989), (10.0, 0.009), (0.0, 0.002)])


def term(kernel, x, atol=0.0):
    return evaluate_at(kernel, None, x, atol)


class TestEvaluate:
    def test_atom_hit_is_a_mass(self):
        t = term(USA_GPA, 4.0)
        assert t.is_mass and t.value == pytest.approx(1e-4, abs=1e-15)

    def test_out_of_support_is_zero_density(self):
        assert term(USA_GPA, 5.0) == Density(0.0)

    def test_continuous_part(self):
        t = term(INDIA_GPA, 4.0)
        assert not t.is_mass
        assert t.value == pytest.approx(0.989 * stats.truncnorm(-2.5, 2.5, loc=5, scale=2).pdf(4.0), rel=1e-12)

    def test_two_country_india_kernel(self):
        india = Mixture([(Unif(0, 10), 0.99), (10.0, 0.01)])
        t = term(india, 4.0)
        assert not t.is_mass and t.value == pytest.approx(0.099, rel=1e-12)

    def test_gaussian_density(self):
        assert term(Gaussian(0, 1), 0.0).value == pytest.approx(0.3989422804014327, rel=1e-14)
        assert term(Gaussian(1, 4), 2.0).value == pytest.approx(stats.norm(1, 2).pdf(2.0), rel=1e-14)

    def test_discrete_kernels_report_masses(self):
        assert term(Poisson(5), 3) == Mass(stats.poisson(5).pmf(3))
        assert term(Poisson(5), 2.5) == Mass(0.0)
        assert term(BooleanDistrib(0.3), True).value == pytest.approx(0.3)
        assert term(Dirac(2.0), 3.0) == Mass(0.0)
        assert term(Categorical(["a", "b"], [0.25, 0.75]), "b") == Mass(0.75)

    def test_atom_tolerance(self):
        assert term(USA_GPA, 4.0 + 1e-12).tag == "density"
        assert term(USA_GPA, 4.0 + 1e-12, atol=1e-9).is_mass

    def test_truncated_outside_bounds(self):
        assert term(TruncatedGauss(0, 1, -1, 1), 1.5).value == 0.0

    def test_far_tail_truncation_is_finite(self):
        t = term(TruncatedGauss(0, 1, 30, 31), 30.0)
        assert np.isfinite(t.value) and t.value > 0

    def test_vector_parameters(self):
        is_mass, v = Gaussian(np.array([0.0, 1.0]), 1.0).evaluate(np.array([0.0, 1.0]))
        assert not is_mass.any()
        np.testing.assert_allclose(v, stats.norm.pdf(0.0))


class TestCdf:
    def test_mixture_with_atoms(self):
        tg = stats.truncnorm(-3, 1, loc=3, scale=1)
        assert cdf_at(USA_GPA, None, 3.5) == pytest.approx(1e-4 + 0.9998 * tg.cdf(3.5), rel=1e-12)
        assert cdf_at(USA_GPA, None, 4.0) == pytest.approx(1.0)
        assert cdf_at(USA_GPA, None, 0.0) == pytest.approx(1e-4)
        assert cdf_at(USA_GPA, None, -0.1) == 0.0

    def test_gaussian(self):
        assert cdf_at("Gaussian", (0.0, 1.0), 1.0) == pytest.approx(stats.norm.cdf(1.0), rel=1e-14)

    def test_poisson(self):
        assert cdf_at("Poisson", 3.0, 4.5) == pytest.approx(stats.poisson(3).cdf(4), rel=1e-12)

    def test_boolean_has_no_cdf(self):
        with pytest.raises(UnsupportedModelError):
            cdf_at("BooleanDistrib", 0.5, 0.5)

    @settings(max_examples=60, deadline=None)
    @given(st.lists(st.floats(-2, 12), min_size=2, max_size=8))
    def test_monotone(self, xs):
        xs = sorted(xs)
        vals = [cdf_at(INDIA_GPA, None, x) for x in xs]
        assert all(b >= a - 1e-12 for a, b in zip(vals, vals[1:]))
        assert all(0.0 <= v <= 1.0 for v in vals)

    @pytest.mark.parametrize("atom,weight", [(10.0, 0.009), (0.0, 0.002)])
    def test_jump_at_atom(self, atom, weight):
        jump = cdf_at(INDIA_GPA, None, atom) - cdf_at(INDIA_GPA, None, math.nextafter(atom, -math.inf))
        assert jump == pytest.approx(weight, abs=1e-9)


class TestSampling:
    rng = staticmethod(lambda: np.random.default_rng(1234))

    @pytest.mark.parametrize("kernel,ref", [
        (Gaussian(1.0, 4.0), stats.norm(1, 2)),
        (TruncatedGauss(0.5, 1.0, 0.1, 1.0), stats.truncnorm(-0.4, 0.5, loc=0.5, scale=1)),
        (TruncatedGauss(5.0, 4.0, 0.0, 10.0), stats.truncnorm(-2.5, 2.5, loc=5, scale=2)),
        (TruncatedGauss(0.0, 1.0, 6.0, 7.0), stats.truncnorm(6, 7)),
        (Unif(-1.0, 3.0), stats.uniform(-1, 4)),
    ])
    def test_continuous_ks(self, kernel, ref):
        x = kernel.sample(self.rng(), 20000)
        assert stats.kstest(x, ref.cdf).pvalue > 1e-3

    def test_poisson_chi2(self):
        x = Poisson(50).sample(self.rng(), 50000)
        assert x.mean() == pytest.approx(50, abs=0.15)
        assert x.var() == pytest.approx(50, rel=0.03)

    def test_truncated_mean(self):
        x = TruncatedGauss(3, 1, 0, 4).sample(self.rng(), 200000)
        assert x.mean() == pytest.approx(stats.truncnorm(-3, 1, loc=3).mean(), abs=0.01)

    def test_mixture_atoms_frequency(self):
        mix = Mixture([(Gaussian(0, 1), 0.7), (5.0, 0.3)])
        x = mix.sample(self.rng(), 100000)
        assert np.mean(x == 5.0) == pytest.approx(0.3, abs=0.006)
        cont = x[x != 5.0]
        assert stats.kstest(cont, stats.norm.cdf).pvalue > 1e-3

    def test_uniform_choice(self):
        x = UniformChoice(["a", "b", "c"]).sample(self.rng(), 30000)
        counts = [np.sum(x == v) for v in "abc"]
        assert stats.chisquare(counts).pvalue > 1e-3

    def test_uniform_choice_empty_is_null(self):
        assert UniformChoice([]).sample(self.rng()) is None

    def test_boolean(self):
        x = BooleanDistrib(0.2).sample(self.rng(), 50000)
        assert x.mean() == pytest.approx(0.2, abs=0.006)

    def test_scalar_draw(self):
        v = sample_kernel("Gaussian", (0.0, 1.0), self.rng())
        assert isinstance(v, float)


class TestParameters:
    @pytest.mark.parametrize("kernel", [
        Gaussian(0, 0), Gaussian(0, -1), TruncatedGauss(0, 1, 2, 1), Unif(1, 1), Poisson(-1),
        BooleanDistrib(1.5), Categorical(["a"], [0.5]),
        Mixture([(0.0, 0.5), (1.0, 0.6)]), Mixture([(0.0, 0.5), (0.0, 0.5)]),
    ])
    def test_invalid(self, kernel):
        with pytest.raises(InvalidParametersError):
            kernel.sample(np.random.default_rng(0))

    def test_only_selected_lanes_are_checked(self):
        bad = Gaussian(np.array([0.0, 0.0]), np.array([1.0, -1.0]))
        bad.restrict(np.array([0])).sample(np.random.default_rng(0), 1)
        with pytest.raises(InvalidParametersError):
            bad.sample(np.random.default_rng(0), 2)

    def test_make_kernel_aliases(self):
        assert isinstance(make_kernel("TruncatedGaussian", 0, 1, -1, 1), TruncatedGauss)
        assert isinstance(make_kernel("mixed", [(1.0, 1.0)]), Mixture)
        assert isinstance(make_kernel("Categorical", {"a": 1.0}), Categorical)


@settings(max_examples=80, deadline=None)
@given(st.lists(st.floats(0.01, 1.0), min_size=1, max_size=5), st.floats(-5, 5))
def test_mixture_normalised_and_consistent(raw, x):
    w = np.array(raw) / np.sum(raw)
    comps = [(Gaussian(float(i), 1.0), float(wi)) for i, wi in enumerate(w[:-1])] + [(float(x), float(w[-1]))]
    mix = Mixture(comps)
    mix.check()
    t = term(mix, float(x))
    assert t.is_mass and t.value == pytest.approx(w[-1], rel=1e-9)
    assert cdf_at(mix, None, 1e6) == pytest.approx(1.0, abs=1e-9)
