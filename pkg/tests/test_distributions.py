import math

import numpy as np
import pytest
from scipy import integrate, special, stats

from ruinprob.distributions import (
    Capped,
    DiscreteLaw,
    GIGClaimLaw,
    HeavyTailIncrement,
    PremiumMinusClaim,
    TwoSidedExponential,
    degenerate,
    exponential,
    gaussian,
    two_point,
    uniform,
)
from ruinprob.errors import NoDensity


class TestGIGClaim:
    law = GIGClaimLaw()

    def test_pinned_constant_normalizes_to_1e5(self):
        raw = GIGClaimLaw(normalize=False)
        mass = integrate.quad(raw.density, 0, np.inf, limit=200)[0]
        assert abs(mass - 1.0) < 1e-5
        # the exact normalizer is K_1(2)
        assert mass == pytest.approx(special.k1(2.0) / 0.139866, rel=1e-9)

    def test_density_integrates_to_one(self):
        assert integrate.quad(self.law.density, 0, np.inf, limit=200)[0] == pytest.approx(1.0, abs=1e-10)

    def test_cdf_matches_scipy_geninvgauss(self):
        ref = stats.geninvgauss(-1, 2)
        x = np.array([0.05, 0.2, 0.5, 1.0, 2.0, 3.1965, 7.0, 20.0, 59.0])
        assert np.max(np.abs(self.law.cdf(x) - ref.cdf(x))) < 1e-8

    def test_cdf_edges(self):
        assert self.law.cdf(-1.0) == 0.0
        assert self.law.cdf(0.0) == 0.0
        assert self.law.cdf(1e6) == 1.0

    def test_moments_from_bessel_ratios(self):
        # E C = K_0(2) / K_1(2) ~ 0.814
        assert self.law.mean() == pytest.approx(special.k0(2.0) / special.k1(2.0), rel=1e-12)
        assert self.law.mean() == pytest.approx(0.814, abs=1e-3)
        by_quad = integrate.quad(lambda x: x * x * self.law.density(x), 0, np.inf, limit=200)[0]
        assert self.law.raw_moment(2) == pytest.approx(by_quad, rel=1e-8)

    @pytest.mark.parametrize("s", [-0.7, -0.2, 0.5, 3.0])
    def test_laplace_matches_quadrature(self, s):
        # combine exponents so exp(-s x) cannot overflow before the density damps it
        q = integrate.quad(lambda x: math.exp(-s * x + self.law.log_density(x)), 0, 400, limit=400,
                           points=[1.0, 5.0, 20.0])[0]
        assert self.law.laplace(s) == pytest.approx(q, rel=1e-8)

    def test_laplace_domain_edge(self):
        assert self.law.laplace(-1.0) == pytest.approx(1.0 / (2 * special.k1(2.0)))
        assert self.law.laplace(-1.0001) == math.inf

    def test_sampler_ks(self):
        x = self.law.sample(np.random.default_rng(5), 20000)
        assert stats.kstest(x, self.law.cdf).pvalue > 1e-3
        assert x.min() > 0


class TestHeavyTail:
    law = HeavyTailIncrement()

    def test_density_is_probability(self):
        assert integrate.quad(self.law.density, -np.inf, np.inf)[0] == pytest.approx(1.0, abs=1e-10)

    def test_mean_and_second_moment_by_quadrature(self):
        m1 = integrate.quad(lambda t: t * self.law.density(t), -np.inf, np.inf)[0]
        m2 = integrate.quad(lambda t: t * t * self.law.density(t), -np.inf, np.inf)[0]
        assert abs(m1 - 1.0) < 1e-6 and abs(m2 - 2.0) < 1e-6
        assert self.law.mean() == pytest.approx(1.0, abs=1e-9)
        assert self.law.raw_moment(2) == pytest.approx(2.0, abs=1e-9)

    def test_third_moment_diverges(self):
        assert self.law.abs_moment(3) == math.inf

    @pytest.mark.parametrize("x", [-30.0, -2.0, 0.0, 1.0, 2.5, 40.0])
    def test_cdf_against_integrated_density(self, x):
        ref = integrate.quad(self.law.density, -np.inf, x)[0]
        assert self.law.cdf(x) == pytest.approx(ref, abs=1e-10)

    @pytest.mark.parametrize("s", [0.05, -0.05])
    def test_laplace_infinite_off_zero(self, s):
        assert self.law.laplace(s) == math.inf

    def test_sampler_ks(self):
        x = self.law.sample(np.random.default_rng(9), 20000)
        assert stats.kstest(x, self.law.cdf).pvalue > 1e-3


class TestSmallLaws:
    def test_discrete_exact_expectations(self):
        law = DiscreteLaw([2.0, -1.0, 0.5], [0.25, 0.5, 0.25])
        assert law.mean() == pytest.approx(0.25 * 2 - 0.5 + 0.125)
        assert law.cdf(-1.0) == 0.5 and law.cdf(-1.0001) == 0.0 and law.cdf(2.0) == 1.0
        assert law.laplace(1.0) == pytest.approx(0.25 * math.exp(-2) + 0.5 * math.e + 0.25 * math.exp(-0.5))

    def test_discrete_rejects_bad_probabilities(self):
        with pytest.raises(ValueError):
            DiscreteLaw([0.0, 1.0], [0.5, 0.6])

    def test_discrete_has_no_density(self):
        with pytest.raises(NoDensity):
            degenerate(1.0).density(0.0)

    def test_two_point_frequencies(self):
        law = two_point(1.0, -2.0, 0.9)
        x = law.sample(np.random.default_rng(0), 100000)
        assert set(np.unique(x)) == {-2.0, 1.0}
        assert abs((x == 1.0).mean() - 0.9) < 0.005

    def test_premium_minus_claim(self):
        claim = exponential(2.0)
        inc = PremiumMinusClaim(degenerate(1.5), claim)
        x = np.array([-3.0, 0.0, 1.0, 1.49])
        assert np.allclose(inc.cdf(x), np.exp(-2.0 * (1.5 - x)))  # P(C >= 1.5 - x)
        assert inc.cdf(1.6) == 1.0
        assert inc.mean() == pytest.approx(1.0)
        assert inc.laplace(0.5) == pytest.approx(math.exp(-0.75) * 2.0 / 1.5)

    def test_scipy_wrappers_transforms(self):
        assert gaussian(1.0, 2.0).laplace(0.5) == pytest.approx(math.exp(-0.5 + 0.5))
        assert uniform(0.0, 2.0).laplace(1.0) == pytest.approx((1 - math.exp(-2)) / 2)
        assert exponential(1.0).laplace(-1.0) == math.inf

    def test_two_sided_exponential(self):
        law = TwoSidedExponential(0.6, 1.0, 1.5)
        assert integrate.quad(law.density, -np.inf, np.inf)[0] == pytest.approx(1.0)
        assert law.mean() == pytest.approx(0.6 - 0.4 / 1.5)
        assert law.raw_moment(2) == pytest.approx(2 * (0.6 + 0.4 / 2.25))
        assert law.cdf(0.0) == pytest.approx(0.4)
        x = law.sample(np.random.default_rng(1), 20000)
        assert stats.kstest(x, law.cdf).pvalue > 1e-3

    def test_capped_law(self):
        law = Capped(exponential(1.0), 2.0)
        assert law.mean() == pytest.approx(1 - math.exp(-2.0))  # E min(X, k) = 1 - e^-k
        assert law.cdf(1.999) < 1.0 and law.cdf(2.0) == 1.0
        assert law.sample(np.random.default_rng(0), 1000).max() <= 2.0
