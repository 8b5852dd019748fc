import math

import numpy as np
import pytest
from scipy import integrate, special

from ruinprob.bounds import (
    barrier_for_precision,
    closed_form_bound,
    interest_tail_term,
    korshunov_bound,
    korshunov_constants,
    korshunov_constants_for_increment,
    lundberg_bound,
    lundberg_coefficient,
    npc_drift,
    truncation_level,
    yang_bound,
)
from ruinprob.distributions import (
    DiscreteLaw,
    PremiumMinusClaim,
    degenerate,
    exponential,
    gaussian,
    pareto,
    uniform,
)
from ruinprob.errors import (
    InfiniteMoment,
    NoDrift,
    NoLundbergCoefficient,
    PositiveMassAtZeroPremium,
    ToleranceNotMet,
)

GEOMETRIC = 2.0 ** np.arange(11)


def quad_split(f, lo, hi, cuts):
    """Integral of f over (lo, hi) as a sum of pieces between sorted cut points."""
    edges = [lo, *sorted(c for c in cuts if lo < c < hi), hi]
    return sum(integrate.quad(f, a, b, limit=200)[0] for a, b in zip(edges[:-1], edges[1:]))


def test_npc_drift_zero_for_equal_degenerate_laws():
    assert npc_drift(degenerate(1.0), degenerate(1.0)) == 0.0


def test_lundberg_no_drift():
    with pytest.raises(NoDrift):
        lundberg_coefficient(gaussian(-0.1, 1.0))


def test_lundberg_gaussian_closed_form():
    # E exp(-t eta) = exp(-t mu + t^2 sigma^2 / 2) = 1  <=>  t = 2 mu / sigma^2
    lam = lundberg_coefficient(gaussian(0.3, 1.2))
    assert lam == pytest.approx(2 * 0.3 / 1.44, rel=1e-10)


def test_lundberg_exponential_claim_lambert_w():
    # exp(-2t) / (1 - t) = 1 for premium 2, Exp(1) claims: t = 1 + W_0(-2 e^-2) / 2
    inc = PremiumMinusClaim(degenerate(2.0), exponential(1.0))
    expected = 1.0 + special.lambertw(-2 * math.exp(-2), 0).real / 2
    lam = lundberg_coefficient(inc)
    assert lam == pytest.approx(expected, rel=1e-9)
    assert abs(inc.laplace(lam) - 1.0) < 1e-10
    assert inc.laplace(0.98 * lam) < 1.0


def test_case1_has_no_lundberg_root(case1):
    """m(t) stays below 1 up to t = 1, beyond which it is infinite."""
    inc = case1.increment
    with pytest.raises(ToleranceNotMet):
        lundberg_coefficient(inc)
    edge = lundberg_coefficient(inc, allow_boundary=True)
    assert edge == pytest.approx(1.0, abs=1e-12)
    expected_m = math.exp(-1.3035) / (2 * special.k1(2.0))
    assert inc.laplace(1.0) == pytest.approx(expected_m, rel=1e-9)
    assert expected_m < 1.0


def test_case2_heavy_tail_has_no_lundberg_coefficient(case2):
    with pytest.raises(NoLundbergCoefficient):
        lundberg_coefficient(case2.increment)


@pytest.fixture(scope="module")
def k(case2):
    return korshunov_constants_for_increment(case2.increment, 2.0)


class TestKorshunovCase2:
    def test_closed_form_constants(self, k):
        # E eta = 1, E eta^2 = 2: s2 = 2 * 1 * 2 / 1, c1 = 2 * 1 * 1 * E eta^2 / 2
        assert k.a == pytest.approx(1.0, abs=1e-9)
        assert k.gamma == 2.0
        assert k.s2 == pytest.approx(4.0, abs=1e-9)
        assert k.s3 == pytest.approx(4.0, abs=1e-9)
        assert k.c1 == pytest.approx(2.0, abs=1e-9)
        assert k.c == pytest.approx(5.0, abs=1e-9)

    def test_c2_near_reported_value(self, k):
        assert k.c2 == pytest.approx(0.83, abs=0.005)
        assert k.c2 < k.c1  # so c is set by c1

    def test_s1_is_smallest_admissible_grid_point(self, k, case2):
        dens = case2.increment.density

        def emin(s):
            return quad_split(lambda t: min(t, s) * dens(t), -np.inf, np.inf, [0.0, s])

        assert emin(k.s1) >= 2 / 3
        assert emin(k.s1 - 1e-3) < 2 / 3

    def test_s1_target_is_admissible_but_not_minimal(self, k, case2):
        dens = case2.increment.density
        e107 = quad_split(lambda t: min(t, 1.07) * dens(t), -np.inf, np.inf, [0.0, 1.07])
        assert e107 >= 2 / 3
        assert k.s1 < 1.07
        # s1 below s2 either way, so c does not change
        assert max(1.07, k.s2) == k.s3


@pytest.fixture(scope="module")
def exp_pair():
    return korshunov_constants(exponential(0.5), exponential(1.0))


def test_korshunov_invariants_exponential_pair(exp_pair):
    # G ~ Exp(1/2), C ~ Exp(1): a = 1, E(G-C)^2 = 6, s2 = 12, c1 = 6, c2 = 2(12 + 2) = 28, c = 42 + 6
    k = exp_pair
    assert k.a == pytest.approx(1.0)
    assert k.s2 == pytest.approx(12.0)
    assert k.s3 == max(k.s1, k.s2)
    assert k.c1 == pytest.approx(6.0)
    assert k.c2 == pytest.approx(28.0)
    assert k.c == pytest.approx(3 * max(k.c1, k.c2) / (k.a * k.gamma) + 0.5 * k.s3 ** (k.gamma - 1))
    assert k.c == pytest.approx(48.0)


def test_korshunov_rejects_bounded_claims():
    with pytest.raises(ValueError):
        korshunov_constants(degenerate(2.0), uniform(0.0, 3.0))


def test_korshunov_infinite_claim_moment():
    with pytest.raises(InfiniteMoment):
        korshunov_constants(degenerate(4.0), pareto(1.5))


def test_korshunov_no_drift():
    with pytest.raises(NoDrift):
        korshunov_constants(degenerate(0.5), exponential(1.0))


def test_truncation_level_keeps_half_the_drift():
    G, C = pareto(1.5, 1.0), DiscreteLaw([0.5], [1.0])
    k = truncation_level(G, C)
    # E min(k, G) for Pareto(1.5, 1): 3 - 2 / sqrt(k), checked here by quadrature
    emin = quad_split(lambda g: min(g, k) * 1.5 * g**-2.5, 1.0, np.inf, [k])
    assert emin == pytest.approx(3 - 2 / math.sqrt(k), rel=1e-9)
    assert emin - 0.5 >= 0.5 * (3.0 - 0.5)
    assert emin - 0.5 > 0


def test_truncation_level_capped_at_premium_support(case1):
    assert truncation_level(case1.premium, case1.claim) == pytest.approx(1.3035)


@pytest.fixture(scope="module")
def all_bounds(exp_pair):
    return [lundberg_bound(0.7), korshunov_bound(exp_pair), yang_bound(),
            closed_form_bound(lambda y: 1 / (1 + y) ** 2, "1/(1+y)^2")]


def test_bounds_nonincreasing_and_vanishing(all_bounds):
    for bound in all_bounds:
        v = np.asarray(bound(GEOMETRIC))
        assert np.all(np.diff(v) <= 0)
        assert np.all((v >= 0) & (v <= 1))
        assert bound(1e8) < 1e-6


@pytest.mark.parametrize("eps", [0.1, 0.011, 1e-4])
def test_barrier_for_precision_all_kinds(eps, all_bounds):
    for b in all_bounds:
        y = barrier_for_precision(b, eps)
        assert b(y) <= eps * (1 + 1e-12)
        assert b(0.999 * y) > eps


def test_lundberg_barrier_formula():
    assert barrier_for_precision(lundberg_bound(0.5), 0.01) == pytest.approx(-math.log(0.01) / 0.5)


def test_yang_bound_at_4_5():
    assert yang_bound()(4.5) == pytest.approx(1.45**-0.1 * math.exp(-4.5), rel=1e-14)
    assert abs(yang_bound()(4.5) - 0.0107) < 1e-4


def test_interest_tail_term_degenerate_premium():
    # y/j + m1 j^(beta-1) is far below the premium atom, so only j^-beta remains
    G = degenerate(1.3035)
    assert interest_tail_term(4.5, 1e6, 0.5, G.cdf, 1.5) == pytest.approx(1e-3, rel=1e-12)
    assert interest_tail_term(4.5, 1e4, 0.5, G.cdf, 1.5) == pytest.approx(0.01, rel=1e-12)


def test_interest_tail_term_decreasing_in_j():
    G = exponential(1.0)
    vals = [interest_tail_term(5.0, j, 0.5, G.cdf, 1.2) for j in (1e2, 1e3, 1e4, 1e5, 1e6)]
    assert all(a > b for a, b in zip(vals, vals[1:]))
    j, beta = 1e3, 0.5
    direct = j**-beta + (1 - math.exp(-(5.0 / j + 1.2 * j ** (beta - 1))))
    assert vals[1] == pytest.approx(direct, rel=1e-12)


def test_interest_tail_term_rejects_atom_at_zero():
    with pytest.raises(PositiveMassAtZeroPremium):
        interest_tail_term(4.5, 1e4, 0.5, DiscreteLaw([0.0, 2.0], [0.5, 0.5]).cdf, 1.0)
