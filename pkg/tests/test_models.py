import numpy as np
import pytest
from scipy.sparse.linalg import aslinearoperator

from ruinprob.distributions import degenerate, exponential, two_point
from ruinprob.models import (
    CramerLundberg,
    FiniteChain,
    InterestRate,
    binomial_interest_distribution,
    case_study_1_model,
    step,
)


def test_cramer_lundberg_step():
    m = CramerLundberg.from_premium_claim(degenerate(1.3035), exponential(1.0))
    z, th = step(m, (2.0, 0.0), (1.3035, 0.5))
    assert z == pytest.approx(2.8035) and th == 0.0


def test_interest_step():
    m = InterestRate(degenerate(1.0), exponential(1.0), binomial_interest_distribution(), alpha=0.5)
    z, i = step(m, (2.0, 0.04), (1.0, 0.5, 0.02))
    assert z == pytest.approx((2.0 + 1.0) * 1.04 - 0.5)
    assert i == pytest.approx(0.5 * 0.04 + 0.02)


@pytest.mark.parametrize("alpha", [-0.1, 1.0])
def test_interest_rejects_alpha(alpha):
    with pytest.raises(ValueError):
        InterestRate(degenerate(1.0), exponential(1.0), degenerate(0.0), alpha=alpha)


def test_interest_rejects_negative_rates():
    with pytest.raises(ValueError):
        InterestRate(degenerate(1.0), exponential(1.0), two_point(0.01, -0.01, 0.5))


def test_binomial_interest_support_and_mean():
    law = binomial_interest_distribution()
    assert np.allclose(law.values, 0.01 * np.arange(11))
    assert law.mean() == pytest.approx(0.05)
    assert law.probs[5] == pytest.approx(252 / 1024)


def test_case_study_1_drift_positive():
    m = case_study_1_model()
    assert m.drift() == pytest.approx(1.3035 - 0.8143, abs=1e-3)
    assert m.drift() > 0


def test_step_monotone_in_surplus_under_shared_noise():
    """Identical noise keeps the larger surplus larger (pathwise coupling)."""
    m = case_study_1_model(interest=True)
    rng = np.random.default_rng(3)
    z1, z2 = np.zeros(1000), np.full(1000, 0.7)
    th = np.zeros(1000)
    for _ in range(50):
        noise = m.draw_noise(rng, 1000)
        (z1, th1), (z2, th2) = m.step(z1, th, noise), m.step(z2, th, noise)
        assert np.all(z2 >= z1) and np.array_equal(th1, th2)
        th = th1


def test_finite_chain_validation():
    with pytest.raises(ValueError):
        FiniteChain(np.array([[0.5, 0.4], [0.0, 1.0]]))
    with pytest.raises(ValueError):
        FiniteChain(np.ones((2, 3)) / 3)
    P = np.array([[0.5, 0.5], [0.0, 1.0]])
    ch = FiniteChain(aslinearoperator(P))
    assert ch.n == 2 and np.allclose(ch.as_dense(), P)
