"""Discrete-time risk models, finite Markov chains and the case-study laws.

A model is a recursion ``(z, theta) -> (g(z, theta, xi), h(theta, xi))`` driven
by i.i.d. noise ``xi``.  Two variants are provided:

* :class:`CramerLundberg` -- ``z' = z + G - C``, no parameter process.
* :class:`InterestRate` -- ``z' = (z + G)(1 + I) - C`` with ``I' = alpha I + W``.

Both satisfy the monotone-coupling assumption by construction: the parameter
update never reads the surplus and the surplus map is nondecreasing in ``z``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import comb
from typing import Sequence, Union

import numpy as np
from scipy.sparse.linalg import LinearOperator

from .distributions import (
    ContinuousLaw,
    DiscreteLaw,
    Distribution,
    GIGClaimLaw,
    HeavyTailIncrement,
    IndependentDifference,
    PremiumMinusClaim,
    degenerate,
)

CASE1_PREMIUM = 1.3035
GIG_K = 0.139866


@dataclass(frozen=True)
class CramerLundberg:
    """Random-walk surplus ``z' = z + G - C``.

    Either pass ``increment`` directly, or use :meth:`from_premium_claim`,
    which keeps ``premium``/``claim`` for the bounds that need the split.
    """

    increment: Distribution
    premium: Distribution | None = None
    claim: Distribution | None = None

    variant = "cramer_lundberg"

    @classmethod
    def from_premium_claim(cls, premium: Distribution, claim: Distribution) -> "CramerLundberg":
        if isinstance(premium, DiscreteLaw) and claim.has_density:
            return cls(PremiumMinusClaim(premium, claim), premium, claim)
        return cls(IndependentDifference(premium, claim), premium, claim)

    def draw_noise(self, rng: np.random.Generator, size) -> tuple:
        """Noise ``(G, C)``; when only the increment is known ``G = eta`` and ``C = 0``."""
        if self.premium is not None and self.claim is not None:
            return self.premium.sample(rng, size), self.claim.sample(rng, size)
        return self.increment.sample(rng, size), np.zeros(size)

    def step(self, z, theta, noise):
        g, c = noise
        return z + g - c, theta

    def drift(self) -> float:
        return self.increment.mean()


@dataclass(frozen=True)
class InterestRate:
    """Surplus with interest: ``z' = (z + G)(1 + I) - C`` and ``I' = alpha I + W``."""

    premium: Distribution
    claim: Distribution
    interest_noise: Distribution
    alpha: float = 0.0

    variant = "interest_rate"

    def __post_init__(self):
        if not 0.0 <= self.alpha < 1.0:
            raise ValueError(f"alpha must lie in [0, 1), got {self.alpha}")
        if self.interest_noise.lower < 0:
            raise ValueError("interest noise must take values in [0, inf)")

    def draw_noise(self, rng: np.random.Generator, size) -> tuple:
        return (
            self.premium.sample(rng, size),
            self.claim.sample(rng, size),
            self.interest_noise.sample(rng, size),
        )

    def step(self, z, theta, noise):
        g, c, w = noise
        return (z + g) * (1.0 + theta) - c, self.alpha * theta + w

    def drift(self) -> float:
        return self.premium.mean() - self.claim.mean()

    def collapsed(self) -> CramerLundberg:
        """The interest-free random walk that dominates this model's ruin probability."""
        return CramerLundberg.from_premium_claim(self.premium, self.claim)


RiskModel = Union[CramerLundberg, InterestRate]


def step(model: RiskModel, state: tuple, noise: tuple) -> tuple:
    """One transition of ``model`` from ``state = (z, theta)`` under ``noise``."""
    z, theta = state
    return model.step(z, theta, noise)


@dataclass(frozen=True)
class FiniteChain:
    """Markov chain on ``n`` states.

    ``transition`` is a dense row-stochastic matrix or any operator supporting
    ``transition @ v`` (e.g. a ``scipy.sparse.linalg.LinearOperator``) for
    structured chains too large to store densely.
    """

    transition: np.ndarray | LinearOperator
    labels: Sequence = field(default=None)
    row_tol: float = 1e-12

    def __post_init__(self):
        P = self.transition
        if isinstance(P, np.ndarray):
            if P.ndim != 2 or P.shape[0] != P.shape[1]:
                raise ValueError("transition matrix must be square")
            if np.any(P < 0) or np.any(P > 1):
                raise ValueError("transition probabilities must lie in [0, 1]")
        rows = P @ np.ones(P.shape[0])
        if np.max(np.abs(rows - 1.0)) > self.row_tol:
            raise ValueError(f"rows must sum to 1 within {self.row_tol:g}")
        if self.labels is None:
            object.__setattr__(self, "labels", tuple(range(P.shape[0])))

    @property
    def n(self) -> int:
        return self.transition.shape[0]

    def as_dense(self) -> np.ndarray:
        P = self.transition
        return P if isinstance(P, np.ndarray) else P @ np.eye(self.n)


def gig_claim_distribution(k: float = GIG_K) -> GIGClaimLaw:
    return GIGClaimLaw(k=k)


def heavytail_increment_distribution() -> HeavyTailIncrement:
    return HeavyTailIncrement()


def binomial_interest_distribution(trials: int = 10, unit: float = 0.01) -> DiscreteLaw:
    """Interest ``unit * B`` with ``B ~ Binomial(trials, 1/2)``."""
    counts = np.arange(trials + 1)
    probs = np.array([comb(trials, int(k)) for k in counts], dtype=float) / 2.0**trials
    return DiscreteLaw(unit * counts, probs, name=f"{unit:g}*binomial({trials},1/2)")


def case_study_1_model(interest: bool = False) -> RiskModel:
    premium = degenerate(CASE1_PREMIUM)
    claim = gig_claim_distribution()
    if interest:
        return InterestRate(premium, claim, binomial_interest_distribution(), alpha=0.0)
    return CramerLundberg.from_premium_claim(premium, claim)


def case_study_2_model() -> CramerLundberg:
    return CramerLundberg(heavytail_increment_distribution())


__all__ = [
    "CramerLundberg",
    "InterestRate",
    "RiskModel",
    "FiniteChain",
    "step",
    "gig_claim_distribution",
    "heavytail_increment_distribution",
    "binomial_interest_distribution",
    "case_study_1_model",
    "case_study_2_model",
    "ContinuousLaw",
]
