"""Reachability and reach-avoid value iteration on finite Markov chains.

``v_n(x; A)`` is the probability of entering ``A`` within ``n`` steps and
``w_n(x; A, B)`` that of entering ``B`` within ``n`` steps without leaving
``A`` first.  Both increase to their infinite-horizon limits; the limit of
``w_n`` is reached at a certified geometric rate when every state is absorbed
in ``K u L`` with probability at least ``delta_m`` within ``m`` steps.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np
from scipy.sparse.csgraph import breadth_first_order
from scipy.sparse import csr_matrix

from .errors import NoCertificate
from .models import FiniteChain


@dataclass(frozen=True)
class ValueVector:
    values: np.ndarray
    horizon: int
    chain: FiniteChain | None = field(default=None, repr=False)

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.values, dtype=dtype)

    def __getitem__(self, idx):
        return self.values[idx]


@dataclass(frozen=True)
class ContractionCertificate:
    """Lower bound ``delta`` on the ``m``-step absorption probability.

    Guarantees ``0 <= w - w_n <= (m / delta) (1 - delta)**floor(n / m)``.
    """

    m: int
    delta: float

    def error(self, n: int) -> float:
        if self.delta >= 1.0:
            return 0.0 if n >= self.m else float(self.m)
        return self.m / self.delta * (1.0 - self.delta) ** (n // self.m)

    def horizon_for(self, eps: float) -> int:
        """Smallest ``n`` with ``error(n) <= eps``."""
        if self.delta >= 1.0:
            return self.m
        k = math.log(eps * self.delta / self.m) / math.log1p(-self.delta)
        blocks = max(0, math.ceil(k))
        while self.error(blocks * self.m) > eps:
            blocks += 1
        while blocks > 0 and self.error((blocks - 1) * self.m) <= eps:
            blocks -= 1
        return blocks * self.m

    def to_dict(self) -> dict:
        return {"m": self.m, "delta": self.delta}


def _mask(states, n: int) -> np.ndarray:
    if isinstance(states, np.ndarray) and states.dtype == bool:
        if states.shape != (n,):
            raise ValueError("boolean state mask has the wrong length")
        return states.copy()
    mask = np.zeros(n, dtype=bool)
    mask[list(states)] = True
    return mask


def reach_iterate(chain: FiniteChain, target: Iterable[int] | np.ndarray, n: int) -> ValueVector:
    """``v_n(.; target)``: probability of hitting ``target`` within ``n`` steps."""
    return reachavoid_iterate(chain, np.ones(chain.n, dtype=bool), target, n)


def reachavoid_iterate(
    chain: FiniteChain,
    allowed: Iterable[int] | np.ndarray,
    target: Iterable[int] | np.ndarray,
    n: int,
) -> ValueVector:
    """``w_n(.; allowed, target)`` by ``w_{k+1} = 1_B + 1_{A minus B} P w_k``."""
    B = _mask(target, chain.n)
    if not B.any():
        raise ValueError("target set must be nonempty")
    live = _mask(allowed, chain.n) & ~B
    ind = B.astype(float)
    w = ind.copy()
    P = chain.transition
    for _ in range(n):
        w = ind + np.where(live, P @ w, 0.0)
    return ValueVector(w, n, chain)


def contraction_certificate(
    chain: FiniteChain,
    absorbing: Iterable[int] | np.ndarray,
    m_max: int = 1000,
    eps: float | None = None,
) -> ContractionCertificate:
    """Certificate from ``delta_m = min_x v_m(x; absorbing)``.

    Returns the smallest ``m <= m_max`` with ``delta_m > 0``.  With ``eps``
    given, every admissible ``m <= m_max`` is scored instead and the one
    needing the fewest iterations to reach ``eps`` is returned.
    """
    K = _mask(absorbing, chain.n)
    ind = K.astype(float)
    v = ind.copy()
    P = chain.transition
    best = None
    for m in range(1, m_max + 1):
        v = ind + np.where(K, 0.0, P @ v)
        delta = float(v.min())
        if delta > 0.0:
            cert = ContractionCertificate(m, min(delta, 1.0))
            if eps is None:
                return cert
            if best is None or cert.horizon_for(eps) < best.horizon_for(eps):
                best = cert
    if best is None:
        raise NoCertificate(f"delta_m = 0 for every m <= {m_max}; fixpoint uniqueness not established")
    return best


def _can_reach(P: np.ndarray, sources: np.ndarray, through: np.ndarray) -> np.ndarray:
    """States in ``through`` that reach ``sources`` along edges staying in ``through``."""
    n = len(P)
    # reverse graph restricted to moves out of `through` states
    rev = csr_matrix((P.T > 0) & through[None, :])
    hit = sources.copy()
    for s in np.flatnonzero(sources):
        order = breadth_first_order(rev, s, directed=True, return_predecessors=False)
        hit[order] = True
    return hit & (through | sources)


def reachavoid_exact(chain: FiniteChain, allowed, target) -> np.ndarray:
    """Infinite-horizon ``w(.; allowed, target)`` by a linear solve (least fixpoint)."""
    P = chain.as_dense()
    B = _mask(target, chain.n)
    S = _mask(allowed, chain.n) & ~B
    good = _can_reach(P, B, S) & S
    w = B.astype(float)
    if good.any():
        idx = np.flatnonzero(good)
        A = np.eye(len(idx)) - P[np.ix_(idx, idx)]
        w[idx] = np.linalg.solve(A, P[np.ix_(idx, np.flatnonzero(B))].sum(axis=1))
    return w


def reach_exact(chain: FiniteChain, target) -> np.ndarray:
    """Infinite-horizon ``v(.; target)`` by a linear solve."""
    return reachavoid_exact(chain, np.ones(chain.n, dtype=bool), target)
