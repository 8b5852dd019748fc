"""Independent reference computations shared by several test modules."""

import itertools

import numpy as np

from ruinprob.models import FiniteChain


def gambler_chain(n: int = 10) -> FiniteChain:
    """Fair +-1 walk on {0..n} with both ends absorbing."""
    P = np.zeros((n + 1, n + 1))
    for k in range(1, n):
        P[k, k - 1] = P[k, k + 1] = 0.5
    P[0, 0] = P[n, n] = 1.0
    return FiniteChain(P)


def random_chain(rng: np.random.Generator, n: int, sparsity: float = 0.4) -> np.ndarray:
    P = rng.random((n, n)) * (rng.random((n, n)) > sparsity)
    P[np.arange(n), rng.integers(0, n, n)] += 0.05  # no empty rows
    return P / P.sum(axis=1, keepdims=True)


def enumerate_paths(P: np.ndarray, start: int, length: int):
    """All state sequences of ``length`` steps from ``start`` with their probabilities."""
    n = len(P)
    tails = np.array(list(itertools.product(range(n), repeat=length)), dtype=int).reshape(n**length, length)
    paths = np.hstack([np.full((len(tails), 1), start), tails])
    prob = np.prod(P[paths[:, :-1], paths[:, 1:]], axis=1) if length else np.ones(1)
    return paths, prob


def _first_hits(P, target, horizon):
    """Paths from every start, index of the first visit to ``target`` (horizon + 1 if none)."""
    t = np.zeros(len(P), dtype=bool)
    t[list(target)] = True
    for x in range(len(P)):
        paths, prob = enumerate_paths(P, x, horizon)
        hit = t[paths]
        first = np.where(hit.any(axis=1), hit.argmax(axis=1), horizon + 1)
        yield x, paths, prob, first


def reach_by_paths(P, target, horizon, upto=None):
    """v_n(x) = P(X_k in target for some k <= n), by summing over every path.

    With ``upto`` set, enumerate paths of that length once and return the values
    for every n = 0..upto as rows.
    """
    length = horizon if upto is None else upto
    out = np.empty((length + 1, len(P)))
    for x, _, prob, first in _first_hits(P, target, length):
        for n in range(length + 1):
            out[n, x] = prob[first <= n].sum()
    return out[horizon] if upto is None else out


def reachavoid_by_paths(P, allowed, target, horizon, upto=None):
    """w_n(x) = P(some k <= n has X_k in target and X_j in allowed minus target for j < k)."""
    b = np.zeros(len(P), dtype=bool)
    b[list(target)] = True
    a = np.zeros(len(P), dtype=bool)
    a[list(allowed)] = True
    live = a & ~b
    length = horizon if upto is None else upto
    out = np.empty((length + 1, len(P)))
    for x, paths, prob, first in _first_hits(P, target, length):
        # live_before[k] is true when X_0..X_{k-1} all lie in the live set
        live_before = np.hstack([np.ones((len(paths), 1), bool), np.cumprod(live[paths], axis=1).astype(bool)])
        ok = live_before[np.arange(len(paths)), np.minimum(first, length)]
        for n in range(length + 1):
            out[n, x] = prob[ok & (first <= n)].sum()
    return out[horizon] if upto is None else out
