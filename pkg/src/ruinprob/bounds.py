"""Upper bounds on the ruin probability beyond a barrier, and barrier selection.

A :class:`TailBound` is a nonincreasing function ``y -> bound on psi*(y)``.
Three families are supported: the exponential Lundberg bound, the moment
bound ``c * y**(1 - gamma)`` (with constants from :func:`korshunov_constants`)
and arbitrary closed forms such as :func:`yang_bound`.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Callable

import numpy as np
from scipy import integrate, optimize
from scipy.interpolate import CubicHermiteSpline

from .distributions import DiscreteLaw, Distribution
from .errors import (
    InfiniteMoment,
    NoDrift,
    NoLundbergCoefficient,
    PositiveMassAtZeroPremium,
    ToleranceNotMet,
)

S1_GRID = 1e-3


@dataclass(frozen=True)
class TailBound:
    """Evaluable upper bound on the ruin probability from capital ``y``.

    ``kind`` is ``"lundberg"``, ``"korshunov"`` or ``"closed_form"``;
    ``params`` holds the defining constants for reporting.
    """

    kind: str
    params: dict
    fn: Callable[[np.ndarray], np.ndarray] = field(repr=False, compare=False)
    label: str = ""

    def evaluate(self, y):
        y = np.asarray(y, dtype=float)
        out = np.minimum(1.0, self.fn(y))
        return out if out.ndim else float(out)

    __call__ = evaluate

    def to_dict(self) -> dict:
        return {"kind": self.kind, "label": self.label, **self.params}


@dataclass(frozen=True)
class KorshunovConstants:
    a: float
    gamma: float
    s1: float
    s2: float
    s3: float
    c1: float
    c2: float
    c: float

    def to_dict(self) -> dict:
        return asdict(self)


def npc_drift(G: Distribution, C: Distribution) -> float:
    """Net-profit drift ``E G - E C``."""
    for law in (G, C):
        if not math.isfinite(law.abs_moment(1)):
            raise InfiniteMoment(f"first moment of {law.name} is infinite")
    return G.mean() - C.mean()


def lundberg_coefficient(inc: Distribution, tol: float = 1e-10, allow_boundary: bool = False) -> float:
    """Largest ``t`` with ``E exp(-t eta) <= 1``.

    In the Cramer case the root of ``m(t) = 1`` is returned to ``tol``.  When
    ``m`` stays below 1 up to the edge of its domain (finite there, infinite
    beyond), the root does not exist; the edge still yields a valid
    exponential bound and is returned only if ``allow_boundary``.
    """
    a = inc.mean()
    if not a > 0:
        raise NoDrift(f"drift {a:g} is not positive")
    m = inc.laplace

    t = 1.0
    while not math.isfinite(m(t)) and t > 2.0**-40:
        t *= 0.5
    if not math.isfinite(m(t)):
        raise NoLundbergCoefficient(f"{inc.name}: E exp(-t eta) is infinite for every t > 0")

    lo = t
    while m(lo) > 1.0:
        lo *= 0.5
        if lo < 2.0**-60:
            raise ToleranceNotMet("could not find t with m(t) < 1")
    hi = lo
    while True:
        val = m(hi)
        if not math.isfinite(val) or val > 1.0:
            break
        lo = hi
        hi *= 2.0
        if hi > 2.0**64:
            raise ToleranceNotMet("m(t) <= 1 on the whole bracket-doubling range")

    if math.isfinite(m(hi)):
        lam = optimize.brentq(lambda s: m(s) - 1.0, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps)
        if abs(m(lam) - 1.0) > tol:
            raise ToleranceNotMet(f"|m(lambda) - 1| = {abs(m(lam) - 1):.3g} exceeds {tol:g}")
        return lam

    # m jumps to +inf inside (lo, hi]: locate sup{t : m(t) <= 1} by bisection.
    while hi - lo > 1e-14 * max(1.0, hi):
        mid = 0.5 * (lo + hi)
        val = m(mid)
        if math.isfinite(val) and val <= 1.0:
            lo = mid
        else:
            hi = mid
    if abs(m(lo) - 1.0) <= tol:
        return lo
    edge = m(hi)
    if math.isfinite(edge) and edge <= 1.0:
        lo = hi
    if allow_boundary:
        return lo
    raise ToleranceNotMet(
        f"m(t) <= {m(lo):.6g} < 1 up to the edge t = {lo:.12g} of its domain; no root of m(t) = 1"
    )


def lundberg_bound(lam: float) -> TailBound:
    if not lam > 0:
        raise ValueError("Lundberg coefficient must be positive")
    return TailBound("lundberg", {"lambda": lam}, lambda y: np.exp(-lam * y), f"exp(-{lam:.6g} y)")


class _PairMoments:
    """Expectations of functions of ``(G, C)`` needed by the moment bound.

    ``expect(fn)`` returns ``E fn(G, C)``; ``kink(s)`` lists breakpoints of
    ``min(G - C, s)`` in the integration variable so quadrature sees them.
    """

    def __init__(self, expect: Callable, kink: Callable[[float], tuple] = lambda s: ()):
        self.expect = expect
        self.kink = kink

    def emin(self, s: float) -> float:
        return self.expect(lambda g, c: min(g - c, s), self.kink(s))

    def second(self) -> float:
        return self.expect(lambda g, c: (g - c) ** 2, ())

    def c1_term(self, gamma: float) -> float:
        return self.expect(lambda g, c: c ** (gamma - 2) * (g - c) ** 2, ())

    def c2_term(self, s3: float, gamma: float) -> float:
        return self.expect(lambda g, c: (s3 + c) ** (gamma - 1) * c, ())


def _pair_moments(G: Distribution, C: Distribution) -> _PairMoments:
    """Independent ``G`` and ``C``."""
    if isinstance(G, DiscreteLaw):
        def expect(fn, kinks):
            return sum(p * C.expect(lambda c, g=g: fn(g, c), breaks=tuple(g - k for k in kinks))
                       for g, p in zip(*G.atoms))
        return _PairMoments(expect, lambda s: (s,))
    if isinstance(C, DiscreteLaw):
        def expect(fn, kinks):
            return sum(p * G.expect(lambda g, c=c: fn(g, c), breaks=tuple(c + k for k in kinks))
                       for c, p in zip(*C.atoms))
        return _PairMoments(expect, lambda s: (s,))
    return _ContinuousPair(G, C)


class _ContinuousPair(_PairMoments):
    """Both laws continuous: polynomial terms expand into single-law moments,
    and ``E min(G - C, s) = s - E pi_C(G - s)`` with the stop-loss transform
    ``pi_C(d) = E (C - d)^+`` tabulated once."""

    def __init__(self, G: Distribution, C: Distribution):
        self.G, self.C = G, C
        self._pi = _stop_loss(C)
        self._lo = C.lower if math.isfinite(C.lower) else 0.0

    def emin(self, s):
        return s - self.G.expect(lambda g: self._pi(g - s), breaks=(s + self._lo,))

    def second(self):
        G, C = self.G, self.C
        return G.raw_moment(2) - 2 * G.mean() * C.mean() + C.raw_moment(2)

    def c1_term(self, gamma):
        G, C = self.G, self.C
        return (G.raw_moment(2) * C.abs_moment(gamma - 2) - 2 * G.mean() * C.abs_moment(gamma - 1)
                + C.abs_moment(gamma))

    def c2_term(self, s3, gamma):
        return self.C.expect(lambda c: (s3 + c) ** (gamma - 1) * c)


def _stop_loss(C: Distribution, nodes: int = 4000) -> Callable[[float], float]:
    """``d -> E (C - d)^+`` from the survival function, cumulated between table nodes."""
    lo = C.lower
    if not math.isfinite(lo):
        lo = -1.0
        while C.cdf(lo) > 1e-15:
            lo *= 2.0
    hi = max(1.0, abs(lo))
    while 1.0 - C.cdf(hi) > 1e-15:
        hi *= 2.0
    mid = lo + min(hi - lo, 64.0)
    grid = np.unique(np.concatenate([np.linspace(lo, mid, nodes // 2),
                                     mid + np.geomspace(1.0, hi - mid + 1.0, nodes // 2) - 1.0]))
    gx, gw = np.polynomial.legendre.leggauss(10)
    a, b = grid[:-1], grid[1:]
    half = 0.5 * (b - a)
    pts = 0.5 * (a + b)[:, None] + half[:, None] * gx[None, :]
    pieces = ((1.0 - np.asarray(C.cdf(pts))) * gw[None, :]).sum(axis=1) * half
    top = integrate.quad(lambda x: 1.0 - C.cdf(x), hi, math.inf)[0]
    pi = np.concatenate((np.cumsum(pieces[::-1])[::-1], [0.0])) + top
    # pi'(d) = -(1 - F_C(d)) is known exactly, so a Hermite cubic is C^1 and fourth-order accurate
    spline = CubicHermiteSpline(grid, pi, -(1.0 - np.asarray(C.cdf(grid))))
    mean = C.mean()

    def pi_c(d: float) -> float:
        if d <= lo:
            return mean - d  # C >= lo up to negligible mass
        if d >= hi:
            return integrate.quad(lambda x: 1.0 - C.cdf(x), d, math.inf)[0]
        return float(spline(d))

    return pi_c


def _split_moments(eta: Distribution) -> _PairMoments:
    """``G = max(eta, 0)`` and ``C = max(-eta, 0)``."""
    return _PairMoments(
        lambda fn, kinks: eta.expect(lambda t: fn(max(t, 0.0), max(-t, 0.0)), breaks=(0.0, *kinks)),
        lambda s: (s,),
    )


def _smallest_s1(pm: _PairMoments, a: float) -> float:
    """Smallest multiple of S1_GRID with E min(G - C, s1) >= 2a/3 (the map is nondecreasing)."""
    target = 2.0 * a / 3.0

    def ok(idx: int) -> bool:
        return pm.emin(idx * S1_GRID) >= target

    lo = max(0, math.ceil(target / S1_GRID) - 1)  # E min(., s) <= s, so s < 2a/3 never works
    if ok(lo):
        return lo * S1_GRID
    hi = max(lo + 1, 2 * lo)
    while not ok(hi):
        lo, hi = hi, 2 * hi
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if ok(mid):
            hi = mid
        else:
            lo = mid
    return hi * S1_GRID


def _constants(pm: _PairMoments, a: float, gamma: float) -> KorshunovConstants:
    if not a > 0:
        raise NoDrift(f"drift a = {a:g} is not positive; ruin is certain (psi = 1)")
    s1 = _smallest_s1(pm, a)
    s2 = 2.0 ** (gamma - 1) * (gamma - 1) / a * pm.second()
    s3 = max(s1, s2)
    c1 = gamma * (gamma - 1) * 2.0 ** (gamma - 3) * pm.c1_term(gamma)
    c2 = gamma * pm.c2_term(s3, gamma)
    c = 3.0 * max(c1, c2) / (a * gamma) + 0.5 * s3 ** (gamma - 1)
    vals = dict(a=a, gamma=gamma, s1=s1, s2=s2, s3=s3, c1=c1, c2=c2, c=c)
    return KorshunovConstants(**{k: float(v) for k, v in vals.items()})


def korshunov_constants(G: Distribution, C: Distribution, gamma: float = 2.0) -> KorshunovConstants:
    """Constants of the moment bound for independent premium ``G`` and claim ``C``.

    Raises :class:`InfiniteMoment` if ``E|C - G|**gamma`` diverges (see
    :func:`truncation_level` for the remedy when only the premium is heavy).
    """
    if gamma < 2:
        raise ValueError("gamma must be at least 2")
    if math.isfinite(C.upper):
        raise ValueError("the moment bound needs a claim law with unbounded support; use the Lundberg bound")
    for law in (G, C):
        if not math.isfinite(law.abs_moment(gamma)):
            raise InfiniteMoment(f"E|{law.name}|^{gamma:g} is infinite")
    return _constants(_pair_moments(G, C), npc_drift(G, C), gamma)


def korshunov_constants_for_increment(eta: Distribution, gamma: float = 2.0) -> KorshunovConstants:
    """Constants of the moment bound when only the increment law is known.

    The increment is split as premium ``max(eta, 0)`` and claim ``max(-eta, 0)``.
    """
    if gamma < 2:
        raise ValueError("gamma must be at least 2")
    if math.isfinite(eta.lower):
        raise ValueError("the moment bound needs an increment unbounded below; use the Lundberg bound")
    if not math.isfinite(eta.abs_moment(gamma)):
        raise InfiniteMoment(f"E|eta|^{gamma:g} is infinite")
    return _constants(_split_moments(eta), eta.mean(), gamma)


def korshunov_bound(k: KorshunovConstants) -> TailBound:
    c, gamma = k.c, k.gamma
    return TailBound(
        "korshunov",
        {"c": c, "gamma": gamma},
        lambda y: np.where(y > 0, c * np.power(np.maximum(y, 1e-300), 1.0 - gamma), 1.0),
        f"{c:.6g} y^(1-{gamma:g})",
    )


def closed_form_bound(fn: Callable, label: str, **params) -> TailBound:
    return TailBound("closed_form", params, fn, label)


def yang_bound() -> TailBound:
    """Literature bound (1 + 0.1 z)^-0.1 exp(-z) for the GIG-claim model with premium 1.3035."""
    return closed_form_bound(lambda z: (1.0 + 0.1 * z) ** -0.1 * np.exp(-z), "(1+0.1z)^-0.1 exp(-z)", name="yang")


def truncation_level(G: Distribution, C: Distribution) -> float:
    """Smallest ``k`` on a doubling grid with ``E min(k, G) - E C >= (E G - E C) / 2``.

    Truncating the premium at ``k`` keeps a positive drift and makes all
    premium moments finite; the result never exceeds the top of G's support.
    """
    a = npc_drift(G, C)
    if not a > 0:
        raise NoDrift(f"drift {a:g} is not positive")
    ec = C.mean()
    k = 2.0 ** math.floor(math.log2(max(ec + 0.5 * a, 1e-12)))
    while True:
        kk = min(k, G.upper)
        if G.expect(lambda g: min(g, kk), breaks=(kk,)) - ec >= 0.5 * a:
            return kk
        k *= 2.0


def barrier_for_precision(b: TailBound, eps_tail: float) -> float:
    """Smallest barrier ``y`` whose tail bound is at most ``eps_tail``."""
    if not 0.0 < eps_tail < 1.0:
        raise ValueError("eps_tail must lie in (0, 1)")
    if b.kind == "lundberg":
        return -math.log(eps_tail) / b.params["lambda"]
    if b.kind == "korshunov":
        return (b.params["c"] / eps_tail) ** (1.0 / (b.params["gamma"] - 1.0))
    hi = 1.0
    while b.evaluate(hi) > eps_tail:
        hi *= 2.0
        if hi > 1e300:
            raise ToleranceNotMet("closed-form bound does not reach the requested precision")
    lo = 0.0
    while hi - lo > 1e-12 * max(1.0, hi):
        mid = 0.5 * (lo + hi)
        if b.evaluate(mid) <= eps_tail:
            hi = mid
        else:
            lo = mid
    return hi


def interest_tail_term(y: float, j: float, beta: float, F_G: Callable, m1: float) -> float:
    """``j**-beta + F_G(y/j + m1 * j**(beta - 1))`` for the truncated interest domain."""
    if not 0.0 < beta < 1.0:
        raise ValueError("beta must lie in (0, 1)")
    if F_G(0.0) > 0.0:
        raise PositiveMassAtZeroPremium("F_G(0) > 0: the interest truncation error does not vanish in j")
    return j**-beta + float(F_G(y / j + m1 * j ** (beta - 1.0)))
