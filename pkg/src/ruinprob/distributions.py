"""Probability laws for premiums, claims, increments and interest rates.

Every law exposes the same small surface: ``density``/``log_density`` (when
absolutely continuous), ``cdf``, an inverse-transform ``sample`` taking an
explicit ``numpy.random.Generator``, ``expect`` by quadrature or summation,
``raw_moment``/``abs_moment`` and the Laplace transform ``laplace(s) = E e^{-sX}``.
Divergent moments and transforms are reported as ``math.inf``.
"""

from __future__ import annotations

import math
import warnings
from abc import ABC, abstractmethod
from functools import cached_property
from typing import Callable, Sequence

import numpy as np
from scipy import integrate, special, stats
from scipy.interpolate import CubicHermiteSpline

from .errors import NoDensity

ArrayLike = float | np.ndarray

_QUAD_OPTS = dict(limit=400, epsabs=1e-13, epsrel=1e-12)
_QUAD_WARN = 1e-8
# Doublings examined when probing whether an integrand decays on an infinite tail.
_TAIL_DOUBLINGS = 24


class Distribution(ABC):
    """A univariate law on the real line."""

    lower: float = -math.inf
    upper: float = math.inf
    has_density: bool = True
    name: str = "distribution"

    def density(self, x: ArrayLike) -> ArrayLike:
        raise NoDensity(f"{self.name} has no density")

    def log_density(self, x: ArrayLike) -> ArrayLike:
        with np.errstate(divide="ignore"):
            return np.log(self.density(x))

    @abstractmethod
    def cdf(self, x: ArrayLike) -> ArrayLike: ...

    @abstractmethod
    def sample(self, rng: np.random.Generator, size=None) -> ArrayLike: ...

    @abstractmethod
    def expect(self, fn: Callable, breaks: Sequence[float] = ()) -> float: ...

    def raw_moment(self, k: int) -> float:
        if not math.isfinite(self.abs_moment(k)):
            return math.inf
        return self.expect(lambda x: x**k)

    @abstractmethod
    def abs_moment(self, p: float) -> float: ...

    @abstractmethod
    def laplace(self, s: float) -> float:
        """E exp(-s X) for real ``s``; ``inf`` where it diverges."""

    def mgf(self, t: float) -> float:
        return self.laplace(t)

    def mean(self) -> float:
        return self.raw_moment(1)

    def __repr__(self) -> str:
        return f"<{type(self).__name__} {self.name}>"


IncrementDistribution = Distribution


class ContinuousLaw(Distribution):
    """Absolutely continuous law integrated with adaptive quadrature.

    Subclasses provide ``density``, ``cdf`` and ``sample``; moment and
    transform finiteness are decided by probing the integrand on the
    infinite tails (it must decay faster than ``1/x``).
    """

    breaks: tuple[float, ...] = ()
    tail_start: float = 64.0

    def _segments(self, breaks: Sequence[float]) -> list[tuple[float, float]]:
        pts = sorted({float(b) for b in (*self.breaks, *breaks) if self.lower < b < self.upper})
        edges = [self.lower, *pts, self.upper]
        return list(zip(edges[:-1], edges[1:]))

    def _integrate(self, integrand: Callable[[float], float], breaks: Sequence[float]) -> float:
        # quad complains whenever the very tight absolute tolerance is out of reach;
        # only an error estimate that is large in relative terms is worth a warning
        total = err = 0.0
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", integrate.IntegrationWarning)
            for a, b in self._segments(breaks):
                val, e = integrate.quad(integrand, a, b, **_QUAD_OPTS)
                total += val
                err += e
        if err > _QUAD_WARN * max(1.0, abs(total)):
            warnings.warn(f"{self.name}: quadrature error estimate {err:.2e}", integrate.IntegrationWarning,
                          stacklevel=3)
        return total

    def expect(self, fn, breaks=()):
        return self._integrate(lambda x: fn(x) * self.density(x), breaks)

    def _tail_decays(self, log_weight: Callable[[np.ndarray], np.ndarray]) -> bool:
        """True when |x| * weight(x) * f(x) decreases geometrically on every infinite tail."""
        grid = self.tail_start * 2.0 ** np.arange(_TAIL_DOUBLINGS, dtype=float)
        for sign, bound in ((1.0, self.upper), (-1.0, self.lower)):
            if math.isfinite(bound):
                continue
            xs = sign * grid
            with np.errstate(over="ignore", divide="ignore", invalid="ignore"):
                vals = log_weight(xs) + np.asarray(self.log_density(xs)) + np.log(grid)
            tail = vals[-4:]
            if np.all(tail == -np.inf):
                continue
            if np.any(np.isnan(tail)) or not np.all(np.diff(tail) < -1e-6):
                return False
        return True

    def abs_moment(self, p):
        if p == 0:
            return 1.0
        if not self._tail_decays(lambda x: p * np.log(np.abs(x))):
            return math.inf
        return self.expect(lambda x: abs(x) ** p, breaks=(0.0,))

    def laplace(self, s):
        if s == 0:
            return 1.0
        if not self._tail_decays(lambda x: -s * x):
            return math.inf

        def integrand(x):
            lf = self.log_density(x)
            return 0.0 if lf == -np.inf else math.exp(-s * x + lf)

        return self._integrate(integrand, ())


class TabulatedCDF:
    """Cumulative distribution tabulated on sorted nodes.

    Values between nodes come from cubic Hermite interpolation using the
    density as the derivative; inverse-transform sampling starts from linear
    interpolation of the inverse and polishes with one safeguarded Newton step.
    """

    def __init__(self, nodes, values, slopes, exact_cdf=None, density=None):
        self.nodes = np.asarray(nodes, dtype=float)
        self.values = np.asarray(values, dtype=float)
        self._spline = CubicHermiteSpline(self.nodes, self.values, np.asarray(slopes, dtype=float))
        self._exact = exact_cdf
        self._density = density
        keep = np.concatenate(([True], np.diff(self.values) > 0))
        self._inv_u = self.values[keep]
        self._inv_x = self.nodes[keep]

    @classmethod
    def from_density(cls, density, nodes, normalize=True):
        """Integrate ``density`` between consecutive nodes with 10-point Gauss-Legendre."""
        nodes = np.asarray(nodes, dtype=float)
        gx, gw = np.polynomial.legendre.leggauss(10)
        a, b = nodes[:-1], nodes[1:]
        half = 0.5 * (b - a)
        pts = 0.5 * (a + b)[:, None] + half[:, None] * gx[None, :]
        pieces = (density(pts) * gw[None, :]).sum(axis=1) * half
        values = np.concatenate(([0.0], np.cumsum(pieces)))
        slopes = density(nodes)
        total = values[-1]
        if normalize:
            values, slopes = values / total, slopes / total
        table = cls(nodes, values, slopes, density=lambda x: density(x) / (total if normalize else 1.0))
        table.total_mass = total
        return table

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        out = np.clip(self._spline(np.clip(x, self.nodes[0], self.nodes[-1])), 0.0, 1.0)
        out = np.where(x <= self.nodes[0], self.values[0], out)
        out = np.where(x >= self.nodes[-1], self.values[-1], out)
        return out if out.ndim else float(out)

    def invert(self, u):
        u = np.asarray(u, dtype=float)
        x = np.interp(u, self._inv_u, self._inv_x)
        idx = np.clip(np.searchsorted(self._inv_u, u), 1, len(self._inv_u) - 1)
        lo, hi = self._inv_x[idx - 1], self._inv_x[idx]
        cdf = self._exact if self._exact is not None else self
        f = self._density(x)
        with np.errstate(divide="ignore", invalid="ignore"):
            step = np.where(f > 1e-300, (cdf(x) - u) / f, 0.0)
        return np.clip(x - step, lo, hi)


def chebyshev_nodes(a: float, b: float, n: int) -> np.ndarray:
    """Chebyshev-Lobatto points on [a, b], endpoints included, increasing."""
    theta = np.pi * np.arange(n) / (n - 1)
    return a + (b - a) * 0.5 * (1.0 - np.cos(theta))


class GIGClaimLaw(ContinuousLaw):
    """Claim law with density x^-2 exp(-x - 1/x) / (2k) on x >= 0.

    This is a generalized inverse Gaussian law with index -1; the exact
    normalizer is the Bessel value K_1(2) ~ 0.1398659, and the default
    ``k`` is that value rounded to six digits.  With ``normalize`` (the
    default) every formula uses the exact normalizer, so density, CDF,
    transform and moments describe one probability law; otherwise ``k`` is
    used as given and the density carries mass K_1(2) / k.
    """

    lower = 0.0
    breaks = (0.25, 0.5, 1.0, 2.0, 5.0)
    tail_start = 64.0
    name = "gig"

    def __init__(self, k: float = 0.139866, table_nodes: int = 2048, table_max: float = 60.0,
                 normalize: bool = True):
        self.k = k
        self.norm = float(special.k1(2.0)) if normalize else k
        self.table_nodes = table_nodes
        self.table_max = table_max

    def log_density(self, x):
        x = np.asarray(x, dtype=float)
        pos = x > 0
        xs = np.where(pos, x, 1.0)
        out = np.where(pos, -xs - 1.0 / xs - 2.0 * np.log(xs) - math.log(2.0 * self.norm), -np.inf)
        return out if out.ndim else float(out)

    def density(self, x):
        out = np.exp(self.log_density(x))
        return out if np.ndim(out) else float(out)

    @cached_property
    def _table(self) -> TabulatedCDF:
        nodes = chebyshev_nodes(0.0, self.table_max, self.table_nodes)
        return TabulatedCDF.from_density(self.density, nodes)

    def cdf(self, x):
        return self._table(x)

    def sample(self, rng, size=None):
        return self._table.invert(rng.random(size))

    def laplace(self, s):
        # integral of x^-2 exp(-(1+s)x - 1/x) equals 2 sqrt(1+s) K_1(2 sqrt(1+s))
        if s < -1.0:
            return math.inf
        if s == -1.0:
            return 1.0 / (2.0 * self.norm)
        r = math.sqrt(1.0 + s)
        return r * special.k1(2.0 * r) / self.norm

    def raw_moment(self, k):
        # E C^m = K_{m-1}(2) / k
        return float(special.kv(k - 1, 2.0) / self.norm)

    def abs_moment(self, p):
        return float(special.kv(p - 1, 2.0) / self.norm)


_SQRT2 = math.sqrt(2.0)


class HeavyTailIncrement(ContinuousLaw):
    """Increment law with density sqrt(2) / (pi (1 + (t-1)^4)).

    Symmetric about 1 with polynomial tails: E|X|^p is finite exactly for p < 3.
    """

    breaks = (0.0, 1.0, 2.0)
    tail_start = 64.0
    name = "heavytail"

    def density(self, x):
        x = np.asarray(x, dtype=float)
        out = _SQRT2 / (np.pi * (1.0 + (x - 1.0) ** 4))
        return out if out.ndim else float(out)

    def log_density(self, x):
        x = np.asarray(x, dtype=float)
        out = math.log(_SQRT2 / np.pi) - np.log1p((x - 1.0) ** 4)
        return out if out.ndim else float(out)

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        u = x - 1.0
        num = (
            np.pi
            - np.arctan(1.0 + _SQRT2 - x * _SQRT2)
            + np.arctan(1.0 - _SQRT2 + x * _SQRT2)
            + np.arctanh(_SQRT2 * u / (1.0 + u * u))
        )
        out = np.clip(num / (2.0 * np.pi), 0.0, 1.0)
        return out if out.ndim else float(out)

    @cached_property
    def _table(self) -> TabulatedCDF:
        s = np.linspace(-math.asinh(1e4), math.asinh(1e4), 4097)
        nodes = 1.0 + np.sinh(s)
        return TabulatedCDF(nodes, self.cdf(nodes), self.density(nodes), exact_cdf=self.cdf, density=self.density)

    def sample(self, rng, size=None):
        return self._table.invert(rng.random(size))

    def raw_moment(self, k):
        if k >= 3:
            return math.inf
        return {0: 1.0, 1: 1.0, 2: 2.0}[k] if k in (0, 1, 2) else super().raw_moment(k)

    def abs_moment(self, p):
        if p >= 3:
            return math.inf
        return super().abs_moment(p)

    def laplace(self, s):
        return 1.0 if s == 0 else math.inf


class ScipyLaw(ContinuousLaw):
    """Wrapper around a frozen continuous ``scipy.stats`` law; sampling by ``ppf``."""

    def __init__(self, frozen, name: str, laplace_fn: Callable[[float], float] | None = None):
        self.frozen = frozen
        self.name = name
        self._laplace_fn = laplace_fn
        lo, hi = frozen.support()
        self.lower, self.upper = float(lo), float(hi)
        self.breaks = (float(frozen.median()),)
        self.tail_start = max(1.0, abs(float(frozen.ppf(1e-9))), abs(float(frozen.ppf(1 - 1e-9))))

    def density(self, x):
        return self.frozen.pdf(x)

    def log_density(self, x):
        return self.frozen.logpdf(x)

    def cdf(self, x):
        return self.frozen.cdf(x)

    def sample(self, rng, size=None):
        return self.frozen.ppf(rng.random(size))

    def laplace(self, s):
        if self._laplace_fn is not None:
            return self._laplace_fn(s)
        return super().laplace(s)


def exponential(rate: float = 1.0) -> ScipyLaw:
    return ScipyLaw(
        stats.expon(scale=1.0 / rate),
        f"exponential({rate:g})",
        lambda s: rate / (rate + s) if s > -rate else math.inf,
    )


def uniform(low: float, high: float) -> ScipyLaw:
    def lap(s):
        if s == 0:
            return 1.0
        return (math.exp(-s * low) - math.exp(-s * high)) / (s * (high - low))

    return ScipyLaw(stats.uniform(loc=low, scale=high - low), f"uniform({low:g},{high:g})", lap)


def gaussian(mean: float = 0.0, sd: float = 1.0) -> ScipyLaw:
    return ScipyLaw(
        stats.norm(loc=mean, scale=sd),
        f"gaussian({mean:g},{sd:g})",
        lambda s: math.exp(-s * mean + 0.5 * (s * sd) ** 2),
    )


def pareto(alpha: float, xmin: float = 1.0) -> ScipyLaw:
    return ScipyLaw(stats.pareto(alpha, scale=xmin), f"pareto({alpha:g},{xmin:g})")


class TwoSidedExponential(ContinuousLaw):
    """Exp(``up_rate``) with probability ``p_up``, otherwise minus an Exp(``down_rate``)."""

    breaks = (0.0,)

    def __init__(self, p_up: float, up_rate: float, down_rate: float):
        if not (0.0 < p_up < 1.0 and up_rate > 0 and down_rate > 0):
            raise ValueError("need 0 < p_up < 1 and positive rates")
        self.p, self.a, self.b = float(p_up), float(up_rate), float(down_rate)
        self.name = f"two_sided_exp({p_up:g};{up_rate:g},{down_rate:g})"
        self.tail_start = 40.0 / min(self.a, self.b)

    def density(self, x):
        x = np.asarray(x, dtype=float)
        out = np.where(x >= 0, self.p * self.a * np.exp(-self.a * np.abs(x)),
                       (1 - self.p) * self.b * np.exp(-self.b * np.abs(x)))
        return out if out.ndim else float(out)

    def log_density(self, x):
        x = np.asarray(x, dtype=float)
        out = np.where(x >= 0, math.log(self.p * self.a) - self.a * np.abs(x),
                       math.log((1 - self.p) * self.b) - self.b * np.abs(x))
        return out if out.ndim else float(out)

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        out = np.where(x >= 0, 1.0 - self.p * np.exp(-self.a * np.abs(x)),
                       (1 - self.p) * np.exp(-self.b * np.abs(x)))
        return out if out.ndim else float(out)

    def sample(self, rng, size=None):
        u = rng.random(size)
        v = 1.0 - rng.random(size)  # in (0, 1]
        return np.where(u < self.p, -np.log(v) / self.a, np.log(v) / self.b)

    def raw_moment(self, k):
        return math.factorial(k) * (self.p / self.a**k + (1 - self.p) * (-1.0 / self.b) ** k)

    def abs_moment(self, p):
        return math.gamma(p + 1) * (self.p / self.a**p + (1 - self.p) / self.b**p)

    def laplace(self, s):
        if not -self.a < s < self.b:
            return math.inf
        return self.p * self.a / (self.a + s) + (1 - self.p) * self.b / (self.b - s)


class DiscreteLaw(Distribution):
    """Finitely supported law; expectations are exact sums."""

    has_density = False

    def __init__(self, values: Sequence[float], probs: Sequence[float], name: str = "discrete"):
        values = np.asarray(values, dtype=float)
        probs = np.asarray(probs, dtype=float)
        if values.shape != probs.shape or values.ndim != 1 or len(values) == 0:
            raise ValueError("values and probs must be equal-length 1-d sequences")
        if np.any(probs < 0) or abs(probs.sum() - 1.0) > 1e-12:
            raise ValueError("probabilities must be nonnegative and sum to 1")
        order = np.argsort(values, kind="stable")
        self.values = values[order]
        self.probs = probs[order]
        self._cum = np.cumsum(self.probs)
        self.lower = float(self.values[0])
        self.upper = float(self.values[-1])
        self.name = name

    @property
    def atoms(self) -> tuple[np.ndarray, np.ndarray]:
        return self.values, self.probs

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        idx = np.searchsorted(self.values, x, side="right")
        out = np.where(idx > 0, self._cum[np.maximum(idx - 1, 0)], 0.0)
        out = np.minimum(out, 1.0)
        return out if out.ndim else float(out)

    def sample(self, rng, size=None):
        u = rng.random(size)
        idx = np.minimum(np.searchsorted(self._cum, u, side="right"), len(self.values) - 1)
        return self.values[idx]

    def expect(self, fn, breaks=()):
        return float(sum(p * fn(v) for v, p in zip(self.values, self.probs)))

    def abs_moment(self, p):
        return self.expect(lambda v: abs(v) ** p)

    def raw_moment(self, k):
        return self.expect(lambda v: v**k)

    def laplace(self, s):
        return float(np.sum(self.probs * np.exp(-s * self.values)))


def degenerate(value: float) -> DiscreteLaw:
    return DiscreteLaw([value], [1.0], name=f"degenerate({value:g})")


def two_point(up: float, down: float, p_up: float) -> DiscreteLaw:
    """Law putting mass ``p_up`` on ``up`` and the rest on ``down``."""
    return DiscreteLaw([up, down], [p_up, 1.0 - p_up], name=f"two_point({up:g},{down:g};{p_up:g})")


class PremiumMinusClaim(ContinuousLaw):
    """Increment G - C for a finitely supported premium G and an independent continuous claim C."""

    def __init__(self, premium: DiscreteLaw, claim: ContinuousLaw):
        if not isinstance(premium, DiscreteLaw):
            raise TypeError("premium must be finitely supported (use degenerate() or DiscreteLaw)")
        if not claim.has_density:
            raise TypeError("claim law must be absolutely continuous")
        self.premium = premium
        self.claim = claim
        g, _ = premium.atoms
        self.lower = float(g.min() - claim.upper)
        self.upper = float(g.max() - claim.lower)
        self.breaks = tuple(float(v - b) for v in g for b in claim.breaks)
        self.tail_start = claim.tail_start + float(np.abs(g).max())
        self.name = f"{premium.name}-{claim.name}"

    def density(self, x):
        x = np.asarray(x, dtype=float)
        out = np.zeros_like(x)
        for g, p in zip(*self.premium.atoms):
            out = out + p * self.claim.density(g - x)
        return out if out.ndim else float(out)

    def log_density(self, x):
        with np.errstate(divide="ignore"):
            if len(self.premium.values) == 1:
                out = np.asarray(self.claim.log_density(self.premium.values[0] - np.asarray(x, dtype=float)))
                return out if out.ndim else float(out)
            return np.log(self.density(x))

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        out = np.zeros_like(x)
        for g, p in zip(*self.premium.atoms):
            out = out + p * (1.0 - self.claim.cdf(g - x))
        out = np.clip(out, 0.0, 1.0)
        return out if out.ndim else float(out)

    def sample(self, rng, size=None):
        g = self.premium.sample(rng, size)
        return g - self.claim.sample(rng, size)

    def expect(self, fn, breaks=()):
        return float(
            sum(
                p * self.claim.expect(lambda c, g=g: fn(g - c), breaks=tuple(g - b for b in breaks))
                for g, p in zip(*self.premium.atoms)
            )
        )

    def abs_moment(self, p):
        if not math.isfinite(self.claim.abs_moment(p)):
            return math.inf
        return self.expect(lambda x: abs(x) ** p, breaks=(0.0,))

    def raw_moment(self, k):
        if not math.isfinite(self.claim.abs_moment(k)):
            return math.inf
        return self.expect(lambda x: x**k)

    def mean(self):
        return self.premium.mean() - self.claim.mean()

    def laplace(self, s):
        inner = self.claim.laplace(-s)
        if not math.isfinite(inner):
            return math.inf
        return float(np.sum(self.premium.probs * np.exp(-s * self.premium.values)) * inner)


class IndependentDifference(Distribution):
    """Law of ``G - C`` for independent ``G`` and ``C`` of any type.

    Used when the premium is not finitely supported, so the increment has no
    closed-form density.  Integrals nest one expectation inside the other and
    are slow; the class serves bounds, drift checks and simulation.
    """

    has_density = False

    def __init__(self, premium: Distribution, claim: Distribution):
        self.premium = premium
        self.claim = claim
        self.lower = premium.lower - claim.upper
        self.upper = premium.upper - claim.lower
        self.name = f"{premium.name}-{claim.name}"

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        G, C = self.premium, self.claim
        out = np.array([G.expect(lambda g, t=t: 1.0 - float(C.cdf(g - t))) for t in x.ravel()]).reshape(x.shape)
        return out if out.ndim else float(out)

    def sample(self, rng, size=None):
        g = self.premium.sample(rng, size)
        return g - self.claim.sample(rng, size)

    def expect(self, fn, breaks=()):
        C = self.claim
        return self.premium.expect(lambda g: C.expect(lambda c: fn(g - c), breaks=tuple(g - b for b in breaks)))

    def abs_moment(self, p):
        if not (math.isfinite(self.premium.abs_moment(p)) and math.isfinite(self.claim.abs_moment(p))):
            return math.inf
        return self.expect(lambda x: abs(x) ** p, breaks=(0.0,))

    def mean(self):
        return self.premium.mean() - self.claim.mean()

    def laplace(self, s):
        a, b = self.premium.laplace(s), self.claim.laplace(-s)
        return a * b if math.isfinite(a) and math.isfinite(b) else math.inf


class Capped(Distribution):
    """Law of ``min(X, cap)``; used to truncate a heavy-tailed premium."""

    has_density = False

    def __init__(self, base: Distribution, cap: float):
        if not cap > base.lower:
            raise ValueError("cap must exceed the lower end of the support")
        self.base = base
        self.cap = float(cap)
        self.lower = base.lower
        self.upper = min(base.upper, self.cap)
        self.name = f"min({base.name},{cap:g})"

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        out = np.where(x >= self.cap, 1.0, self.base.cdf(x))
        return out if out.ndim else float(out)

    def sample(self, rng, size=None):
        return np.minimum(self.base.sample(rng, size), self.cap)

    def expect(self, fn, breaks=()):
        cap = self.cap
        return self.base.expect(lambda x: fn(min(x, cap)), breaks=(*breaks, cap))

    def abs_moment(self, p):
        if math.isinf(self.lower) and not math.isfinite(self.base.abs_moment(p)):
            return math.inf
        return self.expect(lambda x: abs(x) ** p)

    def laplace(self, s):
        if s > 0 and math.isinf(self.lower) and not math.isfinite(self.base.laplace(s)):
            return math.inf
        return self.expect(lambda x: math.exp(-s * x))
