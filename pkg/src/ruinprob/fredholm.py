"""Two-barrier probability for random-walk surplus via a Nystrom discretization.

For ``z`` in ``[0, y]`` the probability ``h(z)`` of climbing above ``y`` before
dropping below 0 solves the second-kind equation

    h(z) = (1 - F(y - z)) + integral_0^y h(t) f(t - z) dt,

where ``f``/``F`` are the increment density and CDF.  The integral is replaced
by a composite Gauss-Legendre rule, the resulting dense system is solved by LU,
and the solution is extended off the nodes by the Nystrom formula.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import linalg
from scipy.linalg import lapack

from .distributions import Distribution
from .errors import NoDensity, ResidualTooLarge, SingularSystem

MAX_NODES = 8192
_CHUNK = 512


@dataclass(frozen=True)
class QuadratureRule:
    """Composite Gauss-Legendre rule on ``[a, b]`` with equal panels."""

    nodes: np.ndarray
    weights: np.ndarray
    a: float
    b: float
    panels: int
    order: int

    @property
    def n(self) -> int:
        return len(self.nodes)

    @property
    def degree(self) -> int:
        """Highest polynomial degree integrated exactly."""
        return 2 * self.order - 1


def composite_gauss_legendre(a: float, b: float, panels: int, order: int = 8) -> QuadratureRule:
    x, w = np.polynomial.legendre.leggauss(order)
    edges = np.linspace(a, b, panels + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[:-1] + edges[1:])
    nodes = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    weights = (half[:, None] * w[None, :]).ravel()
    return QuadratureRule(nodes, weights, float(a), float(b), panels, order)


@dataclass(frozen=True)
class SolveReport:
    residual: float
    operator_norm: float
    resolvent_norm: float
    error_bound: float
    nodes: int
    rcond: float
    clamp_excursion: float
    method: str = "dense LU"
    refinements: tuple = ()

    def to_dict(self) -> dict:
        return {
            "residual": self.residual,
            "operator_norm": self.operator_norm,
            "resolvent_norm": self.resolvent_norm,
            "error_bound": self.error_bound,
            "nodes": self.nodes,
            "rcond": self.rcond,
            "clamp_excursion": self.clamp_excursion,
            "method": self.method,
            "refinements": [list(r) for r in self.refinements],
        }


def _rhs(inc: Distribution, y: float, z):
    return 1.0 - inc.cdf(y - np.asarray(z, dtype=float))


@dataclass(frozen=True)
class GridFunction:
    """Two-barrier probability ``phi(., y)`` stored at quadrature nodes.

    Calling the object evaluates ``phi`` anywhere: 0 below 0, 1 above ``y``,
    and the Nystrom extension (clamped to [0, 1]) in between.
    """

    y: float
    rule: QuadratureRule
    values: np.ndarray
    increment: Distribution = field(repr=False)

    def h(self, z) -> np.ndarray:
        """Unclamped Nystrom extension of the node values."""
        z = np.atleast_1d(np.asarray(z, dtype=float))
        out = np.empty_like(z)
        wh = self.rule.weights * self.values
        for s in range(0, len(z), _CHUNK):
            zz = z[s : s + _CHUNK]
            K = self.increment.density(self.rule.nodes[None, :] - zz[:, None])
            out[s : s + _CHUNK] = _rhs(self.increment, self.y, zz) + K @ wh
        return out

    def __call__(self, z):
        z = np.asarray(z, dtype=float)
        flat = np.atleast_1d(z)
        out = np.where(flat > self.y, 1.0, 0.0)
        inside = (flat >= 0.0) & (flat <= self.y)
        if inside.any():
            out[inside] = np.clip(self.h(flat[inside]), 0.0, 1.0)
        return out.reshape(z.shape) if z.ndim else float(out[0])

    def ruin(self, z):
        """Approximate ruin probability ``1 - phi``."""
        return 1.0 - np.asarray(self(z))

    def table(self, z=None) -> list[tuple[float, float, float]]:
        z = self.rule.nodes if z is None else np.asarray(z, dtype=float)
        phi = np.atleast_1d(self(z))
        return [(float(a), float(b), float(1.0 - b)) for a, b in zip(np.atleast_1d(z), phi)]

    def to_csv(self, path, z=None) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["z", "phi", "one_minus_phi"])
            for row in self.table(z):
                w.writerow([f"{v:.12g}" for v in row])

    def to_json(self, path, report: SolveReport | None = None) -> None:
        doc = {
            "y": self.y,
            "n": self.rule.n,
            "panels": self.rule.panels,
            "order": self.rule.order,
            "nodes": self.rule.nodes.tolist(),
            "phi": np.clip(self.values, 0.0, 1.0).tolist(),
        }
        if report is not None:
            doc["residual"] = report.residual
            doc["report"] = report.to_dict()
        with open(path, "w") as fh:
            json.dump(doc, fh, indent=2, sort_keys=True)


def operator_norm(inc: Distribution, y: float, probes: int = 2001) -> float:
    """max over z in [0, y] of the kernel mass ``P(z + eta in [0, y])``.

    Estimated on a uniform probe grid using the CDF differences
    ``F(y - z) - F(-z)``.
    """
    if not inc.has_density:
        raise NoDensity(f"{inc.name} has no density; route discrete laws to the chain solver")
    z = np.linspace(0.0, y, probes)
    mass = np.asarray(inc.cdf(y - z)) - np.asarray(inc.cdf(-z))
    return float(np.clip(mass.max(), 0.0, 1.0))


def _rcond(lu: np.ndarray, anorm: float) -> float:
    rc, info = lapack.dgecon(lu, anorm, norm="1")
    return float(rc) if info == 0 else 0.0


def _residual(gf: GridFunction, probes: int) -> float:
    """Sup of |h - rhs - integral(h f)| at off-node probes, integral by a finer rule."""
    rule = gf.rule
    fine = composite_gauss_legendre(0.0, gf.y, 2 * rule.panels, max(rule.order, 12))
    h_fine = gf.h(fine.nodes)
    wh = fine.weights * h_fine
    z = (np.arange(probes) + 0.5) * gf.y / probes
    worst = 0.0
    for s in range(0, probes, _CHUNK):
        zz = z[s : s + _CHUNK]
        K = gf.increment.density(fine.nodes[None, :] - zz[:, None])
        r = gf.h(zz) - _rhs(gf.increment, gf.y, zz) - K @ wh
        worst = max(worst, float(np.max(np.abs(r))))
    return worst


def _solve(inc: Distribution, y: float, n: int, order: int) -> tuple[GridFunction, SolveReport]:
    if not inc.has_density:
        raise NoDensity(f"{inc.name} has no density; route discrete laws to the chain solver")
    if not y > 0:
        raise ValueError("barrier y must be positive")
    panels = max(1, math.ceil(n / order))
    rule = composite_gauss_legendre(0.0, y, panels, order)
    t = rule.nodes
    A = -inc.density(t[None, :] - t[:, None]) * rule.weights[None, :]
    A[np.diag_indices_from(A)] += 1.0
    anorm = float(np.abs(A).sum(axis=0).max())
    lu, piv = linalg.lu_factor(A, check_finite=False)
    rc = _rcond(lu, anorm)
    if not rc > 1e-13:
        raise SingularSystem(f"I - K is numerically singular (rcond {rc:.2e}); fixpoint may not be unique")
    values = linalg.lu_solve((lu, piv), _rhs(inc, y, t))
    # (I - K)^-1 is a positive operator, so its sup-norm is attained on the constant 1
    resolvent = float(linalg.lu_solve((lu, piv), np.ones_like(t)).max())
    gf = GridFunction(float(y), rule, values, inc)
    residual = _residual(gf, 4 * rule.n)
    excursion = float(max(0.0, -values.min(), values.max() - 1.0))
    report = SolveReport(
        residual=residual,
        operator_norm=operator_norm(inc, y),
        resolvent_norm=resolvent,
        error_bound=resolvent * residual,
        nodes=rule.n,
        rcond=rc,
        clamp_excursion=excursion,
    )
    return gf, report


def solve_two_barrier(
    inc: Distribution, y: float, n: int = 256, tol: float | None = None, order: int = 8
) -> tuple[GridFunction, SolveReport]:
    """Solve for ``phi(., y)`` with about ``n`` nodes (rounded up to whole panels).

    Raises :class:`ResidualTooLarge` when ``tol`` is given and the off-node
    residual exceeds it.
    """
    gf, report = _solve(inc, y, n, order)
    if tol is not None and report.residual > tol:
        raise ResidualTooLarge(f"residual {report.residual:.3e} > {tol:g} with {report.nodes} nodes")
    return gf, report


def refine_until(
    inc: Distribution,
    y: float,
    tol: float,
    n0: int = 64,
    n_max: int = MAX_NODES,
    order: int = 8,
    probes: int = 201,
) -> tuple[GridFunction, SolveReport]:
    """Double the node count until successive solutions and the residual are within ``tol``."""
    z = np.linspace(0.0, y, probes)
    prev = None
    history = []
    n = n0
    while True:
        gf, report = _solve(inc, y, n, order)
        cur = gf(z)
        # values lie in [0, 1], so 1 bounds the change for the first solve
        change = 1.0 if prev is None else float(np.max(np.abs(cur - prev)))
        history.append((report.nodes, change, report.residual))
        if change <= tol and report.residual <= tol:
            return gf, _with_history(report, history)
        if 2 * n > n_max:
            raise ResidualTooLarge(
                f"no convergence to {tol:g} by {report.nodes} nodes "
                f"(change {change:.3e}, residual {report.residual:.3e})"
            )
        prev = cur
        n *= 2


def _with_history(report: SolveReport, history) -> SolveReport:
    d = {k: getattr(report, k) for k in report.__dataclass_fields__}
    d["refinements"] = tuple(history)
    return SolveReport(**d)
