"""Two-barrier probability for the interest-rate model on a surplus x interest grid.

The surplus interval ``[0, y]`` is cut into cells represented by their
midpoints; transition probabilities between cells are exact CDF differences
of the claim law, with two absorbing super-states for ruin (``z < 0``) and
the target (``z > y`` or interest above the truncation level ``j``).  The
resulting chain is iterated under a contraction certificate, and the
discretization error is estimated by comparing against a half-resolution grid.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field

import numpy as np
from scipy.sparse.linalg import LinearOperator

from .distributions import DiscreteLaw, Distribution
from .errors import GridTooCoarse
from .models import FiniteChain, InterestRate
from .reachavoid import ContractionCertificate, contraction_certificate, reachavoid_iterate

DEFAULT_CELLS = 400
ROW_TOL = 1e-6


@dataclass(frozen=True)
class Grid2D:
    """Surplus cells on ``[0, y]`` crossed with interest nodes on ``[0, j]``."""

    edges: np.ndarray
    interest: np.ndarray

    def __post_init__(self):
        if np.any(np.diff(self.edges) <= 0) or np.any(np.diff(self.interest) <= 0):
            raise ValueError("grid nodes must be strictly increasing")
        if self.edges[0] != 0.0 or self.interest[0] < 0.0:
            raise ValueError("grid must start at surplus 0 and nonnegative interest")

    @classmethod
    def uniform(cls, y: float, cells: int, interest) -> "Grid2D":
        return cls(np.linspace(0.0, y, cells + 1), np.asarray(interest, dtype=float))

    @property
    def y(self) -> float:
        return float(self.edges[-1])

    @property
    def j(self) -> float:
        return float(self.interest[-1])

    @property
    def midpoints(self) -> np.ndarray:
        return 0.5 * (self.edges[:-1] + self.edges[1:])

    @property
    def shape(self) -> tuple[int, int]:
        return len(self.edges) - 1, len(self.interest)


def _quantize(law: Distribution, atoms: int = 64) -> DiscreteLaw:
    if isinstance(law, DiscreteLaw):
        return law
    u = (np.arange(atoms) + 0.5) / atoms
    qs = np.array([_quantile(law, p) for p in u])
    return DiscreteLaw(qs, np.full(atoms, 1.0 / atoms), name=f"quantized {law.name}")


def _quantile(law: Distribution, p: float) -> float:
    lo = law.lower if np.isfinite(law.lower) else -1.0
    hi = law.upper if np.isfinite(law.upper) else 1.0
    while np.isinf(law.lower) and law.cdf(lo) > p:
        lo *= 2.0
    while np.isinf(law.upper) and law.cdf(hi) < p:
        hi *= 2.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if law.cdf(mid) < p:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def _interest_kernel(model: InterestRate, grid: Grid2D):
    """Q[a, b] = P(next interest -> node b | node a); leftover mass exits above j."""
    W = _quantize(model.interest_noise)
    nodes = grid.interest
    A = len(nodes)
    Q = np.zeros((A, A))
    if model.alpha == 0.0 and len(W.values) == A and np.allclose(W.values, nodes):
        Q[:] = W.probs[None, :]
        return Q
    for a, i in enumerate(nodes):
        nxt = model.alpha * i + W.values
        inside = nxt <= grid.j * (1 + 1e-12)
        idx = np.abs(nxt[inside, None] - nodes[None, :]).argmin(axis=1)
        np.add.at(Q[a], idx, W.probs[inside])
    return Q


@dataclass(frozen=True)
class _Kernel:
    premium: DiscreteLaw
    claim: Distribution

    def probs(self, z: np.ndarray, i: float, edges: np.ndarray):
        """Cell masses (len(z) x cells), P(z' > y) and P(z' < 0) from surplus ``z`` at interest ``i``."""
        y = edges[-1]
        cells = np.zeros((len(z), len(edges) - 1))
        up = np.zeros(len(z))
        down = np.zeros(len(z))
        # Ruin mass is measured against the claim law's own total mass rather than
        # taken as a complement, so a defective CDF shows up as a row-sum defect.
        mass = float(self.claim.cdf(np.inf))
        for g, p in zip(*self.premium.atoms):
            s = (z + g) * (1.0 + i)
            Fc = self.claim.cdf(s[:, None] - edges[None, :])  # P(z' <= e) = 1 - F_C(s - e)
            cells += p * (Fc[:, :-1] - Fc[:, 1:])
            up += p * np.asarray(self.claim.cdf(s - y))
            down += p * (mass - np.asarray(self.claim.cdf(s)))
        return np.maximum(cells, 0.0), up, down


@dataclass(frozen=True)
class GridSolution:
    """Reach-avoid values ``w(z, i)`` on a :class:`Grid2D` with error accounting."""

    grid: Grid2D
    values: np.ndarray  # cells x interest nodes
    certificate: ContractionCertificate
    iterations: int
    iteration_error: float
    discretization_error: float | None
    model: InterestRate = field(repr=False)
    _Q: np.ndarray = field(repr=False)

    @property
    def error(self) -> float:
        return self.iteration_error + (self.discretization_error or 0.0)

    def __call__(self, z, i):
        """``w`` at arbitrary surplus ``z`` and interest node or (if alpha = 0) any rate ``i``.

        Off-grid values come from one exact backup step over the stored grid values.
        """
        z = np.atleast_1d(np.asarray(z, dtype=float))
        kern = _Kernel(_quantize(self.model.premium), self.model.claim)
        nodes = self.grid.interest
        if self.model.alpha == 0.0:
            q = self._Q[0]
            # with alpha = 0 the next rate ignores the current one
            row_exit = 1.0 - q.sum()
        else:
            a = int(np.abs(nodes - i).argmin())
            q = self._Q[a]
            row_exit = 1.0 - q.sum()
        cont = self.values @ q
        cells, up, _ = kern.probs(z, float(i), self.grid.edges)
        out = up + cells @ cont + row_exit * cells.sum(axis=1)
        out = np.where(z > self.grid.y, 1.0, np.where(z < 0.0, 0.0, np.clip(out, 0.0, 1.0)))
        return out if len(out) > 1 else float(out[0])

    def rows(self):
        mids = self.grid.midpoints
        for b, i in enumerate(self.grid.interest):
            for k, z in enumerate(mids):
                w = float(np.clip(self.values[k, b], 0.0, 1.0))
                yield float(z), float(i), w, 1.0 - w

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            out = csv.writer(fh, lineterminator="\n")
            out.writerow(["z", "i", "w", "one_minus_w"])
            for row in self.rows():
                out.writerow([f"{v:.12g}" for v in row])

    def to_json(self, path) -> None:
        doc = {
            "y": self.grid.y,
            "j": self.grid.j,
            "cells": self.grid.shape[0],
            "interest_nodes": self.grid.interest.tolist(),
            "certificate": self.certificate.to_dict(),
            "iterations": self.iterations,
            "iteration_error": self.iteration_error,
            "discretization_error": self.discretization_error,
            "discretization_note": "empirical estimate from a half-resolution grid, not a proven bound",
        }
        with open(path, "w") as fh:
            json.dump(doc, fh, indent=2, sort_keys=True)


def _build_chain(model: InterestRate, grid: Grid2D):
    kern = _Kernel(_quantize(model.premium), model.claim)
    Q = _interest_kernel(model, grid)
    M, A = grid.shape
    mids = grid.midpoints
    Pz = np.empty((A, M, M))
    up = np.empty((M, A))
    for a, i in enumerate(grid.interest):
        cells, u, d = kern.probs(mids, i, grid.edges)
        Pz[a], up[:, a] = cells, u
        defect = np.max(np.abs(cells.sum(axis=1) + u + d - 1.0))
        if defect > ROW_TOL:
            raise GridTooCoarse(f"kernel row-sum defect {defect:.2e} exceeds {ROW_TOL:g}")
    q_exit = 1.0 - Q.sum(axis=1)
    stay = Pz.sum(axis=2).T  # M x A
    to_target = up + stay * q_exit[None, :]
    N = M * A
    ruin, target = N, N + 1

    def matvec(v):
        v = np.ravel(v)
        V = v[:N].reshape(M, A)
        U = V @ Q.T  # U[m, a] = sum_b Q[a, b] V[m, b]
        out = np.empty(N + 2)
        out[:N] = (np.einsum("akm,ma->ka", Pz, U) + to_target * v[target]
                   + (1.0 - stay - up) * v[ruin]).ravel()
        out[ruin] = v[ruin]
        out[target] = v[target]
        return out

    op = LinearOperator((N + 2, N + 2), matvec=matvec, dtype=float)
    return FiniteChain(op, row_tol=ROW_TOL), Q, ruin, target


def _solve_on(model: InterestRate, grid: Grid2D, eps_iter: float, m_max: int):
    chain, Q, ruin, target = _build_chain(model, grid)
    absorbing = np.zeros(chain.n, dtype=bool)
    absorbing[[ruin, target]] = True
    cert = contraction_certificate(chain, absorbing, m_max=m_max, eps=eps_iter)
    n = cert.horizon_for(eps_iter)
    allowed = np.ones(chain.n, dtype=bool)
    allowed[ruin] = False
    w = reachavoid_iterate(chain, allowed, [target], n)
    M, A = grid.shape
    return w.values[: M * A].reshape(M, A), cert, n, Q


def solve_interest_model(
    model: InterestRate,
    y: float,
    grid: Grid2D | None = None,
    eps_iter: float = 1e-8,
    cells: int = DEFAULT_CELLS,
    j: float | None = None,
    m_max: int = 64,
    richardson: bool = True,
) -> tuple[GridSolution, ContractionCertificate]:
    """Reach-avoid probability of climbing above ``y`` before ruin, with interest.

    Interest nodes default to the atoms of a finite i.i.d. interest law
    (``alpha = 0``); otherwise a uniform grid on ``[0, j]`` is used and rates
    above ``j`` count as reaching the target.
    """
    if grid is None:
        W = model.interest_noise
        if model.alpha == 0.0 and isinstance(W, DiscreteLaw):
            nodes = W.values
        else:
            if j is None:
                raise ValueError("interest truncation level j is required for continuous or autoregressive interest")
            nodes = np.linspace(0.0, j, 21)
        grid = Grid2D.uniform(y, cells, nodes)
    values, cert, n, Q = _solve_on(model, grid, eps_iter, m_max)
    sol = GridSolution(grid, values, cert, n, cert.error(n), None, model, Q)
    if richardson:
        coarse_grid = Grid2D(grid.edges[::2] if (len(grid.edges) - 1) % 2 == 0 else
                             np.linspace(0.0, grid.y, (len(grid.edges) - 1) // 2 + 1), grid.interest)
        cvals, ccert, cn, _ = _solve_on(model, coarse_grid, eps_iter, m_max)
        coarse = GridSolution(coarse_grid, cvals, ccert, cn, ccert.error(cn), None, model, Q)
        probes = np.linspace(0.0, grid.y, 41)
        gap = max(float(np.max(np.abs(np.asarray(sol(probes, i)) - np.asarray(coarse(probes, i)))))
                  for i in grid.interest)
        sol = GridSolution(grid, values, cert, n, cert.error(n), gap, model, Q)
    return sol, cert


def interest_bound_rhs(tb, y: float, j: float | None, beta: float, F_G, m1: float) -> float:
    """Tail bound at ``y`` plus the interest-truncation term (omitted when ``j`` is None)."""
    from .bounds import interest_tail_term

    base = float(tb.evaluate(y))
    if j is None:
        return base
    return base + interest_tail_term(y, j, beta, F_G, m1)
