"""End-to-end procedure: tail bound -> barrier -> two-barrier solve -> Monte Carlo check.

The certified total error is the tail bound evaluated at the barrier plus the
solver's own error estimate; it controls ``|psi - (1 - phi)|`` uniformly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .bounds import (
    KorshunovConstants,
    TailBound,
    barrier_for_precision,
    korshunov_bound,
    korshunov_constants,
    korshunov_constants_for_increment,
    lundberg_bound,
    lundberg_coefficient,
    npc_drift,
    truncation_level,
    yang_bound,
)
from .config import RunConfig
from .distributions import Capped, DiscreteLaw
from .errors import ConfigError, InfiniteMoment, NoDrift, NoLundbergCoefficient
from .fredholm import GridFunction, SolveReport, refine_until
from .grid import GridSolution, interest_bound_rhs, solve_interest_model
from .models import CramerLundberg, InterestRate, RiskModel
from .montecarlo import MCEstimate, estimate_ruin_curve

# Absolute slack when comparing a certified total against the requested epsilon:
# with the whole budget on the tail, solver errors of order 1e-10 would otherwise
# flip an exact-by-construction barrier to "not met".
CERT_SLACK = 1e-6


@dataclass(frozen=True)
class BoundResult:
    bound: TailBound
    y: float
    eps_tail: float
    drift: float
    method: str
    lam: float | None = None
    boundary: bool = False
    constants: KorshunovConstants | None = None
    truncation: float | None = None
    pinned: bool = False

    def to_dict(self) -> dict:
        d = {
            "method": self.method,
            "drift": self.drift,
            "y": self.y,
            "eps_tail": self.eps_tail,
            "bound_at_y": float(self.bound(self.y)),
            "bound": self.bound.to_dict(),
            "barrier_pinned": self.pinned,
        }
        if self.lam is not None:
            d["lambda"] = self.lam
            d["lambda_at_domain_edge"] = self.boundary
        if self.constants is not None:
            d["constants"] = self.constants.to_dict()
        if self.truncation is not None:
            d["premium_truncation"] = self.truncation
        return d


@dataclass(frozen=True)
class ApproximationCertificate:
    """``sup_z |psi(z) - psi_tilde(z)| <= tail_term + solver_error = total_error``."""

    epsilon: float
    split: float
    y: float
    tail_term: float
    solver_error: float
    solver: str
    details: dict = field(default_factory=dict)

    @property
    def total_error(self) -> float:
        return self.tail_term + self.solver_error

    @property
    def meets_request(self) -> bool:
        return self.total_error <= self.epsilon + CERT_SLACK

    def to_dict(self) -> dict:
        return {
            "epsilon_requested": self.epsilon,
            "split": self.split,
            "y": self.y,
            "tail_term": self.tail_term,
            "solver_error": self.solver_error,
            "total_error": self.total_error,
            "meets_request": self.meets_request,
            "solver": self.solver,
            "details": self.details,
        }


def _collapsed(model: RiskModel) -> CramerLundberg:
    return model.collapsed() if isinstance(model, InterestRate) else model


def _drift(model: RiskModel) -> float:
    cl = _collapsed(model)
    if cl.premium is not None and cl.claim is not None:
        a = npc_drift(cl.premium, cl.claim)
    else:
        a = cl.increment.mean()
    if not a > 0:
        raise NoDrift(f"net profit condition fails (drift {a:.6g} <= 0): ψ ≡ 1, ruin is certain")
    return a


def _korshunov(model: RiskModel, gamma: float):
    cl = _collapsed(model)
    if cl.premium is None or cl.claim is None:
        return korshunov_constants_for_increment(cl.increment, gamma), None
    G, C = cl.premium, cl.claim
    try:
        return korshunov_constants(G, C, gamma), None
    except InfiniteMoment:
        if not math.isfinite(C.abs_moment(gamma)) or isinstance(G, DiscreteLaw):
            raise
        k = truncation_level(G, C)
        return korshunov_constants(Capped(G, k), C, gamma), k


def select_bound(cfg: RunConfig, model: RiskModel | None = None) -> BoundResult:
    """Check the drift, build the requested (or first applicable) tail bound and pick ``y``."""
    model = model or cfg.build_model()
    a = _drift(model)
    inc = _collapsed(model).increment
    eps_tail = cfg.split * cfg.epsilon
    kind = cfg.bound
    lam = consts = trunc = None
    boundary = False
    if kind in ("auto", "lundberg"):
        try:
            lam = lundberg_coefficient(inc, allow_boundary=True)
            boundary = abs(inc.laplace(lam) - 1.0) > 1e-10
            bound, kind = lundberg_bound(lam), "lundberg"
        except NoLundbergCoefficient:
            if kind == "lundberg":
                raise
            kind = "korshunov"
    if kind == "korshunov":
        consts, trunc = _korshunov(model, cfg.gamma)
        bound = korshunov_bound(consts)
    elif kind == "yang":
        bound = yang_bound()
    y = cfg.barrier if cfg.barrier is not None else barrier_for_precision(bound, eps_tail)
    return BoundResult(bound, float(y), eps_tail, a, kind, lam, boundary, consts, trunc, cfg.barrier is not None)


@dataclass
class SolveResult:
    cfg: RunConfig
    model: RiskModel
    bound: BoundResult
    certificate: ApproximationCertificate
    solution: GridFunction | GridSolution
    report: SolveReport | None = None

    @property
    def y(self) -> float:
        return self.bound.y

    def psi(self, z, i: float = 0.0):
        """Approximate ruin probability ``1 - phi(z, y)`` (at interest ``i`` for the grid solver)."""
        if isinstance(self.solution, GridSolution):
            return 1.0 - np.asarray(self.solution(z, i))
        return self.solution.ruin(z)

    @property
    def interest_nodes(self) -> np.ndarray:
        if isinstance(self.solution, GridSolution):
            return self.solution.grid.interest
        return np.zeros(1)


def _tail_term(cfg: RunConfig, model: RiskModel, b: BoundResult) -> float:
    if isinstance(model, InterestRate) and not isinstance(model.interest_noise, DiscreteLaw):
        if cfg.j is None:
            raise ConfigError("continuous interest needs a truncation level j")
        cl = model.collapsed()
        return interest_bound_rhs(b.bound, b.y, cfg.j, cfg.beta, cl.premium.cdf, cl.increment.abs_moment(1))
    return float(b.bound(b.y))


def solve(cfg: RunConfig, model: RiskModel | None = None, bound: BoundResult | None = None) -> SolveResult:
    model = model or cfg.build_model()
    b = bound or select_bound(cfg, model)
    tail = _tail_term(cfg, model, b)
    budget = (1.0 - cfg.split) * cfg.epsilon
    solver = cfg.solver_for(model)
    if solver == "fredholm":
        if isinstance(model, InterestRate):
            if not (isinstance(model.interest_noise, DiscreteLaw) and model.interest_noise.upper == 0.0):
                raise ConfigError("the fredholm solver needs a model without interest; use --solver grid")
            model = model.collapsed()
        inc = model.increment
        gf, rep = refine_until(inc, b.y, cfg.tolerance, n0=cfg.nodes)
        if budget > 0 and rep.error_bound > budget:
            gf, rep = refine_until(inc, b.y, min(cfg.tolerance, budget / max(rep.resolvent_norm, 1.0)), n0=rep.nodes)
        cert = ApproximationCertificate(cfg.epsilon, cfg.split, b.y, tail, rep.error_bound, "fredholm", rep.to_dict())
        return SolveResult(cfg, model, b, cert, gf, rep)
    if not isinstance(model, InterestRate):
        if model.premium is None or model.claim is None:
            raise ConfigError("the grid solver needs the model's premium and claim laws")
        model = InterestRate(model.premium, model.claim, DiscreteLaw([0.0], [1.0], name="none"))
    sol, cc = solve_interest_model(model, b.y, eps_iter=cfg.eps_iter, cells=cfg.cells, j=cfg.j)
    details = {
        "cells": sol.grid.shape[0],
        "interest_nodes": sol.grid.interest.tolist(),
        "certificate": cc.to_dict(),
        "iterations": sol.iterations,
        "iteration_error": sol.iteration_error,
        "discretization_error": sol.discretization_error,
        "discretization_error_kind": "empirical: comparison with a half-resolution grid",
    }
    if not isinstance(model.premium, DiscreteLaw):
        details["premium_quantization"] = "64 equal-mass quantile atoms; this error is not in the total"
    cert = ApproximationCertificate(cfg.epsilon, cfg.split, b.y, tail, sol.error, "grid", details)
    return SolveResult(cfg, model, b, cert, sol, None)


@dataclass(frozen=True)
class ValidationRow:
    z: float
    i: float
    psi_tilde: float
    estimate: MCEstimate
    band: float

    @property
    def deviation(self) -> float:
        return abs(self.estimate.p_hat - self.psi_tilde)

    @property
    def passed(self) -> bool:
        return self.deviation <= self.band


@dataclass(frozen=True)
class ValidationResult:
    rows: tuple[ValidationRow, ...]
    epsilon: float

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.rows)

    @property
    def failures(self) -> list[ValidationRow]:
        return [r for r in self.rows if not r.passed]

    def to_dict(self) -> dict:
        return {
            "epsilon": self.epsilon,
            "passed": self.passed,
            "points": len(self.rows),
            "failed": len(self.failures),
            "ci_method": "clopper-pearson (exact binomial), chosen by this tool",
        }


def validate(result: SolveResult, trials: int | None = None, horizon: int | None = None,
             seed: int | None = None) -> ValidationResult:
    """Monte Carlo ruin estimates against ``psi_tilde`` within ``epsilon + CI half-width``."""
    cfg = result.cfg
    v = cfg.validation
    trials = trials or v.trials
    horizon = horizon or v.horizon
    seed = v.seed if seed is None else seed
    points = np.asarray(v.points, dtype=float)
    rates = v.interest_points if isinstance(result.model, InterestRate) else (0.0,)
    rows = []
    for i in rates:
        ests = estimate_ruin_curve(result.model, points, float(i), horizon, trials, seed, v.level)
        psi = np.atleast_1d(result.psi(points, float(i)))
        for e, p in zip(ests, psi):
            rows.append(ValidationRow(e.z0, float(i), float(p), e, cfg.epsilon + e.half_width))
    return ValidationResult(tuple(rows), cfg.epsilon)


def curve_points(result: SolveResult) -> np.ndarray:
    cfg = result.cfg
    top = cfg.curve_max if cfg.curve_max is not None else result.y
    return np.linspace(0.0, top, cfg.curve_points)
