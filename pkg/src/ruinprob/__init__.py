"""Ruin probabilities for discrete-time risk models via a two-barrier approximation.

The ruin probability ``psi(z)`` is approximated by ``1 - phi(z, y)``, where
``phi`` is the probability of climbing above a barrier ``y`` before ruin.
A tail bound chooses ``y``; ``phi`` is computed by a Nystrom solver
(:mod:`ruinprob.fredholm`) or a grid reach-avoid iteration
(:mod:`ruinprob.grid`), and Monte Carlo (:mod:`ruinprob.montecarlo`) checks
the result.
"""

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
from .fredholm import GridFunction, SolveReport, operator_norm, refine_until, solve_two_barrier
from .grid import Grid2D, GridSolution, solve_interest_model
from .models import (
    CramerLundberg,
    FiniteChain,
    InterestRate,
    binomial_interest_distribution,
    case_study_1_model,
    case_study_2_model,
    gig_claim_distribution,
    heavytail_increment_distribution,
)
from .montecarlo import MCEstimate, estimate_ruin, estimate_two_barrier, horizon_sufficiency
from .reachavoid import ContractionCertificate, contraction_certificate, reach_iterate, reachavoid_iterate

__version__ = "0.1.0"

__all__ = [
    "KorshunovConstants", "TailBound", "barrier_for_precision", "korshunov_bound", "korshunov_constants",
    "korshunov_constants_for_increment", "lundberg_bound", "lundberg_coefficient", "npc_drift",
    "truncation_level", "yang_bound", "GridFunction", "SolveReport", "operator_norm", "refine_until",
    "solve_two_barrier", "Grid2D", "GridSolution", "solve_interest_model", "CramerLundberg", "FiniteChain",
    "InterestRate", "binomial_interest_distribution", "case_study_1_model", "case_study_2_model",
    "gig_claim_distribution", "heavytail_increment_distribution", "MCEstimate", "estimate_ruin",
    "estimate_two_barrier", "horizon_sufficiency", "ContractionCertificate", "contraction_certificate",
    "reach_iterate", "reachavoid_iterate",
]
