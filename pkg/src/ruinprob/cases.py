"""Embedded configurations for the three case-study figures."""

from __future__ import annotations

from .config import RunConfig, parse_config

_GIG_CLAIM = {
    "premium": {"law": "degenerate", "value": 1.3035},
    "claim": {"law": "gig", "k": 0.139866},
}

CASES = {
    "fig1": {
        "schema": 1,
        "name": "fig1",
        "model": {"variant": "cramer_lundberg", **_GIG_CLAIM},
        "epsilon": 0.011,
        "split": 1.0,
        "bound": "yang",
        "barrier": 4.5,
        "solver": "fredholm",
        "nodes": 256,
        "tolerance": 1e-5,
        "curve_max": 4.5,
        "curve_points": 91,
        "validation": {
            "points": [0.0, 0.5, 1.0, 1.5, 2.0, 2.5, 3.0, 3.5, 4.0, 4.5],
            "trials": 2000,
            "horizon": 2000,
            "seed": 11,
        },
    },
    "fig2": {
        "schema": 1,
        "name": "fig2",
        "model": {
            "variant": "interest_rate",
            **_GIG_CLAIM,
            "interest": {"law": "binomial", "trials": 10, "unit": 0.01},
            "alpha": 0.0,
        },
        "epsilon": 0.011,
        "split": 1.0,
        "bound": "yang",
        "barrier": 4.5,
        "solver": "grid",
        "cells": 400,
        "eps_iter": 1e-8,
        "curve_max": 4.5,
        "curve_points": 91,
        "validation": {
            "points": [0.0, 1.0, 2.0, 3.0, 4.0],
            "interest_points": [0.0, 0.05, 0.1],
            "trials": 2000,
            "horizon": 2000,
            "seed": 12,
        },
    },
    "fig3": {
        "schema": 1,
        "name": "fig3",
        "model": {"variant": "cramer_lundberg", "increment": {"law": "heavytail"}},
        "epsilon": 0.1,
        "split": 1.0,
        "bound": "korshunov",
        "gamma": 2.0,
        "barrier": 50.0,
        "solver": "fredholm",
        "nodes": 256,
        "tolerance": 1e-5,
        "curve_max": 5.0,
        "curve_points": 101,
        "validation": {
            "points": [0.0, 1.0, 2.0, 3.0, 4.0, 5.0],
            "trials": 2000,
            "horizon": 2000,
            "seed": 13,
        },
    },
}


def case_config(name: str) -> RunConfig:
    try:
        return parse_config(CASES[name])
    except KeyError:
        raise KeyError(f"unknown figure {name!r}; choose from {', '.join(CASES)}") from None
