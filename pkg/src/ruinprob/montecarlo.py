"""Seeded trajectory simulation of risk models.

Trials are split into fixed-size chunks; chunk ``c`` draws from a Philox
stream keyed by ``(seed, c)``, so an estimate depends only on the seed and
never on how many workers processed the chunks.  Every path consumes one
noise draw per step even after it has been absorbed, and all starting
capitals in one call share the same noise.  Hence estimates for different
``z0`` are pathwise coupled, and an estimate at horizon ``N`` is the prefix
of the one at any longer horizon.
"""

from __future__ import annotations

import csv
import json
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass

import numpy as np
from scipy import stats

from .errors import NonConvergent
from .models import RiskModel

CHUNK = 500
HORIZON_CAP = 2**20
CSV_COLUMNS = ("z", "i", "p_hat", "lo", "hi", "N", "trials", "seed")


@dataclass(frozen=True)
class MCEstimate:
    """Frequency of an event over ``trials`` simulated paths of length ``horizon``.

    ``lower``/``upper`` form an exact (Clopper-Pearson) interval at ``level``.
    The estimate targets the ``horizon``-step probability, which is a lower
    bound on the open-horizon one.
    """

    p_hat: float
    successes: int
    trials: int
    horizon: int
    level: float
    lower: float
    upper: float
    seed: int
    z0: float
    theta0: float
    event: str
    y: float | None = None
    ci_method: str = "clopper-pearson"

    @property
    def half_width(self) -> float:
        return max(self.p_hat - self.lower, self.upper - self.p_hat)

    def contains(self, p: float) -> bool:
        return self.lower <= p <= self.upper

    def to_dict(self) -> dict:
        d = asdict(self)
        d["half_width"] = self.half_width
        return d

    def to_json(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh, indent=2, sort_keys=True)


def clopper_pearson(successes: int, trials: int, level: float = 0.95) -> tuple[float, float]:
    """Exact binomial confidence interval."""
    if trials < 1 or not 0 <= successes <= trials:
        raise ValueError("need 0 <= successes <= trials and trials >= 1")
    alpha = 1.0 - level
    lo = 0.0 if successes == 0 else float(stats.beta.ppf(alpha / 2, successes, trials - successes + 1))
    hi = 1.0 if successes == trials else float(stats.beta.ppf(1 - alpha / 2, successes + 1, trials - successes))
    return lo, hi


def _rng(seed: int, chunk: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=(chunk,))))


def _run_chunk(model: RiskModel, z0: np.ndarray, theta0: float, horizon: int, size: int,
               seed: int, chunk: int, y: float | None) -> np.ndarray:
    """Event indicators, shape (len(z0), size), for one chunk of paths."""
    rng = _rng(seed, chunk)
    z = np.repeat(z0[:, None], size, axis=1)
    theta = np.full(size, float(theta0))
    ruined = z < 0.0
    won = (z > y) if y is not None else np.zeros_like(ruined)
    done = ruined | won
    for _ in range(horizon):
        if done.all():
            break  # remaining draws cannot change any indicator
        noise = model.draw_noise(rng, size)
        z, theta = model.step(z, theta[None, :], tuple(np.asarray(n)[None, :] for n in noise))
        theta = theta[0]
        live = ~done
        ruined |= live & (z < 0.0)
        if y is not None:
            won |= live & ~ruined & (z > y)
        done = ruined | won
    return won if y is not None else ruined


def simulate_indicators(model: RiskModel, z0, theta0: float = 0.0, horizon: int = 2000,
                        trials: int = 2000, seed: int = 0, y: float | None = None,
                        workers: int | None = None) -> np.ndarray:
    """Per-path event indicators, shape ``(len(z0), trials)``, under common random numbers.

    The event is ruin (``min z < 0`` within ``horizon`` steps) or, when ``y``
    is given, exceeding ``y`` strictly before ruin.
    """
    if trials < 1 or horizon < 0:
        raise ValueError("trials must be >= 1 and horizon >= 0")
    z0 = np.atleast_1d(np.asarray(z0, dtype=float))
    sizes = [min(CHUNK, trials - s) for s in range(0, trials, CHUNK)]
    jobs = [(model, z0, theta0, horizon, n, seed, c, y) for c, n in enumerate(sizes)]
    workers = workers or min(len(jobs), os.cpu_count() or 1)
    if workers <= 1:
        parts = [_run_chunk(*j) for j in jobs]
    else:
        with ThreadPoolExecutor(workers) as pool:
            parts = list(pool.map(lambda j: _run_chunk(*j), jobs))
    return np.concatenate(parts, axis=1)


def _estimates(ind: np.ndarray, z0, theta0, horizon, seed, event, y, level) -> list[MCEstimate]:
    out = []
    trials = ind.shape[1]
    for z, row in zip(np.atleast_1d(z0), ind):
        k = int(row.sum())
        lo, hi = clopper_pearson(k, trials, level)
        out.append(MCEstimate(k / trials, k, trials, horizon, level, lo, hi, seed,
                              float(z), float(theta0), event, y))
    return out


def estimate_ruin_curve(model: RiskModel, z0s, theta0: float = 0.0, horizon: int = 2000,
                        trials: int = 2000, seed: int = 0, level: float = 0.95,
                        workers: int | None = None) -> list[MCEstimate]:
    """Ruin estimates at several starting capitals, sharing one set of paths' noise."""
    if horizon < 1:
        raise ValueError("horizon must be >= 1")
    ind = simulate_indicators(model, z0s, theta0, horizon, trials, seed, None, workers)
    return _estimates(ind, z0s, theta0, horizon, seed, "ruin", None, level)


def estimate_ruin(model: RiskModel, z0: float, theta0: float = 0.0, horizon: int = 2000,
                  trials: int = 2000, seed: int = 0, level: float = 0.95,
                  workers: int | None = None) -> MCEstimate:
    return estimate_ruin_curve(model, [z0], theta0, horizon, trials, seed, level, workers)[0]


def estimate_two_barrier_curve(model: RiskModel, z0s, y: float, theta0: float = 0.0,
                               horizon: int = 2000, trials: int = 2000, seed: int = 0,
                               level: float = 0.95, workers: int | None = None) -> list[MCEstimate]:
    if horizon < 1:
        raise ValueError("horizon must be >= 1")
    if not y > 0:
        raise ValueError("barrier y must be positive")
    ind = simulate_indicators(model, z0s, theta0, horizon, trials, seed, y, workers)
    return _estimates(ind, z0s, theta0, horizon, seed, "two_barrier", y, level)


def estimate_two_barrier(model: RiskModel, z0: float, y: float, theta0: float = 0.0,
                         horizon: int = 2000, trials: int = 2000, seed: int = 0,
                         level: float = 0.95, workers: int | None = None) -> MCEstimate:
    """Probability of exceeding ``y`` strictly before dropping below 0, within ``horizon`` steps."""
    return estimate_two_barrier_curve(model, [z0], y, theta0, horizon, trials, seed, level, workers)[0]


def horizon_sufficiency(model: RiskModel, z0: float, theta0: float = 0.0, trials: int = 2000,
                        seed: int = 0, start: int = 16, cap: int = HORIZON_CAP) -> int:
    """Double the horizon until the ruin estimate moves by less than its CI half-width.

    Returns the larger horizon of the first pair that agrees.
    """
    n = start
    prev = estimate_ruin(model, z0, theta0, n, trials, seed)
    while 2 * n <= cap:
        cur = estimate_ruin(model, z0, theta0, 2 * n, trials, seed)
        if abs(cur.p_hat - prev.p_hat) < cur.half_width:
            return 2 * n
        n, prev = 2 * n, cur
    raise NonConvergent(f"ruin estimate still moving at horizon {n} (cap {cap})")


def write_validation_csv(path, estimates, append: bool = False) -> None:
    """Write (or append) rows ``z, i, p_hat, lo, hi, N, trials, seed``."""
    fresh = not append or not os.path.exists(path) or os.path.getsize(path) == 0
    with open(path, "a" if append else "w", newline="") as fh:
        out = csv.writer(fh, lineterminator="\n")
        if fresh:
            out.writerow(CSV_COLUMNS)
        for e in estimates:
            out.writerow([f"{e.z0:.12g}", f"{e.theta0:.12g}", f"{e.p_hat:.12g}", f"{e.lower:.12g}",
                          f"{e.upper:.12g}", e.horizon, e.trials, e.seed])
