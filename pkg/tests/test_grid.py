import csv
import json

import numpy as np
import pytest
from scipy import stats

from ruinprob.bounds import yang_bound
from ruinprob.distributions import ScipyLaw, degenerate, exponential, uniform
from ruinprob.errors import GridTooCoarse, PositiveMassAtZeroPremium
from ruinprob.fredholm import solve_two_barrier
from ruinprob.grid import Grid2D, interest_bound_rhs, solve_interest_model
from ruinprob.models import InterestRate, case_study_1_model
from ruinprob.montecarlo import estimate_two_barrier_curve

Y = 4.5


@pytest.fixture(scope="module")
def interest_model():
    return case_study_1_model(interest=True)


@pytest.fixture(scope="module")
def interest_solution(interest_model):
    return solve_interest_model(interest_model, Y)[0]


@pytest.fixture(scope="module")
def collapsed_pair(interest_model):
    flat = InterestRate(interest_model.premium, interest_model.claim, degenerate(0.0))
    sol, _ = solve_interest_model(flat, Y)
    gf, rep = solve_two_barrier(flat.collapsed().increment, Y, n=256)
    return sol, gf, rep


class _Leaky(ScipyLaw):
    """Exponential claims whose CDF tops out at 0.9: a kernel that loses mass."""

    def cdf(self, x):
        return 0.9 * super().cdf(x)


def test_grid_geometry():
    g = Grid2D.uniform(2.0, 4, [0.0, 0.1])
    assert g.shape == (4, 2) and g.y == 2.0 and g.j == 0.1
    assert np.allclose(g.midpoints, [0.25, 0.75, 1.25, 1.75])
    with pytest.raises(ValueError):
        Grid2D(np.array([0.0, 1.0, 0.5]), np.array([0.0]))


def test_interest_nodes_are_the_atoms(interest_solution):
    assert np.allclose(interest_solution.grid.interest, np.arange(11) / 100)
    assert interest_solution.grid.shape == (400, 11)


def test_values_are_probabilities_and_barriers_hold(interest_solution):
    assert np.all((interest_solution.values >= 0) & (interest_solution.values <= 1 + 1e-12))
    for i in (0.0, 0.05, 0.1):
        assert interest_solution(-0.1, i) == 0.0
        assert interest_solution(Y + 0.1, i) == 1.0


def test_monotone_in_surplus_and_interest(interest_solution):
    z = np.linspace(0.0, Y, 200)
    prev = None
    for i in interest_solution.grid.interest:
        w = np.asarray(interest_solution(z, float(i)))
        assert np.all(np.diff(w) >= -1e-12)
        if prev is not None:
            assert np.all(w >= prev - 1e-12)
        prev = w


def test_error_accounting(interest_solution):
    s = interest_solution
    assert s.iteration_error <= 1e-8
    assert 0 < s.discretization_error < 1e-4
    assert s.error == pytest.approx(s.iteration_error + s.discretization_error)
    assert s.certificate.error(s.iterations) <= 1e-8


def test_collapsed_interest_matches_fredholm(collapsed_pair):
    sol, gf, rep = collapsed_pair
    z = np.linspace(0.0, Y, 20)
    gap = np.max(np.abs(np.asarray(sol(z, 0.0)) - gf(z)))
    assert gap <= 2 * (sol.error + rep.error_bound)


def test_interest_helps(interest_solution, collapsed_pair):
    z = np.linspace(0.0, Y, 30)
    flat = np.asarray(collapsed_pair[0](z, 0.0))
    assert np.all(np.asarray(interest_solution(z, 0.0)) >= flat - 1e-9)


def test_mass_losing_kernel_is_rejected():
    model = InterestRate(degenerate(1.5), _Leaky(stats.expon(), "leaky"), degenerate(0.0))
    with pytest.raises(GridTooCoarse):
        solve_interest_model(model, 3.0, cells=40, richardson=False)


def test_outputs(interest_solution, tmp_path):
    interest_solution.to_csv(tmp_path / "w.csv")
    interest_solution.to_json(tmp_path / "w.json")
    with open(tmp_path / "w.csv") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["z", "i", "w", "one_minus_w"]
    assert len(rows) == 1 + 400 * 11
    z, i, w, q = map(float, rows[1])
    assert w + q == pytest.approx(1.0)
    doc = json.loads((tmp_path / "w.json").read_text())
    assert doc["cells"] == 400 and len(doc["interest_nodes"]) == 11
    assert {"m", "delta"} <= set(doc["certificate"])


def test_autoregressive_interest_smoke():
    model = InterestRate(degenerate(1.5), exponential(1.0), uniform(0.0, 0.02), alpha=0.5)
    with pytest.raises(ValueError):
        solve_interest_model(model, 3.0, cells=60)
    sol, cert = solve_interest_model(model, 3.0, cells=60, j=0.05)
    assert sol.grid.j == 0.05 and cert.delta > 0
    w = np.asarray(sol(np.linspace(0, 3, 10), 0.0))
    assert np.all((w >= 0) & (w <= 1)) and np.all(np.diff(w) >= -1e-9)


def test_interest_bound_rhs():
    tb = yang_bound()
    F_G = degenerate(1.3035).cdf
    assert interest_bound_rhs(tb, Y, None, 0.5, F_G, 2.0) == pytest.approx(tb(Y))
    # F_G vanishes below the premium, so only the j^-beta term is added for large j
    assert interest_bound_rhs(tb, Y, 100.0, 0.5, F_G, 0.1) == pytest.approx(tb(Y) + 0.1)
    with pytest.raises(PositiveMassAtZeroPremium):
        interest_bound_rhs(tb, Y, 100.0, 0.5, degenerate(0.0).cdf, 0.1)


def test_agrees_with_monte_carlo(interest_model, interest_solution):
    z = np.arange(5.0)
    for i in (0.0, 0.05, 0.1):
        ests = estimate_two_barrier_curve(interest_model, z, Y, theta0=i, horizon=2000, trials=2000,
                                          seed=7, level=0.999)
        w = np.asarray(interest_solution(z, i))
        for e, ww in zip(ests, w):
            assert abs(e.p_hat - ww) <= e.half_width + interest_solution.error, (i, e.z0)


def test_interest_bound_rhs_large_j():
    tb = yang_bound()
    F_G = degenerate(1.3035).cdf
    # j^-1/2 = 1e-3, and y/j + m1 j^-1/2 is far below the premium, so F_G contributes nothing
    assert interest_bound_rhs(tb, Y, 1e6, 0.5, F_G, 1.0) == pytest.approx(0.0107038 + 0.001, abs=1e-6)
    lo, hi = (interest_bound_rhs(tb, Y, 1e6, b, F_G, 1.0) for b in (0.3, 0.7))
    assert lo == pytest.approx(tb(Y) + 1e6**-0.3) and hi == pytest.approx(tb(Y) + 1e6**-0.7)
    assert min(lo, hi) >= tb(Y)
