import pytest

from ruinprob.fredholm import solve_two_barrier
from ruinprob.models import case_study_1_model, case_study_2_model


@pytest.fixture(scope="session")
def case1():
    return case_study_1_model()


@pytest.fixture(scope="session")
def case2():
    return case_study_2_model()


@pytest.fixture(scope="session")
def case1_solution(case1):
    return solve_two_barrier(case1.increment, 4.5, n=256)


@pytest.fixture(scope="session")
def case2_solution(case2):
    return solve_two_barrier(case2.increment, 50.0, n=512)


@pytest.hookimpl(wrapper=True)
def pytest_runtest_makereport(item, call):
    rep = yield
    setattr(item, f"rep_{rep.when}", rep)
    return rep
