import pytest

from uidag.sample_models import branching_example, kings_problem


def close(a: float, b: float, tol: float = 1e-9) -> bool:
    return abs(a - b) <= tol * (1.0 + abs(b))


@pytest.fixture(scope="session")
def king():
    return kings_problem()


@pytest.fixture(scope="session")
def branching():
    return branching_example()
