import pytest

from scnperf.case3gpp import Case1Params, coverage_case1
from scnperf.model import NetworkParams, preset


@pytest.fixture(scope="session")
def case1_pair():
    return preset("case1")


@pytest.fixture(scope="session")
def closed_cov():
    """(bs_density, gamma) -> p_cov through the closed-form route."""

    def fn(lam: float, gamma: float) -> float:
        return coverage_case1(
            Case1Params.from_network(NetworkParams(lam)), gamma
        ).p_cov

    return fn
