import numpy as np
import pytest

from src.app.models.domain.space_models import EuclideanSpace, FiniteMetricSpace
from src.app.usecases.analyze_usecases.analyze_helper import AnalyzeHelper


@pytest.fixture(scope="session")
def helper() -> AnalyzeHelper:
    return AnalyzeHelper()


@pytest.fixture(scope="session")
def chain_space() -> FiniteMetricSpace:
    """Three points on a line at 0, 1, 2."""
    return FiniteMetricSpace(
        dist=np.array([[0.0, 1.0, 2.0], [1.0, 0.0, 1.0], [2.0, 1.0, 0.0]]),
        labels=["c0", "c1", "c2"],
    )


@pytest.fixture(scope="session")
def chain_function(helper, chain_space):
    return helper.function_service.finite_function(
        "chain", chain_space, [2.0, 1.0, 0.0], base_index=2
    )


@pytest.fixture(scope="session")
def line() -> EuclideanSpace:
    return EuclideanSpace(1)


def catalog_target(helper: AnalyzeHelper, name: str):
    return helper.load({"spec_path": f"catalog:{name}"})


@pytest.fixture
def chain_spec() -> dict:
    return {
        "kind": "function",
        "name": "chain",
        "space": {
            "type": "finite",
            "distances": [[0, 1, 2], [1, 0, 1], [2, 1, 0]],
            "labels": ["c0", "c1", "c2"],
        },
        "definition": {"type": "table", "values": [2, 1, 0]},
        "base_point": [2],
        "schedule": {"rho0": 4.0, "gamma": 0.5, "steps": 2},
    }
