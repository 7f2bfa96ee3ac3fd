import math

import numpy as np
import pytest

from src.app.models.domain.function_models import SubgradientKind
from src.app.models.domain.limit_models import RadiusSchedule
from tests.conftest import catalog_target


def test_finite_function_needs_one_value_per_point(helper, chain_space):
    with pytest.raises(ValueError):
        helper.function_service.finite_function("short", chain_space, [1.0, 0.0])


def test_level_set_distances(helper, chain_function):
    distances = helper.function_service.level_set_distances(chain_function)
    assert distances.tolist() == [2.0, 1.0, 0.0]
    assert helper.function_service.positive_part(chain_function, [0]) == 2.0


def test_level_set_search_is_truncated(helper):
    f = catalog_target(helper, "positive-part").target
    found = helper.function_service.dist_to_level_set(f, [0.5], search_radius=1.0)
    assert found.value == pytest.approx(0.5)
    missed = helper.function_service.dist_to_level_set(f, [0.5], search_radius=0.1)
    assert math.isinf(missed.value)
    assert missed.truncated


def test_piecewise_linear_subgradients(helper):
    convex = helper.function_service.piecewise_linear(
        "v", [-1.0, 0.0, 1.0], [1.0, 0.0, 1.0]
    )
    assert convex.subgradient_kind == SubgradientKind.EXACT
    kink = convex.subgradient_oracle(np.array([0.0]))
    assert kink.points.ravel().tolist() == [-1.0, 1.0]
    concave = helper.function_service.piecewise_linear(
        "hat", [-1.0, 0.0, 1.0], [-1.0, 0.0, -1.0]
    )
    assert concave.subgradient_kind == SubgradientKind.GRADIENT_ONLY
    assert concave.subgradient_oracle(np.array([0.0])).is_empty
    assert concave.values_at(np.array([[2.0]]))[0] == pytest.approx(-2.0)


def test_piecewise_linear_rejects_unsorted_breakpoints(helper):
    with pytest.raises(ValueError):
        helper.function_service.piecewise_linear("bad", [0.0, 0.0], [1.0, 2.0])


def test_quadratic_gradient(helper):
    f = helper.function_service.quadratic("q", [1.0, -2.0, 1.0], base_point=1.0)
    assert f.base_value == pytest.approx(0.0)
    assert f.subgradient_oracle(np.array([3.0])).points.ravel().tolist() == [4.0]


def test_discretize_keeps_base_point(helper):
    f = catalog_target(helper, "abs").target
    grid = helper.function_service.discretize_function(f, 0.1, half_width=0.5)
    assert grid.size == 11
    assert grid.base_value == 0.0
    with pytest.raises(ValueError):
        helper.function_service.discretize_function(grid, 0.1)


def test_embedding_satisfies_off_slice_properties(helper):
    f = catalog_target(helper, "abs").target
    g = helper.function_service.embed_tilde(f)
    assert g.size == f.size
    assert math.isinf(g.values_at(np.array([[0.5]]), np.array([[0.2]]))[0])
    report = helper.function_service.validate_P1_P2(g, RadiusSchedule(1.0, 0.5, 6))
    assert report.p1_ok
    assert report.p2_certified


def test_embedding_of_finite_function(helper, chain_function):
    g = helper.function_service.embed_tilde(chain_function)
    assert g.base_index == 2
    assert g.product.right.size == 2


def test_exact_oracle_needs_convexity(helper):
    rng = np.random.default_rng(0)
    assert helper.function_service.validate_oracle_claims(
        catalog_target(helper, "abs").target, rng
    )
    assert not helper.function_service.check_midpoint_convexity(
        helper.function_service.quadratic("neg", [-1.0, 0.0, 0.0]), rng
    )
