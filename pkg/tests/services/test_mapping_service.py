import dataclasses
import math

import numpy as np
import pytest

from src.app.models.domain.limit_models import RadiusSchedule
from src.app.utils.error_handler import NotEvaluableError
from src.app.utils.ext_real_utils import close_enough
from tests.conftest import catalog_target

RELATION_SCHEDULE = RadiusSchedule(4.0, 0.5, 3)


@pytest.fixture(scope="module")
def relation(helper):
    return catalog_target(helper, "finite-relation").target


def test_finite_relation_subregularity(helper, relation):
    sr = helper.mapping_service.subregularity_constant(relation, RELATION_SCHEDULE)
    assert sr.values == [0.5, 0.5, math.inf, math.inf]
    assert list(helper.mapping_service.preimage_mask(relation)) == [True, False, True]


def test_inverse_calmness_is_reciprocal(helper, relation):
    inverse = helper.mapping_service.inverse(relation)
    calm = helper.mapping_service.calmness_modulus(inverse, RELATION_SCHEDULE)
    assert calm.values == [2.0, 2.0, 0.0, 0.0]


def test_finite_relation_rejects_bad_graph(helper, relation):
    with pytest.raises(ValueError):
        helper.mapping_service.finite_relation(
            "bad",
            relation.domain_space,
            relation.range_space,
            graph=[(0, 7)],
            xbar=0,
            ybar=0,
        )


@pytest.mark.parametrize(
    "name, truth",
    [
        ("identity-mapping", 1.0),
        ("diagonal-mapping", 2.0**0.5),
        ("parabola-mapping", 0.0),
    ],
)
def test_subregularity_constants(helper, name, truth):
    loaded = catalog_target(helper, name)
    F = loaded.target
    sr = helper.mapping_service.subregularity_constant(
        F, helper.analysis_schedule(loaded)
    )
    assert close_enough(sr.reported, truth, 0.05, 3 * F.resolution)


def test_uniform_strict_slope_bounds_sr(helper):
    loaded = catalog_target(helper, "identity-mapping")
    schedule = helper.analysis_schedule(loaded)
    m = helper.mapping_service
    sr = m.subregularity_constant(loaded.target, schedule)
    uniform = m.F_uniform_strict_slope(loaded.target, schedule)
    assert sr.reported <= uniform.reported + 1e-9


def test_subdiff_slope_needs_y_off_base(helper):
    F = catalog_target(helper, "identity-mapping").target
    with pytest.raises(ValueError):
        helper.mapping_service.F_subdiff_rho_slope(F, [0.0], [0.0], 0.5)
    with pytest.raises(ValueError):
        helper.mapping_service.F_approx_subdiff_rho_slope(F, [0.0], [0.0], 0.5)
    value = helper.mapping_service.F_subdiff_rho_slope(F, [0.5], [0.5], 0.1).value
    assert 0.85 <= value <= 1.0 + 1e-9


def test_coderivative_of_identity(helper):
    F = catalog_target(helper, "identity-mapping").target
    query = helper.mapping_service.coderivative(F, [0.5], [0.5], [1.0])
    assert not query.empty
    assert np.allclose(np.unique(query.vertices), [1.0])
    scaled = helper.mapping_service.coderivative(F, [0.5], [0.5], [3.0])
    assert np.allclose(np.unique(scaled.vertices), [3.0])


def test_coderivative_needs_normal_cone_data(helper, relation):
    with pytest.raises((NotEvaluableError, ValueError)):
        helper.mapping_service.coderivative(relation, [1.0], [0.5], [1.0])


@pytest.mark.parametrize(
    "fixture, excludes",
    [("diagonal-mapping", True), ("parabola-mapping", False)],
)
def test_limit_set_test_on_catalog_mappings(helper, fixture, excludes):
    loaded = catalog_target(helper, fixture)
    result = helper.mapping_service.gfrerer_limit_test(
        loaded.target, helper.analysis_schedule(loaded)
    )
    assert result.excludes_origin is excludes
    assert "inconclusive" not in result.flags


def test_limit_set_test_without_graph_points_is_inconclusive(helper):
    loaded = catalog_target(helper, "halfline-mapping")
    empty = dataclasses.replace(
        loaded.target, values_near=lambda x, center, radius: np.zeros((0, 1))
    )
    result = helper.mapping_service.gfrerer_limit_test(
        empty, helper.analysis_schedule(loaded)
    )
    assert result.excludes_origin is False
    assert "inconclusive" in result.flags
    assert all(math.isinf(score) for _, score in result.level_minima)
