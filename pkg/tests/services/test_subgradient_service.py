import math

import pytest

from src.app.models.domain.function_models import SubgradientSet
from src.app.models.domain.space_models import NormKind

L2 = NormKind.L2


def test_y_bound_is_strict_for_a_single_subgradient(helper):
    sub = SubgradientSet.single([1.0, 0.1])
    service = helper.subgradient_service
    assert service.min_x_norm_with_y_bound(sub, 1, L2, L2, 0.1) == math.inf
    assert service.min_x_norm_with_y_bound(sub, 1, L2, L2, 0.2) == 1.0


def test_y_bound_is_strict_on_the_polytope_path(helper):
    service = helper.subgradient_service
    on_boundary = SubgradientSet([[1.0, 0.1], [2.0, 0.1]])
    assert service.min_x_norm_with_y_bound(on_boundary, 1, L2, L2, 0.1) == math.inf
    crossing = SubgradientSet([[1.0, 0.1], [3.0, 0.0]])
    assert service.min_x_norm_with_y_bound(
        crossing, 1, L2, L2, 0.1
    ) == pytest.approx(1.0, abs=1e-6)


def test_y_bound_on_empty_set(helper):
    empty = SubgradientSet.empty(2)
    assert (
        helper.subgradient_service.min_x_norm_with_y_bound(empty, 1, L2, L2, 1.0)
        == math.inf
    )


def test_min_rho_norm_rejects_non_positive_rho(helper):
    with pytest.raises(ValueError):
        helper.subgradient_service.min_rho_norm(
            SubgradientSet.single([1.0, 0.0]), 1, L2, L2, 0.0
        )
