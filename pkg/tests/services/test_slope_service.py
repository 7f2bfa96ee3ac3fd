import math
import warnings

import numpy as np
import pytest

from src.app.models.domain.limit_models import RadiusSchedule
from src.app.services.slope_service import BandKind, RestrictedRegion
from src.app.utils.error_handler import NotEvaluableError
from src.app.utils.ext_real_utils import close_enough
from tests.conftest import catalog_target

CHAIN_SCHEDULE = RadiusSchedule(4.0, 0.5, 2)


def test_chain_pointwise_slopes(helper, chain_function):
    s = helper.slope_service
    assert list(s.sample_array(chain_function, "nonlocal")) == [1.0, 1.0, 0.0]
    assert list(s.sample_array(chain_function, "er_ratio")) == [1.0, 1.0, 0.0]
    # a finite space without resolution has no neighbours at the probe radius
    assert list(s.sample_array(chain_function, "local")) == [0.0, 0.0, 0.0]
    assert s.sample_array(chain_function, "isolated").all()


def test_chain_band_limits(helper, chain_function):
    s = helper.slope_service
    er = s.er_modulus(chain_function, CHAIN_SCHEDULE)
    assert er.values == [1.0, 1.0, math.inf]
    assert "empty_band" in er.flags
    assert s.uniform_strict_slope(chain_function, CHAIN_SCHEDULE).values == [
        1.0,
        1.0,
        math.inf,
    ]
    assert s.strict_outer_slope(chain_function, CHAIN_SCHEDULE).values[:2] == [
        0.0,
        0.0,
    ]


def test_band_masks(helper, chain_function):
    s = helper.slope_service
    assert list(s.band_mask(chain_function, 4.0, BandKind.ER)) == [True, True, False]
    assert list(s.band_mask(chain_function, 2.0, BandKind.STRICT)) == [
        False,
        True,
        False,
    ]


def test_restricted_slopes_on_chain(helper, chain_function):
    s = helper.slope_service
    level = s.restricted_nonlocal_slope(chain_function, [0], RestrictedRegion.LEVEL_SET)
    assert level.value == 1.0
    sublevel = s.restricted_nonlocal_slope(
        chain_function, [0], RestrictedRegion.SUBLEVEL_DIST
    )
    assert sublevel.value == 1.0


def test_nonlocal_slope_rejects_infinite_values(helper, chain_space):
    f = helper.function_service.finite_function(
        "with-inf", chain_space, [math.inf, 1.0, 0.0], base_index=2
    )
    with pytest.raises(ValueError):
        helper.slope_service.nonlocal_slope(f, [0])
    assert helper.slope_service.local_slope(f, [0]).value == math.inf


def test_infinite_values_give_infinite_slopes_quietly(helper, chain_space):
    f = helper.function_service.finite_function(
        "with-inf", chain_space, [math.inf, 1.0, 0.0], base_index=2
    )
    s = helper.slope_service
    with warnings.catch_warnings():
        warnings.simplefilter("error", RuntimeWarning)
        nonlocal_ = s.sample_array(f, "nonlocal")
        local = s.sample_array(f, "local")
        s.sample_array(f, "restricted_sublevel")
    assert nonlocal_[0] == math.inf
    assert local[0] == math.inf
    assert nonlocal_[1] == 1.0


def test_subdiff_slope_needs_an_oracle(helper, chain_function):
    with pytest.raises(NotEvaluableError):
        helper.slope_service.subdiff_slope(chain_function, [0])


@pytest.mark.parametrize(
    "name, quantity, expected",
    [
        ("abs", "er_modulus", 1.0),
        ("abs", "uniform_strict", 1.0),
        ("positive-part", "strict_outer", 1.0),
        ("parabola", "er_modulus", 0.0),
        ("nonconvex-lipschitz-counterexample", "strict_outer", 0.0),
    ],
)
def test_catalog_limits(helper, name, quantity, expected):
    loaded = catalog_target(helper, name)
    f = loaded.target
    schedule = helper.analysis_schedule(loaded)
    s = helper.slope_service
    estimate = {
        "er_modulus": s.er_modulus,
        "uniform_strict": s.uniform_strict_slope,
        "strict_outer": s.strict_outer_slope,
    }[quantity](f, schedule)
    assert close_enough(estimate.reported, expected, 0.05, 3 * f.resolution)


def test_staircase_has_error_bound_but_no_strict_outer_slope(helper):
    loaded = catalog_target(helper, "nonconvex-lipschitz-counterexample")
    schedule = helper.analysis_schedule(loaded)
    s = helper.slope_service
    assert s.er_modulus(loaded.target, schedule).reported >= 0.6
    assert s.strict_outer_slope(loaded.target, schedule).reported <= 0.03


def test_abs_point_slopes_and_report(helper):
    loaded = catalog_target(helper, "abs")
    f = loaded.target
    s = helper.slope_service
    assert s.local_slope(f, [0.5]).value == pytest.approx(1.0, rel=1e-3)
    assert s.nonlocal_slope(f, [0.5]).value == pytest.approx(1.0, rel=1e-3)
    assert s.subdiff_slope(f, [0.5]).value == pytest.approx(1.0)

    report = s.report(f, helper.analysis_schedule(loaded), [0.5]).to_dict()
    assert report["query_point"] == [0.5]
    assert len(report["er_modulus"]["per_radius"]) >= 3
    assert report["subdiff_slope"] is not None


def test_uniform_strict_dominates_ratio_on_grid(helper):
    loaded = catalog_target(helper, "abs")
    schedule = helper.analysis_schedule(loaded)
    s = helper.slope_service
    uniform = s.uniform_strict_slope(loaded.target, schedule).values
    ratio = s.ratio_liminf(loaded.target, schedule).values
    assert np.all(np.array(ratio) <= np.array(uniform) + 1e-12)


def test_local_slope_follows_the_radius_schedule(helper, chain_function):
    s = helper.slope_service
    wide = s.local_slope(chain_function, [0], RadiusSchedule(4.0, 0.5, 2))
    assert wide.value == 1.0
    assert "isolated" not in wide.flags
    narrow = s.local_slope(chain_function, [0], RadiusSchedule(2.0, 0.5, 2))
    assert narrow.value == 0.0
    assert "isolated" in narrow.flags


def test_local_slope_schedule_on_sampled_function(helper):
    f = catalog_target(helper, "abs").target
    estimate = helper.slope_service.local_slope(
        f, [0.5], RadiusSchedule(0.2, 0.5, 3)
    )
    assert estimate.value == pytest.approx(1.0, rel=1e-3)
    assert "non_monotone" not in estimate.flags


def test_strict_slopes_use_the_general_lower_level(helper, chain_space):
    shifted = helper.function_service.finite_function(
        "shifted", chain_space, [3.0, 2.0, 1.0], base_index=2
    )
    s = helper.slope_service
    assert s.uniform_strict_slope(shifted, CHAIN_SCHEDULE).values == [
        1.0,
        1.0,
        math.inf,
    ]
    assert len(s.ratio_liminf(shifted, CHAIN_SCHEDULE).values) == 3
    with pytest.raises(ValueError):
        s.er_modulus(shifted, CHAIN_SCHEDULE)
