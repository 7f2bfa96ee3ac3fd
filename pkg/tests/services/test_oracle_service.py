import math

import numpy as np
import pytest

from src.app.models.domain.limit_models import RadiusSchedule
from src.app.models.domain.space_models import EuclideanSpace
from src.app.services.oracle_service import LIMIT_QUANTITIES
from tests.conftest import catalog_target

CHAIN_SCHEDULE = RadiusSchedule(4.0, 0.5, 2)


def test_brute_force_on_chain(helper, chain_function):
    brute = helper.oracle_service.brute_force_all(chain_function, CHAIN_SCHEDULE)
    assert brute.er_exact == 1.0
    assert brute.nonlocal_slope == {0: 1.0, 1: 1.0, 2: 0.0}
    assert brute.isolated == [0, 1, 2]
    assert brute.er_modulus.values == [1.0, 1.0, math.inf]
    assert [step["value"] for step in brute.er_step_function] == [1.0, 1.0]
    assert brute.exact == {
        "er_modulus": 1.0,
        "strict_outer": 0.0,
        "uniform_strict": 1.0,
        "ratio_liminf": 1.0,
    }
    assert [step["rho_above"] for step in brute.step_functions["ratio_liminf"]] == [
        1.0,
        2.0,
    ]


def test_brute_force_matches_sampling_path(helper):
    rng = np.random.default_rng(7)
    coords = rng.uniform(-1, 1, size=(25, 2))
    coords[0] = 0.0
    space = helper.space_service.finite_space_from_points(
        EuclideanSpace(2), coords, resolution=0.2
    )
    values = rng.uniform(0, 1, size=25)
    values[::4] = 0.0
    f = helper.function_service.finite_function("random", space, values, 0)
    schedule = RadiusSchedule(2.0, 0.5, 6)
    brute = helper.oracle_service.brute_force_all(f, schedule)
    s = helper.slope_service
    sampled = {
        "er_modulus": s.er_modulus(f, schedule),
        "strict_outer": s.strict_outer_slope(f, schedule),
        "uniform_strict": s.uniform_strict_slope(f, schedule),
        "ratio_liminf": s.ratio_liminf(f, schedule),
    }
    for name in LIMIT_QUANTITIES:
        assert sampled[name].values == pytest.approx(getattr(brute, name).values)
    assert list(s.sample_array(f, "nonlocal")) == pytest.approx(
        [brute.nonlocal_slope[i] for i in range(f.size)]
    )


def test_brute_force_needs_finite_space_and_zero_base(helper, chain_space):
    loaded = catalog_target(helper, "abs")
    with pytest.raises(ValueError):
        helper.oracle_service.brute_force_all(loaded.target, CHAIN_SCHEDULE)
    shifted = helper.function_service.finite_function(
        "shifted", chain_space, [3.0, 2.0, 1.0], base_index=2
    )
    with pytest.raises(ValueError):
        helper.oracle_service.brute_force_all(shifted, CHAIN_SCHEDULE)


def test_ekeland_on_chain(helper, chain_function):
    result = helper.oracle_service.ekeland_point(chain_function, 0, 2.5, 3.0)
    assert result.point == 2
    assert result.distance == 2.0
    assert result.ok


def test_ekeland_rejects_non_minimizers(helper, chain_function):
    with pytest.raises(ValueError):
        helper.oracle_service.ekeland_point(chain_function, 0, 1.0, 1.0)
    with pytest.raises(ValueError):
        helper.oracle_service.ekeland_point(chain_function, 2, 0.0, 1.0)


def test_ekeland_random_instances(helper):
    rng = np.random.default_rng(3)
    for _ in range(20):
        coords = rng.uniform(-1, 1, size=(12, 1))
        space = helper.space_service.finite_space_from_points(EuclideanSpace(1), coords)
        values = rng.uniform(0, 2, size=12)
        f = helper.function_service.finite_function("random", space, values, 0)
        eps = float(rng.uniform(0.05, 1.0))
        v = int(rng.choice(np.flatnonzero(values < values.min() + eps)))
        radius = float(rng.uniform(0.1, 2))
        result = helper.oracle_service.ekeland_point(f, v, eps, radius)
        assert result.ok


def test_cross_check_abs(helper):
    loaded = catalog_target(helper, "abs")
    report = helper.oracle_service.cross_check(
        loaded.target,
        0.05,
        RadiusSchedule(1.0, 0.5, 12),
        half_width=1.0,
        truths={"er_modulus": 1.0, "uniform_strict": 1.0},
    )
    assert report.passed
    assert {row["check"] for row in report.rows} == {
        "sampled_vs_brute_force",
        "grid_vs_analytic",
    }
