import math

import pytest

from src.app.models.domain.limit_models import LimitKind, RadiusSchedule
from src.app.services.core_numerics_service import CoreNumericsService


@pytest.fixture
def core():
    return CoreNumericsService()


def test_schedule_radii_are_geometric():
    schedule = RadiusSchedule(1.0, 0.5, 3)
    assert list(schedule.radii()) == [1.0, 0.5, 0.25, 0.125]
    assert schedule.finest == 0.125
    assert RadiusSchedule.parse("2, 0.5, 4") == RadiusSchedule(2.0, 0.5, 4)


@pytest.mark.parametrize("text", ["1,0.5", "1,1.5,3", "0,0.5,3", "a,b,c"])
def test_schedule_parse_rejects_bad_input(text):
    with pytest.raises(ValueError):
        RadiusSchedule.parse(text)


def test_constant_band_is_monotone_and_saturated(core):
    estimate = core.estimate_limit(lambda rho: 1.0, RadiusSchedule(1.0, 0.5, 4))
    assert estimate.reported == 1.0
    assert estimate.monotone
    assert estimate.saturated
    assert estimate.flags == []


def test_band_of_radius_itself_converges_to_zero(core):
    estimate = core.estimate_limit(
        lambda rho: rho, RadiusSchedule(1.0, 0.5, 6), kind=LimitKind.SUP
    )
    assert estimate.reported == pytest.approx(1 / 64)
    assert estimate.monotone
    assert not estimate.saturated


def test_decreasing_infimum_is_flagged(core):
    estimate = core.estimate_limit(lambda rho: rho, RadiusSchedule(1.0, 0.5, 3))
    assert not estimate.monotone
    assert "non_monotone" in estimate.flags


def test_empty_band_is_flagged(core):
    estimate = core.estimate_limit(
        lambda rho: 1.0 if rho > 0.3 else math.inf, RadiusSchedule(1.0, 0.5, 3)
    )
    assert math.isinf(estimate.reported)
    assert "empty_band" in estimate.flags
    assert estimate.monotone


def test_estimate_rejects_short_schedules_and_nan(core):
    with pytest.raises(ValueError):
        core.estimate_limit(lambda rho: 1.0, RadiusSchedule(1.0, 0.5, 1))
    with pytest.raises(ValueError):
        core.estimate_limit(lambda rho: math.nan, RadiusSchedule(1.0, 0.5, 3))


def test_clip_schedule_keeps_radii_above_resolution(core):
    clipped = core.clip_schedule(RadiusSchedule(1.0, 0.5, 12), 0.01)
    assert clipped.steps == 5
    assert clipped.finest >= 2 * 0.01
    assert core.clip_schedule(RadiusSchedule(1.0, 0.5, 12), 0.0).steps == 12
    assert core.clip_schedule(RadiusSchedule(1.0, 0.5, 12), 10.0).steps == 2
