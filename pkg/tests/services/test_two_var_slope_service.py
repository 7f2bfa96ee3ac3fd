import numpy as np
import pytest

from src.app.models.domain.limit_models import RadiusSchedule
from src.app.models.domain.space_models import Combiner
from src.app.utils.ext_real_utils import close_enough
from tests.conftest import catalog_target

CHAIN_SCHEDULE = RadiusSchedule(4.0, 0.5, 2)


@pytest.fixture(scope="module")
def embedded_chain(helper, chain_function):
    return helper.function_service.embed_tilde(chain_function)


def test_embedding_keeps_the_single_variable_values(
    helper, chain_function, embedded_chain
):
    s, t = helper.slope_service, helper.two_var_slope_service
    assert t.er2_modulus(embedded_chain, CHAIN_SCHEDULE).values == s.er_modulus(
        chain_function, CHAIN_SCHEDULE
    ).values
    assert t.uniform_strict_slope2(embedded_chain, CHAIN_SCHEDULE).values == (
        s.uniform_strict_slope(chain_function, CHAIN_SCHEDULE).values
    )
    nonlocal_two = t.nonlocal_rho_slopes_at(
        embedded_chain,
        embedded_chain.sample_x,
        embedded_chain.sample_y,
        embedded_chain.values,
        0.5,
    )
    assert list(nonlocal_two) == list(s.sample_array(chain_function, "nonlocal"))


def test_er_equivalent_forms_agree_on_sum_abs(helper):
    loaded = catalog_target(helper, "sum-abs")
    forms = helper.two_var_slope_service.er2_equivalent_forms(
        loaded.target, helper.analysis_schedule(loaded)
    )
    assert set(forms) == {"x_only", "x_and_y", "f_down"}
    for estimate in forms.values():
        assert close_enough(estimate.reported, 1.0, 0.05, 0.3)


def test_metric_choice_does_not_change_uniform_strict_slope(helper):
    loaded = catalog_target(helper, "sum-abs")
    schedule = helper.analysis_schedule(loaded)
    t = helper.two_var_slope_service
    d_max = t.uniform_strict_slope2(loaded.target, schedule, Combiner.MAX)
    d_sum = t.uniform_strict_slope2(loaded.target, schedule, Combiner.SUM)
    assert close_enough(d_max.reported, d_sum.reported, 0.05, 0.3)


def test_local_rho_slope_bounded_by_subdiff_plus_rho(helper):
    loaded = catalog_target(helper, "sum-abs")
    g = loaded.target
    t = helper.two_var_slope_service
    for i in np.flatnonzero(g.values > 0)[::7]:
        x, y = g.sample_x[i], g.sample_y[i]
        for rho in (0.5, 0.1):
            local = t.local_rho_slope(g, x, y, rho).value
            sub = t.subdiff_rho_slope(g, x, y, rho * rho).value
            assert local <= sub + rho + 1e-9


def test_rho_must_be_positive(helper, embedded_chain):
    with pytest.raises(ValueError):
        helper.two_var_slope_service.nonlocal_rho_slope(
            embedded_chain, [0], [0], 0.0
        )
