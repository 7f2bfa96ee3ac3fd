import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from src.app.utils.ext_real_utils import (
    check_ext_real,
    close_enough,
    ext_from_json,
    ext_to_json,
    extreal_div,
    ratio_array,
)

nonneg = st.one_of(
    st.just(0.0),
    st.just(math.inf),
    st.floats(min_value=1e-6, max_value=1e6, allow_nan=False),
)


def test_division_conventions():
    assert extreal_div(1.0, 0.0) == math.inf
    assert extreal_div(0.0, 0.0) == 0.0
    assert extreal_div(0.0, 0.0, zero_over_zero=math.inf) == math.inf
    assert extreal_div(math.inf, 3.0) == math.inf
    assert extreal_div(3.0, math.inf) == 0.0
    assert extreal_div(3.0, 2.0) == 1.5


@pytest.mark.parametrize(
    "num, den", [(math.nan, 1.0), (-1.0, 1.0), (1.0, -2.0), (math.inf, math.inf)]
)
def test_division_rejects_invalid(num, den):
    with pytest.raises(ValueError):
        extreal_div(num, den)


@settings(max_examples=200, deadline=None)
@given(st.lists(st.tuples(nonneg, nonneg), min_size=1, max_size=30))
def test_ratio_array_matches_scalar(pairs):
    pairs = [(a, b) for a, b in pairs if not (math.isinf(a) and math.isinf(b))]
    if not pairs:
        return
    num = np.array([a for a, _ in pairs])
    den = np.array([b for _, b in pairs])
    vector = ratio_array(num, den)
    for got, (a, b) in zip(vector, pairs):
        assert got == extreal_div(a, b)


def test_check_ext_real_rejects_nan_and_minus_inf():
    assert check_ext_real("2.5") == 2.5
    assert check_ext_real(math.inf) == math.inf
    with pytest.raises(ValueError):
        check_ext_real(math.nan)
    with pytest.raises(ValueError):
        check_ext_real(-math.inf)
    with pytest.raises(ValueError):
        check_ext_real("abc")


def test_json_infinity_is_a_string():
    assert ext_to_json(math.inf) == "inf"
    assert ext_to_json(None) is None
    assert ext_from_json("inf") == math.inf
    assert ext_from_json(0.25) == 0.25
    with pytest.raises(ValueError):
        ext_from_json("nope")


def test_close_enough_only_matches_infinity_with_infinity():
    assert close_enough(math.inf, math.inf)
    assert not close_enough(math.inf, 1e9)
    assert close_enough(1.0, 1.04, rel=0.05)
    assert not close_enough(1.0, 1.2, rel=0.05, abs_floor=0.0)
    assert close_enough(0.0, 0.009, rel=0.05, abs_floor=1e-2)
