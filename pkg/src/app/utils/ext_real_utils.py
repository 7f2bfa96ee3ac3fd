"""Helpers for values in R ∪ {+∞} stored as floats.

+∞ is ``math.inf``. NaN and −∞ are never valid quantities here; every
boundary that accepts a computed value goes through ``check_ext_real``.
"""

import math
from typing import Any, Union

import numpy as np

INF = math.inf

ExtReal = float


def check_ext_real(value: Any, what: str = "value") -> float:
    """Coerce to float and reject NaN / −∞.

    Raises:
        ValueError: if the value is not an extended real in R ∪ {+∞}.
    """
    try:
        v = float(value)
    except (TypeError, ValueError) as e:
        raise ValueError(f"{what} is not a number: {value!r}") from e
    if math.isnan(v):
        raise ValueError(f"{what} is NaN")
    if v == -math.inf:
        raise ValueError(f"{what} is -inf, which is not representable")
    return v


def positive_part(value: float) -> float:
    return value if value > 0.0 else 0.0


def extreal_div(num: float, den: float, zero_over_zero: float = 0.0) -> float:
    """num/den for nonnegative extended reals.

    positive/0 is +∞, 0/0 is ``zero_over_zero``, ∞/finite is +∞, finite/∞ is 0.
    """
    num = check_ext_real(num, "numerator")
    den = check_ext_real(den, "denominator")
    if num < 0 or den < 0:
        raise ValueError("extreal_div expects nonnegative arguments")
    if den == 0.0:
        return zero_over_zero if num == 0.0 else INF
    if math.isinf(den):
        if math.isinf(num):
            raise ValueError("inf/inf is undefined")
        return 0.0
    return num / den


def ratio_array(
    num: np.ndarray, den: np.ndarray, zero_over_zero: float = 0.0
) -> np.ndarray:
    """Vectorized ``extreal_div`` (same conventions, no ∞/∞ inputs)."""
    num = np.asarray(num, dtype=float)
    den = np.asarray(den, dtype=float)
    out = np.empty(np.broadcast(num, den).shape, dtype=float)
    num_b, den_b = np.broadcast_arrays(num, den)
    zero_den = den_b == 0.0
    with np.errstate(divide="ignore", invalid="ignore"):
        np.divide(num_b, den_b, out=out, where=~zero_den)
    out[zero_den & (num_b == 0.0)] = zero_over_zero
    out[zero_den & (num_b != 0.0)] = INF
    out[np.isinf(den_b) & np.isfinite(num_b)] = 0.0
    return out


def ext_to_json(value: Union[float, int, None]) -> Union[float, str, None]:
    """JSON has no infinity: +∞ is written as the string "inf"."""
    if value is None:
        return None
    v = float(value)
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    return v


def ext_from_json(value: Union[float, str, None]) -> Union[float, None]:
    if value is None:
        return None
    if isinstance(value, str):
        if value.strip().lower() in ("inf", "+inf", "infinity"):
            return INF
        raise ValueError(f"unrecognised extended real {value!r}")
    return check_ext_real(value)


def close_enough(
    a: float, b: float, rel: float = 0.05, abs_floor: float = 1e-2
) -> bool:
    """Relative comparison used by the property suite; ∞ only matches ∞."""
    if math.isinf(a) or math.isinf(b):
        return a == b
    return abs(a - b) <= max(rel * max(abs(a), abs(b)), abs_floor)
