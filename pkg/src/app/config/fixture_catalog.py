"""Curated fixtures with hand-derived ground truths.

Every ``spec`` below is a complete analysis spec: it is accepted unchanged by
``analyze`` (file, HTTP body or ``catalog:<name>``).
"""


def _flat_step_breakpoints(levels: int = 7):
    """Continuous staircase on [0, 1] with flat steps and slope-2 risers.

    On [2^-(k+1), 2^-k] the function is constant 2^-(k+1) up to 0.75 * 2^-k
    and then climbs linearly to 2^-k. Left of zero it is |x|.
    """
    xs, vs = [-1.0, 0.0, 2.0**-levels], [1.0, 0.0, 2.0**-levels]
    for k in range(levels - 1, -1, -1):
        xs += [0.75 * 2.0**-k, 2.0**-k]
        vs += [2.0 ** -(k + 1), 2.0**-k]
    return xs, vs


_STAIRCASE_X, _STAIRCASE_V = _flat_step_breakpoints()

_LINE_SPACE = {
    "type": "euclidean",
    "dim": 1,
    "norm_kind": "L2",
    "spacing": 0.01,
    "half_width": 1.0,
}

FIXTURES = [
    {
        "name": "abs",
        "spec": {
            "kind": "function",
            "name": "abs",
            "space": _LINE_SPACE,
            "definition": {"type": "formula", "formula": "abs"},
            "base_point": [0.0],
            "at": [0.0],
        },
        "truths": {
            "er_modulus": 1.0,
            "uniform_strict": 1.0,
            "strict_outer": 1.0,
            "ratio_liminf": 1.0,
        },
        "point_truths": [
            {"quantity": "local_slope", "at": [0.5], "value": 1.0},
            {"quantity": "nonlocal_slope", "at": [0.5], "value": 1.0},
        ],
        "provenance": (
            "S(f) = {0} and d(x, S) = |x|, so every ratio f(x)/d(x, S) is 1. "
            "Off zero the derivative is ±1, giving slope 1 everywhere in the band; "
            "moving to 0 realizes the nonlocal slope 1."
        ),
        "tags": ["convex", "oracle", "cross_check"],
    },
    {
        "name": "parabola",
        "spec": {
            "kind": "function",
            "name": "parabola",
            "space": _LINE_SPACE,
            "definition": {"type": "quadratic", "coefficients": [1.0, 0.0, 0.0]},
            "base_point": [0.0],
            "at": [1.0],
        },
        "truths": {
            "er_modulus": 0.0,
            "uniform_strict": 0.0,
            "strict_outer": 0.0,
            "ratio_liminf": 0.0,
        },
        "point_truths": [{"quantity": "local_slope", "at": [1.0], "value": 2.0}],
        "provenance": (
            "x^2 / |x| = |x| tends to 0, so there is no linear error bound. "
            "The slope at x is 2|x|, which is 2 at x = 1 and vanishes at the base point."
        ),
        "tags": ["convex", "oracle", "cross_check"],
    },
    {
        "name": "positive-part",
        "spec": {
            "kind": "function",
            "name": "positive-part",
            "space": _LINE_SPACE,
            "definition": {"type": "formula", "formula": "positive_part"},
            "base_point": [0.0],
            "at": [0.25],
        },
        "truths": {
            "er_modulus": 1.0,
            "uniform_strict": 1.0,
            "strict_outer": 1.0,
            "ratio_liminf": 1.0,
        },
        "point_truths": [{"quantity": "local_slope", "at": [0.25], "value": 1.0}],
        "provenance": (
            "S(f) = (-inf, 0]. For x > 0, f(x) = x = d(x, S), and the slope is 1. "
            "Points left of 0 never enter a band because f vanishes there."
        ),
        "tags": ["convex", "oracle", "cross_check"],
    },
    {
        "name": "nonconvex-lipschitz-counterexample",
        "spec": {
            "kind": "function",
            "name": "nonconvex-lipschitz-counterexample",
            "space": _LINE_SPACE,
            "definition": {
                "type": "piecewise_linear",
                "breakpoints": _STAIRCASE_X,
                "values": _STAIRCASE_V,
            },
            "base_point": [0.0],
            "at": [0.01],
        },
        "truths": {"strict_outer": 0.0},
        "point_truths": [{"quantity": "local_slope", "at": [0.01], "value": 0.0}],
        "provenance": (
            "A 2-Lipschitz staircase with f(x) >= 2|x|/3, so Er f >= 2/3 > 0. "
            "Flat steps accumulate at 0, so the strict outer slope is 0. "
            "This is an error bound that the strict outer slope criterion cannot detect."
        ),
        "tags": ["nonconvex", "oracle", "cross_check"],
    },
    {
        "name": "distance-to-halfline",
        "spec": {
            "kind": "function",
            "name": "distance-to-halfline",
            "space": {
                "type": "euclidean",
                "dim": 2,
                "norm_kind": "L2",
                "spacing": 0.1,
                "half_width": 0.9,
            },
            "definition": {"type": "formula", "formula": "dist_to_halfline"},
            "base_point": [0.0, 0.0],
            "at": [0.5, 0.5],
        },
        "truths": {"er_modulus": 1.0, "uniform_strict": 1.0, "strict_outer": 1.0},
        "point_truths": [
            {"quantity": "local_slope", "at": [0.5, 0.5], "value": 1.0},
        ],
        "provenance": (
            "f is the distance to the half-line {(t, 0) : t >= 0}, so f = d(x, S(f)) "
            "and Er f = 1. A distance function to a convex set has slope 1 off the set. "
            "Points close to the half-line far from the origin drive f(x)/|x| to 0."
        ),
        "tags": ["convex", "oracle", "cross_check"],
    },
    {
        "name": "finite-two-point",
        "spec": {
            "kind": "function",
            "name": "finite-two-point",
            "space": {
                "type": "finite",
                "distances": [[0.0, 1.0], [1.0, 0.0]],
                "labels": ["a", "b"],
            },
            "definition": {"type": "table", "values": [1.0, 0.0]},
            "base_point": [1],
            "at": [0],
            "schedule": {"rho0": 2.0, "gamma": 0.5, "steps": 2},
        },
        "truths": {"er_exact": 1.0},
        "point_truths": [{"quantity": "nonlocal_slope", "at": [0], "value": 1.0}],
        "provenance": (
            "f(a) = 1, f(b) = 0, d(a, b) = 1. The only band point is a, so "
            "Er f(b) = 1/1. From a, moving to b gives the nonlocal slope 1."
        ),
        "tags": ["finite"],
    },
    {
        "name": "finite-chain",
        "spec": {
            "kind": "function",
            "name": "finite-chain",
            "space": {
                "type": "finite",
                "distances": [[0.0, 1.0, 2.0], [1.0, 0.0, 1.0], [2.0, 1.0, 0.0]],
                "labels": ["c0", "c1", "c2"],
            },
            "definition": {"type": "table", "values": [2.0, 1.0, 0.0]},
            "base_point": [2],
            "at": [0],
            "schedule": {"rho0": 4.0, "gamma": 0.5, "steps": 2},
        },
        "truths": {"er_exact": 1.0},
        "point_truths": [{"quantity": "nonlocal_slope", "at": [0], "value": 1.0}],
        "provenance": (
            "On the chain 0-1-2 with f = (2, 1, 0) every ratio f(i)/d(i, 2) is 1. "
            "Starting from v = 0 with eps = 2.5 and lambda = 3, the Ekeland search "
            "ends at 2."
        ),
        "tags": ["finite", "ekeland"],
    },
    {
        "name": "abs-embedded",
        "spec": {
            "kind": "two_var_function",
            "name": "abs-embedded",
            "definition": {
                "type": "embed",
                "function": {
                    "space": _LINE_SPACE,
                    "definition": {"type": "formula", "formula": "abs"},
                    "base_point": [0.0],
                },
            },
            "rho": 0.5,
            "at": [0.5],
            "at_y": [0.0],
        },
        "truths": {"er2": 1.0, "uniform_strict2": 1.0, "strict_outer2": 1.0},
        "provenance": (
            "The extension of |x| by +inf off y = 0 has the same level set and "
            "ratios as |x|, so every two-variable quantity reduces to the "
            "single-variable value 1."
        ),
        "tags": ["two_var", "reduction"],
    },
    {
        "name": "sum-abs",
        "spec": {
            "kind": "two_var_function",
            "name": "sum-abs",
            "space": {
                "type": "euclidean",
                "dim": 1,
                "norm_kind": "L2",
                "spacing": 0.1,
                "half_width": 1.0,
            },
            "definition": {"type": "formula", "formula": "sum_abs"},
            "rho": 0.5,
            "at": [0.5],
            "at_y": [0.0],
        },
        "truths": {"er2": 1.0, "uniform_strict2": 1.0, "strict_outer2": 1.0},
        "provenance": (
            "f(x, y) = |x| + |y| with S = {0}: f(x, y)/|x| >= 1 with equality on y = 0. "
            "Descending in x alone gives slope 1 in the rho-metric, and moving in y "
            "never beats it on the band infimum."
        ),
        "tags": ["two_var", "convex", "oracle"],
    },
    {
        "name": "identity-mapping",
        "spec": {
            "kind": "mapping",
            "name": "identity-mapping",
            "space": _LINE_SPACE,
            "definition": {"type": "formula", "formula": "identity"},
            "base_point": [0.0],
            "base_value": [0.0],
        },
        "truths": {"sr": 1.0, "strict_subdiff": 1.0, "excludes_origin": True},
        "provenance": (
            "F(x) = {x}: d(0, F(x)) = |x| = d(x, F^-1(0)), so sr = 1. "
            "D*F(y*) = {y*}, so the strict subdifferential slope is 1."
        ),
        "tags": ["mapping", "convex", "normal_cone"],
    },
    {
        "name": "halfline-mapping",
        "spec": {
            "kind": "mapping",
            "name": "halfline-mapping",
            "space": {
                "type": "euclidean",
                "dim": 1,
                "norm_kind": "L2",
                "spacing": 0.01,
                "half_width": 0.25,
            },
            "definition": {"type": "formula", "formula": "halfline"},
            "base_point": [0.0],
            "base_value": [0.0],
            "schedule": {"rho0": 0.25, "gamma": 0.5, "steps": 3},
        },
        "truths": {"sr": 1.0, "strict_subdiff": 1.0, "excludes_origin": True},
        "provenance": (
            "F(x) = {y : y >= x}, F^-1(0) = (-inf, 0]. For x > 0 both d(0, F(x)) "
            "and d(x, F^-1(0)) equal x, so sr = 1. The graph is a closed half-plane "
            "with normal (1, -1) on its edge."
        ),
        "tags": ["mapping", "convex", "normal_cone"],
    },
    {
        "name": "parabola-mapping",
        "spec": {
            "kind": "mapping",
            "name": "parabola-mapping",
            "space": _LINE_SPACE,
            "definition": {"type": "formula", "formula": "parabola"},
            "base_point": [0.0],
            "base_value": [0.0],
        },
        "truths": {"sr": 0.0, "excludes_origin": False},
        "provenance": (
            "F(x) = {x^2}: d(0, F(x)) / d(x, F^-1(0)) = |x| tends to 0, so F is not "
            "subregular. Rescaled coderivative pairs (t, 2t) approach the origin."
        ),
        "tags": ["mapping", "nonconvex", "normal_cone"],
    },
    {
        "name": "diagonal-mapping",
        "spec": {
            "kind": "mapping",
            "name": "diagonal-mapping",
            "space": _LINE_SPACE,
            "definition": {"type": "formula", "formula": "diagonal"},
            "base_point": [0.0],
            "base_value": [0.0, 0.0],
        },
        "truths": {"sr": 2.0**0.5, "strict_subdiff": 2.0**0.5, "excludes_origin": True},
        "provenance": (
            "F(x) = {(x, x)} into the Euclidean plane: d(0, F(x)) = sqrt(2)|x| and "
            "F^-1(0) = {0}, so sr = sqrt(2). The graph is a line, D*F(y*) = "
            "{y1* + y2*}, and the unit functional (1, 1)/sqrt(2) gives sqrt(2)."
        ),
        "tags": ["mapping", "convex", "normal_cone"],
    },
    {
        "name": "finite-relation",
        "spec": {
            "kind": "mapping",
            "name": "finite-relation",
            "definition": {
                "type": "finite_relation",
                "domain": {"type": "points", "points": [[0.0], [1.0], [2.0]]},
                "range": {"type": "points", "points": [[0.0], [0.5], [1.0]]},
                "graph": [[0, 0], [1, 1], [2, 2], [2, 0]],
            },
            "base_point": [0],
            "base_value": [0],
            "schedule": {"rho0": 4.0, "gamma": 0.5, "steps": 3},
        },
        "truths": {"sr_first_band": 0.5},
        "provenance": (
            "F^-1(y0) = {x0, x2}. The only domain point outside it is x1, with "
            "d(y0, F(x1)) = 0.5 and d(x1, {x0, x2}) = 1, so every nonempty band "
            "gives 0.5. The inverse has calmness 2 on the same bands."
        ),
        "tags": ["mapping", "finite"],
    },
]
