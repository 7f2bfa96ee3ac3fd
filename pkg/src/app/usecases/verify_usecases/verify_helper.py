import math
import zlib
from typing import Callable, Dict, Iterator, List, Optional, Tuple

import numpy as np
from fastapi import Depends

from src.app.config.settings import settings
from src.app.models.domain.analysis_models import LoadedSpec
from src.app.models.domain.function_models import ProbeFunction, TwoVarFunction
from src.app.models.domain.limit_models import (
    LimitEstimate,
    LimitKind,
    RadiusSchedule,
)
from src.app.models.domain.mapping_models import SetValuedMapping
from src.app.models.domain.report_models import CheckResult
from src.app.models.domain.space_models import (
    Combiner,
    EuclideanSpace,
    FiniteMetricSpace,
    NormKind,
    ProductSpace,
    combine_distances,
    validate_metric_matrix,
)
from src.app.services.oracle_service import LIMIT_QUANTITIES
from src.app.services.slope_service import BandKind, RestrictedRegion
from src.app.usecases.analyze_usecases.analyze_helper import AnalyzeHelper
from src.app.utils.ext_real_utils import (
    close_enough,
    extreal_div,
    ratio_array,
)
from src.app.utils.logging_util import loggers

EXACT = 1e-12
FINITE_TOL = 1e-9
# local balls on random finite spaces reach neighbours at this scale
RANDOM_RESOLUTION = 0.2
RANDOM_SCHEDULE = RadiusSchedule(2.0, 0.5, 6)
POINT_SUBSAMPLE = 30

CheckFn = Callable[[np.random.Generator], List[CheckResult]]


def _le(a: float, b: float, tol: float) -> bool:
    """a <= b + tol on R ∪ {+∞}."""
    if math.isinf(b):
        return True
    if math.isinf(a):
        return False
    return a <= b + tol


def _same(a: float, b: float, tol: float = EXACT) -> bool:
    return close_enough(a, b, tol, tol)


def _result(label: str, passed: bool, detail: str = "", **measured) -> CheckResult:
    return CheckResult(
        name=label, passed=bool(passed), detail=detail, measured=measured
    )


def _radius_violations(
    lhs: LimitEstimate, rhs: LimitEstimate, tol: float
) -> List[Tuple[float, float, float]]:
    """Radii where lhs <= rhs + tol fails."""
    return [
        (rho, a, b)
        for (rho, a), (_, b) in zip(lhs.per_radius, rhs.per_radius)
        if not _le(a, b, tol)
    ]


def _radius_mismatches(
    lhs: LimitEstimate, rhs: LimitEstimate, tol: float = EXACT
) -> List[Tuple[float, float, float]]:
    return [
        (rho, a, b)
        for (rho, a), (_, b) in zip(lhs.per_radius, rhs.per_radius)
        if not _same(a, b, tol)
    ]


def _describe(bad: List[Tuple[float, float, float]]) -> str:
    if not bad:
        return ""
    rho, a, b = bad[0]
    return f"{len(bad)} radii fail, first at rho={rho:g}: {a!r} vs {b!r}"


def _grid_tol(value: float) -> float:
    return settings.GRID_TOL * max(1.0, 0.0 if math.isinf(value) else abs(value))


class VerifyHelper:
    """
    Cross-module property suite behind ``verify``.

    Checks are registered under ``<group>.<property>`` names and run in
    registration order. Each check draws from its own generator seeded by
    (seed, crc32(name)), so filtering never changes the random instances a
    check sees.
    """

    def __init__(self, analyze_helper: AnalyzeHelper = Depends(AnalyzeHelper)):
        self.analyze_helper = analyze_helper
        self._loaded: Dict[str, LoadedSpec] = {}
        self._mapping_cache: Dict[Tuple[str, str], object] = {}
        self.registry: Dict[str, CheckFn] = {
            "limits.monotone_bands": self.monotone_bands,
            "limits.extreal_division": self.extreal_division,
            "spaces.metric_axioms": self.metric_axioms,
            "spaces.norm_axioms": self.norm_axioms,
            "spaces.rho_metric_admissible": self.rho_metric_admissible,
            "spaces.duality_map": self.duality_map,
            "oracle.sampled_equals_brute_force": self.sampled_equals_brute_force,
            "reduction.embed_tilde": self.embed_tilde,
            "slope_hierarchy.local_le_nonlocal": self.local_le_nonlocal,
            "slope_hierarchy.strict_le_uniform": self.strict_le_uniform,
            "slope_hierarchy.uniform_ge_ratio": self.uniform_ge_ratio,
            "slope_hierarchy.local_le_subdiff": self.local_le_subdiff,
            "slope_hierarchy.convex_equalities": self.convex_equalities,
            "error_bound.er_le_uniform_strict": self.er_le_uniform_strict,
            "error_bound.er_equals_uniform_strict": self.er_equals_uniform_strict,
            "error_bound.nonlocal_ge_ratio": self.nonlocal_ge_ratio,
            "error_bound.restricted_level_set": self.restricted_level_set,
            "two_var.er_forms_agree": self.er_forms_agree,
            "two_var.local_le_nonlocal": self.two_var_local_le_nonlocal,
            "two_var.strict_le_uniform": self.two_var_strict_le_uniform,
            "two_var.local_le_subdiff_plus_rho": self.local_le_subdiff_plus_rho,
            "two_var.strict_outer_matches_subdiff": self.strict_outer_matches_subdiff,
            "two_var.er_equals_uniform_strict": self.two_var_er_equals_uniform,
            "two_var.metric_invariance": self.metric_invariance,
            "two_var.primed_relations": self.primed_relations,
            "mapping.sr_le_uniform_strict": self.sr_le_uniform_strict,
            "mapping.local_le_nonlocal": self.mapping_local_le_nonlocal,
            "mapping.strict_le_uniform": self.mapping_strict_le_uniform,
            "mapping.approx_le_exact": self.approx_le_exact,
            "mapping.induced_ge_approx": self.induced_ge_approx,
            "mapping.induced_subdiff_matches": self.induced_subdiff_matches,
            "mapping.convex_sr_equals_subdiff": self.convex_sr_equals_subdiff,
            "mapping.limit_set_consistency": self.limit_set_consistency,
            "mapping.calmness_duality": self.calmness_duality,
            "mapping.coderivative_homogeneity": self.coderivative_homogeneity,
            "mapping.desk_values": self.desk_values,
            "ekeland.random_instances": self.ekeland_random_instances,
            "ekeland.chain": self.ekeland_chain,
            "cross_check.grid_fixtures": self.grid_fixtures,
            "catalog.truths": self.catalog_truths,
        }

    # ------------------------------------------------------------------
    # driver

    def names(self, pattern: Optional[str] = None) -> List[str]:
        return [n for n in self.registry if not pattern or pattern in n]

    @staticmethod
    def rng_for(name: str, seed: int) -> np.random.Generator:
        return np.random.default_rng([int(seed), zlib.crc32(name.encode())])

    def run(self, name: str, seed: int) -> List[CheckResult]:
        """Run one registered check; an exception counts as a failure."""
        try:
            results = self.registry[name](self.rng_for(name, seed))
        except Exception as e:
            loggers["verify"].exception(f"{name} raised {type(e).__name__}")
            return [_result(name, False, f"{type(e).__name__}: {e}")]
        for r in results:
            r.name = f"{name}[{r.name}]" if r.name else name
            if not r.passed:
                loggers["verify"].warning(f"{r.name} failed: {r.detail}")
        return results

    # ------------------------------------------------------------------
    # fixtures and random instances

    @property
    def services(self) -> AnalyzeHelper:
        return self.analyze_helper

    def _catalog(self, name: str) -> LoadedSpec:
        if name not in self._loaded:
            self._loaded[name] = self.analyze_helper.load(
                {"spec_path": f"catalog:{name}"}
            )
        return self._loaded[name]

    def _fixture_names(self, kind: str, tag: Optional[str] = None) -> List[str]:
        return [
            e["name"]
            for e in self.analyze_helper.catalog_service.listing()
            if e["kind"] == kind and (tag is None or tag in e["tags"])
        ]

    def _schedule(self, loaded: LoadedSpec) -> RadiusSchedule:
        return self.analyze_helper.analysis_schedule(loaded)

    @staticmethod
    def _floor(target) -> float:
        return 3 * target.resolution or FINITE_TOL

    def _random_space(
        self, rng: np.random.Generator, max_points: Optional[int] = None
    ) -> FiniteMetricSpace:
        top = max_points or settings.VERIFY_RANDOM_SPACE_MAX_POINTS
        n = int(rng.integers(5, top + 1))
        dim = int(rng.integers(1, 3))
        norm_kind = list(NormKind)[int(rng.integers(len(NormKind)))]
        coords = rng.uniform(-1.0, 1.0, size=(n, dim))
        coords[0] = 0.0
        return self.services.space_service.finite_space_from_points(
            EuclideanSpace(dim, norm_kind), coords, resolution=RANDOM_RESOLUTION
        )

    def _random_function(
        self, rng: np.random.Generator, k: int, with_infinite: bool = True
    ) -> ProbeFunction:
        space = self._random_space(rng)
        values = rng.uniform(0.0, 1.0, size=space.size) * rng.uniform(0.5, 2.0)
        values[rng.random(space.size) < 0.2] = 0.0
        if with_infinite:
            values[rng.random(space.size) < 0.1] = math.inf
        values[0] = 0.0
        return self.services.function_service.finite_function(
            f"random-{k}", space, values, base_index=0
        )

    def _hierarchy_functions(
        self, rng: np.random.Generator, random_count: int = 5
    ) -> Iterator[Tuple[str, ProbeFunction, RadiusSchedule, float]]:
        """(label, f, schedule, pointwise tol) for catalog and random functions."""
        for name in self._fixture_names("function"):
            loaded = self._catalog(name)
            f = loaded.target
            finite = isinstance(f.space, FiniteMetricSpace)
            tol = FINITE_TOL if finite else settings.GRID_TOL
            yield name, f, self._schedule(loaded), tol
        for k in range(random_count):
            f = self._random_function(rng, k)
            yield f"random-{k}", f, RANDOM_SCHEDULE, FINITE_TOL

    @staticmethod
    def _subsample(
        rng: np.random.Generator, idx: np.ndarray, size: int
    ) -> np.ndarray:
        if idx.size <= size:
            return idx
        return np.sort(rng.choice(idx, size=size, replace=False))

    # ------------------------------------------------------------------
    # limits

    def monotone_bands(self, rng: np.random.Generator) -> List[CheckResult]:
        core = self.services.core
        schedule = RadiusSchedule(1.0, 0.5, 8)
        out = []
        for k in range(settings.VERIFY_RANDOM_SPACES):
            d = rng.uniform(0.0, 1.0, size=40)
            v = rng.exponential(size=40)
            v[rng.random(40) < 0.1] = math.inf

            def band_inf(rho: float, d=d, v=v) -> float:
                mask = d < rho
                return float(v[mask].min()) if mask.any() else math.inf

            def band_sup(rho: float, d=d, v=v) -> float:
                mask = (d < rho) & np.isfinite(v)
                return float(v[mask].max()) if mask.any() else 0.0

            inf_est = core.estimate_limit(band_inf, schedule, kind=LimitKind.INF)
            sup_est = core.estimate_limit(band_sup, schedule, kind=LimitKind.SUP)
            out.append(
                _result(
                    f"random-{k}",
                    inf_est.monotone and sup_est.monotone,
                    f"inf {inf_est.values}, sup {sup_est.values}"
                    if not (inf_est.monotone and sup_est.monotone)
                    else "",
                )
            )
        return out

    def extreal_division(self, rng: np.random.Generator) -> List[CheckResult]:
        table = [
            ((1.0, 0.0), math.inf),
            ((0.0, 0.0), 0.0),
            ((math.inf, 2.0), math.inf),
            ((2.0, math.inf), 0.0),
            ((3.0, 2.0), 1.5),
        ]
        bad = [args for args, want in table if extreal_div(*args) != want]
        rejected = 0
        for args in ((math.nan, 1.0), (-1.0, 1.0), (math.inf, math.inf)):
            try:
                extreal_div(*args)
            except ValueError:
                rejected += 1

        num = rng.exponential(size=300)
        den = rng.exponential(size=300)
        num[rng.random(300) < 0.2] = 0.0
        den[rng.random(300) < 0.2] = 0.0
        inf_den = rng.random(300) < 0.1
        den[inf_den] = math.inf
        num[~inf_den & (rng.random(300) < 0.1)] = math.inf
        vector = ratio_array(num, den)
        scalar = np.array([extreal_div(a, b) for a, b in zip(num, den)])
        agree = bool(np.all((vector == scalar) | (np.isinf(vector) & np.isinf(scalar))))
        return [
            _result("conventions", not bad, f"wrong results for {bad}" if bad else ""),
            _result("rejects_invalid", rejected == 3, f"{rejected}/3 rejected"),
            _result("vectorized_matches_scalar", agree),
        ]

    # ------------------------------------------------------------------
    # spaces

    def metric_axioms(self, rng: np.random.Generator) -> List[CheckResult]:
        out = []
        for k in range(settings.VERIFY_RANDOM_SPACES):
            a = self._random_space(rng, max_points=12)
            b = self._random_space(rng, max_points=12)
            I, J = np.meshgrid(np.arange(a.size), np.arange(b.size), indexing="ij")
            problems = []
            for combiner in Combiner:
                product = ProductSpace(a, b, float(rng.uniform(0.05, 2.0)), combiner)
                P = product.join(a.points()[I.ravel()], b.points()[J.ravel()])
                try:
                    validate_metric_matrix(product.distances(P, P), FINITE_TOL)
                except ValueError as e:
                    problems.append(f"{combiner.value}: {e}")
            out.append(_result(f"random-{k}", not problems, "; ".join(problems)))
        return out

    def norm_axioms(self, rng: np.random.Generator) -> List[CheckResult]:
        space_service = self.services.space_service
        return [
            _result(
                f"dim{dim}-{kind.value}",
                space_service.validate_norm_axioms(EuclideanSpace(dim, kind), rng),
            )
            for dim in (1, 2, 3)
            for kind in NormKind
        ]

    def rho_metric_admissible(self, rng: np.random.Generator) -> List[CheckResult]:
        out = []
        for k in range(settings.VERIFY_RANDOM_SPACES):
            kind = list(NormKind)[int(rng.integers(len(NormKind)))]
            X = EuclideanSpace(int(rng.integers(1, 4)), kind)
            Y = EuclideanSpace(int(rng.integers(1, 4)), kind)
            dX = X.norm(rng.normal(size=(100, X.dim)))
            dY = Y.norm(rng.normal(size=(100, Y.dim)))
            lo, hi = sorted(rng.uniform(0.01, 2.0, size=2))
            d_max = combine_distances(dX, dY, hi, Combiner.MAX)
            d_sum = combine_distances(dX, dY, hi, Combiner.SUM)
            sandwich = np.all(d_max <= d_sum + FINITE_TOL) and np.all(
                d_sum <= 2 * d_max + FINITE_TOL
            )
            monotone = all(
                np.all(
                    combine_distances(dX, dY, lo, c)
                    <= combine_distances(dX, dY, hi, c) + FINITE_TOL
                )
                for c in Combiner
            )
            out.append(
                _result(
                    f"random-{k}",
                    sandwich and monotone,
                    f"sandwich={bool(sandwich)}, monotone_in_rho={bool(monotone)}",
                )
            )
        return out

    def duality_map(self, rng: np.random.Generator) -> List[CheckResult]:
        space_service = self.services.space_service
        out = []
        for dim in (1, 2, 3):
            for kind in NormKind:
                space = EuclideanSpace(dim, kind)
                worst = 0.0
                for _ in range(20):
                    y = rng.normal(size=dim)
                    if kind != NormKind.L2 and rng.random() < 0.3:
                        y[int(rng.integers(dim))] = 0.0
                    if not np.any(y):
                        continue
                    norm_y = float(space.norm(y[None, :])[0])
                    z = rng.normal(size=(50, dim))
                    norm_z = space.norm(z)
                    for j in space_service.duality_map(y, kind):
                        worst = max(
                            worst,
                            abs(space_service.dual_norm(j, kind) - 1.0),
                            abs(float(j @ y) - norm_y) / (1.0 + norm_y),
                            float(np.max(z @ j - norm_z)),
                        )
                out.append(
                    _result(f"dim{dim}-{kind.value}", worst <= FINITE_TOL, worst=worst)
                )
        return out

    # ------------------------------------------------------------------
    # oracle equivalence and the embedding reduction

    def sampled_equals_brute_force(self, rng: np.random.Generator) -> List[CheckResult]:
        s, oracle = self.services.slope_service, self.services.oracle_service
        out = []
        for k in range(settings.VERIFY_RANDOM_SPACES):
            f = self._random_function(rng, k)
            brute = oracle.brute_force_all(f, RANDOM_SCHEDULE)
            sampled = {
                "er_modulus": s.er_modulus(f, RANDOM_SCHEDULE),
                "strict_outer": s.strict_outer_slope(f, RANDOM_SCHEDULE),
                "uniform_strict": s.uniform_strict_slope(f, RANDOM_SCHEDULE),
                "ratio_liminf": s.ratio_liminf(f, RANDOM_SCHEDULE),
            }
            problems = [
                f"{name}: {_describe(bad)}"
                for name in LIMIT_QUANTITIES
                if (bad := _radius_mismatches(sampled[name], getattr(brute, name)))
            ]
            tables = {"local": brute.local_slope, "nonlocal": brute.nonlocal_slope}
            for array, table in tables.items():
                values = s.sample_array(f, array)
                wrong = [i for i in range(f.size) if not _same(values[i], table[i])]
                if wrong:
                    problems.append(f"{array} slope differs at points {wrong[:5]}")
            out.append(
                _result(f"random-{k}", not problems, "; ".join(problems), points=f.size)
            )
        return out

    def embed_tilde(self, rng: np.random.Generator) -> List[CheckResult]:
        s = self.services.slope_service
        t = self.services.two_var_slope_service
        out = []
        for k in range(settings.VERIFY_RANDOM_SPACES):
            f = self._random_function(rng, k)
            g = self.services.function_service.embed_tilde(f)
            pairs = {
                "er": (
                    t.er2_modulus(g, RANDOM_SCHEDULE),
                    s.er_modulus(f, RANDOM_SCHEDULE),
                ),
                "strict_outer": (
                    t.strict_outer_slope2(g, RANDOM_SCHEDULE),
                    s.strict_outer_slope(f, RANDOM_SCHEDULE),
                ),
                "uniform_strict": (
                    t.uniform_strict_slope2(g, RANDOM_SCHEDULE),
                    s.uniform_strict_slope(f, RANDOM_SCHEDULE),
                ),
                "ratio": (
                    t.ratio_liminf2(g, RANDOM_SCHEDULE),
                    s.ratio_liminf(f, RANDOM_SCHEDULE),
                ),
            }
            problems = [
                f"{name}: {_describe(bad)}"
                for name, (two, one) in pairs.items()
                if (bad := _radius_mismatches(two, one))
            ]
            finite = np.isfinite(f.values)
            nonlocal_two = t.nonlocal_rho_slopes_at(
                g, g.sample_x, g.sample_y, g.values, 0.5
            )
            local_two = t.local_rho_slopes_at(
                g, g.sample_x, g.sample_y, g.values, 0.5
            )[0]
            for name, two, one in (
                ("nonlocal", nonlocal_two, s.sample_array(f, "nonlocal")[finite]),
                ("local", local_two, s.sample_array(f, "local")[finite]),
            ):
                if not all(_same(a, b) for a, b in zip(two, one)):
                    problems.append(f"pointwise {name} slopes differ")
            out.append(_result(f"random-{k}", not problems, "; ".join(problems)))
        return out

    # ------------------------------------------------------------------
    # single-variable slope hierarchy

    def local_le_nonlocal(self, rng: np.random.Generator) -> List[CheckResult]:
        s = self.services.slope_service
        out = []
        for label, f, _, tol in self._hierarchy_functions(rng):
            mask = (f.values > 0) & np.isfinite(f.values)
            local = s.sample_array(f, "local")[mask]
            nonlocal_ = s.sample_array(f, "nonlocal")[mask]
            excess = local - nonlocal_ - tol * np.maximum(1.0, nonlocal_)
            worst = float(excess.max()) if excess.size else -math.inf
            out.append(_result(label, worst <= 0, points=int(mask.sum())))
        return out

    def strict_le_uniform(self, rng: np.random.Generator) -> List[CheckResult]:
        s = self.services.slope_service
        out = []
        for label, f, schedule, tol in self._hierarchy_functions(rng):
            bad = _radius_violations(
                s.strict_outer_slope(f, schedule),
                s.uniform_strict_slope(f, schedule),
                tol,
            )
            out.append(_result(label, not bad, _describe(bad)))
        return out

    def uniform_ge_ratio(self, rng: np.random.Generator) -> List[CheckResult]:
        s = self.services.slope_service
        out = []
        for label, f, schedule, _ in self._hierarchy_functions(rng):
            bad = _radius_violations(
                s.ratio_liminf(f, schedule), s.uniform_strict_slope(f, schedule), EXACT
            )
            out.append(_result(label, not bad, _describe(bad)))
        return out

    def _convex_oracle_functions(self) -> Iterator[Tuple[str, LoadedSpec]]:
        for name in self._fixture_names("function", "convex"):
            loaded = self._catalog(name)
            f = loaded.target
            if f.has_oracle and f.space.is_normed and f.convex_claim:
                yield name, loaded

    def local_le_subdiff(self, rng: np.random.Generator) -> List[CheckResult]:
        s = self.services.slope_service
        out = []
        for name, loaded in self._convex_oracle_functions():
            f = loaded.target
            mask = (f.values > 0) & np.isfinite(f.values)
            local = s.sample_array(f, "local")[mask]
            subdiff = s.sample_array(f, "subdiff")[mask]
            bad = [
                i
                for i, (a, b) in enumerate(zip(local, subdiff))
                if not _le(a, b, _grid_tol(b))
            ]
            out.append(
                _result(name, not bad, f"{len(bad)} points fail" if bad else "")
            )
        return out

    def convex_equalities(self, rng: np.random.Generator) -> List[CheckResult]:
        s = self.services.slope_service
        out = []
        for name, loaded in self._convex_oracle_functions():
            f, schedule = loaded.target, self._schedule(loaded)
            mask = (f.values > 0) & np.isfinite(f.values)
            local = s.sample_array(f, "local")[mask]
            subdiff = s.sample_array(f, "subdiff")[mask]
            pointwise = all(
                close_enough(a, b, settings.GRID_TOL, FINITE_TOL)
                for a, b in zip(local, subdiff)
            )
            limits = {
                "uniform_strict": s.uniform_strict_slope(f, schedule).reported,
                "strict_outer": s.strict_outer_slope(f, schedule).reported,
                "strict_outer_subdiff": s.strict_outer_subdiff_slope(
                    f, schedule
                ).reported,
            }
            floor = self._floor(f)
            values = list(limits.values())
            agree = all(
                close_enough(values[0], v, settings.RELATIVE_TOL, floor)
                for v in values[1:]
            )
            out.append(
                _result(
                    name,
                    pointwise and agree,
                    f"pointwise={pointwise}, limits_agree={agree}",
                    **limits,
                )
            )
        return out

    # ------------------------------------------------------------------
    # error bound modulus against the slopes

    def er_le_uniform_strict(self, rng: np.random.Generator) -> List[CheckResult]:
        s = self.services.slope_service
        out = []
        for label, f, schedule, tol in self._hierarchy_functions(rng):
            bad = _radius_violations(
                s.er_modulus(f, schedule), s.uniform_strict_slope(f, schedule), tol
            )
            out.append(_result(label, not bad, _describe(bad)))
        return out

    def er_equals_uniform_strict(self, rng: np.random.Generator) -> List[CheckResult]:
        s = self.services.slope_service
        out = []
        for name in self._fixture_names("function"):
            loaded = self._catalog(name)
            f = loaded.target
            if not isinstance(f.space, EuclideanSpace):
                continue
            schedule = self._schedule(loaded)
            er = s.er_modulus(f, schedule).reported
            us = s.uniform_strict_slope(f, schedule).reported
            out.append(
                _result(
                    name,
                    close_enough(er, us, settings.RELATIVE_TOL, self._floor(f)),
                    er_modulus=er,
                    uniform_strict=us,
                )
            )
        return out

    def nonlocal_ge_ratio(self, rng: np.random.Generator) -> List[CheckResult]:
        s = self.services.slope_service
        out = []
        for label, f, _, _ in self._hierarchy_functions(rng):
            finite = np.isfinite(f.values)
            nonlocal_ = s.sample_array(f, "nonlocal")[finite]
            ratio = s.sample_array(f, "ratio")[finite]
            ok = all(_le(r, n, EXACT) for r, n in zip(ratio, nonlocal_))
            out.append(_result(label, ok))
        return out

    def restricted_level_set(self, rng: np.random.Generator) -> List[CheckResult]:
        """Level-set restricted slope >= Er per radius, equal where bands coincide."""
        s = self.services.slope_service
        out = []
        for label, f, schedule, _ in self._hierarchy_functions(rng):
            restricted = s.restricted_uniform_strict_slope(
                f, schedule, RestrictedRegion.LEVEL_SET
            )
            er = s.er_modulus(f, schedule)
            problems = []
            for (rho, a), (_, b) in zip(restricted.per_radius, er.per_radius):
                same_band = np.array_equal(
                    s.band_mask(f, rho, BandKind.ER),
                    s.band_mask(f, rho, BandKind.STRICT),
                )
                if not _le(b, a, EXACT) or (same_band and not _same(a, b)):
                    problems.append(f"rho={rho:g}: restricted {a!r}, Er {b!r}")
            out.append(_result(label, not problems, "; ".join(problems[:3])))
        return out

    # ------------------------------------------------------------------
    # two-variable functions

    def _two_var_fixtures(self) -> Iterator[Tuple[str, LoadedSpec]]:
        for name in self._fixture_names("two_var_function"):
            yield name, self._catalog(name)

    def _positive_points(
        self, rng: np.random.Generator, g: TwoVarFunction, size: int = POINT_SUBSAMPLE
    ) -> np.ndarray:
        return self._subsample(rng, np.flatnonzero(g.values > 0), size)

    def er_forms_agree(self, rng: np.random.Generator) -> List[CheckResult]:
        t = self.services.two_var_slope_service
        out = []
        for name, loaded in self._two_var_fixtures():
            g = loaded.target
            forms = t.er2_equivalent_forms(g, self._schedule(loaded))
            values = {k: v.reported for k, v in forms.items()}
            first = values["x_only"]
            agree = all(
                close_enough(first, v, settings.RELATIVE_TOL, self._floor(g))
                for v in values.values()
            )
            out.append(_result(name, agree, **values))
        return out

    def two_var_local_le_nonlocal(self, rng: np.random.Generator) -> List[CheckResult]:
        t = self.services.two_var_slope_service
        out = []
        for name, loaded in self._two_var_fixtures():
            g = loaded.target
            idx = self._positive_points(rng, g)
            X, Y, fq = g.sample_x[idx], g.sample_y[idx], g.values[idx]
            ok = True
            for rho in (0.5, 0.1):
                local = t.local_rho_slopes_at(g, X, Y, fq, rho)[0]
                nonlocal_ = t.nonlocal_rho_slopes_at(g, X, Y, fq, rho)
                ok &= all(_le(a, b, FINITE_TOL) for a, b in zip(local, nonlocal_))
            out.append(_result(name, ok, points=int(idx.size)))
        return out

    def two_var_strict_le_uniform(self, rng: np.random.Generator) -> List[CheckResult]:
        t = self.services.two_var_slope_service
        out = []
        for name, loaded in self._two_var_fixtures():
            g, schedule = loaded.target, self._schedule(loaded)
            bad = _radius_violations(
                t.strict_outer_slope2(g, schedule),
                t.uniform_strict_slope2(g, schedule),
                FINITE_TOL,
            )
            out.append(_result(name, not bad, _describe(bad)))
        return out

    def local_le_subdiff_plus_rho(self, rng: np.random.Generator) -> List[CheckResult]:
        """rho-slope <= subdifferential rho²-slope + rho at sampled oracle points."""
        t = self.services.two_var_slope_service
        out = []
        for name, loaded in self._two_var_fixtures():
            g = loaded.target
            if not g.has_oracle:
                continue
            problems = []
            for i in self._positive_points(rng, g):
                x, y = g.sample_x[i], g.sample_y[i]
                for rho in (0.5, 0.1, 0.01):
                    lhs = t.local_rho_slope(g, x, y, rho).value
                    sub = t.subdiff_rho_slope(g, x, y, rho * rho).value
                    if not _le(lhs, sub + rho, FINITE_TOL):
                        problems.append(f"({x}, {y}) rho={rho}: {lhs} > {sub} + {rho}")
            out.append(_result(name, not problems, "; ".join(problems[:3])))
        return out

    def strict_outer_matches_subdiff(
        self, rng: np.random.Generator
    ) -> List[CheckResult]:
        t = self.services.two_var_slope_service
        out = []
        for name, loaded in self._two_var_fixtures():
            g, schedule = loaded.target, self._schedule(loaded)
            if not g.has_oracle:
                continue
            strict = t.strict_outer_slope2(g, schedule).reported
            subdiff = t.strict_outer_subdiff_slope2(g, schedule).reported
            out.append(
                _result(
                    name,
                    close_enough(
                        strict, subdiff, settings.RELATIVE_TOL, self._floor(g)
                    ),
                    strict_outer=strict,
                    strict_outer_subdiff=subdiff,
                )
            )
        return out

    def two_var_er_equals_uniform(self, rng: np.random.Generator) -> List[CheckResult]:
        t = self.services.two_var_slope_service
        out = []
        for name, loaded in self._two_var_fixtures():
            g, schedule = loaded.target, self._schedule(loaded)
            floor = self._floor(g)
            er = t.er2_modulus(g, schedule).reported
            us = t.uniform_strict_slope2(g, schedule).reported
            out.append(
                _result(
                    name,
                    _le(er, us, floor)
                    and close_enough(er, us, settings.RELATIVE_TOL, floor),
                    er2=er,
                    uniform_strict=us,
                )
            )
        return out

    def metric_invariance(self, rng: np.random.Generator) -> List[CheckResult]:
        t = self.services.two_var_slope_service
        out = []
        for name, loaded in self._two_var_fixtures():
            g, schedule = loaded.target, self._schedule(loaded)
            d_max = t.uniform_strict_slope2(g, schedule, Combiner.MAX).reported
            d_sum = t.uniform_strict_slope2(g, schedule, Combiner.SUM).reported
            out.append(
                _result(
                    name,
                    close_enough(d_max, d_sum, settings.RELATIVE_TOL, self._floor(g)),
                    max_metric=d_max,
                    sum_metric=d_sum,
                )
            )
        return out

    def primed_relations(self, rng: np.random.Generator) -> List[CheckResult]:
        """
        primed_{rho'} <= plain_rho + rho/rho', and primed_rho < gamma < ∞
        forces plain_{gamma rho} < gamma.
        """
        t = self.services.two_var_slope_service
        out = []
        for name, loaded in self._two_var_fixtures():
            g = loaded.target
            if not g.has_oracle:
                continue
            problems = []
            for i in self._positive_points(rng, g, size=15):
                x, y = g.sample_x[i], g.sample_y[i]
                for rho, rho_p in ((0.5, 0.5), (0.5, 0.1), (0.1, 0.5)):
                    primed = t.subdiff_rho_slope_primed(g, x, y, rho_p).value
                    plain = t.subdiff_rho_slope(g, x, y, rho).value
                    if not _le(primed, plain + rho / rho_p, FINITE_TOL):
                        problems.append(f"primed {primed} > {plain} + {rho}/{rho_p}")
                for rho in (0.5, 0.1):
                    primed = t.subdiff_rho_slope_primed(g, x, y, rho).value
                    if math.isinf(primed):
                        continue
                    gamma = primed + 0.05
                    plain = t.subdiff_rho_slope(g, x, y, gamma * rho).value
                    if not plain < gamma + FINITE_TOL:
                        problems.append(f"gamma={gamma}: plain {plain} not below gamma")
            out.append(_result(name, not problems, "; ".join(problems[:3])))
        return out

    # ------------------------------------------------------------------
    # set-valued mappings

    def _mapping_names(self, normal_cone: bool = True) -> List[str]:
        names = self._fixture_names("mapping")
        if normal_cone:
            return [n for n in names if self._catalog(n).target.has_normal_cone]
        return names

    def _mapping_value(self, name: str, key: str):
        """Cached mapping limits: sr, uniform_strict, strict, exact, approx, gfrerer."""
        cache_key = (name, key)
        if cache_key not in self._mapping_cache:
            loaded = self._catalog(name)
            F, schedule, tol = loaded.target, self._schedule(loaded), loaded.tol
            m = self.services.mapping_service
            compute = {
                "sr": lambda: m.subregularity_constant(F, schedule, tol),
                "uniform_strict": lambda: m.F_uniform_strict_slope(
                    F, schedule, tol=tol
                ),
                "strict": lambda: m.F_strict_slope(F, schedule, tol=tol),
                "exact": lambda: m.F_strict_subdiff_slope(F, schedule, tol),
                "approx": lambda: m.F_approx_strict_subdiff_slope(F, schedule, tol),
                "gfrerer": lambda: m.gfrerer_limit_test(F, schedule),
            }
            self._mapping_cache[cache_key] = compute[key]()
        return self._mapping_cache[cache_key]

    def _graph_band(
        self, rng: np.random.Generator, F: SetValuedMapping, rho: float, size: int
    ) -> Tuple[TwoVarFunction, np.ndarray]:
        g = self.services.mapping_service.induced_function(F)
        idx = self.services.two_var_slope_service.band_indices(g, rho, "mapping")
        idx = idx[g.dist_to_ybar[idx] > 0]
        return g, self._subsample(rng, idx, size)

    def sr_le_uniform_strict(self, rng: np.random.Generator) -> List[CheckResult]:
        out = []
        for name in self._mapping_names(normal_cone=False):
            F = self._catalog(name).target
            floor = self._floor(F)
            sr = self._mapping_value(name, "sr").reported
            us = self._mapping_value(name, "uniform_strict").reported
            ok = _le(sr, us, floor)
            if F.closed:
                ok = ok and close_enough(sr, us, settings.RELATIVE_TOL, floor)
            out.append(_result(name, ok, sr=sr, uniform_strict=us))
        return out

    def mapping_local_le_nonlocal(self, rng: np.random.Generator) -> List[CheckResult]:
        t = self.services.two_var_slope_service
        out = []
        for name in self._mapping_names(normal_cone=False):
            F = self._catalog(name).target
            g, idx = self._graph_band(rng, F, 0.5, POINT_SUBSAMPLE)
            X, Y, fq = g.sample_x[idx], g.sample_y[idx], g.values[idx]
            local = t.local_rho_slopes_at(g, X, Y, fq, 0.5)[0]
            nonlocal_ = t.nonlocal_rho_slopes_at(g, X, Y, fq, 0.5)
            ok = all(_le(a, b, FINITE_TOL) for a, b in zip(local, nonlocal_))
            out.append(_result(name, ok, points=int(idx.size)))
        return out

    def mapping_strict_le_uniform(self, rng: np.random.Generator) -> List[CheckResult]:
        out = []
        for name in self._mapping_names(normal_cone=False):
            bad = _radius_violations(
                self._mapping_value(name, "strict"),
                self._mapping_value(name, "uniform_strict"),
                FINITE_TOL,
            )
            out.append(_result(name, not bad, _describe(bad)))
        return out

    def approx_le_exact(self, rng: np.random.Generator) -> List[CheckResult]:
        m = self.services.mapping_service
        out = []
        for name in self._mapping_names():
            F = self._catalog(name).target
            problems = []
            for rho in (0.5, 0.1):
                g, idx = self._graph_band(rng, F, rho, 10)
                for i in idx:
                    x, y = g.sample_x[i], g.sample_y[i]
                    approx = m.F_approx_subdiff_rho_slope(F, x, y, rho).value
                    exact = m.F_subdiff_rho_slope(F, x, y, rho).value
                    if not _le(approx, exact, FINITE_TOL):
                        problems.append(f"({x}, {y}) rho={rho}: {approx} > {exact}")
            bad = _radius_violations(
                self._mapping_value(name, "approx"),
                self._mapping_value(name, "exact"),
                FINITE_TOL,
            )
            if bad:
                problems.append(_describe(bad))
            out.append(_result(name, not problems, "; ".join(problems[:3])))
        return out

    def induced_ge_approx(self, rng: np.random.Generator) -> List[CheckResult]:
        out = []
        for name in self._mapping_names():
            loaded = self._catalog(name)
            F = loaded.target
            g = self.services.mapping_service.induced_function(F)
            induced = self.services.two_var_slope_service.strict_outer_subdiff_slope2(
                g, self._schedule(loaded)
            ).reported
            approx = self._mapping_value(name, "approx").reported
            out.append(
                _result(
                    name,
                    _le(approx, induced, self._floor(F)),
                    induced_subdiff=induced,
                    approx_subdiff=approx,
                )
            )
        return out

    def induced_subdiff_matches(self, rng: np.random.Generator) -> List[CheckResult]:
        m = self.services.mapping_service
        t = self.services.two_var_slope_service
        out = []
        for name in self._mapping_names():
            F = self._catalog(name).target
            problems = []
            for rho in (0.5, 0.1):
                g, idx = self._graph_band(rng, F, rho, 10)
                for i in idx:
                    x, y = g.sample_x[i], g.sample_y[i]
                    induced = t.subdiff_rho_slope(g, x, y, rho).value
                    direct = m.F_subdiff_rho_slope(F, x, y, rho).value
                    if not close_enough(induced, direct, settings.GRID_TOL, FINITE_TOL):
                        problems.append(f"({x}, {y}) rho={rho}: {induced} vs {direct}")
            out.append(_result(name, not problems, "; ".join(problems[:3])))
        return out

    def convex_sr_equals_subdiff(self, rng: np.random.Generator) -> List[CheckResult]:
        out = []
        for name in self._mapping_names():
            F = self._catalog(name).target
            if not F.convex:
                continue
            sr = self._mapping_value(name, "sr").reported
            exact = self._mapping_value(name, "exact").reported
            out.append(
                _result(
                    name,
                    close_enough(sr, exact, settings.RELATIVE_TOL, FINITE_TOL),
                    sr=sr,
                    strict_subdiff=exact,
                )
            )
        return out

    def limit_set_consistency(self, rng: np.random.Generator) -> List[CheckResult]:
        """Limit-set exclusion evidence implies qualitative condition f."""
        criteria = self.services.criteria_service
        out = []
        for name in self._mapping_names():
            loaded = self._catalog(name)
            result = self._mapping_value(name, "gfrerer")
            if not result.excludes_origin:
                out.append(_result(name, True, "no exclusion evidence"))
                continue
            verdict = criteria.qualitative_subregularity_verdict(
                loaded.target, self._schedule(loaded), tol=loaded.tol
            )
            out.append(
                _result(
                    name,
                    verdict.holds("f") is True,
                    f"condition f holds={verdict.holds('f')}",
                )
            )
        if "parabola-mapping" in self._mapping_names():
            parabola = self._mapping_value("parabola-mapping", "gfrerer")
            approach = not parabola.excludes_origin
            out.append(_result("parabola-mapping:origin_approached", approach))
        return out

    def _random_relation(self, rng: np.random.Generator, k: int) -> SetValuedMapping:
        space_service = self.services.space_service
        line = EuclideanSpace(1)
        n, p = int(rng.integers(3, 9)), int(rng.integers(3, 7))
        domain = space_service.finite_space_from_points(
            line, np.r_[0.0, np.sort(rng.uniform(0.1, 3.0, size=n - 1))]
        )
        range_space = space_service.finite_space_from_points(
            line, np.r_[0.0, np.sort(rng.uniform(0.1, 2.0, size=p - 1))]
        )
        graph = [(a, b) for a in range(n) for b in range(p) if rng.random() < 0.4]
        graph.append((0, 0))
        return self.services.mapping_service.finite_relation(
            f"random-relation-{k}", domain, range_space, graph, xbar=0, ybar=0
        )

    def calmness_duality(self, rng: np.random.Generator) -> List[CheckResult]:
        """Calmness of F⁻¹ is the reciprocal of sr[F] on every band."""
        m = self.services.mapping_service
        schedule = RadiusSchedule(4.0, 0.5, 4)
        mappings = [("finite-relation", self._catalog("finite-relation").target)]
        mappings += [(f"random-{k}", self._random_relation(rng, k)) for k in range(10)]
        out = []
        for label, F in mappings:
            sr = m.subregularity_constant(F, schedule)
            calm = m.calmness_modulus(m.inverse(F), schedule)
            bad = [
                (rho, c, s)
                for (rho, c), (_, s) in zip(calm.per_radius, sr.per_radius)
                if not _same(c, extreal_div(1.0, s))
            ]
            out.append(_result(label, not bad, _describe(bad)))
        return out

    def coderivative_homogeneity(self, rng: np.random.Generator) -> List[CheckResult]:
        m = self.services.mapping_service
        out = []
        for name in self._mapping_names():
            F = self._catalog(name).target
            if not F.convex:
                continue
            g, idx = self._graph_band(rng, F, 0.5, 5)
            problems = []
            for i in idx:
                x, y = g.sample_x[i], g.sample_y[i]
                ystar = rng.normal(size=F.dy)
                base = m.coderivative(F, x, y, ystar)
                for lam in (0.5, 3.0):
                    scaled = m.coderivative(F, x, y, lam * ystar)
                    same = (
                        scaled.vertices.shape == base.vertices.shape
                        and np.allclose(scaled.vertices, lam * base.vertices, atol=1e-9)
                        and scaled.rays.shape == base.rays.shape
                        and np.allclose(scaled.rays, base.rays, atol=1e-9)
                    )
                    if not same:
                        problems.append(f"({x}, {y}) lambda={lam}")
            out.append(_result(name, not problems, "; ".join(problems[:3])))
        return out

    def desk_values(self, rng: np.random.Generator) -> List[CheckResult]:
        out = []
        expected = {"identity-mapping": 1e-6, "halfline-mapping": 1e-2}
        for name, tol in expected.items():
            sr = self._mapping_value(name, "sr").reported
            out.append(_result(name, abs(sr - 1.0) <= tol, sr=sr))
        finest = self._mapping_value("parabola-mapping", "sr").values[-1]
        out.append(_result("parabola-mapping", finest <= 0.1, sr_finest_band=finest))
        return out

    # ------------------------------------------------------------------
    # Ekeland search

    def ekeland_random_instances(self, rng: np.random.Generator) -> List[CheckResult]:
        oracle = self.services.oracle_service
        failures = []
        for k in range(settings.VERIFY_EKELAND_INSTANCES):
            f = self._random_function(rng, k, with_infinite=False)
            eps = float(rng.uniform(0.05, 1.0))
            lam = float(rng.uniform(0.1, 2.0))
            candidates = np.flatnonzero(f.values < f.values.min() + eps)
            v = int(rng.choice(candidates))
            result = oracle.ekeland_point(f, v, eps, lam)
            if not result.ok:
                failures.append(result.to_dict())
        return [
            _result(
                "",
                not failures,
                f"first failure {failures[0]}" if failures else "",
                instances=settings.VERIFY_EKELAND_INSTANCES,
                failures=len(failures),
            )
        ]

    def ekeland_chain(self, rng: np.random.Generator) -> List[CheckResult]:
        f = self._catalog("finite-chain").target
        result = self.services.oracle_service.ekeland_point(f, 0, 2.5, 3.0)
        return [
            _result(
                "finite-chain",
                result.ok and result.point == 2,
                point=result.point,
                distance=result.distance,
            )
        ]

    # ------------------------------------------------------------------
    # grids against brute force and stored truths

    def grid_fixtures(self, rng: np.random.Generator) -> List[CheckResult]:
        oracle = self.services.oracle_service
        out = []
        for entry in self.services.catalog_service.listing():
            if "cross_check" not in entry["tags"]:
                continue
            loaded = self._catalog(entry["name"])
            space = loaded.spec.space
            truths = {
                k: float(v) for k, v in entry["truths"].items() if k in LIMIT_QUANTITIES
            }
            report = oracle.cross_check(
                loaded.target,
                space.spacing,
                loaded.schedule,
                half_width=space.half_width,
                truths=truths,
                point_truths=entry["point_truths"],
            )
            failed = [r["quantity"] for r in report.rows if not r["ok"]]
            out.append(
                _result(
                    entry["name"],
                    report.passed,
                    f"failed rows {failed}" if failed else "",
                    max_relative_error=report.max_relative_error,
                )
            )
        return out

    def catalog_truths(self, rng: np.random.Generator) -> List[CheckResult]:
        helper = self.analyze_helper
        out = []
        for name in helper.catalog_service.names():
            loaded = self._catalog(name)
            schedule = self._schedule(loaded)
            body = {
                "slopes": helper.slope_report(loaded, schedule),
                "brute_force": helper.brute_force(loaded, schedule),
            }
            for check in helper.truth_checks(loaded, body):
                check.name = f"{name}:{check.name}"
                out.append(check)
        return out

    @staticmethod
    def summary(checks: List[Dict]) -> Dict[str, int]:
        failed = sum(1 for c in checks if not c["passed"])
        return {"total": len(checks), "passed": len(checks) - failed, "failed": failed}
