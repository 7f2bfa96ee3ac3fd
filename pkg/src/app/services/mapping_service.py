import itertools
import math
import weakref
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import linprog

from src.app.config.settings import settings
from src.app.models.domain.function_models import SubgradientSet, TwoVarFunction
from src.app.models.domain.limit_models import (
    LimitEstimate,
    LimitKind,
    RadiusSchedule,
)
from src.app.models.domain.mapping_models import (
    CoderivativeQuery,
    GfrererResult,
    GfrererWitness,
    SetValuedMapping,
)
from src.app.models.domain.report_models import PointEstimate, SubregularityReport
from src.app.models.domain.space_models import (
    Combiner,
    FiniteMetricSpace,
    NormKind,
    ProductSpace,
)
from src.app.services.core_numerics_service import CoreNumericsService
from src.app.services.space_service import SpaceService
from src.app.services.two_var_slope_service import TwoVarSlopeService
from src.app.utils.error_handler import NotEvaluableError
from src.app.utils.ext_real_utils import extreal_div, ratio_array
from src.app.utils.logging_util import loggers

_MATCH_TOL = 1e-12
# graph candidates for sphere probing are taken within this multiple of r
_CANDIDATE_SPREAD = 4.0
_GFRERER_DUAL_DIRECTIONS = 16
_MAX_WITNESSES = 20


class MappingService:
    """Set-valued mappings: subregularity, F-slopes, coderivatives, limit-set test."""

    def __init__(
        self,
        core_numerics_service: Optional[CoreNumericsService] = None,
        space_service: Optional[SpaceService] = None,
        two_var_slope_service: Optional[TwoVarSlopeService] = None,
    ):
        self.core = core_numerics_service or CoreNumericsService()
        self.space_service = space_service or SpaceService()
        self.two_var = two_var_slope_service or TwoVarSlopeService(
            self.core, self.space_service
        )
        self._induced = weakref.WeakKeyDictionary()

    # ------------------------------------------------------------------
    # builders

    def finite_relation(
        self,
        name: str,
        domain: FiniteMetricSpace,
        range_space: FiniteMetricSpace,
        graph: Sequence[Tuple[int, int]],
        xbar: int,
        ybar: int,
    ) -> SetValuedMapping:
        """Mapping given by a finite list of (x index, y index) graph pairs."""
        pairs = {(int(a), int(b)) for a, b in graph}
        for a, b in pairs:
            if not (0 <= a < domain.size and 0 <= b < range_space.size):
                raise ValueError(f"graph pair {(a, b)} outside the spaces")
        table = np.zeros((domain.size, range_space.size), dtype=bool)
        for a, b in pairs:
            table[a, b] = True

        def contains(xs: np.ndarray, ys: np.ndarray) -> np.ndarray:
            a = np.asarray(xs).reshape(-1).astype(int)
            b = np.asarray(ys).reshape(-1).astype(int)
            return table[a, b]

        def sample_values(x: np.ndarray) -> np.ndarray:
            row = int(np.ravel(x)[0])
            return np.flatnonzero(table[row]).astype(float).reshape(-1, 1)

        return SetValuedMapping(
            name=name,
            domain_space=domain,
            range_space=range_space,
            xbar=[float(xbar)],
            ybar=[float(ybar)],
            contains=contains,
            sample_values=sample_values,
            domain_sample=domain.points(),
            closed=True,
            complete=True,
        )

    def inverse(self, F: SetValuedMapping) -> SetValuedMapping:
        """F⁻¹: (y, x) ∈ gph F⁻¹ iff (x, y) ∈ gph F, sampled from F's graph."""
        gx, gy = F.graph_x, F.graph_y

        def contains(ys: np.ndarray, xs: np.ndarray) -> np.ndarray:
            return F.contains(xs, ys)

        def matches(y: np.ndarray) -> np.ndarray:
            d = F.range_space.distances(gy, F.range_space.as_points(y))[:, 0]
            return d <= _MATCH_TOL

        def sample_values(y: np.ndarray) -> np.ndarray:
            return gx[matches(y)]

        def values_near(y: np.ndarray, center: np.ndarray, radius: float):
            xs = gx[matches(y)]
            d = F.domain_space.distances(xs, F.domain_space.as_points(center))
            return xs[d[:, 0] <= radius]

        normal_cone = None
        if F.has_normal_cone:
            dx = F.dx

            def normal_cone(y: np.ndarray, x: np.ndarray) -> Optional[np.ndarray]:
                gens = F.normal_cone(x, y)
                if gens is None:
                    return None
                gens = np.asarray(gens, dtype=float).reshape(-1, F.dx + F.dy)
                return np.hstack([gens[:, dx:], gens[:, :dx]])

        return SetValuedMapping(
            name=f"inverse({F.name})",
            domain_space=F.range_space,
            range_space=F.domain_space,
            xbar=F.ybar,
            ybar=F.xbar,
            contains=contains,
            sample_values=sample_values,
            domain_sample=np.unique(gy, axis=0),
            values_near=values_near,
            normal_cone=normal_cone,
            convex=F.convex,
            closed=F.closed,
            complete=F.complete,
        )

    # ------------------------------------------------------------------
    # induced function f(x, y) = d(y, ȳ) on gph F

    def induced_function(self, F: SetValuedMapping) -> TwoVarFunction:
        if F in self._induced:
            return self._induced[F]

        X, Y = F.domain_space, F.range_space
        gx, gy = F.graph_x, F.graph_y
        # make sure every sampled x in F⁻¹(ȳ) carries the pair (x, ȳ)
        ybars = np.repeat(F.ybar[None, :], F.domain_sample.shape[0], axis=0)
        in_preimage = np.asarray(F.contains(F.domain_sample, ybars), dtype=bool)
        have = {tuple(np.round(p, 12)) for p in np.hstack([gx, gy])}
        extra = [
            x
            for x in F.domain_sample[in_preimage]
            if tuple(np.round(np.r_[x, F.ybar], 12)) not in have
        ]
        if extra:
            gx = np.vstack([gx, np.array(extra)])
            gy = np.vstack([gy, np.repeat(F.ybar[None, :], len(extra), axis=0)])

        def evaluate(Xq: np.ndarray, Yq: np.ndarray) -> np.ndarray:
            on = np.asarray(F.contains(Xq, Yq), dtype=bool)
            out = np.full(Xq.shape[0], math.inf)
            if on.any():
                out[on] = Y.distances(Yq[on], F.ybar[None, :])[:, 0]
            return out

        oracle = None
        if F.has_normal_cone and X.is_normed and Y.is_normed:

            def oracle(x: np.ndarray, y: np.ndarray) -> Optional[SubgradientSet]:
                gens = F.normal_cone(x, y)
                if gens is None:
                    return None
                gens = np.asarray(gens, dtype=float).reshape(-1, F.dx + F.dy)
                w = np.asarray(y, dtype=float).reshape(-1) - F.ybar
                if np.all(w == 0):
                    faces = self.space_service.dual_ball_vertices(Y.norm_kind, F.dy)
                else:
                    faces = self.space_service.duality_map(w, Y.norm_kind)
                points = np.hstack([np.zeros((faces.shape[0], F.dx)), faces])
                return SubgradientSet(points, gens)

        candidates = None
        if X.is_normed and F.values_near is not None:
            dirs = self.space_service.unit_directions(F.dx, X.norm_kind)

            def candidates(x: np.ndarray, y: np.ndarray, r: float):
                us, vs = [], []
                x = np.asarray(x, dtype=float).reshape(-1)
                for u in np.vstack([x[None, :], x[None, :] + r * dirs]):
                    near = Y.as_points(F.values_near(u, y, _CANDIDATE_SPREAD * r))
                    if near.size:
                        us.append(np.repeat(u[None, :], near.shape[0], axis=0))
                        vs.append(near)
                if not us:
                    return np.zeros((0, F.dx)), np.zeros((0, F.dy))
                return np.vstack(us), np.vstack(vs)

        g = TwoVarFunction(
            name=f"induced({F.name})",
            product=ProductSpace(X, Y),
            evaluate=evaluate,
            sample_x=gx,
            sample_y=gy,
            base_index=F.base_index,
            subgradient_oracle=oracle,
            local_candidates=candidates,
            lsc_claim=F.closed,
            complete_claim=F.complete,
            convex_claim=F.convex,
        )
        self._induced[F] = g
        return g

    def preimage_mask(self, F: SetValuedMapping) -> np.ndarray:
        """Domain-sample rows x with ȳ ∈ F(x)."""
        ybars = np.repeat(F.ybar[None, :], F.domain_sample.shape[0], axis=0)
        return np.asarray(F.contains(F.domain_sample, ybars), dtype=bool)

    # ------------------------------------------------------------------
    # subregularity and calmness

    def _distance_to_values(self, F: SetValuedMapping) -> np.ndarray:
        """d(ȳ, F(x)) for every domain sample x (+∞ when F(x) is empty)."""
        out = np.full(F.domain_sample.shape[0], math.inf)
        d = F.range_space.distances(F.graph_y, F.ybar[None, :])[:, 0]
        np.minimum.at(out, F.graph_owner, d)
        return out

    def subregularity_constant(
        self,
        F: SetValuedMapping,
        schedule: RadiusSchedule,
        tol: float = settings.DEFAULT_TOL,
    ) -> LimitEstimate:
        """Band infima of d(ȳ, F(x)) / d(x, F⁻¹(ȳ)) over {d(x, x̄) < rho, x ∉ F⁻¹(ȳ)}."""
        pre = self.preimage_mask(F)
        D = F.domain_space.distances(F.domain_sample, F.domain_sample)
        flags: List[str] = []
        if pre.any():
            d_pre = D[:, pre].min(axis=1)
        else:
            d_pre = np.full(pre.size, math.inf)
            flags += ["truncated", "empty_preimage"]
            loggers["mappings"].warning(f"{F.name}: sampled F⁻¹(ȳ) is empty")
        num = self._distance_to_values(F)
        ratio = np.full(pre.size, math.inf)
        finite = np.isfinite(num)
        ratio[finite] = ratio_array(num[finite], d_pre[finite])
        d_base = F.domain_space.distances(F.domain_sample, F.xbar[None, :])[:, 0]

        def band(rho: float) -> float:
            mask = (d_base < rho) & ~pre
            return float(ratio[mask].min()) if mask.any() else math.inf

        estimate = self.core.estimate_limit(band, schedule, tol, LimitKind.INF, flags)
        loggers["mappings"].info(f"{F.name}: sr reported {estimate.reported}")
        return estimate

    def calmness_modulus(
        self,
        G: SetValuedMapping,
        schedule: RadiusSchedule,
        tol: float = settings.DEFAULT_TOL,
    ) -> LimitEstimate:
        """
        Band suprema of d(x, G(ȳ)) / d(y, ȳ) over graph points (y, x) of G with
        d(x, x̄) < rho and x ∉ G(ȳ), where (ȳ, x̄) is G's base point.
        """
        gy, gx = G.graph_x, G.graph_y
        at_base = G.domain_space.distances(gy, G.xbar[None, :])[:, 0] <= _MATCH_TOL
        base_values = gx[at_base]
        flags: List[str] = []
        if base_values.shape[0]:
            d_set = G.range_space.distances(gx, base_values).min(axis=1)
        else:
            d_set = np.full(gx.shape[0], math.inf)
            flags.append("empty_base_value_set")
        d_arg = G.domain_space.distances(gy, G.xbar[None, :])[:, 0]
        ratio = ratio_array(np.where(np.isinf(d_set), 1.0, d_set), d_arg)
        ratio[np.isinf(d_set)] = math.inf
        d_base = G.range_space.distances(gx, G.ybar[None, :])[:, 0]

        def band(rho: float) -> float:
            mask = (d_base < rho) & (d_set > 0)
            return float(ratio[mask].max()) if mask.any() else 0.0

        return self.core.estimate_limit(band, schedule, tol, LimitKind.SUP, flags)

    # ------------------------------------------------------------------
    # primal F-slopes (the induced-function slopes on graph bands)

    def F_nonlocal_rho_slope(
        self,
        F: SetValuedMapping,
        x,
        y,
        rho: float,
        combiner: Combiner = Combiner.MAX,
    ) -> PointEstimate:
        self._require_on_graph(F, x, y)
        return self.two_var.nonlocal_rho_slope(
            self.induced_function(F), x, y, rho, combiner
        )

    def F_local_rho_slope(
        self,
        F: SetValuedMapping,
        x,
        y,
        rho: float,
        combiner: Combiner = Combiner.MAX,
    ) -> PointEstimate:
        self._require_on_graph(F, x, y)
        return self.two_var.local_rho_slope(
            self.induced_function(F), x, y, rho, combiner
        )

    def F_uniform_strict_slope(
        self,
        F: SetValuedMapping,
        schedule: RadiusSchedule,
        combiner: Combiner = Combiner.MAX,
        tol: float = settings.DEFAULT_TOL,
    ) -> LimitEstimate:
        return self.two_var.coupled_limit(
            self.induced_function(F),
            ["nonlocal"],
            schedule,
            "mapping",
            combiner,
            tol,
        )

    def F_strict_slope(
        self,
        F: SetValuedMapping,
        schedule: RadiusSchedule,
        combiner: Combiner = Combiner.MAX,
        tol: float = settings.DEFAULT_TOL,
    ) -> LimitEstimate:
        return self.two_var.coupled_limit(
            self.induced_function(F), ["local"], schedule, "mapping", combiner, tol
        )

    def F_strict_slope_with_ratio(
        self,
        F: SetValuedMapping,
        schedule: RadiusSchedule,
        tol: float = settings.DEFAULT_TOL,
    ) -> LimitEstimate:
        """Band infima of max{F local rho-slope, d(y, ȳ) / d(x, x̄)}."""
        return self.two_var.coupled_limit(
            self.induced_function(F), ["local", "ratio"], schedule, "mapping", tol=tol
        )

    def F_ratio_liminf(
        self,
        F: SetValuedMapping,
        schedule: RadiusSchedule,
        tol: float = settings.DEFAULT_TOL,
    ) -> LimitEstimate:
        """liminf of d(y, ȳ) / d(x, x̄) over graph points with x ∉ F⁻¹(ȳ)."""
        return self.two_var.coupled_limit(
            self.induced_function(F), ["ratio"], schedule, "mapping", tol=tol
        )

    def _require_on_graph(self, F: SetValuedMapping, x, y) -> None:
        X = F.domain_space.as_points(x)
        Y = F.range_space.as_points(y)
        if not bool(np.asarray(F.contains(X, Y))[0]):
            raise ValueError("(x, y) must lie on the graph of F")

    # ------------------------------------------------------------------
    # coderivatives

    def _normal_generators(self, F: SetValuedMapping, x, y) -> Optional[np.ndarray]:
        if not F.has_normal_cone:
            raise NotEvaluableError(f"{F.name} has no normal-cone oracle")
        gens = F.normal_cone(
            np.asarray(x, dtype=float).reshape(-1),
            np.asarray(y, dtype=float).reshape(-1),
        )
        if gens is None:
            return None
        return np.asarray(gens, dtype=float).reshape(-1, F.dx + F.dy)

    def coderivative(
        self, F: SetValuedMapping, x, y, ystar
    ) -> CoderivativeQuery:
        """D*F(x, y)(y*) from the generator description of N_gphF(x, y).

        The set {N_x^T lam : N_y^T lam = -y*, lam >= 0} is returned as
        conv(vertices) + cone(rays) by enumerating basic solutions.
        """
        self._require_on_graph(F, x, y)
        gens = self._normal_generators(F, x, y)
        ystar = np.asarray(ystar, dtype=float).reshape(-1)
        if ystar.size != F.dy:
            raise ValueError(f"y* must have {F.dy} coordinates")
        if gens is None:
            raise NotEvaluableError(f"{F.name}: no normal-cone data at ({x}, {y})")
        Nx, Ny = gens[:, : F.dx], gens[:, F.dx :]
        vertices, rays = self._cone_section(Nx, Ny, -ystar)
        return CoderivativeQuery(
            point=(
                np.asarray(x, dtype=float).reshape(-1).tolist(),
                np.asarray(y, dtype=float).reshape(-1).tolist(),
            ),
            ystar=ystar.tolist(),
            vertices=vertices,
            rays=rays,
        )

    @staticmethod
    def _cone_section(
        Nx: np.ndarray, Ny: np.ndarray, target: np.ndarray
    ) -> Tuple[np.ndarray, np.ndarray]:
        m, dx = Nx.shape[0], Nx.shape[1]
        dy = target.size
        A = Ny.T  # (dy, m)

        def dedupe(rows: List[np.ndarray]) -> np.ndarray:
            if not rows:
                return np.zeros((0, dx))
            arr = np.round(np.array(rows), 12) + 0.0
            return np.unique(arr, axis=0)

        vertices: List[np.ndarray] = []
        if np.allclose(target, 0.0):
            vertices.append(np.zeros(dx))
        for k in range(1, min(m, dy) + 1):
            for S in itertools.combinations(range(m), k):
                sub = A[:, S]
                lam, *_ = np.linalg.lstsq(sub, target, rcond=None)
                if np.linalg.norm(sub @ lam - target) > 1e-9 or np.any(lam < -1e-12):
                    continue
                if np.linalg.matrix_rank(sub) < k:
                    continue
                vertices.append(Nx[list(S)].T @ np.maximum(lam, 0.0))

        rays: List[np.ndarray] = []
        for k in range(1, min(m, dy + 1) + 1):
            for S in itertools.combinations(range(m), k):
                sub = A[:, S]
                _, sv, vt = np.linalg.svd(sub)
                rank = int(np.sum(sv > 1e-12))
                if k - rank != 1:
                    continue
                null = vt[-1]
                if np.all(null <= 1e-12):
                    null = -null
                if np.any(null <= 1e-12):
                    continue
                direction = Nx[list(S)].T @ null
                if np.linalg.norm(direction) > 1e-12:
                    rays.append(direction / np.linalg.norm(direction))
        if not vertices:
            return np.zeros((0, dx)), np.zeros((0, dx))
        return dedupe(vertices), dedupe(rays)

    def _min_coderivative_norm(
        self,
        gens: np.ndarray,
        dx: int,
        x_norm: NormKind,
        faces: np.ndarray,
        ball: np.ndarray,
        rho: float,
    ) -> float:
        """
        inf ‖x*‖ over x* ∈ D*F(x, y)(conv(faces) + rho·conv(ball)), one LP:
        variables lam >= 0 (cone weights), theta (simplex over faces),
        beta >= 0 with sum <= 1 (ball weights) and the norm bound s.
        """
        Nx, Ny = gens[:, :dx], gens[:, dx:]
        m, p, q = gens.shape[0], faces.shape[0], ball.shape[0]
        rows_x = self.space_service.dual_norm_rows(NormKind(x_norm), dx)
        n_var = m + p + q + 1

        A_eq = np.zeros((Ny.shape[1] + 1, n_var))
        A_eq[:-1, :m] = Ny.T
        A_eq[:-1, m : m + p] = faces.T
        A_eq[:-1, m + p : m + p + q] = rho * ball.T
        A_eq[-1, m : m + p] = 1.0
        b_eq = np.zeros(Ny.shape[1] + 1)
        b_eq[-1] = 1.0

        A_ub = np.zeros((rows_x.shape[0] + 1, n_var))
        A_ub[:-1, :m] = rows_x @ Nx.T
        A_ub[:-1, -1] = -1.0
        A_ub[-1, m + p : m + p + q] = 1.0
        b_ub = np.zeros(rows_x.shape[0] + 1)
        b_ub[-1] = 1.0

        c = np.zeros(n_var)
        c[-1] = 1.0
        res = linprog(
            c,
            A_ub=A_ub,
            b_ub=b_ub,
            A_eq=A_eq,
            b_eq=b_eq,
            bounds=[(0, None)] * n_var,
            method="highs",
        )
        if res.status == 2:
            return math.inf
        if res.status != 0:
            raise RuntimeError(f"coderivative LP failed: {res.message}")
        return max(float(res.fun), 0.0)

    def _subdiff_at(
        self,
        F: SetValuedMapping,
        x: np.ndarray,
        y: np.ndarray,
        rho: float,
        vs: np.ndarray,
    ) -> Optional[float]:
        gens = self._normal_generators(F, x, y)
        if gens is None:
            return None
        y_norm = F.range_space.norm_kind
        ball = self.space_service.dual_ball_vertices(y_norm, F.dy)
        best = math.inf
        for v in vs:
            faces = self.space_service.duality_map(v, y_norm)
            best = min(
                best,
                self._min_coderivative_norm(
                    gens, F.dx, F.domain_space.norm_kind, faces, ball, rho
                ),
            )
        return best

    def _check_normed(self, F: SetValuedMapping) -> None:
        if not F.has_normal_cone:
            raise NotEvaluableError(f"{F.name} has no normal-cone oracle")
        if not (F.domain_space.is_normed and F.range_space.is_normed):
            raise NotEvaluableError("subdifferential F-slopes need normed X and Y")

    def v_grid(self, F: SetValuedMapping, w: np.ndarray, rho: float) -> np.ndarray:
        """w together with a ring of radius min(rho, ‖w‖/2)·2^-VGRID_STEPS around it."""
        norm = float(np.linalg.norm(w))
        eps = min(rho, norm / 2) * 0.5**settings.VGRID_STEPS
        dirs = self.space_service.unit_directions(
            F.dy, F.range_space.norm_kind, count=8
        )
        return np.vstack([w[None, :], w[None, :] + eps * dirs])

    def F_subdiff_rho_slope(
        self, F: SetValuedMapping, x, y, rho: float
    ) -> PointEstimate:
        """inf ‖x*‖ over x* ∈ D*F(x, y)(J(y - ȳ) + rho·B*)."""
        self._check_normed(F)
        x = F.domain_space.as_points(x)[0]
        y = F.range_space.as_points(y)[0]
        w = y - F.ybar
        if np.all(w == 0):
            raise ValueError("subdifferential F-slope needs y != ȳ")
        value = self._subdiff_at(F, x, y, rho, w[None, :])
        if value is None:
            return PointEstimate(math.inf, ["no_oracle_data"])
        return PointEstimate(value)

    def F_approx_subdiff_rho_slope(
        self,
        F: SetValuedMapping,
        x,
        y,
        rho: float,
        vgrid: Optional[np.ndarray] = None,
    ) -> PointEstimate:
        """As F_subdiff_rho_slope with J(v) for v on a small grid around y - ȳ."""
        self._check_normed(F)
        x = F.domain_space.as_points(x)[0]
        y = F.range_space.as_points(y)[0]
        w = y - F.ybar
        if np.all(w == 0):
            raise ValueError("subdifferential F-slope needs y != ȳ")
        vs = self.v_grid(F, w, rho) if vgrid is None else np.atleast_2d(vgrid)
        vs = vs[np.any(vs != 0, axis=1)]
        value = self._subdiff_at(F, x, y, rho, vs)
        if value is None:
            return PointEstimate(math.inf, ["no_oracle_data"])
        return PointEstimate(value)

    def _subdiff_band_limit(
        self,
        F: SetValuedMapping,
        schedule: RadiusSchedule,
        approx: bool,
        tol: float,
        with_ratio: bool = False,
    ) -> LimitEstimate:
        self._check_normed(F)
        g = self.induced_function(F)
        cache = {}
        skipped = [0]

        def band(rho: float) -> float:
            idx = self.two_var.band_indices(g, rho, "mapping")
            best = math.inf
            for i in idx:
                x, y = g.sample_x[i], g.sample_y[i]
                key = (int(i), rho)
                if key not in cache:
                    w = y - F.ybar
                    vs = self.v_grid(F, w, rho) if approx else w[None, :]
                    vs = vs[np.any(vs != 0, axis=1)]
                    cache[key] = self._subdiff_at(F, x, y, rho, vs)
                value = cache[key]
                if value is None:
                    skipped[0] += 1
                    continue
                if with_ratio:
                    value = max(
                        value, extreal_div(g.values[i], g.dist_to_xbar[i])
                    )
                best = min(best, value)
            return best

        estimate = self.core.estimate_limit(band, schedule, tol, LimitKind.INF)
        if skipped[0]:
            estimate.flags.append(f"skipped_points={skipped[0]}")
            loggers["mappings"].warning(
                f"{F.name}: {skipped[0]} band points without normal-cone data"
            )
        return estimate

    def F_strict_subdiff_slope(
        self,
        F: SetValuedMapping,
        schedule: RadiusSchedule,
        tol: float = settings.DEFAULT_TOL,
    ) -> LimitEstimate:
        return self._subdiff_band_limit(F, schedule, approx=False, tol=tol)

    def F_approx_strict_subdiff_slope(
        self,
        F: SetValuedMapping,
        schedule: RadiusSchedule,
        tol: float = settings.DEFAULT_TOL,
        with_ratio: bool = False,
    ) -> LimitEstimate:
        """With ``with_ratio`` the band value is max{approx slope, ‖y - ȳ‖/‖x - x̄‖}."""
        return self._subdiff_band_limit(
            F, schedule, approx=True, tol=tol, with_ratio=with_ratio
        )

    # ------------------------------------------------------------------
    # limit-set test

    def gfrerer_limit_test(
        self,
        F: SetValuedMapping,
        schedule: RadiusSchedule,
        unit_samples: int = settings.GFRERER_UNIT_SAMPLES,
        threshold: float = settings.GFRERER_THRESHOLD,
    ) -> GfrererResult:
        """
        Sampled evidence for (0, 0) ∉ Cr₀F(x̄, ȳ).

        For t in the schedule and unit u, graph points (x̄ + t u, ȳ + t v) with
        ‖v‖ <= GFRERER_V_RADIUS are collected and scored by
        max{‖v‖, min ‖x*‖} over x* ∈ D*F(x, y)(y*), ‖y*‖ = 1. Exclusion is
        reported when every level that collected graph points keeps its
        minimum above ``threshold``; levels with no points carry no evidence,
        and a run where no level collected any is ``inconclusive``.
        """
        self._check_normed(F)
        X, Y = F.domain_space, F.range_space
        us = self.space_service.unit_directions(
            F.dx, X.norm_kind, count=max(unit_samples, 2)
        )
        ystars = self.space_service.unit_directions(
            F.dy, Y.norm_kind.dual, count=_GFRERER_DUAL_DIRECTIONS
        )
        flags = ["one_sided_evidence"]
        level_minima: List[Tuple[float, float]] = []
        witnesses: List[GfrererWitness] = []

        for level, t in enumerate(schedule.radii()):
            t = float(t)
            best = math.inf
            for u in us:
                x = F.xbar + t * u
                radius = t * settings.GFRERER_V_RADIUS
                if F.values_near is not None:
                    ys = Y.as_points(F.values_near(x, F.ybar, radius))
                else:
                    ys = Y.as_points(F.sample_values(x))
                    if ys.size:
                        d = Y.distances(ys, F.ybar[None, :])[:, 0]
                        ys = ys[d <= radius]
                for y in ys:
                    gens = self._normal_generators(F, x, y)
                    if gens is None:
                        continue
                    v = (y - F.ybar) / t
                    v_norm = float(Y.norm(v))
                    for ystar in ystars:
                        xs_norm = self._min_coderivative_norm(
                            gens,
                            F.dx,
                            X.norm_kind,
                            ystar[None, :],
                            np.zeros((0, F.dy)),
                            0.0,
                        )
                        score = max(v_norm, xs_norm)
                        best = min(best, score)
                        if score <= 2 * threshold and not math.isinf(xs_norm):
                            witnesses.append(
                                GfrererWitness(
                                    level=level,
                                    t=t,
                                    v=v.tolist(),
                                    xstar=[xs_norm],
                                    score=score,
                                )
                            )
            if math.isinf(best):
                flags.append("sampling_exhausted")
            level_minima.append((t, best))

        witnesses.sort(key=lambda w: (w.level, w.score))
        observed = [score for _, score in level_minima if not math.isinf(score)]
        if not observed:
            flags.append("inconclusive")
        excludes = bool(observed) and all(score > threshold for score in observed)
        loggers["mappings"].info(
            f"{F.name}: limit-set test excludes_origin={excludes} "
            f"minima={[s for _, s in level_minima]}"
        )
        return GfrererResult(
            excludes_origin=excludes,
            threshold=threshold,
            level_minima=level_minima,
            witnesses=witnesses[:_MAX_WITNESSES],
            flags=flags,
        )

    # ------------------------------------------------------------------

    def report(
        self,
        F: SetValuedMapping,
        schedule: RadiusSchedule,
        tol: float = settings.DEFAULT_TOL,
    ) -> SubregularityReport:
        strict_subdiff = approx = gfrerer = None
        if (
            F.has_normal_cone
            and F.domain_space.is_normed
            and F.range_space.is_normed
        ):
            strict_subdiff = self.F_strict_subdiff_slope(F, schedule, tol)
            approx = self.F_approx_strict_subdiff_slope(F, schedule, tol)
            gfrerer = self.gfrerer_limit_test(F, schedule)
        return SubregularityReport(
            mapping=F.describe(),
            sr=self.subregularity_constant(F, schedule, tol),
            calmness_of_inverse=self.calmness_modulus(self.inverse(F), schedule, tol),
            uniform_strict=self.F_uniform_strict_slope(F, schedule, tol=tol),
            strict_slope=self.F_strict_slope(F, schedule, tol=tol),
            strict_subdiff=strict_subdiff,
            approx_strict_subdiff=approx,
            gfrerer=gfrerer,
            schedule=schedule.to_dict(),
        )
