import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from src.app.models.domain.space_models import (
    Combiner,
    EuclideanSpace,
    FiniteMetricSpace,
    NormKind,
    ProductSpace,
    combine_distances,
    validate_metric_matrix,
)
from src.app.services.space_service import SpaceService

space_service = SpaceService()

coords_1d = st.lists(
    st.floats(min_value=-5, max_value=5, allow_nan=False),
    min_size=2,
    max_size=8,
    unique=True,
)
vectors = arrays(
    float, st.integers(1, 3), elements=st.floats(-10, 10, allow_nan=False)
)


def test_finite_space_rejects_non_metrics():
    with pytest.raises(ValueError):
        FiniteMetricSpace(dist=np.array([[0.0, 1.0], [2.0, 0.0]]))
    with pytest.raises(ValueError):
        FiniteMetricSpace(
            dist=np.array([[0.0, 1.0, 5.0], [1.0, 0.0, 1.0], [5.0, 1.0, 0.0]])
        )
    with pytest.raises(ValueError):
        FiniteMetricSpace(dist=np.array([[0.0, 0.0], [0.0, 0.0]]))


@settings(max_examples=50, deadline=None)
@given(
    coords_1d,
    coords_1d,
    st.floats(min_value=0.01, max_value=10),
    st.sampled_from(list(Combiner)),
)
def test_product_rho_metric_satisfies_axioms(xs, ys, rho, combiner):
    if min(np.diff(sorted(xs))) < 1e-6 or min(np.diff(sorted(ys))) < 1e-6:
        return
    line = EuclideanSpace(1)
    X = space_service.finite_space_from_points(line, xs)
    Y = space_service.finite_space_from_points(line, ys)
    product = ProductSpace(X, Y, rho, combiner)
    I, J = np.meshgrid(np.arange(X.size), np.arange(Y.size), indexing="ij")
    P = product.join(X.points()[I.ravel()], Y.points()[J.ravel()])
    validate_metric_matrix(product.distances(P, P), 1e-9)


def test_rho_combiners_are_equivalent():
    dx, dy = np.array([1.0, 0.0, 2.0]), np.array([0.0, 3.0, 1.0])
    d_max = combine_distances(dx, dy, 0.5, Combiner.MAX)
    d_sum = combine_distances(dx, dy, 0.5, Combiner.SUM)
    assert list(d_max) == [1.0, 1.5, 2.0]
    assert list(d_sum) == [1.0, 1.5, 2.5]
    assert np.all(d_max <= d_sum) and np.all(d_sum <= 2 * d_max)


@pytest.mark.parametrize("kind", list(NormKind))
@pytest.mark.parametrize("dim", [1, 2, 3])
def test_norm_axioms(kind, dim):
    rng = np.random.default_rng(0)
    assert space_service.validate_norm_axioms(EuclideanSpace(dim, kind), rng)


@pytest.mark.parametrize("kind", list(NormKind))
@settings(max_examples=100, deadline=None)
@given(y=vectors, z=vectors)
def test_duality_map_vertices_support_the_norm(kind, y, z):
    if z.size != y.size:
        return
    space = EuclideanSpace(y.size, kind)
    norm_y = float(space.norm(y[None, :])[0])
    if norm_y < 1e-6:
        return
    norm_z = float(space.norm(z[None, :])[0])
    for j in space_service.duality_map(y, kind):
        assert space_service.dual_norm(j, kind) == pytest.approx(1.0)
        assert float(j @ y) == pytest.approx(norm_y, rel=1e-9, abs=1e-9)
        assert float(j @ z) <= norm_z + 1e-9


def test_duality_map_faces():
    l1 = space_service.duality_map(np.array([1.0, 0.0]), NormKind.L1)
    assert sorted(map(tuple, l1)) == [(1.0, -1.0), (1.0, 1.0)]
    linf = space_service.duality_map(np.array([2.0, -2.0]), NormKind.LINF)
    assert sorted(map(tuple, linf)) == [(0.0, -1.0), (1.0, 0.0)]
    with pytest.raises(ValueError):
        space_service.duality_map(np.zeros(2), NormKind.L2)


def test_dual_norms_pair_l1_with_linf():
    v = np.array([3.0, -4.0])
    assert space_service.dual_norm(v, NormKind.L1) == 4.0
    assert space_service.dual_norm(v, NormKind.LINF) == 7.0
    assert space_service.dual_norm(v, NormKind.L2) == 5.0
    assert space_service.dual_rho_norm(v, np.array([1.0]), 0.5) == 7.0
