"""
Tests for models, value objects and exact group arithmetic.
"""
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from domain.entities import HeintzeModel, SolTypeModel
from domain.exceptions import (
    DimensionMismatchError,
    InvalidModelError,
    MetricNotPositiveDefiniteError,
)
from domain.group_arithmetic import (
    christoffel_symbols,
    coset_point,
    geodesic_acceleration,
    group_inverse,
    group_multiply,
    metric_tensor_at,
    normalize_metric,
    one_param_subgroup,
    perpendicular_section,
    same_coset,
    section_limit,
    section_speed_squared,
)
from domain.value_objects import FrameMetric, GroupPoint

H2 = HeintzeModel((1.0,))
SOL = SolTypeModel.sol()
WIDE = SolTypeModel.from_eigenvalues([1.0, 2.0], [1.0], 0.5)

coordinate = st.floats(-10.0, 10.0, allow_nan=False, allow_subnormal=False)
height = st.floats(-2.0, 2.0, allow_nan=False, allow_subnormal=False)
wide_points = st.builds(
    lambda x, y, t: GroupPoint(x, y, t),
    st.lists(coordinate, min_size=2, max_size=2),
    st.lists(coordinate, min_size=1, max_size=1),
    height,
)


class TestModels:

    def test_heintze_requires_unit_minimum(self):
        with pytest.raises(InvalidModelError):
            HeintzeModel((2.0, 3.0))

    def test_heintze_rejects_non_positive(self):
        with pytest.raises(InvalidModelError):
            HeintzeModel((1.0, -1.0))

    def test_complex_spectrum_rejected(self):
        with pytest.raises(InvalidModelError):
            HeintzeModel.from_values([1.0, 1.0 + 1.0j])

    def test_contracting_factor_renormalized(self):
        model = SolTypeModel.from_eigenvalues([1.0], [2.0], 1.0)
        assert model.down.eigenvalues == (1.0,)
        assert model.lam == 2.0
        np.testing.assert_allclose(model.derivation_diagonal(), [1.0, -2.0])
        assert not model.unimodular()

    def test_sol_is_unimodular(self):
        assert SOL.unimodular()
        assert SOL.dim == 3
        np.testing.assert_allclose(SOL.frame_exponents(), [-1.0, 1.0, 0.0])

    def test_lambda_must_be_positive(self):
        with pytest.raises(InvalidModelError):
            SolTypeModel(H2, H2, 0.0)


class TestValueObjects:

    def test_metric_must_be_positive_definite(self):
        with pytest.raises(MetricNotPositiveDefiniteError):
            FrameMetric([[1.0, 2.0], [2.0, 1.0]])

    def test_metric_must_be_symmetric(self):
        with pytest.raises(MetricNotPositiveDefiniteError):
            FrameMetric([[1.0, 0.5], [0.0, 1.0]])

    def test_metric_dimension_checked(self):
        with pytest.raises(DimensionMismatchError):
            FrameMetric.identity(2).check(SOL)

    def test_point_dimension_checked(self):
        with pytest.raises(DimensionMismatchError):
            GroupPoint.from_coordinates(SOL, [0.0, 0.0])

    def test_point_round_trip_coordinates(self):
        point = GroupPoint.from_coordinates(WIDE, [1.0, 2.0, 3.0, 4.0])
        assert point.n1 == (1.0, 2.0)
        assert point.n2 == (3.0,)
        assert point.height == 4.0


class TestGroupLaw:

    def test_identity_is_neutral(self):
        p = GroupPoint((1.5,), (-2.0,), 0.7)
        e = GroupPoint.identity(SOL)
        assert group_multiply(SOL, p, e) == p
        assert group_multiply(SOL, e, p) == p

    def test_translation_by_height(self):
        p = GroupPoint((0.0,), (0.0,), 1.0)
        q = GroupPoint((1.0,), (1.0,), 0.0)
        r = group_multiply(SOL, p, q)
        assert r.n1[0] == pytest.approx(math.e)
        assert r.n2[0] == pytest.approx(1.0 / math.e)
        assert r.height == pytest.approx(1.0)

    @given(wide_points, wide_points, wide_points)
    @settings(max_examples=200, deadline=None)
    def test_associativity(self, p, q, r):
        left = group_multiply(WIDE, group_multiply(WIDE, p, q), r)
        right = group_multiply(WIDE, p, group_multiply(WIDE, q, r))
        np.testing.assert_allclose(left.coordinates(), right.coordinates(), rtol=1e-9, atol=1e-9)

    @given(wide_points)
    @settings(max_examples=200, deadline=None)
    def test_inverse(self, p):
        product = group_multiply(WIDE, p, group_inverse(WIDE, p))
        np.testing.assert_allclose(product.coordinates(), 0.0, atol=1e-9)


class TestMetricTensor:

    def test_frame_scaling(self):
        g = metric_tensor_at(SOL, FrameMetric.identity(3), GroupPoint((0.0,), (0.0,), 1.0))
        np.testing.assert_allclose(np.diag(g), [math.exp(-2.0), math.exp(2.0), 1.0])

    def test_perpendicular_section(self):
        metric = FrameMetric([[2.0, 0.3], [0.3, 1.0]])
        np.testing.assert_allclose(perpendicular_section(H2, metric), [-0.15, 1.0])
        assert section_speed_squared(H2, metric) == pytest.approx(0.955)

    def test_normalized_section_has_unit_speed(self):
        metric = normalize_metric(H2, FrameMetric([[2.0, 0.3], [0.3, 1.0]]))
        assert section_speed_squared(H2, metric) == pytest.approx(1.0)

    def test_normalize_scales_identity_only_by_tt(self):
        metric = normalize_metric(SOL, FrameMetric.diagonal([2.0, 3.0, 4.0]))
        np.testing.assert_allclose(np.diag(metric.matrix), [0.5, 0.75, 1.0])

    @given(wide_points, st.lists(coordinate, min_size=3, max_size=3))
    @settings(max_examples=100, deadline=None)
    def test_depends_only_on_height(self, p, shift):
        metric = FrameMetric([[1.0, 0.2, 0.0, 0.1], [0.2, 2.0, 0.0, 0.0], [0.0, 0.0, 1.0, 0.3], [0.1, 0.0, 0.3, 1.5]])
        q = GroupPoint(np.asarray(p.n1) + shift[:2], np.asarray(p.n2) + shift[2:], p.height)
        np.testing.assert_array_equal(metric_tensor_at(WIDE, metric, p), metric_tensor_at(WIDE, metric, q))

    @pytest.mark.parametrize("matrix", [
        [[2.0, 0.3], [0.3, 1.0]],
        [[1.0, -1.0], [-1.0, 2.0]],
        [[4.0, 0.0], [0.0, 9.0]],
    ])
    def test_normalize_is_idempotent(self, matrix):
        once = normalize_metric(H2, FrameMetric(matrix))
        twice = normalize_metric(H2, once)
        np.testing.assert_allclose(twice.matrix, once.matrix, rtol=1e-12)

    def test_normalize_is_idempotent_on_sol_type(self):
        metric = FrameMetric([[1.0, 0.0, 0.2], [0.0, 2.0, -0.4], [0.2, -0.4, 3.0]])
        once = normalize_metric(SOL, metric)
        np.testing.assert_allclose(normalize_metric(SOL, once).matrix, once.matrix, rtol=1e-12)


class TestSubgroups:

    def test_vertical_subgroup(self):
        point = one_param_subgroup(SOL, [0.0, 0.0, 1.0], 2.5)
        assert point.to_list() == pytest.approx([0.0, 0.0, 2.5])

    def test_tilted_subgroup(self):
        point = one_param_subgroup(H2, [1.0, 1.0], 1.0)
        assert point.to_list() == pytest.approx([math.e - 1.0, 1.0])
        assert section_limit(H2, [1.0, 1.0]) == pytest.approx([-1.0])

    def test_nilradical_generator_rejected(self):
        with pytest.raises(InvalidModelError):
            one_param_subgroup(H2, [1.0, 0.0], 1.0)

    def test_same_coset(self):
        v = [0.4, 1.0]
        base = GroupPoint((2.0,), (), 0.5)
        assert same_coset(H2, base, coset_point(H2, base, v, 1.3), v)
        assert not same_coset(H2, base, GroupPoint((3.0,), (), 1.8), v)

    def test_subgroup_is_homomorphic(self):
        v = [0.3, -0.2, 1.0]
        a = one_param_subgroup(SOL, v, 0.7)
        b = one_param_subgroup(SOL, v, 1.1)
        c = one_param_subgroup(SOL, v, 1.8)
        np.testing.assert_allclose(group_multiply(SOL, a, b).coordinates(), c.coordinates(), atol=1e-12)


class TestChristoffel:

    def test_hyperbolic_plane_symbols(self):
        gamma = christoffel_symbols(H2, FrameMetric.identity(2), 1.0)
        assert gamma[1, 0, 0] == pytest.approx(math.exp(-2.0))
        assert gamma[0, 0, 1] == pytest.approx(-1.0)
        assert gamma[0, 1, 0] == pytest.approx(-1.0)
        assert gamma[1, 1, 1] == pytest.approx(0.0)

    def test_vertical_geodesics_do_not_accelerate(self):
        acceleration = geodesic_acceleration(SOL, FrameMetric.identity(3), 0.3, np.array([0.0, 0.0, 1.0]))
        np.testing.assert_allclose(acceleration, 0.0, atol=1e-14)

    def test_symbols_symmetric_in_lower_indices(self):
        metric = FrameMetric([[1.0, 0.0, 0.2], [0.0, 1.0, 0.1], [0.2, 0.1, 1.0]])
        gamma = christoffel_symbols(SOL, metric, -0.4)
        np.testing.assert_allclose(gamma, np.transpose(gamma, (0, 2, 1)), atol=1e-14)
