"""
Tests for closed-form distances, critical heights and coarse distances.
"""
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from domain.coarse_calculus import (
    coarse_path,
    coset_hausdorff_profile,
    critical_height_down,
    critical_height_up,
    critical_heights,
    factor_distance_down,
    factor_distance_up,
    heintze_plane_distance,
    horocyclic_distance,
    hyperbolic_distance,
    rho,
    rho_tilde,
    rho_tilde_1,
    rho_tilde_2,
    section_length,
    shadow_coset,
)
from domain.entities import HeintzeModel, SolTypeModel
from domain.exceptions import DegeneratePairError, InvalidModelError
from domain.value_objects import FrameMetric, GroupPoint

H2 = HeintzeModel((1.0,))
SOL = SolTypeModel.sol()
ORIGIN = GroupPoint((0.0,), (0.0,), 0.0)

coordinate = st.floats(-50.0, 50.0, allow_nan=False, allow_subnormal=False)
height = st.floats(-5.0, 5.0, allow_nan=False, allow_subnormal=False)
sol_points = st.builds(lambda x, y, t: GroupPoint((x,), (y,), t), coordinate, coordinate, height)
plane_points = st.builds(
    lambda x, t: GroupPoint((x,), (), t),
    st.floats(-1000.0, 1000.0, allow_nan=False, allow_subnormal=False),
    height,
)


class TestHyperbolicDistance:

    def test_horizontal_pair(self):
        assert hyperbolic_distance(1.0, (0.0, 0.0), (1.0, 0.0)) == pytest.approx(math.acosh(1.5), abs=1e-12)

    def test_vertical_pair(self):
        assert hyperbolic_distance(1.0, (0.0, 0.0), (0.0, 3.0)) == pytest.approx(3.0, abs=1e-12)

    def test_rate_rescales(self):
        assert hyperbolic_distance(2.0, (0.0, 0.0), (1.0, 0.0)) == pytest.approx(0.5 * math.acosh(3.0), abs=1e-12)

    def test_rate_must_be_positive(self):
        with pytest.raises(InvalidModelError):
            hyperbolic_distance(0.0, (0.0, 0.0), (1.0, 0.0))

    def test_far_heights_stay_finite(self):
        assert hyperbolic_distance(1.0, (0.0, -800.0), (0.0, 800.0)) == pytest.approx(1600.0, rel=1e-12)
        assert hyperbolic_distance(1.0, (0.0, -400.0), (1.0, -400.0)) == pytest.approx(800.0, rel=1e-12)
        assert hyperbolic_distance(1.0, (0.0, 900.0), (1.0, 900.0)) == pytest.approx(0.0, abs=1e-12)

    def test_triangle_inequality(self):
        rng = np.random.default_rng(7)
        xs = rng.uniform(-50.0, 50.0, size=(10_000, 3))
        ts = rng.uniform(-5.0, 5.0, size=(10_000, 3))
        for (x, y, z), (t, s, u) in zip(xs, ts):
            a, b, c = (x, t), (y, s), (z, u)
            direct = hyperbolic_distance(1.0, a, c)
            assert direct <= hyperbolic_distance(1.0, a, b) + hyperbolic_distance(1.0, b, c) + 1e-9

    def test_identity_block_matches_hyperbolic(self):
        block = np.eye(2)
        assert heintze_plane_distance(1.0, block, (0.3, -1.0), (2.0, 0.5)) == pytest.approx(
            hyperbolic_distance(1.0, (0.3, -1.0), (2.0, 0.5)), abs=1e-12
        )

    def test_scaled_block_scales_distance(self):
        base = heintze_plane_distance(1.0, np.eye(2), (0.0, 0.0), (1.0, 0.5))
        assert heintze_plane_distance(1.0, 4.0 * np.eye(2), (0.0, 0.0), (1.0, 0.5)) == pytest.approx(2.0 * base)

    def test_stretched_horizontal_axis(self):
        block = np.diag([4.0, 1.0])
        assert heintze_plane_distance(1.0, block, (0.0, 0.0), (1.0, 0.0)) == pytest.approx(math.acosh(3.0))

    def test_tilted_section_is_vertical_line(self):
        # Q = [[1, -1], [-1, 2]] has section (1, 1), whose orbit (e^τ − 1, τ) has unit speed
        block = np.array([[1.0, -1.0], [-1.0, 2.0]])
        end = (math.expm1(2.5), 2.5)
        assert heintze_plane_distance(1.0, block, (0.0, 0.0), end) == pytest.approx(2.5, abs=1e-12)


class TestCriticalHeights:

    def test_horocyclic_distance(self):
        assert horocyclic_distance(np.array([-1.0]), [math.e], 1.0) == pytest.approx(1.0)
        assert horocyclic_distance(np.array([-1.0, 1.0]), [0.0, 0.0], 3.0) == 0.0

    def test_sol_example(self):
        up = critical_height_up(SOL.up, [0.0], [math.exp(3.0)])
        down = critical_height_down(SOL.down, SOL.lam, [0.0], [math.exp(2.0)])
        assert up == pytest.approx(3.0, abs=1e-10)
        assert down == pytest.approx(-2.0, abs=1e-10)

    def test_degenerate_pair(self):
        with pytest.raises(DegeneratePairError):
            critical_height_up(SOL.up, [1.0], [1.0])

    def test_degenerate_sentinels(self):
        p = GroupPoint((1.0,), (2.0,), 0.0)
        assert critical_heights(SOL, p, p) == (-math.inf, math.inf)

    def test_axis_with_zero_displacement_is_ignored(self):
        model = HeintzeModel((1.0, 2.0))
        assert critical_height_up(model, [0.0, 0.0], [math.e, 0.0]) == pytest.approx(1.0, abs=1e-10)

    def test_two_rates(self):
        model = HeintzeModel((1.0, 2.0))
        expected = -0.5 * math.log((math.sqrt(5.0) - 1.0) / 2.0)
        assert critical_height_up(model, [0.0, 0.0], [1.0, 1.0]) == pytest.approx(expected, abs=1e-10)

    @given(st.floats(1e-3, 1e6), st.floats(1e-3, 1e6), st.floats(1.0, 3.0))
    @settings(max_examples=100, deadline=None)
    def test_residual_vanishes(self, dx, dy, rate):
        model = HeintzeModel((1.0, rate))
        t = critical_height_up(model, [0.0, 0.0], [dx, dy])
        assert horocyclic_distance(-model.rates, [dx, dy], t) == pytest.approx(1.0, abs=1e-9)


class TestRhoTilde:

    def test_vertical_pair_and_small_displacement(self):
        assert rho_tilde(SOL, ORIGIN, GroupPoint((1.0,), (1.0,), 4.0)) == pytest.approx(6.0, abs=1e-9)

    def test_both_overshoots(self):
        q = GroupPoint((math.exp(3.0),), (math.exp(2.0),), 0.0)
        assert rho_tilde(SOL, ORIGIN, q) == pytest.approx(12.0, abs=1e-9)

    def test_equal_points(self):
        assert rho_tilde(SOL, ORIGIN, ORIGIN) == 2.0

    def test_hyperbolic_plane_cases(self):
        assert rho_tilde(H2, GroupPoint((0.0,)), GroupPoint((1.0,))) == pytest.approx(1.0, abs=1e-9)
        assert rho_tilde(H2, GroupPoint((0.0,)), GroupPoint((math.exp(5.0),))) == pytest.approx(11.0, abs=1e-9)

    @given(sol_points, sol_points)
    @settings(max_examples=200, deadline=None)
    def test_factor_decomposition(self, p, q):
        combined = (
            rho_tilde_1(SOL.up, (p.n1, p.height), (q.n1, q.height))
            + rho_tilde_2(SOL.down, SOL.lam, (p.n2, p.height), (q.n2, q.height))
            - abs(p.height - q.height)
        )
        assert rho_tilde(SOL, p, q) == pytest.approx(combined, abs=1e-9)

    @given(sol_points, sol_points)
    @settings(max_examples=200, deadline=None)
    def test_symmetric(self, p, q):
        assert rho_tilde(SOL, p, q) == pytest.approx(rho_tilde(SOL, q, p), abs=1e-9)

    @given(plane_points, plane_points)
    @settings(max_examples=300, deadline=None)
    def test_hyperbolic_distance_within_two(self, p, q):
        d = hyperbolic_distance(1.0, (p.n1[0], p.height), (q.n1[0], q.height))
        assert abs(d - rho_tilde(H2, p, q)) <= 2.0


class TestRho:

    def test_equal_points(self):
        assert rho(SOL, ORIGIN, ORIGIN) == 0.0

    def test_within_four_of_rho_tilde(self):
        rng = np.random.default_rng(11)
        coords = rng.uniform(-50.0, 50.0, size=(10_000, 4))
        heights = rng.uniform(-5.0, 5.0, size=(10_000, 2))
        worst = 0.0
        for (x1, y1, x2, y2), (t, s) in zip(coords, heights):
            p, q = GroupPoint((x1,), (y1,), t), GroupPoint((x2,), (y2,), s)
            worst = max(worst, abs(rho(SOL, p, q) - rho_tilde(SOL, p, q)))
        assert worst <= 4.0

    def test_vertical_pair(self):
        assert rho(SOL, ORIGIN, GroupPoint((0.0,), (0.0,), 3.0)) == pytest.approx(3.0, abs=1e-12)

    def test_contracting_factor_is_flipped(self):
        q = GroupPoint((0.0,), (4.0,), 0.0)
        metric = FrameMetric.identity(3)
        assert factor_distance_up(SOL, metric, ORIGIN, q) == 0.0
        assert factor_distance_down(SOL, metric, ORIGIN, q) == pytest.approx(2.0 * math.asinh(2.0))

    def test_flip_negates_off_diagonal(self):
        metric = FrameMetric([[1.0, 0.0, 0.0], [0.0, 1.0, 0.4], [0.0, 0.4, 1.0]])
        q = GroupPoint((0.0,), (1.5,), -0.7)
        expected = heintze_plane_distance(1.0, np.array([[1.0, -0.4], [-0.4, 1.0]]), (0.0, 0.0), (1.5, 0.7))
        assert factor_distance_down(SOL, metric, ORIGIN, q) == pytest.approx(expected, abs=1e-12)

    def test_custom_factor_distances(self):
        value = rho(SOL, ORIGIN, GroupPoint((0.0,), (0.0,), 2.0),
                    up_distance=lambda p, q: 5.0, down_distance=lambda p, q: 4.0)
        assert value == 7.0

    def test_requires_soltype(self):
        with pytest.raises(InvalidModelError):
            rho(H2, GroupPoint((0.0,)), GroupPoint((1.0,)))


class TestCoarsePath:

    def test_worked_example(self):
        q = GroupPoint((math.exp(3.0),), (math.exp(2.0),), 0.0)
        path = coarse_path(SOL, ORIGIN, q)
        assert path.heights() == pytest.approx([0.0, -2.0, -2.0, 3.0, 3.0, 0.0], abs=1e-9)
        assert list(path.segment_lengths) == pytest.approx([2.0, 1.0, 5.0, 1.0, 3.0], abs=1e-9)
        assert path.length == pytest.approx(12.0, abs=1e-9)

    def test_reversed_pair_reverses_path(self):
        p = GroupPoint((0.0,), (0.0,), 2.0)
        q = GroupPoint((5.0,), (3.0,), 0.0)
        path = coarse_path(SOL, p, q)
        assert path.waypoints[0] == p
        assert path.waypoints[-1] == q
        assert path.length == pytest.approx(coarse_path(SOL, q, p).length)

    def test_tilted_metric_rejected(self):
        metric = FrameMetric([[1.0, 0.0, 0.2], [0.0, 1.0, 0.0], [0.2, 0.0, 1.0]])
        with pytest.raises(InvalidModelError):
            coarse_path(SOL, ORIGIN, GroupPoint((1.0,), (1.0,), 1.0), metric)

    @given(sol_points, sol_points)
    @settings(max_examples=200, deadline=None)
    def test_length_within_two_of_rho_tilde(self, p, q):
        assert abs(coarse_path(SOL, p, q).length - rho_tilde(SOL, p, q)) <= 2.0 + 1e-9

    def test_diagonal_metric_on_wide_model(self):
        model = SolTypeModel.from_eigenvalues([1.0, 1.5], [1.0], 2.0)
        metric = FrameMetric.diagonal([1.0, 2.0, 0.5, 1.0])
        p = GroupPoint((0.0, 0.0), (0.0,), 0.0)
        q = GroupPoint((30.0, -4.0), (0.2,), 1.0)
        assert abs(coarse_path(model, p, q, metric).length - rho_tilde(model, p, q, metric)) <= 2.0 + 1e-9


class TestCosets:

    def test_shadow_of_tilted_section(self):
        metric_2 = FrameMetric([[1.0, -1.0], [-1.0, 2.0]])
        q = shadow_coset(H2, FrameMetric.identity(2), metric_2, GroupPoint((0.0,)))
        assert q.to_list() == pytest.approx([1.0, 0.0])

    def test_shadow_keeps_constant_gap(self):
        metric_1, metric_2 = FrameMetric.identity(2), FrameMetric([[1.0, -1.0], [-1.0, 2.0]])

        def distance(p, q):
            return hyperbolic_distance(1.0, (p.n1[0], p.height), (q.n1[0], q.height))

        profile = coset_hausdorff_profile(H2, GroupPoint((0.0,)), metric_1, metric_2, np.linspace(-10, 10, 21), distance)
        np.testing.assert_allclose(profile, math.acosh(1.5), atol=1e-9)

    def test_section_length(self):
        assert section_length(H2, FrameMetric([[2.0, 0.3], [0.3, 1.0]]), -2.0) == pytest.approx(2.0 * math.sqrt(0.955))
