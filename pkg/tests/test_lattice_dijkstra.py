"""
Tests for lattice shortest paths on continuous models.
"""
import math

import numpy as np
import pytest

from domain.coarse_calculus import coarse_path
from domain.entities import HeintzeModel, SolTypeModel
from domain.exceptions import GridDisconnectedError, InvalidModelError, PointOutsideGridError
from domain.value_objects import FrameMetric, GroupPoint
from infrastructure.lattice_dijkstra import (
    Box,
    Complement,
    HeightAbove,
    HeightBelow,
    WholeSpace,
    build_stencil,
    constrained_lattice_distance,
    grid_for_pair,
    half_stencil,
    height_overshoot,
    lattice_distance,
    node_index,
    path_height_extremes,
    path_length,
)

H2 = HeintzeModel((1.0,))
SOL = SolTypeModel.sol()
PLANE = FrameMetric.identity(2)


@pytest.fixture
def plane_pair():
    return GroupPoint((0.0,), (), 0.0), GroupPoint((1.0,), (), 0.0)


class TestStencil:

    def test_plane_stencil(self):
        stencil = build_stencil(2)
        assert len(stencil) == 16
        assert (2, 1) in stencil and (-1, -2) in stencil
        assert len(half_stencil(stencil)) == 8

    def test_space_stencil(self):
        stencil = build_stencil(3)
        assert len(stencil) == 50
        assert len(half_stencil(stencil)) == 25
        assert all(tuple(-c for c in o) in stencil for o in stencil)


class TestGrid:

    def test_endpoints_are_nodes(self, plane_pair):
        p, q = plane_pair
        grid = grid_for_pair(H2, PLANE, p, q, 0.05)
        assert node_index(grid, p) != node_index(grid, q)
        lo, hi = grid.box()[-1]
        assert lo <= -2.0 + 1e-9 and hi >= 2.0 - 1e-9

    def test_non_node_rejected(self, plane_pair):
        p, q = plane_pair
        grid = grid_for_pair(H2, PLANE, p, q, 0.05)
        with pytest.raises(PointOutsideGridError):
            node_index(grid, GroupPoint((0.0123,), (), 0.0))

    def test_point_outside_box_rejected(self, plane_pair):
        p, q = plane_pair
        grid = grid_for_pair(H2, PLANE, p, q, 0.05)
        with pytest.raises(PointOutsideGridError):
            node_index(grid, GroupPoint((0.0,), (), 50.0))

    def test_step_must_be_positive(self, plane_pair):
        with pytest.raises(InvalidModelError):
            grid_for_pair(H2, PLANE, *plane_pair, 0.0)

    def test_halved_grid_keeps_box(self, plane_pair):
        grid = grid_for_pair(H2, PLANE, *plane_pair, 0.1)
        finer = grid.halved()
        np.testing.assert_allclose(finer.box(), grid.box())
        assert finer.h == pytest.approx(0.05)
        assert node_index(finer, plane_pair[1]) is not None


class TestLatticeDistance:

    def test_equal_points(self):
        p = GroupPoint((0.3,), (-0.2,), 0.1)
        estimate = lattice_distance(SOL, FrameMetric.identity(3), p, p, h=0.1)
        assert estimate.value == 0.0
        assert len(estimate.path) == 1

    def test_hyperbolic_plane_against_closed_form(self, plane_pair):
        estimate = lattice_distance(H2, PLANE, *plane_pair, h=0.02)
        exact = math.acosh(1.5)
        assert abs(estimate.value - exact) / exact <= 0.03
        assert estimate.value >= exact * (1.0 - 1e-3)
        assert estimate.upper_bound

    def test_vertical_pair_in_sol(self):
        q = GroupPoint((0.0,), (0.0,), 3.0)
        estimate = lattice_distance(SOL, FrameMetric.identity(3), GroupPoint((0.0,), (0.0,), 0.0), q, h=0.1)
        assert estimate.value == pytest.approx(3.0, abs=1e-9)

    def test_scaled_metric_doubles_distance(self, plane_pair):
        base = lattice_distance(H2, PLANE, *plane_pair, h=0.05).value
        scaled = lattice_distance(H2, PLANE.scaled(4.0), *plane_pair, h=0.05).value
        assert scaled == pytest.approx(2.0 * base, rel=1e-9)

    def test_symmetric(self):
        p, q = GroupPoint((0.0,), (), 0.0), GroupPoint((1.5,), (), 0.5)
        forward = lattice_distance(H2, PLANE, p, q, h=0.05).value
        backward = lattice_distance(H2, PLANE, q, p, h=0.05).value
        assert forward == pytest.approx(backward, abs=1e-9)

    def test_path_ends_at_endpoints(self, plane_pair):
        p, q = plane_pair
        estimate = lattice_distance(H2, PLANE, p, q, h=0.05)
        np.testing.assert_allclose(estimate.path[0], p.coordinates(), atol=1e-12)
        np.testing.assert_allclose(estimate.path[-1], q.coordinates(), atol=1e-9)
        assert path_length(H2, PLANE, estimate.path) == pytest.approx(estimate.value, rel=1e-9)


class TestNearlyLevelPairs:

    def test_tiny_height_difference_keeps_grid_small(self):
        p, q = GroupPoint((0.0,), (), 0.0), GroupPoint((1.0,), (), 1e-6)
        grid = grid_for_pair(H2, PLANE, p, q, 0.05)
        assert grid.node_count < 100_000
        assert 0.025 <= grid.steps[-1] <= 0.05

    def test_steps_stay_within_half_and_full_target(self):
        p, q = GroupPoint((0.0,), (), 0.0), GroupPoint((0.0,), (), 0.07)
        grid = grid_for_pair(H2, PLANE, p, q, 0.05)
        assert grid.steps[-1] == pytest.approx(0.035)
        assert node_index(grid, q) is not None

    def test_sol_pair_at_nearly_equal_heights(self):
        p = GroupPoint((0.0,), (0.0,), 0.0)
        level = grid_for_pair(SOL, FrameMetric.identity(3), p, GroupPoint((2.0,), (-1.5,), 0.0), 0.1)
        tilted = grid_for_pair(SOL, FrameMetric.identity(3), p, GroupPoint((2.0,), (-1.5,), 0.009), 0.1)
        assert tilted.steps[-1] == pytest.approx(0.1)
        assert tilted.node_count <= 1.5 * level.node_count

    def test_off_lattice_endpoint_is_attached(self):
        p, q = GroupPoint((0.0,), (), 0.0), GroupPoint((1.0,), (), 1e-6)
        grid = grid_for_pair(H2, PLANE, p, q, 0.02)
        with pytest.raises(PointOutsideGridError):
            node_index(grid, q)
        estimate = lattice_distance(H2, PLANE, p, q, grid=grid)
        exact = math.acosh(1.5)
        assert abs(estimate.value - exact) / exact <= 0.03
        np.testing.assert_allclose(estimate.path[-1], q.coordinates(), atol=0.0)
        assert path_length(H2, PLANE, estimate.path) == pytest.approx(estimate.value, rel=1e-9)
        assert estimate.node_count == grid.node_count + 1

    def test_off_lattice_endpoint_in_region(self):
        p, q = GroupPoint((0.0,), (), 0.0), GroupPoint((1.0,), (), -1e-6)
        grid = grid_for_pair(H2, PLANE, p, q, 0.05)
        free = lattice_distance(H2, PLANE, p, q, grid=grid).value
        below = constrained_lattice_distance(H2, PLANE, p, q, grid, HeightBelow(5.0)).value
        assert below == pytest.approx(free)
        with pytest.raises(GridDisconnectedError):
            constrained_lattice_distance(H2, PLANE, p, q, grid, HeightAbove(0.0))


class TestConstrained:

    def test_whole_space_matches_unconstrained(self, plane_pair):
        p, q = plane_pair
        grid = grid_for_pair(H2, PLANE, p, q, 0.05)
        free = lattice_distance(H2, PLANE, p, q, grid=grid).value
        assert constrained_lattice_distance(H2, PLANE, p, q, grid, WholeSpace()).value == pytest.approx(free)

    def test_horoball_forces_horocycle(self):
        radius = 2.0 * math.sinh(2.0)
        p, q = GroupPoint((0.0,), (), 0.0), GroupPoint((radius,), (), 0.0)
        grid = grid_for_pair(H2, PLANE, p, q, 0.05)
        estimate = constrained_lattice_distance(H2, PLANE, p, q, grid, HeightBelow(0.0))
        assert abs(estimate.value - radius) / radius <= 0.03
        assert estimate.value > math.exp(1.0)
        assert path_height_extremes(estimate.path)[1] <= 1e-9

    def test_endpoint_outside_region(self, plane_pair):
        p, q = plane_pair
        grid = grid_for_pair(H2, PLANE, p, q, 0.05)
        with pytest.raises(GridDisconnectedError):
            constrained_lattice_distance(H2, PLANE, p, q, grid, HeightAbove(0.5))

    def test_wall_disconnects(self, plane_pair):
        p, q = plane_pair
        grid = grid_for_pair(H2, PLANE, p, q, 0.02)
        wall = Complement(Box([0.3, -100.0], [0.7, 100.0]))
        with pytest.raises(GridDisconnectedError):
            constrained_lattice_distance(H2, PLANE, p, q, grid, wall)

    def test_region_contains(self):
        point = GroupPoint((0.0,), (), -1.0)
        assert HeightBelow(0.0).contains(point)
        assert not HeightAbove(0.0).contains(point)
        assert Complement(HeightAbove(0.0)).contains(point)


class TestPathMeasures:

    def test_height_extremes_of_polyline(self):
        assert path_height_extremes(np.array([[0.0, 0.0], [0.0, 3.0]])) == (0.0, 3.0)
        assert path_height_extremes(np.array([[1.0, 2.0, -0.5]])) == (-0.5, -0.5)

    def test_height_extremes_of_coarse_path(self):
        q = GroupPoint((math.exp(3.0),), (math.exp(2.0),), 0.0)
        path = coarse_path(SOL, GroupPoint((0.0,), (0.0,), 0.0), q)
        low, high = path_height_extremes(path)
        assert low == pytest.approx(-2.0, abs=1e-9)
        assert high == pytest.approx(3.0, abs=1e-9)

    def test_coarse_path_overshoot_vanishes(self):
        p, q = GroupPoint((0.0,), (0.0,), 0.0), GroupPoint((math.exp(3.0),), (math.exp(2.0),), 0.0)
        up, down = height_overshoot(SOL, FrameMetric.identity(3), p, q, coarse_path(SOL, p, q))
        assert up == pytest.approx(0.0, abs=1e-9)
        assert down == pytest.approx(0.0, abs=1e-9)

    def test_empty_path(self):
        with pytest.raises(ValueError):
            path_height_extremes(np.zeros((0, 2)))
