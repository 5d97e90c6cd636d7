
"""
Anisotropic lattice Dijkstra for left-invariant metrics.

Nodes sit on a per-axis regular box; edges follow a symmetric stencil and are
weighted by the segment length under the metric tensor at the segment
midpoint. The sparse graph is solved with scipy's csgraph Dijkstra.
"""
import itertools
import math
from typing import Iterable, Optional, Sequence, Tuple, Union

import numpy as np
from loguru import logger
from scipy import sparse
from scipy.sparse import csgraph

from domain.coarse_calculus import critical_heights
from domain.entities import GroupModel
from domain.exceptions import (
    GridDisconnectedError,
    InvalidModelError,
    PointOutsideGridError,
)
from domain.group_arithmetic import normalize_metric
from domain.value_objects import CoarsePath, DistanceEstimate, FrameMetric, GridSpec, GroupPoint

DEFAULT_MARGIN = 2.0
INDEX_TOLERANCE = 1e-6


def build_stencil(dim: int) -> Tuple[Tuple[int, ...], ...]:
    """
    All offsets in {−1, 0, 1}^dim plus the knight moves (±1, ±2), (±2, ±1)
    in every coordinate plane.
    """
    offsets = {o for o in itertools.product((-1, 0, 1), repeat=dim) if any(o)}
    for i, j in itertools.combinations(range(dim), 2):
        for u, v in ((1, 2), (2, 1)):
            for su, sv in itertools.product((-1, 1), repeat=2):
                o = [0] * dim
                o[i], o[j] = su * u, sv * v
                offsets.add(tuple(o))
    return tuple(sorted(offsets))


def half_stencil(stencil: Iterable[Tuple[int, ...]]) -> Tuple[Tuple[int, ...], ...]:
    """Offsets whose first non-zero component is positive."""
    return tuple(o for o in stencil if next(c for c in o if c) > 0)


class Region:
    """Vectorised predicate on node coordinates of shape (..., dim)."""

    def __call__(self, coordinates: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def contains(self, point: GroupPoint) -> bool:
        return bool(self(point.coordinates()[None, :])[0])


class WholeSpace(Region):
    def __call__(self, coordinates: np.ndarray) -> np.ndarray:
        return np.ones(coordinates.shape[:-1], dtype=bool)


class HeightBelow(Region):
    """Points with t ≤ level."""

    def __init__(self, level: float):
        self.level = float(level)

    def __call__(self, coordinates: np.ndarray) -> np.ndarray:
        return coordinates[..., -1] <= self.level + 1e-12


class HeightAbove(Region):
    """Points with t ≥ level."""

    def __init__(self, level: float):
        self.level = float(level)

    def __call__(self, coordinates: np.ndarray) -> np.ndarray:
        return coordinates[..., -1] >= self.level - 1e-12


class Complement(Region):
    def __init__(self, region: Region):
        self.region = region

    def __call__(self, coordinates: np.ndarray) -> np.ndarray:
        return ~self.region(coordinates)


class Box(Region):
    """Axis-aligned coordinate box [lower, upper]."""

    def __init__(self, lower: Sequence[float], upper: Sequence[float]):
        self.lower = np.asarray(lower, dtype=float)
        self.upper = np.asarray(upper, dtype=float)

    def __call__(self, coordinates: np.ndarray) -> np.ndarray:
        return np.all((coordinates >= self.lower) & (coordinates <= self.upper), axis=-1)


def _active_height(c: float, delta: float, q_ii: float, t: float, s: float, lo: float, hi: float) -> float:
    if delta != 0.0:
        height = -math.log(abs(delta) * math.sqrt(q_ii)) / c
    else:
        height = max(t, s) if c < 0 else min(t, s)
    return min(max(height, lo), hi)


def grid_for_pair(
    model: GroupModel,
    metric: FrameMetric,
    p: GroupPoint,
    q: GroupPoint,
    h: float,
    margin: float = DEFAULT_MARGIN,
    frozen_axes: Sequence[int] = ()
) -> GridSpec:
    """
    Box around p and q with p at the origin node.

    Heights span [min(t_down, t, s) − margin, max(t_up, t, s) + margin]. Each
    nilradical step has frame length h at its axis' active height, every step
    lies in [target/2, target] and every axis is padded by margin frame units.
    q sits on a node unless it is closer than half a step to p along some
    axis. Frozen axes hold a single node.
    """
    if h <= 0.0:
        raise InvalidModelError(f"Grid step must be positive, got {h}")
    metric.check(model)
    p.check(model)
    q.check(model)
    normalized = normalize_metric(model, metric)
    t_up, t_down = critical_heights(model, p, q, normalized)
    t, s = p.height, q.height
    lo = min(t_down, t, s) - margin
    hi = max(t_up, t, s) + margin

    exponents = model.frame_exponents()
    delta = q.coordinates() - p.coordinates()
    pad = int(math.ceil(margin / h))
    steps, lower, upper = [], [], []
    for axis in range(model.dim):
        if axis in frozen_axes:
            if abs(delta[axis]) > 0.0:
                raise PointOutsideGridError(f"Points differ along frozen axis {axis}")
            steps.append(h)
            lower.append(0)
            upper.append(0)
            continue
        if axis == model.dim - 1:
            target = h
            extent_low, extent_high = lo - t, hi - t
        else:
            q_ii = float(normalized.matrix[axis, axis])
            active = _active_height(exponents[axis], delta[axis], q_ii, t, s, lo, hi)
            target = h * math.exp(-exponents[axis] * active) / math.sqrt(q_ii)
            extent_low = extent_high = None
        magnitude = abs(delta[axis])
        if magnitude < 0.5 * target:
            # q stays off the lattice along this axis and is attached by _solve
            step = target
        else:
            step = magnitude / math.ceil(magnitude / target - INDEX_TOLERANCE)
        q_index = int(round(delta[axis] / step))
        if extent_low is None:
            lower.append(min(0, q_index) - pad)
            upper.append(max(0, q_index) + pad)
        else:
            lower.append(min(0, q_index, -int(math.ceil(-extent_low / step - INDEX_TOLERANCE))))
            upper.append(max(0, q_index, int(math.ceil(extent_high / step - INDEX_TOLERANCE))))
        steps.append(step)

    grid = GridSpec(
        origin=p.coordinates(),
        steps=np.asarray(steps),
        lower=tuple(lower),
        upper=tuple(upper),
        h=h,
        stencil=build_stencil(model.dim),
    )
    logger.debug(f"Grid for {p} -> {q}: {grid} ({grid.node_count} nodes)")
    return grid


def nearest_node(grid: GridSpec, point: GroupPoint) -> Tuple[Tuple[int, ...], bool]:
    """Array index of the node nearest to a point, and whether the point sits on it."""
    coordinates = point.coordinates()
    if coordinates.size != grid.dim:
        raise PointOutsideGridError(f"Point {point} does not match the grid dimension {grid.dim}")
    raw = (coordinates - grid.origin) / grid.steps
    rounded = np.round(raw)
    index = tuple(int(r) - lo for r, lo in zip(rounded, grid.lower))
    if any(i < 0 or i >= n for i, n in zip(index, grid.shape)):
        raise PointOutsideGridError(f"Point {point} lies outside the grid box {grid.box()}")
    return index, bool(np.all(np.abs(raw - rounded) <= INDEX_TOLERANCE))


def node_index(grid: GridSpec, point: GroupPoint) -> Tuple[int, ...]:
    """Array index of a point that lies on a grid node."""
    index, on_node = nearest_node(grid, point)
    if not on_node:
        raise PointOutsideGridError(f"Point {point} is not a grid node")
    return index


def node_coordinates(grid: GridSpec) -> np.ndarray:
    """Coordinates of every node, shape grid.shape + (dim,)."""
    axes = [grid.axis_coordinates(a) for a in range(grid.dim)]
    return np.stack(np.meshgrid(*axes, indexing='ij'), axis=-1)


def _offset_slices(offset: Tuple[int, ...], shape: Tuple[int, ...]):
    src, dst = [], []
    for o, n in zip(offset, shape):
        if o >= 0:
            src.append(slice(0, max(n - o, 0)))
            dst.append(slice(o, n))
        else:
            src.append(slice(-o, n))
            dst.append(slice(0, max(n + o, 0)))
    return tuple(src), tuple(dst)


def build_graph(
    model: GroupModel,
    metric: FrameMetric,
    grid: GridSpec,
    mask: Optional[np.ndarray] = None
) -> sparse.csr_matrix:
    """
    Undirected sparse graph over the grid nodes; edges whose endpoints fail
    the mask are dropped.
    """
    shape = grid.shape
    ids = np.arange(grid.node_count, dtype=np.int64).reshape(shape)
    heights = grid.axis_coordinates(grid.dim - 1)
    exponents = model.frame_exponents()
    rows, cols, weights = [], [], []
    # One vectorised edge batch per half-stencil offset
    for offset in half_stencil(grid.stencil):
        src, dst = _offset_slices(offset, shape)
        source_ids = ids[src]
        if source_ids.size == 0:
            continue
        # Edge length depends only on the source height
        displacement = np.asarray(offset) * grid.steps
        t_mid = heights[src[-1]] + 0.5 * displacement[-1]
        frame = np.exp(np.outer(t_mid, exponents)) * displacement
        level_weights = np.sqrt(np.einsum('li,ij,lj->l', frame, metric.matrix, frame))
        edge_weights = np.broadcast_to(level_weights, source_ids.shape)
        target_ids = ids[dst]
        # Drop edges touching inadmissible nodes
        if mask is not None:
            keep = mask[src] & mask[dst]
            rows.append(source_ids[keep])
            cols.append(target_ids[keep])
            weights.append(edge_weights[keep])
        else:
            rows.append(source_ids.ravel())
            cols.append(target_ids.ravel())
            weights.append(edge_weights.ravel())
    row = np.concatenate(rows) if rows else np.zeros(0, dtype=np.int64)
    col = np.concatenate(cols) if cols else np.zeros(0, dtype=np.int64)
    data = np.concatenate(weights) if weights else np.zeros(0)
    return sparse.coo_matrix((data, (row, col)), shape=(grid.node_count, grid.node_count)).tocsr()


def segment_lengths(model: GroupModel, metric: FrameMetric, start: np.ndarray, end: np.ndarray) -> np.ndarray:
    """Midpoint-rule lengths of the coordinate segments start[k] -> end[k]."""
    start = np.atleast_2d(np.asarray(start, dtype=float))
    end = np.atleast_2d(np.asarray(end, dtype=float))
    delta = end - start
    t_mid = 0.5 * (start[:, -1] + end[:, -1])
    frame = np.exp(np.outer(t_mid, model.frame_exponents())) * delta
    return np.sqrt(np.einsum('li,ij,lj->l', frame, metric.matrix, frame))


def _attachment_edges(
    model: GroupModel,
    metric: FrameMetric,
    grid: GridSpec,
    point: GroupPoint,
    nearest: Tuple[int, ...],
    mask: Optional[np.ndarray]
) -> Tuple[np.ndarray, np.ndarray]:
    """Flat ids of the nodes around an off-lattice point and the edge lengths to them."""
    candidates = np.asarray([(0,) * grid.dim, *grid.stencil]) + np.asarray(nearest)
    inside = np.all((candidates >= 0) & (candidates < np.asarray(grid.shape)), axis=1)
    candidates = candidates[inside]
    if mask is not None:
        candidates = candidates[mask[tuple(candidates.T)]]
    ids = np.ravel_multi_index(tuple(candidates.T), grid.shape)
    coordinates = grid.origin + (candidates + np.asarray(grid.lower)) * grid.steps
    origin = np.broadcast_to(point.coordinates(), coordinates.shape)
    return ids, segment_lengths(model, metric, origin, coordinates)


def _trace_path(grid: GridSpec, predecessors: np.ndarray, source: int, target: int, extras: np.ndarray) -> np.ndarray:
    chain = [target]
    while chain[-1] != source:
        chain.append(int(predecessors[chain[-1]]))
    chain.reverse()
    points = []
    for vertex in chain:
        if vertex >= grid.node_count:
            points.append(extras[vertex - grid.node_count])
        else:
            index = np.asarray(np.unravel_index(vertex, grid.shape))
            points.append(grid.origin + (index + np.asarray(grid.lower)) * grid.steps)
    return np.asarray(points)


def _solve(
    model: GroupModel,
    metric: FrameMetric,
    p: GroupPoint,
    q: GroupPoint,
    grid: GridSpec,
    region: Optional[Region]
) -> DistanceEstimate:
    metric.check(model)
    if p == q:
        return DistanceEstimate(0.0, path=p.coordinates()[None, :], h=grid.h, node_count=grid.node_count)

    mask = None
    if region is not None and not isinstance(region, WholeSpace):
        mask = region(node_coordinates(grid))

    # Endpoints off the lattice become extra vertices after the grid nodes
    vertices, extras = [], []
    for point in (p, q):
        index, on_node = nearest_node(grid, point)
        admissible = bool(mask[index]) if on_node and mask is not None else (
            mask is None or region.contains(point)
        )
        if not admissible:
            raise GridDisconnectedError("An endpoint lies outside the admissible region")
        if on_node:
            vertices.append(int(np.ravel_multi_index(index, grid.shape)))
        else:
            vertices.append(grid.node_count + len(extras))
            extras.append((point, index))
    source, target = vertices
    if source == target:
        return DistanceEstimate(0.0, path=p.coordinates()[None, :], h=grid.h, node_count=grid.node_count)

    logger.info(f"Lattice Dijkstra on {grid.node_count} nodes (h={grid.h}, shape={grid.shape})")
    graph = build_graph(model, metric, grid, mask)
    extra_coordinates = np.asarray([point.coordinates() for point, _ in extras]).reshape(len(extras), grid.dim)
    if extras:
        # Join each off-lattice endpoint to the nodes around its nearest node
        coo = graph.tocoo()
        rows, cols, weights = [coo.row], [coo.col], [coo.data]
        for k, (point, index) in enumerate(extras):
            ids, lengths = _attachment_edges(model, metric, grid, point, index, mask)
            rows.append(np.full(ids.size, grid.node_count + k))
            cols.append(ids)
            weights.append(lengths)
        if len(extras) == 2:
            rows.append(np.array([grid.node_count]))
            cols.append(np.array([grid.node_count + 1]))
            weights.append(segment_lengths(model, metric, extra_coordinates[0], extra_coordinates[1]))
        size = grid.node_count + len(extras)
        graph = sparse.coo_matrix(
            (np.concatenate(weights), (np.concatenate(rows), np.concatenate(cols))), shape=(size, size)
        ).tocsr()
        logger.debug(f"Attached {len(extras)} off-lattice endpoint(s)")

    distances, predecessors = csgraph.dijkstra(
        graph, directed=False, indices=source, return_predecessors=True
    )
    value = float(distances[target])
    if not np.isfinite(value):
        logger.error(f"Target {q} unreachable from {p} at h={grid.h}")
        raise GridDisconnectedError(f"Target unreachable at grid resolution h={grid.h}")
    path = _trace_path(grid, predecessors, source, target, extra_coordinates)
    return DistanceEstimate(value, upper_bound=True, path=path, h=grid.h, node_count=graph.shape[0])


def lattice_distance(
    model: GroupModel,
    metric: FrameMetric,
    p: GroupPoint,
    q: GroupPoint,
    grid: Optional[GridSpec] = None,
    h: float = 0.05,
    margin: float = DEFAULT_MARGIN
) -> DistanceEstimate:
    """
    Shortest lattice path length between p and q under the metric as given.

    The grid is built from the normalized metric when not supplied.
    """
    grid = grid or grid_for_pair(model, metric, p, q, h, margin)
    return _solve(model, metric, p, q, grid, None)


def constrained_lattice_distance(
    model: GroupModel,
    metric: FrameMetric,
    p: GroupPoint,
    q: GroupPoint,
    grid: GridSpec,
    region: Region
) -> DistanceEstimate:
    """Shortest lattice path using only nodes inside region."""
    return _solve(model, metric, p, q, grid, region)


def path_height_extremes(path: Union[np.ndarray, CoarsePath]) -> Tuple[float, float]:
    """(h₋, h₊) along a polyline; extremes of a polyline sit at its vertices."""
    if isinstance(path, CoarsePath):
        heights = np.asarray(path.heights())
    else:
        heights = np.asarray(path, dtype=float)[:, -1]
    if heights.size == 0:
        raise ValueError("Path is empty")
    return float(heights.min()), float(heights.max())


def height_overshoot(
    model: GroupModel,
    metric: FrameMetric,
    p: GroupPoint,
    q: GroupPoint,
    path: Union[np.ndarray, CoarsePath]
) -> Tuple[float, float]:
    """
    (D₊, D₋) = (t_up − h₊, h₋ − t_down); infinite when a factor is degenerate.
    """
    t_up, t_down = critical_heights(model, p, q, normalize_metric(model, metric))
    low, high = path_height_extremes(path)
    return t_up - high, low - t_down


def cumulative_length(model: GroupModel, metric: FrameMetric, path: np.ndarray) -> np.ndarray:
    """Midpoint-rule length along a polyline, starting at 0 at its first vertex."""
    points = np.asarray(path, dtype=float)
    if len(points) < 2:
        return np.zeros(len(points))
    return np.concatenate([[0.0], np.cumsum(segment_lengths(model, metric, points[:-1], points[1:]))])


def path_length(model: GroupModel, metric: FrameMetric, path: np.ndarray) -> float:
    lengths = cumulative_length(model, metric, path)
    return float(lengths[-1]) if lengths.size else 0.0
