
"""
Geodesic refinement by multiple shooting.

The geodesic equation ẍ = −Γ(ẋ, ẋ) is integrated with scipy's adaptive RK45
on K consecutive segments seeded from a lattice path; interior nodes and all
segment velocities are solved for with scipy.optimize.root so that segments
join continuously in position and velocity.
"""
from dataclasses import replace
from typing import Tuple

import numpy as np
from loguru import logger
from scipy import integrate, optimize

from domain.entities import GroupModel
from domain.exceptions import ShootingError
from domain.group_arithmetic import geodesic_acceleration, metric_tensor_at_height
from domain.value_objects import DistanceEstimate, FrameMetric, GroupPoint

RK_TOLERANCE = 1e-9
RESIDUAL_TOLERANCE = 1e-8
DEFAULT_SEGMENTS = 6


def _flow(model: GroupModel, metric: FrameMetric, x: np.ndarray, v: np.ndarray, duration: float) -> Tuple[np.ndarray, np.ndarray]:
    dim = x.size

    def rhs(_, y):
        return np.concatenate([y[dim:], geodesic_acceleration(model, metric, y[dim - 1], y[dim:])])

    solution = integrate.solve_ivp(
        rhs, (0.0, duration), np.concatenate([x, v]),
        method='RK45', rtol=RK_TOLERANCE, atol=RK_TOLERANCE * 1e-3
    )
    if not solution.success:
        raise ShootingError(f"Geodesic integration failed: {solution.message}")
    end = solution.y[:, -1]
    return end[:dim], end[dim:]


def _seed_nodes(path: np.ndarray, segments: int) -> np.ndarray:
    chord = np.concatenate([[0.0], np.cumsum(np.linalg.norm(np.diff(path, axis=0), axis=1))])
    targets = np.linspace(0.0, chord[-1], segments + 1)
    picks = np.unique(np.searchsorted(chord, targets).clip(0, len(path) - 1))
    picks[0], picks[-1] = 0, len(path) - 1
    return path[np.unique(picks)]


def shooting_refine(
    model: GroupModel,
    metric: FrameMetric,
    p: GroupPoint,
    q: GroupPoint,
    initial: DistanceEstimate,
    segments: int = DEFAULT_SEGMENTS
) -> DistanceEstimate:
    """
    Refines a lattice estimate into a geodesic length.

    Returns min(initial, refined) with refined=True; on non-convergence the
    initial estimate comes back with converged=False and a warning.
    """
    if initial.path is None:
        raise ShootingError("Shooting needs a seed path")
    path = np.asarray(initial.path, dtype=float)
    if len(path) < 2 or initial.value == 0.0:
        return replace(initial, refined=True)
    path = path.copy()
    path[0], path[-1] = p.coordinates(), q.coordinates()

    nodes = _seed_nodes(path, segments)
    k = len(nodes) - 1
    dim = model.dim
    duration = 1.0 / k
    velocities = np.diff(nodes, axis=0) / duration
    start, end = nodes[0], nodes[-1]

    def unpack(z):
        interior = z[:(k - 1) * dim].reshape(k - 1, dim)
        return np.vstack([start, interior, end]), z[(k - 1) * dim:].reshape(k, dim)

    def residual(z):
        xs, vs = unpack(z)
        out = []
        for i in range(k):
            x_end, v_end = _flow(model, metric, xs[i], vs[i], duration)
            # Position match at the next node
            out.append(x_end - xs[i + 1])
            # Velocity continuity at interior nodes only
            if i < k - 1:
                out.append(v_end - vs[i + 1])
        return np.concatenate(out)

    z0 = np.concatenate([nodes[1:-1].ravel(), velocities.ravel()])
    try:
        result = optimize.root(residual, z0, method='hybr', tol=1e-12)
        error = float(np.max(np.abs(residual(result.x))))
    except (ShootingError, FloatingPointError, ValueError) as exc:
        logger.warning(f"Shooting from {p} to {q} failed: {exc}")
        return replace(initial, converged=False, warning=f"shooting failed: {exc}")
    if error > RESIDUAL_TOLERANCE:
        logger.warning(f"Shooting from {p} to {q} did not converge (residual {error:.2e})")
        return replace(initial, converged=False, warning=f"shooting residual {error:.2e}")

    xs, vs = unpack(result.x)
    g0 = metric_tensor_at_height(model, metric, xs[0, -1])
    refined = float(np.sqrt(vs[0] @ g0 @ vs[0]))
    logger.debug(f"Shooting refined {initial.value:.6f} -> {refined:.9f} with {k} segments")
    value = min(initial.value, refined)
    return replace(initial, value=value, refined=True, converged=True, path=xs)
