
"""
Exact group arithmetic and left-invariant metric evaluation for the
continuous models.

Lie algebra vectors are written in the left-invariant frame, which at the
identity coincides with the coordinate basis (n1, n2, t).
"""
from typing import Sequence

import numpy as np

from .entities import GroupModel
from .exceptions import DimensionMismatchError, InvalidModelError
from .value_objects import FrameMetric, GroupPoint


def group_multiply(model: GroupModel, p: GroupPoint, q: GroupPoint) -> GroupPoint:
    """
    Semidirect product law (n, t) · (n', t') = (n + e^{tD} n', t + t').
    """
    p.check(model)
    q.check(model)
    d = model.derivation_diagonal()
    n = p.nilradical() + np.exp(p.height * d) * q.nilradical()
    return GroupPoint.from_coordinates(model, np.append(n, p.height + q.height))


def group_inverse(model: GroupModel, p: GroupPoint) -> GroupPoint:
    """(n, t)^{-1} = (−e^{−tD} n, −t)."""
    p.check(model)
    d = model.derivation_diagonal()
    n = -np.exp(-p.height * d) * p.nilradical()
    return GroupPoint.from_coordinates(model, np.append(n, -p.height))


def frame_jacobian(model: GroupModel, t: float) -> np.ndarray:
    """
    Diagonal of the frame-to-coordinate Jacobian at height t.
    """
    return np.exp(model.frame_exponents() * t)


def metric_tensor_at(model: GroupModel, metric: FrameMetric, p: GroupPoint) -> np.ndarray:
    """
    Coordinate expression J(t)ᵀ Q J(t) of the left-invariant metric at p.
    """
    metric.check(model)
    p.check(model)
    return metric_tensor_at_height(model, metric, p.height)


def metric_tensor_at_height(model: GroupModel, metric: FrameMetric, t: float) -> np.ndarray:
    j = frame_jacobian(model, t)
    return metric.matrix * np.outer(j, j)


def perpendicular_section(model: GroupModel, metric: FrameMetric) -> np.ndarray:
    """
    Lie algebra vector v with ∂_t component 1 that is Q-orthogonal to the
    nilradical; its one-parameter subgroup is the geodesic section.
    """
    metric.check(model)
    q = metric.matrix
    k = model.dim - 1
    v_n = -np.linalg.solve(q[:k, :k], q[:k, k])
    return np.append(v_n, 1.0)


def section_speed_squared(model: GroupModel, metric: FrameMetric) -> float:
    v = perpendicular_section(model, metric)
    return metric.norm_squared(v)


def normalize_metric(model: GroupModel, metric: FrameMetric) -> FrameMetric:
    """
    Rescales Q so that the perpendicular section has unit speed.
    """
    return metric.scaled(1.0 / section_speed_squared(model, metric))


def one_param_subgroup(model: GroupModel, v: Sequence[float], tau: float) -> GroupPoint:
    """
    Point c(τ) = exp(τ v) of the one-parameter subgroup generated by v.

    With k = v_t·D the nilradical part is k⁻¹(e^{τk} − I) v_N.
    """
    vector = np.asarray(v, dtype=float)
    if vector.shape != (model.dim,):
        raise DimensionMismatchError(f"Lie algebra vector must have {model.dim} components")
    v_t = vector[-1]
    if v_t == 0.0:
        raise InvalidModelError("The generator lies in the nilradical (zero ∂_t component)")
    rates = v_t * model.derivation_diagonal()
    n = np.expm1(tau * rates) / rates * vector[:-1]
    return GroupPoint.from_coordinates(model, np.append(n, tau * v_t))


def section_limit(model: GroupModel, v: Sequence[float]) -> np.ndarray:
    """
    Nilradical limit point −D⁻¹ v_N of a section with v_t = 1, per factor
    (τ → −∞ on the expanding factor, τ → +∞ on the contracting one).
    """
    vector = np.asarray(v, dtype=float)
    return -vector[:-1] / (vector[-1] * model.derivation_diagonal())


def coset_point(model: GroupModel, base: GroupPoint, v: Sequence[float], tau: float) -> GroupPoint:
    """Point base · c(τ) of the left coset of the subgroup generated by v."""
    return group_multiply(model, base, one_param_subgroup(model, v, tau))


def same_coset(
    model: GroupModel,
    p: GroupPoint,
    q: GroupPoint,
    v: Sequence[float],
    tolerance: float = 1e-9
) -> bool:
    """True if p·c and q·c are the same left coset of the subgroup generated by v."""
    r = group_multiply(model, group_inverse(model, p), q)
    vector = np.asarray(v, dtype=float)
    expected = one_param_subgroup(model, vector, r.height / vector[-1])
    return bool(np.allclose(r.coordinates(), expected.coordinates(), rtol=tolerance, atol=tolerance))


def christoffel_symbols(model: GroupModel, metric: FrameMetric, t: float) -> np.ndarray:
    """
    Levi-Civita Christoffel symbols Γ^i_{jk} in coordinates at height t.

    Only ∂_t g is non-zero, with ∂_t g_ij = (c_i + c_j) g_ij for the frame
    exponents c.
    """
    g = metric_tensor_at_height(model, metric, t)
    c = model.frame_exponents()
    dg = (c[:, None] + c[None, :]) * g
    n = model.dim
    a = np.zeros((n, n, n))
    a[n - 1] = dg
    term = np.einsum('jlk->ljk', a) + np.einsum('klj->ljk', a) - a
    return 0.5 * np.einsum('il,ljk->ijk', np.linalg.inv(g), term)


def geodesic_acceleration(model: GroupModel, metric: FrameMetric, t: float, velocity: np.ndarray) -> np.ndarray:
    """Second derivative −Γ^i_{jk} ẋ^j ẋ^k of a geodesic."""
    gamma = christoffel_symbols(model, metric, t)
    return -np.einsum('ijk,j,k->i', gamma, velocity, velocity)
