
"""
Closed-form and coarse distances on Heintze and Sol-type models.

Heights where a factor has no horizontal displacement are represented by the
sentinels −inf (expanding factor) and +inf (contracting factor), which select
the vertical branch of every case split.
"""
import math
from typing import Callable, Optional, Sequence, Tuple

import numpy as np
from loguru import logger
from scipy import optimize

from .entities import GroupModel, HeintzeModel, SolTypeModel
from .exceptions import DegeneratePairError, InvalidModelError
from .group_arithmetic import (
    coset_point,
    group_multiply,
    normalize_metric,
    perpendicular_section,
    section_speed_squared,
)
from .value_objects import CoarsePath, FrameMetric, GroupPoint

HOROCYCLIC_THRESHOLD = 1.0
BRACKET_WIDTH = 60.0
ROOT_TOLERANCE = 1e-12
# asinh(y) = log(2y) to double precision above e^20
LOG_ASINH_CUTOFF = 20.0

PlanePoint = Tuple[float, float]
FactorDistance = Callable[[GroupPoint, GroupPoint], float]


def hyperbolic_distance(a: float, p: PlanePoint, q: PlanePoint) -> float:
    """
    Distance in R ⋊ R with derivation a and metric e^{−2at}dx² + dt².

    The plane is isometric to (1/a)·H² through u = a·x, w = e^{at}.
    """
    if a <= 0.0:
        raise InvalidModelError(f"Rate must be positive, got {a}")
    (x, t), (y, s) = p, q
    # sinh(a·d/2) = hypot(sinh(a|t − s|/2), (a|x − y|/2)·e^{−a(t+s)/2}), kept in log space
    log_vertical = _log_sinh(0.5 * a * abs(t - s))
    log_horizontal = math.log(0.5 * a * abs(x - y)) - 0.5 * a * (t + s) if x != y else -math.inf
    log_half = 0.5 * float(np.logaddexp(2.0 * log_vertical, 2.0 * log_horizontal))
    if log_half > LOG_ASINH_CUTOFF:
        return 2.0 * (log_half + math.log(2.0)) / a
    return 2.0 * math.asinh(math.exp(log_half)) / a


def _log_sinh(u: float) -> float:
    if u <= 0.0:
        return -math.inf
    if u > LOG_ASINH_CUTOFF:
        return u - math.log(2.0) + math.log1p(-math.exp(-2.0 * u))
    return math.log(math.sinh(u))


def heintze_plane_distance(
    rate: float,
    block: np.ndarray,
    p: PlanePoint,
    q: PlanePoint
) -> float:
    """
    Distance on a two-dimensional Heintze group for any frame metric.

    Coordinates (ξ, τ) ↦ (ξ, 0)·c(τ) along the perpendicular section make the
    metric Q_xx e^{−2aτ}dξ² + |v|² dτ², a rescaled hyperbolic plane.
    """
    q_xx, q_xt = float(block[0, 0]), float(block[0, 1])
    v_x = -q_xt / q_xx
    speed2 = float(block[1, 1]) - q_xt * q_xt / q_xx
    speed = math.sqrt(speed2)

    def straighten(point: PlanePoint) -> PlanePoint:
        x, t = point
        xi = x - math.expm1(rate * t) / rate * v_x
        return math.sqrt(q_xx) * xi, speed * t

    return hyperbolic_distance(rate / speed, straighten(p), straighten(q))


def horocyclic_distance(
    exponents: np.ndarray,
    delta: Sequence[float],
    t: float,
    block: Optional[np.ndarray] = None
) -> float:
    """
    Length of the straight segment Δ inside the flat horosphere at height t,
    for coordinate-to-frame exponents c (Jacobian e^{ct}).
    """
    d = np.asarray(delta, dtype=float)
    mask = d != 0.0
    if not np.any(mask):
        return 0.0
    c = np.asarray(exponents, dtype=float)[mask]
    b = np.eye(d.size)[np.ix_(mask, mask)] if block is None else np.asarray(block)[np.ix_(mask, mask)]
    # e^{ct}·Δ formed in log space; tiny displacements underflow otherwise
    with np.errstate(over='ignore'):
        w = np.sign(d[mask]) * np.exp(c * t + np.log(np.abs(d[mask])))
        value = float(w @ b @ w)
    return math.sqrt(value) if np.isfinite(value) else math.inf


def _critical_height(exponents: np.ndarray, delta: np.ndarray, block: Optional[np.ndarray]) -> float:
    if not np.any(delta != 0.0):
        raise DegeneratePairError("Critical height of a degenerate pair is undefined")
    c = np.asarray(exponents, dtype=float)
    c_ref = c[np.argmin(np.abs(c))]
    scale = float(np.linalg.norm(delta))
    t0 = -math.log(scale) / c_ref
    width = BRACKET_WIDTH / float(np.min(np.abs(c)))

    def residual(t: float) -> float:
        return horocyclic_distance(c, delta, t, block) - HOROCYCLIC_THRESHOLD

    return float(optimize.bisect(residual, t0 - width, t0 + width, xtol=ROOT_TOLERANCE, maxiter=500))


def critical_height_up(
    up: HeintzeModel,
    x: Sequence[float],
    y: Sequence[float],
    block: Optional[np.ndarray] = None
) -> float:
    """
    Height where the horocyclic distance e^{−a t}|x − y| of the expanding
    factor equals 1.
    """
    delta = np.asarray(y, dtype=float) - np.asarray(x, dtype=float)
    return _critical_height(-up.rates, delta, block)


def critical_height_down(
    down: HeintzeModel,
    lam: float,
    x: Sequence[float],
    y: Sequence[float],
    block: Optional[np.ndarray] = None
) -> float:
    """Mirror of critical_height_up for the contracting factor (rates λ b_j)."""
    delta = np.asarray(y, dtype=float) - np.asarray(x, dtype=float)
    return _critical_height(lam * down.rates, delta, block)


def _up_block(model: GroupModel, metric: Optional[FrameMetric]) -> Optional[np.ndarray]:
    if metric is None:
        return None
    return metric.block(range(model.k_up))


def _down_block(model: SolTypeModel, metric: Optional[FrameMetric]) -> Optional[np.ndarray]:
    if metric is None:
        return None
    return metric.block(range(model.k_up, model.k_up + model.k_down))


def _up_model(model: GroupModel) -> HeintzeModel:
    return model if isinstance(model, HeintzeModel) else model.up


def critical_heights(
    model: GroupModel,
    p: GroupPoint,
    q: GroupPoint,
    metric: Optional[FrameMetric] = None
) -> Tuple[float, float]:
    """
    (t_up, t_down) for the pair, with −inf / +inf for degenerate factors.
    """
    try:
        t_up = critical_height_up(_up_model(model), p.n1, q.n1, _up_block(model, metric))
    except DegeneratePairError:
        t_up = -math.inf
    t_down = math.inf
    if isinstance(model, SolTypeModel):
        try:
            t_down = critical_height_down(model.down, model.lam, p.n2, q.n2, _down_block(model, metric))
        except DegeneratePairError:
            pass
    return t_up, t_down


def rho_tilde_1(
    up: HeintzeModel,
    p: Tuple[Sequence[float], float],
    q: Tuple[Sequence[float], float],
    block: Optional[np.ndarray] = None
) -> float:
    """Coarse distance on the expanding factor."""
    (x, t), (y, s) = p, q
    try:
        t_xy = critical_height_up(up, x, y, block)
    except DegeneratePairError:
        t_xy = -math.inf
    if t_xy <= max(t, s):
        return abs(t - s) + 1.0
    return (t_xy - t) + (t_xy - s) + 1.0


def rho_tilde_2(
    down: HeintzeModel,
    lam: float,
    p: Tuple[Sequence[float], float],
    q: Tuple[Sequence[float], float],
    block: Optional[np.ndarray] = None
) -> float:
    """Coarse distance on the contracting factor."""
    (x, t), (y, s) = p, q
    try:
        t_xy = critical_height_down(down, lam, x, y, block)
    except DegeneratePairError:
        t_xy = math.inf
    if t_xy >= min(t, s):
        return abs(t - s) + 1.0
    return (t - t_xy) + (s - t_xy) + 1.0


def rho_tilde(
    model: GroupModel,
    p: GroupPoint,
    q: GroupPoint,
    metric: Optional[FrameMetric] = None
) -> float:
    """
    Four-case coarse distance on a Sol-type model (ρ̃₁ on a Heintze model).
    """
    t, s = p.height, q.height
    if isinstance(model, HeintzeModel):
        return rho_tilde_1(model, (p.n1, t), (q.n1, s), _up_block(model, metric))
    t1, t2 = critical_heights(model, p, q, metric)
    low, high = min(t, s), max(t, s)
    if t2 >= low and t1 <= high:
        return abs(t - s) + 2.0
    if t2 >= low:
        return 2.0 * t1 - (s + t) + 2.0
    if t1 <= high:
        return (s + t) - 2.0 * t2 + 2.0
    return 2.0 * t1 - 2.0 * t2 - abs(s - t) + 2.0


def factor_distance_up(model: SolTypeModel, metric: FrameMetric, p: GroupPoint, q: GroupPoint) -> float:
    """Closed-form d⁽¹⁾(π₁p, π₁q) for a one-dimensional expanding factor."""
    if model.k_up != 1:
        raise InvalidModelError("No closed form for a multi-dimensional expanding factor")
    k = model.dim - 1
    block = metric.block([0, k])
    return heintze_plane_distance(model.up_rates[0], block, (p.n1[0], p.height), (q.n1[0], q.height))


def factor_distance_down(model: SolTypeModel, metric: FrameMetric, p: GroupPoint, q: GroupPoint) -> float:
    """Closed-form d⁽²⁾(π₂p, π₂q); the contracting plane is flipped t → −t."""
    if model.k_down != 1:
        raise InvalidModelError("No closed form for a multi-dimensional contracting factor")
    k = model.dim - 1
    block = metric.block([model.k_up, k]).copy()
    block[0, 1] = block[1, 0] = -block[0, 1]
    return heintze_plane_distance(model.down_rates[0], block, (p.n2[0], -p.height), (q.n2[0], -q.height))


def rho(
    model: SolTypeModel,
    p: GroupPoint,
    q: GroupPoint,
    metric: Optional[FrameMetric] = None,
    up_distance: Optional[FactorDistance] = None,
    down_distance: Optional[FactorDistance] = None
) -> float:
    """
    ρ(p, q) = d⁽¹⁾(π₁p, π₁q) + d⁽²⁾(π₂p, π₂q) − |h(p) − h(q)|.

    Factors of dimension one use the closed form unless an evaluator is given.
    """
    if not isinstance(model, SolTypeModel):
        raise InvalidModelError("rho is defined on Sol-type models")
    metric = metric or FrameMetric.identity(model.dim)
    d1 = up_distance(p, q) if up_distance else factor_distance_up(model, metric, p, q)
    d2 = down_distance(p, q) if down_distance else factor_distance_down(model, metric, p, q)
    return d1 + d2 - abs(p.height - q.height)


def coarse_path(
    model: GroupModel,
    p: GroupPoint,
    q: GroupPoint,
    metric: Optional[FrameMetric] = None
) -> CoarsePath:
    """
    Path through three vertical cosets: down to the contracting critical
    height, across, up to the expanding critical height, across, and down.

    Lengths are measured in the normalized metric.
    """
    metric = metric or FrameMetric.identity(model.dim)
    if not metric.is_diagonal():
        raise InvalidModelError("Coarse paths along vertical cosets need an orthogonal metric")
    metric = normalize_metric(model, metric)
    if p.height > q.height:
        reverse = coarse_path(model, q, p, metric)
        return CoarsePath(tuple(reversed(reverse.waypoints)), tuple(reversed(reverse.segment_lengths)))

    t, s = p.height, q.height
    t1, t2 = critical_heights(model, p, q, metric)
    low, high = min(t2, t), max(t1, s)
    waypoints = (
        p,
        GroupPoint(p.n1, p.n2, low),
        GroupPoint(p.n1, q.n2, low),
        GroupPoint(p.n1, q.n2, high),
        GroupPoint(q.n1, q.n2, high),
        q,
    )
    exponents = model.frame_exponents()[:-1]
    lengths = []
    for a, b in zip(waypoints[:-1], waypoints[1:]):
        if a.height != b.height:
            lengths.append(abs(a.height - b.height))
        else:
            lengths.append(horocyclic_distance(exponents, b.nilradical() - a.nilradical(), a.height, metric.matrix[:-1, :-1]))
    return CoarsePath(waypoints, tuple(lengths))


def shadow_coset(
    model: GroupModel,
    metric_1: FrameMetric,
    metric_2: FrameMetric,
    base: GroupPoint
) -> GroupPoint:
    """
    Base point q at the height of base such that q·c₂ stays within bounded
    distance of base·c₁, where c_i are the perpendicular sections.

    q = base · (D⁻¹(v₂ − v₁), 0), which matches the nilradical limit points of
    the two cosets factor by factor.
    """
    v1 = perpendicular_section(model, metric_1)
    v2 = perpendicular_section(model, metric_2)
    shift = (v2[:-1] - v1[:-1]) / model.derivation_diagonal()
    q = group_multiply(model, base, GroupPoint.from_coordinates(model, np.append(shift, 0.0)))
    logger.debug(f"Shadow coset of {base}: {q}")
    return q


def coset_hausdorff_profile(
    model: GroupModel,
    base: GroupPoint,
    metric_1: FrameMetric,
    metric_2: FrameMetric,
    heights: Sequence[float],
    distance: FactorDistance
) -> np.ndarray:
    """
    Same-height distances between base·c₁ and its shadow coset q·c₂.
    """
    v1 = perpendicular_section(model, metric_1)
    v2 = perpendicular_section(model, metric_2)
    q = shadow_coset(model, metric_1, metric_2, base)
    gaps = [
        distance(coset_point(model, base, v1, tau), coset_point(model, q, v2, tau))
        for tau in heights
    ]
    return np.asarray(gaps, dtype=float)


def section_length(model: GroupModel, metric: FrameMetric, tau: float) -> float:
    """Length of the perpendicular section between heights 0 and τ."""
    return abs(tau) * math.sqrt(section_speed_squared(model, metric))
