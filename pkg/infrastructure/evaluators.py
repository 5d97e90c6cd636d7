
"""
Concrete distance strategies.

Each evaluator is a small picklable object so batches can be shipped to a
process pool.
"""
from typing import Optional, Sequence

from loguru import logger

from domain.coarse_calculus import heintze_plane_distance, rho, rho_tilde
from domain.entities import GenSet, GroupModel, HeintzeModel, SolTypeModel
from domain.exceptions import EvaluatorError, InvalidModelError
from domain.lamplighter import lamp_inverse, lamp_multiply
from domain.repositories import DistanceEvaluator
from domain.value_objects import DistanceEstimate, FrameMetric, GroupPoint, LampElement

from .cayley_search import word_length
from .geodesic_shooting import shooting_refine
from .lattice_dijkstra import DEFAULT_MARGIN, grid_for_pair, lattice_distance


class LatticeEvaluator(DistanceEvaluator):
    """
    Lattice Dijkstra distance, optionally refined by geodesic shooting.
    """

    name = "lattice"

    def __init__(
        self,
        model: GroupModel,
        metric: Optional[FrameMetric] = None,
        h: float = 0.05,
        margin: float = DEFAULT_MARGIN,
        refine: bool = False,
        frozen_axes: Sequence[int] = ()
    ):
        self.model = model
        self.metric = metric or FrameMetric.identity(model.dim)
        self.metric.check(model)
        self.h = h
        self.margin = margin
        self.refine = refine
        self.frozen_axes = tuple(frozen_axes)

    def grid(self, p: GroupPoint, q: GroupPoint, h: Optional[float] = None):
        return grid_for_pair(self.model, self.metric, p, q, h or self.h, self.margin, self.frozen_axes)

    def evaluate(self, p: GroupPoint, q: GroupPoint) -> DistanceEstimate:
        estimate = lattice_distance(self.model, self.metric, p, q, grid=self.grid(p, q))
        if self.refine:
            estimate = shooting_refine(self.model, self.metric, p, q, estimate)
        return estimate

    def evaluate_halved(self, p: GroupPoint, q: GroupPoint) -> DistanceEstimate:
        """Same box at half the grid step."""
        return lattice_distance(self.model, self.metric, p, q, grid=self.grid(p, q).halved())


class FactorLatticeEvaluator(LatticeEvaluator):
    """
    Lattice distance inside the Heintze subgroup S₁ (n₂ = 0) or S₂ (n₁ = 0)
    of a Sol-type model, between the projections of the query points.
    """

    def __init__(self, model: SolTypeModel, metric: Optional[FrameMetric] = None, factor: str = "up", **kwargs):
        if not isinstance(model, SolTypeModel):
            raise InvalidModelError("Factor projections exist on Sol-type models only")
        if factor not in ("up", "down"):
            raise InvalidModelError(f"Unknown factor {factor!r}")
        frozen = range(model.k_up, model.k_up + model.k_down) if factor == "up" else range(model.k_up)
        super().__init__(model, metric, frozen_axes=tuple(frozen), **kwargs)
        self.factor = factor
        self.name = f"lattice-{factor}"

    def project(self, p: GroupPoint) -> GroupPoint:
        if self.factor == "up":
            return GroupPoint(p.n1, tuple(0.0 for _ in p.n2), p.height)
        return GroupPoint(tuple(0.0 for _ in p.n1), p.n2, p.height)

    def evaluate(self, p: GroupPoint, q: GroupPoint) -> DistanceEstimate:
        return super().evaluate(self.project(p), self.project(q))

    def __call__(self, p: GroupPoint, q: GroupPoint) -> float:
        return self.evaluate(p, q).value


class HyperbolicEvaluator(DistanceEvaluator):
    """Closed-form distance on a two-dimensional Heintze group."""

    name = "closed-form"

    def __init__(self, model: HeintzeModel, metric: Optional[FrameMetric] = None):
        if not isinstance(model, HeintzeModel) or model.k != 1:
            raise InvalidModelError("Closed-form distances need a two-dimensional Heintze model")
        self.model = model
        self.metric = metric or FrameMetric.identity(2)

    def evaluate(self, p: GroupPoint, q: GroupPoint) -> DistanceEstimate:
        value = heintze_plane_distance(
            self.model.eigenvalues[0], self.metric.matrix, (p.n1[0], p.height), (q.n1[0], q.height)
        )
        return DistanceEstimate(value, upper_bound=False)


class RhoEvaluator(DistanceEvaluator):
    """
    ρ = d⁽¹⁾ + d⁽²⁾ − |Δh|, closed form on one-dimensional factors and
    factor lattices otherwise.
    """

    name = "rho"

    def __init__(self, model: SolTypeModel, metric: Optional[FrameMetric] = None, h: float = 0.1,
                 margin: float = DEFAULT_MARGIN):
        if not isinstance(model, SolTypeModel):
            raise InvalidModelError("rho is defined on Sol-type models")
        self.model = model
        self.metric = metric or FrameMetric.identity(model.dim)
        self.up = None if model.k_up == 1 else FactorLatticeEvaluator(model, self.metric, "up", h=h, margin=margin)
        self.down = None if model.k_down == 1 else FactorLatticeEvaluator(model, self.metric, "down", h=h, margin=margin)

    def evaluate(self, p: GroupPoint, q: GroupPoint) -> DistanceEstimate:
        value = rho(self.model, p, q, self.metric, up_distance=self.up, down_distance=self.down)
        return DistanceEstimate(value, upper_bound=False)


class RhoTildeEvaluator(DistanceEvaluator):
    """Four-case coarse distance."""

    name = "rho_tilde"

    def __init__(self, model: GroupModel, metric: Optional[FrameMetric] = None):
        self.model = model
        self.metric = metric

    def evaluate(self, p: GroupPoint, q: GroupPoint) -> DistanceEstimate:
        return DistanceEstimate(rho_tilde(self.model, p, q, self.metric), upper_bound=False)


class WordMetricEvaluator(DistanceEvaluator):
    """Word distance |g⁻¹h| with respect to a generating set."""

    def __init__(self, genset: GenSet, radius_cap: int = 20):
        self.genset = genset
        self.radius_cap = radius_cap
        self.name = f"word-{genset.name}"

    def evaluate(self, g: LampElement, h: LampElement) -> DistanceEstimate:
        length = word_length(self.genset, lamp_multiply(lamp_inverse(g), h), self.radius_cap)
        if length is None:
            logger.warning(f"{self.name}: length above cap {self.radius_cap}")
            raise EvaluatorError(f"Word length exceeds radius cap {self.radius_cap}")
        return DistanceEstimate(float(length), upper_bound=False)
