
"""
Value objects for the coarse-geometry laboratory domain.
"""
import struct
from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy import linalg

from .exceptions import (
    DimensionMismatchError,
    InvalidModelError,
    MetricNotPositiveDefiniteError,
)


@dataclass(frozen=True)
class GroupPoint:
    """
    Point (n1, n2, t) of a continuous model; n2 is empty for Heintze models.
    """
    n1: Tuple[float, ...]
    n2: Tuple[float, ...] = ()
    height: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, 'n1', tuple(float(x) for x in np.ravel(self.n1)))
        object.__setattr__(self, 'n2', tuple(float(y) for y in np.ravel(self.n2)))
        object.__setattr__(self, 'height', float(self.height))

    @classmethod
    def identity(cls, model) -> 'GroupPoint':
        return cls((0.0,) * model.k_up, (0.0,) * model.k_down, 0.0)

    @classmethod
    def from_coordinates(cls, model, coordinates: Sequence[float]) -> 'GroupPoint':
        """Builds a point from a flat (n1, n2, t) coordinate vector."""
        coords = np.asarray(coordinates, dtype=float)
        if coords.shape != (model.dim,):
            raise DimensionMismatchError(
                f"Expected {model.dim} coordinates, got shape {coords.shape}"
            )
        k1 = model.k_up
        return cls(tuple(coords[:k1]), tuple(coords[k1:-1]), coords[-1])

    def coordinates(self) -> np.ndarray:
        return np.array(self.n1 + self.n2 + (self.height,), dtype=float)

    def nilradical(self) -> np.ndarray:
        return np.array(self.n1 + self.n2, dtype=float)

    def check(self, model) -> 'GroupPoint':
        """Raises if the point does not belong to the model."""
        if len(self.n1) != model.k_up or len(self.n2) != model.k_down:
            raise DimensionMismatchError(
                f"Point with dimensions ({len(self.n1)}, {len(self.n2)}) "
                f"does not fit model {model}"
            )
        return self

    def to_list(self) -> List[float]:
        return list(self.n1 + self.n2 + (self.height,))

    def __str__(self) -> str:
        return f"GroupPoint(n1={list(self.n1)}, n2={list(self.n2)}, t={self.height})"


@dataclass(frozen=True, eq=False)
class FrameMetric:
    """
    Left-invariant metric given by its Gram matrix in the left-invariant frame.
    """
    matrix: np.ndarray

    def __post_init__(self):
        q = np.array(self.matrix, dtype=float)
        if q.ndim != 2 or q.shape[0] != q.shape[1]:
            raise MetricNotPositiveDefiniteError(f"Frame metric must be square, got shape {q.shape}")
        if not np.allclose(q, q.T, rtol=0.0, atol=1e-12 * max(1.0, np.abs(q).max())):
            raise MetricNotPositiveDefiniteError("Frame metric must be symmetric")
        try:
            linalg.cholesky(q, lower=True)
        except linalg.LinAlgError as e:
            raise MetricNotPositiveDefiniteError(f"Frame metric is not positive definite: {e}")
        q = 0.5 * (q + q.T)
        q.setflags(write=False)
        object.__setattr__(self, 'matrix', q)

    @classmethod
    def identity(cls, dim: int) -> 'FrameMetric':
        return cls(np.eye(dim))

    @classmethod
    def diagonal(cls, values: Sequence[float]) -> 'FrameMetric':
        return cls(np.diag(np.asarray(values, dtype=float)))

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def check(self, model) -> 'FrameMetric':
        if self.dim != model.dim:
            raise DimensionMismatchError(
                f"Frame metric of size {self.dim} does not fit model {model}"
            )
        return self

    def is_diagonal(self, tolerance: float = 0.0) -> bool:
        off = self.matrix - np.diag(np.diag(self.matrix))
        return bool(np.all(np.abs(off) <= tolerance))

    def scaled(self, factor: float) -> 'FrameMetric':
        return FrameMetric(self.matrix * float(factor))

    def block(self, indices: Sequence[int]) -> np.ndarray:
        idx = np.asarray(indices, dtype=int)
        return self.matrix[np.ix_(idx, idx)]

    def norm_squared(self, vector: Sequence[float]) -> float:
        v = np.asarray(vector, dtype=float)
        return float(v @ self.matrix @ v)

    def to_list(self) -> List[List[float]]:
        return self.matrix.tolist()

    def __eq__(self, other) -> bool:
        return isinstance(other, FrameMetric) and np.array_equal(self.matrix, other.matrix)

    def __hash__(self) -> int:
        return hash(self.matrix.tobytes())

    def __str__(self) -> str:
        return f"FrameMetric({self.to_list()})"


@dataclass(frozen=True)
class LampElement:
    """
    Element of Z/m ≀ Z: finitely supported lighting function plus cursor.

    Lights are stored canonically as an offset and a colour tuple without
    leading or trailing zeros.
    """
    m: int
    offset: int = 0
    colors: Tuple[int, ...] = ()
    cursor: int = 0

    def __post_init__(self):
        if not 2 <= int(self.m) <= 256:
            raise InvalidModelError(f"Lamplighter modulus must lie in [2, 256], got {self.m}")
        colors = [int(c) % self.m for c in self.colors]
        offset = int(self.offset)
        start = 0
        while start < len(colors) and colors[start] == 0:
            start += 1
        end = len(colors)
        while end > start and colors[end - 1] == 0:
            end -= 1
        colors = colors[start:end]
        object.__setattr__(self, 'm', int(self.m))
        object.__setattr__(self, 'offset', offset + start if colors else 0)
        object.__setattr__(self, 'colors', tuple(colors))
        object.__setattr__(self, 'cursor', int(self.cursor))

    @classmethod
    def identity(cls, m: int) -> 'LampElement':
        return cls(m)

    @classmethod
    def from_lights(cls, m: int, lights: Dict[int, int], cursor: int = 0) -> 'LampElement':
        """Builds an element from a position -> colour mapping."""
        lit = {p: c % m for p, c in lights.items() if c % m}
        if not lit:
            return cls(m, 0, (), cursor)
        low, high = min(lit), max(lit)
        return cls(m, low, tuple(lit.get(p, 0) for p in range(low, high + 1)), cursor)

    @cached_property
    def key(self) -> bytes:
        """Flat byte encoding of the canonical form."""
        return struct.pack('<qq', self.offset, self.cursor) + bytes(self.colors)

    def light(self, position: int) -> int:
        index = position - self.offset
        if 0 <= index < len(self.colors):
            return self.colors[index]
        return 0

    def lights(self) -> Dict[int, int]:
        return {self.offset + i: c for i, c in enumerate(self.colors) if c}

    def support(self) -> Tuple[int, ...]:
        return tuple(sorted(self.lights()))

    def is_identity(self) -> bool:
        return not self.colors and self.cursor == 0

    def __hash__(self) -> int:
        return hash(self.key)

    def __str__(self) -> str:
        return f"LampElement(m={self.m}, lights={self.lights()}, cursor={self.cursor})"


@dataclass(frozen=True)
class CoarsePath:
    """
    Piecewise path through three vertical cosets approximating a geodesic.
    """
    waypoints: Tuple[GroupPoint, ...]
    segment_lengths: Tuple[float, ...]

    @property
    def length(self) -> float:
        return float(sum(self.segment_lengths))

    def heights(self) -> List[float]:
        return [w.height for w in self.waypoints]

    def to_dict(self) -> dict:
        return {
            "waypoints": [w.to_list() for w in self.waypoints],
            "segment_lengths": list(self.segment_lengths),
            "length": self.length,
        }


@dataclass(frozen=True, eq=False)
class GridSpec:
    """
    Regular lattice box with per-axis steps; node coordinates are
    origin + index * step, computed from integer indices.
    """
    origin: np.ndarray
    steps: np.ndarray
    lower: Tuple[int, ...]
    upper: Tuple[int, ...]
    h: float
    stencil: Tuple[Tuple[int, ...], ...]

    def __post_init__(self):
        origin = np.asarray(self.origin, dtype=float)
        steps = np.asarray(self.steps, dtype=float)
        if origin.shape != steps.shape or len(self.lower) != origin.size or len(self.upper) != origin.size:
            raise DimensionMismatchError("Grid origin, steps and bounds must share one dimension")
        if self.h <= 0.0 or np.any(steps <= 0.0):
            raise InvalidModelError("Grid steps must be positive")
        if any(lo > 0 or hi < 0 for lo, hi in zip(self.lower, self.upper)):
            raise InvalidModelError("Grid bounds must contain the origin index")
        offsets = set(self.stencil)
        if any(tuple(-c for c in o) not in offsets for o in offsets):
            raise InvalidModelError("Stencil must be symmetric under negation")
        object.__setattr__(self, 'origin', origin)
        object.__setattr__(self, 'steps', steps)

    @property
    def dim(self) -> int:
        return self.origin.size

    @property
    def shape(self) -> Tuple[int, ...]:
        return tuple(hi - lo + 1 for lo, hi in zip(self.lower, self.upper))

    @property
    def node_count(self) -> int:
        return int(np.prod(self.shape))

    def box(self) -> List[Tuple[float, float]]:
        """Per-axis coordinate intervals."""
        return [
            (float(o + lo * s), float(o + hi * s))
            for o, s, lo, hi in zip(self.origin, self.steps, self.lower, self.upper)
        ]

    def axis_coordinates(self, axis: int) -> np.ndarray:
        idx = np.arange(self.lower[axis], self.upper[axis] + 1)
        return self.origin[axis] + idx * self.steps[axis]

    def halved(self) -> 'GridSpec':
        """Same box with every step halved; contains all nodes of this grid."""
        return GridSpec(
            origin=self.origin,
            steps=self.steps / 2.0,
            lower=tuple(2 * lo for lo in self.lower),
            upper=tuple(2 * hi for hi in self.upper),
            h=self.h / 2.0,
            stencil=self.stencil,
        )

    def __str__(self) -> str:
        return f"GridSpec(shape={self.shape}, h={self.h}, offsets={len(self.stencil)})"


@dataclass
class DistanceEstimate:
    """
    Numerical distance between two points, with its provenance.
    """
    value: float
    upper_bound: bool = True
    refined: bool = False
    converged: bool = True
    path: Optional[np.ndarray] = None
    h: Optional[float] = None
    node_count: Optional[int] = None
    warning: Optional[str] = None

    def to_dict(self, include_path: bool = False) -> dict:
        data = {
            "value": float(self.value),
            "upper_bound": self.upper_bound,
            "refined": self.refined,
            "converged": self.converged,
            "h": self.h,
            "node_count": self.node_count,
            "warning": self.warning,
        }
        if include_path and self.path is not None:
            data["path"] = self.path.tolist()
        return data


class Verdict(str, Enum):
    """Empirical conclusion of a rough-similarity experiment."""
    ROUGH_ISOMETRY = "RoughIsometry"
    ROUGH_SIMILARITY = "RoughSimilarity"
    NOT_ROUGHLY_SIMILAR = "NotRoughlySimilar"
    INCONCLUSIVE = "Inconclusive"


@dataclass(frozen=True)
class Bucket:
    """Residual statistics of the samples within one separation range."""
    lower: float
    upper: float
    max_residual: float
    count: int
    mean_separation: float

    def to_dict(self) -> dict:
        return {
            "lower": self.lower,
            "upper": self.upper,
            "max_residual": self.max_residual,
            "count": self.count,
            "mean_separation": self.mean_separation,
        }


@dataclass
class SimilarityReport:
    """
    Outcome of comparing two distance evaluators on one sample set.
    """
    lambda_hat: float
    buckets: List[Bucket]
    trend_slope: float
    verdict: Verdict
    max_residual: float
    sample_count: int
    discretization_budget: float = 0.0
    details: Dict[str, object] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "lambda_hat": self.lambda_hat,
            "buckets": [b.to_dict() for b in self.buckets],
            "trend_slope": self.trend_slope,
            "verdict": self.verdict.value,
            "max_residual": self.max_residual,
            "sample_count": self.sample_count,
            "discretization_budget": self.discretization_budget,
            "details": self.details,
        }
