
"""
Domain entities for the coarse-geometry laboratory.

Continuous models are semidirect products N ⋊ R with abelian N = R^k and a real
diagonal derivation. The group law used everywhere is

    (n, t) · (n', t') = (n + e^{tD} n', t + t')

so the left-invariant frame at height t is e^{tD} applied to the coordinate
directions of N, together with ∂_t.
"""
from dataclasses import dataclass, field
from typing import Sequence, Tuple, Union

import numpy as np

from .exceptions import InvalidModelError
from .value_objects import LampElement

NORMALIZATION_TOLERANCE = 1e-12


@dataclass(frozen=True)
class HeintzeModel:
    """
    Heintze group R^k ⋊ R whose derivation is diag(a_1, ..., a_k).
    """
    eigenvalues: Tuple[float, ...]

    def __post_init__(self):
        values = tuple(float(a) for a in self.eigenvalues)
        object.__setattr__(self, 'eigenvalues', values)
        if len(values) < 1:
            raise InvalidModelError("A Heintze model needs at least one eigenvalue")
        if any(not np.isfinite(a) or a <= 0.0 for a in values):
            raise InvalidModelError(f"Eigenvalues must be positive reals, got {values}")
        if abs(min(values) - 1.0) > NORMALIZATION_TOLERANCE:
            raise InvalidModelError(
                f"Smallest eigenvalue must equal 1, got {min(values)}"
            )

    @classmethod
    def from_values(cls, values: Sequence[Union[float, complex]]) -> 'HeintzeModel':
        """Builds a model, rejecting complex spectra."""
        for value in values:
            if isinstance(value, complex) and value.imag != 0.0:
                raise InvalidModelError("Only real diagonal derivations are supported")
        return cls(tuple(float(np.real(v)) for v in values))

    @property
    def k(self) -> int:
        return len(self.eigenvalues)

    @property
    def k_up(self) -> int:
        return self.k

    @property
    def k_down(self) -> int:
        return 0

    @property
    def dim(self) -> int:
        """Dimension of the group."""
        return self.k + 1

    @property
    def rates(self) -> np.ndarray:
        return np.asarray(self.eigenvalues, dtype=float)

    @property
    def up_rates(self) -> np.ndarray:
        return self.rates

    @property
    def down_rates(self) -> np.ndarray:
        return np.zeros(0)

    def trace(self) -> float:
        return float(sum(self.eigenvalues))

    def derivation_diagonal(self) -> np.ndarray:
        """Diagonal of D acting on the nilradical coordinates."""
        return self.rates.copy()

    def frame_exponents(self) -> np.ndarray:
        """
        Exponents c with coordinate-to-frame Jacobian diag(e^{c t}).
        """
        return np.concatenate([-self.rates, [0.0]])

    def __str__(self) -> str:
        return f"Heintze(a={list(self.eigenvalues)})"


@dataclass(frozen=True)
class SolTypeModel:
    """
    Sol-type group (R^{k1} × R^{k2}) ⋊ R with derivation D1 ⊕ (−λ D2).
    """
    up: HeintzeModel
    down: HeintzeModel
    lam: float = 1.0

    def __post_init__(self):
        lam = float(self.lam)
        if not np.isfinite(lam) or lam <= 0.0:
            raise InvalidModelError(f"lambda must be positive, got {self.lam}")
        object.__setattr__(self, 'lam', lam)

    @classmethod
    def from_eigenvalues(
        cls,
        up: Sequence[float],
        down: Sequence[float],
        lam: float = 1.0
    ) -> 'SolTypeModel':
        """
        Builds a model from raw eigenvalue lists.

        The contracting factor is renormalized so that its smallest eigenvalue
        is 1, the scale moving into lambda; the derivation is unchanged.
        """
        down_values = [float(b) for b in down]
        if not down_values or min(down_values) <= 0.0:
            raise InvalidModelError(f"Contracting eigenvalues must be positive, got {down_values}")
        scale = min(down_values)
        return cls(
            up=HeintzeModel.from_values(up),
            down=HeintzeModel.from_values([b / scale for b in down_values]),
            lam=float(lam) * scale,
        )

    @classmethod
    def sol(cls) -> 'SolTypeModel':
        """The three-dimensional group SOL."""
        return cls(HeintzeModel((1.0,)), HeintzeModel((1.0,)), 1.0)

    @property
    def k_up(self) -> int:
        return self.up.k

    @property
    def k_down(self) -> int:
        return self.down.k

    @property
    def dim(self) -> int:
        return self.k_up + self.k_down + 1

    @property
    def up_rates(self) -> np.ndarray:
        return self.up.rates

    @property
    def down_rates(self) -> np.ndarray:
        """Contraction rates λ b_j of the second factor."""
        return self.lam * self.down.rates

    def unimodular(self) -> bool:
        return abs(self.up.trace() - self.lam * self.down.trace()) <= NORMALIZATION_TOLERANCE

    def derivation_diagonal(self) -> np.ndarray:
        return np.concatenate([self.up.rates, -self.down_rates])

    def frame_exponents(self) -> np.ndarray:
        return np.concatenate([-self.up.rates, self.down_rates, [0.0]])

    def __str__(self) -> str:
        return (f"SolType(a={list(self.up.eigenvalues)}, "
                f"b={list(self.down.eigenvalues)}, lambda={self.lam})")


GroupModel = Union[HeintzeModel, SolTypeModel]


@dataclass(frozen=True)
class GenSet:
    """
    Named finite generating set of a lamplighter group.
    """
    name: str
    generators: Tuple[LampElement, ...] = field(default_factory=tuple)

    def __post_init__(self):
        if not self.generators:
            raise InvalidModelError("A generating set needs at least one generator")
        moduli = {g.m for g in self.generators}
        if len(moduli) != 1:
            raise InvalidModelError(f"Generators use different moduli: {sorted(moduli)}")
        if any(g.is_identity() for g in self.generators):
            raise InvalidModelError("The identity cannot be a generator")

    @property
    def m(self) -> int:
        return self.generators[0].m

    def __str__(self) -> str:
        return f"GenSet({self.name}, {len(self.generators)} generators)"
