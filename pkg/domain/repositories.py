
"""
Repository and strategy interfaces for the coarse-geometry laboratory domain.
"""
from abc import ABC, abstractmethod
from pathlib import Path
from typing import List, Optional, Sequence, Tuple

from .value_objects import Bucket, DistanceEstimate


class DistanceEvaluator(ABC):
    """
    Interface for a distance on a fixed point set (continuous model or
    lamplighter group).
    """

    name: str = "distance"

    @abstractmethod
    def evaluate(self, p, q) -> DistanceEstimate:
        """
        Estimates the distance between two points.
        """
        pass

    def is_available(self) -> bool:
        """
        Checks if the evaluator can be used.
        """
        return True


class ReportRepository(ABC):
    """
    Interface for persisting experiment reports.
    """

    @abstractmethod
    def write_json(self, payload: dict, output: Optional[Path] = None) -> str:
        """
        Serializes a report as JSON; returns the text written.
        """
        pass

    @abstractmethod
    def write_csv(self, header: Sequence[str], rows: List[Sequence], output: Optional[Path] = None) -> str:
        """
        Serializes tabular rows as CSV; returns the text written.
        """
        pass

    @abstractmethod
    def buckets_to_rows(self, buckets: List[Bucket]) -> List[Sequence]:
        """
        Flattens similarity buckets into CSV rows.
        """
        pass

    @abstractmethod
    def path_rows(self, path, lengths=None) -> Tuple[List[str], List[Sequence]]:
        """
        Flattens a polyline into a header and CSV rows.
        """
        pass
