
"""
File system repository implementation for experiment reports.
"""
import csv
import io
import json
import math
from pathlib import Path
from typing import List, Optional, Sequence, Tuple

import numpy as np
from loguru import logger

from domain.exceptions import RepositoryError
from domain.repositories import ReportRepository
from domain.value_objects import Bucket

BUCKET_HEADER = ("lower", "upper", "count", "mean_separation", "max_residual")
PATH_HEADER_TAIL = ("t", "cumulative_length")


def _plain(value):
    """Converts numpy scalars and arrays into JSON-friendly values; non-finite floats become None."""
    if isinstance(value, dict):
        return {str(k): _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if isinstance(value, np.ndarray):
        return _plain(value.tolist())
    if isinstance(value, np.generic):
        return _plain(value.item())
    if isinstance(value, float) and not math.isfinite(value):
        return None
    return value


class FileSystemReportRepository(ReportRepository):
    """
    Writes reports to stdout-ready text and optionally to disk.
    """

    def _emit(self, text: str, output: Optional[Path]) -> str:
        if output is None:
            return text
        try:
            path = Path(output)
            path.parent.mkdir(parents=True, exist_ok=True)
            path.write_text(text, encoding="utf-8")
            logger.info(f"Report written to: {path}")
        except OSError as e:
            logger.error(f"Error writing report to {output}: {e}")
            raise RepositoryError(f"Error writing report to {output}: {e}")
        return text

    def write_json(self, payload: dict, output: Optional[Path] = None) -> str:
        """
        Serializes a report with sorted keys so identical runs give identical bytes.
        """
        text = json.dumps(_plain(payload), sort_keys=True, indent=2, ensure_ascii=False) + "\n"
        return self._emit(text, output)

    def write_csv(self, header: Sequence[str], rows: List[Sequence], output: Optional[Path] = None) -> str:
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow(["" if v is None else v for v in _plain(list(row))])
        return self._emit(buffer.getvalue(), output)

    def buckets_to_rows(self, buckets: List[Bucket]) -> List[Sequence]:
        return [
            (b.lower, b.upper, b.count, b.mean_separation, b.max_residual)
            for b in buckets
        ]

    def path_rows(self, path: np.ndarray, lengths: Optional[np.ndarray] = None) -> Tuple[List[str], List[Sequence]]:
        """
        Polyline table: nilradical coordinates, t, cumulative length.

        Without explicit lengths the cumulative coordinate chord length is used.
        """
        points = np.asarray(path, dtype=float)
        dim = points.shape[1]
        if lengths is None:
            steps = np.linalg.norm(np.diff(points, axis=0), axis=1)
            lengths = np.concatenate([[0.0], np.cumsum(steps)])
        header = [f"n{i + 1}" for i in range(dim - 1)] + list(PATH_HEADER_TAIL)
        rows = [list(point) + [float(length)] for point, length in zip(points, lengths)]
        return header, rows

    def write_path(self, path: np.ndarray, output: Optional[Path] = None, lengths: Optional[np.ndarray] = None) -> str:
        header, rows = self.path_rows(path, lengths)
        return self.write_csv(header, rows, output)
