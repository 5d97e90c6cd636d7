
"""
Strategy context for batch distance evaluation.
"""
from concurrent.futures import ProcessPoolExecutor
from typing import List, Sequence, Tuple

import numpy as np
from loguru import logger

from domain.exceptions import CoarseLabException, EvaluatorError
from domain.repositories import DistanceEvaluator
from domain.value_objects import DistanceEstimate


def _evaluate_pair(strategy: DistanceEvaluator, index: int, p, q) -> DistanceEstimate:
    try:
        return strategy.evaluate(p, q)
    except EvaluatorError as e:
        raise EvaluatorError(str(e), sample_index=index)
    except (CoarseLabException, ArithmeticError, ValueError) as e:
        raise EvaluatorError(f"{strategy.name} failed on sample {index}: {e}", sample_index=index)


class EvaluationContext:
    """
    Context for the distance Strategy pattern.

    Batches run serially or on a process pool; results always come back in
    sample order.
    """

    def __init__(self, strategy: DistanceEvaluator, workers: int = 1):
        self._strategy = strategy
        self.workers = max(1, int(workers))

    @property
    def strategy(self) -> DistanceEvaluator:
        return self._strategy

    def set_strategy(self, strategy: DistanceEvaluator) -> None:
        """
        Sets a new distance strategy.
        """
        self._strategy = strategy

    def evaluate(self, p, q) -> DistanceEstimate:
        if not self._strategy.is_available():
            raise EvaluatorError(f"Distance strategy {self._strategy.name} is not available")
        return _evaluate_pair(self._strategy, 0, p, q)

    def evaluate_batch(self, samples: Sequence[Tuple[object, object]]) -> List[DistanceEstimate]:
        """
        Evaluates every (p, q) sample; a failure carries its sample index.
        """
        if not self._strategy.is_available():
            raise EvaluatorError(f"Distance strategy {self._strategy.name} is not available")
        logger.info(f"Evaluating {len(samples)} samples with {self._strategy.name} ({self.workers} workers)")
        if self.workers == 1 or len(samples) < 2:
            results = []
            for index, (p, q) in enumerate(samples):
                results.append(_evaluate_pair(self._strategy, index, p, q))
                logger.debug(f"Sample {index}: {results[-1].value:.6f}")
            return results

        with ProcessPoolExecutor(max_workers=self.workers) as pool:
            futures = [
                pool.submit(_evaluate_pair, self._strategy, index, p, q)
                for index, (p, q) in enumerate(samples)
            ]
            return [future.result() for future in futures]

    def values(self, samples: Sequence[Tuple[object, object]]) -> np.ndarray:
        return np.asarray([e.value for e in self.evaluate_batch(samples)], dtype=float)
