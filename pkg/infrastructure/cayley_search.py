
"""
Breadth-first searches on lamplighter Cayley graphs.

Visited sets are keyed by the canonical byte encoding of each element.
"""
from typing import Dict, List, Optional, Sequence

from loguru import logger

from domain.entities import GenSet
from domain.exceptions import ModulusMismatchError
from domain.lamplighter import (
    lamp_inverse,
    lamp_multiply,
    symmetric_generators,
    word_lower_bound,
)
from domain.value_objects import LampElement


def ball(genset: GenSet, radius: int) -> Dict[LampElement, int]:
    """
    All elements of word length ≤ radius with their exact lengths.
    """
    generators = symmetric_generators(genset)
    identity = LampElement.identity(genset.m)
    lengths: Dict[bytes, int] = {identity.key: 0}
    elements: Dict[bytes, LampElement] = {identity.key: identity}
    frontier = [identity]
    for depth in range(1, radius + 1):
        layer = []
        for x in frontier:
            for s in generators:
                y = lamp_multiply(x, s)
                if y.key not in lengths:
                    lengths[y.key] = depth
                    elements[y.key] = y
                    layer.append(y)
        frontier = layer
        logger.debug(f"Ball layer {depth}: {len(layer)} new elements")
    return {elements[k]: d for k, d in lengths.items()}


def _expand(
    frontier: List[LampElement],
    depth: int,
    seen: Dict[bytes, int],
    generators: Sequence[LampElement],
    remaining_bound,
    cap: int
) -> List[LampElement]:
    layer = []
    for x in frontier:
        for s in generators:
            y = lamp_multiply(x, s)
            if y.key in seen:
                continue
            if depth + remaining_bound(y) > cap:
                continue
            seen[y.key] = depth
            layer.append(y)
    return layer


def word_length(genset: GenSet, g: LampElement, radius_cap: int) -> Optional[int]:
    """
    Exact word length of g, or None when it exceeds radius_cap.

    Bidirectional breadth-first search from the identity and from g, always
    expanding the smaller frontier by a full layer; nodes whose depth plus an
    admissible lower bound of the remaining distance exceeds the cap are
    pruned.
    """
    if radius_cap < 0:
        raise ValueError("radius_cap must be non-negative")
    if g.m != genset.m:
        raise ModulusMismatchError(f"Element uses Z/{g.m} but the generating set uses Z/{genset.m}")
    if g.is_identity():
        return 0
    generators = symmetric_generators(genset)
    # Give up early when even the lower bound exceeds the cap
    if word_lower_bound(generators, g) > radius_cap:
        return None

    identity = LampElement.identity(g.m)
    forward: Dict[bytes, int] = {identity.key: 0}
    backward: Dict[bytes, int] = {g.key: 0}
    forward_frontier, backward_frontier = [identity], [g]
    depth_f = depth_b = 0

    while forward_frontier and backward_frontier and depth_f + depth_b < radius_cap:
        # Grow the smaller frontier by one layer
        if len(forward_frontier) <= len(backward_frontier):
            depth_f += 1
            forward_frontier = _expand(
                forward_frontier, depth_f, forward, generators,
                lambda y: word_lower_bound(generators, lamp_multiply(lamp_inverse(y), g)),
                radius_cap,
            )
            meets = [depth_f + backward[y.key] for y in forward_frontier if y.key in backward]
        else:
            depth_b += 1
            backward_frontier = _expand(
                backward_frontier, depth_b, backward, generators,
                lambda y: word_lower_bound(generators, y),
                radius_cap,
            )
            meets = [depth_b + forward[y.key] for y in backward_frontier if y.key in forward]
        # Frontiers touched: the shortest meeting is the exact length
        if meets:
            best = min(meets)
            logger.debug(f"Search met at length {best} ({len(forward)} + {len(backward)} nodes)")
            return best

    logger.debug(f"Word length of {g} exceeds cap {radius_cap}")
    return None
