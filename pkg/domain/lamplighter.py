
"""
Wreath-product arithmetic in Z/m ≀ Z and the explicit words used as upper
witnesses for word lengths.

An element is a pair (f, c) of a lighting function and a cursor, with

    (f, c) · (g, d) = (f + g(· − c), c + d)

so right multiplication by t moves the cursor and by a changes the lamp
under the cursor.
"""
import math
from typing import Iterable, List, Sequence, Tuple

from .entities import GenSet
from .exceptions import ModulusMismatchError
from .value_objects import LampElement


def lamp_multiply(g: LampElement, h: LampElement) -> LampElement:
    """Wreath product g · h."""
    if g.m != h.m:
        raise ModulusMismatchError(f"Cannot multiply elements of Z/{g.m} and Z/{h.m} lamplighters")
    if not h.colors:
        return LampElement(g.m, g.offset, g.colors, g.cursor + h.cursor)
    if not g.colors:
        return LampElement(g.m, h.offset + g.cursor, h.colors, g.cursor + h.cursor)
    shifted = h.offset + g.cursor
    low = min(g.offset, shifted)
    high = max(g.offset + len(g.colors), shifted + len(h.colors))
    colors = [0] * (high - low)
    for i, c in enumerate(g.colors):
        colors[g.offset - low + i] = c
    for i, c in enumerate(h.colors):
        j = shifted - low + i
        colors[j] = (colors[j] + c) % g.m
    return LampElement(g.m, low, tuple(colors), g.cursor + h.cursor)


def lamp_inverse(g: LampElement) -> LampElement:
    """(f, c)⁻¹ = (−f(· + c), −c)."""
    return LampElement(g.m, g.offset - g.cursor, tuple(-c for c in g.colors), -g.cursor)


def lamp_power(g: LampElement, n: int) -> LampElement:
    if n < 0:
        return lamp_power(lamp_inverse(g), -n)
    result, base = LampElement.identity(g.m), g
    while n:
        if n & 1:
            result = lamp_multiply(result, base)
        base = lamp_multiply(base, base)
        n >>= 1
    return result


def evaluate_word(m: int, letters: Iterable[LampElement]) -> LampElement:
    """Product of the letters from left to right."""
    result = LampElement.identity(m)
    for letter in letters:
        result = lamp_multiply(result, letter)
    return result


def lamp_a(m: int) -> LampElement:
    """Generator a: light the lamp under the cursor by one."""
    return LampElement(m, 0, (1,), 0)


def lamp_t(m: int) -> LampElement:
    """Generator t: move the cursor one step right."""
    return LampElement(m, cursor=1)


def wreath_generators(m: int) -> GenSet:
    return GenSet("wreath", (lamp_a(m), lamp_t(m)))


def automaton_generators(m: int) -> GenSet:
    return GenSet("automaton", (lamp_t(m), lamp_multiply(lamp_t(m), lamp_a(m))))


def symmetric_generators(genset: GenSet) -> Tuple[LampElement, ...]:
    """Generators together with their inverses, without duplicates, in a fixed order."""
    seen = {}
    for g in genset.generators:
        for s in (g, lamp_inverse(g)):
            seen.setdefault(s.key, s)
    return tuple(seen.values())


def conjugate_element(m: int, n: int) -> LampElement:
    """tⁿ a t⁻ⁿ: a single lit lamp at position n, cursor back at 0."""
    return LampElement.from_lights(m, {n: 1}, 0)


def staircase_element(m: int, n: int) -> LampElement:
    """(ta)ⁿ: lamps 1..n lit, cursor at n."""
    return LampElement.from_lights(m, {i: 1 for i in range(1, n + 1)}, n)


def conjugate_word_wreath(m: int, n: int) -> List[LampElement]:
    """tⁿ a t⁻ⁿ over {a, t}, of length 2n + 1."""
    t = lamp_t(m)
    return [t] * n + [lamp_a(m)] + [lamp_inverse(t)] * n


def conjugate_word_automaton(m: int, n: int) -> List[LampElement]:
    """(ta)ⁿ t⁻¹ (ta)^{−(n−1)} over {t, ta}, of length 2n (n ≥ 1)."""
    t = lamp_t(m)
    ta = lamp_multiply(t, lamp_a(m))
    return [ta] * n + [lamp_inverse(t)] + [lamp_inverse(ta)] * (n - 1)


def staircase_word_wreath(m: int, n: int) -> List[LampElement]:
    """(ta)ⁿ spelled over {a, t}, of length 2n."""
    return [lamp_t(m), lamp_a(m)] * n


def staircase_word_automaton(m: int, n: int) -> List[LampElement]:
    """(ta)ⁿ over {t, ta}, of length n."""
    return [lamp_multiply(lamp_t(m), lamp_a(m))] * n


def cursor_walk_length(support: Sequence[int], cursor: int) -> int:
    """
    Shortest walk on Z from 0 to cursor visiting every position in support.
    """
    low = min([0, cursor, *support])
    high = max([0, cursor, *support])
    left_first = -low + (high - low) + (high - cursor)
    right_first = high + (high - low) + (cursor - low)
    return min(left_first, right_first)


def _is_local(s: LampElement) -> bool:
    """Moves at most one step and only touches lamps the cursor occupies."""
    return abs(s.cursor) <= 1 and all(p in (0, s.cursor) for p in s.support())


def word_lower_bound(generators: Sequence[LampElement], g: LampElement) -> int:
    """
    Admissible lower bound on the word length of g.

    For local generators every lit lamp lies on the cursor trajectory; when
    only stationary generators change lamps, each lit lamp costs at least
    min(c, m − c) of them on top of the walk.
    """
    if all(_is_local(s) for s in generators):
        bound = cursor_walk_length(g.support(), g.cursor)
        moving_lights = any(s.cursor != 0 and s.colors for s in generators)
        if not moving_lights:
            step = max((min(c, s.m - c) for s in generators if s.cursor == 0 for c in s.colors), default=1)
            bound += sum(math.ceil(min(c, g.m - c) / step) for c in g.colors if c)
        return bound
    max_step = max(abs(s.cursor) for s in generators)
    return math.ceil(abs(g.cursor) / max_step) if max_step else 0
