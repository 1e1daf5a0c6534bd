"""Combinatorial model of a convex point set.

Points are the indices 0..size-1 in counterclockwise order. Every geometric
predicate reduces to comparisons of cyclic positions, so no coordinates are
ever stored.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from itertools import combinations
from typing import Iterable, Iterator

from .errors import ChordError, ConfigError


@dataclass(frozen=True)
class ConvexConfig:
    size: int

    def __post_init__(self):
        if self.size < 2 or self.size % 2:
            raise ConfigError(f"point count must be even and >= 2 (got {self.size})")

    @property
    def n(self) -> int:
        return self.size // 2

    def succ(self, i: int) -> int:
        return (i + 1) % self.size

    def pred(self, i: int) -> int:
        return (i - 1) % self.size

    def ccw_walk(self, start: int, stop: int) -> list[int]:
        """Indices from start to stop inclusive, walking counterclockwise."""
        out = [start]
        i = start
        while i != stop:
            i = self.succ(i)
            out.append(i)
        return out

    def chord(self, a: int, b: int) -> "Chord":
        if not (0 <= a < self.size and 0 <= b < self.size):
            raise ChordError(f"chord {a}-{b} out of range for {self.size} points")
        return Chord.of(a, b)


@dataclass(frozen=True, order=True)
class Chord:
    a: int
    b: int

    def __post_init__(self):
        if self.a == self.b:
            raise ChordError(f"degenerate chord {self.a}-{self.b}")
        if self.a > self.b:
            raise ChordError(f"chord {self.a}-{self.b} is not normalized; use Chord.of")

    @classmethod
    def of(cls, a: int, b: int) -> "Chord":
        return cls(a, b) if a < b else cls(b, a)

    def other(self, p: int) -> int:
        if p == self.a:
            return self.b
        if p == self.b:
            return self.a
        raise ChordError(f"{p} is not an endpoint of {self}")

    def touches(self, p: int) -> bool:
        return p == self.a or p == self.b

    def __str__(self) -> str:
        return f"{self.a}-{self.b}"


class EdgeClass(str, Enum):
    PERIMETER_EVEN = "PerimeterEven"
    PERIMETER_ODD = "PerimeterOdd"
    DIAGONAL = "Diagonal"


def _check(config: ConvexConfig, e: Chord) -> None:
    if e.b >= config.size or e.a < 0:
        raise ChordError(f"chord {e} out of range for {config.size} points")


def in_open_arc(start: int, stop: int, x: int, size: int) -> bool:
    """True iff x lies strictly inside the counterclockwise arc start -> stop."""
    return 0 < (x - start) % size < (stop - start) % size


def chords_cross(config: ConvexConfig, e1: Chord, e2: Chord) -> bool:
    _check(config, e1)
    _check(config, e2)
    if e1.a in (e2.a, e2.b) or e1.b in (e2.a, e2.b):
        return False
    inside = (e1.a < e2.a < e1.b) + (e1.a < e2.b < e1.b)
    return inside == 1


def perimeter_start(config: ConvexConfig, e: Chord) -> int | None:
    """Index i with e = {i, i+1 mod size}, or None for a diagonal."""
    if e.b == e.a + 1:
        return e.a
    if e.a == 0 and e.b == config.size - 1:
        return config.size - 1
    return None


def classify_edge(config: ConvexConfig, e: Chord) -> EdgeClass:
    _check(config, e)
    start = perimeter_start(config, e)
    if start is None:
        return EdgeClass.DIAGONAL
    # size 2: the single chord 0-1 is its own wrap-around edge; label it even.
    return EdgeClass.PERIMETER_EVEN if start % 2 == 0 else EdgeClass.PERIMETER_ODD


def is_perimeter(config: ConvexConfig, e: Chord) -> bool:
    return perimeter_start(config, e) is not None


def is_diagonal(config: ConvexConfig, e: Chord) -> bool:
    return perimeter_start(config, e) is None


def perimeter_edge(config: ConvexConfig, i: int) -> Chord:
    return Chord.of(i % config.size, (i + 1) % config.size)


def is_noncrossing(config: ConvexConfig, edges: Iterable[Chord]) -> bool:
    items = list(edges)
    for e in items:
        _check(config, e)
    return not any(chords_cross(config, e1, e2) for e1, e2 in combinations(items, 2))


def crosses_any(config: ConvexConfig, e: Chord, edges: Iterable[Chord]) -> bool:
    return any(chords_cross(config, e, f) for f in edges)


def all_chords(config: ConvexConfig) -> Iterator[Chord]:
    for a in range(config.size):
        for b in range(a + 1, config.size):
            yield Chord(a, b)


def rotate_chord(config: ConvexConfig, e: Chord, shift: int) -> Chord:
    return Chord.of((e.a + shift) % config.size, (e.b + shift) % config.size)
