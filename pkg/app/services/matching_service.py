import logging
from bisect import bisect_left
from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property, lru_cache
from itertools import combinations
from typing import Iterable, Sequence

from app.core.convex import (
    Chord,
    ConvexConfig,
    EdgeClass,
    chords_cross,
    classify_edge,
    is_diagonal,
    perimeter_edge,
    perimeter_start,
    rotate_chord,
)
from app.core.errors import ChordError, ConfigError, MatchingParseError, SemicycleError

logger = logging.getLogger("matchloom.matching")


class Parity(str, Enum):
    EVEN = "even"
    ODD = "odd"

    @property
    def other(self) -> "Parity":
        return Parity.ODD if self is Parity.EVEN else Parity.EVEN

    @property
    def color(self) -> str:
        return "red" if self is Parity.EVEN else "blue"

    @classmethod
    def of_edge(cls, config: ConvexConfig, e: Chord) -> "Parity | None":
        klass = classify_edge(config, e)
        if klass is EdgeClass.PERIMETER_EVEN:
            return cls.EVEN
        if klass is EdgeClass.PERIMETER_ODD:
            return cls.ODD
        return None


@dataclass(frozen=True)
class PlaneMatching:
    """A non-crossing perfect matching, edges kept in canonical sorted order."""

    config: ConvexConfig
    edges: tuple[Chord, ...]

    def __post_init__(self):
        size = self.config.size
        seen: dict[int, int] = {}
        for pos, e in enumerate(self.edges):
            if e.b >= size:
                raise MatchingParseError(f"chord {e} out of range for {size} points", pos, "range")
            for p in (e.a, e.b):
                if p in seen:
                    raise MatchingParseError(f"point {p} matched twice", pos, "duplicate")
                seen[p] = pos
        if len(seen) != size:
            missing = sorted(set(range(size)) - set(seen))
            raise MatchingParseError(f"points {missing} are unmatched", None, "coverage")
        for (i, e1), (j, e2) in combinations(enumerate(self.edges), 2):
            if chords_cross(self.config, e1, e2):
                raise MatchingParseError(f"chords {e1} and {e2} cross", j, "crossing")
        if list(self.edges) != sorted(self.edges):
            object.__setattr__(self, "edges", tuple(sorted(self.edges)))

    @classmethod
    def of(cls, config: ConvexConfig, edges: Iterable[Chord]) -> "PlaneMatching":
        return cls(config, tuple(sorted(edges)))

    @cached_property
    def edge_set(self) -> frozenset[Chord]:
        return frozenset(self.edges)

    @cached_property
    def partner(self) -> tuple[int, ...]:
        out = [0] * self.config.size
        for e in self.edges:
            out[e.a] = e.b
            out[e.b] = e.a
        return tuple(out)

    @cached_property
    def diagonals(self) -> tuple[Chord, ...]:
        return tuple(e for e in self.edges if is_diagonal(self.config, e))

    @cached_property
    def perimeter_edges(self) -> tuple[Chord, ...]:
        return tuple(e for e in self.edges if not is_diagonal(self.config, e))

    def perimeter_of_parity(self, parity: Parity) -> tuple[Chord, ...]:
        return tuple(e for e in self.perimeter_edges if Parity.of_edge(self.config, e) is parity)

    def edge_at(self, p: int) -> Chord:
        return Chord.of(p, self.partner[p])

    def __contains__(self, e: Chord) -> bool:
        return e in self.edge_set

    def __str__(self) -> str:
        return format_matching(self)


def format_matching(matching: PlaneMatching) -> str:
    return ",".join(f"{e.a}-{e.b}" for e in matching.edges)


def parse_matching(text: str, points: int) -> PlaneMatching:
    """Parse ``a-b,c-d,...`` into a validated matching on ``points`` points."""
    try:
        config = ConvexConfig(points)
    except Exception as exc:
        raise MatchingParseError(str(exc), None, "points") from exc
    tokens = [t.strip() for t in text.split(",") if t.strip()]
    if not tokens:
        raise MatchingParseError("empty matching text", None, "coverage")
    chords: list[Chord] = []
    for pos, token in enumerate(tokens):
        parts = token.split("-")
        if len(parts) != 2 or not all(p.strip().isdigit() for p in parts):
            raise MatchingParseError(f"malformed chord {token!r}", pos, "syntax")
        a, b = (int(p) for p in parts)
        try:
            chords.append(config.chord(a, b))
        except ChordError as exc:
            raise MatchingParseError(str(exc), pos, "range") from exc
    if len(set(chords)) != len(chords):
        dup = next(i for i, c in enumerate(chords) if chords.index(c) != i)
        raise MatchingParseError(f"chord {chords[dup]} listed twice", dup, "duplicate")
    return PlaneMatching(config, tuple(chords))


def _matchings_on(lo: int, hi: int) -> list[list[Chord]]:
    if lo > hi:
        return [[]]
    out: list[list[Chord]] = []
    for q in range(lo + 1, hi + 1, 2):
        for inner in _matchings_on(lo + 1, q - 1):
            for outer in _matchings_on(q + 1, hi):
                out.append([Chord(lo, q), *inner, *outer])
    return out


@lru_cache(maxsize=None)
def _enumerate_cached(size: int) -> tuple[PlaneMatching, ...]:
    config = ConvexConfig(size)
    raw = sorted(tuple(sorted(edges)) for edges in _matchings_on(0, size - 1))
    logger.debug("Enumerated %d matchings on %d points", len(raw), size)
    return tuple(PlaneMatching(config, edges) for edges in raw)


def enumerate_matchings(config: ConvexConfig) -> list[PlaneMatching]:
    return list(_enumerate_cached(config.size))


def matching_index(matching: PlaneMatching) -> dict[PlaneMatching, int]:
    return {m: i for i, m in enumerate(_enumerate_cached(matching.config.size))}


def perimeter_matching(config: ConvexConfig, parity: Parity | str) -> PlaneMatching:
    parity = Parity(parity)
    start = 0 if parity is Parity.EVEN else 1
    return PlaneMatching.of(config, (perimeter_edge(config, i) for i in range(start, config.size, 2)))


def rotate_matching(matching: PlaneMatching, shift: int) -> PlaneMatching:
    """Relabel every point i as i + shift."""
    config = matching.config
    return PlaneMatching.of(config, (rotate_chord(config, e, shift) for e in matching.edges))


# ---------------------------------------------------------------------------
# semicycles and rotation


class SemicycleKind(str, Enum):
    INSIDE_CYCLE = "InsideCycle"
    SEMIEAR = "Semiear"


@dataclass(frozen=True)
class Semicycle:
    members: frozenset[Chord]
    boundary: tuple[Chord, ...]
    kind: SemicycleKind
    points: tuple[int, ...] = field(default=())

    @property
    def k(self) -> int:
        return len(self.members)

    @property
    def complement(self) -> frozenset[Chord]:
        """Boundary chords that are not members; they replace the members on rotation."""
        return frozenset(self.boundary) - self.members


def hull_boundary(points: Sequence[int]) -> tuple[Chord, ...]:
    ordered = sorted(set(points))
    if len(ordered) == 2:
        return (Chord(ordered[0], ordered[1]),)
    return tuple(Chord.of(ordered[i], ordered[(i + 1) % len(ordered)]) for i in range(len(ordered)))


def _build_semicycle(matching: PlaneMatching, members: frozenset[Chord]) -> Semicycle | None:
    config = matching.config
    points = sorted(p for e in members for p in (e.a, e.b))
    boundary = hull_boundary(points)
    boundary_set = set(boundary)
    if any(e not in boundary_set for e in members):
        return None
    # every other matching edge stays inside one pocket between hull points;
    # pockets 0 and len(points) are the same wrap-around gap
    for e in matching.edges:
        if e in members:
            continue
        if bisect_left(points, e.a) % len(points) != bisect_left(points, e.b) % len(points):
            return None
    diagonals = sum(1 for e in boundary if is_diagonal(config, e))
    kind = SemicycleKind.INSIDE_CYCLE if diagonals >= 2 else SemicycleKind.SEMIEAR
    return Semicycle(members=members, boundary=boundary, kind=kind, points=tuple(points))


def is_semicycle(matching: PlaneMatching, members: Iterable[Chord]) -> Semicycle | None:
    x = frozenset(members)
    if not x <= matching.edge_set:
        raise SemicycleError(f"edges {sorted(map(str, x - matching.edge_set))} are not in the matching")
    if len(x) < 2:
        raise SemicycleError("a semicycle needs at least two matching edges")
    return _build_semicycle(matching, x)


def rotate(matching: PlaneMatching, semicycle: Semicycle) -> PlaneMatching:
    checked = _build_semicycle(matching, semicycle.members) if semicycle.members <= matching.edge_set else None
    if checked is None or checked.boundary != semicycle.boundary:
        raise SemicycleError("rotation needs a valid semicycle of the matching")
    kept = matching.edge_set - semicycle.members
    return PlaneMatching.of(matching.config, kept | semicycle.complement)


def rotate_all(matching: PlaneMatching, semicycles: Iterable[Semicycle]) -> PlaneMatching:
    """Rotate pairwise disjoint semicycles simultaneously."""
    current = matching
    for sc in semicycles:
        current = rotate(current, sc)
    return current


def reverse_semicycle(after: PlaneMatching, semicycle: Semicycle) -> Semicycle:
    """The semicycle of the rotated matching whose rotation undoes ``semicycle``."""
    back = is_semicycle(after, semicycle.complement)
    if back is None:
        raise SemicycleError("rotation is not reversible; complement is not a semicycle")
    return back


@lru_cache(maxsize=4096)
def all_semicycles(matching: PlaneMatching) -> tuple[Semicycle, ...]:
    edges = matching.edges
    out: list[Semicycle] = []
    for k in range(2, len(edges) + 1):
        for subset in combinations(edges, k):
            sc = _build_semicycle(matching, frozenset(subset))
            if sc is not None:
                out.append(sc)
    return tuple(out)


def inside_cycles(matching: PlaneMatching) -> list[Semicycle]:
    return [sc for sc in all_semicycles(matching) if sc.kind is SemicycleKind.INSIDE_CYCLE]


def semicycles_disjoint(a: Semicycle, b: Semicycle) -> bool:
    """True when the two hulls share no point and do not interleave around the polygon."""
    if set(a.points) & set(b.points):
        return False
    pockets = {bisect_left(a.points, p) % len(a.points) for p in b.points}
    return len(pockets) == 1


def pick_disjoint(cycles: Iterable[Semicycle]) -> list[Semicycle]:
    """Greedily keep each cycle that is disjoint from every cycle kept so far."""
    chosen: list[Semicycle] = []
    for sc in cycles:
        if all(semicycles_disjoint(sc, other) for other in chosen):
            chosen.append(sc)
    return chosen


def inside_cycle_neighbors(matching: PlaneMatching) -> list[tuple[Semicycle, PlaneMatching]]:
    """Every matching reachable by rotating one inside cycle."""
    return [(sc, rotate(matching, sc)) for sc in inside_cycles(matching)]


# ---------------------------------------------------------------------------
# dual tree


@dataclass(frozen=True)
class Face:
    points: tuple[int, ...]
    diagonals: tuple[Chord, ...]
    perimeter_edges: tuple[Chord, ...]
    gap_edges: tuple[Chord, ...]
    color: Parity

    @property
    def m_edges(self) -> frozenset[Chord]:
        return frozenset(self.diagonals) | frozenset(self.perimeter_edges)

    @property
    def is_leaf(self) -> bool:
        return len(self.diagonals) <= 1

    @property
    def is_inside_cycle(self) -> bool:
        return len(self.diagonals) >= 2


@dataclass(frozen=True)
class DualTree:
    nodes: tuple[Face, ...]
    adjacency: tuple[tuple[int, int], ...]

    @property
    def leaves(self) -> list[int]:
        return [i for i, face in enumerate(self.nodes) if face.is_leaf]

    @property
    def inner(self) -> list[int]:
        return [i for i, face in enumerate(self.nodes) if not face.is_leaf]

    def leaf_counts(self) -> tuple[int, int]:
        """(blue, red) leaf counts."""
        blue = sum(1 for i in self.leaves if self.nodes[i].color is Parity.ODD)
        return blue, len(self.leaves) - blue

    def neighbours(self, node: int) -> list[int]:
        return [b if a == node else a for a, b in self.adjacency if node in (a, b)]


def _split_faces(config: ConvexConfig, diagonals: Sequence[Chord]) -> list[list[int]]:
    faces = [list(range(config.size))]
    for d in diagonals:
        idx = next(i for i, f in enumerate(faces) if d.a in f and d.b in f)
        face = faces.pop(idx)
        inside = [p for p in face if d.a <= p <= d.b]
        outside = [p for p in face if p <= d.a or p >= d.b]
        faces.extend([inside, outside])
    return faces


@lru_cache(maxsize=4096)
def dual_tree(matching: PlaneMatching) -> DualTree:
    config = matching.config
    nodes: list[Face] = []
    for pts in _split_faces(config, matching.diagonals):
        sides = hull_boundary(pts)
        diagonals = tuple(e for e in sides if is_diagonal(config, e))
        perim = tuple(e for e in sides if not is_diagonal(config, e) and e in matching.edge_set)
        gaps = tuple(e for e in sides if not is_diagonal(config, e) and e not in matching.edge_set)
        if gaps:
            color = Parity.of_edge(config, gaps[0]).other
        else:
            color = Parity.of_edge(config, perim[0]) if perim else Parity.EVEN
        nodes.append(Face(tuple(pts), diagonals, perim, gaps, color))
    adjacency = []
    for i, j in combinations(range(len(nodes)), 2):
        if set(nodes[i].diagonals) & set(nodes[j].diagonals):
            adjacency.append((i, j))
    return DualTree(tuple(nodes), tuple(adjacency))


def semiears(matching: PlaneMatching) -> list[Semicycle]:
    tree = dual_tree(matching)
    out = []
    for i in tree.leaves:
        sc = _build_semicycle(matching, tree.nodes[i].m_edges)
        if sc is not None:
            out.append(sc)
    return out


def semiear_parities(matching: PlaneMatching) -> list[Parity]:
    tree = dual_tree(matching)
    return [tree.nodes[i].color for i in tree.leaves]


# ---------------------------------------------------------------------------
# matching classes


class MatchingClass(str, Enum):
    PERIMETER_EVEN = "PerimeterEven"
    PERIMETER_ODD = "PerimeterOdd"
    TWO_SEMIEAR_EVEN = "TwoSemiearEven"
    TWO_SEMIEAR_ODD = "TwoSemiearOdd"
    NEAR_TWO_SEMIEAR_EVEN = "NearTwoSemiearEven"
    NEAR_TWO_SEMIEAR_ODD = "NearTwoSemiearOdd"
    OTHER = "Other"

    @property
    def parity(self) -> Parity | None:
        if self is MatchingClass.OTHER:
            return None
        return Parity.EVEN if self.value.endswith("Even") else Parity.ODD

    @property
    def is_two_semiear(self) -> bool:
        return self in (MatchingClass.TWO_SEMIEAR_EVEN, MatchingClass.TWO_SEMIEAR_ODD)

    @property
    def is_near_two_semiear(self) -> bool:
        return self in (MatchingClass.NEAR_TWO_SEMIEAR_EVEN, MatchingClass.NEAR_TWO_SEMIEAR_ODD)


_CLASS_BY_PARITY = {
    ("perimeter", Parity.EVEN): MatchingClass.PERIMETER_EVEN,
    ("perimeter", Parity.ODD): MatchingClass.PERIMETER_ODD,
    ("two", Parity.EVEN): MatchingClass.TWO_SEMIEAR_EVEN,
    ("two", Parity.ODD): MatchingClass.TWO_SEMIEAR_ODD,
    ("near", Parity.EVEN): MatchingClass.NEAR_TWO_SEMIEAR_EVEN,
    ("near", Parity.ODD): MatchingClass.NEAR_TWO_SEMIEAR_ODD,
}


def classify_matching(matching: PlaneMatching) -> MatchingClass:
    config = matching.config
    if not matching.diagonals:
        return _CLASS_BY_PARITY[("perimeter", Parity.of_edge(config, matching.edges[0]))]
    tree = dual_tree(matching)
    inner = tree.inner
    if len(inner) != 1:
        return MatchingClass.OTHER
    center = tree.nodes[inner[0]]
    leaves = [tree.nodes[i] for i in tree.leaves]
    k = len(leaves)
    if k < 2 or len(center.diagonals) != k:
        return MatchingClass.OTHER
    if any(len(leaf.diagonals) != 1 or len(leaf.perimeter_edges) != 1 for leaf in leaves):
        return MatchingClass.OTHER
    parity = leaves[0].color
    if config.size == 4 * k and not center.perimeter_edges:
        return _CLASS_BY_PARITY[("two", parity)]
    if config.size == 4 * k + 2 and len(center.perimeter_edges) == 1:
        return _CLASS_BY_PARITY[("near", parity)]
    return MatchingClass.OTHER


def two_semiear_matching(config: ConvexConfig, parity: Parity | str) -> PlaneMatching:
    """The (near-)2-semiear matching whose ears start at point 0 or 1."""
    parity = Parity(parity)
    size = config.size
    if size < 8:
        raise ConfigError(f"no 2-semiear matching on {size} points")
    shift = 1 if parity is Parity.EVEN else 0
    ears = size // 4
    edges: list[Chord] = []
    for j in range(ears):
        base = 4 * j + shift
        edges.append(Chord.of(base % size, (base + 3) % size))
        edges.append(Chord.of((base + 1) % size, (base + 2) % size))
    used = {p for e in edges for p in (e.a, e.b)}
    rest = [p for p in range(size) if p not in used]
    if rest:
        edges.append(Chord.of(*rest))
    return PlaneMatching.of(config, edges)


def shared_perimeter_edges(m1: PlaneMatching, m2: PlaneMatching) -> list[Chord]:
    return sorted(set(m1.perimeter_edges) & set(m2.perimeter_edges))


# ---------------------------------------------------------------------------
# symmetric difference


class CycleTag(str, Enum):
    INSIDE_CYCLE = "InsideCycle"
    EAR = "Ear"
    CROSSING = "Crossing"


@dataclass(frozen=True)
class SymDiffCycle:
    edges: tuple[Chord, ...]
    tag: CycleTag
    semicycle: Semicycle | None = None

    @property
    def points(self) -> tuple[int, ...]:
        return tuple(sorted({p for e in self.edges for p in (e.a, e.b)}))

    @property
    def first_edges(self) -> frozenset[Chord]:
        return frozenset(self.edges[0::2])

    @property
    def second_edges(self) -> frozenset[Chord]:
        return frozenset(self.edges[1::2])


@dataclass(frozen=True)
class SymDiffStructure:
    common: frozenset[Chord]
    cycles: tuple[SymDiffCycle, ...]


def require_same_config(m1: PlaneMatching, m2: PlaneMatching) -> None:
    if m1.config != m2.config:
        raise ConfigError(f"matchings live on {m1.config.size} and {m2.config.size} points")


def sym_diff_structure(m1: PlaneMatching, m2: PlaneMatching) -> SymDiffStructure:
    require_same_config(m1, m2)
    config = m1.config
    common = m1.edge_set & m2.edge_set
    only1 = m1.edge_set - common
    seen: set[int] = set()
    cycles: list[SymDiffCycle] = []
    for start_edge in sorted(only1):
        if start_edge.a in seen:
            continue
        walk: list[Chord] = []
        p = start_edge.a
        use_first = True
        while True:
            e = m1.edge_at(p) if use_first else m2.edge_at(p)
            walk.append(e)
            seen.update((e.a, e.b))
            p = e.other(p)
            use_first = not use_first
            if p == start_edge.a and use_first:
                break
        crossing = any(chords_cross(config, e, f) for e, f in combinations(walk, 2))
        sc = None if crossing else _build_semicycle(m1, frozenset(walk[0::2]))
        if sc is None or set(sc.boundary) != set(walk):
            tag = CycleTag.CROSSING
            sc = None
        elif sc.kind is SemicycleKind.INSIDE_CYCLE:
            tag = CycleTag.INSIDE_CYCLE
        else:
            tag = CycleTag.EAR
        cycles.append(SymDiffCycle(tuple(walk), tag, sc))
    return SymDiffStructure(common=frozenset(common), cycles=tuple(cycles))


@dataclass(frozen=True)
class BoundaryArea:
    points: tuple[int, ...]
    bounding_edges: tuple[Chord, ...]

    @property
    def k(self) -> int:
        return len(self.points)


def boundary_areas(m1: PlaneMatching, m2: PlaneMatching) -> list[BoundaryArea]:
    """Runs of consecutive points whose perimeter edges alternate between the two
    matchings and whose two closing diagonals cross."""
    require_same_config(m1, m2)
    config = m1.config
    size = config.size
    diff = m1.edge_set ^ m2.edge_set
    in_run = [perimeter_edge(config, i) in diff for i in range(size)]
    if all(in_run) or not any(in_run):
        return []
    start = in_run.index(False)
    areas: list[BoundaryArea] = []
    j = (start + 1) % size
    while j != start:
        if not in_run[j]:
            j = (j + 1) % size
            continue
        first = j
        run: list[Chord] = []
        while in_run[j]:
            run.append(perimeter_edge(config, j))
            j = (j + 1) % size
        closing = [
            (m2 if run[0] in m1.edge_set else m1).edge_at(first),
            (m2 if run[-1] in m1.edge_set else m1).edge_at(j),
        ]
        if chords_cross(config, closing[0], closing[1]):
            areas.append(BoundaryArea(tuple(config.ccw_walk(first, j)), (closing[0], *run, closing[1])))
    return areas
