"""Disjoint compatibility deciders, witness validation and obstruction certificates."""
import logging
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, NamedTuple

import networkx as nx

from app.core.convex import Chord, ConvexConfig, all_chords, chords_cross, crosses_any, is_noncrossing
from app.core.config import settings
from app.core.errors import ConstructionError, MatchLoomError, SizeLimitError
from app.services.matching_service import (
    CycleTag,
    PlaneMatching,
    boundary_areas,
    classify_matching,
    require_same_config,
    semiears,
    shared_perimeter_edges,
    sym_diff_structure,
)

logger = logging.getLogger("matchloom.compat")


class WitnessKind(str, Enum):
    PATH = "Path"
    ONE_LEGGED = "OneLeggedCaterpillar"
    CATERPILLAR = "Caterpillar"
    TREE = "Tree"

    @property
    def rank(self) -> int:
        return _RANK[self]

    def admits(self, other: "WitnessKind") -> bool:
        """True iff every drawing of kind ``other`` also belongs to this family."""
        return other.rank <= self.rank

    @classmethod
    def parse(cls, name: "str | WitnessKind") -> "WitnessKind":
        if isinstance(name, WitnessKind):
            return name
        key = name.strip().lower().replace("-", "").replace("_", "")
        try:
            return _ALIASES[key]
        except KeyError:
            raise MatchLoomError(f"unknown family {name!r}") from None


_RANK = {WitnessKind.PATH: 0, WitnessKind.ONE_LEGGED: 1, WitnessKind.CATERPILLAR: 2, WitnessKind.TREE: 3}
_ALIASES = {
    "tree": WitnessKind.TREE,
    "t": WitnessKind.TREE,
    "caterpillar": WitnessKind.CATERPILLAR,
    "c": WitnessKind.CATERPILLAR,
    "onelegged": WitnessKind.ONE_LEGGED,
    "oneleggedcaterpillar": WitnessKind.ONE_LEGGED,
    "c3": WitnessKind.ONE_LEGGED,
    "path": WitnessKind.PATH,
    "p": WitnessKind.PATH,
}


@dataclass(frozen=True)
class Witness:
    kind: WitnessKind
    edges: tuple[Chord, ...]

    @classmethod
    def of(cls, kind: WitnessKind, edges: Iterable[Chord]) -> "Witness":
        return cls(kind, tuple(sorted(set(edges))))

    def __str__(self) -> str:
        return ",".join(str(e) for e in self.edges)


def _graph(points: Iterable[int], edges: Iterable[Chord]) -> nx.Graph:
    graph = nx.Graph()
    graph.add_nodes_from(points)
    graph.add_edges_from((e.a, e.b) for e in edges)
    return graph


def _is_caterpillar(graph: nx.Graph) -> bool:
    deg = dict(graph.degree())
    return all(sum(1 for u in graph.neighbors(v) if deg[u] >= 2) <= 2 for v in graph.nodes)


def classify_drawing(config: ConvexConfig, edges: Iterable[Chord]) -> WitnessKind | None:
    """Most specific family of a plane tree; None when the edges are not a plane tree."""
    edges = list(edges)
    if not is_noncrossing(config, edges):
        return None
    points = {p for e in edges for p in (e.a, e.b)}
    graph = _graph(points, edges)
    if not points or not nx.is_tree(graph):
        return None
    max_degree = max(d for _, d in graph.degree())
    if max_degree <= 2:
        return WitnessKind.PATH
    if not _is_caterpillar(graph):
        return WitnessKind.TREE
    return WitnessKind.ONE_LEGGED if max_degree <= 3 else WitnessKind.CATERPILLAR


def validate_witness(
    config: ConvexConfig,
    witness: Witness,
    matchings: Iterable[PlaneMatching],
    span: Iterable[int] | None = None,
) -> list[str]:
    """Violated witness invariants; an empty list means the drawing is valid."""
    problems: list[str] = []
    edges = list(witness.edges)
    required = set(range(config.size)) if span is None else set(span)
    if len(set(edges)) != len(edges):
        problems.append("duplicate edges")
    if any(e.b >= config.size for e in edges):
        problems.append("edge out of range")
        return problems
    if not is_noncrossing(config, edges):
        problems.append("drawing is not plane")
    touched = {p for e in edges for p in (e.a, e.b)}
    if touched != required and not (len(required) == 1 and not edges):
        problems.append(f"does not span exactly {sorted(required)}")
    if len(edges) != len(required) - 1:
        problems.append(f"has {len(edges)} edges, expected {len(required) - 1}")
    if edges and not nx.is_connected(_graph(required | touched, edges)):
        problems.append("not connected")
    for m in matchings:
        shared = [e for e in edges if e in m.edge_set]
        if shared:
            problems.append(f"shares {', '.join(map(str, shared))} with {m}")
        crossing = [e for e in edges if crosses_any(config, e, m.edges)]
        if crossing:
            problems.append(f"{', '.join(map(str, crossing))} cross {m}")
    if not problems:
        family = classify_drawing(config, edges)
        if family is None or not witness.kind.admits(family):
            problems.append(f"drawing is {family.value if family else 'not a tree'}, not {witness.kind.value}")
    return problems


def check_witness(config: ConvexConfig, witness: Witness, matchings: Iterable[PlaneMatching], span=None) -> Witness:
    problems = validate_witness(config, witness, list(matchings), span)
    if problems:
        logger.error("Invalid %s witness %s: %s", witness.kind.value, witness, "; ".join(problems))
        raise ConstructionError(f"invalid {witness.kind.value} witness: {'; '.join(problems)}")
    return witness


def allowed_edges(m1: PlaneMatching, m2: PlaneMatching) -> set[Chord]:
    require_same_config(m1, m2)
    config = m1.config
    forbidden = m1.edge_set | m2.edge_set
    out = set()
    for a in range(config.size):
        for b in range(a + 1, config.size):
            e = Chord(a, b)
            if e in forbidden:
                continue
            if not any(chords_cross(config, e, f) for f in forbidden):
                out.add(e)
    return out


def tree_prefilter(m1: PlaneMatching, m2: PlaneMatching) -> bool:
    """Connectivity of the allowed-edge graph, a necessary condition for a tree witness."""
    graph = _graph(range(m1.config.size), allowed_edges(m1, m2))
    return nx.is_connected(graph)


# ---------------------------------------------------------------------------
# exact deciders
#
# A plane tree on the arc [a..b] splits at the largest neighbour m of a into a
# tree on [a..m] containing the chord a-m and a tree on [m..b]. A tree on
# [a..m] containing a-m splits, once that chord is removed, into trees on
# [a..k] and [k+1..m]. Only the two endpoints of a piece can receive further
# edges, so family constraints are carried as a small signature per piece.


class _Family(NamedTuple):
    max_degree: int | None
    caterpillar: bool


_FAMILIES = {
    WitnessKind.TREE: _Family(None, False),
    WitnessKind.CATERPILLAR: _Family(None, True),
    WitnessKind.ONE_LEGGED: _Family(3, True),
    WitnessKind.PATH: _Family(2, False),
}


class _Sig(NamedTuple):
    dx: int  # degree of the left endpoint inside the piece (capped)
    nx: int  # interior neighbours of the left endpoint that are non-leaves
    fx: bool  # left endpoint must stay a leaf
    dy: int
    ny: int
    fy: bool
    adj: bool  # chord between the two endpoints is in the piece
    pair: bool  # at most one endpoint may become a non-leaf


_POINT = _Sig(0, 0, False, 0, 0, False, False, False)


def _cap(fam: _Family, d: int) -> int | None:
    if fam.max_degree is not None:
        return d if d <= fam.max_degree else None
    return min(d, 2)


def _norm(fam: _Family, sig: _Sig) -> _Sig:
    if fam.max_degree is None and not fam.caterpillar:
        return _POINT
    if not fam.caterpillar:
        return _Sig(sig.dx, 0, False, sig.dy, 0, False, sig.adj, False)
    return sig._replace(pair=sig.pair and sig.dx <= 1 and sig.dy <= 1)


def _close_edge(fam: _Family, left: _Sig, right: _Sig, left_point: bool, right_point: bool) -> _Sig | None:
    """Combine pieces [a..k] and [k+1..m] with the chord a-m; k and k+1 become final."""
    plain = fam.max_degree is None and not fam.caterpillar
    if plain:
        return _POINT
    if left_point:
        dx, nx_, fx = 1, 0, False
    else:
        dx = _cap(fam, left.dx + 1)
        if dx is None or left.fx:
            return None
        nx_ = left.nx
        if fam.caterpillar:
            k_leaf = left.dy <= 1
            if (left.fy or left.pair) and not k_leaf:
                return None
            if left.ny + left.adj > 2:
                return None
            nx_ += 1 if left.adj and not k_leaf else 0
            if nx_ > 2:
                return None
        fx = False
    if right_point:
        dy, ny_, fy = 1, 0, False
    else:
        dy = _cap(fam, right.dy + 1)
        if dy is None or right.fy:
            return None
        ny_ = right.ny
        if fam.caterpillar:
            k1_leaf = right.dx <= 1
            if (right.fx or right.pair) and not k1_leaf:
                return None
            if right.nx + right.adj > 2:
                return None
            ny_ += 1 if right.adj and not k1_leaf else 0
            if ny_ > 2:
                return None
        fy = False
    return _norm(fam, _Sig(dx, nx_, fx, dy, ny_, fy, True, False))


def _join(fam: _Family, head: _Sig, tail: _Sig) -> _Sig | None:
    """Glue [a..m] (containing a-m) to [m..b] at m; m becomes final."""
    if fam.max_degree is None and not fam.caterpillar:
        return _POINT
    deg_m = head.dy + tail.dx
    if fam.max_degree is not None and deg_m > fam.max_degree:
        return None
    if head.fy or tail.fx:
        return None
    fx, fy, pair = head.fx, tail.fy, False
    nx_, ny_ = head.nx, tail.ny
    if fam.caterpillar:
        known = head.ny + tail.nx
        open_a = head.dx <= 1
        open_b = tail.adj and tail.dy <= 1
        known += (not open_a) + (tail.adj and not open_b)
        if known > 2:
            return None
        if known == 2:
            fx = fx or open_a
            fy = fy or open_b
        elif known == 1 and open_a and open_b:
            pair = True
        if tail.pair:
            fy = True
        nx_ = head.nx + 1
        ny_ = tail.ny + (1 if tail.adj else 0)
        if nx_ > 2 or ny_ > 2:
            return None
    return _norm(fam, _Sig(head.dx, nx_, fx, tail.dy, ny_, fy, False, pair))


def _final_ok(fam: _Family, sig: _Sig) -> bool:
    if (sig.fx and sig.dx >= 2) or (sig.fy and sig.dy >= 2):
        return False
    if not fam.caterpillar:
        return True
    if sig.nx + (sig.adj and sig.dy >= 2) > 2:
        return False
    if sig.ny + (sig.adj and sig.dx >= 2) > 2:
        return False
    return not (sig.pair and sig.dx >= 2 and sig.dy >= 2)


class _Tables:
    """Interval tables for one decider call; nothing is shared between calls."""

    def __init__(self, size: int, allowed: set[Chord], kind: WitnessKind):
        self.size = size
        self.fam = _FAMILIES[kind]
        self.ok = [[False] * size for _ in range(size)]
        for e in allowed:
            self.ok[e.a][e.b] = True
        self.s: dict[tuple[int, int], dict[_Sig, tuple]] = {}
        self.e: dict[tuple[int, int], dict[_Sig, tuple]] = {}

    def fill(self) -> None:
        fam, size = self.fam, self.size
        for a in range(size):
            self.s[(a, a)] = {_POINT: ()}
        for length in range(1, size):
            for a in range(size - length):
                b = a + length
                e_tab: dict[_Sig, tuple] = {}
                if self.ok[a][b]:
                    for k in range(a, b):
                        left_tab, right_tab = self.s[(a, k)], self.s[(k + 1, b)]
                        if not left_tab or not right_tab:
                            continue
                        for ls in left_tab:
                            for rs in right_tab:
                                sig = _close_edge(fam, ls, rs, k == a, k + 1 == b)
                                if sig is not None and sig not in e_tab:
                                    e_tab[sig] = (k, ls, rs)
                self.e[(a, b)] = e_tab
                s_tab: dict[_Sig, tuple] = {sig: (b, sig, None) for sig in e_tab}
                for m in range(a + 1, b):
                    head_tab, tail_tab = self.e[(a, m)], self.s[(m, b)]
                    if not head_tab or not tail_tab:
                        continue
                    for hs in head_tab:
                        for ts in tail_tab:
                            sig = _join(fam, hs, ts)
                            if sig is not None and sig not in s_tab:
                                s_tab[sig] = (m, hs, ts)
                self.s[(a, b)] = s_tab

    def root(self) -> _Sig | None:
        for sig in self.s[(0, self.size - 1)]:
            if _final_ok(self.fam, sig):
                return sig
        return None

    def edges(self, sig: _Sig) -> list[Chord]:
        out: list[Chord] = []
        stack = [("s", 0, self.size - 1, sig)]
        while stack:
            what, a, b, cur = stack.pop()
            if what == "s":
                if a == b:
                    continue
                m, hs, ts = self.s[(a, b)][cur]
                stack.append(("e", a, m, hs))
                if ts is not None:
                    stack.append(("s", m, b, ts))
            else:
                k, ls, rs = self.e[(a, b)][cur]
                out.append(Chord(a, b))
                stack.append(("s", a, k, ls))
                stack.append(("s", k + 1, b, rs))
        return out


def exists_witness(m1: PlaneMatching, m2: PlaneMatching, kind: WitnessKind | str = WitnessKind.TREE) -> Witness | None:
    kind = WitnessKind.parse(kind)
    require_same_config(m1, m2)
    config = m1.config
    allowed = allowed_edges(m1, m2)
    if len(allowed) < config.size - 1:
        return None
    tables = _Tables(config.size, allowed, kind)
    tables.fill()
    sig = tables.root()
    if sig is None:
        logger.debug("No %s witness for %s | %s", kind.value, m1, m2)
        return None
    witness = Witness.of(kind, tables.edges(sig))
    return check_witness(config, witness, (m1, m2))


def is_compatible(m1: PlaneMatching, m2: PlaneMatching, kind: WitnessKind | str = WitnessKind.TREE) -> bool:
    return exists_witness(m1, m2, kind) is not None


# ---------------------------------------------------------------------------
# obstructions


class ObstructionKind(str, Enum):
    THREE_SEMIEARS = "ThreeSemiears"
    SHARED_PERIMETER_DEFICIT = "SharedPerimeterDeficit"
    EAR = "EarObstruction"
    BOUNDARY_AREA = "BoundaryAreaObstruction"
    TWO_SEMIEAR_PARITY = "TwoSemiearParity"
    NEAR_TWO_SEMIEAR_PARITY = "NearTwoSemiearParity"


@dataclass(frozen=True)
class Obstruction:
    kind: ObstructionKind
    evidence: tuple[Chord, ...] = ()
    points: tuple[int, ...] = ()
    detail: str = ""


def _parity_obstruction(host: PlaneMatching, other: PlaneMatching) -> Obstruction | None:
    klass = classify_matching(host)
    parity = klass.parity
    if parity is None or not (klass.is_two_semiear or klass.is_near_two_semiear):
        return None
    wrong = set(other.perimeter_of_parity(parity.other))
    if klass.is_two_semiear and wrong:
        return Obstruction(
            ObstructionKind.TWO_SEMIEAR_PARITY,
            tuple(sorted(wrong)),
            detail=f"{host} is {klass.value}; other matching has {parity.other.value} perimeter edges",
        )
    if klass.is_near_two_semiear:
        allowed = set(host.perimeter_of_parity(parity.other))
        extra = wrong - allowed
        if extra:
            return Obstruction(
                ObstructionKind.NEAR_TWO_SEMIEAR_PARITY,
                tuple(sorted(extra)),
                detail=f"{host} is {klass.value}; extra {parity.other.value} perimeter edges",
            )
    return None


def find_obstruction(
    m1: PlaneMatching, m2: PlaneMatching, kind: WitnessKind | str = WitnessKind.TREE
) -> Obstruction | None:
    """First certificate, in a fixed order, that rules out a compatible drawing."""
    kind = WitnessKind.parse(kind)
    require_same_config(m1, m2)
    if kind is WitnessKind.PATH:
        for m in (m1, m2):
            ears = semiears(m)
            if len(ears) >= 3:
                return Obstruction(
                    ObstructionKind.THREE_SEMIEARS,
                    tuple(sorted(e for sc in ears for e in sc.members)),
                    detail=f"{m} has {len(ears)} semiears",
                )
    shared = shared_perimeter_edges(m1, m2)
    if len(shared) < 2:
        return Obstruction(
            ObstructionKind.SHARED_PERIMETER_DEFICIT,
            tuple(shared),
            detail=f"{len(shared)} shared perimeter edges",
        )
    for cycle in sym_diff_structure(m1, m2).cycles:
        if cycle.tag is CycleTag.EAR:
            return Obstruction(ObstructionKind.EAR, cycle.edges, cycle.points, detail=f"{len(cycle.edges)}-edge ear")
    for area in boundary_areas(m1, m2):
        if area.k >= 3:
            return Obstruction(
                ObstructionKind.BOUNDARY_AREA, area.bounding_edges, area.points, detail=f"boundary area with {area.k} points"
            )
    for host, other in ((m1, m2), (m2, m1)):
        found = _parity_obstruction(host, other)
        if found is not None:
            return found
    return None


# ---------------------------------------------------------------------------
# brute-force oracle

# Plane spanning trees are searched directly over edge subsets with a
# union-find; nothing here shares code with the interval deciders above.

_DEGREE_CAP = {WitnessKind.PATH: 2, WitnessKind.ONE_LEGGED: 3}


def _root(parent: list[int], p: int) -> int:
    while parent[p] != p:
        p = parent[p]
    return p


def _connects(size: int, edges: Iterable[Chord]) -> bool:
    parent = list(range(size))
    parts = size
    for e in edges:
        ra, rb = _root(parent, e.a), _root(parent, e.b)
        if ra != rb:
            parent[ra] = rb
            parts -= 1
    return parts == 1


def _search_plane_tree(config: ConvexConfig, edges: list[Chord], kind: WitnessKind) -> tuple[Chord, ...] | None:
    """First plane spanning tree over ``edges`` whose family is at most ``kind``, by include/exclude search."""
    size = config.size
    need = size - 1
    cap = _DEGREE_CAP.get(kind, size)
    last = [-1] * size
    for i, e in enumerate(edges):
        last[e.a] = last[e.b] = i
    if min(last) < 0 or not _connects(size, edges):
        return None
    parent = list(range(size))
    degree = [0] * size
    chosen: list[Chord] = []

    def extend(i: int) -> tuple[Chord, ...] | None:
        if len(chosen) == need:
            found = classify_drawing(config, chosen)
            return tuple(chosen) if found is not None and found.rank <= kind.rank else None
        if len(edges) - i < need - len(chosen):
            return None
        if any(degree[p] == 0 and last[p] < i for p in range(size)):
            return None
        e = edges[i]
        ra, rb = _root(parent, e.a), _root(parent, e.b)
        if ra != rb and degree[e.a] < cap and degree[e.b] < cap and not crosses_any(config, e, chosen):
            parent[ra] = rb
            degree[e.a] += 1
            degree[e.b] += 1
            chosen.append(e)
            found = extend(i + 1)
            chosen.pop()
            degree[e.a] -= 1
            degree[e.b] -= 1
            parent[ra] = ra
            if found is not None:
                return found
        return extend(i + 1)

    return extend(0)


def brute_force_oracle(
    m1: PlaneMatching,
    m2: PlaneMatching,
    kind: WitnessKind | str = WitnessKind.TREE,
    max_points: int | None = None,
) -> bool:
    kind = WitnessKind.parse(kind)
    require_same_config(m1, m2)
    limit = settings.oracle_max_points if max_points is None else max_points
    if m1.config.size > limit:
        raise SizeLimitError(m1.config.size, limit, "brute-force oracle")
    config = m1.config
    forbidden = m1.edge_set | m2.edge_set
    edges = [c for c in all_chords(config) if c not in forbidden and not crosses_any(config, c, forbidden)]
    found = _search_plane_tree(config, edges, kind)
    logger.debug("Oracle %s for %s | %s: %s", kind.value, m1, m2, "found" if found else "none")
    return found is not None
