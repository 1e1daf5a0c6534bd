"""Explicit witnesses and rotation sequences between plane perfect matchings.

Every witness built here is checked by the compat validator before it is
returned; a drawing that does not validate raises ConstructionError.
"""
import logging
from collections import deque
from dataclasses import dataclass, field
from enum import Enum
from functools import lru_cache
from itertools import combinations
from typing import Iterable, Sequence

import networkx as nx

from app.core.convex import Chord, ConvexConfig, crosses_any, is_diagonal, perimeter_edge
from app.core.errors import ConstructionError, SemicycleError
from app.services.compat_service import (
    Witness,
    WitnessKind,
    allowed_edges,
    check_witness,
    exists_witness,
    validate_witness,
)
from app.services.dcg_service import DCG, build_dcg
from app.services.matching_service import (
    CycleTag,
    Face,
    Parity,
    PlaneMatching,
    Semicycle,
    SemicycleKind,
    dual_tree,
    inside_cycle_neighbors,
    is_semicycle,
    perimeter_matching,
    require_same_config,
    reverse_semicycle,
    rotate,
    rotate_all,
    semicycles_disjoint,
    sym_diff_structure,
)

logger = logging.getLogger("matchloom.constructions")

MIN_ROUTE_POINTS = 12
MIN_SEARCH_POINTS = 10


@dataclass(frozen=True)
class RotationStep:
    before: PlaneMatching
    after: PlaneMatching
    witness: Witness
    semicycles: tuple[Semicycle, ...]
    # True when the step came from a graph search instead of a rotation
    searched: bool = False

    def reversed(self) -> "RotationStep":
        if self.searched:
            return RotationStep(self.after, self.before, self.witness, (), True)
        back = tuple(reverse_semicycle(self.after, sc) for sc in self.semicycles)
        return RotationStep(self.after, self.before, self.witness, back)


@dataclass(frozen=True)
class RotationSequence:
    start: PlaneMatching
    end: PlaneMatching
    steps: tuple[RotationStep, ...] = field(default=())

    def __len__(self) -> int:
        return len(self.steps)

    @property
    def matchings(self) -> list[PlaneMatching]:
        return [self.start] + [step.after for step in self.steps]

    def reversed(self) -> "RotationSequence":
        return RotationSequence(self.end, self.start, tuple(step.reversed() for step in reversed(self.steps)))

    def then(self, other: "RotationSequence") -> "RotationSequence":
        if self.end != other.start:
            raise ConstructionError("sequences do not chain")
        return RotationSequence(self.start, other.end, self.steps + other.steps)


def _sequence(start: PlaneMatching, steps: Sequence[RotationStep]) -> RotationSequence:
    end = steps[-1].after if steps else start
    return RotationSequence(start, end, tuple(steps))


def validate_sequence(sequence: RotationSequence, kind: WitnessKind = WitnessKind.TREE) -> list[str]:
    """Violated sequence invariants; empty when every step chains and validates."""
    problems: list[str] = []
    current = sequence.start
    for i, step in enumerate(sequence.steps):
        if step.before != current:
            problems.append(f"step {i}: does not start where the previous step ended")
        config = step.before.config
        for issue in validate_witness(config, step.witness, (step.before, step.after)):
            problems.append(f"step {i}: {issue}")
        if not kind.admits(step.witness.kind):
            problems.append(f"step {i}: witness is a {step.witness.kind.value}, not a {kind.value}")
        if not step.searched:
            boundary = set().union(*(set(sc.boundary) for sc in step.semicycles)) if step.semicycles else set()
            if boundary != set(step.before.edge_set ^ step.after.edge_set):
                problems.append(f"step {i}: symmetric difference is not the rotated boundary")
        current = step.after
    if current != sequence.end:
        problems.append("sequence does not end at its declared end")
    return problems


def check_sequence(sequence: RotationSequence, kind: WitnessKind = WitnessKind.TREE) -> RotationSequence:
    problems = validate_sequence(sequence, kind)
    if problems:
        raise ConstructionError("; ".join(problems))
    return sequence


# ---------------------------------------------------------------------------
# trees for simultaneous inside-cycle rotations


def _ccw_points(semicycle: Semicycle) -> list[int]:
    return sorted(semicycle.points)


def _sides(points: Sequence[int]) -> list[Chord]:
    return [Chord.of(points[i], points[(i + 1) % len(points)]) for i in range(len(points))]


def _cycle_fans(config: ConvexConfig, semicycle: Semicycle) -> list[Chord]:
    """Two fans inside the cycle that, together with two diagonal sides, connect every cycle point.

    For diagonal sides c_a c_{a+1} and c_b c_{b+1}, c_a fans out to c_{a+2}..c_b and
    c_b fans out to c_{b+2}..c_a. The fans lie on opposite sides of c_a c_b.
    """
    pts = _ccw_points(semicycle)
    sides = _sides(pts)
    diag_at = [i for i, side in enumerate(sides) if is_diagonal(config, side)]
    if len(diag_at) < 2:
        raise ConstructionError(f"{sorted(map(str, semicycle.members))} is not an inside cycle")
    size = len(pts)
    a, b = diag_at[0], diag_at[1]
    fans = [Chord.of(pts[a], pts[j % size]) for j in range(a + 2, b + 1)]
    fans += [Chord.of(pts[b], pts[j % size]) for j in range(b + 2, a + size + 1)]
    taken = set(sides)
    return [chord for chord in dict.fromkeys(fans) if chord not in taken]


def _complete_plane(config: ConvexConfig, seed: Iterable[Chord], allowed: set[Chord]) -> list[Chord]:
    """Grow ``seed`` to a maximal plane drawing over ``allowed``, shortest chords first."""
    drawn = list(dict.fromkeys(seed))
    order = sorted(allowed - set(drawn), key=lambda e: (min(e.b - e.a, config.size - e.b + e.a), e))
    for chord in order:
        if crosses_any(config, chord, drawn):
            continue
        drawn.append(chord)
    return drawn


def _spanning_tree(config: ConvexConfig, edges: Iterable[Chord]) -> list[Chord] | None:
    graph = nx.Graph()
    graph.add_nodes_from(range(config.size))
    graph.add_edges_from((e.a, e.b) for e in edges)
    if not nx.is_connected(graph):
        return None
    return [Chord.of(a, b) for a, b in nx.minimum_spanning_edges(graph, algorithm="kruskal", data=False)]


def _require_disjoint_inside(matching: PlaneMatching, cycles: Sequence[Semicycle]) -> None:
    for sc in cycles:
        if sc.kind is not SemicycleKind.INSIDE_CYCLE or not sc.members <= matching.edge_set:
            raise ConstructionError(f"{sorted(map(str, sc.members))} is not an inside cycle of {matching}")
    for a, b in combinations(cycles, 2):
        if not semicycles_disjoint(a, b):
            raise ConstructionError("inside cycles must be pairwise disjoint")


def tree_for_inside_cycles(matching: PlaneMatching, cycles: Iterable[Semicycle]) -> Witness:
    """Tree witness for rotating all ``cycles`` of ``matching`` in one step.

    Each cycle contributes two non-crossing fans (see ``_cycle_fans``); the
    drawing is then completed to a maximal plane set of chords that avoids the
    edges of both matchings. Outside the cycles that set is a triangulation
    missing only a matching of blocked sides, so it is connected, and a
    spanning tree of it is returned.
    """
    cycles = tuple(cycles)
    _require_disjoint_inside(matching, cycles)
    config = matching.config
    rotated = rotate_all(matching, cycles)
    allowed = allowed_edges(matching, rotated)
    seed = [chord for sc in cycles for chord in _cycle_fans(config, sc)]
    drawn = _complete_plane(config, seed, allowed)
    tree = _spanning_tree(config, drawn)
    if tree is None:
        raise ConstructionError(f"tree for {len(cycles)} inside cycle(s) of {matching} is disconnected")
    return check_witness(config, Witness.of(WitnessKind.TREE, tree), (matching, rotated))


def _step(before: PlaneMatching, semicycles: Sequence[Semicycle]) -> RotationStep:
    semicycles = tuple(semicycles)
    after = rotate_all(before, semicycles)
    return RotationStep(before, after, tree_for_inside_cycles(before, semicycles), semicycles)


# ---------------------------------------------------------------------------
# ears and perimeter routes


def _inside(matching: PlaneMatching, members: Iterable[Chord]) -> Semicycle:
    sc = is_semicycle(matching, members)
    if sc is None or sc.kind is not SemicycleKind.INSIDE_CYCLE:
        raise ConstructionError(f"{sorted(map(str, members))} is not an inside cycle of {matching}")
    return sc


def ear_rotation_sequence(matching: PlaneMatching, ear: Semicycle) -> RotationSequence:
    """Rotate an ear with at least six edges through three inside-cycle rotations.

    With ear points q_0..q_{2k-1} and the split points A=q_a, B=q_{a+3},
    C=q_{a+6}, D=q_{a+9}: rotate the ear edges on arcs AB and CD together, then
    the 2-cycle {BC, DA}, then {AB, CD} with the ear edges on arcs BC and DA.
    """
    if ear.kind is not SemicycleKind.SEMIEAR or not ear.members <= matching.edge_set:
        raise ConstructionError(f"{sorted(map(str, ear.members))} is not an ear of {matching}")
    if ear.k < 6:
        raise ConstructionError(f"ear has {ear.k} edges; rotating it in three steps needs at least 6")
    q = _ccw_points(ear)
    size = len(q)
    sides = _sides(q)
    a = next(i for i, side in enumerate(sides) if side in ear.members)
    b, c, d = a + 3, a + 6, a + 9
    # four arcs of odd length >= 3, each holding a positive even number of ear points
    if size - 9 < 3:
        raise ConstructionError("no valid four-point split of the ear")

    def pt(i: int) -> int:
        return q[i % size]

    def members_on(lo: int, hi: int) -> list[Chord]:
        return [sides[i % size] for i in range(lo, hi) if sides[i % size] in ear.members]

    ab, bc, cd, da = Chord.of(pt(a), pt(b)), Chord.of(pt(b), pt(c)), Chord.of(pt(c), pt(d)), Chord.of(pt(d), pt(a))
    steps: list[RotationStep] = []
    first = _inside(matching, members_on(a, b) + members_on(c, d))
    steps.append(_step(matching, [first]))
    second = _inside(steps[-1].after, [bc, da])
    steps.append(_step(steps[-1].after, [second]))
    third = _inside(steps[-1].after, [ab, cd] + members_on(b, c) + members_on(d, a + size))
    steps.append(_step(steps[-1].after, [third]))
    sequence = _sequence(matching, steps)
    if sequence.end != rotate(matching, ear):
        raise ConstructionError("ear rotation sequence does not end at the rotated matching")
    return check_sequence(sequence)


def perimeter_swap(config: ConvexConfig, start: Parity | str = Parity.EVEN) -> RotationSequence:
    """Three steps from one perimeter matching to the other, as the rotation of a whole-hull ear."""
    if config.size < MIN_ROUTE_POINTS:
        raise ConstructionError(f"perimeter swap needs at least {MIN_ROUTE_POINTS} points")
    matching = perimeter_matching(config, start)
    ear = is_semicycle(matching, matching.edges)
    return ear_rotation_sequence(matching, ear)


class RouteClass(str, Enum):
    A1 = "A1"
    A2 = "A2"
    A3 = "A3"
    IS_PERIMETER = "IsPerimeter"

    @property
    def d_min(self) -> int:
        """Upper bound on the distance to the nearer perimeter matching."""
        return _ROUTE_BOUNDS[self][0]

    @property
    def d_max(self) -> int:
        """Upper bound on the distance to the farther perimeter matching."""
        return _ROUTE_BOUNDS[self][1]


_ROUTE_BOUNDS = {
    RouteClass.A1: (1, 4),
    RouteClass.A2: (2, 3),
    RouteClass.A3: (3, 3),
    RouteClass.IS_PERIMETER: (0, 3),
}


@dataclass(frozen=True)
class PerimeterRoutes:
    route_class: RouteClass
    to_blue: RotationSequence
    to_red: RotationSequence

    def towards(self, parity: Parity) -> RotationSequence:
        return self.to_blue if parity is Parity.ODD else self.to_red


def _inner_faces(matching: PlaneMatching, color: Parity) -> list[Face]:
    tree = dual_tree(matching)
    return [tree.nodes[i] for i in tree.inner if tree.nodes[i].color is color]


def _rotate_faces(matching: PlaneMatching, faces: Sequence[Face]) -> RotationStep | None:
    if not faces:
        return None
    return _step(matching, [_inside(matching, face.m_edges) for face in faces])


def _push_leaf(matching: PlaneMatching, leaf: Face) -> Semicycle | None:
    """Inside cycle that leaves only the clockwise-most perimeter edge of ``leaf`` cut off."""
    if len(leaf.perimeter_edges) < 2:
        return None
    config = matching.config
    d = leaf.diagonals[0]
    u, v = (d.a, d.b) if all(d.a <= p <= d.b for p in leaf.points) else (d.b, d.a)
    arc = config.ccw_walk(u, v)
    kept = Chord.of(arc[1], arc[2])
    return _inside(matching, leaf.m_edges - {kept})


def _n_form_step(matching: PlaneMatching, target: Parity) -> RotationStep | None:
    """First step of the single-leaf-pair case: one diagonal left, cutting off one edge of the other color."""
    other = target.other
    tree = dual_tree(matching)
    semicycles = [_inside(matching, face.m_edges) for face in _inner_faces(matching, other)]
    leaf = next(tree.nodes[i] for i in tree.leaves if tree.nodes[i].color is other)
    pushed = _push_leaf(matching, leaf)
    if pushed is not None:
        semicycles.append(pushed)
    return _step(matching, semicycles) if semicycles else None


def _three_in_a_row(matching: PlaneMatching, target: Parity) -> list[RotationStep]:
    """Two steps to the ``target`` perimeter matching through three consecutive edges e, f, g.

    The face holding e, f and g is rotated without e and g, which leaves both
    cut off by new diagonals; the single inner face that remains is rotated next.
    """
    config = matching.config
    tree = dual_tree(matching)
    goal = perimeter_matching(config, target)
    first_start = 0 if target is Parity.EVEN else 1
    for i in range(first_start, config.size, 2):
        e, f, g = (perimeter_edge(config, i + j) for j in (0, 2, 4))
        if not {e, f, g} <= matching.edge_set:
            continue
        face = next(node for node in tree.nodes if f in node.perimeter_edges)
        if not {e, g} <= face.m_edges:
            continue
        try:
            first = _step(matching, [_inside(matching, face.m_edges - {e, g})])
        except (ConstructionError, SemicycleError):
            continue
        second = _rotate_faces(first.after, _inner_faces(first.after, target.other))
        if second is not None and second.after == goal:
            return [first, second]
    raise ConstructionError(f"no three consecutive {target.color} edges lead {matching} to {goal}")


def _route(matching: PlaneMatching, target: Parity) -> list[RotationStep]:
    config = matching.config
    goal = perimeter_matching(config, target)
    if matching == goal:
        return []
    if not matching.diagonals:
        return list(perimeter_swap(config, target.other).steps)
    tree = dual_tree(matching)
    leaf_colors = [tree.nodes[i].color for i in tree.leaves]
    own = leaf_colors.count(target)
    rest = len(leaf_colors) - own
    steps: list[RotationStep] = []
    if rest == 0:
        # every leaf already carries target edges: rotate the other inner faces
        steps.append(_rotate_faces(matching, _inner_faces(matching, target.other)))
    elif own == 0:
        steps.extend(_route(matching, target.other))
        steps.extend(perimeter_swap(config, target.other).steps)
    elif own >= 2:
        first = _rotate_faces(matching, _inner_faces(matching, target))
        current = matching
        if first is not None:
            steps.append(first)
            current = first.after
        # only the central face of the other color is left
        steps.append(_rotate_faces(current, _inner_faces(current, target.other)))
    else:
        first = _n_form_step(matching, target) if rest == 1 else _rotate_faces(matching, _inner_faces(matching, target.other))
        current = matching
        if first is not None:
            steps.append(first)
            current = first.after
        steps.extend(_three_in_a_row(current, target))
    if not steps or steps[-1] is None or steps[-1].after != goal:
        raise ConstructionError(f"route from {matching} misses the {target.color} perimeter matching")
    return steps


def route_class(matching: PlaneMatching) -> RouteClass:
    if not matching.diagonals:
        return RouteClass.IS_PERIMETER
    blue, red = dual_tree(matching).leaf_counts()
    if min(blue, red) == 0:
        return RouteClass.A1
    if blue == 1 and red == 1:
        return RouteClass.A3
    return RouteClass.A2


def route_to_perimeter(matching: PlaneMatching) -> PerimeterRoutes:
    """Classify ``matching`` by its dual-tree leaf colors and route it to both perimeter matchings."""
    if matching.config.size < MIN_ROUTE_POINTS:
        raise ConstructionError(f"perimeter routes need at least {MIN_ROUTE_POINTS} points")
    klass = route_class(matching)
    to_blue = check_sequence(_sequence(matching, _route(matching, Parity.ODD)))
    to_red = check_sequence(_sequence(matching, _route(matching, Parity.EVEN)))
    near, far = sorted((len(to_blue), len(to_red)))
    if near > klass.d_min or far > klass.d_max:
        raise ConstructionError(f"{klass.value} routes of length {near}/{far} exceed the class bounds")
    logger.debug("Routes for %s: class=%s blue=%d red=%d", matching, klass.value, len(to_blue), len(to_red))
    return PerimeterRoutes(klass, to_blue, to_red)


# ---------------------------------------------------------------------------
# paths between two matchings


def _searched_step(before: PlaneMatching, after: PlaneMatching, kind: WitnessKind) -> RotationStep:
    witness = exists_witness(before, after, kind)
    if witness is None:
        raise ConstructionError(f"{before} and {after} are not {kind.value}-compatible")
    structure = sym_diff_structure(before, after)
    if all(cycle.tag is not CycleTag.CROSSING for cycle in structure.cycles):
        return RotationStep(before, after, witness, tuple(cycle.semicycle for cycle in structure.cycles))
    return RotationStep(before, after, witness, (), searched=True)


@lru_cache(maxsize=8)
def _small_graph(size: int, kind: WitnessKind) -> DCG:
    return build_dcg(ConvexConfig(size), kind, workers=1)


def search_path(m1: PlaneMatching, m2: PlaneMatching, kind: WitnessKind = WitnessKind.TREE) -> RotationSequence:
    """Shortest sequence found by breadth-first search over the computed compatibility graph."""
    require_same_config(m1, m2)
    dcg = _small_graph(m1.config.size, kind)
    try:
        ids = nx.shortest_path(dcg.graph, dcg.index_of(m1), dcg.index_of(m2))
    except nx.NetworkXNoPath:
        raise ConstructionError(f"{m1} and {m2} lie in different components of the {kind.value} graph") from None
    hops = [dcg.matchings[i] for i in ids]
    steps = [_searched_step(a, b, kind) for a, b in zip(hops, hops[1:])]
    return check_sequence(_sequence(m1, steps), kind)


def _via_single_edge_forms(m1: PlaneMatching, m2: PlaneMatching, target: Parity) -> RotationSequence | None:
    """Four steps between two matchings that each reach a one-diagonal form in one step.

    Both one-diagonal forms keep a common ``target`` edge e; rotating the big face
    of each without e reaches the same matching, in which one diagonal cuts off e.
    """
    firsts = []
    for m in (m1, m2):
        step = _n_form_step(m, target)
        firsts.append((step, step.after if step else m))
    (s1, n1), (s2, n2) = firsts
    if len(n1.diagonals) != 1 or len(n2.diagonals) != 1:
        return None
    tree1, tree2 = dual_tree(n1), dual_tree(n2)
    for e in sorted(set(n1.perimeter_of_parity(target)) & set(n2.perimeter_of_parity(target))):
        try:
            face1 = next(node for node in tree1.nodes if e in node.perimeter_edges)
            face2 = next(node for node in tree2.nodes if e in node.perimeter_edges)
            down = _step(n1, [_inside(n1, face1.m_edges - {e})])
            up = _step(n2, [_inside(n2, face2.m_edges - {e})])
        except (ConstructionError, SemicycleError):
            continue
        if down.after != up.after:
            continue
        steps = ([s1] if s1 else []) + [down, up.reversed()] + ([s2.reversed()] if s2 else [])
        return _sequence(m1, steps)
    return None


def tree_path_between(m1: PlaneMatching, m2: PlaneMatching) -> RotationSequence:
    """At most five tree-compatible steps from ``m1`` to ``m2``.

    On 10 points the sequence comes from search; from 12 points on it is
    assembled from the perimeter routes of both matchings.
    """
    require_same_config(m1, m2)
    size = m1.config.size
    if m1 == m2:
        return RotationSequence(m1, m2)
    if size < MIN_SEARCH_POINTS:
        raise ConstructionError(f"tree paths need at least {MIN_SEARCH_POINTS} points")
    if size < MIN_ROUTE_POINTS:
        return search_path(m1, m2, WitnessKind.TREE)
    r1, r2 = route_to_perimeter(m1), route_to_perimeter(m2)
    candidates = [r1.towards(p).then(r2.towards(p).reversed()) for p in (Parity.ODD, Parity.EVEN)]
    if r1.route_class is RouteClass.A3 and r2.route_class is RouteClass.A3:
        for target in (Parity.EVEN, Parity.ODD):
            joined = _via_single_edge_forms(m1, m2, target)
            if joined is not None:
                candidates.append(joined)
    best = min(candidates, key=len)
    if len(best) > 5:
        raise ConstructionError(f"no tree path of length <= 5 found between {m1} and {m2}")
    return check_sequence(best)


# ---------------------------------------------------------------------------
# caterpillars


class Side(str, Enum):
    LEFT = "left"  # counterclockwise from the start point
    RIGHT = "right"


def _greedy_walk(matching: PlaneMatching, walk: Sequence[int]) -> list[Chord]:
    """One-legged caterpillar along ``walk``; the first point ends up with degree 1."""
    edges: list[Chord] = []
    x, last = 0, len(walk) - 1
    while x < last:
        xy = Chord.of(walk[x], walk[x + 1])
        if xy not in matching.edge_set:
            edges.append(xy)
            x += 1
            continue
        z = x + 2
        # y is matched to x, so the walk cannot run past its end point here
        assert z <= last, f"greedy walk overshot {walk[last]}"
        edges.append(Chord.of(walk[x], walk[z]))
        edges.append(Chord.of(walk[x + 1], walk[z]))
        x = z
    return edges


def _arc(config: ConvexConfig, start: int, stop: int, side: Side) -> list[int]:
    if side is Side.LEFT:
        return config.ccw_walk(start, stop)
    return list(reversed(config.ccw_walk(stop, start)))


def greedy_caterpillar(
    matching: PlaneMatching,
    edge: Chord,
    side: Side | str = Side.LEFT,
    start: int | None = None,
) -> Witness:
    """One-legged caterpillar from ``start`` to the other end of ``edge``.

    It spans both endpoints and every point between them on the chosen side,
    and is disjoint compatible to ``matching``.
    """
    if edge not in matching.edge_set:
        raise ConstructionError(f"{edge} is not an edge of {matching}")
    config = matching.config
    p = edge.a if start is None else start
    q = edge.other(p)
    walk = _arc(config, p, q, Side(side))
    if len(walk) == 2:
        raise ConstructionError(f"no points between {p} and {q} on the {Side(side).value} side")
    witness = Witness.of(WitnessKind.ONE_LEGGED, _greedy_walk(matching, walk))
    return check_witness(config, witness, (matching,), span=walk)


@dataclass
class _Chain:
    s: int
    t: int
    vertices: list[int]


def _pocket_pieces(matching: PlaneMatching, rotated: PlaneMatching, pts: Sequence[int]) -> dict[int, list[Chord]]:
    """Greedy caterpillar on the pocket outside every diagonal side, keyed by side index."""
    config = matching.config
    pieces: dict[int, list[Chord]] = {}
    for i, side in enumerate(_sides(pts)):
        if not is_diagonal(config, side):
            continue
        host = matching if side in matching.edge_set else rotated
        pieces[i] = _greedy_walk(host, config.ccw_walk(pts[i], pts[(i + 1) % len(pts)]))
    return pieces


def _chains(pts: Sequence[int], pieces: dict[int, list[Chord]]) -> list[_Chain]:
    size = len(pts)
    begin = next(i for i in range(size) if i in pieces and (i - 1) % size not in pieces)
    chains: list[_Chain] = []
    for offset in range(size):
        i = (begin + offset) % size
        if i not in pieces:
            continue
        if chains and chains[-1].t == pts[i]:
            chains[-1].t = pts[(i + 1) % size]
            chains[-1].vertices.append(chains[-1].t)
        else:
            chains.append(_Chain(pts[i], pts[(i + 1) % size], [pts[i], pts[(i + 1) % size]]))
    return chains


def _zigzag(chains: Sequence[_Chain]) -> list[Chord]:
    """Nested chords joining chains alternately from both ends of the ccw order."""
    order: list[tuple[int, bool]] = []
    lo, hi = 0, len(chains) - 1
    while lo <= hi:
        order.append((lo, True))
        lo += 1
        if lo <= hi:
            order.append((hi, False))
            hi -= 1
    jumps: list[Chord] = []
    previous = None
    for idx, forward in order:
        chain = chains[idx]
        begin, finish = (chain.s, chain.t) if forward else (chain.t, chain.s)
        if previous is not None:
            jumps.append(Chord.of(previous, begin))
        previous = finish
    return jumps


def _attach_gaps(
    config: ConvexConfig,
    pts: Sequence[int],
    chains: Sequence[_Chain],
    drawn: list[Chord],
) -> list[Chord]:
    """Legs from every cycle point outside the chains to one spine point per gap.

    The nested jumps cut the cycle into regions that each hold one gap and one
    chain end away from it, so the first spine point that crosses nothing is
    always found.
    """
    sides = set(_sides(pts))
    spine = [p for chain in chains for p in chain.vertices]
    covered = set(spine)
    gaps: list[list[int]] = []
    for i, p in enumerate(pts):
        if p in covered:
            continue
        if gaps and gaps[-1][-1] == pts[i - 1]:
            gaps[-1].append(p)
        else:
            gaps.append([p])
    if len(gaps) > 1 and gaps[0][0] == pts[0] and gaps[-1][-1] == pts[-1]:
        gaps[0] = gaps.pop() + gaps[0]
    legs: list[Chord] = []
    for gap in gaps:
        for w in spine:
            chords = [Chord.of(g, w) for g in gap]
            if any(c in sides for c in chords):
                continue
            if any(crosses_any(config, c, drawn + legs) for c in chords):
                continue
            legs.extend(chords)
            break
        else:
            raise ConstructionError(f"no spine point sees the cycle points {gap}")
    return legs


def caterpillar_for_inside_cycle(matching: PlaneMatching, cycle: Semicycle) -> Witness:
    """Caterpillar witness for rotating one inside cycle.

    Pocket caterpillars along the diagonals of the cycle merge into chains; the
    chains are joined by nested chords inside the cycle and the remaining cycle
    points hang off the spine as legs. When every side is a diagonal the chains
    close into a cycle and its first spine edge is dropped.
    """
    _require_disjoint_inside(matching, (cycle,))
    config = matching.config
    rotated = rotate(matching, cycle)
    pts = _ccw_points(cycle)
    pieces = _pocket_pieces(matching, rotated, pts)
    if len(pieces) == len(pts):
        edges = [e for i in sorted(pieces) for e in pieces[i]]
        edges.remove(pieces[0][0])
    else:
        chains = _chains(pts, pieces)
        edges = [e for i in sorted(pieces) for e in pieces[i]] + _zigzag(chains)
        edges += _attach_gaps(config, pts, chains, edges)
    return check_witness(config, Witness.of(WitnessKind.CATERPILLAR, edges), (matching, rotated))


def one_legged_for_2cycle(matching: PlaneMatching, cycle: Semicycle) -> Witness:
    """One-legged caterpillar witness for rotating an inside 2-cycle q0 q1 q2 q3."""
    _require_disjoint_inside(matching, (cycle,))
    if cycle.k != 2:
        raise ConstructionError(f"expected an inside 2-cycle, got {cycle.k} edges")
    config = matching.config
    rotated = rotate(matching, cycle)
    q = _ccw_points(cycle)
    sides = _sides(q)
    diagonal = [is_diagonal(config, side) for side in sides]

    def piece(i: int, from_start: bool = True) -> list[Chord]:
        # pocket caterpillar outside side i, starting at q_i or at q_{i+1}
        host = matching if sides[i] in matching.edge_set else rotated
        walk = config.ccw_walk(q[i], q[(i + 1) % 4])
        return _greedy_walk(host, walk if from_start else walk[::-1])

    count = sum(diagonal)
    adjacent = [i for i in range(4) if diagonal[i] and diagonal[(i + 1) % 4]]
    if count == 4:
        pieces = [piece(i) for i in range(4)]
        edges = [e for p in pieces for e in p]
        edges.remove(pieces[0][0])
    elif count == 3:
        j = diagonal.index(False)
        edges = [e for i in (j + 1, j + 2, j + 3) for e in piece(i % 4)]
    elif adjacent:
        i = adjacent[0]
        # both diagonals meet at q_{i+1}; the opposite corner becomes its leg
        hub = q[(i + 1) % 4]
        edges = piece(i, from_start=False) + piece((i + 1) % 4) + [Chord.of(hub, q[(i + 3) % 4])]
    else:
        i = diagonal.index(True)
        edges = piece(i, from_start=False) + piece((i + 2) % 4, from_start=False)
        edges.append(Chord.of(q[(i + 1) % 4], q[(i + 3) % 4]))
    return check_witness(config, Witness.of(WitnessKind.ONE_LEGGED, edges), (matching, rotated))


def split_into_2cycles(matching: PlaneMatching, cycle: Semicycle) -> list[Semicycle]:
    """Interior-disjoint inside 2-cycles whose rotations, in order, rotate ``cycle``.

    The cycle points are labeled u_0..u_x, v_y..v_0 so that u_0 v_0 and u_x v_y
    are diagonals and u_0 v_0 belongs to the matching that is rotated first. A
    fan of quadrilaterals from v_0 covers the u side, a second fan covers the
    v side; each returned semicycle belongs to the matching produced by the
    rotations before it.
    """
    _require_disjoint_inside(matching, (cycle,))
    config = matching.config
    rotated = rotate(matching, cycle)
    pts = _ccw_points(cycle)
    size = len(pts)
    sides = _sides(pts)
    anchors = [i for i, side in enumerate(sides) if is_diagonal(config, side) and side in matching.edge_set]
    forward = bool(anchors)
    anchor = anchors[0] if anchors else next(i for i, side in enumerate(sides) if is_diagonal(config, side))
    w = [pts[(anchor + 1 + j) % size] for j in range(size)]
    x = next(j for j in range(size - 1) if is_diagonal(config, Chord.of(w[j], w[j + 1])))
    y = size - 2 - x
    u = w[: x + 1]
    v = [w[size - 1 - j] for j in range(y + 1)]
    quads: list[tuple[int, ...]] = []
    if x % 2 == 0:
        quads += [(v[0], u[2 * i], u[2 * i + 1], u[2 * i + 2]) for i in range(x // 2)]
        quads += [(u[x], v[2 * i], v[2 * i + 1], v[2 * i + 2]) for i in range(y // 2)]
    else:
        quads += [(v[0], u[2 * i], u[2 * i + 1], u[2 * i + 2]) for i in range((x - 1) // 2)]
        quads += [(u[x - 1], v[2 * i], v[2 * i + 1], v[2 * i + 2]) for i in range((y - 1) // 2)]
        quads.append((u[x - 1], u[x], v[y], v[y - 1]))
    if not forward:
        quads.reverse()
    out: list[Semicycle] = []
    current = matching
    for quad in quads:
        members = [side for side in _sides(sorted(quad)) if side in current.edge_set]
        sc = _inside(current, members)
        out.append(sc)
        current = rotate(current, sc)
    if current != rotated:
        raise ConstructionError("2-cycle split does not reproduce the rotation")
    return out


def _inside_cycle_hops(m1: PlaneMatching, m2: PlaneMatching) -> list[tuple[PlaneMatching, Semicycle]]:
    """Fewest single inside-cycle rotations leading from ``m1`` to ``m2``, found breadth first."""
    parent: dict[PlaneMatching, tuple[PlaneMatching, Semicycle] | None] = {m1: None}
    frontier = deque([m1])
    while frontier and m2 not in parent:
        current = frontier.popleft()
        for sc, after in inside_cycle_neighbors(current):
            if after not in parent:
                parent[after] = (current, sc)
                frontier.append(after)
    if m2 not in parent:
        raise ConstructionError(f"no single inside-cycle rotations lead from {m1} to {m2}")
    hops: list[tuple[PlaneMatching, Semicycle]] = []
    node = m2
    while parent[node] is not None:
        before, sc = parent[node]
        hops.append((before, sc))
        node = before
    return hops[::-1]


def _cycle_steps(before: PlaneMatching, cycle: Semicycle, one_legged: bool) -> list[RotationStep]:
    if not one_legged:
        after = rotate(before, cycle)
        return [RotationStep(before, after, caterpillar_for_inside_cycle(before, cycle), (cycle,))]
    steps: list[RotationStep] = []
    current = before
    for two in split_into_2cycles(before, cycle):
        after = rotate(current, two)
        steps.append(RotationStep(current, after, one_legged_for_2cycle(current, two), (two,)))
        current = after
    return steps


def _expand_step(step: RotationStep, one_legged: bool) -> list[RotationStep]:
    if step.searched or any(sc.kind is not SemicycleKind.INSIDE_CYCLE for sc in step.semicycles):
        raise ConstructionError(f"step from {step.before} to {step.after} is not a rotation of inside cycles")
    steps: list[RotationStep] = []
    current = step.before
    for cycle in step.semicycles:
        # cycles are disjoint, so each stays a semicycle of the running matching
        steps.extend(_cycle_steps(current, _inside(current, cycle.members), one_legged))
        current = steps[-1].after
    return steps


def caterpillar_path_between(m1: PlaneMatching, m2: PlaneMatching, one_legged: bool = False) -> RotationSequence:
    """Caterpillar-compatible steps from ``m1`` to ``m2``, one inside cycle (or 2-cycle) per step.

    From 12 points on the tree path is refined cycle by cycle. On 10 points the
    inside cycles to rotate come from a breadth-first search over single
    inside-cycle rotations; their witnesses are still constructed.
    """
    require_same_config(m1, m2)
    kind = WitnessKind.ONE_LEGGED if one_legged else WitnessKind.CATERPILLAR
    if m1 == m2:
        return RotationSequence(m1, m2)
    if m1.config.size < MIN_SEARCH_POINTS:
        raise ConstructionError(f"caterpillar paths need at least {MIN_SEARCH_POINTS} points")
    if m1.config.size < MIN_ROUTE_POINTS:
        steps = [fine for before, sc in _inside_cycle_hops(m1, m2) for fine in _cycle_steps(before, sc, one_legged)]
    else:
        steps = [fine for step in tree_path_between(m1, m2).steps for fine in _expand_step(step, one_legged)]
    return check_sequence(_sequence(m1, steps), kind)
