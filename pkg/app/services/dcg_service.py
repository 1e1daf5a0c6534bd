"""Disjoint compatibility graphs over every plane perfect matching of one size."""
import logging
from collections import Counter
from dataclasses import dataclass, field
from itertools import combinations
from multiprocessing import Pool
from typing import Callable

import networkx as nx

from app.core.config import settings
from app.core.convex import ConvexConfig
from app.core.errors import SizeLimitError
from app.services.compat_service import WitnessKind, is_compatible
from app.services.matching_service import (
    PlaneMatching,
    classify_matching,
    enumerate_matchings,
    format_matching,
    matching_index,
    rotate_matching,
)

logger = logging.getLogger("matchloom.dcg")

ProgressFn = Callable[[float], None]


@dataclass
class DCG:
    config: ConvexConfig
    family: WitnessKind
    matchings: list[PlaneMatching]
    graph: nx.Graph

    def index_of(self, matching: PlaneMatching) -> int:
        return matching_index(matching)[matching]

    def adjacent(self, i: int, j: int) -> bool:
        return self.graph.has_edge(i, j)

    @property
    def vertex_count(self) -> int:
        return self.graph.number_of_nodes()

    @property
    def edge_count(self) -> int:
        return self.graph.number_of_edges()

    def edges(self) -> list[tuple[int, int]]:
        return sorted((min(a, b), max(a, b)) for a, b in self.graph.edges)


def size_limit(family: WitnessKind) -> int:
    return settings.tree_max_points if family is WitnessKind.TREE else settings.path_max_points


def _decide_chunk(size: int, family: str, pairs: list[tuple[int, int]]) -> list[tuple[int, int]]:
    matchings = enumerate_matchings(ConvexConfig(size))
    kind = WitnessKind(family)
    return [(i, j) for i, j in pairs if is_compatible(matchings[i], matchings[j], kind)]


def _chunks(pairs: list[tuple[int, int]], count: int) -> list[list[tuple[int, int]]]:
    step = max(1, -(-len(pairs) // count))
    return [pairs[k : k + step] for k in range(0, len(pairs), step)]


def build_dcg(
    config: ConvexConfig,
    family: WitnessKind | str = WitnessKind.TREE,
    workers: int | None = None,
    unsafe_size: bool = False,
    progress: ProgressFn | None = None,
) -> DCG:
    """Decide every unordered pair of matchings; the result does not depend on ``workers``."""
    family = WitnessKind.parse(family)
    limit = size_limit(family)
    if config.size > limit and not unsafe_size:
        raise SizeLimitError(config.size, limit, f"{family.value} graph construction")
    workers = workers or settings.workers
    matchings = enumerate_matchings(config)
    pairs = list(combinations(range(len(matchings)), 2))
    logger.info(
        "Building %s graph on %d points: %d matchings, %d pairs, %d worker(s)",
        family.value, config.size, len(matchings), len(pairs), workers,
    )
    chunks = _chunks(pairs, max(1, workers * 8))
    found: list[tuple[int, int]] = []
    if workers <= 1 or len(chunks) <= 1:
        for done, chunk in enumerate(chunks, start=1):
            found.extend(_decide_chunk(config.size, family.value, chunk))
            if progress:
                progress(done / len(chunks))
    else:
        with Pool(processes=workers) as pool:
            results = pool.starmap(_decide_chunk, [(config.size, family.value, chunk) for chunk in chunks])
        for chunk_edges in results:
            found.extend(chunk_edges)
        if progress:
            progress(1.0)
    graph = nx.Graph()
    for i, m in enumerate(matchings):
        graph.add_node(i, matching=format_matching(m), klass=classify_matching(m).value)
    graph.add_edges_from(sorted(found))
    logger.info("%s graph on %d points has %d edges", family.value, config.size, graph.number_of_edges())
    return DCG(config, family, matchings, graph)


@dataclass
class GraphReport:
    points: int
    family: str
    vertex_count: int
    edge_count: int
    component_sizes: list[int]
    connected: bool
    # None whenever the graph is disconnected
    diameter: int | None
    largest_component_diameter: int
    diameter_pair: tuple[int, int] | None
    isolated: list[int] = field(default_factory=list)
    eccentricity_histogram: dict[int, int] = field(default_factory=dict)

    @property
    def component_count(self) -> int:
        return len(self.component_sizes)

    def as_dict(self) -> dict:
        return {
            "points": self.points,
            "family": self.family,
            "vertices": self.vertex_count,
            "edges": self.edge_count,
            "components": self.component_count,
            "component_sizes": self.component_sizes,
            "connected": self.connected,
            "diameter": self.diameter,
            "largest_component_diameter": self.largest_component_diameter,
            "diameter_pair": list(self.diameter_pair) if self.diameter_pair else None,
            "isolated": self.isolated,
            "eccentricity_histogram": {str(k): v for k, v in sorted(self.eccentricity_histogram.items())},
        }

    def summary(self) -> str:
        diameter = self.diameter if self.connected else "inf"
        return (
            f"vertices={self.vertex_count} edges={self.edge_count} connected={str(self.connected).lower()} "
            f"components={self.component_count} diameter={diameter} "
            f"largest_component_diameter={self.largest_component_diameter} isolated={len(self.isolated)}"
        )


def analyze(dcg: DCG) -> GraphReport:
    """Components, eccentricities and diameter by breadth-first search from every vertex."""
    graph = dcg.graph
    components = sorted((sorted(c) for c in nx.connected_components(graph)), key=lambda c: (-len(c), c[0]))
    eccentricity: dict[int, int] = {}
    best_pair: tuple[int, int] | None = None
    largest_diameter = 0
    for rank, component in enumerate(components):
        lengths = dict(nx.all_pairs_shortest_path_length(graph.subgraph(component)))
        for u in component:
            far = max(lengths[u].values())
            eccentricity[u] = far
            if rank == 0 and far > largest_diameter:
                largest_diameter = far
                best_pair = (u, min(v for v, d in lengths[u].items() if d == far))
    connected = len(components) == 1
    report = GraphReport(
        points=dcg.config.size,
        family=dcg.family.value,
        vertex_count=dcg.vertex_count,
        edge_count=dcg.edge_count,
        component_sizes=[len(c) for c in components],
        connected=connected,
        diameter=largest_diameter if connected else None,
        largest_component_diameter=largest_diameter,
        diameter_pair=best_pair,
        isolated=sorted(v for v in graph.nodes if graph.degree(v) == 0),
        eccentricity_histogram=dict(Counter(eccentricity.values())),
    )
    logger.info("Analyzed %s graph on %d points: %s", dcg.family.value, dcg.config.size, report.summary())
    return report


def distance(dcg: DCG, m1: PlaneMatching, m2: PlaneMatching) -> int | None:
    try:
        return nx.shortest_path_length(dcg.graph, dcg.index_of(m1), dcg.index_of(m2))
    except nx.NetworkXNoPath:
        return None


def is_subgraph(small: DCG, big: DCG) -> bool:
    """True iff every edge of ``small`` is an edge of ``big`` (same vertex order)."""
    return small.config == big.config and all(big.graph.has_edge(a, b) for a, b in small.graph.edges)


# ---------------------------------------------------------------------------
# rotation symmetry


def rotation_map(dcg: DCG, shift: int) -> list[int]:
    index = matching_index(dcg.matchings[0])
    return [index[rotate_matching(m, shift)] for m in dcg.matchings]


def is_rotation_automorphism(dcg: DCG, shift: int) -> bool:
    image = rotation_map(dcg, shift)
    return all(dcg.graph.has_edge(image[a], image[b]) for a, b in dcg.graph.edges)


@dataclass(frozen=True)
class Orbit:
    representative: int
    members: tuple[int, ...]
    matching: str
    degree: int
    # an edge joins two matchings of this orbit
    internal: bool

    @property
    def size(self) -> int:
        return len(self.members)


@dataclass
class RotationQuotient:
    shift: int
    orbits: list[Orbit]
    edges: list[tuple[int, int]]
    automorphism: bool
    parity_swap_automorphism: bool

    def as_dict(self) -> dict:
        return {
            "shift": self.shift,
            "orbits": [
                {
                    "representative": o.representative,
                    "matching": o.matching,
                    "size": o.size,
                    "degree": o.degree,
                    "internal": o.internal,
                }
                for o in self.orbits
            ],
            "edges": [list(e) for e in self.edges],
            "automorphism": self.automorphism,
            "parity_swap_automorphism": self.parity_swap_automorphism,
        }


def quotient_by_rotation(dcg: DCG, shift: int = 2) -> RotationQuotient:
    """Orbits of the index rotation i -> i + shift with the adjacency they induce."""
    image = rotation_map(dcg, shift)
    seen: set[int] = set()
    partition: list[tuple[int, ...]] = []
    for start in range(len(dcg.matchings)):
        if start in seen:
            continue
        orbit = [start]
        nxt = image[start]
        while nxt != start:
            orbit.append(nxt)
            nxt = image[nxt]
        seen.update(orbit)
        partition.append(tuple(sorted(orbit)))
    quotient = nx.quotient_graph(dcg.graph, [set(block) for block in partition], relabel=False)
    rep_of = {block_key: min(block_key) for block_key in quotient.nodes}
    orbits = [
        Orbit(
            representative=block[0],
            members=block,
            matching=format_matching(dcg.matchings[block[0]]),
            degree=dcg.graph.degree(block[0]),
            internal=quotient.nodes[frozenset(block)]["nedges"] > 0,
        )
        for block in partition
    ]
    edges = sorted(tuple(sorted((rep_of[a], rep_of[b]))) for a, b in quotient.edges)
    result = RotationQuotient(
        shift=shift,
        orbits=orbits,
        edges=edges,
        automorphism=is_rotation_automorphism(dcg, shift),
        parity_swap_automorphism=is_rotation_automorphism(dcg, 1),
    )
    logger.info("Rotation by %d: %d matchings in %d orbits", shift, len(dcg.matchings), len(orbits))
    return result
