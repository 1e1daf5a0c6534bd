"""Verification suites: exhaustive checks of the structural claims at desk-scale sizes."""
import logging
import random
from dataclasses import dataclass, field
from itertools import combinations
from typing import Callable

import networkx as nx

from app.core.config import settings
from app.core.convex import ConvexConfig
from app.core.errors import ConstructionError, UnknownSuiteError
from app.services.compat_service import (
    WitnessKind,
    brute_force_oracle,
    exists_witness,
    tree_prefilter,
)
from app.services.construction_service import (
    caterpillar_path_between,
    ear_rotation_sequence,
    route_to_perimeter,
    split_into_2cycles,
    tree_for_inside_cycles,
    tree_path_between,
    validate_sequence,
)
from app.services.dcg_service import DCG, analyze, build_dcg, distance
from app.services.matching_service import (
    Parity,
    PlaneMatching,
    SemicycleKind,
    all_semicycles,
    dual_tree,
    enumerate_matchings,
    format_matching,
    inside_cycles,
    perimeter_matching,
    pick_disjoint,
    rotate,
    semiear_parities,
    shared_perimeter_edges,
    two_semiear_matching,
)

logger = logging.getLogger("matchloom.verify")

ProgressFn = Callable[[float], None]


@dataclass
class Check:
    name: str
    anchor: str
    passed: bool
    detail: str = ""

    def as_dict(self) -> dict:
        return {"name": self.name, "anchor": self.anchor, "pass": self.passed, "detail": self.detail}


@dataclass
class SuiteReport:
    suite: str
    points: int
    checks: list[Check] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def add(self, name: str, anchor: str, passed: bool, detail: str = "") -> Check:
        check = Check(name, anchor, bool(passed), detail)
        self.checks.append(check)
        level = logging.INFO if check.passed else logging.WARNING
        logger.log(level, "[%s] %s: %s %s", self.suite, name, "pass" if check.passed else "FAIL", detail)
        return check

    def as_dict(self) -> dict:
        return {"suite": self.suite, "points": self.points, "checks": [c.as_dict() for c in self.checks]}


class _Context:
    """Graphs built once per suite run."""

    def __init__(self, config: ConvexConfig, workers: int | None, unsafe_size: bool, progress: ProgressFn | None):
        self.config = config
        self.workers = workers
        self.unsafe_size = unsafe_size
        self.progress = progress
        self._graphs: dict[tuple[int, WitnessKind], DCG] = {}

    def graph(self, family: WitnessKind, size: int | None = None) -> DCG:
        size = size or self.config.size
        key = (size, family)
        if key not in self._graphs:
            self._graphs[key] = build_dcg(ConvexConfig(size), family, self.workers, self.unsafe_size)
        return self._graphs[key]

    def tick(self, fraction: float) -> None:
        if self.progress:
            self.progress(min(1.0, fraction))


def _pairs(matchings: list[PlaneMatching]):
    return combinations(matchings, 2)


def _examples(items: list[str], limit: int = 5) -> str:
    shown = "; ".join(items[:limit])
    more = f" (+{len(items) - limit} more)" if len(items) > limit else ""
    return shown + more


# ---------------------------------------------------------------------------
# suites


def _tree_diameter(ctx: _Context, report: SuiteReport) -> None:
    result = analyze(ctx.graph(WitnessKind.TREE))
    if ctx.config.size >= 10:
        report.add("tree graph connected", "tree graph is connected from 10 points on", result.connected, result.summary())
        report.add(
            "tree graph diameter",
            "diameter between 4 and 5",
            result.connected and result.diameter in (4, 5),
            f"diameter={result.diameter} pair={result.diameter_pair}",
        )
    else:
        report.add("tree graph connectivity", "reported only below 10 points", True, result.summary())


def _tree_lower_bound(ctx: _Context, report: SuiteReport) -> None:
    size = ctx.config.size
    if size < 8:
        report.add("2-semiear distance", "needs at least 8 points", True, "no 2-semiear matchings at this size")
        return
    dcg = ctx.graph(WitnessKind.TREE)
    even = two_semiear_matching(ctx.config, Parity.EVEN)
    odd = two_semiear_matching(ctx.config, Parity.ODD)
    d = distance(dcg, even, odd)
    label = "2-semiear" if size % 4 == 0 else "near-2-semiear"
    detail = f"{even} | {odd} distance={d if d is not None else 'inf'}"
    if size >= 10:
        report.add(f"{label} distance", "even and odd matchings are at least 4 apart", d is None or d >= 4, detail)
    else:
        report.add(f"{label} distance", "reported only below 10 points", True, detail)


def _shared_perimeter(ctx: _Context, report: SuiteReport) -> None:
    dcg = ctx.graph(WitnessKind.TREE)
    bad = [
        f"{dcg.matchings[a]} | {dcg.matchings[b]}"
        for a, b in dcg.edges()
        if len(shared_perimeter_edges(dcg.matchings[a], dcg.matchings[b])) < 2
    ]
    report.add(
        "shared perimeter edges",
        "tree-compatible matchings share at least two perimeter edges",
        not bad,
        f"{dcg.edge_count} edges checked, {len(bad)} violations {_examples(bad)}".strip(),
    )


def _path_sequences(ctx: _Context, report: SuiteReport, one_legged: bool) -> None:
    family = WitnessKind.ONE_LEGGED if one_legged else WitnessKind.CATERPILLAR
    result = analyze(ctx.graph(family))
    if ctx.config.size < 10:
        report.add(f"{family.value} graph connectivity", "reported only below 10 points", True, result.summary())
        return
    report.add(f"{family.value} graph connected", "connected from 10 points on", result.connected, result.summary())
    matchings = enumerate_matchings(ctx.config)
    bound = 5 * ctx.config.n / 2
    total = len(matchings) * (len(matchings) - 1) // 2
    longest, failures = 0, []
    for done, (m1, m2) in enumerate(_pairs(matchings), start=1):
        try:
            seq = caterpillar_path_between(m1, m2, one_legged=one_legged)
        except ConstructionError as exc:
            failures.append(f"{m1} | {m2}: {exc}")
            continue
        longest = max(longest, len(seq))
        if not one_legged and len(seq) > bound:
            failures.append(f"{m1} | {m2}: {len(seq)} steps")
        if any(step.searched or len(step.semicycles) != 1 for step in seq.steps):
            failures.append(f"{m1} | {m2}: a step is not a single inside-cycle rotation")
        elif one_legged and any(step.semicycles[0].k != 2 for step in seq.steps):
            failures.append(f"{m1} | {m2}: a step is not a single 2-cycle rotation")
        if done % 200 == 0:
            ctx.tick(done / total)
    anchor = "at most 5n/2 steps" if not one_legged else "one inside 2-cycle per step"
    report.add(f"{family.value} sequences", anchor, not failures, f"{total} pairs, longest={longest} {_examples(failures)}".strip())
    if one_legged:
        _split_composition(ctx, report)


def _split_composition(ctx: _Context, report: SuiteReport) -> None:
    failures, count = [], 0
    for m in enumerate_matchings(ctx.config):
        for cycle in inside_cycles(m):
            count += 1
            try:
                parts = split_into_2cycles(m, cycle)
            except ConstructionError as exc:
                failures.append(f"{m}: {exc}")
                continue
            if len(parts) != cycle.k - 1 or any(p.k != 2 for p in parts):
                failures.append(f"{m}: {len(parts)} parts for a {cycle.k}-cycle")
    report.add("2-cycle split", "composed 2-cycle rotations equal the cycle rotation", not failures, f"{count} cycles {_examples(failures)}".strip())


def _path_isolation(ctx: _Context, report: SuiteReport) -> None:
    dcg = ctx.graph(WitnessKind.PATH)
    bad, count = [], 0
    for i, m in enumerate(dcg.matchings):
        if len(dual_tree(m).leaves) >= 3:
            count += 1
            if dcg.graph.degree(i) != 0:
                bad.append(str(m))
    report.add(
        "three semiears isolate",
        "matchings with at least three semiears have no path-compatible partner",
        not bad,
        f"{count} matchings checked {_examples(bad)}".strip(),
    )
    found = search_two_semiear_path_obstruction(ctx.config)
    report.add(
        "two-semiear path obstructions",
        "informational search",
        True,
        f"{len(found)} matching(s) with two semiears and no spanning path {_examples(found)}".strip(),
    )


def _path_components(ctx: _Context, report: SuiteReport) -> None:
    dcg = ctx.graph(WitnessKind.PATH)
    even = dcg.index_of(perimeter_matching(ctx.config, Parity.EVEN))
    odd = dcg.index_of(perimeter_matching(ctx.config, Parity.ODD))
    component = nx.node_connected_component(dcg.graph, even)
    report.add(
        "perimeter matchings separated",
        "the two perimeter matchings are not path-connected",
        odd not in component,
        f"even component has {len(component)} matching(s)",
    )
    mixed = [str(dcg.matchings[i]) for i in sorted(component) if any(p is not Parity.EVEN for p in semiear_parities(dcg.matchings[i]))]
    report.add(
        "even component parity",
        "every matching path-connected to the even perimeter matching has only even semiears",
        not mixed,
        _examples(mixed),
    )
    report.add(
        "perimeter degrees",
        "informational",
        True,
        f"even degree={dcg.graph.degree(even)} odd degree={dcg.graph.degree(odd)}",
    )


_SMALL_SIZES = {
    4: ("no tree-compatible pair on 4 points", lambda r: r.edge_count == 0),
    6: ("no tree-compatible pair on 6 points", lambda r: r.edge_count == 0),
    8: ("three components on 8 points", lambda r: r.component_count == 3),
}


def _small_sizes(ctx: _Context, report: SuiteReport) -> None:
    for size, (anchor, holds) in _SMALL_SIZES.items():
        result = analyze(ctx.graph(WitnessKind.TREE, size))
        report.add(f"tree graph on {size} points", anchor, holds(result), result.summary())


def _constructions_vs_bfs(ctx: _Context, report: SuiteReport) -> None:
    config = ctx.config
    if config.size < 10:
        report.add("constructions", "need at least 10 points", True, "skipped")
        return
    dcg = ctx.graph(WitnessKind.TREE)
    matchings = enumerate_matchings(config)
    _inside_cycle_trees(ctx, report, matchings)
    if config.size >= 12:
        _ears_and_routes(ctx, report, dcg, matchings)
    failures, longest = [], 0
    total = len(matchings) * (len(matchings) - 1) // 2
    for done, (m1, m2) in enumerate(_pairs(matchings), start=1):
        try:
            seq = tree_path_between(m1, m2)
        except ConstructionError as exc:
            failures.append(f"{m1} | {m2}: {exc}")
            continue
        bfs = distance(dcg, m1, m2)
        longest = max(longest, len(seq))
        if len(seq) > 5 or bfs is None or len(seq) < bfs:
            failures.append(f"{m1} | {m2}: {len(seq)} steps, distance {bfs}")
        if done % 500 == 0:
            ctx.tick(done / total)
    report.add("tree paths", "at most 5 steps and never shorter than the graph distance", not failures, f"{total} pairs, longest={longest} {_examples(failures)}".strip())


def _inside_cycle_trees(ctx: _Context, report: SuiteReport, matchings: list[PlaneMatching]) -> None:
    failures, count = [], 0
    for m in matchings:
        for cycle in inside_cycles(m):
            count += 1
            try:
                tree_for_inside_cycles(m, [cycle])
            except ConstructionError as exc:
                failures.append(f"{m}: {exc}")
    rng = random.Random(settings.random_seed)
    multi = 0
    candidates = [m for m in matchings if len(inside_cycles(m)) >= 2]
    for _ in range(settings.random_pairs if candidates else 0):
        m = rng.choice(candidates)
        chosen = pick_disjoint(rng.sample(inside_cycles(m), len(inside_cycles(m))))
        multi += 1
        try:
            tree_for_inside_cycles(m, chosen)
        except ConstructionError as exc:
            failures.append(f"{m}: {exc}")
    report.add(
        "inside-cycle trees",
        "rotating disjoint inside cycles is tree-compatible",
        not failures,
        f"{count} single cycles, {multi} random sets {_examples(failures)}".strip(),
    )


def _ears_and_routes(ctx: _Context, report: SuiteReport, dcg: DCG, matchings: list[PlaneMatching]) -> None:
    failures, count = [], 0
    for m in matchings:
        for ear in all_semicycles(m):
            if ear.kind is not SemicycleKind.SEMIEAR or ear.k < 6:
                continue
            count += 1
            try:
                seq = ear_rotation_sequence(m, ear)
            except ConstructionError as exc:
                failures.append(f"{m}: {exc}")
                continue
            d = distance(dcg, m, rotate(m, ear))
            if len(seq) != 3 or d is None or d > 3 or validate_sequence(seq):
                failures.append(f"{m}: ear of {ear.k} edges, distance {d}")
    report.add("ear rotations", "large ears rotate in three inside-cycle steps", not failures, f"{count} ears {_examples(failures)}".strip())

    even, odd = (perimeter_matching(ctx.config, p) for p in (Parity.EVEN, Parity.ODD))
    d = distance(dcg, even, odd)
    report.add("perimeter distance", "perimeter matchings are at most 3 apart", d is not None and d <= 3, f"distance={d}")

    failures = []
    for m in matchings:
        try:
            routes = route_to_perimeter(m)
        except ConstructionError as exc:
            failures.append(f"{m}: {exc}")
            continue
        near, far = sorted((len(routes.to_blue), len(routes.to_red)))
        if near > routes.route_class.d_min or far > routes.route_class.d_max:
            failures.append(f"{m}: {routes.route_class.value} {near}/{far}")
    report.add("perimeter routes", "route lengths respect their class bounds", not failures, f"{len(matchings)} matchings {_examples(failures)}".strip())


def _oracle(ctx: _Context, report: SuiteReport) -> None:
    matchings = enumerate_matchings(ctx.config)
    pairs = [(m1, m2) for i, m1 in enumerate(matchings) for m2 in matchings[i:]]
    disagreements = []
    for family in WitnessKind:
        for m1, m2 in pairs:
            exact = exists_witness(m1, m2, family) is not None
            if exact != brute_force_oracle(m1, m2, family):
                disagreements.append(f"{family.value}: {m1} | {m2}")
        ctx.tick((family.rank + 1) / len(WitnessKind))
    report.add(
        "decider agrees with oracle",
        "exact deciders match exhaustive enumeration",
        not disagreements,
        f"{len(pairs)} pairs x {len(WitnessKind)} families {_examples(disagreements)}".strip(),
    )
    differ = sum(1 for m1, m2 in pairs if tree_prefilter(m1, m2) != (exists_witness(m1, m2, WitnessKind.TREE) is not None))
    report.add("prefilter agreement", "informational", True, f"{differ} of {len(pairs)} pairs differ from the exact tree decider")


def _conjecture_diameter(ctx: _Context, report: SuiteReport) -> None:
    result = analyze(ctx.graph(WitnessKind.TREE))
    report.add("tree graph diameter", "informational", True, f"diameter={result.diameter} {result.summary()}")


SUITES: dict[str, Callable[[_Context, SuiteReport], None]] = {
    "tree-diameter": _tree_diameter,
    "tree-lower-bound": _tree_lower_bound,
    "shared-perimeter": _shared_perimeter,
    "caterpillar": lambda ctx, report: _path_sequences(ctx, report, one_legged=False),
    "one-legged": lambda ctx, report: _path_sequences(ctx, report, one_legged=True),
    "path-isolation": _path_isolation,
    "path-components": _path_components,
    "small-sizes": _small_sizes,
    "constructions-vs-bfs": _constructions_vs_bfs,
    "oracle": _oracle,
    "conjecture-diameter": _conjecture_diameter,
}


def verify_suite(
    config: ConvexConfig,
    suite: str,
    workers: int | None = None,
    unsafe_size: bool = False,
    progress: ProgressFn | None = None,
) -> SuiteReport:
    runner = SUITES.get(suite)
    if runner is None:
        raise UnknownSuiteError(f"unknown suite {suite!r}; choose from {', '.join(SUITES)}")
    logger.info("Running suite %s on %d points", suite, config.size)
    report = SuiteReport(suite, config.size)
    runner(_Context(config, workers, unsafe_size, progress), report)
    logger.info("Suite %s on %d points: %s", suite, config.size, "pass" if report.passed else "FAIL")
    return report


def search_two_semiear_path_obstruction(config: ConvexConfig) -> list[str]:
    """Matchings with exactly two semiears that admit no disjoint compatible spanning path."""
    found = []
    for m in enumerate_matchings(config):
        if len(dual_tree(m).leaves) == 2 and exists_witness(m, m, WitnessKind.PATH) is None:
            found.append(format_matching(m))
    logger.info("Two-semiear path obstruction search on %d points: %d found", config.size, len(found))
    return found
