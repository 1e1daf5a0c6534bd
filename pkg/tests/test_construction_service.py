import random
from unittest import TestCase, mock

from app.core.convex import Chord, ConvexConfig, crosses_any
from app.core.errors import ConstructionError
from app.services import construction_service
from app.services.compat_service import WitnessKind, validate_witness
from app.services.construction_service import (
    RouteClass,
    Side,
    caterpillar_for_inside_cycle,
    caterpillar_path_between,
    ear_rotation_sequence,
    greedy_caterpillar,
    one_legged_for_2cycle,
    perimeter_swap,
    route_class,
    route_to_perimeter,
    search_path,
    split_into_2cycles,
    tree_for_inside_cycles,
    tree_path_between,
    validate_sequence,
)
from app.services.dcg_service import build_dcg, distance
from app.services.matching_service import (
    Parity,
    SemicycleKind,
    enumerate_matchings,
    inside_cycles,
    is_semicycle,
    parse_matching,
    perimeter_matching,
    rotate,
    rotate_all,
    two_semiear_matching,
)


def _odd8():
    return perimeter_matching(ConvexConfig(8), Parity.ODD)


class InsideCycleTreeTests(TestCase):
    def test_single_cycle(self):
        m = _odd8()
        cycle = is_semicycle(m, [Chord(1, 2), Chord(5, 6)])
        witness = tree_for_inside_cycles(m, [cycle])
        self.assertEqual(validate_witness(m.config, witness, (m, rotate(m, cycle))), [])

    def test_every_cycle_set_on_ten_points(self):
        for m in enumerate_matchings(ConvexConfig(10)):
            cycles = inside_cycles(m)
            for cycle in cycles:
                witness = tree_for_inside_cycles(m, [cycle])
                self.assertEqual(validate_witness(m.config, witness, (m, rotate(m, cycle))), [], str(m))

    def test_disjoint_pair_on_twelve_points(self):
        m = perimeter_matching(ConvexConfig(12), Parity.ODD)
        first = is_semicycle(m, [Chord(1, 2), Chord(5, 6)])
        second = is_semicycle(m, [Chord(7, 8), Chord(0, 11)])
        witness = tree_for_inside_cycles(m, [first, second])
        after = rotate_all(m, [first, second])
        self.assertEqual(validate_witness(m.config, witness, (m, after)), [])

    def test_rejects_semiears(self):
        even = perimeter_matching(ConvexConfig(8), Parity.EVEN)
        with self.assertRaises(ConstructionError):
            tree_for_inside_cycles(even, [is_semicycle(even, even.edges)])

    def test_every_single_cycle_from_eight_to_twelve_points(self):
        for size in (8, 10, 12):
            for m in enumerate_matchings(ConvexConfig(size)):
                for cycle in inside_cycles(m):
                    witness = tree_for_inside_cycles(m, [cycle])
                    self.assertEqual(validate_witness(m.config, witness, (m, rotate(m, cycle))), [], f"{m} {cycle.members}")

    def test_diagonals_sharing_an_endpoint(self):
        m = parse_matching("0-1,2-3,4-7,5-6,8-9", 10)
        cycle = is_semicycle(m, [Chord(4, 7), Chord(8, 9)])
        self.assertEqual(construction_service._cycle_fans(m.config, cycle), [Chord(4, 8)])
        witness = tree_for_inside_cycles(m, [cycle])
        self.assertEqual(validate_witness(m.config, witness, (m, rotate(m, cycle))), [])

    def test_adjacent_diagonals_give_one_fan_chord(self):
        m = parse_matching("0-3,1-2,4-5,6-7", 8)
        cycle = is_semicycle(m, [Chord(0, 3), Chord(6, 7)])
        self.assertEqual(construction_service._cycle_fans(m.config, cycle), [Chord(3, 7)])

    def test_fans_never_cross(self):
        for size in (8, 10, 12):
            config = ConvexConfig(size)
            for m in enumerate_matchings(config):
                for cycle in inside_cycles(m):
                    fans = construction_service._cycle_fans(config, cycle)
                    for i, chord in enumerate(fans):
                        self.assertFalse(crosses_any(config, chord, fans[i + 1 :]), f"{m} {cycle.members}")

    def test_invalid_drawing_raises(self):
        m = _odd8()
        cycle = is_semicycle(m, [Chord(1, 2), Chord(5, 6)])
        with mock.patch.object(construction_service, "_complete_plane", side_effect=lambda config, seed, allowed: list(seed)):
            with self.assertRaises(ConstructionError):
                tree_for_inside_cycles(m, [cycle])


class EarAndRouteTests(TestCase):
    def test_perimeter_swap_takes_three_steps(self):
        config = ConvexConfig(12)
        seq = perimeter_swap(config)
        self.assertEqual(len(seq), 3)
        self.assertEqual(seq.end, perimeter_matching(config, Parity.ODD))
        self.assertEqual(validate_sequence(seq), [])

    def test_perimeter_swap_needs_twelve_points(self):
        with self.assertRaises(ConstructionError):
            perimeter_swap(ConvexConfig(10))

    def test_small_ear_is_rejected(self):
        even = perimeter_matching(ConvexConfig(10), Parity.EVEN)
        with self.assertRaises(ConstructionError):
            ear_rotation_sequence(even, is_semicycle(even, even.edges))

    def test_ear_steps_are_inside_cycles(self):
        even = perimeter_matching(ConvexConfig(14), Parity.EVEN)
        ear = is_semicycle(even, even.edges[:6])
        seq = ear_rotation_sequence(even, ear)
        self.assertEqual(seq.end, rotate(even, ear))
        self.assertTrue(all(sc.kind is SemicycleKind.INSIDE_CYCLE for step in seq.steps for sc in step.semicycles))

    def test_route_classes(self):
        config = ConvexConfig(12)
        self.assertIs(route_class(perimeter_matching(config, Parity.EVEN)), RouteClass.IS_PERIMETER)
        self.assertIs(route_class(two_semiear_matching(config, Parity.EVEN)), RouteClass.A1)
        self.assertEqual((RouteClass.A3.d_min, RouteClass.A3.d_max), (3, 3))

    def test_routes_respect_class_bounds(self):
        config = ConvexConfig(12)
        for m in enumerate_matchings(config):
            routes = route_to_perimeter(m)
            near, far = sorted((len(routes.to_blue), len(routes.to_red)))
            self.assertLessEqual(near, routes.route_class.d_min, str(m))
            self.assertLessEqual(far, routes.route_class.d_max, str(m))
            self.assertEqual(routes.to_blue.end, perimeter_matching(config, Parity.ODD))
            self.assertEqual(routes.to_red.end, perimeter_matching(config, Parity.EVEN))

    def test_routes_need_twelve_points(self):
        with self.assertRaises(ConstructionError):
            route_to_perimeter(perimeter_matching(ConvexConfig(10), Parity.EVEN))


class TreePathTests(TestCase):
    def test_identical_matchings(self):
        m = two_semiear_matching(ConvexConfig(12), Parity.ODD)
        self.assertEqual(len(tree_path_between(m, m)), 0)

    def test_search_on_ten_points_is_shortest(self):
        config = ConvexConfig(10)
        dcg = build_dcg(config, WitnessKind.TREE)
        matchings = enumerate_matchings(config)
        for m2 in matchings[1::5]:
            seq = tree_path_between(matchings[0], m2)
            self.assertEqual(len(seq), distance(dcg, matchings[0], m2))
            self.assertEqual(validate_sequence(seq), [])

    def test_twelve_points_at_most_five_steps(self):
        config = ConvexConfig(12)
        matchings = enumerate_matchings(config)
        dcg = build_dcg(config, WitnessKind.TREE)
        for m1, m2 in zip(matchings[::11], matchings[5::11]):
            seq = tree_path_between(m1, m2)
            self.assertLessEqual(len(seq), 5)
            self.assertGreaterEqual(len(seq), distance(dcg, m1, m2))
            self.assertEqual(seq.start, m1)
            self.assertEqual(seq.end, m2)

    def test_two_semiear_pair_needs_four_steps(self):
        config = ConvexConfig(12)
        seq = tree_path_between(two_semiear_matching(config, Parity.EVEN), two_semiear_matching(config, Parity.ODD))
        self.assertIn(len(seq), (4, 5))

    def test_too_small(self):
        config = ConvexConfig(8)
        with self.assertRaises(ConstructionError):
            tree_path_between(perimeter_matching(config, Parity.EVEN), perimeter_matching(config, Parity.ODD))

    def test_search_path_reports_disconnection(self):
        config = ConvexConfig(10)
        even, odd = perimeter_matching(config, Parity.EVEN), perimeter_matching(config, Parity.ODD)
        with self.assertRaises(ConstructionError):
            search_path(even, odd, WitnessKind.PATH)


class CaterpillarTests(TestCase):
    def test_greedy_caterpillar_spans_the_arc(self):
        m = parse_matching("0-5,1-2,3-4", 6)
        witness = greedy_caterpillar(m, Chord(0, 5), Side.LEFT)
        self.assertEqual(witness.kind, WitnessKind.ONE_LEGGED)
        self.assertEqual({p for e in witness.edges for p in (e.a, e.b)}, set(range(6)))
        with self.assertRaises(ConstructionError):
            greedy_caterpillar(m, Chord(0, 5), Side.RIGHT)

    def test_inside_cycle_caterpillars(self):
        for size in (8, 10, 12):
            for m in enumerate_matchings(ConvexConfig(size)):
                for cycle in inside_cycles(m):
                    witness = caterpillar_for_inside_cycle(m, cycle)
                    self.assertTrue(WitnessKind.CATERPILLAR.admits(witness.kind))
                    self.assertEqual(validate_witness(m.config, witness, (m, rotate(m, cycle))), [], str(m))

    def test_one_legged_for_every_2cycle(self):
        for m in enumerate_matchings(ConvexConfig(10)):
            for cycle in inside_cycles(m):
                if cycle.k != 2:
                    continue
                witness = one_legged_for_2cycle(m, cycle)
                self.assertTrue(WitnessKind.ONE_LEGGED.admits(witness.kind))
                self.assertEqual(validate_witness(m.config, witness, (m, rotate(m, cycle))), [], str(m))

    def test_split_reproduces_rotation(self):
        m = perimeter_matching(ConvexConfig(12), Parity.ODD)
        cycle = is_semicycle(m, [Chord(1, 2), Chord(5, 6), Chord(9, 10)])
        parts = split_into_2cycles(m, cycle)
        self.assertEqual(len(parts), 2)
        current = m
        for part in parts:
            self.assertEqual(part.k, 2)
            current = rotate(current, part)
        self.assertEqual(current, rotate(m, cycle))

    def test_caterpillar_path_between_perimeters(self):
        config = ConvexConfig(10)
        even, odd = perimeter_matching(config, Parity.EVEN), perimeter_matching(config, Parity.ODD)
        for one_legged in (False, True):
            seq = caterpillar_path_between(even, odd, one_legged=one_legged)
            kind = WitnessKind.ONE_LEGGED if one_legged else WitnessKind.CATERPILLAR
            self.assertEqual(seq.end, odd)
            self.assertGreater(len(seq), 0)
            self.assertEqual(validate_sequence(seq, kind), [])

    def test_steps_rotate_single_cycles_within_the_bound(self):
        rng = random.Random(11)
        for size in (10, 12):
            config = ConvexConfig(size)
            matchings = enumerate_matchings(config)
            pairs = [(matchings[0], m) for m in matchings[1:6]] + [tuple(rng.sample(matchings, 2)) for _ in range(12)]
            for m1, m2 in pairs:
                seq = caterpillar_path_between(m1, m2)
                self.assertLessEqual(len(seq), 5 * config.n // 2, f"{m1} | {m2}")
                self.assertEqual(seq.end, m2)
                for step in seq.steps:
                    self.assertFalse(step.searched)
                    self.assertEqual(len(step.semicycles), 1)
                    self.assertIs(step.semicycles[0].kind, SemicycleKind.INSIDE_CYCLE)

    def test_one_legged_steps_rotate_2cycles(self):
        rng = random.Random(5)
        for size in (10, 12):
            matchings = enumerate_matchings(ConvexConfig(size))
            for m1, m2 in [tuple(rng.sample(matchings, 2)) for _ in range(8)]:
                seq = caterpillar_path_between(m1, m2, one_legged=True)
                self.assertEqual(validate_sequence(seq, WitnessKind.ONE_LEGGED), [])
                for step in seq.steps:
                    self.assertFalse(step.searched)
                    self.assertEqual([sc.k for sc in step.semicycles], [2])

    def test_constructions_never_consult_the_decider(self):
        config = ConvexConfig(10)
        even, odd = perimeter_matching(config, Parity.EVEN), perimeter_matching(config, Parity.ODD)
        with mock.patch.object(construction_service, "exists_witness", side_effect=AssertionError("decider called")):
            for m in enumerate_matchings(config):
                for cycle in inside_cycles(m):
                    tree_for_inside_cycles(m, [cycle])
                    caterpillar_for_inside_cycle(m, cycle)
                    if cycle.k == 2:
                        one_legged_for_2cycle(m, cycle)
            caterpillar_path_between(even, odd)
            caterpillar_path_between(even, odd, one_legged=True)
            tree_path_between(perimeter_matching(ConvexConfig(12), Parity.EVEN), two_semiear_matching(ConvexConfig(12), Parity.ODD))
