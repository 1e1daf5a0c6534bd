from unittest import TestCase

from app.core.convex import Chord, ConvexConfig
from app.core.errors import MatchingParseError, SemicycleError
from app.services.matching_service import (
    CycleTag,
    MatchingClass,
    Parity,
    SemicycleKind,
    boundary_areas,
    classify_matching,
    dual_tree,
    enumerate_matchings,
    format_matching,
    inside_cycle_neighbors,
    inside_cycles,
    is_semicycle,
    matching_index,
    parse_matching,
    perimeter_matching,
    pick_disjoint,
    reverse_semicycle,
    rotate,
    rotate_matching,
    semiear_parities,
    semicycles_disjoint,
    shared_perimeter_edges,
    sym_diff_structure,
    two_semiear_matching,
)


class EnumerationTests(TestCase):
    def test_catalan_counts(self):
        counts = [len(enumerate_matchings(ConvexConfig(size))) for size in range(2, 17, 2)]
        self.assertEqual(counts, [1, 2, 5, 14, 42, 132, 429, 1430])

    def test_canonical_order_and_index(self):
        matchings = enumerate_matchings(ConvexConfig(8))
        self.assertEqual(matchings, sorted(matchings, key=lambda m: m.edges))
        index = matching_index(matchings[0])
        self.assertEqual([index[m] for m in matchings], list(range(14)))

    def test_perimeter_matchings(self):
        config = ConvexConfig(6)
        self.assertEqual(format_matching(perimeter_matching(config, Parity.EVEN)), "0-1,2-3,4-5")
        self.assertEqual(format_matching(perimeter_matching(config, Parity.ODD)), "0-5,1-2,3-4")
        self.assertEqual(rotate_matching(perimeter_matching(config, Parity.EVEN), 1), perimeter_matching(config, Parity.ODD))


class ParseTests(TestCase):
    def test_round_trip(self):
        m = parse_matching(" 0-7, 2-1,3-6 ,4-5", 8)
        self.assertEqual(format_matching(m), "0-7,1-2,3-6,4-5")

    def test_diagnostics_name_the_invariant(self):
        cases = {
            ("0-2,1-3", 4): "crossing",
            ("0-1,0-2", 4): "duplicate",
            ("0-1,0-1", 4): "duplicate",
            ("0-1", 4): "coverage",
            ("0-4,1-2", 4): "range",
            ("a-b,2-3", 4): "syntax",
            ("0-1,2-3", 5): "points",
        }
        for (text, points), invariant in cases.items():
            with self.assertRaises(MatchingParseError) as ctx:
                parse_matching(text, points)
            self.assertEqual(ctx.exception.invariant, invariant, text)


class SemicycleTests(TestCase):
    def test_whole_square_is_a_semiear(self):
        config = ConvexConfig(4)
        even = perimeter_matching(config, Parity.EVEN)
        sc = is_semicycle(even, even.edges)
        self.assertIs(sc.kind, SemicycleKind.SEMIEAR)
        self.assertEqual(rotate(even, sc), perimeter_matching(config, Parity.ODD))

    def test_inside_cycle_rotation_and_reverse(self):
        odd = perimeter_matching(ConvexConfig(8), Parity.ODD)
        sc = is_semicycle(odd, [Chord(1, 2), Chord(5, 6)])
        self.assertIs(sc.kind, SemicycleKind.INSIDE_CYCLE)
        after = rotate(odd, sc)
        self.assertEqual(format_matching(after), "0-7,1-6,2-5,3-4")
        self.assertEqual(rotate(after, reverse_semicycle(after, sc)), odd)
        self.assertIn(sc, inside_cycles(odd))

    def test_blocked_hull_is_not_a_semicycle(self):
        m = parse_matching("0-7,1-6,2-5,3-4", 8)
        # 1-6 crosses the hull of 0-7 and 3-4
        self.assertIsNone(is_semicycle(m, [Chord(0, 7), Chord(3, 4)]))

    def test_invalid_member_sets_raise(self):
        even = perimeter_matching(ConvexConfig(6), Parity.EVEN)
        with self.assertRaises(SemicycleError):
            is_semicycle(even, [Chord(0, 1)])
        with self.assertRaises(SemicycleError):
            is_semicycle(even, [Chord(0, 1), Chord(1, 2)])

    def test_interleaving_hulls_are_not_disjoint(self):
        m = perimeter_matching(ConvexConfig(8), Parity.EVEN)
        first = is_semicycle(m, [Chord(0, 1), Chord(4, 5)])
        second = is_semicycle(m, [Chord(2, 3), Chord(6, 7)])
        self.assertFalse(semicycles_disjoint(first, second))
        self.assertEqual(pick_disjoint([first, second]), [first])
        nested = perimeter_matching(ConvexConfig(12), Parity.ODD)
        a = is_semicycle(nested, [Chord(1, 2), Chord(5, 6)])
        b = is_semicycle(nested, [Chord(7, 8), Chord(0, 11)])
        self.assertTrue(semicycles_disjoint(a, b))
        self.assertTrue(semicycles_disjoint(b, a))


class DualTreeTests(TestCase):
    def test_perimeter_matching_is_a_single_leaf(self):
        tree = dual_tree(perimeter_matching(ConvexConfig(10), Parity.EVEN))
        self.assertEqual(len(tree.nodes), 1)
        self.assertEqual(tree.leaves, [0])
        self.assertEqual(tree.leaf_counts(), (0, 1))

    def test_two_semiear_matching_on_eight_points(self):
        m = two_semiear_matching(ConvexConfig(8), Parity.EVEN)
        tree = dual_tree(m)
        self.assertEqual(len(tree.nodes), 3)
        self.assertEqual(len(tree.leaves), 2)
        self.assertEqual(len(tree.adjacency), 2)
        self.assertEqual(semiear_parities(m), [Parity.EVEN, Parity.EVEN])

    def test_leaf_colors_follow_matched_perimeter_edges(self):
        for m in enumerate_matchings(ConvexConfig(10)):
            for node in dual_tree(m).nodes:
                for e in node.perimeter_edges:
                    self.assertIs(Parity.of_edge(m.config, e), node.color, format_matching(m))


class ClassificationTests(TestCase):
    def test_classes(self):
        config8, config10 = ConvexConfig(8), ConvexConfig(10)
        self.assertIs(classify_matching(perimeter_matching(config8, Parity.ODD)), MatchingClass.PERIMETER_ODD)
        self.assertIs(classify_matching(two_semiear_matching(config8, Parity.EVEN)), MatchingClass.TWO_SEMIEAR_EVEN)
        self.assertIs(classify_matching(two_semiear_matching(config8, Parity.ODD)), MatchingClass.TWO_SEMIEAR_ODD)
        self.assertIs(classify_matching(two_semiear_matching(config10, Parity.EVEN)), MatchingClass.NEAR_TWO_SEMIEAR_EVEN)
        self.assertIs(classify_matching(parse_matching("0-7,1-6,2-5,3-4", 8)), MatchingClass.TWO_SEMIEAR_ODD)
        self.assertIs(classify_matching(parse_matching("0-3,1-2,4-9,5-8,6-7", 10)), MatchingClass.OTHER)

    def test_exactly_two_perimeter_classes(self):
        labels = [classify_matching(m) for m in enumerate_matchings(ConvexConfig(10))]
        self.assertEqual(sum(1 for c in labels if c.value.startswith("Perimeter")), 2)


class SymDiffTests(TestCase):
    def test_perimeter_pair_is_one_ear(self):
        config = ConvexConfig(6)
        even, odd = perimeter_matching(config, Parity.EVEN), perimeter_matching(config, Parity.ODD)
        structure = sym_diff_structure(even, odd)
        self.assertEqual(len(structure.cycles), 1)
        self.assertIs(structure.cycles[0].tag, CycleTag.EAR)
        self.assertEqual(len(structure.cycles[0].edges), 6)
        self.assertEqual(shared_perimeter_edges(even, odd), [])

    def test_inside_cycle_tag(self):
        odd = perimeter_matching(ConvexConfig(8), Parity.ODD)
        other = parse_matching("0-7,1-6,2-5,3-4", 8)
        structure = sym_diff_structure(odd, other)
        self.assertEqual(structure.common, frozenset({Chord(0, 7), Chord(3, 4)}))
        self.assertEqual([c.tag for c in structure.cycles], [CycleTag.INSIDE_CYCLE])

    def test_boundary_areas_between_crossing_diagonals(self):
        m1 = parse_matching("0-7,1-2,3-6,4-5", 8)
        m2 = parse_matching("0-7,1-4,2-3,5-6", 8)
        areas = boundary_areas(m1, m2)
        self.assertEqual([a.points for a in areas], [(1, 2, 3), (4, 5, 6)])
        self.assertEqual(areas[0].bounding_edges, (Chord(1, 4), Chord(1, 2), Chord(2, 3), Chord(3, 6)))
        self.assertEqual(boundary_areas(m1, m1), [])


class NeighborTests(TestCase):
    def test_inside_cycle_neighbors_are_single_rotations(self):
        m = perimeter_matching(ConvexConfig(8), Parity.EVEN)
        neighbors = inside_cycle_neighbors(m)
        self.assertEqual(len(neighbors), len(inside_cycles(m)))
        for cycle, after in neighbors:
            self.assertEqual(after, rotate(m, cycle))
            self.assertEqual(m.edge_set - after.edge_set, cycle.members)
