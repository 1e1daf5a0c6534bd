from unittest import TestCase

from app.core.convex import (
    Chord,
    ConvexConfig,
    EdgeClass,
    all_chords,
    chords_cross,
    classify_edge,
    in_open_arc,
    is_noncrossing,
    perimeter_edge,
    rotate_chord,
)
from app.core.errors import ChordError, ConfigError


class ConvexConfigTests(TestCase):
    def test_rejects_odd_and_tiny_sizes(self):
        for size in (-2, 0, 1, 7):
            with self.assertRaises(ConfigError):
                ConvexConfig(size)

    def test_ccw_walk_wraps_around(self):
        self.assertEqual(ConvexConfig(6).ccw_walk(4, 1), [4, 5, 0, 1])

    def test_chord_out_of_range(self):
        with self.assertRaises(ChordError):
            ConvexConfig(6).chord(0, 6)


class ChordTests(TestCase):
    def test_normalization(self):
        self.assertEqual(Chord.of(3, 1), Chord(1, 3))
        with self.assertRaises(ChordError):
            Chord(3, 1)
        with self.assertRaises(ChordError):
            Chord(2, 2)

    def test_other_endpoint(self):
        self.assertEqual(Chord(1, 4).other(4), 1)
        with self.assertRaises(ChordError):
            Chord(1, 4).other(2)


class PredicateTests(TestCase):
    def test_crossing_by_cyclic_order(self):
        config = ConvexConfig(6)
        self.assertTrue(chords_cross(config, Chord(0, 3), Chord(1, 4)))
        self.assertFalse(chords_cross(config, Chord(0, 3), Chord(3, 5)))
        self.assertFalse(chords_cross(config, Chord(0, 1), Chord(2, 5)))
        self.assertFalse(chords_cross(config, Chord(0, 5), Chord(1, 4)))

    def test_edge_classes(self):
        config = ConvexConfig(6)
        self.assertIs(classify_edge(config, Chord(0, 1)), EdgeClass.PERIMETER_EVEN)
        self.assertIs(classify_edge(config, Chord(1, 2)), EdgeClass.PERIMETER_ODD)
        # the wrap-around edge starts at 5
        self.assertIs(classify_edge(config, Chord(0, 5)), EdgeClass.PERIMETER_ODD)
        self.assertIs(classify_edge(config, Chord(0, 2)), EdgeClass.DIAGONAL)

    def test_perimeter_edges_are_never_crossed(self):
        config = ConvexConfig(8)
        for i in range(8):
            e = perimeter_edge(config, i)
            self.assertFalse(any(chords_cross(config, e, f) for f in all_chords(config)))

    def test_open_arc(self):
        self.assertTrue(in_open_arc(4, 1, 5, 6))
        self.assertFalse(in_open_arc(4, 1, 2, 6))
        self.assertFalse(in_open_arc(4, 1, 1, 6))

    def test_noncrossing_and_rotation(self):
        config = ConvexConfig(8)
        self.assertTrue(is_noncrossing(config, [Chord(0, 7), Chord(1, 6), Chord(2, 5)]))
        self.assertFalse(is_noncrossing(config, [Chord(0, 4), Chord(2, 6)]))
        self.assertEqual(rotate_chord(config, Chord(5, 7), 2), Chord(1, 7))
