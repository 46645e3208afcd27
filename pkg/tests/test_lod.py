"""Zoom levels: font sizing, label boxes, greedy visibility.

Box goldens are spreadsheet arithmetic (chars x font x ratio / 2^(level-1))
computed by hand. Visibility checks use an exhaustive pairwise
intersection oracle per level.
"""

import numpy as np
import pytest
from hypothesis import given, strategies as st

from rtopmap.graph import TopicGraph, TopicNode
from rtopmap.layout import Embedding
from rtopmap.lod import compute_levels, detail_boxes, font_size, label_box


class TestFontSize:
    @pytest.mark.parametrize("w,expected", [
        (500, 80), (1500, 150), (5000, 200),
        (0, 80), (800, 80), (801, 80.1), (2000, 200), (1999, 199.9),
    ])
    def test_cases_formula(self, w, expected):
        assert font_size(w) == pytest.approx(expected)

    @given(st.integers(min_value=0, max_value=10 ** 6))
    def test_range(self, w):
        assert 80 <= font_size(w) <= 200

    @given(st.integers(min_value=0, max_value=10 ** 6),
           st.integers(min_value=0, max_value=10 ** 6))
    def test_monotone(self, a, b):
        if a <= b:
            assert font_size(a) <= font_size(b)


class TestLabelBox:
    # (chars, font, level) -> (width, height) with ratios 0.6 / 1.2
    GOLDEN = [
        ((10, 80, 1), (480.0, 96.0)),
        ((10, 80, 2), (240.0, 48.0)),
        ((10, 80, 8), (3.75, 0.75)),
        ((1, 80, 1), (48.0, 96.0)),
        ((7, 150, 3), (157.5, 45.0)),
        ((20, 200, 5), (150.0, 15.0)),
    ]

    @pytest.mark.parametrize("args,expected", GOLDEN)
    def test_golden_table(self, args, expected):
        chars, font, level = args
        w, h = label_box(chars, font, level)
        assert (w, h) == pytest.approx(expected)

    def test_level_halving(self):
        w1, h1 = label_box(12, 110, 1)
        w2, h2 = label_box(12, 110, 2)
        assert (w1 / 2, h1 / 2) == pytest.approx((w2, h2))


def make_graph(specs):
    # specs: (id, label, weight)
    return TopicGraph(nodes=[TopicNode(i, l, w) for i, l, w in specs], edges=[])


def make_embedding(g, positions):
    return Embedding(positions=dict(positions), boxes=detail_boxes(g))


def boxes_intersect(p1, b1, p2, b2):
    return (abs(p1[0] - p2[0]) < (b1[0] + b2[0]) / 2
            and abs(p1[1] - p2[1]) < (b1[1] + b2[1]) / 2)


def check_level_no_overlap(view):
    ids = view.visible
    for i in range(len(ids)):
        for j in range(i + 1, len(ids)):
            a, b = ids[i], ids[j]
            assert not boxes_intersect(
                view.positions[a], view.label_boxes[a],
                view.positions[b], view.label_boxes[b]), (view.level, a, b)


class TestComputeLevels:
    def test_greedy_hides_lighter_overlapping_node(self):
        g = make_graph([("a", "ab", 10), ("b", "cd", 5)])
        e = make_embedding(g, {"a": (0.0, 0.0), "b": (2.0, 0.0)})
        views = compute_levels(g, e)
        # base half-width sum = 2*80*0.6 = 96; overlap while 96/2^(l-1) > 2
        assert views[0].visible == ["a"]
        for view in views:
            if 96.0 / 2 ** (view.level - 1) > 2.0:
                assert view.visible == ["a"]
            else:
                assert view.visible == ["a", "b"]
        assert views[6].visible == ["a", "b"]  # level 7: 1.5 < 2

    def test_eight_levels_monotone(self):
        rng = np.random.default_rng(42)
        specs = [(f"t{i:03d}", "x" * int(rng.integers(3, 18)),
                  int(rng.integers(1, 400))) for i in range(300)]
        g = make_graph(specs)
        pos = {s[0]: tuple(rng.uniform(-40, 40, 2)) for s in specs}
        views = compute_levels(g, make_embedding(g, pos))
        assert [v.level for v in views] == list(range(1, 9))
        for a, b in zip(views, views[1:]):
            assert set(a.visible) <= set(b.visible)

    def test_zero_intersections_all_levels(self):
        rng = np.random.default_rng(7)
        specs = [(f"t{i:03d}", "y" * int(rng.integers(2, 25)),
                  int(rng.integers(1, 2000))) for i in range(300)]
        g = make_graph(specs)
        pos = {s[0]: tuple(rng.uniform(-60, 60, 2)) for s in specs}
        views = compute_levels(g, make_embedding(g, pos))
        for view in views:
            check_level_no_overlap(view)

    def test_invisible_nodes_are_blocked(self):
        # every hidden node must intersect a visible one; at level 1 the
        # blocker also has weight >= its own (pure greedy, no seed)
        rng = np.random.default_rng(3)
        specs = [(f"t{i:03d}", "z" * int(rng.integers(2, 15)),
                  int(rng.integers(1, 500))) for i in range(150)]
        g = make_graph(specs)
        pos = {s[0]: tuple(rng.uniform(-30, 30, 2)) for s in specs}
        views = compute_levels(g, make_embedding(g, pos))
        weights = {s[0]: s[2] for s in specs}
        for view in views:
            vis = set(view.visible)
            for s in specs:
                t = s[0]
                if t in vis:
                    continue
                blockers = [
                    v for v in view.visible
                    if boxes_intersect(view.positions[t], view.label_boxes[t],
                                       view.positions[v], view.label_boxes[v])
                ]
                assert blockers, (view.level, t)
                if view.level == 1:
                    assert any(weights[b] >= weights[t] for b in blockers)

    def test_level8_shows_everything_when_detail_boxes_fit(self):
        # overlap-free at detail scale means a fully labeled deepest view
        g = make_graph([(f"t{i}", "abcdef", 10 + i) for i in range(25)])
        base_w = 6 * font_size(10) * 0.6 / 2 ** 7
        pos = {f"t{i}": ((i % 5) * base_w * 1.2, (i // 5) * base_w * 1.2)
               for i in range(25)}
        views = compute_levels(g, make_embedding(g, pos))
        assert set(views[7].visible) == {f"t{i}" for i in range(25)}

    def test_visible_order_weight_desc(self):
        g = make_graph([("a", "aa", 5), ("b", "bb", 50), ("c", "cc", 20)])
        pos = {"a": (0.0, 0.0), "b": (500.0, 0.0), "c": (1000.0, 0.0)}
        views = compute_levels(g, make_embedding(g, pos))
        assert views[7].visible == ["b", "c", "a"]

    def test_font_map_matches_weights(self):
        g = make_graph([("a", "aa", 1500), ("b", "bb", 5)])
        pos = {"a": (0.0, 0.0), "b": (9999.0, 0.0)}
        views = compute_levels(g, make_embedding(g, pos))
        assert views[0].font_size["a"] == 150
        assert views[0].font_size["b"] == 80
