"""Country polygon construction and spectral coloring.

Containment is verified with an independent even-odd ray-casting
oracle, and the partition property with the shoelace formula, so the
tests do not depend on the geometry library used by the implementation.
"""

import numpy as np
import pytest
from shapely.geometry import Polygon
from shapely.ops import unary_union

from rtopmap.countries import COLOR_THRESHOLD, build_countries, color_countries
from rtopmap.layout import Embedding


def ring_area(ring):
    """Signed shoelace area; positive = counterclockwise."""
    total = 0.0
    for (x1, y1), (x2, y2) in zip(ring, ring[1:]):
        total += x1 * y2 - x2 * y1
    return total / 2


def point_in_rings(pt, rings):
    """Even-odd ray casting across all rings of one cluster."""
    x, y = pt
    inside = False
    for ring in rings:
        for (x1, y1), (x2, y2) in zip(ring, ring[1:]):
            if (y1 > y) != (y2 > y):
                xin = x1 + (y - y1) * (x2 - x1) / (y2 - y1)
                if xin > x:
                    inside = not inside
    return inside


def embedding_of(points):
    return Embedding(
        positions={f"t{i:03d}": (float(x), float(y))
                   for i, (x, y) in enumerate(points)},
        boxes={f"t{i:03d}": (0.1, 0.1) for i in range(len(points))},
    )


class TestBuildCountries:
    def test_single_node_rectangle(self):
        e = embedding_of([(2.0, 3.0)])
        cm = build_countries(e, {"t000": 0}, padding=0.05)
        rings = cm.polygons[0]
        assert len(rings) == 1
        ring = rings[0]
        assert ring[0] == ring[-1]
        # degenerate extent: the box inflates by 1.0 on each side
        xs = sorted({round(x, 6) for x, _ in ring})
        ys = sorted({round(y, 6) for _, y in ring})
        assert xs == [1.0, 3.0]
        assert ys == [2.0, 4.0]
        assert ring_area(ring) == pytest.approx(4.0)
        assert ring_area(ring) > 0

    def test_two_nodes_split_by_bisector(self):
        e = embedding_of([(-1.0, 0.0), (1.0, 0.0)])
        cm = build_countries(e, {"t000": 0, "t001": 1}, padding=0.05)
        left = cm.polygons[0]
        right = cm.polygons[1]
        assert len(left) == 1 and len(right) == 1
        # x spans 2 -> inflation 0.1; y is degenerate -> inflation 1.0
        lx = [x for x, _ in left[0]]
        rx = [x for x, _ in right[0]]
        assert min(lx) == pytest.approx(-1.1)
        assert max(lx) == pytest.approx(0.0, abs=1e-9)
        assert min(rx) == pytest.approx(0.0, abs=1e-9)
        assert max(rx) == pytest.approx(1.1)
        assert ring_area(left[0]) == pytest.approx(2.2, rel=1e-6)
        assert ring_area(right[0]) == pytest.approx(2.2, rel=1e-6)
        assert point_in_rings((-1, 0), left)
        assert not point_in_rings((-1, 0), right)
        assert point_in_rings((1, 0), right)

    def test_hundred_nodes_contained_and_partition(self):
        rng = np.random.default_rng(0)
        pts = rng.uniform(-10, 10, (100, 2))
        e = embedding_of(pts)
        clusters = {f"t{i:03d}": int(rng.integers(0, 5)) for i in range(100)}
        assert len(set(clusters.values())) == 5
        cm = build_countries(e, clusters, padding=0.05)

        for i in range(100):
            t = f"t{i:03d}"
            own = cm.polygons[clusters[t]]
            assert point_in_rings(tuple(pts[i]), own), t
            for c, rings in cm.polygons.items():
                if c != clusters[t]:
                    assert not point_in_rings(tuple(pts[i]), rings), (t, c)

        lo = pts.min(axis=0)
        hi = pts.max(axis=0)
        span = hi - lo
        inflate = np.where(span > 0, 0.05 * span, 1.0)
        box_area = float(np.prod(span + 2 * inflate))
        total = sum(ring_area(r) for rings in cm.polygons.values()
                    for r in rings)
        assert total == pytest.approx(box_area, rel=0.005)

    def test_rings_closed_exterior_ccw(self):
        rng = np.random.default_rng(1)
        pts = rng.uniform(0, 5, (40, 2))
        e = embedding_of(pts)
        clusters = {f"t{i:03d}": i % 4 for i in range(40)}
        cm = build_countries(e, clusters, padding=0.05)
        for rings in cm.polygons.values():
            assert any(ring_area(r) > 0 for r in rings)
            for r in rings:
                assert r[0] == r[-1]
                assert len(r) >= 4

    def test_cluster_of_recorded(self):
        e = embedding_of([(0, 0), (3, 0)])
        cm = build_countries(e, {"t000": 1, "t001": 0}, padding=0.1)
        assert cm.cluster_of == {"t000": 1, "t001": 0}

    def test_empty_embedding_rejected(self):
        with pytest.raises(ValueError):
            build_countries(Embedding(positions={}, boxes={}), {}, padding=0.05)

    def test_nonpositive_padding_rejected(self):
        e = embedding_of([(0, 0), (1, 1)])
        with pytest.raises(ValueError):
            build_countries(e, {"t000": 0, "t001": 0}, padding=0.0)

    def test_deterministic(self):
        rng = np.random.default_rng(2)
        pts = rng.uniform(-4, 4, (30, 2))
        e = embedding_of(pts)
        clusters = {f"t{i:03d}": i % 3 for i in range(30)}
        a = build_countries(e, clusters, padding=0.05)
        b = build_countries(e, clusters, padding=0.05)
        assert a.polygons == b.polygons


def cluster_geometry(rings):
    exteriors = [r for r in rings if ring_area(r) > 0]
    holes = [r for r in rings if ring_area(r) < 0]
    polys = []
    for ext in exteriors:
        inner = [h for h in holes if point_in_rings(h[0], [ext])]
        polys.append(Polygon(ext, inner))
    return unary_union(polys)


def polygon_adjacency(polygons):
    geoms = {c: cluster_geometry(r) for c, r in polygons.items()}
    cids = sorted(geoms)
    pairs = set()
    for i, a in enumerate(cids):
        for b in cids[i + 1:]:
            if geoms[a].intersection(geoms[b]).length > 1e-9:
                pairs.add((a, b))
    return pairs


def rgb_distance(a, b):
    return float(np.hypot.reduce(np.subtract(a, b, dtype=float)))


class TestColorCountries:
    def test_two_adjacent_clusters_distance(self):
        e = embedding_of([(-1.0, 0.0), (1.0, 0.0)])
        cm = build_countries(e, {"t000": 0, "t001": 1}, padding=0.05)
        colors = color_countries(cm.polygons)
        assert set(colors) == {0, 1}
        assert rgb_distance(colors[0], colors[1]) >= COLOR_THRESHOLD

    def test_sixteen_cluster_grid_no_close_neighbors(self):
        pts = [(float(c), float(r)) for r in range(8) for c in range(8)]
        e = embedding_of(pts)
        clusters = {f"t{i:03d}": (i // 8 // 2) * 4 + (i % 8) // 2
                    for i in range(64)}
        cm = build_countries(e, clusters, padding=0.05)
        assert len(cm.polygons) == 16
        colors = color_countries(cm.polygons)
        adjacency = polygon_adjacency(cm.polygons)
        assert adjacency  # grid blocks must touch
        for a, b in adjacency:
            assert rgb_distance(colors[a], colors[b]) >= COLOR_THRESHOLD, (a, b)
        for rgb in colors.values():
            assert len(rgb) == 3
            assert all(isinstance(v, int) and 0 <= v <= 255 for v in rgb)

    def test_disconnected_clusters_deterministic(self):
        square = [(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0), (0.0, 0.0)]
        far = [(x + 100.0, y) for x, y in square]
        polygons = {0: [square], 1: [far]}
        first = color_countries(polygons)
        second = color_countries(polygons)
        assert first == second
        assert set(first) == {0, 1}
