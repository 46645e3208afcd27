"""Country polygons: clipped Voronoi cells merged per cluster, colored.

A ring of 16 synthetic sites on a circle at twice the bounding-box
diagonal keeps every real cell finite; cells are clipped to the
padding-inflated bounding box and unioned per cluster. Colors come from
a fixed RGB lattice ordered along the Fiedler vector of the country
adjacency graph.
"""

from __future__ import annotations

import logging
from collections import defaultdict
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import Voronoi
from shapely.geometry import MultiPolygon, Polygon, box as shapely_box
from shapely.geometry.polygon import orient
from shapely.ops import unary_union

log = logging.getLogger(__name__)

N_BOUNDARY_SITES = 16

# all channel combinations differ by >= 85 in RGB distance; the two
# near-gray extremes read poorly as country fills and are dropped
_LEVELS = (40, 150, 235)
PALETTE = tuple(
    (r, g, b)
    for r in _LEVELS for g in _LEVELS for b in _LEVELS
    if not (r == g == b and r in (_LEVELS[0], _LEVELS[-1]))
)
COLOR_THRESHOLD = 80.0

Ring = list[tuple[float, float]]


@dataclass
class CountryMap:
    """Cluster assignment, merged cluster polygons, and fill colors."""

    cluster_of: dict[str, int]
    polygons: dict[int, list[Ring]]
    colors: dict[int, tuple[int, int, int]] = field(default_factory=dict)


def _rings_of(geom) -> list[Ring]:
    parts = geom.geoms if isinstance(geom, MultiPolygon) else [geom]
    rings: list[Ring] = []
    for poly in parts:
        if poly.is_empty:
            continue
        poly = orient(poly, 1.0)  # exterior CCW, holes CW
        rings.append([(float(x), float(y)) for x, y in poly.exterior.coords])
        for hole in poly.interiors:
            rings.append([(float(x), float(y)) for x, y in hole.coords])
    return rings


def build_countries(embedding, clusters: dict[str, int],
                    padding: float = 0.05) -> CountryMap:
    """Merge the Voronoi cells of each cluster into country polygons.

    The diagram is computed over all node centers plus the synthetic
    boundary ring, then clipped to the bounding box inflated by the
    given padding fraction (degenerate extents inflate by 1.0).
    """
    ids = sorted(embedding.positions)
    if not ids:
        raise ValueError("cannot build countries without nodes")
    if padding <= 0:
        raise ValueError(f"padding must be positive, got {padding}")
    missing = [t for t in ids if t not in clusters]
    if missing:
        raise ValueError(f"nodes without a cluster: {missing[:5]}")

    pts = np.array([embedding.positions[t] for t in ids], dtype=float)
    lo = pts.min(axis=0)
    hi = pts.max(axis=0)
    span = hi - lo
    inflate = np.where(span > 0, padding * span, 1.0)
    blo = lo - inflate
    bhi = hi + inflate
    clip = shapely_box(float(blo[0]), float(blo[1]), float(bhi[0]), float(bhi[1]))

    center = (blo + bhi) / 2
    radius = 2.0 * float(np.hypot(*(bhi - blo)))
    angles = 2 * np.pi * np.arange(N_BOUNDARY_SITES) / N_BOUNDARY_SITES
    boundary = center + radius * np.column_stack([np.cos(angles), np.sin(angles)])
    vor = Voronoi(np.vstack([pts, boundary]))

    cells: dict[int, list[Polygon]] = defaultdict(list)
    for i, t in enumerate(ids):
        region = vor.regions[vor.point_region[i]]
        if not region or -1 in region:
            continue  # cannot happen while the boundary ring encloses all nodes
        verts = vor.vertices[region]
        mid = verts.mean(axis=0)
        order = np.argsort(np.arctan2(verts[:, 1] - mid[1], verts[:, 0] - mid[0]))
        cell = Polygon(verts[order]).intersection(clip)
        if not cell.is_empty:
            cells[clusters[t]].append(cell)

    polygons = {cid: _rings_of(unary_union(cells[cid]))
                for cid in sorted(cells)}
    return CountryMap(cluster_of={t: clusters[t] for t in ids},
                      polygons=polygons)


def _signed_area(ring: Ring) -> float:
    total = 0.0
    for (x1, y1), (x2, y2) in zip(ring, ring[1:]):
        total += x1 * y2 - x2 * y1
    return total / 2


def _geometry(rings: list[Ring]):
    exteriors = [r for r in rings if _signed_area(r) > 0]
    holes = [r for r in rings if _signed_area(r) < 0]
    polys = []
    for ext in exteriors:
        shell = Polygon(ext)
        inner = [h for h in holes if shell.contains(Polygon(h).representative_point())]
        polys.append(Polygon(ext, inner))
    return unary_union(polys)


def _adjacency(polygons: dict[int, list[Ring]]) -> dict[int, set[int]]:
    """Clusters are adjacent when their polygons share a boundary segment."""
    geoms = {c: _geometry(r) for c, r in polygons.items()}
    cids = sorted(geoms)
    adj: dict[int, set[int]] = {c: set() for c in cids}
    for i, a in enumerate(cids):
        for b in cids[i + 1:]:
            if geoms[a].intersection(geoms[b]).length > 1e-9:
                adj[a].add(b)
                adj[b].add(a)
    return adj


def _rgb_distance(a, b) -> float:
    return float(np.hypot.reduce(np.subtract(a, b, dtype=float)))


def color_countries(polygons: dict[int, list[Ring]]) -> dict[int, tuple[int, int, int]]:
    """Assign palette colors so adjacent countries stay distinguishable.

    Clusters are ordered by the Fiedler vector of the adjacency
    Laplacian and walked through the palette with a large stride, so
    spectral neighbors land on well-separated palette slots. A greedy
    post-pass reassigns any adjacent pair that still ends up too close.
    """
    cids = sorted(polygons)
    if not cids:
        return {}
    adjacency = _adjacency(polygons)

    if len(cids) > 1:
        k = len(cids)
        index = {c: i for i, c in enumerate(cids)}
        A = np.zeros((k, k))
        for c, others in adjacency.items():
            for o in others:
                A[index[c], index[o]] = 1.0
        L = np.diag(A.sum(axis=1)) - A
        fiedler = np.linalg.eigh(L)[1][:, 1]
        if fiedler[int(np.argmax(np.abs(fiedler)))] < 0:
            fiedler = -fiedler
        order = [c for _, c in sorted(zip(fiedler, cids))]
    else:
        order = list(cids)

    P = len(PALETTE)
    stride = 12  # coprime with the 25-entry palette, near half its length
    colors = {c: PALETTE[(i * stride) % P] for i, c in enumerate(order)}

    for c in order:
        neighbors = [colors[o] for o in sorted(adjacency[c])]
        if all(_rgb_distance(colors[c], nc) >= COLOR_THRESHOLD
               for nc in neighbors):
            continue
        best = None
        best_gap = -1.0
        for cand in PALETTE:
            gap = min((_rgb_distance(cand, nc) for nc in neighbors),
                      default=np.inf)
            if gap > best_gap:
                best_gap = gap
                best = cand
        colors[c] = best
        if best_gap < COLOR_THRESHOLD:
            log.warning(
                "cluster %s: no palette color is %.0f away from all %d "
                "neighbors (best gap %.1f)",
                c, COLOR_THRESHOLD, len(neighbors), best_gap)
    return colors
