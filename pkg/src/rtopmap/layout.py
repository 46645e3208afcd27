"""Force-directed embedding, overlap removal, and spatial clustering.

The embedding uses a spring-electrical model: attraction d^2/K along
edges, repulsion C*K^2/d between all node pairs (scaled by coarse-node
mass). Large components are coarsened by heaviest-edge matching and
refined level by level; far-field repulsion goes through a quadtree.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass

import numpy as np
from scipy.spatial import Delaunay, QhullError

from .graph import TopicGraph
from .lod import HEIGHT_RATIO, WIDTH_RATIO, detail_boxes

# sunflower-seed angle, used wherever a deterministic direction is needed
_GOLDEN_ANGLE = 2.399963229728653

_DIRECT_LIMIT = 400  # below this, exact pairwise repulsion is cheaper


class LayoutError(ValueError):
    """Raised when a layout cannot be computed."""


class OverlapError(RuntimeError):
    """Raised when overlap removal fails to converge."""

    def __init__(self, pairs: int, worst: float):
        super().__init__(
            f"{pairs} overlapping label pairs remain (worst depth {worst:.4g})")
        self.pairs = pairs
        self.worst = worst


@dataclass
class Embedding:
    """Node positions plus the label boxes used for overlap removal."""

    positions: dict[str, tuple[float, float]]
    boxes: dict[str, tuple[float, float]]


def _repulsion_direct(pos: np.ndarray, mass: np.ndarray, ck2: float) -> np.ndarray:
    delta = pos[:, None, :] - pos[None, :, :]
    d2 = delta[..., 0] ** 2 + delta[..., 1] ** 2
    np.fill_diagonal(d2, np.inf)
    # coincident pairs get no force; they separate via other interactions
    with np.errstate(divide="ignore"):
        inv = np.where(d2 > 0, 1.0 / d2, 0.0)
    coef = ck2 * mass[None, :] * inv
    return (delta * coef[..., None]).sum(axis=1)


class _QuadTree:
    """Flat-array quadtree holding per-cell mass and center of mass."""

    def __init__(self, pos: np.ndarray, mass: np.ndarray, leaf_cap: int = 16):
        self.pos = pos
        self.mass = mass
        cx: list[float] = []
        cy: list[float] = []
        msum: list[float] = []
        size: list[float] = []
        children: list[list[int]] = []
        leaf_start: list[int] = []
        leaf_count: list[int] = []
        order: list[np.ndarray] = []
        n_stored = [0]

        lo = pos.min(axis=0)
        side = float(max(np.ptp(pos[:, 0]), np.ptp(pos[:, 1]), 1e-9))

        def build(idx: np.ndarray, x0: float, y0: float, s: float) -> int:
            ci = len(cx)
            m = mass[idx]
            mt = float(m.sum())
            cx.append(float((pos[idx, 0] * m).sum() / mt))
            cy.append(float((pos[idx, 1] * m).sum() / mt))
            msum.append(mt)
            size.append(s)
            children.append([-1, -1, -1, -1])
            leaf_start.append(-1)
            leaf_count.append(-1)
            if idx.size <= leaf_cap or s <= 1e-12:
                leaf_start[ci] = n_stored[0]
                leaf_count[ci] = int(idx.size)
                order.append(idx)
                n_stored[0] += int(idx.size)
                return ci
            half = s / 2
            xm = x0 + half
            ym = y0 + half
            right = pos[idx, 0] >= xm
            top = pos[idx, 1] >= ym
            quads = (
                (~right & ~top, x0, y0),
                (right & ~top, xm, y0),
                (~right & top, x0, ym),
                (right & top, xm, ym),
            )
            for q, (sel, qx, qy) in enumerate(quads):
                sub = idx[sel]
                if sub.size:
                    children[ci][q] = build(sub, qx, qy, half)
            return ci

        build(np.arange(len(pos)), float(lo[0]), float(lo[1]), side)
        self.cx = np.array(cx)
        self.cy = np.array(cy)
        self.msum = np.array(msum)
        self.size = np.array(size)
        self.children = np.array(children, dtype=np.int64)
        self.leaf_start = np.array(leaf_start, dtype=np.int64)
        self.leaf_count = np.array(leaf_count, dtype=np.int64)
        self.order = np.concatenate(order) if order else np.empty(0, np.int64)

    def forces(self, ck2: float, theta: float) -> np.ndarray:
        """Repulsion on every stored point, opening cells wider than theta*d."""
        pos = self.pos
        n = len(pos)
        acc = np.zeros((n, 2))
        qn = np.arange(n)
        qc = np.zeros(n, dtype=np.int64)
        t2 = theta * theta
        while qn.size:
            dx = pos[qn, 0] - self.cx[qc]
            dy = pos[qn, 1] - self.cy[qc]
            d2 = dx * dx + dy * dy
            is_leaf = self.leaf_count[qc] >= 0
            far = ~is_leaf & (self.size[qc] ** 2 < t2 * d2)
            if far.any():
                coef = ck2 * self.msum[qc[far]] / d2[far]
                np.add.at(acc, qn[far],
                          np.column_stack([dx[far], dy[far]]) * coef[:, None])
            if is_leaf.any():
                counts = self.leaf_count[qc[is_leaf]]
                total = int(counts.sum())
                if total:
                    starts = self.leaf_start[qc[is_leaf]]
                    rep_q = np.repeat(qn[is_leaf], counts)
                    base = np.repeat(np.cumsum(counts) - counts, counts)
                    offs = np.arange(total) - base
                    pts = self.order[np.repeat(starts, counts) + offs]
                    ddx = pos[rep_q, 0] - pos[pts, 0]
                    ddy = pos[rep_q, 1] - pos[pts, 1]
                    dd2 = ddx * ddx + ddy * ddy
                    keep = dd2 > 0  # drops self-interaction
                    coef = ck2 * self.mass[pts[keep]] / dd2[keep]
                    np.add.at(acc, rep_q[keep],
                              np.column_stack([ddx[keep], ddy[keep]]) * coef[:, None])
            near = ~far & ~is_leaf
            kids = self.children[qc[near]]
            qn = np.repeat(qn[near], 4)
            qc = kids.reshape(-1)
            ok = qc >= 0
            qn = qn[ok]
            qc = qc[ok]
        return acc


def repulsion_forces(pos: np.ndarray, mass: np.ndarray, ck2: float,
                     theta: float, force_tree: bool = False) -> np.ndarray:
    """Pairwise 1/d repulsion, exact or quadtree-approximated."""
    pos = np.asarray(pos, dtype=float)
    mass = np.asarray(mass, dtype=float)
    if theta <= 0 or (len(pos) <= _DIRECT_LIMIT and not force_tree):
        return _repulsion_direct(pos, mass, ck2)
    return _QuadTree(pos, mass).forces(ck2, theta)


def _force_loop(pos: np.ndarray, eu: np.ndarray, ev: np.ndarray,
                mass: np.ndarray, K: float, C: float, theta: float,
                iters: int, tol: float = 1e-3) -> np.ndarray:
    """Adaptive-step descent: step grows on sustained energy decrease."""
    step = K
    prev = np.inf
    progress = 0
    for _ in range(iters):
        F = repulsion_forces(pos, mass, C * K * K, theta)
        if eu.size:
            delta = pos[ev] - pos[eu]
            d = np.hypot(delta[:, 0], delta[:, 1])
            fa = delta * (d / K)[:, None]
            np.add.at(F, eu, fa)
            np.add.at(F, ev, -fa)
        mag = np.hypot(F[:, 0], F[:, 1])
        energy = float((mag * mag).sum())
        lim = np.minimum(mag, step)
        pos = pos + F * (lim / np.maximum(mag, 1e-12))[:, None]
        if energy < prev:
            progress += 1
            if progress >= 5:
                progress = 0
                step /= 0.9
        else:
            progress = 0
            step *= 0.9
        prev = energy
        if float(lim.max()) < tol * K:
            break
    return pos


def _coarsen(n: int, eu: np.ndarray, ev: np.ndarray, ew: np.ndarray,
             mass: np.ndarray):
    """Heaviest-edge maximal matching; returns the fine-to-coarse mapping."""
    order = np.lexsort((ev, eu, -ew))
    partner = np.full(n, -1, dtype=np.int64)
    for e in order:
        a = int(eu[e])
        b = int(ev[e])
        if partner[a] < 0 and partner[b] < 0:
            partner[a] = b
            partner[b] = a
    coarse = np.full(n, -1, dtype=np.int64)
    c = 0
    for i in range(n):
        if coarse[i] >= 0:
            continue
        coarse[i] = c
        p = partner[i]
        if p >= 0 and coarse[p] < 0:
            coarse[p] = c
        c += 1
    cu = coarse[eu]
    cv = coarse[ev]
    keep = cu != cv
    a = np.minimum(cu[keep], cv[keep])
    b = np.maximum(cu[keep], cv[keep])
    key = a * c + b
    uniq, inverse = np.unique(key, return_inverse=True)
    w2 = np.bincount(inverse, weights=ew[keep].astype(float))
    m2 = np.bincount(coarse, weights=mass, minlength=c)
    return coarse, c, (uniq // c).astype(np.int64), (uniq % c).astype(np.int64), w2, m2


def _embed_component(n: int, eu: np.ndarray, ev: np.ndarray, ew: np.ndarray,
                     rng: np.random.Generator, K: float, C: float,
                     theta: float, coarsest_size: int) -> np.ndarray:
    if n == 1:
        return np.zeros((1, 2))
    levels = [(n, eu, ev)]
    masses = [np.ones(n)]
    maps: list[np.ndarray] = []
    cn, cu, cv, cw, cm = n, eu, ev, ew.astype(float), np.ones(n)
    while cn > coarsest_size:
        mapping, n2, u2, v2, w2, m2 = _coarsen(cn, cu, cv, cw, cm)
        if n2 >= int(cn * 0.95):
            break
        maps.append(mapping)
        levels.append((n2, u2, v2))
        masses.append(m2)
        cn, cu, cv, cw, cm = n2, u2, v2, w2, m2

    top_n = levels[-1][0]
    pos = rng.uniform(-0.5, 0.5, (top_n, 2)) * (K * max(np.sqrt(top_n), 1.0))
    for li in range(len(levels) - 1, -1, -1):
        ln, lu, lv = levels[li]
        if li < len(levels) - 1:
            ang = _GOLDEN_ANGLE * np.arange(ln)
            pos = pos[maps[li]] + 0.1 * K * np.column_stack(
                [np.cos(ang), np.sin(ang)])
            iters = 75 if ln <= 1200 else 45
        else:
            iters = 200
        pos = _force_loop(pos, lu, lv, masses[li], K, C, theta, iters)
    return pos


def embed(g: TopicGraph, seed: int = 0, spring_length: float = 1.0,
          repulsion: float = 0.2, theta: float = 1.2,
          coarsest_size: int = 50, width_ratio: float = WIDTH_RATIO,
          height_ratio: float = HEIGHT_RATIO) -> Embedding:
    """Lay out the topic graph; disconnected components are shelf-packed."""
    if not g.nodes:
        raise LayoutError("cannot embed an empty graph")
    ids = sorted(n.topic_id for n in g.nodes)
    index = {t: i for i, t in enumerate(ids)}
    n = len(ids)
    eu = np.array([index[u] for u, v, w in g.edges], dtype=np.int64)
    ev = np.array([index[v] for u, v, w in g.edges], dtype=np.int64)
    ew = np.array([w for u, v, w in g.edges], dtype=float)

    adj: list[list[int]] = [[] for _ in range(n)]
    for a, b in zip(eu, ev):
        adj[a].append(int(b))
        adj[b].append(int(a))
    comp = np.full(n, -1, dtype=np.int64)
    comps: list[np.ndarray] = []
    for s in range(n):
        if comp[s] >= 0:
            continue
        ci = len(comps)
        comp[s] = ci
        queue = deque([s])
        members = [s]
        while queue:
            u = queue.popleft()
            for v in adj[u]:
                if comp[v] < 0:
                    comp[v] = ci
                    members.append(v)
                    queue.append(v)
        comps.append(np.array(sorted(members), dtype=np.int64))

    K = spring_length
    edge_comp = comp[eu] if eu.size else np.empty(0, np.int64)
    placed = []
    for ci, members in enumerate(comps):
        gl = np.full(n, -1, dtype=np.int64)
        gl[members] = np.arange(members.size)
        mask = edge_comp == ci
        rng = np.random.default_rng([seed, ci])
        pos = _embed_component(int(members.size), gl[eu[mask]], gl[ev[mask]],
                               ew[mask], rng, K, repulsion, theta,
                               coarsest_size)
        placed.append((members, pos))

    positions = np.zeros((n, 2))
    pad = 2.0 * K
    areas = sum((float(np.ptp(p[:, 0])) + pad) * (float(np.ptp(p[:, 1])) + pad)
                for _, p in placed)
    widths = [float(np.ptp(p[:, 0])) for _, p in placed]
    row_target = max(np.sqrt(areas) * 1.6, max(widths) + pad)
    cx = cy = row_h = 0.0
    for members, pos in placed:
        xmin, ymin = pos.min(axis=0)
        w = float(np.ptp(pos[:, 0]))
        h = float(np.ptp(pos[:, 1]))
        if cx > 0 and cx + w > row_target:
            cy += row_h
            cx = row_h = 0.0
        positions[members] = pos + np.array([cx - xmin, cy - ymin])
        cx += w + pad
        row_h = max(row_h, h + pad)
    center = (positions.min(axis=0) + positions.max(axis=0)) / 2
    positions -= center

    return Embedding(
        positions={ids[i]: (float(positions[i, 0]), float(positions[i, 1]))
                   for i in range(n)},
        boxes=detail_boxes(g, width_ratio, height_ratio),
    )


def _proximity_pairs(pos: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    n = len(pos)
    if n >= 5:
        try:
            tri = Delaunay(pos)
        except QhullError:
            pass
        else:
            s = tri.simplices
            e = np.vstack([s[:, [0, 1]], s[:, [1, 2]], s[:, [0, 2]]])
            a = e.min(axis=1).astype(np.int64)
            b = e.max(axis=1).astype(np.int64)
            uniq = np.unique(a * n + b)
            return (uniq // n), (uniq % n)
    iu, ju = np.triu_indices(n, 1)
    return iu.astype(np.int64), ju.astype(np.int64)


def _sweep_pairs(pos: np.ndarray, hw: np.ndarray, hh: np.ndarray,
                 block: int = 512) -> tuple[np.ndarray, np.ndarray]:
    """Exhaustive overlapping-pair scan, blocked to bound memory."""
    n = len(pos)
    out_i = []
    out_j = []
    for s in range(0, n, block):
        e = min(s + block, n)
        dx = np.abs(pos[s:e, None, 0] - pos[None, :, 0])
        ov = dx < (hw[s:e, None] + hw[None, :])
        dy = np.abs(pos[s:e, None, 1] - pos[None, :, 1])
        ov &= dy < (hh[s:e, None] + hh[None, :])
        ii, jj = np.nonzero(ov)
        gi = ii + s
        keep = jj > gi
        out_i.append(gi[keep])
        out_j.append(jj[keep])
    return np.concatenate(out_i), np.concatenate(out_j)


def remove_overlaps(embedding: Embedding, max_iter: int = 2000,
                    damping: float = 0.9, max_expand: float = 1.5,
                    margin: float = 1e-3) -> Embedding:
    """Push label boxes apart until none intersect.

    Overlap-free input is returned unchanged. Otherwise the frame is
    scaled once so the total label area fits, then rounds of proximity
    pairs from a Delaunay triangulation are relaxed: overlapping pairs
    grow their separation by at most max_expand using the damped mean
    displacement per node, reusing each triangulation until its pairs
    are clean. Once the proximity graph settles, a full pairwise sweep
    catches remaining overlaps; stubborn configurations are inflated
    globally.
    """
    ids = sorted(embedding.positions)
    n = len(ids)
    boxes = dict(embedding.boxes)
    if n <= 1:
        return Embedding(positions=dict(embedding.positions), boxes=boxes)
    pos = np.array([embedding.positions[t] for t in ids], dtype=float)
    hw = np.array([boxes[t][0] for t in ids], dtype=float) / 2
    hh = np.array([boxes[t][1] for t in ids], dtype=float) / 2

    si, _ = _sweep_pairs(pos, hw, hh)
    if si.size == 0:
        return Embedding(positions=dict(embedding.positions), boxes=boxes)

    # grow the frame once when the labels cannot physically fit it
    hull = ((np.ptp(pos[:, 0]) + 2 * hw.max())
            * (np.ptp(pos[:, 1]) + 2 * hh.max()))
    if hull > 0:
        scale = math.sqrt(float(np.sum(4 * hw * hh)) * 1.1 / hull)
        if scale > 1.0:
            pos = pos * scale

    def relax(i, j):
        dx = pos[j, 0] - pos[i, 0]
        dy = pos[j, 1] - pos[i, 1]
        d = np.hypot(dx, dy)
        zero = d < 1e-12
        if zero.any():
            # coincident centers: pick a deterministic direction per pair
            ang = _GOLDEN_ANGLE * (i[zero] * float(n) + j[zero])
            dx[zero] = np.cos(ang)
            dy[zero] = np.sin(ang)
            d[zero] = 1.0
        tx = (hw[i] + hw[j]) * (1 + margin) / np.maximum(np.abs(dx), 1e-12)
        ty = (hh[i] + hh[j]) * (1 + margin) / np.maximum(np.abs(dy), 1e-12)
        t = np.minimum(np.minimum(tx, ty), max_expand)
        shift = 0.5 * (t - 1.0) * d
        ux = dx / d
        uy = dy / d
        disp = np.zeros_like(pos)
        cnt = np.zeros(n)
        np.add.at(disp, i, np.column_stack([-ux * shift, -uy * shift]))
        np.add.at(disp, j, np.column_stack([ux * shift, uy * shift]))
        np.add.at(cnt, i, 1.0)
        np.add.at(cnt, j, 1.0)
        return pos + damping * disp / np.maximum(cnt, 1.0)[:, None]

    done = False
    it = 0
    while it < max_iter:
        ci, cj = _proximity_pairs(pos)
        adx = np.abs(pos[cj, 0] - pos[ci, 0])
        ady = np.abs(pos[cj, 1] - pos[ci, 1])
        ov = (adx < hw[ci] + hw[cj]) & (ady < hh[ci] + hh[cj])
        if not ov.any():
            ci, cj = _sweep_pairs(pos, hw, hh)
            if ci.size == 0:
                done = True
                break
            ov = np.ones(ci.size, dtype=bool)
        # reuse this candidate set until its own overlaps are resolved
        while ov.any() and it < max_iter:
            pos = relax(ci[ov], cj[ov])
            it += 1
            if it >= max_iter // 2 and it % 10 == 0:
                pos = pos * 1.05
            adx = np.abs(pos[cj, 0] - pos[ci, 0])
            ady = np.abs(pos[cj, 1] - pos[ci, 1])
            ov = (adx < hw[ci] + hw[cj]) & (ady < hh[ci] + hh[cj])
    if not done:
        i, j = _sweep_pairs(pos, hw, hh)
        if i.size:
            depth = np.minimum(hw[i] + hw[j] - np.abs(pos[j, 0] - pos[i, 0]),
                               hh[i] + hh[j] - np.abs(pos[j, 1] - pos[i, 1]))
            raise OverlapError(int(i.size), float(depth.max()))
    return Embedding(
        positions={t: (float(pos[k, 0]), float(pos[k, 1]))
                   for k, t in enumerate(ids)},
        boxes=boxes,
    )


def cluster_nodes(embedding: Embedding, k: int, seed: int = 0,
                  max_iter: int = 100) -> dict[str, int]:
    """Partition node positions into k spatial clusters.

    Farthest-point seeding from a random start, Lloyd iterations with
    empty clusters reseeded from the farthest point, then a single-point
    exchange polish so no one-node move can lower the within-cluster
    sum of squares.
    """
    ids = sorted(embedding.positions)
    n = len(ids)
    if not 1 <= k <= n:
        raise ValueError(f"k must be in [1, {n}], got {k}")
    X = np.array([embedding.positions[t] for t in ids], dtype=float)
    rng = np.random.default_rng(seed)

    centers = np.empty((k, 2))
    centers[0] = X[int(rng.integers(n))]
    d2 = ((X - centers[0]) ** 2).sum(axis=1)
    for c in range(1, k):
        i = int(np.argmax(d2))
        centers[c] = X[i]
        d2 = np.minimum(d2, ((X - X[i]) ** 2).sum(axis=1))

    assign = None
    for _ in range(max_iter):
        D = ((X[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2)
        new_assign = D.argmin(axis=1)
        cur = D[np.arange(n), new_assign]
        counts = np.bincount(new_assign, minlength=k)
        for c in np.where(counts == 0)[0]:
            donors = counts[new_assign] > 1
            cand = np.where(donors)[0]
            i = int(cand[np.argmax(cur[cand])])
            counts[new_assign[i]] -= 1
            new_assign[i] = c
            counts[c] += 1
            cur[i] = 0.0
        if assign is not None and (new_assign == assign).all():
            break
        assign = new_assign
        for c in range(k):
            centers[c] = X[assign == c].mean(axis=0)

    sizes = np.bincount(assign, minlength=k).astype(float)
    for _ in range(2000):
        D = ((X[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2)
        cur = D[np.arange(n), assign]
        src = sizes[assign]
        leave = np.where(src > 1, src / np.maximum(src - 1, 1) * cur, 0.0)
        delta = sizes[None, :] / (sizes[None, :] + 1) * D - leave[:, None]
        delta[np.arange(n), assign] = np.inf
        i, b = np.unravel_index(int(delta.argmin()), delta.shape)
        if delta[i, b] >= -1e-12:
            break
        a = assign[i]
        centers[a] = (centers[a] * sizes[a] - X[i]) / (sizes[a] - 1)
        centers[b] = (centers[b] * sizes[b] + X[i]) / (sizes[b] + 1)
        sizes[a] -= 1
        sizes[b] += 1
        assign[i] = b
    return {ids[i]: int(assign[i]) for i in range(n)}
