"""Zoom levels: font sizes, label boxes, and greedy label visibility.

Eight levels, each halving the world-unit size of every label box.
Level 1 is the world view; level 8 is the full-detail view whose boxes
are the ones overlap removal works on, so the deepest zoom shows every
label. Visibility is greedy by weight and monotone across levels: a
label never disappears while zooming in.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

N_LEVELS = 8
DETAIL_LEVEL = N_LEVELS
WIDTH_RATIO = 0.6
HEIGHT_RATIO = 1.2


def font_size(weight: float) -> float:
    """Label font percent from node weight: clamp(weight/10, 80, 200)."""
    size = weight / 10
    if size <= 80:
        return 80.0
    if size >= 200:
        return 200.0
    return float(size)


def scale(level: int) -> float:
    return float(2 ** (level - 1))


def label_box(char_count: int, font: float, level: int,
              width_ratio: float = WIDTH_RATIO,
              height_ratio: float = HEIGHT_RATIO) -> tuple[float, float]:
    """World-unit (width, height) of a label box at a zoom level."""
    s = scale(level)
    return (char_count * font * width_ratio / s, font * height_ratio / s)


def detail_boxes(g, width_ratio: float = WIDTH_RATIO,
                 height_ratio: float = HEIGHT_RATIO) -> dict[str, tuple[float, float]]:
    """Full-detail (level 8) boxes for every node, keyed by topic id."""
    return {
        n.topic_id: label_box(max(len(n.label), 1), font_size(n.weight),
                              DETAIL_LEVEL, width_ratio, height_ratio)
        for n in g.nodes
    }


@dataclass
class LevelView:
    level: int
    visible: list[str]
    positions: dict[str, tuple[float, float]]
    label_boxes: dict[str, tuple[float, float]]
    font_size: dict[str, float]


def compute_levels(g, embedding, width_ratio: float = WIDTH_RATIO,
                   height_ratio: float = HEIGHT_RATIO,
                   n_levels: int = N_LEVELS) -> list[LevelView]:
    """Greedy per-level visibility, heaviest labels first.

    Each level starts from the previous level's accepted set (already
    intersection-free there, and boxes only shrink), then admits each
    remaining node iff its box clears every accepted box.
    """
    order = sorted(g.nodes, key=lambda n: (-n.weight, n.topic_id))
    ids = [n.topic_id for n in order]
    pos = np.array([embedding.positions[t] for t in ids], dtype=float)
    fonts = np.array([font_size(n.weight) for n in order], dtype=float)
    chars = np.array([max(len(n.label), 1) for n in order], dtype=float)
    base_w = chars * fonts * width_ratio
    base_h = fonts * height_ratio

    n = len(ids)
    views: list[LevelView] = []
    accepted = np.zeros(n, dtype=bool)
    acc_x = np.empty(n)
    acc_y = np.empty(n)
    acc_hw = np.empty(n)
    acc_hh = np.empty(n)
    for level in range(1, n_levels + 1):
        s = scale(level)
        half_w = base_w / (2 * s)
        half_h = base_h / (2 * s)
        m = 0
        for i in np.flatnonzero(accepted):
            acc_x[m], acc_y[m] = pos[i]
            acc_hw[m], acc_hh[m] = half_w[i], half_h[i]
            m += 1
        for i in range(n):
            if accepted[i]:
                continue
            if m:
                clash = (
                    (np.abs(pos[i, 0] - acc_x[:m]) < half_w[i] + acc_hw[:m])
                    & (np.abs(pos[i, 1] - acc_y[:m]) < half_h[i] + acc_hh[:m])
                )
                if clash.any():
                    continue
            accepted[i] = True
            acc_x[m], acc_y[m] = pos[i]
            acc_hw[m], acc_hh[m] = half_w[i], half_h[i]
            m += 1
        # maps cover every node so hidden labels can still be measured
        views.append(LevelView(
            level=level,
            visible=[ids[i] for i in range(n) if accepted[i]],
            positions={ids[i]: (float(pos[i, 0]), float(pos[i, 1]))
                       for i in range(n)},
            label_boxes={ids[i]: (float(2 * half_w[i]), float(2 * half_h[i]))
                         for i in range(n)},
            font_size={ids[i]: float(fonts[i]) for i in range(n)},
        ))
    return views
