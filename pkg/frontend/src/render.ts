/** Draws one frame: countries, edges, overlay layer, labels, selection. */

import type { Country, LevelData, NodeInfo, OverlayData } from "./api.js";
import type { ViewState } from "./state.js";
import type { Pt, Surface } from "./surface.js";

export const BACKGROUND = "#dfeaf2";
export const POSITIVE_COLOR = "#1a9641";
export const NEGATIVE_COLOR = "#7b3294";
export const HEAT_COLOR = "#e8590c";
export const EDGE_COLOR = "#64748b";
export const HIGHLIGHT_COLOR = "#b45309";
export const LABEL_COLOR = "#1f2937";

export const BASE_FONT_PX = 16;
export const MAX_CIRCLE_PX = 28;
export const HEAT_RADIUS_PX = 36;
// label box shape mirrors the pipeline's width/height ratios
export const CHAR_WIDTH = 0.6;
export const LINE_HEIGHT = 1.2;

export interface Camera {
  cx: number;
  cy: number;
  scale: number;
  w: number;
  h: number;
}

export function makeCamera(view: ViewState, fitScale: number,
                           surface: { width: number; height: number }): Camera {
  return {
    cx: view.center.x,
    cy: view.center.y,
    scale: fitScale * 2 ** (view.zoom - 1),
    w: surface.width,
    h: surface.height,
  };
}

export function worldToScreen(cam: Camera, p: Pt): Pt {
  return {
    x: (p.x - cam.cx) * cam.scale + cam.w / 2,
    y: cam.h / 2 - (p.y - cam.cy) * cam.scale,
  };
}

export function screenToWorld(cam: Camera, p: Pt): Pt {
  return {
    x: (p.x - cam.w / 2) / cam.scale + cam.cx,
    y: (cam.h / 2 - p.y) / cam.scale + cam.cy,
  };
}

export function fontPx(fontPercent: number): number {
  return (fontPercent / 100) * BASE_FONT_PX;
}

/** Fit scale so a world bounding box fills 90% of a surface. */
export function fitScaleFor(countries: Country[],
                            surface: { width: number; height: number }): number {
  let lo = [Infinity, Infinity];
  let hi = [-Infinity, -Infinity];
  for (const c of countries) {
    for (const ring of c.rings) {
      for (const [x, y] of ring) {
        lo = [Math.min(lo[0]!, x), Math.min(lo[1]!, y)];
        hi = [Math.max(hi[0]!, x), Math.max(hi[1]!, y)];
      }
    }
  }
  const bw = hi[0]! - lo[0]!;
  const bh = hi[1]! - lo[1]!;
  if (!(bw > 0) || !(bh > 0)) return 1;
  return 0.9 * Math.min(surface.width / bw, surface.height / bh);
}

export function boundsCenter(countries: Country[]): Pt {
  let lo = [Infinity, Infinity];
  let hi = [-Infinity, -Infinity];
  for (const c of countries) {
    for (const ring of c.rings) {
      for (const [x, y] of ring) {
        lo = [Math.min(lo[0]!, x), Math.min(lo[1]!, y)];
        hi = [Math.max(hi[0]!, x), Math.max(hi[1]!, y)];
      }
    }
  }
  return { x: (lo[0]! + hi[0]!) / 2, y: (lo[1]! + hi[1]!) / 2 };
}

export interface Scene {
  view: ViewState;
  countries: Country[] | null;
  level: LevelData | null;
  /** Every topic position learned so far; overlays may cover more
   * topics than the current level shows. */
  positions: ReadonlyMap<string, Pt>;
  overlay: OverlayData | null;
  selection: NodeInfo | null;
  fitScale: number;
}

function maxAbs(values: Record<string, number>): number {
  let m = 0;
  for (const v of Object.values(values)) m = Math.max(m, Math.abs(v));
  return m;
}

function drawOverlay(s: Surface, cam: Camera, scene: Scene): void {
  const layer = scene.overlay;
  if (!layer) return;
  const top = maxAbs(layer.values);
  if (top === 0) return;
  for (const [tid, value] of Object.entries(layer.values)) {
    const world = scene.positions.get(tid);
    if (!world || value === 0) continue;
    const at = worldToScreen(cam, world);
    if (layer.render_hint === "SIGNED_CIRCLES") {
      const r = (Math.abs(value) / top) * MAX_CIRCLE_PX;
      const color = value > 0 ? POSITIVE_COLOR : NEGATIVE_COLOR;
      s.circle(at, r, color, 0.55, color);
    } else {
      const share = value / top;
      s.halo(at, HEAT_RADIUS_PX * (0.4 + 0.6 * share), HEAT_COLOR, 0.5 * share);
    }
  }
}

export function drawFrame(s: Surface, scene: Scene): void {
  const cam = makeCamera(scene.view, scene.fitScale, s);
  s.clear(BACKGROUND);

  for (const country of scene.countries ?? []) {
    const [r, g, b] = country.color;
    for (const ring of country.rings) {
      const pts = ring.map(([x, y]) => worldToScreen(cam, { x, y }));
      s.polygon(pts, `rgb(${r},${g},${b})`, "rgba(255,255,255,0.6)");
    }
  }

  const level = scene.level;
  if (!level) return;
  const at = new Map<string, Pt>();
  for (const n of level.visible) at.set(n.id, worldToScreen(cam, { x: n.x, y: n.y }));

  if (scene.view.edges) {
    for (const [u, v, w] of level.edges) {
      const a = at.get(u);
      const b = at.get(v);
      if (a && b) s.line(a, b, 0.5 + Math.min(2, 0.4 * Math.log1p(w)), EDGE_COLOR, 0.35);
    }
  }

  drawOverlay(s, cam, scene);

  // incident edges stay highlighted even with the edge layer off
  const sel = scene.selection;
  if (sel) {
    for (const [u, v, w] of level.edges) {
      if (u !== sel.topic_id && v !== sel.topic_id) continue;
      const a = at.get(u);
      const b = at.get(v);
      if (a && b) s.line(a, b, 1 + Math.min(2.5, 0.5 * Math.log1p(w)), HIGHLIGHT_COLOR, 0.9);
    }
    const p = scene.positions.get(sel.topic_id);
    if (p) s.circle(worldToScreen(cam, p), 9, "rgba(0,0,0,0)", 1, HIGHLIGHT_COLOR);
  }

  for (const n of level.visible) {
    const px = fontPx(n.font);
    s.text(n.label, at.get(n.id)!, px, LABEL_COLOR, sel?.topic_id === n.id);
  }
}

/** Topic under a screen point at the current level, if any. */
export function hitTest(scene: Scene, surface: { width: number; height: number },
                        p: Pt): string | null {
  if (!scene.level) return null;
  const cam = makeCamera(scene.view, scene.fitScale, surface);
  let best: string | null = null;
  let bestArea = Infinity;
  for (const n of scene.level.visible) {
    const c = worldToScreen(cam, { x: n.x, y: n.y });
    const px = fontPx(n.font);
    const hw = (n.label.length * px * CHAR_WIDTH) / 2;
    const hh = (px * LINE_HEIGHT) / 2;
    if (Math.abs(p.x - c.x) <= hw && Math.abs(p.y - c.y) <= hh) {
      const area = hw * hh;
      if (area < bestArea) {
        best = n.id;
        bestArea = area;
      }
    }
  }
  return best;
}
