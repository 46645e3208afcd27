/** View state: what the map is looking at, and how. */

export interface OverlayDescriptor {
  kind: "citations" | "hr" | "department" | "document";
  university?: string;
  mode?: "full" | "split";
  normalize?: "none" | "rate" | "literal";
  base?: string;
  keyword?: string;
  text?: string;
}

export interface ViewState {
  center: { x: number; y: number };
  /** 1..8; fractional while an animation is in flight. */
  zoom: number;
  overlay: OverlayDescriptor | null;
  compare: OverlayDescriptor | null;
  edges: boolean;
  selected: string | null;
}

export const MIN_ZOOM = 1;
export const MAX_ZOOM = 8;

export function clampZoom(z: number): number {
  if (Number.isNaN(z)) return MIN_ZOOM;
  return Math.min(MAX_ZOOM, Math.max(MIN_ZOOM, z));
}

/** Discrete level for a possibly fractional zoom: switches at integers. */
export function levelFor(zoom: number): number {
  return Math.min(MAX_ZOOM, Math.max(MIN_ZOOM, Math.floor(zoom)));
}

export function initialView(): ViewState {
  return {
    center: { x: 0, y: 0 },
    zoom: MIN_ZOOM,
    overlay: null,
    compare: null,
    edges: false,
    selected: null,
  };
}

const OVERLAY_FIELDS = [
  "university", "mode", "normalize", "base", "keyword", "text",
] as const;

// encodeURIComponent leaves !*'() bare, and ! is our field separator
function escapeValue(v: string): string {
  return encodeURIComponent(v).replace(
    /[!*'()]/g,
    (c) => `%${c.charCodeAt(0).toString(16).toUpperCase()}`,
  );
}

function packOverlay(d: OverlayDescriptor): string {
  const parts = [d.kind as string];
  for (const f of OVERLAY_FIELDS) {
    const v = d[f];
    if (v !== undefined && v !== "") parts.push(`${f}:${escapeValue(v)}`);
  }
  return parts.join("!");
}

function unpackOverlay(s: string): OverlayDescriptor | null {
  const [kind, ...rest] = s.split("!");
  if (!["citations", "hr", "department", "document"].includes(kind ?? "")) {
    return null;
  }
  const d: OverlayDescriptor = { kind: kind as OverlayDescriptor["kind"] };
  for (const part of rest) {
    const i = part.indexOf(":");
    if (i < 1) continue;
    const f = part.slice(0, i) as (typeof OVERLAY_FIELDS)[number];
    if (OVERLAY_FIELDS.includes(f)) d[f] = decodeURIComponent(part.slice(i + 1)) as never;
  }
  return d;
}

/** Serialize the view into a URL fragment (without the leading #). */
export function encodeView(v: ViewState): string {
  const p = new URLSearchParams();
  p.set("x", v.center.x.toFixed(4));
  p.set("y", v.center.y.toFixed(4));
  p.set("z", v.zoom.toFixed(2));
  if (v.edges) p.set("e", "1");
  if (v.selected) p.set("s", v.selected);
  if (v.overlay) p.set("o", packOverlay(v.overlay));
  if (v.compare) p.set("c", packOverlay(v.compare));
  return p.toString();
}

/** Parse a URL fragment back into a view; malformed fields fall back. */
export function decodeView(fragment: string): ViewState {
  const v = initialView();
  const p = new URLSearchParams(fragment.replace(/^#/, ""));
  const x = Number(p.get("x"));
  const y = Number(p.get("y"));
  if (Number.isFinite(x) && Number.isFinite(y)) v.center = { x, y };
  if (p.has("z")) v.zoom = clampZoom(Number(p.get("z")));
  v.edges = p.get("e") === "1";
  v.selected = p.get("s");
  const o = p.get("o");
  if (o) v.overlay = unpackOverlay(o);
  const c = p.get("c");
  if (c) v.compare = unpackOverlay(c);
  return v;
}
