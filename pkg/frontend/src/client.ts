/** Map controller: holds view state and fetched data, and exposes the
 * actions the DOM layer binds to. Performs no analytics of its own;
 * every displayed number is a field from one API response. */

import {
  Api,
  type Country,
  type LevelData,
  type Manifest,
  type NodeInfo,
  type OverlayData,
  type SearchHit,
  type UniversityRow,
} from "./api.js";
import { boundsCenter, drawFrame, fitScaleFor, hitTest, type Scene } from "./render.js";
import {
  MAX_ZOOM,
  clampZoom,
  decodeView,
  encodeView,
  initialView,
  levelFor,
  type OverlayDescriptor,
  type ViewState,
} from "./state.js";
import type { Pt, Surface } from "./surface.js";

export type OverlaySlot = "primary" | "compare";

export type PanelModel =
  | { state: "ok"; info: NodeInfo }
  | { state: "missing"; id: string }
  | null;

export interface LegendModel {
  title: string;
  hint: "HEAT" | "SIGNED_CIRCLES";
  maxAbs: number;
}

export interface VariantOption {
  name: string;
  served: boolean;
}

interface Layer {
  desc: OverlayDescriptor;
  data: OverlayData;
}

interface Animation {
  start: number;
  duration: number;
  from: { x: number; y: number; zoom: number };
  to: { x: number; y: number; zoom: number };
}

const VARIANTS = ["WORLD", "US", "EU"];

function ease(t: number): number {
  return t < 0.5 ? 2 * t * t : 1 - (-2 * t + 2) ** 2 / 2;
}

export class MapClient {
  view: ViewState = initialView();
  banner: string | null = null;
  manifest: Manifest | null = null;
  countries: Country[] | null = null;
  universityRows: UniversityRow[] = [];
  searchResults: SearchHit[] = [];
  panel: PanelModel = null;

  private readonly levels = new Map<number, LevelData>();
  private readonly positions = new Map<string, Pt>();
  private currentLevel: LevelData | null = null;
  private layers: Record<OverlaySlot, Layer | null> = {
    primary: null,
    compare: null,
  };
  private fit = 1;
  private animation: Animation | null = null;
  private readonly seq = { primary: 0, compare: 0, search: 0 };
  private readonly fetchLog: string[] = [];

  constructor(private readonly api: Api,
              private readonly now: () => number = () => Date.now()) {}

  /** Paths fetched so far, oldest first (used to test caching rules). */
  get requests(): readonly string[] {
    return this.fetchLog;
  }

  async init(fragment = ""): Promise<void> {
    this.manifest = await this.api.manifest();
    this.fetchLog.push("/api/manifest");
    this.countries = await this.api.countries();
    this.fetchLog.push("/api/countries");
    this.universityRows = await this.api.universities();
    this.fetchLog.push("/api/universities");

    this.view = decodeView(fragment);
    if (fragment === "" || !fragment.includes("x=")) {
      this.view.center = boundsCenter(this.countries);
    }
    await this.ensureLevel(levelFor(this.view.zoom));
    this.currentLevel = this.levels.get(levelFor(this.view.zoom)) ?? null;
    if (this.view.overlay) await this.applyOverlay(this.view.overlay, "primary");
    if (this.view.compare) await this.applyOverlay(this.view.compare, "compare");
    if (this.view.selected) await this.select(this.view.selected);
  }

  fitTo(surface: { width: number; height: number }): void {
    if (this.countries) this.fit = fitScaleFor(this.countries, surface);
  }

  private async ensureLevel(z: number): Promise<LevelData | null> {
    const cached = this.levels.get(z);
    if (cached) return cached;
    const data = await this.api.level(z);
    this.fetchLog.push(`/api/levels/${z}`);
    this.levels.set(z, data);
    for (const n of data.visible) this.positions.set(n.id, { x: n.x, y: n.y });
    return data;
  }

  /** Fetch whatever the current view needs; errors keep the last frame. */
  async prepare(): Promise<void> {
    const z = levelFor(this.view.zoom);
    try {
      const data = await this.ensureLevel(z);
      if (data) this.currentLevel = data;
      this.clearBanner("level");
    } catch (e) {
      this.banner = `level ${z} unavailable: ${(e as Error).message}`;
    }
  }

  /** Drop the banner only when it was raised by the given action kind. */
  private clearBanner(source: "level" | "overlay" | "search"): void {
    if (this.banner !== null && this.banner.startsWith(source)) {
      this.banner = null;
    }
  }

  scene(slot: OverlaySlot = "primary"): Scene {
    return {
      view: this.view,
      countries: this.countries,
      level: this.currentLevel,
      positions: this.positions,
      overlay: this.layers[slot]?.data ?? null,
      selection: this.panel?.state === "ok" ? this.panel.info : null,
      fitScale: this.fit,
    };
  }

  render(surface: Surface, slot: OverlaySlot = "primary"): void {
    drawFrame(surface, this.scene(slot));
  }

  panBy(dxPx: number, dyPx: number): void {
    const scale = this.fit * 2 ** (this.view.zoom - 1);
    this.view.center = {
      x: this.view.center.x - dxPx / scale,
      y: this.view.center.y + dyPx / scale,
    };
  }

  zoomBy(delta: number): void {
    this.animation = null;
    this.view.zoom = clampZoom(this.view.zoom + delta);
  }

  toggleEdges(): void {
    this.view.edges = !this.view.edges;
  }

  topicAt(p: Pt, surface: { width: number; height: number }): string | null {
    return hitTest(this.scene(), surface, p);
  }

  async select(id: string): Promise<void> {
    try {
      const info = await this.api.node(id);
      this.fetchLog.push(`/api/node/${id}`);
      this.panel = { state: "ok", info };
      this.view.selected = id;
    } catch {
      this.panel = { state: "missing", id };
      this.view.selected = null;
    }
  }

  clearSelection(): void {
    this.panel = null;
    this.view.selected = null;
  }

  async search(q: string): Promise<SearchHit[]> {
    const n = ++this.seq.search;
    if (q.trim() === "") {
      this.searchResults = [];
      return this.searchResults;
    }
    try {
      const hits = await this.api.search(q);
      this.fetchLog.push(`/api/search?q=${q}`);
      if (n === this.seq.search) this.searchResults = hits;
      this.clearBanner("search");
    } catch (e) {
      this.banner = `search failed: ${(e as Error).message}`;
    }
    return this.searchResults;
  }

  /** Animate to a search hit: center on it at its first visible level. */
  choose(hit: SearchHit): void {
    this.animation = {
      start: this.now(),
      duration: 600,
      from: { ...this.view.center, zoom: this.view.zoom },
      to: { x: hit.x, y: hit.y, zoom: clampZoom(hit.first_level) },
    };
  }

  get animating(): boolean {
    return this.animation !== null;
  }

  /** Advance the animation; returns true while more frames are needed. */
  tick(at = this.now()): boolean {
    const a = this.animation;
    if (!a) return false;
    const t = Math.min(1, (at - a.start) / a.duration);
    const k = ease(t);
    this.view.center = {
      x: a.from.x + (a.to.x - a.from.x) * k,
      y: a.from.y + (a.to.y - a.from.y) * k,
    };
    this.view.zoom = a.from.zoom + (a.to.zoom - a.from.zoom) * k;
    if (t >= 1) {
      this.view.zoom = a.to.zoom;
      this.animation = null;
    }
    return this.animation !== null;
  }

  /** Fetch an overlay layer; overlays are never cached, and a slower
   * older response never replaces a newer one (last write wins). */
  async applyOverlay(desc: OverlayDescriptor | null, slot: OverlaySlot = "primary"): Promise<void> {
    const n = ++this.seq[slot];
    if (desc === null) {
      this.layers[slot] = null;
      this.setViewOverlay(slot, null);
      return;
    }
    try {
      // the deepest level lists every topic, so its positions let the
      // layer draw values for topics hidden at the current level
      await this.ensureLevel(MAX_ZOOM);
      const data = await this.api.overlay(desc);
      this.fetchLog.push(`/api/overlay/${desc.kind}`);
      if (n !== this.seq[slot]) return;
      this.layers[slot] = { desc, data };
      this.setViewOverlay(slot, desc);
      this.clearBanner("overlay");
    } catch (e) {
      if (n === this.seq[slot]) {
        this.banner = `overlay failed: ${(e as Error).message}`;
      }
    }
  }

  private setViewOverlay(slot: OverlaySlot, desc: OverlayDescriptor | null): void {
    if (slot === "primary") this.view.overlay = desc;
    else this.view.compare = desc;
  }

  overlayLayer(slot: OverlaySlot): OverlayData | null {
    return this.layers[slot]?.data ?? null;
  }

  legend(slot: OverlaySlot = "primary"): LegendModel | null {
    const layer = this.layers[slot];
    if (!layer) return null;
    let top = 0;
    for (const v of Object.values(layer.data.values)) {
      top = Math.max(top, Math.abs(v));
    }
    const meta = Object.entries(layer.data.meta)
      .filter(([k]) => k !== "digest")
      .map(([k, v]) => `${k}=${String(v)}`)
      .join(" ");
    return {
      title: `${layer.desc.kind} ${meta}`.trim(),
      hint: layer.data.render_hint,
      maxAbs: top,
    };
  }

  variants(): VariantOption[] {
    const served = this.manifest?.config.variant ?? "WORLD";
    return VARIANTS.map((name) => ({ name, served: name === served }));
  }

  /** Reload the bundle for a served variant: drop every cache. */
  async setVariant(name: string): Promise<void> {
    if (!this.variants().some((v) => v.name === name && v.served)) {
      throw new Error(`variant ${name} is not served by this process`);
    }
    this.levels.clear();
    this.positions.clear();
    this.layers = { primary: null, compare: null };
    this.currentLevel = null;
    this.panel = null;
    this.searchResults = [];
    await this.init(this.fragment());
  }

  fragment(): string {
    return encodeView(this.view);
  }

  async applyFragment(fragment: string): Promise<void> {
    const next = decodeView(fragment);
    this.view = { ...next, overlay: this.view.overlay, compare: this.view.compare };
    await this.prepare();
  }
}
