/** Typed client for the map service; every byte shown comes from here. */

import type { OverlayDescriptor } from "./state.js";

export interface LevelNode {
  id: string;
  x: number;
  y: number;
  label: string;
  font: number;
  cluster: number;
}

export interface LevelData {
  level: number;
  visible: LevelNode[];
  edges: [string, string, number][];
}

export interface Country {
  cluster: number;
  color: [number, number, number];
  rings: [number, number][][];
}

export interface SearchHit {
  topic_id: string;
  label: string;
  x: number;
  y: number;
  weight: number;
  first_level: number;
}

export interface Neighbor {
  topic_id: string;
  label: string;
  weight: number;
}

export interface NodeInfo {
  topic_id: string;
  label: string;
  weight: number;
  x: number;
  y: number;
  cluster: number;
  first_level: number;
  neighbors: Neighbor[];
}

export interface UniversityRow {
  id: string;
  name: string;
  region: string;
  staff: number | null;
}

export interface Manifest {
  format: string;
  created_at: string;
  config: { variant: string; levels: number; [k: string]: unknown };
  counts: Record<string, number>;
  [k: string]: unknown;
}

export interface OverlayData {
  kind: string;
  render_hint: "HEAT" | "SIGNED_CIRCLES";
  meta: Record<string, unknown>;
  values: Record<string, number>;
}

export class ApiError extends Error {
  constructor(readonly status: number, detail: string) {
    super(detail);
  }
}

async function unwrap<T>(r: Response): Promise<T> {
  if (!r.ok) {
    let detail = r.statusText;
    try {
      const body = (await r.json()) as { detail?: string };
      if (body.detail) detail = body.detail;
    } catch {
      // non-JSON error body; keep the status text
    }
    throw new ApiError(r.status, detail);
  }
  return (await r.json()) as T;
}

export class Api {
  constructor(private readonly base: string = "") {}

  private get<T>(path: string): Promise<T> {
    return fetch(this.base + path).then((r) => unwrap<T>(r));
  }

  manifest(): Promise<Manifest> {
    return this.get("/api/manifest");
  }

  level(z: number): Promise<LevelData> {
    return this.get(`/api/levels/${z}`);
  }

  countries(): Promise<Country[]> {
    return this.get<{ countries: Country[] }>("/api/countries")
      .then((b) => b.countries);
  }

  universities(): Promise<UniversityRow[]> {
    return this.get<{ universities: UniversityRow[] }>("/api/universities")
      .then((b) => b.universities);
  }

  search(q: string, limit = 10): Promise<SearchHit[]> {
    const p = new URLSearchParams({ q, limit: String(limit) });
    return this.get<{ results: SearchHit[] }>(`/api/search?${p}`)
      .then((b) => b.results);
  }

  node(id: string): Promise<NodeInfo> {
    return this.get(`/api/node/${encodeURIComponent(id)}`);
  }

  overlay(d: OverlayDescriptor): Promise<OverlayData> {
    if (d.kind === "document") {
      return fetch(this.base + "/api/overlay/document", {
        method: "POST",
        headers: { "Content-Type": "application/json" },
        body: JSON.stringify({ text: d.text ?? "" }),
      }).then((r) => unwrap<OverlayData>(r));
    }
    const p = new URLSearchParams();
    if (d.kind === "department") {
      p.set("keyword", d.keyword ?? "");
    } else {
      p.set("university", d.university ?? "");
      if (d.base) p.set("base", d.base);
      if (d.kind === "citations") {
        if (d.mode) p.set("mode", d.mode);
        if (d.normalize) p.set("normalize", d.normalize);
      }
    }
    return this.get(`/api/overlay/${d.kind}?${p}`);
  }
}
