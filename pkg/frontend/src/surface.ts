/** Minimal drawing abstraction so frames can be rendered onto a real
 * canvas or recorded for inspection in tests. */

export interface Pt {
  x: number;
  y: number;
}

export interface Surface {
  readonly width: number;
  readonly height: number;
  clear(fill: string): void;
  polygon(points: Pt[], fill: string, stroke?: string): void;
  line(a: Pt, b: Pt, width: number, color: string, alpha?: number): void;
  circle(at: Pt, r: number, fill: string, alpha?: number, stroke?: string): void;
  /** Filled circle fading to transparent at the rim (heat blob). */
  halo(at: Pt, r: number, color: string, alpha: number): void;
  text(s: string, at: Pt, px: number, color: string, bold?: boolean): void;
}

export class CanvasSurface implements Surface {
  private readonly ctx: CanvasRenderingContext2D;

  constructor(private readonly canvas: HTMLCanvasElement) {
    const ctx = canvas.getContext("2d");
    if (!ctx) throw new Error("canvas 2d context unavailable");
    this.ctx = ctx;
  }

  get width(): number {
    return this.canvas.width;
  }

  get height(): number {
    return this.canvas.height;
  }

  clear(fill: string): void {
    this.ctx.globalAlpha = 1;
    this.ctx.fillStyle = fill;
    this.ctx.fillRect(0, 0, this.width, this.height);
  }

  polygon(points: Pt[], fill: string, stroke?: string): void {
    if (points.length < 3) return;
    const c = this.ctx;
    c.globalAlpha = 1;
    c.beginPath();
    c.moveTo(points[0]!.x, points[0]!.y);
    for (const p of points.slice(1)) c.lineTo(p.x, p.y);
    c.closePath();
    c.fillStyle = fill;
    c.fill();
    if (stroke) {
      c.strokeStyle = stroke;
      c.lineWidth = 1;
      c.stroke();
    }
  }

  line(a: Pt, b: Pt, width: number, color: string, alpha = 1): void {
    const c = this.ctx;
    c.globalAlpha = alpha;
    c.strokeStyle = color;
    c.lineWidth = width;
    c.beginPath();
    c.moveTo(a.x, a.y);
    c.lineTo(b.x, b.y);
    c.stroke();
    c.globalAlpha = 1;
  }

  circle(at: Pt, r: number, fill: string, alpha = 1, stroke?: string): void {
    const c = this.ctx;
    c.globalAlpha = alpha;
    c.beginPath();
    c.arc(at.x, at.y, r, 0, 2 * Math.PI);
    c.fillStyle = fill;
    c.fill();
    if (stroke) {
      c.strokeStyle = stroke;
      c.lineWidth = 1;
      c.stroke();
    }
    c.globalAlpha = 1;
  }

  halo(at: Pt, r: number, color: string, alpha: number): void {
    const c = this.ctx;
    const g = c.createRadialGradient(at.x, at.y, 0, at.x, at.y, r);
    g.addColorStop(0, color);
    g.addColorStop(1, "rgba(0,0,0,0)");
    c.globalAlpha = alpha;
    c.fillStyle = g;
    c.beginPath();
    c.arc(at.x, at.y, r, 0, 2 * Math.PI);
    c.fill();
    c.globalAlpha = 1;
  }

  text(s: string, at: Pt, px: number, color: string, bold = false): void {
    const c = this.ctx;
    c.globalAlpha = 1;
    c.font = `${bold ? "700" : "400"} ${px}px system-ui, sans-serif`;
    c.textAlign = "center";
    c.textBaseline = "middle";
    c.lineWidth = Math.max(2, px / 6);
    c.strokeStyle = "rgba(255,255,255,0.85)";
    c.strokeText(s, at.x, at.y);
    c.fillStyle = color;
    c.fillText(s, at.x, at.y);
  }
}

export type DrawOp =
  | { op: "clear"; fill: string }
  | { op: "polygon"; points: Pt[]; fill: string; stroke?: string }
  | { op: "line"; a: Pt; b: Pt; width: number; color: string; alpha: number }
  | { op: "circle"; at: Pt; r: number; fill: string; alpha: number; stroke?: string }
  | { op: "halo"; at: Pt; r: number; color: string; alpha: number }
  | { op: "text"; s: string; at: Pt; px: number; color: string; bold: boolean };

/** Records draw calls instead of painting; frames stay inspectable. */
export class RecordingSurface implements Surface {
  ops: DrawOp[] = [];

  constructor(readonly width = 800, readonly height = 600) {}

  clear(fill: string): void {
    this.ops.push({ op: "clear", fill });
  }

  polygon(points: Pt[], fill: string, stroke?: string): void {
    this.ops.push({ op: "polygon", points, fill, stroke });
  }

  line(a: Pt, b: Pt, width: number, color: string, alpha = 1): void {
    this.ops.push({ op: "line", a, b, width, color, alpha });
  }

  circle(at: Pt, r: number, fill: string, alpha = 1, stroke?: string): void {
    this.ops.push({ op: "circle", at, r, fill, alpha, stroke });
  }

  halo(at: Pt, r: number, color: string, alpha: number): void {
    this.ops.push({ op: "halo", at, r, color, alpha });
  }

  text(s: string, at: Pt, px: number, color: string, bold = false): void {
    this.ops.push({ op: "text", s, at, px, color, bold });
  }

  byOp<K extends DrawOp["op"]>(op: K): Extract<DrawOp, { op: K }>[] {
    return this.ops.filter((o) => o.op === op) as Extract<DrawOp, { op: K }>[];
  }
}
