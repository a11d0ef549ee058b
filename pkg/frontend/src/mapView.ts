// Canvas rendering of the playground: segments shaded by darkness, icon
// nodes, the travelled trail in white and the robot as a heading triangle.
// All drawing is skipped when no 2D context exists (headless tests).

import type { MapDoc } from "./api";
import type { Pose } from "./geometry";

const ICONS: Record<string, string> = {
  home: "\u{1F3E0}",
  tree: "\u{1F333}",
  lake: "\u{1F30A}",
  volcano: "\u{1F30B}",
  star: "⭐",
};

export interface MapViewState {
  pose: Pose | null;
  trail: { x: number; y: number }[];
  highlightIcons: Set<string>;
}

export class MapView {
  private ctx: CanvasRenderingContext2D | null;
  private scale = 1;
  private offset = { x: 0, y: 0 };

  constructor(
    readonly canvas: HTMLCanvasElement,
    readonly map: MapDoc,
  ) {
    this.ctx = canvas.getContext("2d");
    const cols = this.map.nodes.map((n) => n.col);
    const rows = this.map.nodes.map((n) => n.row);
    const wMm = (Math.max(...cols) - Math.min(...cols) + 1.2) * map.pitch_mm;
    const hMm = (Math.max(...rows) - Math.min(...rows) + 1.2) * map.pitch_mm;
    this.scale = Math.min(canvas.width / wMm, canvas.height / hMm);
    this.offset = {
      x: (Math.min(...cols) - 0.6) * map.pitch_mm,
      y: (Math.min(...rows) - 0.6) * map.pitch_mm,
    };
  }

  /** World mm -> canvas px; y flipped so +y (counter-clockwise world) is up. */
  toPx(x: number, y: number): { x: number; y: number } {
    return {
      x: (x - this.offset.x) * this.scale,
      y: this.canvas.height - (y - this.offset.y) * this.scale,
    };
  }

  private nodePos(id: string): { x: number; y: number } {
    const node = this.map.nodes.find((n) => n.id === id)!;
    return { x: node.col * this.map.pitch_mm, y: node.row * this.map.pitch_mm };
  }

  render(state: MapViewState): void {
    const ctx = this.ctx;
    if (!ctx) return;
    ctx.fillStyle = "#f4efe6";
    ctx.fillRect(0, 0, this.canvas.width, this.canvas.height);

    for (const seg of this.map.segments) {
      const a = this.toPx(this.nodePos(seg.a).x, this.nodePos(seg.a).y);
      const b = this.toPx(this.nodePos(seg.b).x, this.nodePos(seg.b).y);
      const shade = Math.round(225 - seg.darkness * 195);
      ctx.strokeStyle = `rgb(${shade},${shade},${shade})`;
      ctx.lineWidth = 10;
      ctx.lineCap = "round";
      ctx.beginPath();
      ctx.moveTo(a.x, a.y);
      ctx.lineTo(b.x, b.y);
      ctx.stroke();
    }

    if (state.trail.length > 1) {
      ctx.strokeStyle = "#ffffff";
      ctx.lineWidth = 4;
      ctx.beginPath();
      const first = this.toPx(state.trail[0].x, state.trail[0].y);
      ctx.moveTo(first.x, first.y);
      for (const p of state.trail.slice(1)) {
        const px = this.toPx(p.x, p.y);
        ctx.lineTo(px.x, px.y);
      }
      ctx.stroke();
    }

    for (const node of this.map.nodes) {
      const p = this.toPx(node.col * this.map.pitch_mm, node.row * this.map.pitch_mm);
      ctx.fillStyle = "#8d7f6a";
      ctx.beginPath();
      ctx.arc(p.x, p.y, 5, 0, 2 * Math.PI);
      ctx.fill();
      if (node.icon) {
        const glyph = ICONS[node.icon] ?? "\u{1F4CD}";
        if (state.highlightIcons.has(node.icon)) {
          ctx.fillStyle = "rgba(255, 215, 0, 0.55)";
          ctx.beginPath();
          ctx.arc(p.x, p.y - 4, 20, 0, 2 * Math.PI);
          ctx.fill();
        }
        ctx.font = "22px serif";
        ctx.textAlign = "center";
        ctx.fillText(glyph, p.x, p.y - 10);
      }
    }

    if (state.pose) {
      const p = this.toPx(state.pose.x, state.pose.y);
      const rad = (-state.pose.heading * Math.PI) / 180; // canvas y is flipped
      ctx.save();
      ctx.translate(p.x, p.y);
      ctx.rotate(rad);
      ctx.fillStyle = "#2b6cb0";
      ctx.beginPath();
      ctx.moveTo(14, 0);
      ctx.lineTo(-9, 8);
      ctx.lineTo(-9, -8);
      ctx.closePath();
      ctx.fill();
      ctx.restore();
    }
  }
}
