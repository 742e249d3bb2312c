// Canvas painter for a Scene. Drawing only; all geometry comes precomputed.

import type { Scene } from "./scene.js";

const NODE_FILL = "#4c83b6";
const NODE_STROKE = "#1f3a57";
const NODE_HOVER = "#e8a33d";
const EDGE_COLOR = "#8a8f98";

export function paint(ctx: CanvasRenderingContext2D, scene: Scene): void {
  ctx.clearRect(0, 0, scene.width, scene.height);
  if (scene.empty) {
    ctx.fillStyle = "#666";
    ctx.font = "16px system-ui, sans-serif";
    ctx.textAlign = "center";
    ctx.fillText(scene.empty, scene.width / 2, scene.height / 2);
    return;
  }
  ctx.lineWidth = 1.25;
  ctx.strokeStyle = EDGE_COLOR;
  for (const edge of scene.edges) {
    ctx.beginPath();
    ctx.moveTo(edge.x1, edge.y1);
    ctx.lineTo(edge.x2, edge.y2);
    ctx.stroke();
    if (edge.arrowhead) {
      drawArrowhead(ctx, edge.x1, edge.y1, edge.x2, edge.y2);
    }
  }
  for (const c of scene.circles) {
    ctx.beginPath();
    ctx.arc(c.x, c.y, c.r, 0, Math.PI * 2);
    ctx.fillStyle = c.hovered ? NODE_HOVER : NODE_FILL;
    ctx.fill();
    ctx.strokeStyle = NODE_STROKE;
    ctx.stroke();
  }
  if (scene.tooltip) {
    const t = scene.tooltip;
    const text = `${t.label} (${t.leafCount} leaf${t.leafCount === 1 ? "" : "s"})`;
    ctx.font = "13px system-ui, sans-serif";
    const w = ctx.measureText(text).width + 12;
    ctx.fillStyle = "rgba(20, 24, 30, 0.88)";
    ctx.fillRect(t.x - w / 2, t.y - 22, w, 20);
    ctx.fillStyle = "#fff";
    ctx.textAlign = "center";
    ctx.fillText(text, t.x, t.y - 8);
  }
}

function drawArrowhead(
  ctx: CanvasRenderingContext2D,
  x1: number,
  y1: number,
  x2: number,
  y2: number,
): void {
  const angle = Math.atan2(y2 - y1, x2 - x1);
  const size = 8;
  ctx.beginPath();
  ctx.moveTo(x2, y2);
  ctx.lineTo(x2 - size * Math.cos(angle - 0.45), y2 - size * Math.sin(angle - 0.45));
  ctx.lineTo(x2 - size * Math.cos(angle + 0.45), y2 - size * Math.sin(angle + 0.45));
  ctx.closePath();
  ctx.fillStyle = EDGE_COLOR;
  ctx.fill();
}
