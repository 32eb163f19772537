// Canvas drawing of the arena scene. Everything is derived from UiState
// and the arena mapping; no state lives here.

import type { ArenaMapping } from "./mapping.js";
import { worldToScreen } from "./mapping.js";
import type { UiState } from "./state.js";
import { isStale } from "./state.js";

const COLORS = {
  background: "#10141a",
  arena: "#1c2430",
  arenaEdge: "#3d4c63",
  grid: "#232e3e",
  robot: "#4fc3f7",
  robotNose: "#e3f2fd",
  goal: "#ffb300",
  track: "#81c784",
  sketch: "#ce93d8",
  trail: "rgba(79, 195, 247, 0.35)",
  text: "#b0bec5",
  stale: "rgba(16, 20, 26, 0.65)",
};

export function renderArena(
  ctx: CanvasRenderingContext2D,
  state: UiState,
  mapping: ArenaMapping,
  nowMs: number
): void {
  const { screenWidth: w, screenHeight: h } = mapping;
  ctx.fillStyle = COLORS.background;
  ctx.fillRect(0, 0, w, h);

  const topLeft = worldToScreen(mapping, {
    x: -mapping.arenaWidth / 2,
    y: mapping.arenaHeight / 2,
  });
  const arenaW = mapping.arenaWidth * mapping.pxPerMeter;
  const arenaH = mapping.arenaHeight * mapping.pxPerMeter;
  ctx.fillStyle = COLORS.arena;
  ctx.fillRect(topLeft.x, topLeft.y, arenaW, arenaH);

  // 0.5 m grid
  ctx.strokeStyle = COLORS.grid;
  ctx.lineWidth = 1;
  for (let gx = -mapping.arenaWidth / 2; gx <= mapping.arenaWidth / 2 + 1e-9; gx += 0.5) {
    const a = worldToScreen(mapping, { x: gx, y: -mapping.arenaHeight / 2 });
    const b = worldToScreen(mapping, { x: gx, y: mapping.arenaHeight / 2 });
    line(ctx, a.x, a.y, b.x, b.y);
  }
  for (let gy = -mapping.arenaHeight / 2; gy <= mapping.arenaHeight / 2 + 1e-9; gy += 0.5) {
    const a = worldToScreen(mapping, { x: -mapping.arenaWidth / 2, y: gy });
    const b = worldToScreen(mapping, { x: mapping.arenaWidth / 2, y: gy });
    line(ctx, a.x, a.y, b.x, b.y);
  }
  ctx.strokeStyle = COLORS.arenaEdge;
  ctx.lineWidth = 2;
  ctx.strokeRect(topLeft.x, topLeft.y, arenaW, arenaH);

  if (state.activeTrack && state.activeTrack.length >= 4) {
    ctx.strokeStyle = COLORS.track;
    ctx.lineWidth = 2;
    ctx.beginPath();
    for (let i = 0; i < state.activeTrack.length; i += 2) {
      const p = worldToScreen(mapping, {
        x: state.activeTrack[i]!,
        y: state.activeTrack[i + 1]!,
      });
      if (i === 0) ctx.moveTo(p.x, p.y);
      else ctx.lineTo(p.x, p.y);
    }
    ctx.stroke();
  }

  if (state.sketch.length >= 2) {
    ctx.strokeStyle = COLORS.sketch;
    ctx.lineWidth = 2;
    ctx.beginPath();
    state.sketch.forEach((p, i) => (i === 0 ? ctx.moveTo(p.x, p.y) : ctx.lineTo(p.x, p.y)));
    ctx.stroke();
  }

  if (state.trail.length >= 2) {
    ctx.strokeStyle = COLORS.trail;
    ctx.lineWidth = 2;
    ctx.beginPath();
    state.trail.forEach((p, i) => {
      const s = worldToScreen(mapping, p);
      if (i === 0) ctx.moveTo(s.x, s.y);
      else ctx.lineTo(s.x, s.y);
    });
    ctx.stroke();
  }

  if (state.goal) {
    const g = worldToScreen(mapping, state.goal);
    ctx.strokeStyle = COLORS.goal;
    ctx.lineWidth = 2;
    ctx.beginPath();
    ctx.arc(g.x, g.y, 0.1 * mapping.pxPerMeter, 0, Math.PI * 2); // acceptance radius
    ctx.stroke();
    line(ctx, g.x - 6, g.y, g.x + 6, g.y);
    line(ctx, g.x, g.y - 6, g.x, g.y + 6);
  }

  if (state.pose) {
    drawRobot(ctx, mapping, state.pose.x, state.pose.y, state.pose.theta);
  }

  ctx.fillStyle = COLORS.text;
  ctx.font = "13px system-ui, sans-serif";
  const status =
    state.connection !== "open"
      ? state.connection
      : isStale(state, nowMs)
        ? "stale"
        : "live";
  const poseText = state.pose
    ? `x=${state.pose.x.toFixed(3)} y=${state.pose.y.toFixed(3)} θ=${state.pose.theta.toFixed(2)}`
    : "no pose";
  ctx.fillText(`${status} · mode: ${state.mode} · ${poseText}`, 10, h - 10);
  if (state.flash) {
    ctx.fillStyle = COLORS.goal;
    ctx.fillText(state.flash, 10, 20);
  }

  if (state.connection !== "open" || isStale(state, nowMs)) {
    ctx.fillStyle = COLORS.stale;
    ctx.fillRect(0, 0, w, h);
    ctx.fillStyle = COLORS.text;
    ctx.font = "16px system-ui, sans-serif";
    const label =
      state.connection !== "open" ? "disconnected — reconnecting…" : "pose stream stale";
    ctx.fillText(label, w / 2 - ctx.measureText(label).width / 2, h / 2);
  }
}

function drawRobot(
  ctx: CanvasRenderingContext2D,
  mapping: ArenaMapping,
  x: number,
  y: number,
  theta: number
): void {
  const c = worldToScreen(mapping, { x, y });
  const len = 0.3 * mapping.pxPerMeter;
  const wid = 0.2 * mapping.pxPerMeter;
  ctx.save();
  ctx.translate(c.x, c.y);
  ctx.rotate(-theta); // screen y is flipped
  ctx.fillStyle = COLORS.robot;
  ctx.fillRect(-len / 2, -wid / 2, len, wid);
  ctx.fillStyle = COLORS.robotNose;
  ctx.beginPath();
  ctx.moveTo(len / 2, 0);
  ctx.lineTo(len / 4, -wid / 3);
  ctx.lineTo(len / 4, wid / 3);
  ctx.closePath();
  ctx.fill();
  ctx.restore();
}

function line(
  ctx: CanvasRenderingContext2D,
  x0: number,
  y0: number,
  x1: number,
  y1: number
): void {
  ctx.beginPath();
  ctx.moveTo(x0, y0);
  ctx.lineTo(x1, y1);
  ctx.stroke();
}
