// Canvas drawing of the top-down scene. Pure view code: reads the scene
// model and paints; never mutates state.

import { SceneState, estimateError } from "./scene.js";
import { StrokePoint, ViewTransform, worldToPx } from "./stroke.js";

export interface RenderExtras {
  stroke: StrokePoint[] | null;
  highlightIds: Set<string>;
  candidateIds: Set<string>;
}

export function drawScene(ctx: CanvasRenderingContext2D, state: SceneState,
                          view: ViewTransform, extras: RenderExtras): void {
  const { width, height } = ctx.canvas;
  ctx.clearRect(0, 0, width, height);
  ctx.fillStyle = "#10141a";
  ctx.fillRect(0, 0, width, height);

  drawRoom(ctx, state, view);
  drawAnchor(ctx, state, view);
  for (const device of state.devices) {
    drawDevice(ctx, state, view, device.id, extras);
  }
  drawUser(ctx, state, view);
  if (extras.stroke && extras.stroke.length > 1) {
    drawStroke(ctx, extras.stroke);
  }
  drawRay(ctx, state, view);
}

function drawRoom(ctx: CanvasRenderingContext2D, state: SceneState,
                  view: ViewTransform): void {
  const [x0, y0] = worldToPx(view, state.room.min[0], state.room.max[2]);
  const [x1, y1] = worldToPx(view, state.room.max[0], state.room.min[2]);
  ctx.strokeStyle = "#2c3440";
  ctx.lineWidth = 2;
  ctx.strokeRect(x0, y0, x1 - x0, y1 - y0);

  ctx.strokeStyle = "#1a2028";
  ctx.lineWidth = 1;
  for (let xm = Math.ceil(state.room.min[0]); xm <= state.room.max[0]; xm += 1) {
    const [px0, py0] = worldToPx(view, xm, state.room.min[2]);
    const [px1, py1] = worldToPx(view, xm, state.room.max[2]);
    line(ctx, px0, py0, px1, py1);
  }
  for (let zm = Math.ceil(state.room.min[2]); zm <= state.room.max[2]; zm += 1) {
    const [px0, py0] = worldToPx(view, state.room.min[0], zm);
    const [px1, py1] = worldToPx(view, state.room.max[0], zm);
    line(ctx, px0, py0, px1, py1);
  }
}

function drawAnchor(ctx: CanvasRenderingContext2D, state: SceneState,
                    view: ViewTransform): void {
  const [px, py] = worldToPx(view, 0, 0);
  // Field-of-view wedge along +z.
  const half = (state.fovHalfAngleDeg * Math.PI) / 180;
  const reach = 7 / view.metersPerPixel;
  ctx.fillStyle = "rgba(90, 140, 255, 0.06)";
  ctx.beginPath();
  ctx.moveTo(px, py);
  ctx.arc(px, py, reach, -Math.PI / 2 - half, -Math.PI / 2 + half);
  ctx.closePath();
  ctx.fill();

  ctx.fillStyle = "#5a8cff";
  ctx.beginPath();
  ctx.moveTo(px, py - 9);
  ctx.lineTo(px - 8, py + 7);
  ctx.lineTo(px + 8, py + 7);
  ctx.closePath();
  ctx.fill();
  label(ctx, "anchor", px + 12, py + 4, "#5a8cff");
}

function drawDevice(ctx: CanvasRenderingContext2D, state: SceneState,
                    view: ViewTransform, id: string, extras: RenderExtras): void {
  const device = state.devices.find((d) => d.id === id);
  if (!device) return;
  const [px, py] = worldToPx(view, device.x, device.z);

  const chosen = extras.highlightIds.has(id);
  const candidate = extras.candidateIds.has(id);
  const color = chosen ? "#47d16c" : candidate ? "#ffc857" : "#d8dee9";

  ctx.fillStyle = color;
  ctx.beginPath();
  ctx.arc(px, py, 7, 0, 2 * Math.PI);
  ctx.fill();
  label(ctx, device.label, px + 10, py - 8, color);

  // Ghost pin for the two-pointing estimate plus the error segment.
  if (device.catalog && device.wizardEstimate) {
    const [ex, , ez] = device.catalog.position_m;
    const [qx, qy] = worldToPx(view, ex, ez);
    ctx.strokeStyle = "#9a6cff";
    ctx.setLineDash([4, 4]);
    line(ctx, px, py, qx, qy);
    ctx.setLineDash([]);
    ctx.beginPath();
    ctx.arc(qx, qy, 7, 0, 2 * Math.PI);
    ctx.stroke();
    const err = estimateError(device);
    if (err !== null) {
      label(ctx, `${(err * 100).toFixed(0)} cm`, qx + 10, qy + 12, "#9a6cff");
    }
  }
}

function drawUser(ctx: CanvasRenderingContext2D, state: SceneState,
                  view: ViewTransform): void {
  const [px, py] = worldToPx(view, state.user.x, state.user.z);
  ctx.strokeStyle = "#ff7a6c";
  ctx.lineWidth = 2;
  ctx.beginPath();
  ctx.arc(px, py, 9, 0, 2 * Math.PI);
  ctx.stroke();
  ctx.beginPath();
  ctx.arc(px, py, 2.5, 0, 2 * Math.PI);
  ctx.fillStyle = "#ff7a6c";
  ctx.fill();
  label(ctx, `you (h=${state.user.y.toFixed(1)} m)`, px + 12, py + 4, "#ff7a6c");
}

function drawStroke(ctx: CanvasRenderingContext2D, stroke: StrokePoint[]): void {
  ctx.strokeStyle = "#ffd166";
  ctx.lineWidth = 3;
  ctx.beginPath();
  ctx.moveTo(stroke[0].xPx, stroke[0].yPx);
  for (const point of stroke.slice(1)) ctx.lineTo(point.xPx, point.yPx);
  ctx.stroke();
}

function drawRay(ctx: CanvasRenderingContext2D, state: SceneState,
                 view: ViewTransform): void {
  const ray = state.lastRay;
  if (!ray) return;
  const [ox, , oz] = ray.origin_m;
  const [dx, , dz] = ray.direction;
  const horizontal = Math.hypot(dx, dz);
  if (horizontal < 1e-9) return;
  const reach = 8;
  const [px0, py0] = worldToPx(view, ox, oz);
  const [px1, py1] = worldToPx(view, ox + (dx / horizontal) * reach,
                               oz + (dz / horizontal) * reach);
  ctx.strokeStyle = "#47d16c";
  ctx.lineWidth = 1.5;
  ctx.setLineDash([8, 5]);
  line(ctx, px0, py0, px1, py1);
  ctx.setLineDash([]);
}

export function drawChart(ctx: CanvasRenderingContext2D,
                          series: { label: string; x: number[]; y: number[] }[]): void {
  const { width, height } = ctx.canvas;
  ctx.clearRect(0, 0, width, height);
  ctx.fillStyle = "#10141a";
  ctx.fillRect(0, 0, width, height);
  if (!series.length || !series[0].x.length) return;

  const pad = 40;
  const xs = series.flatMap((s) => s.x);
  const ys = series.flatMap((s) => s.y).filter((v) => Number.isFinite(v));
  const xMin = Math.min(...xs);
  const xMax = Math.max(...xs);
  const yMin = 0;
  const yMax = Math.max(...ys) * 1.1 || 1;
  const sx = (v: number) =>
    pad + ((v - xMin) / Math.max(xMax - xMin, 1e-9)) * (width - 2 * pad);
  const sy = (v: number) => height - pad - ((v - yMin) / (yMax - yMin)) * (height - 2 * pad);

  ctx.strokeStyle = "#2c3440";
  ctx.strokeRect(pad, pad, width - 2 * pad, height - 2 * pad);

  const colors = ["#47d16c", "#5a8cff", "#ffc857"];
  series.forEach((s, index) => {
    ctx.strokeStyle = colors[index % colors.length];
    ctx.lineWidth = 2;
    ctx.beginPath();
    s.x.forEach((xv, i) => {
      if (!Number.isFinite(s.y[i])) return;
      if (i === 0) ctx.moveTo(sx(xv), sy(s.y[i]));
      else ctx.lineTo(sx(xv), sy(s.y[i]));
    });
    ctx.stroke();
    label(ctx, s.label, pad + 8, pad + 16 + index * 16, colors[index % colors.length]);
  });
  label(ctx, `${xMin}`, pad, height - pad + 16, "#8892a0");
  label(ctx, `${xMax}`, width - pad - 10, height - pad + 16, "#8892a0");
  label(ctx, yMax.toFixed(2), 4, pad + 4, "#8892a0");
}

function line(ctx: CanvasRenderingContext2D, x0: number, y0: number,
              x1: number, y1: number): void {
  ctx.beginPath();
  ctx.moveTo(x0, y0);
  ctx.lineTo(x1, y1);
  ctx.stroke();
}

function label(ctx: CanvasRenderingContext2D, text: string, x: number, y: number,
               color: string): void {
  ctx.fillStyle = color;
  ctx.font = "12px system-ui, sans-serif";
  ctx.fillText(text, x, y);
}
