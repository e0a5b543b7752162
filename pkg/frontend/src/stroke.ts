// Pointer stroke -> gesture spec. The canvas is a top-down view of the
// room (world x right, world z up the screen); the height slider supplies
// the hand height (world y). Displacement and speed come straight from
// the pointer positions and timestamps, so drawing faster or slower, or
// longer or shorter, explores the corresponding accuracy effects.
//
// This is unit conversion only; all estimation happens in the gateway.

import { GestureSpecWire } from "./protocol.js";

export interface StrokePoint {
  xPx: number;
  yPx: number;
  tMs: number;
}

export interface ViewTransform {
  metersPerPixel: number;
  // Pixel coordinates of the world origin (the anchor).
  originXPx: number;
  originYPx: number;
}

export const MIN_STROKE_DISPLACEMENT_M = 0.03;
export const MIN_STROKE_POINTS = 2;

export function pxToWorld(view: ViewTransform, xPx: number, yPx: number,
                          heightM: number): [number, number, number] {
  return [
    (xPx - view.originXPx) * view.metersPerPixel,
    heightM,
    (view.originYPx - yPx) * view.metersPerPixel,
  ];
}

export function worldToPx(view: ViewTransform, x: number, z: number): [number, number] {
  return [
    view.originXPx + x / view.metersPerPixel,
    view.originYPx - z / view.metersPerPixel,
  ];
}

export type StrokeResult =
  | { kind: "gesture"; spec: GestureSpecWire }
  | { kind: "too-short"; displacementM: number }
  | { kind: "too-few-points" };

export function strokeToGesture(points: StrokePoint[], view: ViewTransform,
                                heightM: number, seed?: number): StrokeResult {
  if (points.length < MIN_STROKE_POINTS) {
    return { kind: "too-few-points" };
  }
  const first = points[0];
  const last = points[points.length - 1];
  const start = pxToWorld(view, first.xPx, first.yPx, heightM);
  const end = pxToWorld(view, last.xPx, last.yPx, heightM);
  const dx = end[0] - start[0];
  const dz = end[2] - start[2];
  const displacement = Math.hypot(dx, dz);
  if (displacement < MIN_STROKE_DISPLACEMENT_M) {
    return { kind: "too-short", displacementM: displacement };
  }
  const durationS = Math.max((last.tMs - first.tMs) / 1000, 1e-3);
  const speed = displacement / durationS;
  const spec: GestureSpecWire = {
    start_m: start,
    direction: [dx / displacement, 0, dz / displacement],
    displacement_m: displacement,
    speed_mps: speed,
  };
  if (seed !== undefined) spec.seed = seed;
  return { kind: "gesture", spec };
}
