// Scene model: the single source of truth the canvas and panels render.
//
// True device positions are user input (simulation ground truth); every
// estimated quantity (rays, registered positions, rankings) enters this
// model only through gateway replies. Nothing here recomputes estimates.

import {
  DeviceWire,
  GuidanceWire,
  RaySummaryWire,
  ScenarioDoc,
  SelectionWire,
} from "./protocol.js";

export interface PlacedDevice {
  id: string;
  label: string;
  // Ground-truth position set in the editor.
  x: number;
  y: number;
  z: number;
  // Catalog entry as the gateway knows it (placed position until the
  // registration wizard replaces it with a two-pointing estimate).
  catalog: DeviceWire | null;
  wizardEstimate: boolean;
}

export interface NoiseSettings {
  sigmaDistanceM: number;
  sigmaAzimuthDeg: number;
  sigmaElevationDeg: number;
  biasAzimuthDeg: number;
  biasElevationDeg: number;
  seed: number;
  jitterAmplitudeM: number;
  axisWanderDeg: number;
  depthWanderDeg: number;
}

export const DEFAULT_NOISE: NoiseSettings = {
  sigmaDistanceM: 0.03,
  sigmaAzimuthDeg: 1.0,
  sigmaElevationDeg: 1.0,
  biasAzimuthDeg: 0.0,
  biasElevationDeg: 0.0,
  seed: 0,
  jitterAmplitudeM: 0.003,
  axisWanderDeg: 0.0,
  depthWanderDeg: 0.0,
};

export interface SelectionView {
  ambiguous: boolean;
  chosen: string | null;
  candidates: string[];
  ranked: [string, number][];
  offsetsDeg: Record<string, number>;
}

export interface SceneState {
  name: string;
  room: { min: [number, number, number]; max: [number, number, number] };
  fovHalfAngleDeg: number;
  devices: PlacedDevice[];
  user: { x: number; y: number; z: number };
  noise: NoiseSettings;
  lastRay: RaySummaryWire | null;
  selection: SelectionView | null;
  banner: string | null;
}

export function newScene(name = "playground"): SceneState {
  return {
    name,
    room: { min: [-3, -1.5, 0], max: [3, 1.5, 6] },
    fovHalfAngleDeg: 60,
    devices: [],
    user: { x: 0, y: 0, z: 4.5 },
    noise: { ...DEFAULT_NOISE },
    lastRay: null,
    selection: null,
    banner: null,
  };
}

function slug(label: string, taken: Set<string>): string {
  const base =
    label
      .toLowerCase()
      .replace(/[^a-z0-9]+/g, "-")
      .replace(/^-+|-+$/g, "") || "device";
  if (!taken.has(base)) return base;
  let k = 2;
  while (taken.has(`${base}-${k}`)) k += 1;
  return `${base}-${k}`;
}

export function placeDevice(state: SceneState, label: string, x: number, y: number,
                            z: number): PlacedDevice {
  const taken = new Set(state.devices.map((d) => d.id));
  const device: PlacedDevice = {
    id: slug(label, taken),
    label,
    x,
    y,
    z,
    catalog: null,
    wizardEstimate: false,
  };
  state.devices.push(device);
  return device;
}

export function moveDevice(state: SceneState, id: string, x: number, y: number,
                           z: number): void {
  const device = state.devices.find((d) => d.id === id);
  if (!device) return;
  device.x = x;
  device.y = y;
  device.z = z;
  // The stored estimate no longer corresponds to this placement.
  device.catalog = null;
  device.wizardEstimate = false;
}

export function removeDevice(state: SceneState, id: string): void {
  state.devices = state.devices.filter((d) => d.id !== id);
}

/**
 * Scenario document for load_scenario. Catalog positions are the wizard
 * estimates where available and the placed (escape-hatch) positions
 * otherwise, so freshly placed devices are selectable before being
 * re-registered by pointing.
 */
export function toScenarioDoc(state: SceneState): ScenarioDoc {
  return {
    format_version: 1,
    name: state.name,
    anchor: { fov_half_angle_deg: state.fovHalfAngleDeg },
    room: { min_m: state.room.min, max_m: state.room.max },
    noise: {
      sigma_distance_m: state.noise.sigmaDistanceM,
      sigma_azimuth_deg: state.noise.sigmaAzimuthDeg,
      sigma_elevation_deg: state.noise.sigmaElevationDeg,
      bias_azimuth_deg: state.noise.biasAzimuthDeg,
      bias_elevation_deg: state.noise.biasElevationDeg,
      seed: state.noise.seed,
    },
    gesture: {
      jitter_amplitude_m: state.noise.jitterAmplitudeM,
      axis_wander_deg: state.noise.axisWanderDeg,
      depth_wander_deg: state.noise.depthWanderDeg,
    },
    devices: state.devices.map((d) =>
      d.catalog && d.wizardEstimate
        ? d.catalog
        : {
            id: d.id,
            label: d.label,
            position_m: [d.x, d.y, d.z] as [number, number, number],
            registered_at_s: 0,
            registration_gap_m: 0,
            registration_angle_deg: 0,
          },
    ),
  };
}

export function applyRay(state: SceneState, ray: RaySummaryWire): void {
  state.lastRay = ray;
  state.selection = null;
  state.banner = ray.flags.length ? `gesture flags: ${ray.flags.join(", ")}` : null;
}

export function applySelection(state: SceneState, wire: SelectionWire): void {
  state.selection = {
    ambiguous: wire.ambiguous,
    chosen: wire.ambiguous ? null : wire.chosen ?? null,
    candidates: wire.ambiguous ? wire.candidates ?? [] : wire.chosen ? [wire.chosen] : [],
    ranked: wire.ranked,
    offsetsDeg: wire.offsets_deg,
  };
}

export function applyGuidance(state: SceneState, guidance: GuidanceWire): void {
  const detail =
    guidance.separation_m !== undefined
      ? ` (positions ${guidance.separation_m.toFixed(2)} m apart)`
      : guidance.angle_deg !== undefined
        ? ` (directions ${guidance.angle_deg.toFixed(1)} deg apart)`
        : "";
  state.banner = `${guidance.hint}: ${guidance.reason}${detail}`;
}

/** Record a wizard registration outcome against its placed device. */
export function applyRegistration(state: SceneState, placedId: string,
                                  device: DeviceWire): void {
  const placed = state.devices.find((d) => d.id === placedId);
  if (!placed) return;
  placed.catalog = device;
  placed.wizardEstimate = true;
  state.banner = null;
}

/** Distance between a device's placed position and its estimate, meters. */
export function estimateError(device: PlacedDevice): number | null {
  if (!device.catalog || !device.wizardEstimate) return null;
  const [ex, ey, ez] = device.catalog.position_m;
  return Math.hypot(ex - device.x, ey - device.y, ez - device.z);
}
