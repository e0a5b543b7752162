// Gateway wire protocol, version 1. One JSON object per message with
// type/session/request_id; one reply per message echoing request_id and
// carrying either a result or a structured error. Meters and degrees on
// the wire.

export const PROTOCOL_VERSION = 1;

export interface ReadingWire {
  timestamp_s: number;
  distance_m: number;
  azimuth_deg: number;
  elevation_deg: number;
}

export interface TruthSampleWire {
  timestamp_s: number;
  position_m: [number, number, number];
}

export interface RaySummaryWire {
  direction: [number, number, number];
  origin_m: [number, number, number];
  net_displacement_m: number;
  mean_speed_mps: number;
  explained_variance_ratio: number;
  flags: string[];
  sample_count: number;
}

export interface DeviceWire {
  id: string;
  label: string;
  position_m: [number, number, number];
  registered_at_s: number;
  registration_gap_m: number;
  registration_angle_deg: number;
}

export interface GuidanceWire {
  reason: string;
  hint: string;
  angle_deg?: number;
  separation_m?: number;
}

export interface SelectionWire {
  ranked: [string, number][];
  offsets_deg: Record<string, number>;
  ambiguous: boolean;
  chosen?: string;
  candidates?: string[];
}

export interface SweepReportWire {
  experiment: string;
  axis: string;
  seed: number;
  columns: string[];
  rows: (number | string | boolean)[][];
  csv: string;
}

export interface GestureSpecWire {
  start_m: [number, number, number];
  direction?: [number, number, number];
  target_m?: [number, number, number];
  displacement_m: number;
  speed_mps: number;
  seed?: number;
}

export interface ErrorBody {
  code: string;
  message: string;
  detail: Record<string, unknown>;
}

export interface Reply {
  protocol_version: number;
  request_id: string;
  ok: boolean;
  result: Record<string, unknown> | null;
  error: ErrorBody | null;
}

// Scenario document (format_version 1), as persisted by the engine.
export interface ScenarioDoc {
  format_version: number;
  name: string;
  anchor: { fov_half_angle_deg: number };
  room: { min_m: [number, number, number]; max_m: [number, number, number] };
  noise: {
    sigma_distance_m: number;
    sigma_azimuth_deg: number;
    sigma_elevation_deg: number;
    bias_azimuth_deg: number;
    bias_elevation_deg: number;
    seed: number;
  };
  gesture: {
    jitter_amplitude_m: number;
    axis_wander_deg: number;
    depth_wander_deg: number;
  };
  devices: DeviceWire[];
  calibration?: Record<string, number> | null;
}

export function isReply(value: unknown): value is Reply {
  if (typeof value !== "object" || value === null) return false;
  const reply = value as Record<string, unknown>;
  return typeof reply.request_id === "string" && typeof reply.ok === "boolean";
}
