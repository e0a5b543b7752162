// Two-pointing registration wizard state machine.
//
// Flow: pick a device -> draw a gesture at it -> the first ray is pinned
// (register_first) -> move somewhere else -> draw at it again ->
// register_second either yields the estimated device record or a
// guidance outcome (move farther / angle too small), in which case the
// wizard stays on the second step with a banner and the user retries.

import { DeviceWire, GuidanceWire } from "./protocol.js";

export type WizardState =
  | { step: "idle" }
  | { step: "await-first"; deviceId: string; label: string }
  | { step: "await-second"; deviceId: string; label: string; banner: string | null }
  | { step: "done"; deviceId: string; registered: DeviceWire };

export function idleWizard(): WizardState {
  return { step: "idle" };
}

export function startWizard(deviceId: string, label: string): WizardState {
  return { step: "await-first", deviceId, label };
}

/** First gesture captured and register_first acknowledged. */
export function firstCaptured(state: WizardState): WizardState {
  if (state.step !== "await-first") return state;
  return { step: "await-second", deviceId: state.deviceId, label: state.label, banner: null };
}

/** Outcome of register_second. */
export function secondResult(
  state: WizardState,
  outcome: { device?: DeviceWire; guidance?: GuidanceWire },
): WizardState {
  if (state.step !== "await-second") return state;
  if (outcome.device) {
    return { step: "done", deviceId: state.deviceId, registered: outcome.device };
  }
  const guidance = outcome.guidance;
  const banner = guidance
    ? `${guidance.hint}: ${guidance.reason}${
        guidance.separation_m !== undefined
          ? ` (${guidance.separation_m.toFixed(2)} m apart)`
          : guidance.angle_deg !== undefined
            ? ` (${guidance.angle_deg.toFixed(1)} deg)`
            : ""
      }`
    : "registration failed";
  return { step: "await-second", deviceId: state.deviceId, label: state.label, banner };
}

export function cancelWizard(): WizardState {
  return { step: "idle" };
}
