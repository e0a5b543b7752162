// Playground bootstrap: connect to the gateway, wire the canvas and
// panels, and route every interaction through the protocol. The UI never
// estimates anything; disabling the gateway disables all estimates.

import { GatewayClient, GatewayError, HttpTransport, Transport, WsTransport } from "./client.js";
import { drawChart, drawScene } from "./render.js";
import {
  SceneState,
  applyGuidance,
  applyRay,
  applyRegistration,
  applySelection,
  newScene,
  placeDevice,
  removeDevice,
  toScenarioDoc,
} from "./scene.js";
import { StrokePoint, ViewTransform, pxToWorld, strokeToGesture } from "./stroke.js";
import { chartSeries, parseReportCsv } from "./sweepview.js";
import {
  WizardState,
  cancelWizard,
  firstCaptured,
  idleWizard,
  secondResult,
  startWizard,
} from "./wizard.js";

type Mode = "gesture" | "move-user" | "place-device";

const params = new URLSearchParams(window.location.search);
const gatewayBase = params.get("gateway") ?? "http://127.0.0.1:8800";

const canvas = document.getElementById("scene") as HTMLCanvasElement;
const ctx = canvas.getContext("2d")!;
const chartCanvas = document.getElementById("chart") as HTMLCanvasElement;
const chartCtx = chartCanvas.getContext("2d")!;

const view: ViewTransform = {
  metersPerPixel: 7.5 / canvas.height,
  originXPx: canvas.width / 2,
  originYPx: canvas.height - 30,
};

const state: SceneState = newScene();
let wizard: WizardState = idleWizard();
let mode: Mode = "gesture";
let stroke: StrokePoint[] | null = null;
let strokeSeed = Math.floor(Math.random() * 1_000_000);
let client: GatewayClient | null = null;
let online = false;
let scenarioDirty = true;

function statusEl(): HTMLElement {
  return document.getElementById("status")!;
}

function bannerEl(): HTMLElement {
  return document.getElementById("banner")!;
}

function setBanner(text: string | null): void {
  state.banner = text;
  bannerEl().textContent = text ?? "";
  bannerEl().style.display = text ? "block" : "none";
}

async function connect(): Promise<void> {
  const wsUrl = gatewayBase.replace(/^http/, "ws") + "/v1/ws";
  let transport: Transport;
  try {
    const ws = new WsTransport(wsUrl);
    await ws.ready;
    transport = ws;
    statusEl().textContent = `connected (websocket) - ${gatewayBase}`;
  } catch {
    transport = new HttpTransport(gatewayBase);
    statusEl().textContent = `connected (http) - ${gatewayBase}`;
  }
  client = new GatewayClient(transport);
  try {
    await client.createSession();
    online = true;
  } catch (error) {
    online = false;
    statusEl().textContent = `gateway unreachable at ${gatewayBase}; estimates disabled`;
    throw error;
  }
}

async function pushScenario(): Promise<void> {
  if (!client || !online) return;
  await client.loadScenario(toScenarioDoc(state));
  scenarioDirty = false;
}

function redraw(): void {
  const highlight = new Set<string>();
  const candidates = new Set<string>();
  if (state.selection) {
    for (const placed of state.devices) {
      const catalogId = placed.catalog?.id ?? placed.id;
      if (!state.selection.ambiguous && state.selection.chosen === catalogId) {
        highlight.add(placed.id);
      }
      if (state.selection.ambiguous && state.selection.candidates.includes(catalogId)) {
        candidates.add(placed.id);
      }
    }
  }
  drawScene(ctx, state, view, { stroke, highlightIds: highlight, candidateIds: candidates });
  renderPanel();
  renderDeviceList();
  renderWizard();
}

function renderPanel(): void {
  const panel = document.getElementById("ranking")!;
  panel.innerHTML = "";
  if (!state.selection) return;
  const title = document.createElement("div");
  title.className = "panel-title";
  title.textContent = state.selection.ambiguous
    ? "Candidates (pick one)"
    : `Chosen: ${state.selection.chosen}`;
  panel.appendChild(title);
  for (const [deviceId, score] of state.selection.ranked) {
    const row = document.createElement("div");
    row.className = "rank-row";
    const offset = state.selection.offsetsDeg[deviceId];
    row.textContent = `${deviceId}  score=${score.toExponential(2)}  offset=${offset.toFixed(2)} deg`;
    if (state.selection.ambiguous && state.selection.candidates.includes(deviceId)) {
      row.classList.add("candidate");
    }
    if (!state.selection.ambiguous && state.selection.chosen === deviceId) {
      row.classList.add("chosen");
    }
    panel.appendChild(row);
  }
}

function renderDeviceList(): void {
  const list = document.getElementById("devices")!;
  list.innerHTML = "";
  for (const device of state.devices) {
    const row = document.createElement("div");
    row.className = "device-row";
    const info = document.createElement("span");
    info.textContent = `${device.label} (${device.x.toFixed(2)}, ${device.y.toFixed(2)}, ${device.z.toFixed(2)})`;
    row.appendChild(info);
    const wizardBtn = document.createElement("button");
    wizardBtn.textContent = "register by pointing";
    wizardBtn.onclick = () => void startWizardFlow(device.id);
    row.appendChild(wizardBtn);
    const dropBtn = document.createElement("button");
    dropBtn.textContent = "remove";
    dropBtn.onclick = () => {
      removeDevice(state, device.id);
      scenarioDirty = true;
      redraw();
    };
    row.appendChild(dropBtn);
    list.appendChild(row);
  }
}

function renderWizard(): void {
  const box = document.getElementById("wizard")!;
  switch (wizard.step) {
    case "idle":
      box.textContent = "";
      break;
    case "await-first":
      box.textContent = `wizard [${wizard.label}]: draw the first gesture`;
      break;
    case "await-second":
      box.textContent =
        `wizard [${wizard.label}]: move somewhere else, draw again` +
        (wizard.banner ? ` - ${wizard.banner}` : "");
      break;
    case "done":
      box.textContent = `wizard: registered ${wizard.registered.id} at ` +
        wizard.registered.position_m.map((v) => v.toFixed(2)).join(", ");
      break;
  }
}

async function startWizardFlow(placedId: string): Promise<void> {
  const device = state.devices.find((d) => d.id === placedId);
  if (!device) return;
  if (!client || !online) {
    setBanner("gateway offline: estimates disabled");
    return;
  }
  try {
    if (scenarioDirty) await pushScenario();
    // Drop the placed (escape-hatch) catalog entry; the wizard replaces it
    // with a two-pointing estimate under a fresh record.
    try {
      await client.removeDevice(device.catalog?.id ?? device.id);
    } catch {
      // Not in the catalog yet: nothing to drop.
    }
    device.catalog = null;
    device.wizardEstimate = false;
    wizard = startWizard(device.id, device.label);
    setBanner(`wizard: draw a gesture at "${device.label}" from your current position`);
  } catch (error) {
    setBanner(String(error));
  }
  redraw();
}

async function handleStroke(points: StrokePoint[]): Promise<void> {
  if (!client || !online) {
    setBanner("gateway offline: estimates disabled");
    return;
  }
  const height = Number((document.getElementById("height") as HTMLInputElement).value);
  strokeSeed += 1;
  const outcome = strokeToGesture(points, view, height, strokeSeed);
  if (outcome.kind === "too-few-points") {
    setBanner("stroke too short to read");
    return;
  }
  if (outcome.kind === "too-short") {
    setBanner(`stroke is ${(outcome.displacementM * 100).toFixed(1)} cm at scene scale; ` +
              "draw at least 3 cm");
    return;
  }
  try {
    if (scenarioDirty) await pushScenario();
    const spec = outcome.spec;
    state.user = { x: spec.start_m[0], y: spec.start_m[1], z: spec.start_m[2] };
    const simulated = await client.simulateGesture(spec);
    const ray = await client.runGesture(simulated.readings);
    applyRay(state, ray);
    setBanner(state.banner);

    if (wizard.step === "await-first") {
      await client.registerFirst();
      wizard = firstCaptured(wizard);
      setBanner("first pointing captured; move at least 1.4 m and draw again");
    } else if (wizard.step === "await-second") {
      const placedId = wizard.deviceId;
      const result = await client.registerSecond(wizard.label);
      wizard = secondResult(wizard, result);
      if (result.guidance) {
        applyGuidance(state, result.guidance);
        setBanner(state.banner);
      } else if (result.device) {
        applyRegistration(state, placedId, result.device);
        setBanner(null);
      }
    } else if (state.devices.length > 0) {
      const selection = await client.select();
      applySelection(state, selection);
    }
  } catch (error) {
    if (error instanceof GatewayError) {
      setBanner(`${error.code}: ${error.message}`);
    } else {
      setBanner(String(error));
    }
  }
  redraw();
}

function wireCanvas(): void {
  canvas.addEventListener("pointerdown", (event) => {
    const rect = canvas.getBoundingClientRect();
    const x = event.clientX - rect.left;
    const y = event.clientY - rect.top;
    const height = Number((document.getElementById("height") as HTMLInputElement).value);
    if (mode === "place-device") {
      const label = (document.getElementById("device-label") as HTMLInputElement).value || "device";
      const [wx, wy, wz] = pxToWorld(view, x, y, height);
      placeDevice(state, label, wx, wy, wz);
      scenarioDirty = true;
      redraw();
      return;
    }
    if (mode === "move-user") {
      const [wx, wy, wz] = pxToWorld(view, x, y, height);
      state.user = { x: wx, y: wy, z: wz };
      redraw();
      return;
    }
    stroke = [{ xPx: x, yPx: y, tMs: performance.now() }];
    canvas.setPointerCapture(event.pointerId);
  });

  canvas.addEventListener("pointermove", (event) => {
    if (!stroke) return;
    const rect = canvas.getBoundingClientRect();
    stroke.push({
      xPx: event.clientX - rect.left,
      yPx: event.clientY - rect.top,
      tMs: performance.now(),
    });
    redraw();
  });

  canvas.addEventListener("pointerup", () => {
    if (!stroke) return;
    const finished = stroke;
    stroke = null;
    void handleStroke(finished);
  });
}

function wireControls(): void {
  for (const candidate of ["gesture", "move-user", "place-device"] as Mode[]) {
    document.getElementById(`mode-${candidate}`)!.addEventListener("click", () => {
      mode = candidate;
      document.querySelectorAll(".mode").forEach((el) => el.classList.remove("active"));
      document.getElementById(`mode-${candidate}`)!.classList.add("active");
    });
  }

  document.getElementById("wizard-cancel")!.addEventListener("click", () => {
    wizard = cancelWizard();
    setBanner(null);
    redraw();
  });

  document.getElementById("apply-noise")!.addEventListener("click", () => {
    const read = (id: string) => Number((document.getElementById(id) as HTMLInputElement).value);
    state.noise.sigmaDistanceM = read("noise-d");
    state.noise.sigmaAzimuthDeg = read("noise-az");
    state.noise.sigmaElevationDeg = read("noise-el");
    state.noise.seed = read("noise-seed");
    state.noise.jitterAmplitudeM = read("noise-jitter");
    scenarioDirty = true;
    setBanner("noise updated; next gesture uses it");
  });

  document.getElementById("save-scenario")!.addEventListener("click", async () => {
    if (!client || !online) return;
    if (scenarioDirty) await pushScenario();
    const name = (document.getElementById("scenario-name") as HTMLInputElement).value || "playground";
    const path = await client.saveScenario(name);
    setBanner(`saved to ${path}`);
  });

  document.getElementById("run-sweep")!.addEventListener("click", async () => {
    if (!client || !online) return;
    const axis = (document.getElementById("sweep-axis") as HTMLSelectElement).value;
    setBanner(`running ${axis} sweep...`);
    try {
      if (scenarioDirty) await pushScenario();
      const report = await client.runSweep(axis, 40, 7);
      drawChart(chartCtx, chartSeries(parseReportCsv(report.csv)));
      setBanner(null);
    } catch (error) {
      setBanner(String(error));
    }
  });

  (document.getElementById("sweep-file") as HTMLInputElement).addEventListener(
    "change",
    async (event) => {
      const input = event.target as HTMLInputElement;
      const file = input.files?.[0];
      if (!file) return;
      const text = await file.text();
      drawChart(chartCtx, chartSeries(parseReportCsv(text)));
    },
  );
}

async function bootstrap(): Promise<void> {
  wireCanvas();
  wireControls();
  redraw();
  try {
    await connect();
    await pushScenario();
  } catch {
    // Offline banner already shown; interactions keep failing loudly.
  }
  redraw();
}

void bootstrap();
