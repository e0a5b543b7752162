// Gateway client: request-id bookkeeping plus one typed method per
// protocol message. All numbers rendered by the UI come from the replies
// these methods return; the client performs no estimation of its own.

import {
  DeviceWire,
  GestureSpecWire,
  GuidanceWire,
  RaySummaryWire,
  ReadingWire,
  Reply,
  ScenarioDoc,
  SelectionWire,
  SweepReportWire,
  TruthSampleWire,
  isReply,
} from "./protocol.js";

export interface Transport {
  send(message: Record<string, unknown>): Promise<Reply>;
  close(): void;
}

export class GatewayError extends Error {
  constructor(public code: string, message: string) {
    super(message);
    this.name = "GatewayError";
  }
}

export class HttpTransport implements Transport {
  constructor(private baseUrl: string) {}

  async send(message: Record<string, unknown>): Promise<Reply> {
    const response = await fetch(`${this.baseUrl}/v1/message`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(message),
    });
    const body: unknown = await response.json();
    if (!isReply(body)) {
      throw new GatewayError("BAD_REPLY", "gateway reply is not a protocol reply");
    }
    return body;
  }

  close(): void {}
}

export class WsTransport implements Transport {
  private pending = new Map<string, (reply: Reply) => void>();
  private socket: WebSocket;
  readonly ready: Promise<void>;

  constructor(wsUrl: string) {
    this.socket = new WebSocket(wsUrl);
    this.ready = new Promise((resolve, reject) => {
      this.socket.onopen = () => resolve();
      this.socket.onerror = () => reject(new GatewayError("OFFLINE", "websocket failed"));
    });
    this.socket.onmessage = (event) => {
      let body: unknown;
      try {
        body = JSON.parse(String(event.data));
      } catch {
        return;
      }
      if (!isReply(body)) return;
      const resolve = this.pending.get(body.request_id);
      if (resolve) {
        this.pending.delete(body.request_id);
        resolve(body);
      }
    };
  }

  async send(message: Record<string, unknown>): Promise<Reply> {
    await this.ready;
    const requestId = String(message.request_id);
    return new Promise((resolve) => {
      this.pending.set(requestId, resolve);
      this.socket.send(JSON.stringify(message));
    });
  }

  close(): void {
    this.socket.close();
  }
}

export class GatewayClient {
  private counter = 0;
  private session: string | null = null;

  constructor(private transport: Transport) {}

  get sessionId(): string | null {
    return this.session;
  }

  private nextId(kind: string): string {
    this.counter += 1;
    return `${kind}-${this.counter}`;
  }

  private async call(type: string, payload: Record<string, unknown> = {},
                     withSession = true): Promise<Record<string, unknown>> {
    const message: Record<string, unknown> = {
      type,
      request_id: this.nextId(type),
      ...payload,
    };
    if (withSession) {
      if (this.session === null) throw new GatewayError("NO_SESSION", "no session open");
      message.session = this.session;
    }
    const reply = await this.transport.send(message);
    if (!reply.ok || reply.result === null) {
      const error = reply.error ?? { code: "UNKNOWN", message: "gateway error", detail: {} };
      throw new GatewayError(error.code, error.message);
    }
    return reply.result;
  }

  async createSession(): Promise<string> {
    const result = await this.call("create_session", {}, false);
    this.session = String(result.session);
    return this.session;
  }

  async loadScenario(doc: ScenarioDoc): Promise<ScenarioDoc> {
    const result = await this.call("load_scenario", { scenario: doc });
    return result.scenario as unknown as ScenarioDoc;
  }

  async loadScenarioByName(name: string): Promise<ScenarioDoc> {
    const result = await this.call("load_scenario", { name });
    return result.scenario as unknown as ScenarioDoc;
  }

  async saveScenario(name: string): Promise<string> {
    const result = await this.call("save_scenario", { name });
    return String(result.path);
  }

  async getScenario(): Promise<ScenarioDoc> {
    const result = await this.call("get_scenario");
    return result.scenario as unknown as ScenarioDoc;
  }

  async simulateGesture(spec: GestureSpecWire): Promise<{
    readings: ReadingWire[];
    truth: TruthSampleWire[];
  }> {
    const result = await this.call("simulate_gesture", { spec });
    return result as unknown as { readings: ReadingWire[]; truth: TruthSampleWire[] };
  }

  /** begin + append + end: run one gesture's readings through the engine. */
  async runGesture(readings: ReadingWire[]): Promise<RaySummaryWire> {
    await this.call("begin_gesture");
    await this.call("append_readings", { readings });
    const result = await this.call("end_gesture");
    return result.ray as unknown as RaySummaryWire;
  }

  async replayTrace(traceCsv: string, gesture?: string): Promise<RaySummaryWire> {
    const result = await this.call("replay_trace", {
      trace_csv: traceCsv,
      ...(gesture ? { gesture } : {}),
    });
    return result.ray as unknown as RaySummaryWire;
  }

  async registerFirst(): Promise<[number, number, number]> {
    const result = await this.call("register_first");
    return result.origin_m as [number, number, number];
  }

  async registerSecond(label: string): Promise<
    { device: DeviceWire; guidance?: undefined } | { guidance: GuidanceWire; device?: undefined }
  > {
    const result = await this.call("register_second", { label });
    if ("guidance" in result) {
      return { guidance: result.guidance as unknown as GuidanceWire };
    }
    return { device: result.device as unknown as DeviceWire };
  }

  async select(): Promise<SelectionWire> {
    return (await this.call("select")) as unknown as SelectionWire;
  }

  async listDevices(): Promise<DeviceWire[]> {
    const result = await this.call("list_devices");
    return result.devices as unknown as DeviceWire[];
  }

  async removeDevice(deviceId: string): Promise<void> {
    await this.call("remove_device", { device_id: deviceId });
  }

  async runSweep(axis: string, trials: number, seed?: number,
                 grid?: number[]): Promise<SweepReportWire> {
    const result = await this.call("run_sweep", {
      axis,
      trials,
      ...(seed !== undefined ? { seed } : {}),
      ...(grid ? { grid } : {}),
    });
    return result.report as unknown as SweepReportWire;
  }
}
