// Typed client for the recognition/compile/simulate service.

export interface RejectedGlyph {
  box: [number, number, number, number];
  confidence: number;
  best_guess: string;
}

export interface ClassifyResponse {
  symbols: string[];
  confidences: number[];
  boxes: [number, number, number, number][];
  rejected?: RejectedGlyph[];
}

export type Command =
  | { kind: "translate"; distance_mm: number }
  | { kind: "rotate"; angle_deg: number }
  | { kind: "arc"; heading_change_deg: number; chord_mm: number };

export interface MapNodeDoc {
  id: string;
  col: number;
  row: number;
  icon?: string;
}

export interface MapDoc {
  pitch_mm: number;
  nodes: MapNodeDoc[];
  segments: { a: string; b: string; darkness: number }[];
  start: { node: string; heading: number };
}

export interface PoseDoc {
  x_mm: number;
  y_mm: number;
  heading_deg: number;
}

export interface TrajectoryEntry {
  pose: PoseDoc;
  energy: number;
  command_index: number;
}

export type RunStatus = "completed" | "energy_exhausted" | "off_map";

export interface SimResult {
  status: RunStatus;
  final_pose: PoseDoc;
  total_cost: number;
  trajectory: TrajectoryEntry[];
}

export class ApiFault extends Error {
  constructor(
    readonly status: number,
    readonly code: string,
    message: string,
    readonly detail?: unknown,
  ) {
    super(message);
  }
}

async function raiseFault(response: Response): Promise<never> {
  let code = "http_error";
  let message = `${response.status} ${response.statusText}`;
  let detail: unknown;
  try {
    const doc = await response.json();
    if (doc && typeof doc.code === "string") {
      code = doc.code;
      message = doc.message ?? message;
      detail = doc.detail;
    }
  } catch {
    // non-JSON error body; keep the HTTP status text
  }
  throw new ApiFault(response.status, code, message, detail);
}

export class Client {
  constructor(readonly base: string = "") {}

  private url(path: string): string {
    return this.base + path;
  }

  async health(): Promise<{ status: string; model_version: string }> {
    const r = await fetch(this.url("/api/health"));
    if (!r.ok) await raiseFault(r);
    return r.json();
  }

  async classify(image: Uint8Array, contentType: string): Promise<ClassifyResponse> {
    const r = await fetch(this.url("/api/classify"), {
      method: "POST",
      headers: { "Content-Type": contentType },
      body: image as unknown as BodyInit,
    });
    if (!r.ok) await raiseFault(r);
    return r.json();
  }

  async compile(symbols: string[]): Promise<Command[]> {
    const r = await fetch(this.url("/api/compile"), {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ symbols }),
    });
    if (!r.ok) await raiseFault(r);
    return r.json();
  }

  async simulate(symbols: string[], map?: MapDoc): Promise<SimResult> {
    const body: Record<string, unknown> = { program: { symbols } };
    if (map) body.map = map;
    const r = await fetch(this.url("/api/simulate"), {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(body),
    });
    if (!r.ok) await raiseFault(r);
    return r.json();
  }

  async defaultMap(): Promise<MapDoc> {
    const r = await fetch(this.url("/api/map/default"));
    if (!r.ok) await raiseFault(r);
    return r.json();
  }
}
