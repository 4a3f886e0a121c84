/**
 * Wire schema of the pnet session service.
 *
 * One JSON object per message, newline-delimited over stdio or one
 * WebSocket text frame each.  Every request gets exactly one response;
 * events arrive interleaved, unprompted.  This file is the only place
 * the shapes are written down on the client side: everything else in
 * the workbench talks through these types.
 */

export type Verb =
  | "model.load"
  | "model.save"
  | "script.run"
  | "picker.eval"
  | "edit.apply"
  | "sim.start"
  | "sim.cancel"
  | "result.wave"
  | "result.trace"
  | "info.stats";

export interface Request {
  id: number;
  verb: Verb;
  payload?: Record<string, unknown>;
}

export interface ServiceError {
  type: string;
  message: string;
  // present on some error types only
  step?: number;
  module_id?: number;
  partial_steps?: number;
  line?: number;
  col?: number;
  op_index?: number;
  applied?: number;
}

export interface OkResponse {
  id: number | null;
  ok: true;
  payload: unknown;
}

export interface ErrResponse {
  id: number | null;
  ok: false;
  error: ServiceError;
}

export type Response = OkResponse | ErrResponse;

export type EventKind =
  | "model-changed"
  | "sim-progress"
  | "sim-finished"
  | "sim-failed";

export interface SessionEvent {
  event: EventKind;
  revision: number;
  payload: Record<string, unknown>;
}

export function isEvent(msg: unknown): msg is SessionEvent {
  return typeof msg === "object" && msg !== null && "event" in msg;
}

export function isResponse(msg: unknown): msg is Response {
  return typeof msg === "object" && msg !== null && "ok" in msg;
}

// -- per-verb response payloads ---------------------------------------------

export interface ModelStats {
  modules: number;
  links: number;
  attachments: number;
  labels: number;
  notes: number;
  revision: number;
  [extra: string]: unknown;
}

export interface ScriptRunResult {
  result: string;
  output: string[];
  revision: number;
}

export interface PickerEvalResult {
  ids: number[];
}

export interface EditApplyResult {
  applied: number;
  results: Record<string, unknown>[];
}

export interface SimStartResult {
  started: boolean;
  steps: number;
  revision: number;
}

export interface WaveResult {
  channel: string;
  rate: number;
  start: number;
  total: number;
  samples: number[];
}

export interface TraceResult {
  decimation: number;
  rate: number;
  mat_ids: number[];
  start: number;
  total: number;
  frames: number[][];
}

export interface InfoStatsResult {
  model: ModelStats;
  sim: Record<string, unknown>;
  signals: string[];
  engines: string[];
  running: boolean;
  last_run: null | {
    steps: number;
    rate: number;
    channels: string[];
    engine: string;
  };
}

export interface SimProgressPayload {
  done: number;
  total: number;
}

export interface SimFinishedPayload {
  stats: {
    steps: number;
    wall_s: number;
    steps_per_sec: number;
    peaks: Record<string, number>;
  };
  channels: string[];
}

// -- edit.apply op vocabulary -----------------------------------------------

/** id, picker/label designator string, or explicit id list. */
export type Targets = number | string | number[];

export type EditOp =
  | { op: "create"; kind: string; count?: number; pos?: [number, number] }
  | { op: "delete"; targets: Targets }
  | { op: "connect"; lia: number; a: number; b: number }
  | { op: "attach"; module: number; target: number }
  | { op: "disconnect"; targets: Targets }
  | { op: "set-param"; targets: Targets; name: string; value: number | [number, number][] }
  | { op: "set-initial"; targets: Targets; name: string; value: number }
  | { op: "move"; targets: Targets; x: number; y: number }
  | { op: "set-signal"; targets: Targets; name: string | null }
  | { op: "label-add"; module: number; text: string }
  | { op: "label-remove"; text: string }
  | { op: "note-add"; pos: [number, number]; html: string }
  | { op: "note-remove"; id: number }
  | { op: "sim-option"; name: string; value: unknown };
