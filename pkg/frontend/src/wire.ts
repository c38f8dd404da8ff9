/**
 * Wire protocol: newline-delimited JSON over a stream transport.
 *
 * Every server message carries {v, t_s, type, data}. Client messages are
 * control actions. Parsing is defensive throughout: anything that does not
 * match the envelope comes back as null and the caller skips it.
 */

export const WIRE_VERSION = 1;

export const CONTROL_ACTIONS = ["start", "pause", "abort", "select_protocol"] as const;
export type ControlAction = (typeof CONTROL_ACTIONS)[number];

export interface Tally {
  success: number;
  mismatch: number;
  timeout: number;
}

export interface FingerState {
  finger: string;
  pressure_kpa: number;
  phase: string;
  clamped: boolean;
  joint_angles_deg: number[];
  tip_force_n: number;
  tip_position_mm: [number, number];
}

export interface SnapshotData {
  status: string;
  protocol: unknown;
  instruction: InstructionData | null;
  step_index: number | null;
  tally: Tally;
  glove: GloveStateData | null;
  end_reason: string | null;
}

export interface InstructionData {
  step_index: number;
  repetition: number;
  instruction: string;
  fingers: string[];
  timeout_s: number;
}

export interface ClassifiedData {
  window_id: number;
  label: string;
  instructed: string;
  match: boolean;
  features: Record<string, number>;
  neighbors: [number, number][];
}

export interface GloveStateData {
  fingers: FingerState[];
}

export interface StepResultData {
  step_index: number;
  instruction: string;
  fingers: string[];
  outcome: keyof Tally | string;
  window_id: number | null;
}

export interface SessionEndData {
  reason: string;
  steps_total?: number;
  steps_run?: number;
  tally?: Tally;
}

export interface EmgData {
  t0_s: number;
  rate_hz: number;
  v_mv: number[];
}

export interface AckData {
  action: ControlAction;
  status: string;
}

export interface ErrorData {
  error: string;
  detail?: string;
}

export interface WireMessage {
  v: number;
  t_s: number;
  type: string;
  data: Record<string, unknown>;
}

/** Parse one line; null for anything that is not a valid envelope. */
export function parseLine(line: string): WireMessage | null {
  let raw: unknown;
  try {
    raw = JSON.parse(line);
  } catch {
    return null;
  }
  if (typeof raw !== "object" || raw === null || Array.isArray(raw)) return null;
  const msg = raw as Record<string, unknown>;
  if (msg.v !== WIRE_VERSION) return null;
  if (typeof msg.t_s !== "number" || !Number.isFinite(msg.t_s)) return null;
  if (typeof msg.type !== "string" || msg.type.length === 0) return null;
  if (typeof msg.data !== "object" || msg.data === null || Array.isArray(msg.data)) return null;
  return msg as unknown as WireMessage;
}

/** Serialize a control message, newline included. */
export function controlLine(action: ControlAction, protocol?: unknown): string {
  const msg: Record<string, unknown> = { v: WIRE_VERSION, type: "control", action };
  if (protocol !== undefined) msg.protocol = protocol;
  return JSON.stringify(msg) + "\n";
}

export function emptyTally(): Tally {
  return { success: 0, mismatch: 0, timeout: 0 };
}

function isFiniteNumber(x: unknown): x is number {
  return typeof x === "number" && Number.isFinite(x);
}

/** Narrow a glove_state payload; null when the shape is off. */
export function asGloveState(data: Record<string, unknown>): GloveStateData | null {
  const fingers = data.fingers;
  if (!Array.isArray(fingers)) return null;
  for (const f of fingers) {
    if (typeof f !== "object" || f === null) return null;
    const fs = f as Record<string, unknown>;
    if (typeof fs.finger !== "string") return null;
    if (!isFiniteNumber(fs.pressure_kpa)) return null;
    if (!Array.isArray(fs.joint_angles_deg) || !fs.joint_angles_deg.every(isFiniteNumber)) {
      return null;
    }
  }
  return data as unknown as GloveStateData;
}

/** Narrow an emg payload; null when the shape is off. */
export function asEmg(data: Record<string, unknown>): EmgData | null {
  if (!isFiniteNumber(data.t0_s) || !isFiniteNumber(data.rate_hz) || data.rate_hz <= 0) {
    return null;
  }
  if (!Array.isArray(data.v_mv) || !data.v_mv.every(isFiniteNumber)) return null;
  return data as unknown as EmgData;
}
