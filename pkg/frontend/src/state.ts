/**
 * ViewState and its reducer.
 *
 * The UI is a pure function of the message stream plus operator inputs:
 * every change flows through reduce(), which never mutates its input, so
 * replaying the same lines from the same initial state lands on an
 * identical final state. No physics and no classification happen here;
 * the view renders what the service said and nothing else.
 */

import {
  asEmg,
  asGloveState,
  ControlAction,
  emptyTally,
  GloveStateData,
  InstructionData,
  parseLine,
  SnapshotData,
  Tally,
  WireMessage,
} from "./wire.js";

/** Seconds of signal kept for the live trace. */
export const SIGNAL_WINDOW_S = 5.0;

export type ConnectionStatus = "connecting" | "connected" | "disconnected";

/** What we know about our control rights on this connection. */
export type OperatorRole = "unknown" | "operator" | "observer_only";

export interface SignalSample {
  t_s: number;
  v_mv: number;
}

export interface Classification {
  window_id: number;
  label: string;
  instructed: string;
  match: boolean;
  neighbors: [number, number][];
}

export interface ViewState {
  connection: ConnectionStatus;
  serviceStatus: string | null;
  instruction: InstructionData | null;
  signal: SignalSample[];
  classification: Classification | null;
  glove: GloveStateData | null;
  tally: Tally;
  endReason: string | null;
  protocol: unknown;
  role: OperatorRole;
  pendingAction: ControlAction | null;
  lastError: { error: string; detail?: string } | null;
  skipped: number;
}

export type UiEvent =
  | { kind: "wire"; msg: WireMessage }
  | { kind: "connection"; status: ConnectionStatus }
  | { kind: "control_sent"; action: ControlAction }
  | { kind: "skip" };

export function initialState(): ViewState {
  return {
    connection: "disconnected",
    serviceStatus: null,
    instruction: null,
    signal: [],
    classification: null,
    glove: null,
    tally: emptyTally(),
    endReason: null,
    protocol: null,
    role: "unknown",
    pendingAction: null,
    lastError: null,
    skipped: 0,
  };
}

function skip(state: ViewState): ViewState {
  return { ...state, skipped: state.skipped + 1 };
}

function appendSignal(buf: SignalSample[], t0: number, rate: number, values: number[]): SignalSample[] {
  const out = buf.slice();
  for (let i = 0; i < values.length; i++) {
    out.push({ t_s: t0 + i / rate, v_mv: values[i] });
  }
  const newest = out.length > 0 ? out[out.length - 1].t_s : 0;
  const cutoff = newest - SIGNAL_WINDOW_S;
  let start = 0;
  while (start < out.length && out[start].t_s < cutoff) start++;
  return start > 0 ? out.slice(start) : out;
}

function applySnapshot(state: ViewState, data: Record<string, unknown>): ViewState {
  const snap = data as unknown as SnapshotData;
  if (typeof snap.status !== "string" || typeof snap.tally !== "object" || snap.tally === null) {
    return skip(state);
  }
  const glove =
    snap.glove && typeof snap.glove === "object"
      ? asGloveState(snap.glove as unknown as Record<string, unknown>)
      : null;
  return {
    ...state,
    serviceStatus: snap.status,
    protocol: snap.protocol ?? null,
    instruction: snap.instruction ?? null,
    tally: { ...emptyTally(), ...snap.tally },
    glove,
    endReason: snap.end_reason ?? null,
  };
}

function applyWire(state: ViewState, msg: WireMessage): ViewState {
  const data = msg.data;
  switch (msg.type) {
    case "snapshot":
      return applySnapshot(state, data);

    case "instruction_shown": {
      if (typeof data.instruction !== "string" || !Array.isArray(data.fingers)) {
        return skip(state);
      }
      return { ...state, instruction: data as unknown as InstructionData };
    }

    case "window_detected":
      // Burst envelope bookkeeping; the classification that follows is
      // what the view actually shows.
      return state;

    case "classified": {
      if (typeof data.label !== "string" || !Array.isArray(data.neighbors)) {
        return skip(state);
      }
      const c: Classification = {
        window_id: Number(data.window_id),
        label: data.label,
        instructed: String(data.instructed),
        match: Boolean(data.match),
        neighbors: data.neighbors as [number, number][],
      };
      return { ...state, classification: c };
    }

    case "command_issued":
      // Pressure targets; the resulting motion arrives as glove_state.
      return state;

    case "glove_state": {
      const glove = asGloveState(data);
      if (glove === null) return skip(state);
      return { ...state, glove };
    }

    case "step_result": {
      const outcome = data.outcome;
      if (typeof outcome !== "string" || !(outcome in state.tally)) return skip(state);
      const tally = { ...state.tally };
      tally[outcome as keyof Tally] += 1;
      return { ...state, tally };
    }

    case "session_end": {
      const reason = typeof data.reason === "string" ? data.reason : "unknown";
      return { ...state, serviceStatus: "ended", endReason: reason, instruction: null };
    }

    case "emg": {
      const emg = asEmg(data);
      if (emg === null) return skip(state);
      return { ...state, signal: appendSignal(state.signal, emg.t0_s, emg.rate_hz, emg.v_mv) };
    }

    case "ack": {
      const action = typeof data.action === "string" ? data.action : null;
      const status = typeof data.status === "string" ? data.status : state.serviceStatus;
      return {
        ...state,
        role: "operator",
        serviceStatus: status,
        pendingAction: state.pendingAction === action ? null : state.pendingAction,
        lastError: null,
      };
    }

    case "error": {
      const error = typeof data.error === "string" ? data.error : "unknown error";
      const detail = typeof data.detail === "string" ? data.detail : undefined;
      return {
        ...state,
        pendingAction: null,
        lastError: detail === undefined ? { error } : { error, detail },
        role: error === "operator_conflict" ? "observer_only" : state.role,
      };
    }

    default:
      // Forward compatibility: unknown kinds are skipped, the view stays live.
      return skip(state);
  }
}

export function reduce(state: ViewState, event: UiEvent): ViewState {
  switch (event.kind) {
    case "wire":
      return applyWire(state, event.msg);
    case "connection": {
      const next: ViewState = { ...state, connection: event.status };
      if (event.status !== "connected") next.pendingAction = null;
      return next;
    }
    case "control_sent":
      return { ...state, pendingAction: event.action, lastError: null };
    case "skip":
      return skip(state);
  }
}

/** Feed one raw line through the reducer; malformed lines count as skipped. */
export function reduceLine(state: ViewState, line: string): ViewState {
  if (line.trim().length === 0) return state;
  const msg = parseLine(line);
  if (msg === null) return skip(state);
  return reduce(state, { kind: "wire", msg });
}

/** Fold a whole recorded stream, e.g. a replay capture. */
export function reduceStream(state: ViewState, lines: Iterable<string>): ViewState {
  let s = state;
  for (const line of lines) s = reduceLine(s, line);
  return s;
}
