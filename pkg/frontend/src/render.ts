/**
 * Presentation: turn a ViewState into terminal text and SVG.
 *
 * Drawing is read-only over the state; the polylines come from the joint
 * angles the service reported, never from local integration.
 */

import { clampAngles, fingerPolyline, Point } from "./kinematics.js";
import { ViewState } from "./state.js";
import { FingerState } from "./wire.js";

const BARS = "▁▂▃▄▅▆▇█";

/** One-row sparkline of the rolling signal buffer. */
export function signalTrace(state: ViewState, width: number = 60): string {
  const samples = state.signal;
  if (samples.length === 0) return "(no signal)".padEnd(width);
  let peak = 0;
  for (const s of samples) peak = Math.max(peak, Math.abs(s.v_mv));
  if (peak === 0) peak = 1;
  const per = Math.max(1, Math.ceil(samples.length / width));
  let out = "";
  for (let i = 0; i < samples.length; i += per) {
    let m = 0;
    for (let j = i; j < Math.min(i + per, samples.length); j++) {
      m = Math.max(m, Math.abs(samples[j].v_mv));
    }
    out += BARS[Math.min(BARS.length - 1, Math.floor((m / peak) * (BARS.length - 1)))];
  }
  return out.padEnd(width);
}

export interface FingerDrawing {
  finger: string;
  points: Point[];
  pressureKpa: number;
  tipForceN: number;
  clamped: boolean;
}

/** Polyline per finger from reported angles, joints clamped for drawing. */
export function gloveDrawing(state: ViewState, version: string = "V2"): FingerDrawing[] {
  if (state.glove === null) return [];
  return state.glove.fingers.map((f: FingerState) => {
    const { angles, clamped } = clampAngles(f.joint_angles_deg);
    return {
      finger: f.finger,
      points: fingerPolyline(version, angles),
      pressureKpa: f.pressure_kpa,
      tipForceN: f.tip_force_n,
      clamped: clamped || f.clamped,
    };
  });
}

/** Standalone SVG document of the glove, fingers stacked vertically. */
export function gloveSvg(state: ViewState, version: string = "V2"): string {
  const fingers = gloveDrawing(state, version);
  const rowH = 100;
  const w = 240;
  const h = Math.max(rowH, fingers.length * rowH);
  const rows = fingers.map((f, i) => {
    const oy = i * rowH + rowH / 2;
    const pts = f.points.map((p) => `${20 + p.x},${oy - p.y}`).join(" ");
    const stroke = f.clamped ? "#c0392b" : "#2c3e50";
    const label = `${f.finger} ${f.pressureKpa.toFixed(0)} kPa ${f.tipForceN.toFixed(2)} N`;
    return (
      `<polyline points="${pts}" fill="none" stroke="${stroke}" stroke-width="3" ` +
      `stroke-linecap="round" stroke-linejoin="round"/>` +
      `<text x="4" y="${i * rowH + 14}" font-size="10" fill="#555">${label}</text>`
    );
  });
  return (
    `<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 ${w} ${h}">` +
    rows.join("") +
    `</svg>`
  );
}

function tallyLine(state: ViewState): string {
  const t = state.tally;
  return `success ${t.success}  mismatch ${t.mismatch}  timeout ${t.timeout}`;
}

/** Full terminal frame. Pure text; the app just prints it. */
export function renderFrame(state: ViewState, version: string = "V2"): string {
  const lines: string[] = [];
  const status = state.serviceStatus ?? "-";
  lines.push(`[${state.connection}] session ${status}  role ${state.role}`);
  if (state.instruction !== null) {
    const ins = state.instruction;
    lines.push(`instruction: ${ins.instruction.toUpperCase()} (${ins.fingers.join(", ")})`);
  } else if (state.endReason !== null) {
    lines.push(`session ended: ${state.endReason}`);
  } else {
    lines.push("instruction: -");
  }
  lines.push(`signal  ${signalTrace(state)}`);
  if (state.classification !== null) {
    const c = state.classification;
    lines.push(
      `classified: ${c.label} (instructed ${c.instructed}, ${c.match ? "match" : "mismatch"})`,
    );
  } else {
    lines.push("classified: -");
  }
  for (const f of gloveDrawing(state, version)) {
    const tip = f.points[f.points.length - 1];
    const flag = f.clamped ? " CLAMPED" : "";
    lines.push(
      `  ${f.finger.padEnd(6)} ${f.pressureKpa.toFixed(1).padStart(6)} kPa  ` +
        `tip (${tip.x.toFixed(1)}, ${tip.y.toFixed(1)}) mm  ${f.tipForceN.toFixed(2)} N${flag}`,
    );
  }
  lines.push(`tally   ${tallyLine(state)}`);
  if (state.pendingAction !== null) lines.push(`awaiting ack: ${state.pendingAction}`);
  if (state.lastError !== null) {
    const d = state.lastError.detail ? ` (${state.lastError.detail})` : "";
    lines.push(`error: ${state.lastError.error}${d}`);
  }
  if (state.skipped > 0) lines.push(`skipped messages: ${state.skipped}`);
  return lines.join("\n");
}
