import { describe, expect, it } from "vitest";

import { gloveDrawing, gloveSvg, renderFrame, signalTrace } from "../src/render.js";
import { initialState, reduce, ViewState } from "../src/state.js";
import { WireMessage } from "../src/wire.js";

function withGlove(angles: number[], clamped = false): ViewState {
  const msg: WireMessage = {
    v: 1,
    t_s: 0,
    type: "glove_state",
    data: {
      fingers: [
        {
          finger: "middle",
          pressure_kpa: 150,
          phase: "holding",
          clamped,
          joint_angles_deg: angles,
          tip_force_n: 2.0,
          tip_position_mm: [0, 0],
        },
      ],
    },
  };
  return reduce(initialState(), { kind: "wire", msg });
}

describe("gloveDrawing", () => {
  it("is empty before any glove message", () => {
    expect(gloveDrawing(initialState())).toEqual([]);
  });

  it("clamps out-of-range reported angles and flags the finger", () => {
    const drawing = gloveDrawing(withGlove([60, 10]), "V2");
    expect(drawing[0].clamped).toBe(true);
    // drawn as if the joint were at the 45 degree limit
    const reference = gloveDrawing(withGlove([45, 10]), "V2");
    expect(drawing[0].points).toEqual(reference[0].points);
  });

  it("carries the service-side clamped flag through", () => {
    const drawing = gloveDrawing(withGlove([10, 10], true), "V2");
    expect(drawing[0].clamped).toBe(true);
  });
});

describe("gloveSvg", () => {
  it("emits one polyline per finger", () => {
    const svg = gloveSvg(withGlove([20, 20, 20]), "V2");
    expect(svg).toContain("<svg");
    expect((svg.match(/<polyline/g) ?? []).length).toBe(1);
    expect(svg).toContain("middle");
  });
});

describe("signalTrace", () => {
  it("shows a placeholder without samples", () => {
    expect(signalTrace(initialState()).trim()).toBe("(no signal)");
  });

  it("scales to the loudest sample", () => {
    let s = initialState();
    const msg: WireMessage = {
      v: 1, t_s: 0, type: "emg",
      data: { t0_s: 0, rate_hz: 10, v_mv: [0, 0.5, 1.0] },
    };
    s = reduce(s, { kind: "wire", msg });
    const trace = signalTrace(s, 3);
    expect(trace.length).toBe(3);
    expect(trace[2]).toBe("█");
  });
});

describe("renderFrame", () => {
  it("summarizes the whole view as text", () => {
    let s = withGlove([10, 10]);
    s = reduce(s, { kind: "connection", status: "connected" });
    const frame = renderFrame(s, "V2");
    expect(frame).toContain("[connected]");
    expect(frame).toContain("middle");
    expect(frame).toContain("tally");
    expect(frame).not.toContain("error:");
  });
});
