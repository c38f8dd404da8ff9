import { readFileSync } from "node:fs";

import { describe, expect, it } from "vitest";

import {
  BEND_SIGN,
  chainPoints,
  clampAngles,
  fingerPolyline,
  polylineLength,
  totalSweepDeg,
} from "../src/kinematics.js";

interface ChainCase {
  version: string;
  n_segments: number;
  segment_length_mm: number;
  angles_deg: number[];
  points_mm: [number, number][];
}

const CASES: ChainCase[] = JSON.parse(
  readFileSync(new URL("./fixtures/chains.json", import.meta.url), "utf-8"),
);

describe("chainPoints", () => {
  it("matches the service trajectory fixtures vertex for vertex", () => {
    expect(CASES.length).toBeGreaterThan(20);
    for (const c of CASES) {
      const pts = chainPoints(c.angles_deg, BEND_SIGN[c.version], c.segment_length_mm);
      expect(pts.length).toBe(c.points_mm.length);
      for (let i = 0; i < pts.length; i++) {
        expect(Math.abs(pts[i].x - c.points_mm[i][0])).toBeLessThan(1e-6);
        expect(Math.abs(pts[i].y - c.points_mm[i][1])).toBeLessThan(1e-6);
      }
    }
  });

  it("draws straight fingers at zero angles", () => {
    const pts = chainPoints(new Array(10).fill(0), 1.0);
    expect(pts.length).toBe(11);
    pts.forEach((p, i) => {
      expect(p.x).toBe(i * 8.0);
      expect(p.y).toBe(0);
    });
  });

  it("preserves total length whatever the angles", () => {
    // rigid links: bending reshapes the chain, never stretches it
    let seed = 12345;
    const rand = () => (seed = (seed * 1103515245 + 12345) % 2147483648) / 2147483648;
    for (let trial = 0; trial < 50; trial++) {
      const n = 2 + Math.floor(rand() * 11);
      const angles = Array.from({ length: n }, () => rand() * 45);
      const sign = rand() < 0.5 ? -1.0 : 1.0;
      const pts = chainPoints(angles, sign);
      expect(polylineLength(pts)).toBeCloseTo(n * 8.0, 8);
    }
  });

  it("closes the loop at eight saturated joints", () => {
    const pts = chainPoints(new Array(8).fill(45), 1.0);
    const tip = pts[pts.length - 1];
    expect(Math.hypot(tip.x, tip.y)).toBeLessThan(1e-9);
  });

  it("mirrors between bending signs", () => {
    const angles = [5, 10, 15, 20];
    const plus = chainPoints(angles, 1.0);
    const minus = chainPoints(angles, -1.0);
    for (let i = 0; i < plus.length; i++) {
      expect(minus[i].x).toBeCloseTo(plus[i].x, 12);
      expect(minus[i].y).toBeCloseTo(-plus[i].y, 12);
    }
  });
});

describe("fingerPolyline", () => {
  it("applies the version bending sign", () => {
    const v1 = fingerPolyline("V1", [30, 30]);
    const v2 = fingerPolyline("V2", [30, 30]);
    expect(v1[2].y).toBeLessThan(0);
    expect(v2[2].y).toBeGreaterThan(0);
  });

  it("rejects unknown versions", () => {
    expect(() => fingerPolyline("V9", [10])).toThrow(/unknown actuator version/);
  });
});

describe("clampAngles", () => {
  it("leaves in-range angles untouched", () => {
    const { angles, clamped } = clampAngles([0, 22.5, 45]);
    expect(angles).toEqual([0, 22.5, 45]);
    expect(clamped).toBe(false);
  });

  it("clamps out-of-range angles and flags it", () => {
    const { angles, clamped } = clampAngles([-5, 50, 20]);
    expect(angles).toEqual([0, 45, 20]);
    expect(clamped).toBe(true);
  });
});

describe("totalSweepDeg", () => {
  it("gives fewer-jointed fingers a smaller sweep at equal per-joint angle", () => {
    const pinky = totalSweepDeg(new Array(7).fill(30));
    const middle = totalSweepDeg(new Array(10).fill(30));
    expect(pinky).toBeLessThan(middle);
  });
});
