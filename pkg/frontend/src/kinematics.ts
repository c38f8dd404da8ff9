/**
 * Planar serial-chain geometry for drawing fingers.
 *
 * Each finger is n equal rigid links; link i points along the running sum of
 * the first i joint angles (bending sign applied), proximal end at the
 * origin. This mirrors the service's own actuator geometry so rendered
 * vertices line up with what the pipeline reports; the UI never invents
 * angles of its own.
 */

export interface Point {
  x: number;
  y: number;
}

export const JOINT_LIMIT_DEG = 45.0;
export const DEFAULT_LINK_LENGTH_MM = 8.0;

// Actuator versions curl in opposite directions in the sensor frame.
export const BEND_SIGN: Record<string, number> = { V1: -1.0, V2: 1.0 };

export interface ClampResult {
  angles: number[];
  clamped: boolean;
}

/** Limit every joint to [0, 45] degrees for drawing; flag when any moved. */
export function clampAngles(anglesDeg: readonly number[]): ClampResult {
  let clamped = false;
  const angles = anglesDeg.map((a) => {
    const safe = Math.min(JOINT_LIMIT_DEG, Math.max(0.0, a));
    if (safe !== a) clamped = true;
    return safe;
  });
  return { angles, clamped };
}

/**
 * Chain vertices for explicit joint angles, in mm.
 *
 * Returns n + 1 points starting at the origin. Summation runs left to
 * right, matching the serial structure of the chain.
 */
export function chainPoints(
  anglesDeg: readonly number[],
  sign: number,
  linkLengthMm: number = DEFAULT_LINK_LENGTH_MM,
): Point[] {
  const points: Point[] = [{ x: 0, y: 0 }];
  let phi = 0.0;
  let x = 0.0;
  let y = 0.0;
  for (const a of anglesDeg) {
    phi += (sign * a * Math.PI) / 180.0;
    x += linkLengthMm * Math.cos(phi);
    y += linkLengthMm * Math.sin(phi);
    points.push({ x, y });
  }
  return points;
}

/** Vertices for a version's finger given its reported joint angles. */
export function fingerPolyline(
  version: string,
  anglesDeg: readonly number[],
  linkLengthMm: number = DEFAULT_LINK_LENGTH_MM,
): Point[] {
  const sign = BEND_SIGN[version];
  if (sign === undefined) throw new Error(`unknown actuator version ${version}`);
  return chainPoints(anglesDeg, sign, linkLengthMm);
}

/** Total polyline length; equals links * length for any angles. */
export function polylineLength(points: readonly Point[]): number {
  let total = 0.0;
  for (let i = 1; i < points.length; i++) {
    total += Math.hypot(points[i].x - points[i - 1].x, points[i].y - points[i - 1].y);
  }
  return total;
}

/** Angle swept from base to tip, in degrees (unsigned). */
export function totalSweepDeg(anglesDeg: readonly number[]): number {
  let s = 0.0;
  for (const a of anglesDeg) s += a;
  return Math.abs(s);
}
