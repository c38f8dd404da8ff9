"""Forward model of the two hybrid actuator versions.

Pressure in, tip force and planar bending out. Force follows a monotone
piecewise-linear interpolation through calibration anchors; bending uses a
constant-curvature assumption (one shared joint angle, capped by the shell
geometry) over a serial chain of rigid 8 mm links. V1 curls clockwise
(toward -y), V2 anticlockwise (toward +y).
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

from .errors import CalibrationError, PressureRangeError, ValidationError

log = logging.getLogger(__name__)

V1 = "V1"
V2 = "V2"
VERSIONS = (V1, V2)

DEFAULT_SEGMENT_LENGTH_MM = 8.0
DEFAULT_JOINT_LIMIT_DEG = 45.0

MAX_PRESSURE_KPA = {V1: 230.0, V2: 190.0}

# Characterized prototype ranges; outside them the model extrapolates.
SEGMENT_RANGE = {V1: (2, 10), V2: (7, 12)}

# Measured prose anchors; the final point of each table extends the last
# measured slope up to the version's max pressure and is therefore an
# estimate, flagged as such in serialized configs.
DEFAULT_FORCE_ANCHORS = {
    V1: ((0.0, 0.0), (210.0, 2.5), (230.0, 2.7)),
    V2: ((0.0, 0.0), (180.0, 3.5), (190.0, 3.7)),
}

# Saturation (45 deg per joint) at max characterized pressure.
DEFAULT_BEND_GAIN = {
    V1: DEFAULT_JOINT_LIMIT_DEG / MAX_PRESSURE_KPA[V1],
    V2: DEFAULT_JOINT_LIMIT_DEG / MAX_PRESSURE_KPA[V2],
}

# Bending direction: sign of the joint angles in the plane, +y = V2 side.
BEND_SIGN = {V1: -1.0, V2: 1.0}


def _normalize_version(version: str) -> str:
    v = str(version).upper()
    if v not in VERSIONS:
        raise ValidationError(f"unknown actuator version {version!r}")
    return v


def _check_anchors(anchors) -> tuple[tuple[float, float], ...]:
    table = tuple((float(p), float(f)) for p, f in anchors)
    if len(table) < 2:
        raise CalibrationError("anchor table needs at least 2 points")
    if table[0] != (0.0, 0.0):
        raise CalibrationError("anchor table must start at (0, 0)")
    pressures = [p for p, _ in table]
    forces = [f for _, f in table]
    if any(b <= a for a, b in zip(pressures, pressures[1:])):
        raise CalibrationError("anchor pressures must be strictly increasing")
    if any(b < a for a, b in zip(forces, forces[1:])):
        raise CalibrationError("anchor forces must be non-decreasing")
    return table


@dataclass(frozen=True)
class ActuatorSpec:
    """Geometry plus calibration of one actuator build."""

    version: str
    n_segments: int
    segment_length_mm: float = DEFAULT_SEGMENT_LENGTH_MM
    joint_limit_deg: float = DEFAULT_JOINT_LIMIT_DEG
    max_pressure_kpa: float = 0.0  # 0 means: use the version default
    force_anchors: tuple[tuple[float, float], ...] = ()
    bend_gain_deg_per_kpa: float = 0.0  # 0 means: use the version default
    anchors_estimated: bool = True

    def __post_init__(self):
        version = _normalize_version(self.version)
        object.__setattr__(self, "version", version)
        if self.n_segments < 2:
            raise ValidationError("n_segments must be >= 2")
        if not (self.segment_length_mm > 0):
            raise ValidationError("segment_length_mm must be positive")
        if not (0 < self.joint_limit_deg <= 90):
            raise ValidationError("joint_limit_deg must lie in (0, 90]")
        if self.max_pressure_kpa == 0.0:
            object.__setattr__(self, "max_pressure_kpa", MAX_PRESSURE_KPA[version])
        if self.max_pressure_kpa <= 0:
            raise ValidationError("max_pressure_kpa must be positive")
        if not self.force_anchors:
            object.__setattr__(self, "force_anchors", DEFAULT_FORCE_ANCHORS[version])
        object.__setattr__(self, "force_anchors", _check_anchors(self.force_anchors))
        if self.bend_gain_deg_per_kpa == 0.0:
            object.__setattr__(self, "bend_gain_deg_per_kpa", DEFAULT_BEND_GAIN[version])
        if self.bend_gain_deg_per_kpa <= 0:
            raise ValidationError("bend_gain_deg_per_kpa must be positive")
        if not self.segments_characterized:
            lo, hi = SEGMENT_RANGE[version]
            log.warning(
                "%s with %d segments is outside the characterized range [%d, %d]; "
                "model output is an extrapolation",
                version, self.n_segments, lo, hi,
            )

    @property
    def segments_characterized(self) -> bool:
        lo, hi = SEGMENT_RANGE[self.version]
        return lo <= self.n_segments <= hi

    def to_dict(self) -> dict:
        return {
            "version": self.version,
            "n_segments": self.n_segments,
            "segment_length_mm": self.segment_length_mm,
            "joint_limit_deg": self.joint_limit_deg,
            "max_pressure_kpa": self.max_pressure_kpa,
            "force_anchors": [list(a) for a in self.force_anchors],
            "bend_gain_deg_per_kpa": self.bend_gain_deg_per_kpa,
            "anchors_estimated": self.anchors_estimated,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ActuatorSpec":
        try:
            return cls(
                version=d["version"],
                n_segments=int(d["n_segments"]),
                segment_length_mm=float(d["segment_length_mm"]),
                joint_limit_deg=float(d["joint_limit_deg"]),
                max_pressure_kpa=float(d["max_pressure_kpa"]),
                force_anchors=tuple(tuple(a) for a in d["force_anchors"]),
                bend_gain_deg_per_kpa=float(d["bend_gain_deg_per_kpa"]),
                anchors_estimated=bool(d["anchors_estimated"]),
            )
        except KeyError as exc:
            raise ValidationError(f"actuator config missing key {exc}") from None


def default_spec(version: str, n_segments: int) -> ActuatorSpec:
    """Spec with the version's default calibration and geometry."""
    return ActuatorSpec(version=_normalize_version(version), n_segments=n_segments)


@dataclass(frozen=True)
class ActuatorState:
    """Snapshot of one actuator at a given pressure."""

    pressure_kpa: float
    joint_angles_deg: tuple[float, ...]
    tip_force_n: float
    tip_position_mm: tuple[float, float]

    def to_dict(self) -> dict:
        return {
            "pressure_kpa": self.pressure_kpa,
            "joint_angles_deg": list(self.joint_angles_deg),
            "tip_force_n": self.tip_force_n,
            "tip_position_mm": list(self.tip_position_mm),
        }


def _check_pressure(spec: ActuatorSpec, pressure_kpa: float) -> float:
    p = float(pressure_kpa)
    if math.isnan(p) or p < 0 or p > spec.max_pressure_kpa:
        raise PressureRangeError(
            f"pressure {pressure_kpa!r} kPa outside characterized range "
            f"[0, {spec.max_pressure_kpa}] of {spec.version}"
        )
    return p


def tip_force(spec: ActuatorSpec, pressure_kpa: float) -> float:
    """Piecewise-linear tip force through the anchor table, in newtons.

    Segment count does not enter: measured forces varied only weakly with
    it, so the model treats force as a per-version property.
    """
    p = _check_pressure(spec, pressure_kpa)
    xp = [a for a, _ in spec.force_anchors]
    fp = [f for _, f in spec.force_anchors]
    return float(np.interp(p, xp, fp))


def bend_angles(spec: ActuatorSpec, pressure_kpa: float) -> list[float]:
    """Per-joint bend angles in degrees (uniform under constant curvature)."""
    p = _check_pressure(spec, pressure_kpa)
    theta = min(spec.joint_limit_deg, spec.bend_gain_deg_per_kpa * p)
    return [theta] * spec.n_segments


def trajectory_from_angles(
    spec: ActuatorSpec, joint_angles_deg: list[float] | tuple[float, ...]
) -> np.ndarray:
    """Planar chain positions for explicit joint angles: (n+1, 2) array in mm.

    Link i points along the running sum of the first i joint angles, with
    the version's bending sign applied; the proximal end is the origin.
    """
    if len(joint_angles_deg) != spec.n_segments:
        raise ValidationError(
            f"expected {spec.n_segments} joint angles, got {len(joint_angles_deg)}"
        )
    sign = BEND_SIGN[spec.version]
    phi = np.cumsum(np.radians(sign * np.asarray(joint_angles_deg, dtype=np.float64)))
    steps = spec.segment_length_mm * np.stack([np.cos(phi), np.sin(phi)], axis=1)
    points = np.vstack([np.zeros((1, 2)), np.cumsum(steps, axis=0)])
    return points


def trajectory(spec: ActuatorSpec, pressure_kpa: float) -> np.ndarray:
    """Forward kinematics at a pressure: (n_segments + 1) points in mm."""
    return trajectory_from_angles(spec, bend_angles(spec, pressure_kpa))


def state_at(spec: ActuatorSpec, pressure_kpa: float) -> ActuatorState:
    """Full actuator state (angles, tip force, tip position) at a pressure."""
    angles = bend_angles(spec, pressure_kpa)
    points = trajectory_from_angles(spec, angles)
    return ActuatorState(
        pressure_kpa=float(pressure_kpa),
        joint_angles_deg=tuple(angles),
        tip_force_n=tip_force(spec, pressure_kpa),
        tip_position_mm=(float(points[-1, 0]), float(points[-1, 1])),
    )


def calibrate(
    version: str,
    anchors,
    n_segments: int | None = None,
    segment_length_mm: float = DEFAULT_SEGMENT_LENGTH_MM,
    joint_limit_deg: float = DEFAULT_JOINT_LIMIT_DEG,
) -> ActuatorSpec:
    """Build a spec from a measured anchor table.

    The table must start at (0, 0) with strictly increasing pressures and
    non-decreasing forces (the model class is monotone); violations raise
    CalibrationError. The calibrated spec's max pressure is the last anchor
    pressure, so interpolation never extrapolates, and the bend gain is
    rescaled to saturate there.
    """
    v = _normalize_version(version)
    table = _check_anchors(anchors)
    if n_segments is None:
        n_segments = SEGMENT_RANGE[v][1]
    max_p = table[-1][0]
    return ActuatorSpec(
        version=v,
        n_segments=n_segments,
        segment_length_mm=segment_length_mm,
        joint_limit_deg=joint_limit_deg,
        max_pressure_kpa=max_p,
        force_anchors=table,
        bend_gain_deg_per_kpa=joint_limit_deg / max_p,
        anchors_estimated=False,
    )
