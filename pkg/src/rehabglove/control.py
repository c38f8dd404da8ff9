"""Rate-limited pneumatic controller for the four-finger glove.

Pure state machine: channels are immutable values, one step() per tick
moves each channel's pressure toward its target by at most the per-tick
increment, and intents only ever set targets. The 250 kPa supply ceiling
bounds every target, so no reachable state can exceed it. The thumb is
not actuated on this glove build.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

from .actuator import ActuatorSpec, V1, V2, default_spec, state_at
from .errors import ValidationError
from .signal import GRASP, RELEASE

FINGERS = ("index", "middle", "ring", "pinky")
FINGER_SEGMENTS = {"index": 9, "middle": 10, "ring": 9, "pinky": 7}

SAFETY_CEILING_KPA = 250.0

IDLE = "idle"
PRESSURIZING = "pressurizing"
HOLDING = "holding"
VENTING = "venting"
PHASES = (IDLE, PRESSURIZING, HOLDING, VENTING)

DEFAULT_DT_S = 0.05
RATE_LIMIT_KPA = {V1: 20.0, V2: 5.0}


@dataclass(frozen=True)
class ControlTick:
    dt_s: float = DEFAULT_DT_S
    max_step_kpa: float = RATE_LIMIT_KPA[V2]

    def __post_init__(self):
        if not (self.dt_s > 0):
            raise ValidationError("dt_s must be positive")
        if not (self.max_step_kpa > 0):
            raise ValidationError("max_step_kpa must be positive")


def default_tick(version: str = V2, dt_s: float = DEFAULT_DT_S) -> ControlTick:
    v = version.upper()
    if v not in RATE_LIMIT_KPA:
        raise ValidationError(f"unknown actuator version {version!r}")
    return ControlTick(dt_s=dt_s, max_step_kpa=RATE_LIMIT_KPA[v])


def _phase_for(current: float, target: float) -> str:
    if current < target:
        return PRESSURIZING
    if current > target:
        return VENTING
    return HOLDING if target > 0 else IDLE


@dataclass(frozen=True)
class FingerChannel:
    finger: str
    spec: ActuatorSpec
    current_pressure_kpa: float = 0.0
    target_pressure_kpa: float = 0.0
    phase: str = IDLE

    def __post_init__(self):
        if self.finger not in FINGERS:
            raise ValidationError(f"unknown finger {self.finger!r}")
        for name, value in (
            ("current_pressure_kpa", self.current_pressure_kpa),
            ("target_pressure_kpa", self.target_pressure_kpa),
        ):
            if not (0 <= value <= SAFETY_CEILING_KPA):
                raise ValidationError(
                    f"{name}={value!r} outside [0, {SAFETY_CEILING_KPA}] kPa"
                )
        if self.phase not in PHASES:
            raise ValidationError(f"unknown phase {self.phase!r}")


def default_glove(version: str = V2) -> dict[str, FingerChannel]:
    """Idle four-channel glove with the build's per-finger segment counts."""
    return {
        finger: FingerChannel(finger=finger, spec=default_spec(version, FINGER_SEGMENTS[finger]))
        for finger in FINGERS
    }


def command_from_intent(
    channels: dict[str, FingerChannel], intent: str, fingers
) -> dict[str, float]:
    """Target pressures realizing an intent on the given fingers.

    grasp drives each targeted finger to its spec max, bounded by the
    supply ceiling; release vents to 0. Untargeted fingers keep their
    current targets.
    """
    if intent not in (GRASP, RELEASE):
        raise ValidationError(f"intent must be grasp or release, got {intent!r}")
    targeted = tuple(fingers)
    if not targeted:
        raise ValidationError("target finger set must be non-empty")
    unknown = [f for f in targeted if f not in channels]
    if unknown:
        raise ValidationError(f"unknown fingers {unknown} for this glove")
    targets = {name: ch.target_pressure_kpa for name, ch in channels.items()}
    for name in targeted:
        if intent == GRASP:
            targets[name] = min(channels[name].spec.max_pressure_kpa, SAFETY_CEILING_KPA)
        else:
            targets[name] = 0.0
    return targets


def apply_targets(
    channels: dict[str, FingerChannel], targets: dict[str, float]
) -> dict[str, FingerChannel]:
    """Set new targets, updating phases; pressures move only in step()."""
    out = {}
    for name, ch in channels.items():
        target = targets.get(name, ch.target_pressure_kpa)
        out[name] = replace(
            ch,
            target_pressure_kpa=target,
            phase=_phase_for(ch.current_pressure_kpa, target),
        )
    return out


def step(channel: FingerChannel, tick: ControlTick) -> FingerChannel:
    """Advance one tick: move at most max_step_kpa toward the target.

    Within one increment of the target the pressure snaps exactly onto it,
    so a constant target is reached in exactly ceil(gap / max_step) ticks
    and is then a fixed point.
    """
    gap = channel.target_pressure_kpa - channel.current_pressure_kpa
    if abs(gap) <= tick.max_step_kpa:
        new = channel.target_pressure_kpa
    elif gap > 0:
        new = channel.current_pressure_kpa + tick.max_step_kpa
    else:
        new = channel.current_pressure_kpa - tick.max_step_kpa
    return replace(
        channel,
        current_pressure_kpa=new,
        phase=_phase_for(new, channel.target_pressure_kpa),
    )


def step_all(
    channels: dict[str, FingerChannel], tick: ControlTick
) -> dict[str, FingerChannel]:
    return {name: step(ch, tick) for name, ch in channels.items()}


def settled(channels: dict[str, FingerChannel]) -> bool:
    return all(
        ch.current_pressure_kpa == ch.target_pressure_kpa for ch in channels.values()
    )


@dataclass(frozen=True)
class FingerState:
    """One finger's snapshot: control state joined with the actuator model."""

    finger: str
    pressure_kpa: float
    phase: str
    clamped: bool
    joint_angles_deg: tuple[float, ...]
    tip_force_n: float
    tip_position_mm: tuple[float, float]

    def to_dict(self) -> dict:
        return {
            "finger": self.finger,
            "pressure_kpa": self.pressure_kpa,
            "phase": self.phase,
            "clamped": self.clamped,
            "joint_angles_deg": list(self.joint_angles_deg),
            "tip_force_n": self.tip_force_n,
            "tip_position_mm": list(self.tip_position_mm),
        }


@dataclass(frozen=True)
class GloveState:
    fingers: tuple[FingerState, ...]

    def to_dict(self) -> dict:
        return {"fingers": [f.to_dict() for f in self.fingers]}


def glove_snapshot(channels: dict[str, FingerChannel]) -> GloveState:
    """Pure projection of channels through the actuator forward model.

    The supply ceiling (250) can sit above a version's characterized max
    (V2: 190); such pressures are evaluated at the characterized max and
    flagged clamped rather than extrapolated.
    """
    states = []
    for name, ch in channels.items():
        p = ch.current_pressure_kpa
        clamped = p > ch.spec.max_pressure_kpa
        model = state_at(ch.spec, min(p, ch.spec.max_pressure_kpa))
        states.append(
            FingerState(
                finger=name,
                pressure_kpa=p,
                phase=ch.phase,
                clamped=clamped,
                joint_angles_deg=model.joint_angles_deg,
                tip_force_n=model.tip_force_n,
                tip_position_mm=model.tip_position_mm,
            )
        )
    return GloveState(fingers=tuple(states))


def glove_config_to_dict(
    channels: dict[str, FingerChannel], tick: ControlTick
) -> dict:
    return {
        "dt_s": tick.dt_s,
        "max_step_kpa": dict(RATE_LIMIT_KPA),
        "tick_max_step_kpa": tick.max_step_kpa,
        "ceiling_kpa": SAFETY_CEILING_KPA,
        "fingers": {name: ch.spec.to_dict() for name, ch in channels.items()},
    }


def glove_from_config(d: dict) -> tuple[dict[str, FingerChannel], ControlTick]:
    try:
        channels = {
            name: FingerChannel(finger=name, spec=ActuatorSpec.from_dict(spec))
            for name, spec in d["fingers"].items()
        }
        tick = ControlTick(dt_s=float(d["dt_s"]), max_step_kpa=float(d["tick_max_step_kpa"]))
    except KeyError as exc:
        raise ValidationError(f"glove config missing key {exc}") from None
    return channels, tick
