"""Rehabilitation session orchestration.

Wires the pipeline together: instruction sequencing, incremental burst
detection over the source stream, one classification per step, intent
gating (the glove only actuates when the classified gesture matches the
instruction), rate-limited control ticks, and an append-only event log.

Simulated time is tick arithmetic over the source timestamps, so a run is
fully deterministic; wall-clock pacing is an optional overlay for live
serving and never touches event timestamps.
"""

from __future__ import annotations

import json
import threading
import time
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path

from .classifier import KnnModel, model_sha256, predict
from .control import (
    ControlTick,
    FingerChannel,
    apply_targets,
    command_from_intent,
    default_tick,
    glove_config_to_dict,
    glove_snapshot,
    settled,
    step_all,
)
from .errors import ParseError, ValidationError
from .features import extract
from .signal import (
    GESTURE_LABELS,
    BurstDetector,
    SampleStream,
    SegmentationConfig,
    auto_segmentation_config,
)

EVENT_KINDS = (
    "instruction_shown",
    "window_detected",
    "classified",
    "command_issued",
    "glove_state",
    "step_result",
    "session_end",
)

STEP_SUCCESS = "success"
STEP_MISMATCH = "mismatch"
STEP_TIMEOUT = "timeout"

END_COMPLETED = "completed"
END_SOURCE_EXHAUSTED = "source_exhausted"
END_ABORTED = "aborted"

DEFAULT_STEP_TIMEOUT_S = 10.0
LOG_FORMAT = "rehabglove-session-log"
LOG_VERSION = 1

# Minimum spacing enforced between event timestamps so causally ordered
# events emitted at one simulated instant stay strictly ordered.
EVENT_T_RESOLUTION_S = 1e-6


@dataclass(frozen=True)
class ProtocolStep:
    instruction: str
    fingers: tuple[str, ...]
    timeout_s: float = DEFAULT_STEP_TIMEOUT_S

    def __post_init__(self):
        if self.instruction not in GESTURE_LABELS:
            raise ValidationError(f"instruction must be one of {GESTURE_LABELS}")
        object.__setattr__(self, "fingers", tuple(self.fingers))
        if not self.fingers:
            raise ValidationError("step finger set must be non-empty")
        if not (self.timeout_s > 0):
            raise ValidationError("timeout_s must be positive")

    def to_dict(self) -> dict:
        return {
            "instruction": self.instruction,
            "fingers": list(self.fingers),
            "timeout_s": self.timeout_s,
        }


@dataclass(frozen=True)
class Protocol:
    steps: tuple[ProtocolStep, ...]
    repetitions: int = 1

    def __post_init__(self):
        object.__setattr__(self, "steps", tuple(self.steps))
        if not self.steps:
            raise ValidationError("protocol needs at least one step")
        if self.repetitions < 1:
            raise ValidationError("repetitions must be >= 1")

    def expanded(self) -> list[ProtocolStep]:
        """Steps unrolled over repetitions, in execution order."""
        return list(self.steps) * self.repetitions

    def to_dict(self) -> dict:
        return {
            "steps": [s.to_dict() for s in self.steps],
            "repetitions": self.repetitions,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Protocol":
        try:
            steps = tuple(
                ProtocolStep(
                    instruction=s["instruction"],
                    fingers=tuple(s["fingers"]),
                    timeout_s=float(s.get("timeout_s", DEFAULT_STEP_TIMEOUT_S)),
                )
                for s in d["steps"]
            )
            reps = int(d.get("repetitions", 1))
        except (KeyError, TypeError) as exc:
            raise ValidationError(f"malformed protocol: {exc!r}") from None
        return cls(steps=steps, repetitions=reps)


def default_protocol(timeout_s: float = DEFAULT_STEP_TIMEOUT_S, repetitions: int = 3) -> Protocol:
    """Alternating grasp/release per finger, index through pinky."""
    steps = []
    for finger in ("index", "middle", "ring", "pinky"):
        steps.append(ProtocolStep(instruction="grasp", fingers=(finger,), timeout_s=timeout_s))
        steps.append(ProtocolStep(instruction="release", fingers=(finger,), timeout_s=timeout_s))
    return Protocol(steps=tuple(steps), repetitions=repetitions)


def load_protocol(path: str | Path) -> Protocol:
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: {exc}") from None
    return Protocol.from_dict(doc)


def save_protocol(protocol: Protocol, path: str | Path) -> None:
    Path(path).write_text(json.dumps(protocol.to_dict(), indent=2) + "\n", encoding="utf-8")


@dataclass(frozen=True)
class SessionEvent:
    t: float
    kind: str
    payload: dict

    def __post_init__(self):
        if self.kind not in EVENT_KINDS:
            raise ValidationError(f"unknown event kind {self.kind!r}")

    def to_dict(self) -> dict:
        return {"t": self.t, "kind": self.kind, "payload": self.payload}

    @classmethod
    def from_dict(cls, d: dict) -> "SessionEvent":
        return cls(t=float(d["t"]), kind=d["kind"], payload=d["payload"])


@dataclass
class SessionLog:
    header: dict
    events: list[SessionEvent]

    def tally(self) -> dict[str, int]:
        """Step outcomes aggregated from step_result events."""
        out = {STEP_SUCCESS: 0, STEP_MISMATCH: 0, STEP_TIMEOUT: 0}
        for ev in self.events:
            if ev.kind == "step_result":
                out[ev.payload["outcome"]] += 1
        return out


def save_log(log: SessionLog, path: str | Path) -> None:
    """NDJSON: header object on the first line, one event per line after."""
    lines = [json.dumps(log.header, separators=(",", ":"))]
    lines.extend(json.dumps(ev.to_dict(), separators=(",", ":")) for ev in log.events)
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def load_log(path: str | Path) -> SessionLog:
    text = Path(path).read_text(encoding="utf-8")
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise ParseError(f"{path}: empty log", line=1)
    try:
        header = json.loads(lines[0])
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: bad header: {exc}", line=1) from None
    if not isinstance(header, dict) or header.get("format") != LOG_FORMAT:
        raise ParseError(f"{path}: not a {LOG_FORMAT} file", line=1)
    events = []
    for lineno, raw in enumerate(lines[1:], start=2):
        try:
            events.append(SessionEvent.from_dict(json.loads(raw)))
        except (json.JSONDecodeError, KeyError, TypeError, ValidationError) as exc:
            raise ParseError(f"{path}: bad event {lineno - 1}: {exc}", line=lineno) from None
    return SessionLog(header=header, events=events)


class SessionControl:
    """Thread-safe pause/abort switch shared between a runner and a service."""

    def __init__(self):
        self._paused = threading.Event()
        self._abort = threading.Event()

    def pause(self) -> None:
        self._paused.set()

    def resume(self) -> None:
        self._paused.clear()

    def abort(self) -> None:
        self._abort.set()
        self._paused.clear()

    @property
    def paused(self) -> bool:
        return self._paused.is_set()

    @property
    def aborted(self) -> bool:
        return self._abort.is_set()

    def wait_while_paused(self, poll_s: float = 0.01) -> None:
        while self._paused.is_set() and not self._abort.is_set():
            time.sleep(poll_s)


class _EventSink:
    """Collects events, enforcing strictly increasing timestamps."""

    def __init__(self, on_event=None):
        self.events: list[SessionEvent] = []
        self._on_event = on_event
        self._last_t = -EVENT_T_RESOLUTION_S

    def emit(self, t: float, kind: str, payload: dict) -> SessionEvent:
        t = max(float(t), self._last_t + EVENT_T_RESOLUTION_S)
        self._last_t = t
        ev = SessionEvent(t=t, kind=kind, payload=payload)
        self.events.append(ev)
        if self._on_event is not None:
            self._on_event(ev)
        return ev


def run_session(
    protocol: Protocol,
    source: SampleStream,
    model: KnnModel,
    channels: dict[str, FingerChannel],
    *,
    tick: ControlTick | None = None,
    seg_cfg: SegmentationConfig | None = None,
    seed: int | None = None,
    on_event=None,
    on_frame=None,
    control: SessionControl | None = None,
    pace: bool = False,
    sleeper=time.sleep,
    extra_header: dict | None = None,
) -> SessionLog:
    """Execute a protocol against a source stream and return the full log.

    Per step: show the instruction, feed source samples tick by tick into
    the burst detector, classify the first window that closes, and either
    issue the matching command (success) or record the mismatch; steps
    with no window by their deadline time out. The first window wins:
    later windows within a step are logged, never classified. Source
    exhaustion flushes the detector, and if the current step cannot
    resolve the session ends with reason source_exhausted.

    With pace=True each tick also sleeps dt_s of wall time and `control`
    may pause or abort between ticks; event timestamps stay simulated
    either way, so logs are reproducible.
    """
    if tick is None:
        first = next(iter(channels.values()))
        tick = default_tick(first.spec.version)
    if seg_cfg is None:
        seg_cfg = auto_segmentation_config(source)

    header = {
        "format": LOG_FORMAT,
        "version": LOG_VERSION,
        "created_utc": datetime.now(timezone.utc).isoformat(),
        "seed": seed,
        "model_sha256": model_sha256(model),
        "protocol": protocol.to_dict(),
        "segmentation": {
            "onset_threshold_mv": seg_cfg.onset_threshold_mv,
            "offset_threshold_mv": seg_cfg.offset_threshold_mv,
            "min_duration_s": seg_cfg.min_duration_s,
            "hold_off_s": seg_cfg.hold_off_s,
        },
        "glove": glove_config_to_dict(channels, tick),
    }
    if extra_header:
        header.update(extra_header)

    sink = _EventSink(on_event)
    det = BurstDetector(seg_cfg)
    t_arr = source.t.tolist()
    v_arr = source.v.tolist()
    n_src = len(t_arr)
    cursor = 0
    flushed = n_src == 0
    dt = tick.dt_s
    k = 0  # tick counter; simulated time is k * dt
    window_count = 0
    steps = protocol.expanded()
    tally = {STEP_SUCCESS: 0, STEP_MISMATCH: 0, STEP_TIMEOUT: 0}
    steps_run = 0

    def emit_glove(t: float) -> None:
        sink.emit(t, "glove_state", glove_snapshot(channels).to_dict())

    def end(reason: str) -> SessionLog:
        sink.emit(
            k * dt,
            "session_end",
            {
                "reason": reason,
                "steps_total": len(steps),
                "steps_run": steps_run,
                "tally": dict(tally),
            },
        )
        return SessionLog(header=header, events=sink.events)

    emit_glove(0.0)

    for step_index, pstep in enumerate(steps):
        if control is not None and control.aborted:
            return end(END_ABORTED)
        if flushed and cursor >= n_src and not det.active:
            return end(END_SOURCE_EXHAUSTED)

        sink.emit(
            k * dt,
            "instruction_shown",
            {
                "step_index": step_index,
                "repetition": step_index // len(protocol.steps),
                "instruction": pstep.instruction,
                "fingers": list(pstep.fingers),
                "timeout_s": pstep.timeout_s,
            },
        )
        deadline = k * dt + pstep.timeout_s
        resolved: str | None = None
        used_window: int | None = None

        def handle_window(w, t_at: float) -> None:
            nonlocal window_count, resolved, used_window, channels
            window_count += 1
            wid = window_count
            sink.emit(
                t_at,
                "window_detected",
                {
                    "window_id": wid,
                    "t_start": float(w.t[0]),
                    "t_end": float(w.t[-1]),
                    "n_samples": len(w),
                    "peak_mv": w.peak_mv,
                },
            )
            if resolved is not None:
                return  # first window already decided this step
            fv = extract(w)
            label, neighbors = predict(model, fv)
            used_window = wid
            sink.emit(
                t_at,
                "classified",
                {
                    "window_id": wid,
                    "label": label,
                    "instructed": pstep.instruction,
                    "match": label == pstep.instruction,
                    "features": fv.to_dict(),
                    "neighbors": [[i, d] for i, d in neighbors],
                },
            )
            if label == pstep.instruction:
                targets = command_from_intent(channels, label, pstep.fingers)
                channels = apply_targets(channels, targets)
                sink.emit(
                    t_at,
                    "command_issued",
                    {
                        "intent": label,
                        "fingers": list(pstep.fingers),
                        "targets_kpa": targets,
                    },
                )
                resolved = STEP_SUCCESS
            else:
                resolved = STEP_MISMATCH

        while resolved is None and k * dt < deadline:
            if control is not None:
                if control.aborted:
                    return end(END_ABORTED)
                if pace:
                    control.wait_while_paused()
            tick_end = (k + 1) * dt
            frame: list[tuple[float, float]] = []
            while cursor < n_src and t_arr[cursor] < tick_end:
                ts, vs = t_arr[cursor], v_arr[cursor]
                cursor += 1
                if on_frame is not None:
                    frame.append((ts, vs))
                w = det.push(ts, vs)
                if w is not None:
                    handle_window(w, ts)
            if cursor >= n_src and not flushed:
                flushed = True
                w = det.flush()
                if w is not None:
                    handle_window(w, t_arr[-1])
            if on_frame is not None and frame:
                on_frame(frame, source.sample_rate_hz)
            before = channels
            channels = step_all(channels, tick)
            moved = any(
                a.current_pressure_kpa != b.current_pressure_kpa or a.phase != b.phase
                for a, b in zip(before.values(), channels.values())
            )
            k += 1
            if moved:
                emit_glove(k * dt)
            if pace:
                sleeper(dt)
            if resolved is None and flushed and cursor >= n_src and not det.active:
                # No sample left and no open burst: this step can never resolve.
                return end(END_SOURCE_EXHAUSTED)

        outcome = resolved if resolved is not None else STEP_TIMEOUT
        tally[outcome] += 1
        steps_run += 1
        sink.emit(
            k * dt,
            "step_result",
            {
                "step_index": step_index,
                "instruction": pstep.instruction,
                "fingers": list(pstep.fingers),
                "outcome": outcome,
                "window_id": used_window,
            },
        )

    # Let the glove settle so the log ends quiescent.
    guard = 0
    while not settled(channels) and guard < 100_000:
        channels = step_all(channels, tick)
        k += 1
        guard += 1
        emit_glove(k * dt)
        if pace:
            sleeper(tick.dt_s)
    return end(END_COMPLETED)


def replay(log: SessionLog, fast: bool = True, sleeper=time.sleep):
    """Yield the log's events unchanged.

    fast=False paces emission by the recorded inter-event gaps. A log with
    an empty body yields nothing, which consumers treat as a session that
    is already over.
    """
    prev_t = 0.0
    for ev in log.events:
        if not fast:
            gap = ev.t - prev_t
            if gap > 0:
                sleeper(gap)
        prev_t = ev.t
        yield ev
