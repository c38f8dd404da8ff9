"""sEMG sample streams: CSV ingest, rectification, burst segmentation, synthesis.

Amplitudes are millivolts and times are seconds everywhere in the package.
Streams are immutable value objects; every operation returns a new object.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .errors import ParseError, ValidationError

GRASP = "grasp"
RELEASE = "release"
GESTURE_LABELS = (GRASP, RELEASE)

CSV_HEADER = "time_s,voltage_mv"

# Allowed sample-to-sample jitter, relative to the nominal period.
SPACING_REL_TOL = 1e-9
# Declared sampling rate further off than this from the spacing-inferred one
# is treated as lying metadata.
RATE_MISMATCH_TOL = 0.01

# Default hysteresis segmentation, expressed relative to the quiet baseline.
ONSET_BASELINE_FACTOR = 3.0
OFFSET_BASELINE_FACTOR = 1.5
DEFAULT_MIN_DURATION_S = 0.2
DEFAULT_HOLD_OFF_S = 0.1


def _check_label(label: str | None) -> None:
    if label is not None and label not in GESTURE_LABELS:
        raise ValidationError(f"unknown gesture label {label!r}")


@dataclass(frozen=True, eq=False)
class SampleStream:
    """Uniformly sampled voltage sequence.

    t and v are parallel float64 arrays; t must be strictly increasing with
    spacing equal to 1/sample_rate_hz within SPACING_REL_TOL.
    """

    sample_rate_hz: float
    t: np.ndarray
    v: np.ndarray
    label_hint: str | None = None

    def __post_init__(self):
        t = np.asarray(self.t, dtype=np.float64)
        v = np.asarray(self.v, dtype=np.float64)
        object.__setattr__(self, "t", t)
        object.__setattr__(self, "v", v)
        if not (self.sample_rate_hz > 0):
            raise ValidationError("sample_rate_hz must be positive")
        if t.ndim != 1 or v.ndim != 1 or t.shape != v.shape:
            raise ValidationError("t and v must be 1-d arrays of equal length")
        _check_label(self.label_hint)
        if len(t) >= 2:
            dt = np.diff(t)
            if np.any(dt <= 0):
                raise ValidationError("timestamps must be strictly increasing")
            period = 1.0 / self.sample_rate_hz
            if np.max(np.abs(dt - period)) > SPACING_REL_TOL * period:
                raise ValidationError(
                    "sample spacing deviates from the nominal period by more "
                    f"than {SPACING_REL_TOL:g} relative"
                )

    def __len__(self) -> int:
        return len(self.t)

    @property
    def duration_s(self) -> float:
        return float(self.t[-1] - self.t[0]) if len(self.t) else 0.0

    def __eq__(self, other) -> bool:
        if not isinstance(other, SampleStream):
            return NotImplemented
        return (
            self.sample_rate_hz == other.sample_rate_hz
            and self.label_hint == other.label_hint
            and np.array_equal(self.t, other.t)
            and np.array_equal(self.v, other.v)
        )


@dataclass(frozen=True, eq=False)
class GestureWindow:
    """Contiguous slice of a rectified stream covering one gesture event."""

    t: np.ndarray
    v: np.ndarray
    label: str | None = None

    def __post_init__(self):
        t = np.asarray(self.t, dtype=np.float64)
        v = np.asarray(self.v, dtype=np.float64)
        object.__setattr__(self, "t", t)
        object.__setattr__(self, "v", v)
        if t.ndim != 1 or v.ndim != 1 or t.shape != v.shape:
            raise ValidationError("t and v must be 1-d arrays of equal length")
        if len(t) < 2:
            raise ValidationError("a gesture window needs at least 2 samples")
        if np.any(v < 0):
            raise ValidationError("gesture windows hold rectified samples (v >= 0)")
        _check_label(self.label)

    def __len__(self) -> int:
        return len(self.t)

    @property
    def duration_s(self) -> float:
        return float(self.t[-1] - self.t[0])

    @property
    def peak_mv(self) -> float:
        return float(np.max(self.v))

    def __eq__(self, other) -> bool:
        if not isinstance(other, GestureWindow):
            return NotImplemented
        return (
            self.label == other.label
            and np.array_equal(self.t, other.t)
            and np.array_equal(self.v, other.v)
        )


@dataclass(frozen=True)
class SegmentationConfig:
    """Double-threshold hysteresis parameters for burst extraction."""

    onset_threshold_mv: float
    offset_threshold_mv: float
    min_duration_s: float = DEFAULT_MIN_DURATION_S
    hold_off_s: float = DEFAULT_HOLD_OFF_S

    def __post_init__(self):
        if self.onset_threshold_mv < 0 or self.offset_threshold_mv < 0:
            raise ValidationError("thresholds must be non-negative")
        if self.offset_threshold_mv > self.onset_threshold_mv:
            raise ValidationError("offset threshold must not exceed onset threshold")
        if not (self.min_duration_s > 0):
            raise ValidationError("min_duration_s must be positive")
        if self.hold_off_s < 0:
            raise ValidationError("hold_off_s must be non-negative")


def quiet_baseline_mav(stream: SampleStream) -> float:
    """Estimate the quiet-floor mean absolute value of a stream.

    The median of |v| is used as a robust proxy: bursts are a minority of
    samples, so the median sits in the inter-burst floor.
    """
    if len(stream) == 0:
        raise ValidationError("cannot estimate a baseline from an empty stream")
    return float(np.median(np.abs(stream.v)))


def auto_segmentation_config(stream: SampleStream) -> SegmentationConfig:
    """Default config: onset 3x and offset 1.5x the quiet-baseline MAV."""
    base = quiet_baseline_mav(stream)
    return SegmentationConfig(
        onset_threshold_mv=ONSET_BASELINE_FACTOR * base,
        offset_threshold_mv=OFFSET_BASELINE_FACTOR * base,
    )


def ingest_csv(path: str | Path, declared_rate_hz: float | None = None) -> SampleStream:
    """Read a `time_s,voltage_mv` CSV into a SampleStream.

    The sampling rate is inferred from the median inter-sample spacing; a
    declared rate, when given, is only cross-checked (mismatch beyond
    RATE_MISMATCH_TOL is a validation error) and never trusted.

    Raises ParseError with a 1-based line number for malformed rows and
    ValidationError for empty files or non-monotone timestamps.
    """
    text = Path(path).read_text(encoding="utf-8")
    lines = text.splitlines()
    if not lines:
        raise ValidationError(f"{path}: empty file")
    if lines[0].strip() != CSV_HEADER:
        raise ParseError(f"expected header {CSV_HEADER!r}, got {lines[0]!r}", line=1)
    ts: list[float] = []
    vs: list[float] = []
    for lineno, raw in enumerate(lines[1:], start=2):
        if not raw.strip():
            continue
        parts = raw.split(",")
        if len(parts) != 2:
            raise ParseError(f"expected 2 fields, got {len(parts)}", line=lineno)
        try:
            ts.append(float(parts[0]))
            vs.append(float(parts[1]))
        except ValueError as exc:
            raise ParseError(str(exc), line=lineno) from None
    if not ts:
        raise ValidationError(f"{path}: no samples")
    if len(ts) == 1:
        raise ValidationError(f"{path}: need at least 2 samples to infer the rate")
    t = np.asarray(ts)
    dt = np.diff(t)
    if np.any(dt <= 0):
        raise ValidationError(f"{path}: timestamps must be strictly increasing")
    inferred = 1.0 / float(np.median(dt))
    if declared_rate_hz is not None:
        if abs(inferred - declared_rate_hz) > RATE_MISMATCH_TOL * declared_rate_hz:
            raise ValidationError(
                f"{path}: declared rate {declared_rate_hz:g} Hz disagrees with "
                f"inferred {inferred:g} Hz by more than {RATE_MISMATCH_TOL:.0%}"
            )
    return SampleStream(sample_rate_hz=inferred, t=t, v=np.asarray(vs))


def write_csv(stream: SampleStream, path: str | Path) -> None:
    """Write a stream in the ingest_csv format (UTF-8, LF).

    Values are written with shortest round-trip float repr, so
    ingest_csv(write_csv(s)) reproduces s exactly. label_hint has no CSV
    column and is not persisted.
    """
    out = [CSV_HEADER]
    out.extend(f"{float(t)!r},{float(v)!r}" for t, v in zip(stream.t, stream.v))
    Path(path).write_text("\n".join(out) + "\n", encoding="utf-8")


def rectify(stream: SampleStream) -> SampleStream:
    """Full-wave rectification: v -> |v|, timestamps untouched."""
    return replace(stream, v=np.abs(stream.v))


class BurstDetector:
    """Incremental double-threshold burst splitter.

    quiet -> active on a strict upward crossing of the onset threshold
    (previous sample at or below it, current strictly above; the first
    sample of a stream counts as a crossing if already above). active ->
    quiet once the signal has stayed below the offset threshold for
    hold_off_s; the emitted window spans the opening sample through the
    last sample at or above the offset threshold. Windows shorter than
    min_duration_s are dropped.

    Feeding a stream sample-by-sample plus flush() is exactly equivalent
    to the batch segment_gestures().
    """

    def __init__(self, cfg: SegmentationConfig, label: str | None = None):
        self.cfg = cfg
        self.label = label
        self._prev_v: float | None = None
        self._t_buf: list[float] = []
        self._v_buf: list[float] = []
        self._last_hot = -1

    @property
    def active(self) -> bool:
        return bool(self._t_buf)

    def push(self, t: float, v: float) -> GestureWindow | None:
        """Consume one rectified sample; return a window if one just closed."""
        if v < 0:
            raise ValidationError("segmentation requires rectified input (v >= 0)")
        cfg = self.cfg
        if not self._t_buf:
            crossed = v > cfg.onset_threshold_mv and (
                self._prev_v is None or self._prev_v <= cfg.onset_threshold_mv
            )
            self._prev_v = v
            if crossed:
                self._t_buf = [t]
                self._v_buf = [v]
                self._last_hot = 0
            return None
        self._t_buf.append(t)
        self._v_buf.append(v)
        if v >= cfg.offset_threshold_mv:
            self._last_hot = len(self._t_buf) - 1
            return None
        if t - self._t_buf[self._last_hot] >= cfg.hold_off_s:
            window = self._close()
            self._prev_v = v
            return window
        return None

    def flush(self) -> GestureWindow | None:
        """End of stream: close and return any open window."""
        if not self._t_buf:
            return None
        window = self._close()
        self._prev_v = None
        return window

    def _close(self) -> GestureWindow | None:
        end = self._last_hot + 1
        t = np.asarray(self._t_buf[:end])
        v = np.asarray(self._v_buf[:end])
        self._t_buf = []
        self._v_buf = []
        self._last_hot = -1
        if len(t) < 2 or t[-1] - t[0] < self.cfg.min_duration_s:
            return None
        return GestureWindow(t=t, v=v, label=self.label)


def segment_gestures(
    stream: SampleStream, cfg: SegmentationConfig
) -> list[GestureWindow]:
    """Split a rectified stream into gesture windows.

    Windows are disjoint, time ordered, each at least min_duration_s long.
    Raises ValidationError if the stream is not rectified.
    """
    if len(stream) and np.any(stream.v < 0):
        raise ValidationError("segmentation requires a rectified stream (all v >= 0)")
    det = BurstDetector(cfg, label=stream.label_hint)
    windows: list[GestureWindow] = []
    for t, v in zip(stream.t.tolist(), stream.v.tolist()):
        w = det.push(t, v)
        if w is not None:
            windows.append(w)
    w = det.flush()
    if w is not None:
        windows.append(w)
    return windows


# Synthetic burst layout. Centers are deterministic (no timing jitter) so
# tests can recover ground truth via burst_centers(); only amplitude and
# width are drawn per burst.
SYNTH_GAP_S = 0.7
SYNTH_SLOT_S = 0.8
SYNTH_FLOOR_MV = 0.05
SYNTH_FLOOR_JITTER = 0.05
_GRASP_AMP_MV = 1.0
_GRASP_WIDTH_S = 0.11
_AMP_CONTRAST = 0.35
_WIDTH_CONTRAST = 0.30
_BURST_JITTER = 0.15


def burst_centers(count: int) -> np.ndarray:
    """Ground-truth burst center times for a synthetic stream of `count` bursts."""
    period = SYNTH_GAP_S + SYNTH_SLOT_S
    return SYNTH_GAP_S + SYNTH_SLOT_S / 2 + period * np.arange(count)


def synth_gesture_stream(
    kind: str,
    count: int,
    sample_rate_hz: float = 1000.0,
    seed: int = 0,
    separation: float = 1.0,
) -> SampleStream:
    """Generate a rectified stream of `count` gesture bursts.

    Bursts are Gaussian-envelope-modulated white noise on top of a small
    near-constant sensor floor; release bursts are shorter and weaker than
    grasp bursts by an amount controlled by `separation` (0 = identical
    classes, 1 = default contrast). Deterministic for a fixed seed.
    """
    if kind not in GESTURE_LABELS:
        raise ValidationError(f"kind must be one of {GESTURE_LABELS}, got {kind!r}")
    if count < 1:
        raise ValidationError("count must be >= 1")
    if not (sample_rate_hz > 0):
        raise ValidationError("sample_rate_hz must be positive")

    if kind == GRASP:
        amp, width = _GRASP_AMP_MV, _GRASP_WIDTH_S
    else:
        amp = _GRASP_AMP_MV * (1.0 - _AMP_CONTRAST * separation)
        width = _GRASP_WIDTH_S * (1.0 - _WIDTH_CONTRAST * separation)

    period = SYNTH_GAP_S + SYNTH_SLOT_S
    total_s = count * period + SYNTH_GAP_S
    n = int(round(total_s * sample_rate_hz))
    t = np.arange(n) / sample_rate_hz

    rng = np.random.default_rng(seed)
    amp_jitter = np.exp(_BURST_JITTER * rng.standard_normal(count))
    width_jitter = np.exp(_BURST_JITTER * rng.standard_normal(count))
    envelope = np.zeros(n)
    for i, center in enumerate(burst_centers(count)):
        sigma = width * width_jitter[i]
        envelope += amp * amp_jitter[i] * np.exp(-0.5 * ((t - center) / sigma) ** 2)

    burst = np.abs(envelope * rng.standard_normal(n))
    floor = SYNTH_FLOOR_MV * np.abs(1.0 + SYNTH_FLOOR_JITTER * rng.standard_normal(n))
    return SampleStream(
        sample_rate_hz=sample_rate_hz, t=t, v=floor + burst, label_hint=kind
    )
