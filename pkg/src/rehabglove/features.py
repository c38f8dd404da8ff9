"""Five time-domain features of a gesture window and the ordered feature vector.

The vector order is fixed: integrated amplitude (iemg, mV*samples), mean
absolute value (mav, mV), simple square integral (ssi, mV^2*samples),
maximum amplitude (max, mV), waveform length (wl, mV in the default
amplitude-difference convention).
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .signal import GestureWindow

WL_AMPLITUDE = "amplitude"
WL_LITERAL = "literal"

FEATURE_KEYS = ("iemg", "mav", "ssi", "max", "wl")


@dataclass(frozen=True)
class FeatureVector:
    iemg: float
    mav: float
    ssi: float
    max_amp: float
    wl: float

    def as_array(self) -> np.ndarray:
        return np.array([self.iemg, self.mav, self.ssi, self.max_amp, self.wl])

    def to_dict(self) -> dict[str, float]:
        return {
            "iemg": self.iemg,
            "mav": self.mav,
            "ssi": self.ssi,
            "max": self.max_amp,
            "wl": self.wl,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "FeatureVector":
        try:
            return cls(
                iemg=float(d["iemg"]),
                mav=float(d["mav"]),
                ssi=float(d["ssi"]),
                max_amp=float(d["max"]),
                wl=float(d["wl"]),
            )
        except KeyError as exc:
            raise ValidationError(f"feature vector missing key {exc}") from None

    @classmethod
    def from_array(cls, a) -> "FeatureVector":
        x1, x2, x3, x4, x5 = (float(x) for x in a)
        return cls(iemg=x1, mav=x2, ssi=x3, max_amp=x4, wl=x5)

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


def iemg(w: GestureWindow) -> float:
    """Sum of sample amplitudes (area under the rectified curve)."""
    return float(np.sum(np.abs(w.v)))


def mav(w: GestureWindow) -> float:
    """Mean absolute amplitude."""
    return float(np.mean(np.abs(w.v)))


def ssi(w: GestureWindow) -> float:
    """Sum of squared absolute amplitudes (signal energy)."""
    return float(np.sum(np.square(np.abs(w.v))))


def max_amp(w: GestureWindow) -> float:
    """Largest absolute amplitude in the window."""
    return float(np.max(np.abs(w.v)))


def waveform_length(w: GestureWindow, mode: str = WL_AMPLITUDE) -> float:
    """Cumulative waveform length.

    amplitude mode (default) sums |v[i+1] - v[i]|. literal mode sums
    |t[i+1] - t[i]| instead, which for uniform sampling is just
    (N-1)/sample_rate; it is kept only for fidelity to the source feature
    table and carries no amplitude information.
    """
    if len(w) < 2:
        raise ValidationError("waveform length needs at least 2 samples")
    if mode == WL_AMPLITUDE:
        return float(np.sum(np.abs(np.diff(w.v))))
    if mode == WL_LITERAL:
        return float(np.sum(np.abs(np.diff(w.t))))
    raise ValidationError(f"unknown waveform length mode {mode!r}")


def extract(w: GestureWindow, wl_mode: str = WL_AMPLITUDE) -> FeatureVector:
    """Compute the full ordered feature vector for one window."""
    return FeatureVector(
        iemg=iemg(w),
        mav=mav(w),
        ssi=ssi(w),
        max_amp=max_amp(w),
        wl=waveform_length(w, mode=wl_mode),
    )


@dataclass(frozen=True)
class Scaler:
    """Per-component z-score fitted on a training set.

    Components are always centered by the training mean; division by the
    standard deviation (population, ddof=0) is skipped for zero-variance
    components, so a degenerate training set maps onto the zero vector.
    """

    mean: np.ndarray
    std: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "mean", np.asarray(self.mean, dtype=np.float64))
        object.__setattr__(self, "std", np.asarray(self.std, dtype=np.float64))
        if self.mean.shape != (5,) or self.std.shape != (5,):
            raise ValidationError("scaler mean/std must be length-5 vectors")

    def to_dict(self) -> dict:
        return {"mean": self.mean.tolist(), "std": self.std.tolist()}

    @classmethod
    def from_dict(cls, d: dict) -> "Scaler":
        return cls(mean=np.asarray(d["mean"]), std=np.asarray(d["std"]))


def standardize(train: list[FeatureVector]) -> Scaler:
    """Fit a Scaler on training vectors. Empty training set is an error."""
    if not train:
        raise ValidationError("cannot fit a scaler on an empty training set")
    m = np.stack([fv.as_array() for fv in train])
    return Scaler(mean=m.mean(axis=0), std=m.std(axis=0))


def apply(scaler: Scaler, fv: FeatureVector) -> FeatureVector:
    """Standardize one vector; zero-variance components are centered only."""
    x = fv.as_array() - scaler.mean
    nonzero = scaler.std > 0
    x[nonzero] /= scaler.std[nonzero]
    return FeatureVector.from_array(x)
