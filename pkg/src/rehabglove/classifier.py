"""Binary KNN over the five time-domain features.

Lazy exhaustive-scan classifier: the model is the training set. Distance is
plain Euclidean over all five vector components. Tie handling is fully
deterministic and independent of training-list order: every sample tied
with the k-th smallest distance joins the neighbor set, vote ties fall to
the class with the smaller mean neighbor distance, and a residual tie goes
to "grasp".
"""

from __future__ import annotations

import json
import logging
import math
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ParseError, ValidationError
from .features import FeatureVector, Scaler, apply, standardize
from .signal import GRASP, RELEASE

log = logging.getLogger(__name__)

SWEPT_KS = (1, 3, 5, 7, 9)

MODEL_FORMAT_VERSION = 1


@dataclass(frozen=True)
class LabeledSample:
    features: FeatureVector
    label: str

    def __post_init__(self):
        if self.label not in (GRASP, RELEASE):
            raise ValidationError(f"label must be grasp or release, got {self.label!r}")


@dataclass(frozen=True, eq=False)
class KnnModel:
    samples: tuple[LabeledSample, ...]
    k: int
    scaler: Scaler | None = None
    # Feature matrix in model space (standardized when a scaler is set);
    # derived from samples, excluded from serialization.
    matrix: np.ndarray = field(repr=False, default=None)

    def __post_init__(self):
        _validate_model_shape(self.samples, self.k)
        if self.matrix is None:
            object.__setattr__(self, "matrix", _model_matrix(self.samples, self.scaler))


def _validate_model_shape(samples: tuple[LabeledSample, ...], k: int) -> None:
    if not samples:
        raise ValidationError("training set must be non-empty")
    labels = {s.label for s in samples}
    if len(labels) < 2:
        raise ValidationError("training set must contain both classes")
    if k < 1 or k % 2 == 0:
        raise ValidationError(f"k must be a positive odd integer, got {k}")
    if k > len(samples):
        raise ValidationError(f"k={k} exceeds training set size {len(samples)}")
    if k not in SWEPT_KS:
        log.info("k=%d is outside the usual sweep %s; accepted", k, SWEPT_KS)


def _model_matrix(samples: tuple[LabeledSample, ...], scaler: Scaler | None) -> np.ndarray:
    if scaler is None:
        rows = [s.features.as_array() for s in samples]
    else:
        rows = [apply(scaler, s.features).as_array() for s in samples]
    return np.stack(rows)


def fit(samples: list[LabeledSample], k: int, use_scaler: bool = False) -> KnnModel:
    """Build a model; KNN is lazy so this just validates and stores.

    Raises ValidationError for an empty or single-class training set, even
    k, or k larger than the training set.
    """
    frozen = tuple(samples)
    scaler = standardize([s.features for s in frozen]) if use_scaler else None
    return KnnModel(samples=frozen, k=k, scaler=scaler)


def distance(a: FeatureVector, b: FeatureVector) -> float:
    """Euclidean distance over all five feature components."""
    d = a.as_array() - b.as_array()
    return float(np.sqrt(np.sum(d * d)))


def predict(model: KnnModel, x: FeatureVector) -> tuple[str, list[tuple[int, float]]]:
    """Classify one vector.

    Returns the winning label and the neighbor list as (training index,
    distance) pairs sorted by ascending distance; the list holds every
    sample tied with the k-th distance, so it can be longer than k.
    """
    q = apply(model.scaler, x).as_array() if model.scaler is not None else x.as_array()
    diff = model.matrix - q
    dists = np.sqrt(np.sum(diff * diff, axis=1))
    threshold = np.sort(dists)[model.k - 1]
    idx = np.flatnonzero(dists <= threshold)
    neighbors = sorted(((int(i), float(dists[i])) for i in idx), key=lambda p: (p[1], p[0]))

    by_label: dict[str, list[float]] = {GRASP: [], RELEASE: []}
    for i, d in neighbors:
        by_label[model.samples[i].label].append(d)
    n_grasp, n_release = len(by_label[GRASP]), len(by_label[RELEASE])
    if n_grasp != n_release:
        label = GRASP if n_grasp > n_release else RELEASE
    else:
        # Vote tie (possible when boundary ties inflate the set): the class
        # hugging the query closer wins; exact tie falls to grasp. fsum keeps
        # the comparison independent of accumulation order.
        mean_g = math.fsum(by_label[GRASP]) / n_grasp
        mean_r = math.fsum(by_label[RELEASE]) / n_release
        label = RELEASE if mean_r < mean_g else GRASP
    return label, neighbors


@dataclass(frozen=True)
class EvalReport:
    k: int
    accuracy_pct: float
    mean_predict_time_s: float
    # Rows are true labels, columns predicted, both in (grasp, release) order.
    confusion: tuple[tuple[int, int], tuple[int, int]]

    def to_dict(self) -> dict:
        return {
            "k": self.k,
            "accuracy_pct": self.accuracy_pct,
            "mean_predict_time_s": self.mean_predict_time_s,
            "confusion": [list(row) for row in self.confusion],
            "confusion_order": [GRASP, RELEASE],
        }


def evaluate(model: KnnModel, validation: list[LabeledSample]) -> EvalReport:
    """Accuracy, mean wall-clock predict time, and confusion counts."""
    if not validation:
        raise ValidationError("validation set must be non-empty")
    order = (GRASP, RELEASE)
    confusion = [[0, 0], [0, 0]]
    elapsed = 0.0
    for s in validation:
        t0 = time.perf_counter()
        predicted, _ = predict(model, s.features)
        elapsed += time.perf_counter() - t0
        confusion[order.index(s.label)][order.index(predicted)] += 1
    correct = confusion[0][0] + confusion[1][1]
    return EvalReport(
        k=model.k,
        accuracy_pct=100.0 * correct / len(validation),
        mean_predict_time_s=elapsed / len(validation),
        confusion=(tuple(confusion[0]), tuple(confusion[1])),
    )


def model_to_dict(model: KnnModel) -> dict:
    return {
        "version": MODEL_FORMAT_VERSION,
        "k": model.k,
        "scaler": model.scaler.to_dict() if model.scaler is not None else None,
        "samples": [
            {"features": s.features.to_dict(), "label": s.label} for s in model.samples
        ],
    }


def model_from_dict(d: dict) -> KnnModel:
    try:
        version = d["version"]
        if version != MODEL_FORMAT_VERSION:
            raise ValidationError(f"unsupported model format version {version!r}")
        scaler = Scaler.from_dict(d["scaler"]) if d["scaler"] is not None else None
        samples = tuple(
            LabeledSample(features=FeatureVector.from_dict(s["features"]), label=s["label"])
            for s in d["samples"]
        )
        k = int(d["k"])
    except (KeyError, TypeError) as exc:
        raise ValidationError(f"malformed model document: {exc!r}") from None
    return KnnModel(samples=samples, k=k, scaler=scaler)


def save_model(model: KnnModel, path: str | Path) -> None:
    Path(path).write_text(json.dumps(model_to_dict(model), indent=2) + "\n", encoding="utf-8")


def load_model(path: str | Path) -> KnnModel:
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: {exc}") from None
    return model_from_dict(doc)


def model_sha256(model: KnnModel) -> str:
    """Stable content hash used in session log headers."""
    import hashlib

    blob = json.dumps(model_to_dict(model), sort_keys=True).encode()
    return hashlib.sha256(blob).hexdigest()
