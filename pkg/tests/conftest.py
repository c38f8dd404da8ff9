"""Shared fixtures: stream/window builders and the frozen seed-42 corpus."""

from __future__ import annotations

import numpy as np
import pytest

from rehabglove.classifier import LabeledSample, fit
from rehabglove.features import extract
from rehabglove.signal import (
    GRASP,
    RELEASE,
    GestureWindow,
    SampleStream,
    auto_segmentation_config,
    rectify,
    segment_gestures,
    synth_gesture_stream,
)

# Corpus seed convention used everywhere (CLI docs, acceptance, README):
# train grasp/release = seed, seed+1; validation grasp/release = +2, +3.
CORPUS_SEED = 42


def make_stream(v, rate_hz: float = 1000.0, label=None) -> SampleStream:
    v = np.asarray(v, dtype=np.float64)
    t = np.arange(len(v)) / rate_hz
    return SampleStream(sample_rate_hz=rate_hz, t=t, v=v, label_hint=label)


def make_window(v, rate_hz: float = 1000.0, label=None) -> GestureWindow:
    v = np.asarray(v, dtype=np.float64)
    t = np.arange(len(v)) / rate_hz
    return GestureWindow(t=t, v=v, label=label)


def corpus_windows(kind: str, count: int, seed: int):
    """Synthesize, rectify, auto-segment; asserts exact burst recovery."""
    stream = rectify(synth_gesture_stream(kind, count=count, seed=seed))
    cfg = auto_segmentation_config(stream)
    windows = segment_gestures(stream, cfg)
    assert len(windows) == count, f"{kind} seed={seed}: {len(windows)} != {count}"
    return windows


def corpus_samples(kind: str, count: int, seed: int) -> list[LabeledSample]:
    return [
        LabeledSample(features=extract(w), label=kind)
        for w in corpus_windows(kind, count, seed)
    ]


@pytest.fixture(scope="session")
def train_samples() -> list[LabeledSample]:
    return corpus_samples(GRASP, 34, CORPUS_SEED) + corpus_samples(
        RELEASE, 34, CORPUS_SEED + 1
    )


@pytest.fixture(scope="session")
def validation_samples() -> list[LabeledSample]:
    return corpus_samples(GRASP, 16, CORPUS_SEED + 2) + corpus_samples(
        RELEASE, 16, CORPUS_SEED + 3
    )


@pytest.fixture(scope="session")
def trained_model(train_samples):
    return fit(train_samples, k=5)


@pytest.fixture(scope="session")
def small_model():
    """Cheap model for session/service plumbing tests."""
    samples = corpus_samples(GRASP, 8, 100) + corpus_samples(RELEASE, 8, 101)
    return fit(samples, k=3)
