"""Voice-activity detection.

Two flavours:

* :func:`basic_vad`: per-sample amplitude gating used as a training-time
  augmentation. No duration logic at all; sub-threshold samples are simply
  dropped, which also shortens (speeds up) the signal.
* :func:`detect_segments`: a parametric segment VAD for inference-style
  preprocessing, honouring the usual six-parameter contract (threshold,
  min/max speech duration, min silence duration, window size, padding).

The segment VAD scores windows with an energy logistic rather than a neural
model: score = 1 / (1 + exp(-(rms_db - floor_db - 6) / 3)). This is an
explicit stand-in that keeps threshold-at-0.5 semantics on clean signals
without a model dependency.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .audio import AudioBuffer, noise_floor

SCORE_MIDPOINT_DB = 6.0
SCORE_SLOPE_DB = 3.0
_DB_EPS = 1e-10  # keeps log10 finite on digital silence


@dataclass(frozen=True)
class VadParams:
    """Segment-VAD parameters; defaults match common inference tooling."""

    threshold: float = 0.5
    min_speech_duration_ms: int = 250
    max_speech_duration_s: float = math.inf
    min_silence_duration_ms: int = 2000
    window_size_samples: int = 1024
    speech_pad_ms: int = 400

    def __post_init__(self):
        if not 0.0 <= self.threshold <= 1.0:
            raise ValueError(f"threshold must be in [0, 1], got {self.threshold}")
        if self.min_speech_duration_ms < 0 or self.min_silence_duration_ms < 0:
            raise ValueError("durations must be non-negative")
        if self.speech_pad_ms < 0:
            raise ValueError("speech_pad_ms must be non-negative")
        if self.max_speech_duration_s <= 0:
            raise ValueError("max_speech_duration_s must be positive")
        if self.window_size_samples <= 0:
            raise ValueError("window_size_samples must be positive")


@dataclass(frozen=True)
class SpeechSegment:
    start_ms: int
    end_ms: int

    def __post_init__(self):
        if not 0 <= self.start_ms < self.end_ms:
            raise ValueError(f"invalid segment [{self.start_ms}, {self.end_ms}]")

    def as_dict(self) -> dict:
        return {"start_ms": self.start_ms, "end_ms": self.end_ms}


def basic_vad(buffer: AudioBuffer, amplitude_threshold: float = 0.001) -> AudioBuffer:
    """Drop every sample with magnitude below the threshold, order preserved.

    The result may be empty; callers must handle that.
    """
    if amplitude_threshold < 0:
        raise ValueError("amplitude_threshold must be non-negative")
    kept = buffer.samples[np.abs(buffer.samples) >= amplitude_threshold]
    return AudioBuffer(kept, buffer.sample_rate)


def _db(value: float) -> float:
    return 20.0 * math.log10(max(value, _DB_EPS))


def speech_scores(buffer: AudioBuffer, window_size_samples: int = 1024) -> np.ndarray:
    """One speech score in [0, 1] per non-overlapping window.

    Scores are a logistic mapping of window RMS in dB above the buffer's
    noise floor, so they are monotone in window RMS for a fixed buffer.
    A trailing partial window is scored over its actual length.
    """
    if window_size_samples <= 0:
        raise ValueError("window_size_samples must be positive")
    if len(buffer) < window_size_samples:
        raise ValueError(
            f"buffer has {len(buffer)} samples, shorter than one "
            f"{window_size_samples}-sample window"
        )
    floor_db = _db(noise_floor(buffer))
    samples = buffer.samples
    scores = []
    for start in range(0, len(samples), window_size_samples):
        win = samples[start : start + window_size_samples]
        rms_db = _db(float(np.sqrt(np.mean(win * win))))
        z = (rms_db - floor_db - SCORE_MIDPOINT_DB) / SCORE_SLOPE_DB
        scores.append(1.0 / (1.0 + math.exp(-z)))
    return np.array(scores)


def _merge_close_runs(runs, min_gap):
    merged = [list(runs[0])]
    for start, end in runs[1:]:
        if start - merged[-1][1] < min_gap:
            merged[-1][1] = end
        else:
            merged.append([start, end])
    return merged


def _split_long_runs(runs, max_len):
    """Split runs longer than max_len into equal parts no longer than it.

    Equal parts (rather than a hard cut at max_len) keep remainders from
    falling under the minimum speech duration.
    """
    out = []
    for start, end in runs:
        length = end - start
        if length <= max_len:
            out.append((start, end))
            continue
        pieces = math.ceil(length / max_len)
        bounds = [start + round(i * length / pieces) for i in range(pieces + 1)]
        out.extend(zip(bounds[:-1], bounds[1:]))
    return out


def detect_segments(buffer: AudioBuffer, params: VadParams) -> list[SpeechSegment]:
    """Detect speech segments from windowed scores.

    Windows scoring at or above the threshold seed speech runs; runs
    separated by silence shorter than min_silence_duration_ms merge; runs
    shorter than min_speech_duration_ms drop; survivors get speech_pad_ms
    of padding each side (clamped to the buffer); padded runs that overlap
    merge; runs longer than max_speech_duration_s split.
    """
    if len(buffer) < params.window_size_samples:
        return []
    scores = speech_scores(buffer, params.window_size_samples)
    n = len(buffer)
    rate = buffer.sample_rate
    win = params.window_size_samples

    def to_samples(ms: float) -> int:
        return int(round(ms * rate / 1000))

    runs = []
    for i, score in enumerate(scores):
        if score < params.threshold:
            continue
        start, end = i * win, min((i + 1) * win, n)
        if runs and runs[-1][1] == start:
            runs[-1][1] = end
        else:
            runs.append([start, end])
    if not runs:
        return []

    runs = _merge_close_runs(runs, to_samples(params.min_silence_duration_ms))
    min_speech = to_samples(params.min_speech_duration_ms)
    runs = [(s, e) for s, e in runs if e - s >= min_speech]
    if not runs:
        return []

    pad = to_samples(params.speech_pad_ms)
    padded = [(max(0, s - pad), min(n, e + pad)) for s, e in runs]
    padded = [tuple(r) for r in _merge_close_runs(padded, 1)]

    if math.isfinite(params.max_speech_duration_s):
        padded = _split_long_runs(padded, to_samples(params.max_speech_duration_s * 1000))

    return [
        SpeechSegment(int(round(1000 * s / rate)), int(round(1000 * e / rate)))
        for s, e in padded
        if int(round(1000 * s / rate)) < int(round(1000 * e / rate))
    ]


def apply_segments(buffer: AudioBuffer, segments: list[SpeechSegment]) -> AudioBuffer:
    """Concatenate the selected sample ranges into the gated signal.

    Segments must be sorted, disjoint, and within the buffer bounds.
    """
    duration = buffer.duration_ms
    previous_end = 0
    for seg in segments:
        if seg.start_ms < previous_end:
            raise ValueError(f"segments overlap or are unsorted at {seg}")
        if seg.end_ms > duration:
            raise ValueError(f"segment {seg} exceeds buffer duration {duration} ms")
        previous_end = seg.end_ms
    rate = buffer.sample_rate
    parts = [
        buffer.samples[int(round(seg.start_ms * rate / 1000)) : int(round(seg.end_ms * rate / 1000))]
        for seg in segments
    ]
    if not parts:
        return AudioBuffer(np.zeros(0), rate)
    return AudioBuffer(np.concatenate(parts), rate)
