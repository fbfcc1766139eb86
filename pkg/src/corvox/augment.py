"""Training-data signal augmentation.

Per-buffer transforms (white noise, leading silence, gain) plus the
dataset-level recipe that replicates a manifest once per enabled variant.
The classic tripling recipe is original + amplitude-gated copy + white-noise
copy.

Determinism contract: per-record randomness is seeded from
hash(recipe seed, record id, variant), never from processing order, so a
rerun at any parallelism produces byte-identical audio.
"""

from __future__ import annotations

import hashlib
import logging
import os.path
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .audio import AudioBuffer, load_wav, save_wav
from .errors import AudioError
from .manifest import DatasetManifest, UtteranceRecord
from .vad import basic_vad

log = logging.getLogger(__name__)

DEFAULT_NOISE_SCALE = 0.002
DEFAULT_VAD_THRESHOLD = 0.001

_FILE_SUFFIXES = {"basic_vad": "vad", "noise": "noise", "silence": "sil", "gain": "gain"}


@dataclass(frozen=True)
class AugmentRecipe:
    """Which variants to emit per record, and their parameters.

    silence_ms and gain_range, when set, enable two further variants whose
    per-record parameter is drawn deterministically from the record seed.
    """

    include_original: bool = True
    include_basic_vad: bool = True
    include_noise: bool = True
    vad_threshold: float = DEFAULT_VAD_THRESHOLD
    noise_scale: float = DEFAULT_NOISE_SCALE
    silence_ms: tuple[int, int] | None = None
    gain_range: tuple[float, float] | None = None
    seed: int = 0

    def __post_init__(self):
        if not self.variants():
            raise ValueError("recipe enables no variants")
        if self.noise_scale < 0:
            raise ValueError("noise_scale must be non-negative")
        if self.vad_threshold < 0:
            raise ValueError("vad_threshold must be non-negative")
        if self.silence_ms is not None:
            lo, hi = self.silence_ms
            if not 0 <= lo <= hi:
                raise ValueError(f"bad silence_ms range {self.silence_ms}")
        if self.gain_range is not None:
            lo, hi = self.gain_range
            if not 0 < lo <= hi <= 1.5:
                raise ValueError(f"gain range must lie in (0, 1.5], got {self.gain_range}")

    def variants(self) -> list[str]:
        out = []
        if self.include_original:
            out.append("original")
        if self.include_basic_vad:
            out.append("basic_vad")
        if self.include_noise:
            out.append("noise")
        if self.silence_ms is not None:
            out.append("silence")
        if self.gain_range is not None:
            out.append("gain")
        return out

    def as_dict(self) -> dict:
        return {
            "include_original": self.include_original,
            "include_basic_vad": self.include_basic_vad,
            "include_noise": self.include_noise,
            "vad_threshold": self.vad_threshold,
            "noise_scale": self.noise_scale,
            "silence_ms": list(self.silence_ms) if self.silence_ms else None,
            "gain_range": list(self.gain_range) if self.gain_range else None,
            "seed": self.seed,
        }


def record_seed(corpus_seed: int, key: str) -> int:
    """Stable 64-bit seed from a corpus seed and a record-level key."""
    digest = hashlib.blake2b(f"{corpus_seed}:{key}".encode("utf-8"), digest_size=8)
    return int.from_bytes(digest.digest(), "big")


def add_white_noise(buffer: AudioBuffer, scale: float = DEFAULT_NOISE_SCALE, seed: int = 0) -> AudioBuffer:
    """Add zero-mean Gaussian noise with standard deviation ``scale``.

    Output samples are clamped to [-1, 1]; the noise array is fully
    determined by the seed.
    """
    if scale < 0:
        raise ValueError("scale must be non-negative")
    if scale == 0:
        return buffer
    noise = np.random.default_rng(seed).normal(0.0, scale, len(buffer))
    return AudioBuffer(np.clip(buffer.samples + noise, -1.0, 1.0), buffer.sample_rate)


def inject_leading_silence(buffer: AudioBuffer, duration_ms: int) -> AudioBuffer:
    """Prepend ``duration_ms`` of zeros at the buffer's sample rate."""
    if duration_ms < 0:
        raise ValueError("duration_ms must be non-negative")
    if duration_ms == 0:
        return buffer
    pad = np.zeros(int(round(duration_ms * buffer.sample_rate / 1000)))
    return AudioBuffer(np.concatenate([pad, buffer.samples]), buffer.sample_rate)


def gain(buffer: AudioBuffer, factor: float) -> AudioBuffer:
    """Scale every sample by ``factor``, clamping into [-1, 1]."""
    if factor <= 0:
        raise ValueError("gain factor must be positive")
    return AudioBuffer(np.clip(buffer.samples * factor, -1.0, 1.0), buffer.sample_rate)


def _variant_path(audio_path: str, variant: str) -> str:
    root, ext = os.path.splitext(audio_path)
    return f"{root}.{_FILE_SUFFIXES[variant]}{ext or '.wav'}"


def _transform(buffer: AudioBuffer, variant: str, recipe: AugmentRecipe, seed: int) -> AudioBuffer:
    if variant == "basic_vad":
        return basic_vad(buffer, recipe.vad_threshold)
    if variant == "noise":
        return add_white_noise(buffer, recipe.noise_scale, seed=seed)
    if variant == "silence":
        lo, hi = recipe.silence_ms
        duration = int(np.random.default_rng(seed).integers(lo, hi + 1))
        return inject_leading_silence(buffer, duration)
    if variant == "gain":
        lo, hi = recipe.gain_range
        factor = float(np.random.default_rng(seed).uniform(lo, hi))
        return gain(buffer, factor)
    raise ValueError(f"unknown variant {variant!r}")


def _render_record(rec: UtteranceRecord, recipe: AugmentRecipe):
    """All variant records for one source record, plus per-variant failures."""
    out: list[UtteranceRecord] = []
    failures: list[tuple[str, str]] = []
    variants = recipe.variants()
    buffer = None
    if any(v != "original" for v in variants):
        try:
            buffer = load_wav(rec.audio_path)
        except AudioError as exc:
            failures.extend((f"{rec.id}-{v}", str(exc)) for v in variants if v != "original")
            variants = [v for v in variants if v == "original"]
    for variant in variants:
        if variant == "original":
            out.append(_variant_record(rec, "original"))
            continue
        seed = record_seed(recipe.seed, f"{rec.id}/{variant}")
        transformed = _transform(buffer, variant, recipe, seed)
        if len(transformed) == 0:
            failures.append((f"{rec.id}-{variant}", "transform removed every sample"))
            continue
        path = _variant_path(rec.audio_path, variant)
        save_wav(transformed, path)
        out.append(
            _variant_record(rec, variant, audio_path=path, duration_ms=transformed.duration_ms)
        )
    return out, failures


def _variant_record(rec: UtteranceRecord, variant: str, audio_path=None, duration_ms=None):
    # explicit construction: dataclasses.replace is measurably slower on
    # six-figure record counts
    return UtteranceRecord(
        id=rec.id if variant == "original" else f"{rec.id}-{variant}",
        audio_path=audio_path if audio_path is not None else rec.audio_path,
        duration_ms=duration_ms if duration_ms is not None else rec.duration_ms,
        transcript=rec.transcript,
        translation=rec.translation,
        audio_origin=rec.audio_origin,
        translation_origin=rec.translation_origin,
        dataset=rec.dataset,
        split=rec.split,
        voice=rec.voice,
        variant=variant,
    )


def _plan_record(rec: UtteranceRecord, recipe: AugmentRecipe) -> list[UtteranceRecord]:
    """Variant records without touching audio; durations stay provisional."""
    out = []
    for variant in recipe.variants():
        if variant == "original":
            out.append(_variant_record(rec, "original"))
        else:
            out.append(_variant_record(rec, variant, audio_path=_variant_path(rec.audio_path, variant)))
    return out


def augment_dataset(
    manifest: DatasetManifest,
    recipe: AugmentRecipe,
    render: bool = True,
    max_workers: int = 4,
) -> DatasetManifest:
    """Replicate every train-split record once per enabled recipe variant.

    Augmentation is a training-data operation: test-split records pass
    through untouched, so the train segment count multiplies exactly by
    the number of enabled variants while the evaluation set stays intact.

    With ``render=True`` each non-original variant's audio is computed and
    written beside the original with a variant-suffixed name, and record
    durations are exact. ``render=False`` performs the record arithmetic
    only (exact counts, provisional durations for transformed variants),
    which is useful for recipe planning over manifests whose audio lives
    elsewhere.

    Per-record failures (unreadable audio, a gate that removed every
    sample) are logged and summarized; processing continues.
    """
    train = [rec for rec in manifest if rec.split == "train"]
    passthrough = {rec.id: rec for rec in manifest if rec.split != "train"}
    if passthrough:
        log.info("augment: passing %d test record(s) through untouched", len(passthrough))

    if not render:
        expanded = {rec.id: _plan_record(rec, recipe) for rec in train}
        failures = []
    else:
        if max_workers <= 1:
            results = [_render_record(rec, recipe) for rec in train]
        else:
            with ThreadPoolExecutor(max_workers=max_workers) as pool:
                results = list(pool.map(lambda rec: _render_record(rec, recipe), train))
        expanded = {rec.id: recs for rec, (recs, _) in zip(train, results)}
        failures = [fail for _, fails in results for fail in fails]

    # keep the input record order: each source record expands in place
    records: list[UtteranceRecord] = []
    for rec in manifest:
        if rec.id in passthrough:
            records.append(rec)
        else:
            records.extend(expanded[rec.id])

    for rec_id, reason in failures:
        log.warning("augment failure %s: %s", rec_id, reason)
    if failures:
        log.warning("augment: %d variant(s) failed across %d record(s)", len(failures), len(train))
    return DatasetManifest(manifest.name, tuple(records))
