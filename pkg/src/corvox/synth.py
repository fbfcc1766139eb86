"""Synthetic-speech dataset generation and forward machine translation.

``synthesize_dataset`` drives a TTS client over filtered text pairs and
renders every pair with BOTH voices of a voice pair, so the output always
holds exactly twice as many utterances as input pairs (minus recorded
failures). ``forward_translate`` fills missing translations from an MT
client; such records are flagged machine-translated and kept train-only.
"""

from __future__ import annotations

import json
import logging
import re
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path

from .audio import CANONICAL_RATE, resample, save_wav
from .clients import MtClient, TtsClient
from .errors import ClientError
from .manifest import DatasetManifest, UtteranceRecord
from .textfilter import TextPair

log = logging.getLogger(__name__)

DEFAULT_FAILURE_CEILING = 0.10
DEFAULT_RETRIES = 3
DEFAULT_MAX_WORKERS = 8


@dataclass(frozen=True)
class VoicePair:
    female_voice: str
    male_voice: str

    def __post_init__(self):
        if self.female_voice == self.male_voice:
            raise ValueError("voice pair must use two distinct voice ids")


DEFAULT_VOICES = VoicePair(female_voice="female-1", male_voice="male-1")


def _slug(text: str) -> str:
    return re.sub(r"[^A-Za-z0-9_-]+", "_", text)


def _call_with_retry(fn, what: str, retries: int, backoff: float):
    last = None
    for attempt in range(max(1, retries)):
        try:
            return fn()
        except Exception as exc:
            last = exc
            if attempt + 1 < retries:
                time.sleep(backoff * 2**attempt)
    raise ClientError(f"{what}: failed after {retries} attempt(s): {last}") from last


def synthesize_dataset(
    pairs: list[TextPair],
    voices: VoicePair,
    tts: TtsClient,
    output_dir,
    dataset_name: str = "synthetic",
    sample_rate: int = CANONICAL_RATE,
    max_workers: int = DEFAULT_MAX_WORKERS,
    retries: int = DEFAULT_RETRIES,
    backoff: float = 0.5,
    failure_ceiling: float = DEFAULT_FAILURE_CEILING,
) -> DatasetManifest:
    """Synthesize every text pair with both voices into canonical WAV files.

    Results are committed in input order regardless of completion order.
    Per-utterance failures are retried, then recorded in a
    ``failures.jsonl`` sidecar in the output directory without aborting;
    the run aborts only if the failure rate exceeds ``failure_ceiling``.
    """
    output_dir = Path(output_dir)
    output_dir.mkdir(parents=True, exist_ok=True)
    jobs = [
        (pair, voice)
        for pair in pairs
        for voice in (voices.female_voice, voices.male_voice)
    ]

    def run_job(job):
        pair, voice = job
        rec_id = f"{pair.id}-{_slug(voice)}"
        try:
            buffer = _call_with_retry(
                lambda: tts.synthesize(pair.source_text, voice, sample_rate),
                what=f"tts {rec_id}",
                retries=retries,
                backoff=backoff,
            )
            if buffer.sample_rate != sample_rate:
                buffer = resample(buffer, sample_rate)
            wav_path = output_dir / f"{rec_id}.wav"
            save_wav(buffer, wav_path)
            return UtteranceRecord(
                id=rec_id,
                audio_path=str(wav_path),
                duration_ms=buffer.duration_ms,
                transcript=pair.source_text,
                translation=pair.target_text,
                audio_origin="synthetic",
                translation_origin="authentic",
                voice=voice,
                dataset=dataset_name,
                split="train",
            )
        except Exception as exc:
            return (rec_id, str(exc))

    if not jobs:
        results = []
    elif max_workers <= 1:
        results = [run_job(job) for job in jobs]
    else:
        with ThreadPoolExecutor(max_workers=max_workers) as pool:
            results = list(pool.map(run_job, jobs))

    records = [r for r in results if isinstance(r, UtteranceRecord)]
    failures = [r for r in results if not isinstance(r, UtteranceRecord)]
    if failures:
        sidecar = output_dir / "failures.jsonl"
        with sidecar.open("w", encoding="utf-8") as handle:
            for rec_id, reason in failures:
                handle.write(json.dumps({"id": rec_id, "error": reason}) + "\n")
        log.warning("synthesis: %d/%d utterances failed; see %s", len(failures), len(jobs), sidecar)
        if len(failures) > failure_ceiling * len(jobs):
            raise ClientError(
                f"synthesis failure rate {len(failures)}/{len(jobs)} exceeds "
                f"ceiling {failure_ceiling:.0%}"
            )
    return DatasetManifest(dataset_name, tuple(records))


def forward_translate(
    records: list[UtteranceRecord],
    mt: MtClient,
    source_lang: str = "ga",
    target_lang: str = "en",
    max_workers: int = DEFAULT_MAX_WORKERS,
    retries: int = DEFAULT_RETRIES,
    backoff: float = 0.5,
) -> list[UtteranceRecord]:
    """Fill missing translations from an MT client.

    Every input record must carry a transcript and no translation.
    Translated records are marked translation_origin="MTed" and forced into
    the train split: machine translations land on the gold labels, so they
    are never eligible for evaluation. Per-record failures are dropped and
    counted.
    """
    for rec in records:
        if not rec.transcript.strip():
            raise ValueError(f"record {rec.id!r} has no transcript")
        if rec.translation.strip():
            raise ValueError(f"record {rec.id!r} already has a translation")

    def run(rec: UtteranceRecord):
        try:
            translation = _call_with_retry(
                lambda: mt.translate(rec.transcript, source_lang, target_lang),
                what=f"mt {rec.id}",
                retries=retries,
                backoff=backoff,
            )
            return replace(rec, translation=translation, translation_origin="MTed", split="train")
        except Exception as exc:
            return (rec.id, str(exc))

    if not records:
        results = []
    elif max_workers <= 1:
        results = [run(rec) for rec in records]
    else:
        with ThreadPoolExecutor(max_workers=max_workers) as pool:
            results = list(pool.map(run, records))
    translated = [r for r in results if isinstance(r, UtteranceRecord)]
    failed = [r for r in results if not isinstance(r, UtteranceRecord)]
    for rec_id, reason in failed:
        log.warning("forward translation failed for %s: %s", rec_id, reason)
    if failed:
        log.warning("forward translation: %d/%d records dropped", len(failed), len(records))
    return translated
