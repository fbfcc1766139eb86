"""Dataset manifests: record schema, JSONL persistence, duration statistics,
and composition of the named training recipes.

A manifest is an ordered list of utterance records. Statistics and recipe
composition are pure arithmetic over records; hours are summed exactly in
milliseconds and formatted once at the end to avoid per-dataset rounding
drift.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path

from .errors import ManifestError

log = logging.getLogger(__name__)

AUDIO_ORIGINS = ("authentic", "synthetic")
TRANSLATION_ORIGINS = ("authentic", "MTed")
SPLITS = ("train", "test")
VARIANTS = ("original", "basic_vad", "noise", "silence", "gain")

IWSLT = "IWSLT-2023"
FLEURS = "FLEURS"
BITESIZE = "Bitesize"
SPOKENWORDS = "SpokenWords"
TATOEBA = "Tatoeba-Speech"
WIKIMEDIA = "Wikimedia-Speech"
EUBOOKSHOP = "EUbookshop-Speech"

ALL_DATASETS = (IWSLT, FLEURS, BITESIZE, SPOKENWORDS, TATOEBA, WIKIMEDIA, EUBOOKSHOP)

_AUTHENTIC = [IWSLT, FLEURS, BITESIZE, SPOKENWORDS]
RECIPES = {
    "A": _AUTHENTIC,
    "B": _AUTHENTIC + [TATOEBA, WIKIMEDIA],
    "B++": _AUTHENTIC + [TATOEBA, WIKIMEDIA, EUBOOKSHOP],
    # "C" composes the same datasets as B; the tripling to the augmented
    # training set happens in the augment step, not here.
    "C": _AUTHENTIC + [TATOEBA, WIKIMEDIA],
}

_FIELDS = (
    "id",
    "audio_path",
    "duration_ms",
    "transcript",
    "translation",
    "audio_origin",
    "translation_origin",
    "voice",
    "dataset",
    "split",
    "variant",
)
_REQUIRED_FIELDS = tuple(f for f in _FIELDS if f not in ("voice", "variant"))


@dataclass(frozen=True)
class UtteranceRecord:
    """One (audio, transcript, translation) triple with provenance flags."""

    id: str
    audio_path: str
    duration_ms: int
    transcript: str
    translation: str
    audio_origin: str
    translation_origin: str
    dataset: str
    split: str
    voice: str | None = None
    variant: str | None = None

    def __post_init__(self):
        if self.duration_ms <= 0:
            raise ManifestError(f"record {self.id!r}: duration_ms must be positive")
        if self.audio_origin not in AUDIO_ORIGINS:
            raise ManifestError(f"record {self.id!r}: bad audio_origin {self.audio_origin!r}")
        if self.translation_origin not in TRANSLATION_ORIGINS:
            raise ManifestError(
                f"record {self.id!r}: bad translation_origin {self.translation_origin!r}"
            )
        if self.split not in SPLITS:
            raise ManifestError(f"record {self.id!r}: bad split {self.split!r}")
        if self.split == "test" and self.translation_origin == "MTed":
            raise ManifestError(
                f"record {self.id!r}: machine-translated records are train-only"
            )
        if self.audio_origin == "synthetic" and not self.voice:
            raise ManifestError(f"record {self.id!r}: synthetic audio needs a voice id")
        if self.variant is not None and self.variant not in VARIANTS:
            raise ManifestError(f"record {self.id!r}: bad variant {self.variant!r}")

    def as_dict(self) -> dict:
        return {name: getattr(self, name) for name in _FIELDS}


@dataclass(frozen=True)
class DatasetManifest:
    """Ordered records plus a dataset name; ids must be unique."""

    name: str
    records: tuple[UtteranceRecord, ...] = field(default_factory=tuple)

    def __post_init__(self):
        records = tuple(self.records)
        object.__setattr__(self, "records", records)
        seen = set()
        for rec in records:
            if rec.id in seen:
                raise ManifestError(f"duplicate record id {rec.id!r} in manifest {self.name!r}")
            seen.add(rec.id)

    def __len__(self) -> int:
        return len(self.records)

    def __iter__(self):
        return iter(self.records)


@dataclass(frozen=True)
class DatasetStats:
    train_hours: str
    train_segments: int
    test_segments: int
    train_duration_ms: int = 0

    def as_dict(self) -> dict:
        return {
            "train_hours": self.train_hours,
            "train_segments": self.train_segments,
            "test_segments": self.test_segments,
            "train_duration_ms": self.train_duration_ms,
        }


def format_duration(total_seconds: float) -> str:
    """Render seconds as "H:MM", flooring to whole minutes."""
    if total_seconds < 0:
        raise ValueError("total_seconds must be non-negative")
    minutes = int(total_seconds // 60)
    return f"{minutes // 60}:{minutes % 60:02d}"


def compute_stats(manifest: DatasetManifest) -> DatasetStats:
    """Split-level segment counts and exact train hours for one manifest."""
    train_ms = 0
    train_segments = 0
    test_segments = 0
    for rec in manifest:
        if rec.split == "train":
            train_ms += rec.duration_ms
            train_segments += 1
        else:
            test_segments += 1
    return DatasetStats(
        train_hours=format_duration(train_ms / 1000),
        train_segments=train_segments,
        test_segments=test_segments,
        train_duration_ms=train_ms,
    )


def per_dataset_stats(manifest: DatasetManifest) -> dict[str, DatasetStats]:
    """Stats broken out by each record's source dataset, in first-seen order."""
    groups: dict[str, list[UtteranceRecord]] = {}
    for rec in manifest:
        groups.setdefault(rec.dataset, []).append(rec)
    return {
        name: compute_stats(DatasetManifest(name, tuple(records)))
        for name, records in groups.items()
    }


def compose(datasets: dict[str, DatasetManifest], recipe: str) -> DatasetManifest:
    """Concatenate the named datasets for one training recipe.

    All seven dataset names must be present regardless of recipe. Record
    order is dataset order then original order. The test split is taken
    from IWSLT-2023 only; test records in any other dataset are dropped
    with a warning.
    """
    if recipe not in RECIPES:
        raise ManifestError(f"unknown recipe {recipe!r}; expected one of {sorted(RECIPES)}")
    missing = [name for name in ALL_DATASETS if name not in datasets]
    if missing:
        raise ManifestError(f"missing datasets: {', '.join(missing)}")
    records: list[UtteranceRecord] = []
    for name in RECIPES[recipe]:
        for rec in datasets[name]:
            if rec.split == "test" and name != IWSLT:
                log.warning("dropping test record %s: test split comes from %s only", rec.id, IWSLT)
                continue
            records.append(rec)
    return DatasetManifest(recipe, tuple(records))


def load_manifest(path, name: str | None = None) -> DatasetManifest:
    """Read a JSONL manifest, one record per line.

    Malformed lines raise ManifestError naming the line number.
    """
    path = Path(path)
    records = []
    with path.open(encoding="utf-8") as handle:
        for lineno, line in enumerate(handle, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                raw = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ManifestError(f"{path}:{lineno}: invalid JSON: {exc}") from exc
            missing = [f for f in _REQUIRED_FIELDS if f not in raw]
            if missing:
                raise ManifestError(f"{path}:{lineno}: missing fields: {', '.join(missing)}")
            unknown = [k for k in raw if k not in _FIELDS]
            if unknown:
                raise ManifestError(f"{path}:{lineno}: unknown fields: {', '.join(unknown)}")
            try:
                records.append(UtteranceRecord(**raw))
            except ManifestError as exc:
                raise ManifestError(f"{path}:{lineno}: {exc}") from exc
    return DatasetManifest(name or path.stem, tuple(records))


def save_manifest(manifest: DatasetManifest, path) -> None:
    path = Path(path)
    with path.open("w", encoding="utf-8") as handle:
        for rec in manifest:
            handle.write(json.dumps(rec.as_dict(), ensure_ascii=False) + "\n")

