"""Pipeline configuration: a JSON file of defaults that CLI flags override.

Flags win over file values; file values win over built-in defaults. Client
credentials never live in the file; they come from environment variables
(CORVOX_TTS_API_KEY, CORVOX_MT_API_KEY, CORVOX_EMBED_API_KEY).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, fields
from pathlib import Path

from .augment import AugmentRecipe
from .errors import ConfigError
from .plan import InferenceConfig, TrainingConfig
from .vad import VadParams


@dataclass(frozen=True)
class PipelineConfig:
    source_lang: str = "ga"
    target_lang: str = "en"
    max_words: int = 30
    source_wordlist: str | None = None
    target_wordlist: str | None = None
    tts_url: str = "mock:"
    mt_url: str = "mock:"
    embedder_urls: tuple[str, ...] = ("mock:",)
    sample_rate: int = 16000
    female_voice: str = "female-1"
    male_voice: str = "male-1"
    recipe: str = "B"
    seed: int = 0
    max_workers: int = 8
    retries: int = 3
    failure_ceiling: float = 0.10
    vad: VadParams = field(default_factory=VadParams)
    augment: AugmentRecipe = field(default_factory=AugmentRecipe)
    training: TrainingConfig = field(default_factory=TrainingConfig)
    inference: InferenceConfig = field(default_factory=InferenceConfig)


_NESTED = {
    "vad": VadParams,
    "augment": AugmentRecipe,
    "training": TrainingConfig,
    "inference": InferenceConfig,
}
_TUPLE_FIELDS = {"silence_ms", "gain_range", "embedder_urls"}


def _build(cls, raw: dict, origin: str):
    known = {f.name for f in fields(cls)}
    unknown = set(raw) - known
    if unknown:
        raise ConfigError(f"{origin}: unknown keys: {', '.join(sorted(unknown))}")
    kwargs = {}
    for key, value in raw.items():
        if key in _NESTED and isinstance(value, dict):
            value = _build(_NESTED[key], value, f"{origin}.{key}")
        elif key in _TUPLE_FIELDS and isinstance(value, list):
            value = tuple(value)
        kwargs[key] = value
    try:
        return cls(**kwargs)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{origin}: {exc}") from exc


def load_config(path=None) -> PipelineConfig:
    """Load a JSON config file, or the built-in defaults when path is None."""
    if path is None:
        return PipelineConfig()
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigError(f"{path}: top level must be a JSON object")
    if "inference" in raw and isinstance(raw["inference"], dict) and isinstance(
        raw["inference"].get("vad"), dict
    ):
        raw["inference"] = dict(raw["inference"])
        raw["inference"]["vad"] = _build(VadParams, raw["inference"]["vad"], f"{path}.inference.vad")
    return _build(PipelineConfig, raw, str(path))
