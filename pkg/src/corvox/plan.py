"""Training-experiment bookkeeping: warm-up and epoch arithmetic, the
training/inference configuration records, and best-checkpoint selection.

This module records and checks configuration arithmetic only; it launches
no training.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from decimal import ROUND_HALF_UP, Decimal

from .vad import VadParams


@dataclass(frozen=True)
class TrainingConfig:
    learning_rate: float = 1e-4
    batch_size: int = 16
    total_steps: int = 3000
    warmup_ratio: float = 0.0
    max_generation_length: int = 225
    task_language: str = "en"

    def __post_init__(self):
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be positive")
        if self.batch_size < 1:
            raise ValueError("batch_size must be at least 1")
        if not 0.0 <= self.warmup_ratio <= 1.0:
            raise ValueError("warmup_ratio must be in [0, 1]")
        if self.total_steps < 0:
            raise ValueError("total_steps must be non-negative")


@dataclass(frozen=True)
class InferenceConfig:
    beam_size: int = 5
    no_repeat_ngram_size: int = 2
    vad: VadParams = field(default_factory=VadParams)

    def __post_init__(self):
        if self.beam_size < 1:
            raise ValueError("beam_size must be at least 1")


@dataclass(frozen=True)
class CheckpointEval:
    step: int
    chrf_pp: float

    def __post_init__(self):
        if self.step < 0:
            raise ValueError("step must be non-negative")


def warmup_steps(ratio: float, total_steps: int) -> int:
    """round(ratio * total_steps)."""
    if not 0.0 <= ratio <= 1.0:
        raise ValueError("ratio must be in [0, 1]")
    if total_steps < 0:
        raise ValueError("total_steps must be non-negative")
    return int(round(ratio * total_steps))


def epochs(steps: int, batch_size: int, dataset_segments: int) -> float:
    """steps * batch_size / dataset_segments, rounded half-up to 2 decimals."""
    if dataset_segments < 1:
        raise ValueError("dataset_segments must be at least 1")
    value = Decimal(steps * batch_size) / Decimal(dataset_segments)
    return float(value.quantize(Decimal("0.01"), rounding=ROUND_HALF_UP))


def select_best_checkpoint(evals: list[CheckpointEval]) -> CheckpointEval:
    """The checkpoint with maximal chrF++; ties go to the earliest step."""
    if not evals:
        raise ValueError("need at least one checkpoint evaluation")
    return max(evals, key=lambda e: (e.chrf_pp, -e.step))


def experiment_card(
    training: TrainingConfig,
    inference: InferenceConfig,
    dataset_segments: int,
    step_milestones: list[int] = (),
) -> dict:
    """JSON-ready summary: warm-up steps, epoch milestones, full config echo.

    An unbounded max speech duration serializes as null so the card stays
    strict JSON.
    """
    inference_dict = asdict(inference)
    if math.isinf(inference_dict["vad"]["max_speech_duration_s"]):
        inference_dict["vad"]["max_speech_duration_s"] = None
    return {
        "dataset_segments": dataset_segments,
        "warmup_steps": warmup_steps(training.warmup_ratio, training.total_steps),
        "epoch_milestones": [
            {"steps": s, "epochs": epochs(s, training.batch_size, dataset_segments)}
            for s in step_milestones
        ],
        "training": asdict(training),
        "inference": inference_dict,
    }
