import random

import pytest

from corvox.plan import (
    CheckpointEval,
    InferenceConfig,
    TrainingConfig,
    epochs,
    experiment_card,
    select_best_checkpoint,
    warmup_steps,
)

# (steps, dataset segments) -> printed epoch value, batch size 16 throughout
EPOCH_TABLE = [
    (2000, 29663, 1.08),
    (4000, 29663, 2.16),
    (4000, 48719, 1.31),
    (7000, 48719, 2.30),
    (4000, 115987, 0.55),
    (8000, 115987, 1.10),
    (15000, 115987, 2.07),
    (4000, 146157, 0.44),
    (10000, 146157, 1.09),
    (19000, 146157, 2.08),
]


class TestWarmupSteps:
    def test_three_percent_of_3000(self):
        assert warmup_steps(0.03, 3000) == 90

    def test_one_percent_of_3000(self):
        assert warmup_steps(0.01, 3000) == 30

    def test_zero(self):
        assert warmup_steps(0.0, 3000) == 0

    def test_monotone(self):
        rng = random.Random(0)
        for _ in range(200):
            total = rng.randint(0, 100000)
            r1, r2 = sorted((rng.random(), rng.random()))
            assert warmup_steps(r1, total) <= warmup_steps(r2, total)

    def test_bounds_checked(self):
        with pytest.raises(ValueError):
            warmup_steps(1.5, 100)
        with pytest.raises(ValueError):
            warmup_steps(0.5, -1)


class TestEpochs:
    @pytest.mark.parametrize("steps,segments,expected", EPOCH_TABLE)
    def test_published_epoch_values(self, steps, segments, expected):
        assert epochs(steps, 16, segments) == pytest.approx(expected, abs=0.01)

    def test_zero_steps(self):
        assert epochs(0, 16, 29663) == 0.0

    def test_linear_before_rounding(self):
        rng = random.Random(1)
        for _ in range(100):
            steps = rng.randint(1, 10**5)
            batch = rng.randint(1, 64)
            segments = rng.randint(1, 10**6)
            raw = steps * batch / segments
            assert abs(epochs(steps, batch, segments) - raw) <= 0.005 + 1e-9

    def test_half_up_rounding(self):
        assert epochs(1005, 1, 10000) == 0.10  # 0.1005 -> 0.10
        assert epochs(25, 1, 1000) == 0.03  # 0.025 ties up to 0.03

    def test_zero_segments_rejected(self):
        with pytest.raises(ValueError):
            epochs(100, 16, 0)


class TestSelectBestCheckpoint:
    def test_later_better_checkpoint_wins(self):
        evals = [CheckpointEval(2000, 47.03), CheckpointEval(4000, 48.95)]
        assert select_best_checkpoint(evals).step == 4000

    def test_single_element(self):
        only = CheckpointEval(100, 10.0)
        assert select_best_checkpoint([only]) is only

    def test_tie_goes_to_earliest_step(self):
        evals = [CheckpointEval(200, 50.0), CheckpointEval(100, 50.0)]
        assert select_best_checkpoint(evals).step == 100

    def test_permutation_invariant(self):
        rng = random.Random(2)
        evals = [CheckpointEval(s * 100, round(rng.uniform(10, 60), 2)) for s in range(20)]
        best = select_best_checkpoint(evals)
        for _ in range(10):
            rng.shuffle(evals)
            assert select_best_checkpoint(evals) == best

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            select_best_checkpoint([])


class TestConfigs:
    def test_training_defaults(self):
        config = TrainingConfig()
        assert config.learning_rate == 1e-4
        assert config.max_generation_length == 225
        assert config.task_language == "en"

    def test_inference_defaults(self):
        config = InferenceConfig()
        assert (config.beam_size, config.no_repeat_ngram_size) == (5, 2)
        assert config.vad.threshold == 0.5

    def test_validation(self):
        with pytest.raises(ValueError):
            TrainingConfig(learning_rate=0)
        with pytest.raises(ValueError):
            TrainingConfig(warmup_ratio=1.5)
        with pytest.raises(ValueError):
            InferenceConfig(beam_size=0)


class TestExperimentCard:
    def test_card_contents(self):
        training = TrainingConfig(total_steps=3000, warmup_ratio=0.03)
        card = experiment_card(training, InferenceConfig(), 48719, [4000, 7000])
        assert card["warmup_steps"] == 90
        assert card["epoch_milestones"] == [
            {"steps": 4000, "epochs": 1.31},
            {"steps": 7000, "epochs": 2.30},
        ]
        assert card["training"]["max_generation_length"] == 225
        assert card["inference"]["beam_size"] == 5
        assert card["inference"]["vad"]["max_speech_duration_s"] is None
