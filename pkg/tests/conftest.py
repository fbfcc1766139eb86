import random

import numpy as np
import pytest

from corvox.audio import AudioBuffer, save_wav
from corvox.manifest import DatasetManifest, UtteranceRecord
from corvox.metrics import EvalPair

_WORDS = [
    "the", "cat", "sat", "on", "mat", "dog", "ran", "fast", "river", "stone",
    "went", "home", "green", "light", "word", "night", "tree", "bird", "song",
    "cloud", "rain", "summer", "road", "house", "door", "hand", "fire", "cold",
    "sea", "boat", "teanga", "focal", "oíche", "solas", "abhainn", "ceol",
]
_PUNCT = [",", ".", "!", "?", ";", ":", "-", "(", ")", '"', "'"]
_NUMERIC = ["3", "42", "3.5", "1,000", "2-3", "7.", "100"]


def random_sentence(rng: random.Random, max_tokens: int = 20) -> str:
    n = rng.randint(1, max_tokens)
    tokens = []
    for _ in range(n):
        roll = rng.random()
        if roll < 0.78:
            tokens.append(rng.choice(_WORDS))
        elif roll < 0.9:
            tokens.append(rng.choice(_PUNCT))
        else:
            tokens.append(rng.choice(_NUMERIC))
    return " ".join(tokens)


def perturb(rng: random.Random, sentence: str) -> str:
    """A hypothesis sharing n-grams with the reference: random token edits."""
    tokens = sentence.split()
    out = []
    for tok in tokens:
        roll = rng.random()
        if roll < 0.12:
            continue  # drop
        if roll < 0.22:
            out.append(rng.choice(_WORDS))  # substitute
        else:
            out.append(tok)
        if rng.random() < 0.08:
            out.append(rng.choice(_WORDS))  # insert
    return " ".join(out)


def random_eval_pairs(seed: int, n: int, max_tokens: int = 20) -> list[EvalPair]:
    """Randomized corpus for oracle comparison: mixed exact matches, edited
    hypotheses, unrelated hypotheses, and a few empty hypotheses."""
    rng = random.Random(seed)
    pairs = []
    for _ in range(n):
        ref = random_sentence(rng, max_tokens)
        roll = rng.random()
        if roll < 0.1:
            hyp = ref
        elif roll < 0.8:
            hyp = perturb(rng, ref)
        elif roll < 0.95:
            hyp = random_sentence(rng, max_tokens)
        else:
            hyp = ""
        pairs.append(EvalPair(hypothesis=hyp, reference=ref))
    return pairs


def make_tone(duration_s=1.0, freq=440.0, amplitude=0.3, rate=16000):
    t = np.arange(int(duration_s * rate)) / rate
    return amplitude * np.sin(2 * np.pi * freq * t)


def make_record(i, dataset="toy", split="train", duration_ms=1000, **overrides):
    fields = dict(
        id=f"{dataset}-{i:06d}",
        audio_path=f"/audio/{dataset}/{i:06d}.wav",
        duration_ms=duration_ms,
        transcript=f"abairt uimhir {i}",
        translation=f"sentence number {i}",
        audio_origin="authentic",
        translation_origin="authentic",
        dataset=dataset,
        split=split,
    )
    fields.update(overrides)
    return UtteranceRecord(**fields)


def make_manifest(name, n_train, n_test=0, duration_ms=1000):
    records = [make_record(i, dataset=name, duration_ms=duration_ms) for i in range(n_train)]
    records += [
        make_record(n_train + i, dataset=name, split="test", duration_ms=duration_ms)
        for i in range(n_test)
    ]
    return DatasetManifest(name, tuple(records))


@pytest.fixture
def tone_buffer():
    return AudioBuffer(make_tone(), 16000)


@pytest.fixture
def wav_file(tmp_path, tone_buffer):
    path = tmp_path / "tone.wav"
    save_wav(tone_buffer, path)
    return path
