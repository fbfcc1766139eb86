"""Character n-gram language identification.

A small multinomial classifier over character 3-5 grams, trained from the
bundled Irish/English seed corpora on first use. It exists to satisfy the
two-sided language gate offline; any object with a ``top_language`` method
and a ``languages`` attribute can be plugged in instead.
"""

from __future__ import annotations

import math
import unicodedata
from collections import Counter
from functools import lru_cache
from importlib import resources
from typing import Iterable, Protocol

NGRAM_ORDERS = (3, 4, 5)
SEED_FILES = {"ga": "seed_ga.txt", "en": "seed_en.txt"}


class LanguageClassifier(Protocol):
    languages: tuple[str, ...]

    def top_language(self, text: str) -> str: ...


def _normalize(text: str) -> str:
    text = unicodedata.normalize("NFC", text).casefold()
    return " " + " ".join(text.split()) + " "


def _ngrams(text: str, order: int) -> Iterable[str]:
    return (text[i : i + order] for i in range(len(text) - order + 1))


class NgramLanguageClassifier:
    """Multinomial scorer over character n-grams with add-one smoothing.

    Ties break toward the lexicographically smallest language code so the
    top label is deterministic even for out-of-domain input.
    """

    def __init__(self, corpora: dict[str, Iterable[str]]):
        if not corpora:
            raise ValueError("need at least one training corpus")
        counts: dict[str, dict[int, Counter]] = {}
        for lang, lines in corpora.items():
            per_order = {order: Counter() for order in NGRAM_ORDERS}
            for line in lines:
                norm = _normalize(line)
                for order in NGRAM_ORDERS:
                    per_order[order].update(_ngrams(norm, order))
            counts[lang] = per_order
        # shared vocabulary per order keeps smoothing comparable across languages
        vocab = {
            order: len({g for per_order in counts.values() for g in per_order[order]}) + 1
            for order in NGRAM_ORDERS
        }
        self.languages = tuple(sorted(counts))
        self._logprob: dict[str, dict[int, dict[str, float]]] = {}
        self._fallback: dict[str, dict[int, float]] = {}
        for lang, per_order in counts.items():
            self._logprob[lang] = {}
            self._fallback[lang] = {}
            for order in NGRAM_ORDERS:
                total = sum(per_order[order].values())
                denom = total + vocab[order]
                self._logprob[lang][order] = {
                    gram: math.log((count + 1) / denom)
                    for gram, count in per_order[order].items()
                }
                self._fallback[lang][order] = math.log(1 / denom)

    def score(self, text: str, lang: str) -> float:
        norm = _normalize(text)
        table = self._logprob[lang]
        fallback = self._fallback[lang]
        total = 0.0
        for order in NGRAM_ORDERS:
            per_order = table[order]
            miss = fallback[order]
            for gram in _ngrams(norm, order):
                total += per_order.get(gram, miss)
        return total

    def top_language(self, text: str) -> str:
        scores = {lang: self.score(text, lang) for lang in self.languages}
        top = max(scores.values())
        return min(lang for lang, s in scores.items() if s == top)


def _read_seed(name: str) -> list[str]:
    data = resources.files("corvox.data").joinpath(name).read_text(encoding="utf-8")
    return [line for line in data.splitlines() if line.strip()]


@lru_cache(maxsize=1)
def builtin_classifier() -> NgramLanguageClassifier:
    """Irish/English classifier trained from the bundled seed corpora."""
    return NgramLanguageClassifier({lang: _read_seed(f) for lang, f in SEED_FILES.items()})
