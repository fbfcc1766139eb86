"""Parallel-text filtering: dedup, length cap, two-sided language ID, and
toxicity wordlists, with a per-stage attrition report.

Each stage is a pure filter (output is a subsequence of input), so the
pipeline is idempotent and the report always reconciles:
input - sum(removed per stage) = output.
"""

from __future__ import annotations

import logging
import re
import unicodedata
from dataclasses import dataclass, field
from pathlib import Path

from .errors import ConfigError
from .langid import LanguageClassifier, builtin_classifier

log = logging.getLogger(__name__)

DEFAULT_MAX_WORDS = 30


@dataclass(frozen=True)
class TextPair:
    """One parallel segment: source-language and target-language text."""

    id: str
    source_text: str
    target_text: str
    origin: str = ""

    def __post_init__(self):
        if not self.source_text.strip() or not self.target_text.strip():
            raise ValueError(f"pair {self.id!r}: both sides must be non-empty")


@dataclass(frozen=True)
class FilterReport:
    input: int
    removed_dedup: int
    removed_length: int
    removed_langid: int
    removed_toxicity: int
    output: int

    def __post_init__(self):
        removed = (
            self.removed_dedup
            + self.removed_length
            + self.removed_langid
            + self.removed_toxicity
        )
        if self.input - removed != self.output or min(self.as_dict().values()) < 0:
            raise ValueError(f"filter report does not reconcile: {self.as_dict()}")

    def as_dict(self) -> dict:
        return {
            "input": self.input,
            "removed_dedup": self.removed_dedup,
            "removed_length": self.removed_length,
            "removed_langid": self.removed_langid,
            "removed_toxicity": self.removed_toxicity,
            "output": self.output,
        }


def normalize_text(text: str) -> str:
    """Trim, collapse internal whitespace, and apply Unicode NFC."""
    return " ".join(unicodedata.normalize("NFC", text).split())


def dedup(pairs) -> list[TextPair]:
    """Keep the first occurrence of each normalized (source, target) pair."""
    seen = set()
    kept = []
    for pair in pairs:
        key = (normalize_text(pair.source_text), normalize_text(pair.target_text))
        if key in seen:
            continue
        seen.add(key)
        kept.append(pair)
    return kept


def length_filter(pairs, max_words: int = DEFAULT_MAX_WORDS) -> list[TextPair]:
    """Drop pairs where either side has strictly more than max_words tokens."""
    if max_words < 1:
        raise ValueError("max_words must be at least 1")
    return [
        p
        for p in pairs
        if len(p.source_text.split()) <= max_words and len(p.target_text.split()) <= max_words
    ]


def lang_gate(
    pairs,
    source_lang: str,
    target_lang: str,
    classifier: LanguageClassifier | None = None,
) -> list[TextPair]:
    """Keep pairs whose top language label matches on both sides."""
    clf = classifier if classifier is not None else builtin_classifier()
    for lang in (source_lang, target_lang):
        if lang not in clf.languages:
            raise ConfigError(f"classifier does not support language {lang!r}")
    kept = []
    for pair in pairs:
        try:
            if (
                clf.top_language(pair.source_text) == source_lang
                and clf.top_language(pair.target_text) == target_lang
            ):
                kept.append(pair)
        except Exception as exc:  # classifier failure counts as removal
            log.warning("language id failed for pair %s: %s", pair.id, exc)
    return kept


def _wordlist_pattern(wordlist) -> re.Pattern | None:
    tokens = sorted(set(wordlist))
    if not tokens:
        return None
    alternatives = "|".join(re.escape(tok) for tok in tokens)
    return re.compile(rf"(?<!\w)(?:{alternatives})(?!\w)", re.IGNORECASE)


def toxicity_filter(pairs, source_wordlist=(), target_wordlist=()) -> list[TextPair]:
    """Drop pairs where either side contains a listed token.

    Matching is case-insensitive on word boundaries, so a listed token
    inside a longer word does not count.
    """
    src_pat = _wordlist_pattern(source_wordlist)
    tgt_pat = _wordlist_pattern(target_wordlist)
    kept = []
    for pair in pairs:
        if src_pat is not None and src_pat.search(pair.source_text):
            continue
        if tgt_pat is not None and tgt_pat.search(pair.target_text):
            continue
        kept.append(pair)
    return kept


def load_wordlist(path) -> frozenset[str]:
    """One lowercase token per line, UTF-8."""
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"wordlist not found: {path}")
    tokens = set()
    for line in path.read_text(encoding="utf-8").splitlines():
        token = line.strip().lower()
        if token:
            tokens.add(token)
    return frozenset(tokens)


@dataclass(frozen=True)
class FilterConfig:
    source_lang: str = "ga"
    target_lang: str = "en"
    max_words: int = DEFAULT_MAX_WORDS
    source_wordlist: frozenset[str] = frozenset()
    target_wordlist: frozenset[str] = frozenset()
    classifier: LanguageClassifier | None = field(default=None, compare=False)


def filter_pipeline(pairs, config: FilterConfig) -> tuple[list[TextPair], FilterReport]:
    """Run all four stages in order: dedup, length, language ID, toxicity."""
    pairs = list(pairs)
    total = len(pairs)
    after_dedup = dedup(pairs)
    after_length = length_filter(after_dedup, config.max_words)
    after_lang = lang_gate(
        after_length, config.source_lang, config.target_lang, config.classifier
    )
    after_tox = toxicity_filter(after_lang, config.source_wordlist, config.target_wordlist)
    report = FilterReport(
        input=total,
        removed_dedup=total - len(after_dedup),
        removed_length=len(after_dedup) - len(after_length),
        removed_langid=len(after_length) - len(after_lang),
        removed_toxicity=len(after_lang) - len(after_tox),
        output=len(after_tox),
    )
    return after_tox, report


def read_pairs_tsv(path, origin: str = "") -> list[TextPair]:
    """Read source<TAB>target lines; blank lines are skipped."""
    path = Path(path)
    pairs = []
    for lineno, line in enumerate(path.read_text(encoding="utf-8").splitlines(), start=1):
        if not line.strip():
            continue
        parts = line.split("\t")
        if len(parts) != 2:
            raise ValueError(f"{path}:{lineno}: expected 2 tab-separated columns, got {len(parts)}")
        try:
            pairs.append(
                TextPair(
                    id=f"{path.stem}-{lineno:05d}",
                    source_text=parts[0],
                    target_text=parts[1],
                    origin=origin or path.stem,
                )
            )
        except ValueError as exc:
            raise ValueError(f"{path}:{lineno}: {exc}") from exc
    return pairs


def read_pairs_aligned(source_path, target_path, origin: str = "") -> list[TextPair]:
    """Read two aligned line-per-segment files."""
    src_lines = Path(source_path).read_text(encoding="utf-8").splitlines()
    tgt_lines = Path(target_path).read_text(encoding="utf-8").splitlines()
    if len(src_lines) != len(tgt_lines):
        raise ValueError(
            f"aligned files differ in length: {len(src_lines)} vs {len(tgt_lines)} lines"
        )
    stem = Path(source_path).stem
    return [
        TextPair(id=f"{stem}-{i:05d}", source_text=src, target_text=tgt, origin=origin or stem)
        for i, (src, tgt) in enumerate(zip(src_lines, tgt_lines), start=1)
    ]


def write_pairs_tsv(pairs, path) -> None:
    with Path(path).open("w", encoding="utf-8") as handle:
        for pair in pairs:
            handle.write(f"{pair.source_text}\t{pair.target_text}\n")


def write_pairs_aligned(pairs, source_path, target_path) -> None:
    pairs = list(pairs)
    Path(source_path).write_text(
        "".join(p.source_text + "\n" for p in pairs), encoding="utf-8"
    )
    Path(target_path).write_text(
        "".join(p.target_text + "\n" for p in pairs), encoding="utf-8"
    )
