"""Corpus-level translation metrics: BLEU, chrF++, WER, and embedding-cosine
semantic similarity.

All scores are deterministic functions of the pair list and invariant under
pair reordering. Parameters are pinned and printed in the report signature:

* BLEU: 4-gram corpus BLEU over pooled counts, 13a-style tokenization,
  exponential smoothing of zero precisions (the k-th consecutive zero
  n-gram precision becomes 1 / (2^k * total)), brevity penalty
  exp(min(0, 1 - ref_len / hyp_len)), scaled to [0, 100].
* chrF++: character n-grams 1..6 on whitespace-stripped text plus word
  n-grams 1..2 on punctuation-separated tokens, F-beta with beta=2,
  per-order F averaged over all eight orders, scaled to [0, 100].
* WER: word edit distance (unit costs) over lowercased,
  punctuation-stripped tokens, divided by total reference tokens, x100.
* Semantic: mean cosine between hypothesis and reference embeddings, x100.
"""

from __future__ import annotations

import logging
import math
import re
import string
import unicodedata
from pathlib import Path
from collections import Counter
from dataclasses import dataclass, field

from .clients import Embedder
from .errors import CorvoxError

log = logging.getLogger(__name__)

BLEU_ORDER = 4
CHRF_CHAR_ORDER = 6
CHRF_WORD_ORDER = 2
CHRF_BETA = 2.0
CHRF_EPS = 1e-16

SIGNATURE = (
    "bleu:tok=13a|n=4|smooth=exp|bp=closest "
    "chrf:nc=6|nw=2|beta=2|space=removed "
    "wer:case=lower|punct=removed|tok=whitespace "
    "semantic:cosine*100"
)


@dataclass(frozen=True)
class EvalPair:
    hypothesis: str
    reference: str

    def __post_init__(self):
        if not self.reference:
            raise ValueError("reference must be non-empty")


@dataclass(frozen=True)
class MetricReport:
    bleu: float
    chrf_pp: float
    wer: float
    semantic: dict[str, float] = field(default_factory=dict)
    semantic_skipped: dict[str, int] = field(default_factory=dict)
    signature: str = SIGNATURE
    segments: list[dict] = field(default_factory=list)

    def as_dict(self) -> dict:
        return {
            "bleu": self.bleu,
            "chrf_pp": self.chrf_pp,
            "wer": self.wer,
            "semantic": dict(self.semantic),
            "semantic_skipped": dict(self.semantic_skipped),
            "signature": self.signature,
            "segments": list(self.segments),
        }


# ---------------------------------------------------------------- BLEU ----

_13A_PUNCT = re.compile(r"([\{-\~\[-\` -\&\(-\+\:-\@\/])")
_13A_PERIOD_BEFORE = re.compile(r"([^0-9])([\.,])")
_13A_PERIOD_AFTER = re.compile(r"([\.,])([^0-9])")
_13A_DIGIT_DASH = re.compile(r"([0-9])(-)")


def tokenize_13a(line: str) -> list[str]:
    """Minimal international tokenization: punctuation split from words,
    with period/comma kept inside digit groups."""
    norm = line.replace("<skipped>", "")
    norm = norm.replace("-\n", "").replace("\n", " ")
    norm = (
        norm.replace("&quot;", '"')
        .replace("&amp;", "&")
        .replace("&lt;", "<")
        .replace("&gt;", ">")
    )
    norm = f" {norm} "
    norm = _13A_PUNCT.sub(r" \1 ", norm)
    norm = _13A_PERIOD_BEFORE.sub(r"\1 \2 ", norm)
    norm = _13A_PERIOD_AFTER.sub(r" \1 \2", norm)
    norm = _13A_DIGIT_DASH.sub(r"\1 \2 ", norm)
    return norm.split()


def _ngram_counts(tokens: list[str], order: int) -> Counter:
    return Counter(tuple(tokens[i : i + order]) for i in range(len(tokens) - order + 1))


def bleu_statistics(pairs: list[EvalPair]):
    """Pooled sufficient statistics: per-order clipped matches and totals,
    plus corpus hypothesis/reference token lengths."""
    correct = [0] * BLEU_ORDER
    total = [0] * BLEU_ORDER
    hyp_len = 0
    ref_len = 0
    for pair in pairs:
        hyp_tokens = tokenize_13a(pair.hypothesis)
        ref_tokens = tokenize_13a(pair.reference)
        hyp_len += len(hyp_tokens)
        ref_len += len(ref_tokens)
        for n in range(1, BLEU_ORDER + 1):
            hyp_ngrams = _ngram_counts(hyp_tokens, n)
            ref_ngrams = _ngram_counts(ref_tokens, n)
            total[n - 1] += sum(hyp_ngrams.values())
            correct[n - 1] += sum(
                min(count, ref_ngrams[gram]) for gram, count in hyp_ngrams.items()
            )
    return correct, total, hyp_len, ref_len


def bleu(pairs: list[EvalPair]) -> float:
    """Corpus BLEU in [0, 100]. The score is 0 when the pooled hypothesis
    corpus has no n-grams of some order up to 4."""
    if not pairs:
        raise ValueError("bleu needs at least one pair")
    correct, total, hyp_len, ref_len = bleu_statistics(pairs)
    if hyp_len == 0:
        return 0.0
    precisions = []
    smooth = 1.0
    for n in range(1, BLEU_ORDER + 1):
        if total[n - 1] == 0:
            return 0.0
        if correct[n - 1] == 0:
            smooth *= 2.0
            precisions.append(1.0 / (smooth * total[n - 1]))
        else:
            precisions.append(correct[n - 1] / total[n - 1])
    brevity = 1.0 if hyp_len >= ref_len else math.exp(1.0 - ref_len / hyp_len)
    return 100.0 * brevity * math.exp(sum(math.log(p) for p in precisions) / BLEU_ORDER)


# -------------------------------------------------------------- chrF++ ----


def chrf_word_tokens(line: str) -> list[str]:
    """Whitespace tokens with a single leading or trailing punctuation
    character split off (trailing checked first)."""
    tokens = []
    for word in line.split():
        if len(word) == 1:
            tokens.append(word)
        elif word[-1] in string.punctuation:
            tokens.extend([word[:-1], word[-1]])
        elif word[0] in string.punctuation:
            tokens.extend([word[0], word[1:]])
        else:
            tokens.append(word)
    return tokens


def _char_ngram_counts(text: str, order: int) -> Counter:
    return Counter(text[i : i + order] for i in range(len(text) - order + 1))


def chrf_statistics(pairs: list[EvalPair]):
    """Pooled (hyp_total, ref_total, matched) per order: six character
    orders then two word orders."""
    orders = CHRF_CHAR_ORDER + CHRF_WORD_ORDER
    stats = [[0, 0, 0] for _ in range(orders)]
    for pair in pairs:
        hyp_chars = "".join(pair.hypothesis.split())
        ref_chars = "".join(pair.reference.split())
        hyp_words = chrf_word_tokens(pair.hypothesis)
        ref_words = chrf_word_tokens(pair.reference)
        for i in range(orders):
            if i < CHRF_CHAR_ORDER:
                hyp_counts = _char_ngram_counts(hyp_chars, i + 1)
                ref_counts = _char_ngram_counts(ref_chars, i + 1)
            else:
                n = i - CHRF_CHAR_ORDER + 1
                hyp_counts = _ngram_counts(hyp_words, n)
                ref_counts = _ngram_counts(ref_words, n)
            stats[i][0] += sum(hyp_counts.values())
            stats[i][1] += sum(ref_counts.values())
            stats[i][2] += sum((hyp_counts & ref_counts).values())
    return stats


def chrf_pp(pairs: list[EvalPair]) -> float:
    """chrF++ in [0, 100]: mean per-order F-beta over pooled statistics."""
    if not pairs:
        raise ValueError("chrf_pp needs at least one pair")
    stats = chrf_statistics(pairs)
    factor = CHRF_BETA * CHRF_BETA
    score = 0.0
    for hyp_total, ref_total, matched in stats:
        precision = matched / hyp_total if hyp_total > 0 else CHRF_EPS
        recall = matched / ref_total if ref_total > 0 else CHRF_EPS
        denom = factor * precision + recall
        score += (1 + factor) * precision * recall / denom if denom > 0 else CHRF_EPS
    return 100.0 * score / len(stats)


# ----------------------------------------------------------------- WER ----


def _is_punct(ch: str) -> bool:
    return unicodedata.category(ch).startswith("P")


_punct_cache: dict[str, bool] = {}


def wer_tokens(text: str) -> list[str]:
    """Lowercase and whitespace-split after removing punctuation characters."""
    out = []
    for ch in text:
        known = _punct_cache.get(ch)
        if known is None:
            known = _is_punct(ch)
            _punct_cache[ch] = known
        if not known:
            out.append(ch)
    return "".join(out).lower().split()


def word_edit_distance(hyp: list[str], ref: list[str]) -> int:
    """Levenshtein distance over token sequences with unit costs."""
    if not hyp:
        return len(ref)
    if not ref:
        return len(hyp)
    previous = list(range(len(ref) + 1))
    for i, h_tok in enumerate(hyp, start=1):
        current = [i] + [0] * len(ref)
        for j, r_tok in enumerate(ref, start=1):
            cost = 0 if h_tok == r_tok else 1
            current[j] = min(previous[j] + 1, current[j - 1] + 1, previous[j - 1] + cost)
        previous = current
    return previous[-1]


def wer(pairs: list[EvalPair]) -> float:
    """Corpus WER x100: summed word edits over summed reference lengths."""
    if not pairs:
        raise ValueError("wer needs at least one pair")
    edits = 0
    ref_tokens = 0
    for pair in pairs:
        ref = wer_tokens(pair.reference)
        if not ref:
            raise ValueError(f"reference has no tokens after normalization: {pair.reference!r}")
        hyp = wer_tokens(pair.hypothesis)
        edits += word_edit_distance(hyp, ref)
        ref_tokens += len(ref)
    return 100.0 * edits / ref_tokens


# ------------------------------------------------------------ semantic ----


def cosine(u: list[float], v: list[float]) -> float:
    """Cosine computed as dot / sqrt(|u|^2 * |v|^2), which returns exactly
    1.0 for identical vectors."""
    dot = sum(a * b for a, b in zip(u, v))
    nu = sum(a * a for a in u)
    nv = sum(b * b for b in v)
    norm = math.sqrt(nu * nv)
    if norm == 0.0:
        raise ZeroDivisionError("zero-norm vector")
    return dot / norm


def pair_cosines(
    pairs: list[EvalPair], embedder: Embedder, batch_size: int = 32
) -> list[float | None]:
    """Per-pair cosine x100, with None for pairs whose hypothesis or
    reference embeds to a zero-norm vector."""
    texts = [p.hypothesis for p in pairs] + [p.reference for p in pairs]
    vectors: list[list[float]] = []
    for start in range(0, len(texts), batch_size):
        vectors.extend(embedder.embed(texts[start : start + batch_size]))
    n = len(pairs)
    out: list[float | None] = []
    for i in range(n):
        try:
            out.append(100.0 * cosine(vectors[i], vectors[n + i]))
        except ZeroDivisionError:
            out.append(None)
            log.warning("semantic: skipping pair %d (zero-norm embedding)", i)
    return out


def semantic_similarity(
    pairs: list[EvalPair], embedder: Embedder, batch_size: int = 32
) -> tuple[float, int]:
    """Mean cosine similarity x100 plus the count of skipped pairs.

    Pairs whose hypothesis or reference embeds to a zero-norm vector are
    skipped with a warning. Batching never changes the result.
    """
    if not pairs:
        raise ValueError("semantic_similarity needs at least one pair")
    cosines = pair_cosines(pairs, embedder, batch_size)
    scores = [c for c in cosines if c is not None]
    if not scores:
        raise CorvoxError("semantic: every pair was skipped")
    # fsum: the mean is exactly rounded, hence invariant under pair order
    return math.fsum(scores) / len(scores), len(cosines) - len(scores)


# ------------------------------------------------------------- report ----


def evaluate(pairs: list[EvalPair], embedders: list[Embedder] = ()) -> MetricReport:
    """All metrics over one corpus, with per-segment detail rows."""
    if not pairs:
        raise ValueError("evaluate needs at least one pair")
    semantic: dict[str, float] = {}
    skipped: dict[str, int] = {}
    per_pair_cosines: dict[str, list[float | None]] = {}
    for embedder in embedders:
        cosines = pair_cosines(pairs, embedder)
        scores = [c for c in cosines if c is not None]
        if not scores:
            raise CorvoxError(f"semantic ({embedder.name}): every pair was skipped")
        semantic[embedder.name] = math.fsum(scores) / len(scores)
        skipped[embedder.name] = len(cosines) - len(scores)
        per_pair_cosines[embedder.name] = cosines

    segments = []
    for i, pair in enumerate(pairs):
        row = {
            "index": i,
            "wer": wer([pair]),
            "chrf_pp": chrf_pp([pair]),
        }
        for name, detail in per_pair_cosines.items():
            row[f"semantic:{name}"] = detail[i]
        segments.append(row)

    return MetricReport(
        bleu=bleu(pairs),
        chrf_pp=chrf_pp(pairs),
        wer=wer(pairs),
        semantic=semantic,
        semantic_skipped=skipped,
        segments=segments,
    )


def read_eval_pairs(hyp_path, ref_path) -> list[EvalPair]:
    """Aligned line-per-segment hypothesis and reference files."""
    hyp_lines = Path(hyp_path).read_text(encoding="utf-8").splitlines()
    ref_lines = Path(ref_path).read_text(encoding="utf-8").splitlines()
    if len(hyp_lines) != len(ref_lines):
        raise ValueError(
            f"hypothesis and reference differ in length: {len(hyp_lines)} vs {len(ref_lines)}"
        )
    return [EvalPair(h, r) for h, r in zip(hyp_lines, ref_lines)]
