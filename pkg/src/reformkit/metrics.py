"""Corpus-level BLEU and chrF++ plus multi-direction averaging.

Both metrics aggregate sufficient statistics over the whole corpus before
computing the final score (micro averaging), so they are invariant under
reordering of sentence pairs. Scores live on the conventional 0-100 scale.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Sequence

from .errors import ValidationError

SMOOTHING_NONE = "none"
SMOOTHING_ADD_K = "add_k"


@dataclass(frozen=True)
class ScoreConfig:
    """Knobs for both metrics; ``metric`` picks which one ``score`` runs."""

    metric: str = "chrfpp"
    max_ngram: int = 4
    smoothing: str = SMOOTHING_NONE
    smoothing_k: float = 1.0
    char_n: int = 6
    word_n: int = 2
    beta: float = 2.0

    def __post_init__(self) -> None:
        if self.metric not in ("bleu", "chrfpp"):
            raise ValidationError(f"unknown metric: {self.metric!r}")
        if self.max_ngram < 1:
            raise ValidationError("max_ngram must be >= 1")
        if self.smoothing not in (SMOOTHING_NONE, SMOOTHING_ADD_K):
            raise ValidationError(f"unknown smoothing: {self.smoothing!r}")
        if self.smoothing == SMOOTHING_ADD_K and self.smoothing_k <= 0:
            raise ValidationError("smoothing_k must be > 0")
        if self.char_n < 1:
            raise ValidationError("char_n must be >= 1")
        if self.word_n < 0:
            raise ValidationError("word_n must be >= 0")
        if self.beta <= 0:
            raise ValidationError("beta must be > 0")


@dataclass(frozen=True)
class DirectionScore:
    src: str
    tgt: str
    value: float
    n_sentences: int

    def __post_init__(self) -> None:
        if self.src == self.tgt:
            raise ValidationError("direction must have distinct languages")
        if not 0.0 <= self.value <= 100.0:
            raise ValidationError(f"score {self.value} outside [0, 100]")
        if self.n_sentences < 1:
            raise ValidationError("n_sentences must be >= 1")


def _check_parallel(hyps: Sequence[str], refs: Sequence[str]) -> None:
    if len(hyps) != len(refs):
        raise ValidationError(f"{len(hyps)} hypotheses vs {len(refs)} references")
    if not hyps:
        raise ValidationError("cannot score an empty corpus")


def _ngram_counts(tokens: Sequence, n: int) -> Counter:
    return Counter(tuple(tokens[i : i + n]) for i in range(len(tokens) - n + 1))


def bleu(hyps: Sequence[str], refs: Sequence[str], cfg: ScoreConfig | None = None) -> float:
    """Corpus BLEU: clipped modified n-gram precisions under a brevity penalty.

    When the longest reference has fewer than max_ngram tokens the n-gram
    order is reduced to that length, so short-sentence corpora are scored
    over the orders they can actually support instead of collapsing to 0.
    """
    cfg = cfg or ScoreConfig(metric="bleu")
    _check_parallel(hyps, refs)
    max_ref_len = max(len(r.split()) for r in refs)
    effective_n = max(1, min(cfg.max_ngram, max_ref_len))

    matches = [0] * effective_n
    totals = [0] * effective_n
    hyp_len = 0
    ref_len = 0
    for hyp, ref in zip(hyps, refs):
        htok = hyp.split()
        rtok = ref.split()
        hyp_len += len(htok)
        ref_len += len(rtok)
        for n in range(1, effective_n + 1):
            hc = _ngram_counts(htok, n)
            rc = _ngram_counts(rtok, n)
            matches[n - 1] += sum(min(count, rc[gram]) for gram, count in hc.items())
            totals[n - 1] += max(len(htok) - n + 1, 0)

    if hyp_len == 0:
        return 0.0
    log_precisions = []
    for match, total in zip(matches, totals):
        if cfg.smoothing == SMOOTHING_ADD_K:
            precision = (match + cfg.smoothing_k) / (total + cfg.smoothing_k)
        else:
            if match == 0 or total == 0:
                return 0.0
            precision = match / total
        log_precisions.append(math.log(precision))
    geo_mean = math.exp(math.fsum(log_precisions) / effective_n)
    brevity = 1.0 if hyp_len > ref_len else math.exp(1.0 - ref_len / hyp_len)
    return 100.0 * brevity * geo_mean


def _char_tokens(text: str) -> str:
    return "".join(text.split())


def chrfpp(hyps: Sequence[str], refs: Sequence[str], cfg: ScoreConfig | None = None) -> float:
    """chrF++: F-beta over averaged character and word n-gram P/R.

    Character n-grams (orders 1..char_n) are taken over the text with all
    whitespace removed; word n-grams (orders 1..word_n) over whitespace
    tokens. An order contributes to the average only when hypothesis or
    reference actually produced n-grams of that order somewhere.
    """
    cfg = cfg or ScoreConfig(metric="chrfpp")
    _check_parallel(hyps, refs)
    orders = [("char", n) for n in range(1, cfg.char_n + 1)]
    orders += [("word", n) for n in range(1, cfg.word_n + 1)]
    stats = {order: [0, 0, 0] for order in orders}  # matched, hyp total, ref total

    for hyp, ref in zip(hyps, refs):
        for kind, n in orders:
            if kind == "char":
                hc = _ngram_counts(_char_tokens(hyp), n)
                rc = _ngram_counts(_char_tokens(ref), n)
            else:
                hc = _ngram_counts(hyp.split(), n)
                rc = _ngram_counts(ref.split(), n)
            cell = stats[(kind, n)]
            cell[0] += sum(min(count, rc[gram]) for gram, count in hc.items())
            cell[1] += sum(hc.values())
            cell[2] += sum(rc.values())

    precisions = []
    recalls = []
    for order in orders:
        matched, hyp_total, ref_total = stats[order]
        if hyp_total + ref_total == 0:
            continue
        precisions.append(matched / hyp_total if hyp_total else 0.0)
        recalls.append(matched / ref_total if ref_total else 0.0)
    if not precisions:
        return 0.0
    avg_p = math.fsum(precisions) / len(precisions)
    avg_r = math.fsum(recalls) / len(recalls)
    beta_sq = cfg.beta * cfg.beta
    denom = beta_sq * avg_p + avg_r
    if denom == 0.0:
        return 0.0
    return 100.0 * (1.0 + beta_sq) * avg_p * avg_r / denom


def score(hyps: Sequence[str], refs: Sequence[str], cfg: ScoreConfig) -> float:
    if cfg.metric == "bleu":
        return bleu(hyps, refs, cfg)
    return chrfpp(hyps, refs, cfg)


def score_direction(
    src: str, tgt: str, hyps: Sequence[str], refs: Sequence[str], cfg: ScoreConfig
) -> DirectionScore:
    return DirectionScore(src=src, tgt=tgt, value=score(hyps, refs, cfg), n_sentences=len(hyps))


def average_directions(scores: Iterable[DirectionScore]) -> float:
    """Unweighted arithmetic mean over (src, tgt) directions."""
    scores = list(scores)
    if not scores:
        raise ValidationError("no direction scores to average")
    seen = set()
    for s in scores:
        key = (s.src, s.tgt)
        if key in seen:
            raise ValidationError(f"duplicate direction: {s.src}-{s.tgt}")
        seen.add(key)
    return math.fsum(s.value for s in scores) / len(scores)
