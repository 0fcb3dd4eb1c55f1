"""Metric tests against brute-force oracles and hand-computed values.

The oracles below recompute both metrics from first principles (explicit
n-gram enumeration, exact Fraction arithmetic) in a deliberately different
style from the implementation, so shared bugs are unlikely.
"""

from __future__ import annotations

import math
import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from reformkit.errors import ValidationError
from reformkit.metrics import (
    DirectionScore,
    ScoreConfig,
    average_directions,
    bleu,
    chrfpp,
    score,
    score_direction,
)


def _grams(seq, n):
    return [tuple(seq[i : i + n]) for i in range(len(seq) - n + 1)]


def oracle_bleu(hyps, refs, max_ngram=4, add_k=None):
    eff = min(max_ngram, max(len(r.split()) for r in refs))
    eff = max(eff, 1)
    log_sum = 0.0
    for n in range(1, eff + 1):
        matched, total = 0, 0
        for h, r in zip(hyps, refs):
            hg = _grams(h.split(), n)
            rg = _grams(r.split(), n)
            for g in set(hg):
                matched += min(hg.count(g), rg.count(g))
            total += len(hg)
        if add_k is not None:
            p = Fraction(matched) + Fraction(add_k)
            p /= Fraction(total) + Fraction(add_k)
        else:
            if matched == 0 or total == 0:
                return 0.0
            p = Fraction(matched, total)
        log_sum += math.log(p)
    c = sum(len(h.split()) for h in hyps)
    r_len = sum(len(r.split()) for r in refs)
    if c == 0:
        return 0.0
    bp = 1.0 if c > r_len else math.exp(1 - Fraction(r_len, c))
    return 100.0 * bp * math.exp(log_sum / eff)


def oracle_chrfpp(hyps, refs, char_n=6, word_n=2, beta=2):
    orders = [("c", n) for n in range(1, char_n + 1)] + [("w", n) for n in range(1, word_n + 1)]
    precisions, recalls = [], []
    for kind, n in orders:
        matched, h_total, r_total = 0, 0, 0
        for h, r in zip(hyps, refs):
            hseq = "".join(h.split()) if kind == "c" else h.split()
            rseq = "".join(r.split()) if kind == "c" else r.split()
            hg = _grams(hseq, n)
            rg = _grams(rseq, n)
            for g in set(hg):
                matched += min(hg.count(g), rg.count(g))
            h_total += len(hg)
            r_total += len(rg)
        if h_total + r_total == 0:
            continue
        precisions.append(Fraction(matched, h_total) if h_total else Fraction(0))
        recalls.append(Fraction(matched, r_total) if r_total else Fraction(0))
    if not precisions:
        return 0.0
    avg_p = sum(precisions) / len(precisions)
    avg_r = sum(recalls) / len(recalls)
    if avg_p == 0 and avg_r == 0:
        return 0.0
    b2 = Fraction(beta) ** 2
    return float(100 * (1 + b2) * avg_p * avg_r / (b2 * avg_p + avg_r))


def test_bleu_identity_is_100():
    hyps = ["the cat sat on the mat", "a stitch in time saves nine"]
    assert bleu(hyps, hyps) == 100.0


def test_bleu_short_reference_identity_is_100():
    # references shorter than 4 words drop to their own max order
    assert bleu(["the cat"], ["the cat"]) == 100.0


def test_bleu_no_overlap_is_zero():
    assert bleu(["xx yy zz"], ["aa bb cc dd"]) == 0.0


def test_bleu_clipped_counts_hand_case():
    hyps, refs = ["the the the cat"], ["the cat sat"]
    # p3 = 0 with no smoothing
    assert bleu(hyps, refs) == 0.0
    # add-1: orders reduce to 3 (ref has 3 tokens); p = (3/5, 2/4, 1/3),
    # BP = 1 since 4 > 3, so BLEU = 100 * (0.1)^(1/3)
    cfg = ScoreConfig(metric="bleu", smoothing="add_k", smoothing_k=1.0)
    value = bleu(hyps, refs, cfg)
    assert value == pytest.approx(100.0 * 0.1 ** (1 / 3), abs=1e-9)
    assert value == pytest.approx(oracle_bleu(hyps, refs, add_k=1), abs=1e-9)


def test_bleu_brevity_penalty():
    # all n-grams correct but hypothesis is half the reference length
    value = bleu(["the cat sat on"], ["the cat sat on the mat tonight ok"])
    assert value == pytest.approx(oracle_bleu(["the cat sat on"], ["the cat sat on the mat tonight ok"]), abs=1e-9)
    assert 0.0 < value < 100.0


def test_bleu_100_iff_exact_match():
    refs = ["alpha beta gamma delta", "one two three four five"]
    assert bleu(list(refs), refs) == 100.0
    assert bleu(["alpha beta gamma delta", "one two three four six"], refs) < 100.0


def test_chrfpp_identity_is_100():
    hyps = ["Bonjour le monde", "ཁ་བ་ འབབ"]
    assert chrfpp(hyps, hyps) == 100.0


def test_chrfpp_empty_hypotheses_score_zero():
    assert chrfpp(["", ""], ["some text", "more text"]) == 0.0


def test_chrfpp_hand_case_cat_hat():
    # included orders: char 1..3 and word 1; avgP = avgR = 7/24
    value = chrfpp(["cat"], ["hat"])
    assert value == pytest.approx(100 * 7 / 24, abs=1e-9)
    assert value == pytest.approx(oracle_chrfpp(["cat"], ["hat"]), abs=1e-9)


_words = st.lists(st.sampled_from("ab bc ca aa cb ba ac".split()), min_size=0, max_size=8)
_corpus = st.lists(
    st.tuples(_words, _words.filter(lambda w: len(w) > 0)),
    min_size=1,
    max_size=5,
)


@settings(max_examples=60, deadline=None)
@given(_corpus)
def test_bleu_matches_oracle_on_random_corpora(pairs):
    hyps = [" ".join(h) for h, _ in pairs]
    refs = [" ".join(r) for _, r in pairs]
    assert bleu(hyps, refs) == pytest.approx(oracle_bleu(hyps, refs), abs=1e-9)
    cfg = ScoreConfig(metric="bleu", smoothing="add_k", smoothing_k=1.0)
    assert bleu(hyps, refs, cfg) == pytest.approx(oracle_bleu(hyps, refs, add_k=1), abs=1e-9)


@settings(max_examples=60, deadline=None)
@given(_corpus)
def test_chrfpp_matches_oracle_on_random_corpora(pairs):
    hyps = [" ".join(h) for h, _ in pairs]
    refs = [" ".join(r) for _, r in pairs]
    assert chrfpp(hyps, refs) == pytest.approx(oracle_chrfpp(hyps, refs), abs=1e-9)


@settings(max_examples=30, deadline=None)
@given(_corpus, st.randoms(use_true_random=False))
def test_metrics_permutation_invariant(pairs, rnd):
    hyps = [" ".join(h) for h, _ in pairs]
    refs = [" ".join(r) for _, r in pairs]
    order = list(range(len(pairs)))
    rnd.shuffle(order)
    shuffled_h = [hyps[i] for i in order]
    shuffled_r = [refs[i] for i in order]
    assert chrfpp(shuffled_h, shuffled_r) == chrfpp(hyps, refs)
    assert bleu(shuffled_h, shuffled_r) == bleu(hyps, refs)


def test_parallel_checks():
    with pytest.raises(ValidationError):
        bleu(["a"], ["a", "b"])
    with pytest.raises(ValidationError):
        bleu([], [])
    with pytest.raises(ValidationError):
        chrfpp([], [])


def test_score_dispatch():
    hyps, refs = ["the cat"], ["the cat"]
    assert score(hyps, refs, ScoreConfig(metric="bleu")) == 100.0
    assert score(hyps, refs, ScoreConfig(metric="chrfpp")) == 100.0
    d = score_direction("deu_Latn", "eng_Latn", hyps, refs, ScoreConfig())
    assert d.value == 100.0 and d.n_sentences == 1


def test_score_config_validation():
    with pytest.raises(ValidationError):
        ScoreConfig(metric="ter")
    with pytest.raises(ValidationError):
        ScoreConfig(max_ngram=0)
    with pytest.raises(ValidationError):
        ScoreConfig(smoothing="exp")
    with pytest.raises(ValidationError):
        ScoreConfig(smoothing="add_k", smoothing_k=0.0)
    with pytest.raises(ValidationError):
        ScoreConfig(beta=0.0)


def test_direction_score_validation():
    with pytest.raises(ValidationError):
        DirectionScore("eng", "eng", 50.0, 10)
    with pytest.raises(ValidationError):
        DirectionScore("eng", "deu", 101.0, 10)
    with pytest.raises(ValidationError):
        DirectionScore("eng", "deu", 50.0, 0)


def test_average_directions_mean():
    scores = [
        DirectionScore("a", "b", 10.0, 5),
        DirectionScore("b", "c", 20.0, 5),
        DirectionScore("c", "a", 30.0, 5),
    ]
    assert average_directions(scores) == pytest.approx(20.0)
    assert average_directions(scores[:1]) == 10.0


def test_average_directions_41412_constant():
    codes = [f"l{i:03d}" for i in range(204)]
    scores = [
        DirectionScore(a, b, 25.1, 1) for a in codes for b in codes if a != b
    ]
    assert len(scores) == 204 * 203 == 41412
    value = average_directions(scores)
    # exact-arithmetic oracle over the same floats
    exact = Fraction(0)
    for s in scores:
        exact += Fraction(s.value)
    exact /= len(scores)
    assert value == pytest.approx(float(exact), abs=1e-9)
    assert value == pytest.approx(25.1, abs=1e-9)


def test_average_directions_rejects_duplicates():
    scores = [DirectionScore("a", "b", 10.0, 5), DirectionScore("a", "b", 20.0, 5)]
    with pytest.raises(ValidationError):
        average_directions(scores)
    with pytest.raises(ValidationError):
        average_directions([])
