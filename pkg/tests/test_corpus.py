"""Corpus loading, validation, splitting, and round-trip tests."""

from __future__ import annotations

import json

import pytest

from reformkit.corpus import (
    BilingualCorpus,
    Language,
    MultiParallelCorpus,
    SentenceRecord,
    TranslationExample,
    corpus_digest,
    example_from_record,
    load_bilingual,
    load_multiparallel,
    split,
    write_bilingual,
    write_multiparallel,
)
from reformkit.errors import AlignmentError, UsageError, ValidationError


def _write_tsv(path, rows):
    path.write_text("".join(f"{s}\t{t}\n" for s, t in rows), encoding="utf-8")


def test_load_tsv_order_preserved(tmp_path):
    rows = [("ཁ་བ་", "snow"), ("མེ་", "fire"), ("ཆུ་", "water")]
    path = tmp_path / "pairs.tsv"
    _write_tsv(path, rows)
    corpus = load_bilingual(path, "tsv")
    assert len(corpus) == 3
    assert corpus.pairs == tuple(rows)


def test_load_tsv_empty_target_names_line(tmp_path):
    path = tmp_path / "pairs.tsv"
    _write_tsv(path, [("a", "b"), ("c", "   "), ("e", "f")])
    with pytest.raises(ValidationError, match="line 2"):
        load_bilingual(path, "tsv")


def test_load_tsv_wrong_columns(tmp_path):
    path = tmp_path / "pairs.tsv"
    path.write_text("only one column\n", encoding="utf-8")
    with pytest.raises(ValidationError, match="line 1"):
        load_bilingual(path, "tsv")


def test_load_jsonl_count_matches_line_count(tmp_path):
    path = tmp_path / "pairs.jsonl"
    with path.open("w", encoding="utf-8") as fh:
        for i in range(100):
            fh.write(json.dumps({"source": f"s{i}", "target": f"t{i}"}) + "\n")
    # independent line counter
    n_lines = sum(1 for _ in path.open(encoding="utf-8"))
    corpus = load_bilingual(path, "jsonl")
    assert len(corpus) == n_lines == 100


def test_load_jsonl_rejects_extra_keys(tmp_path):
    path = tmp_path / "pairs.jsonl"
    path.write_text('{"source": "a", "target": "b", "score": 1}\n', encoding="utf-8")
    with pytest.raises(ValidationError, match="line 1"):
        load_bilingual(path, "jsonl")


def test_unknown_format(tmp_path):
    path = tmp_path / "pairs.csv"
    path.write_text("a,b\n", encoding="utf-8")
    with pytest.raises(UsageError):
        load_bilingual(path, "csv")


def test_nfc_normalization_applied(tmp_path):
    path = tmp_path / "pairs.tsv"
    decomposed = "café"  # e + combining acute
    _write_tsv(path, [(decomposed, "coffee")])
    corpus = load_bilingual(path, "tsv")
    assert corpus.pairs[0][0] == "café"


def test_bilingual_round_trip(tmp_path):
    rows = [("ett två", "one two"), ("tre", "three")]
    corpus = BilingualCorpus(Language("swe_Latn"), Language("eng_Latn"), tuple(rows))
    for fmt in ("tsv", "jsonl"):
        out = tmp_path / f"rt.{fmt}"
        write_bilingual(corpus, out, fmt)
        again = load_bilingual(out, fmt, corpus.source_lang, corpus.target_lang)
        assert again.pairs == corpus.pairs


def _toy_multi(tmp_path, n=10, codes=("aaa_Latn", "bbb_Latn", "ccc_Latn", "ddd_Latn")):
    manifest = [
        {"code": code, "in_pretrain": i < 2, "pretrain_size": 1000 * (i + 1)}
        for i, code in enumerate(codes)
    ]
    (tmp_path / "manifest.json").write_text(json.dumps(manifest), encoding="utf-8")
    for code in codes:
        lines = "".join(f"{code} sentence {i}\n" for i in range(n))
        (tmp_path / f"{code}.txt").write_text(lines, encoding="utf-8")
    return tmp_path


def test_load_multiparallel(tmp_path):
    corpus = load_multiparallel(_toy_multi(tmp_path))
    assert len(corpus) == 10
    assert len(corpus.languages) == 4
    for rec in corpus.records:
        assert len(rec.texts) == 4
    # manifest metadata preserved
    assert corpus.language("aaa_Latn").in_pretrain is True
    assert corpus.language("ccc_Latn").in_pretrain is False
    assert corpus.language("ddd_Latn").pretrain_size == 4000
    # record ids dense
    assert [r.id for r in corpus.records] == list(range(10))


def test_load_multiparallel_via_manifest_path(tmp_path):
    _toy_multi(tmp_path)
    corpus = load_multiparallel(tmp_path / "manifest.json")
    assert len(corpus) == 10


def test_multiparallel_length_mismatch(tmp_path):
    _toy_multi(tmp_path)
    short = tmp_path / "ccc_Latn.txt"
    lines = short.read_text(encoding="utf-8").splitlines()[:9]
    short.write_text("".join(line + "\n" for line in lines), encoding="utf-8")
    with pytest.raises(AlignmentError) as err:
        load_multiparallel(tmp_path)
    message = str(err.value)
    assert "ccc_Latn" in message and "9" in message and "10" in message


def test_multiparallel_empty_line_is_hard_error(tmp_path):
    _toy_multi(tmp_path)
    target = tmp_path / "bbb_Latn.txt"
    lines = target.read_text(encoding="utf-8").splitlines()
    lines[4] = "   "
    target.write_text("".join(line + "\n" for line in lines), encoding="utf-8")
    with pytest.raises(ValidationError, match="line 5"):
        load_multiparallel(tmp_path)


def test_multiparallel_round_trip(tmp_path):
    src_dir = tmp_path / "a"
    src_dir.mkdir()
    corpus = load_multiparallel(_toy_multi(src_dir))
    out = tmp_path / "b"
    write_multiparallel(corpus, out)
    again = load_multiparallel(out)
    assert again.codes == corpus.codes
    assert [r.texts for r in again.records] == [r.texts for r in corpus.records]
    assert corpus_digest(again) == corpus_digest(corpus)


def test_split_sizes_exact_and_disjoint(tmp_path):
    corpus = load_multiparallel(_toy_multi(tmp_path, n=100))
    train, valid, test = split(corpus, (80, 10, 10), seed=7)
    assert (len(train), len(valid), len(test)) == (80, 10, 10)
    texts = lambda c: {r.texts["aaa_Latn"] for r in c.records}
    assert texts(train) | texts(valid) | texts(test) <= texts(corpus)
    assert not texts(train) & texts(valid)
    assert not texts(train) & texts(test)
    assert not texts(valid) & texts(test)
    # ids re-densified per split
    assert [r.id for r in valid.records] == list(range(10))


def test_split_deterministic_and_seed_sensitive(tmp_path):
    corpus = load_multiparallel(_toy_multi(tmp_path, n=100))
    a1, _, _ = split(corpus, (80, 10, 10), seed=7)
    a2, _, _ = split(corpus, (80, 10, 10), seed=7)
    b1, _, _ = split(corpus, (80, 10, 10), seed=8)
    key = lambda c: [r.texts["aaa_Latn"] for r in c.records]
    assert key(a1) == key(a2)
    assert key(a1) != key(b1)


def test_split_oversized_errors(tmp_path):
    corpus = load_multiparallel(_toy_multi(tmp_path, n=100))
    with pytest.raises(ValidationError):
        split(corpus, (90, 10, 10), seed=1)


def test_split_bilingual(tmp_path):
    pairs = tuple((f"s{i}", f"t{i}") for i in range(50))
    corpus = BilingualCorpus(Language("bod_Tibt"), Language("eng_Latn"), pairs)
    train, valid, test = split(corpus, (40, 5, 5), seed=3)
    assert (len(train), len(valid), len(test)) == (40, 5, 5)
    union = set(train.pairs) | set(valid.pairs) | set(test.pairs)
    assert union <= set(pairs)
    assert len(union) == 50


def test_language_invariants():
    with pytest.raises(ValidationError):
        Language("")
    with pytest.raises(ValidationError):
        Language("eng_Latn", pretrain_size=-1)


def test_duplicate_language_codes_rejected():
    lang = Language("eng_Latn")
    with pytest.raises(ValidationError):
        MultiParallelCorpus((lang, lang), ())


def test_translation_example_invariants():
    eng = Language("eng_Latn")
    deu = Language("deu_Latn")
    with pytest.raises(ValidationError):
        TranslationExample(eng, eng, "a", "b")
    with pytest.raises(ValidationError):
        TranslationExample(eng, deu, "a", "")
    ex = TranslationExample(eng, deu, "hello", "hallo", sentence_id=4)
    assert ex.sentence_id == 4


def test_example_from_record(tmp_path):
    corpus = load_multiparallel(_toy_multi(tmp_path))
    ex = example_from_record(corpus, corpus.records[3], "aaa_Latn", "bbb_Latn")
    assert ex.source_text == "aaa_Latn sentence 3"
    assert ex.target_text == "bbb_Latn sentence 3"
    assert ex.sentence_id == 3
    with pytest.raises(AlignmentError):
        example_from_record(corpus, corpus.records[3], "aaa_Latn", "zzz_Latn")


def test_record_missing_language_rejected():
    langs = (Language("aaa"), Language("bbb"))
    with pytest.raises(AlignmentError, match="bbb"):
        MultiParallelCorpus(langs, (SentenceRecord(0, {"aaa": "x"}),))
