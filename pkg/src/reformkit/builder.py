"""Dataset assembly: sampling, scheduling, reformulation, sharded JSONL output.

Determinism contract: every emitted byte is a pure function of (corpus,
config). Each example gets its own RNG substream keyed by (seed, split,
example index), shard boundaries come from config alone, and shard files
are written independently, so worker count and scheduling order can never
change the output.
"""

from __future__ import annotations

import hashlib
import json
import math
import os
import random
import statistics
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterable, Sequence

from .corpus import (
    BilingualCorpus,
    Language,
    MultiParallelCorpus,
    TranslationExample,
    corpus_digest,
    example_from_record,
)
from .errors import UsageError, ValidationError
from .reformulate import (
    ReformulatedExample,
    ScaffoldFormat,
    baseline,
    mask_tokens,
    mips_reform,
    parse_reform,
    pose,
    prefix_suffix,
    span_mask,
)
from .schedule import MASK_PRESETS, SchedulePolicy, mask_preset, mix, policy_at, policy_from_dict, policy_to_dict
from .textseg import Segmenter, count_units, segment, take_prefix

REFORM_KINDS = ("none", "pose", "prefix_suffix", "parse", "mips") + tuple(MASK_PRESETS)

_SPLITS = ("train", "valid", "test")


@dataclass(frozen=True)
class BuildConfig:
    """Everything a build depends on; the manifest echoes it verbatim.

    ``schedule.total_steps`` is derived as ceil(n_train / batch_size) at
    build time regardless of the value stored here, since the step count
    follows from the data. ``split_fracs`` partitions corpus records into
    train/valid/test pools before any sampling happens.
    """

    task: str
    reform: str
    n_train: int
    batch_size: int
    seed: int = 0
    schedule: SchedulePolicy | None = None
    n_valid: int = 0
    n_test: int = 0
    max_len: int = 256
    shard_size: int = 50_000
    pivot: str = "eng_Latn"
    fmt: ScaffoldFormat = field(default_factory=ScaffoldFormat)
    seg: Segmenter = field(default_factory=Segmenter)
    split_fracs: tuple[float, float, float] = (0.9, 0.05, 0.05)
    front_share: float = 0.5
    mean_span: int = 3

    def __post_init__(self) -> None:
        if self.task not in ("bilingual", "multiparallel"):
            raise ValidationError(f"unknown task: {self.task!r}")
        if self.reform not in REFORM_KINDS:
            raise ValidationError(f"unknown reformulation: {self.reform!r}")
        if self.batch_size < 1:
            raise ValidationError("batch_size must be >= 1")
        if self.n_train < self.batch_size:
            raise ValidationError("n_train must be >= batch_size")
        if self.n_valid < 0 or self.n_test < 0:
            raise ValidationError("split sizes must be nonnegative")
        if self.max_len < 1:
            raise ValidationError("max_len must be >= 1")
        if self.shard_size < 1:
            raise ValidationError("shard_size must be >= 1")
        if self.seg.kind == "external_counts":
            raise ValidationError("build needs a slicing segmenter, not external_counts")
        if len(self.split_fracs) != 3 or any(f < 0 for f in self.split_fracs):
            raise ValidationError("split_fracs must be three nonnegative fractions")
        if sum(self.split_fracs) > 1.0 + 1e-9:
            raise ValidationError("split_fracs must sum to at most 1")
        if not 0.0 <= self.front_share <= 1.0:
            raise ValidationError("front_share must be in [0, 1]")
        if self.mean_span < 1:
            raise ValidationError("mean_span must be >= 1")

    @property
    def total_steps(self) -> int:
        return math.ceil(self.n_train / self.batch_size)

    def effective_schedule(self) -> SchedulePolicy | None:
        """The schedule actually used: total_steps re-derived, mask presets
        expanded, and a full-reform default for scaffold builds without an
        explicit schedule."""
        T = self.total_steps
        if self.schedule is not None:
            return replace(self.schedule, total_steps=T)
        if self.reform in MASK_PRESETS:
            return mask_preset(self.reform, T, mean_span=self.mean_span)
        if self.reform == "none":
            return None
        return mix(1.0, T)

    def to_dict(self) -> dict:
        schedule = self.effective_schedule()
        return {
            "task": self.task,
            "reform": self.reform,
            "n_train": self.n_train,
            "batch_size": self.batch_size,
            "seed": self.seed,
            "schedule": None if schedule is None else policy_to_dict(schedule),
            "n_valid": self.n_valid,
            "n_test": self.n_test,
            "max_len": self.max_len,
            "shard_size": self.shard_size,
            "pivot": self.pivot,
            "fmt": {
                "delimiter": self.fmt.delimiter,
                "target_lang_tag_template": self.fmt.target_lang_tag_template,
            },
            "seg": {"kind": self.seg.kind, "counts_path": self.seg.counts_path},
            "split_fracs": list(self.split_fracs),
            "front_share": self.front_share,
            "mean_span": self.mean_span,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "BuildConfig":
        known = {
            "task", "reform", "n_train", "batch_size", "seed", "schedule",
            "n_valid", "n_test", "max_len", "shard_size", "pivot", "fmt",
            "seg", "split_fracs", "front_share", "mean_span",
        }
        unknown = set(data) - known
        if unknown:
            raise ValidationError(f"unknown config keys: {sorted(unknown)}")
        for key in ("task", "reform", "n_train", "batch_size"):
            if key not in data:
                raise ValidationError(f"config missing required key: {key}")
        kwargs: dict = {
            "task": data["task"],
            "reform": data["reform"],
            "n_train": int(data["n_train"]),
            "batch_size": int(data["batch_size"]),
            "seed": int(data.get("seed", 0)),
            "n_valid": int(data.get("n_valid", 0)),
            "n_test": int(data.get("n_test", 0)),
            "max_len": int(data.get("max_len", 256)),
            "shard_size": int(data.get("shard_size", 50_000)),
            "pivot": data.get("pivot", "eng_Latn"),
            "front_share": float(data.get("front_share", 0.5)),
            "mean_span": int(data.get("mean_span", 3)),
        }
        schedule = data.get("schedule")
        if schedule is not None:
            schedule = dict(schedule)
            schedule.setdefault(
                "total_steps", math.ceil(kwargs["n_train"] / kwargs["batch_size"])
            )
            kwargs["schedule"] = policy_from_dict(schedule)
        fmt = data.get("fmt")
        if fmt is not None:
            kwargs["fmt"] = ScaffoldFormat(
                delimiter=fmt.get("delimiter", "\n"),
                target_lang_tag_template=fmt.get("target_lang_tag_template", ""),
            )
        seg = data.get("seg")
        if seg is not None:
            kwargs["seg"] = Segmenter(
                kind=seg.get("kind", "unicode_words"), counts_path=seg.get("counts_path")
            )
        fracs = data.get("split_fracs")
        if fracs is not None:
            kwargs["split_fracs"] = tuple(float(f) for f in fracs)
        return cls(**kwargs)


@dataclass(frozen=True)
class BuildManifest:
    config: dict
    corpus_digest: str
    splits: dict

    def as_dict(self) -> dict:
        return {
            "config": self.config,
            "corpus_digest": self.corpus_digest,
            "splits": self.splits,
        }


def _substream(seed: int, role: str, index: int) -> random.Random:
    """Independent RNG stream for one (role, index); order-free determinism."""
    h = hashlib.blake2b(digest_size=16)
    h.update((seed & 0xFFFFFFFFFFFFFFFF).to_bytes(8, "big"))
    h.update(role.encode("utf-8"))
    h.update(index.to_bytes(8, "big"))
    return random.Random(int.from_bytes(h.digest(), "big"))


def split_pools(
    n_items: int, fracs: Sequence[float], seed: int
) -> dict[str, list[int]]:
    """Deterministically partition item indices into train/valid/test pools."""
    rng = _substream(seed, "pool", 0)
    order = list(range(n_items))
    rng.shuffle(order)
    a = math.floor(fracs[0] * n_items)
    b = a + math.floor(fracs[1] * n_items)
    c = b + math.floor(fracs[2] * n_items)
    return {
        "train": sorted(order[:a]),
        "valid": sorted(order[a:b]),
        "test": sorted(order[b:c]),
    }


def _decode_direction(idx: int, record_ids: Sequence[int], codes: Sequence[str]):
    k = len(codes)
    dirs = k * (k - 1)
    rec = record_ids[idx // dirs]
    rem = idx % dirs
    s = rem // (k - 1)
    t = rem % (k - 1)
    if t >= s:
        t += 1
    return rec, codes[s], codes[t]


def sample_pairs(
    corpus: MultiParallelCorpus,
    n: int,
    seed: int,
    record_ids: Sequence[int] | None = None,
    role: str = "sample",
) -> list[tuple[int, str, str]]:
    """Uniform draws over (record, ordered language pair), src != tgt.

    Without replacement when n fits in the combination space, with
    replacement otherwise. Restricting ``record_ids`` keeps train, valid,
    and test draws disjoint at the sentence level.
    """
    codes = corpus.codes
    if len(codes) < 2:
        raise ValidationError("need at least 2 languages to form direction pairs")
    if n < 1:
        raise ValidationError("n must be >= 1")
    if record_ids is None:
        record_ids = range(len(corpus.records))
    record_ids = list(record_ids)
    if not record_ids:
        raise ValidationError("empty record pool")
    total = len(record_ids) * len(codes) * (len(codes) - 1)
    rng = _substream(seed, role, 0)
    if n <= total:
        picks = rng.sample(range(total), n)
    else:
        picks = [rng.randrange(total) for _ in range(n)]
    return [_decode_direction(i, record_ids, codes) for i in picks]


def _sample_bilingual(
    corpus: BilingualCorpus, n: int, seed: int, pair_ids: Sequence[int], role: str
) -> list[tuple[int, str, str]]:
    if not pair_ids:
        raise ValidationError("empty pair pool")
    pair_ids = list(pair_ids)
    rng = _substream(seed, role, 0)
    if n <= len(pair_ids):
        picks = rng.sample(range(len(pair_ids)), n)
    else:
        picks = [rng.randrange(len(pair_ids)) for _ in range(n)]
    src = corpus.source_lang.code
    tgt = corpus.target_lang.code
    return [(pair_ids[i], src, tgt) for i in picks]


def _truncate_parts(
    parts: tuple[str, ...], max_len: int, seg: Segmenter, fmt: ScaffoldFormat
) -> tuple[str, tuple[str, ...], bool]:
    """Trim scaffold parts from the right, then the base, until the joined
    input fits in max_len units. The base always keeps at least one unit;
    the target side is never touched by construction."""
    truncated = False
    while True:
        joined = fmt.delimiter.join(p for p in parts if p)
        over = count_units(joined, seg) - max_len
        if over <= 0:
            return joined, parts, truncated
        truncated = True
        for idx in range(len(parts) - 1, -1, -1):
            part_seg = segment(parts[idx], seg)
            floor_keep = 1 if idx == 0 else 0
            if len(part_seg.units) > floor_keep:
                keep = max(floor_keep, len(part_seg.units) - over)
                new_part = take_prefix(part_seg, keep)
                parts = parts[:idx] + ((new_part,) if new_part else ()) + parts[idx + 1 :]
                break
        else:  # base is down to one unit; nothing left to trim
            return joined, parts, truncated


def _build_example(
    corpus,
    cfg: BuildConfig,
    schedule: SchedulePolicy | None,
    split: str,
    index: int,
    assignment: tuple[int, str, str],
) -> dict:
    rng = _substream(cfg.seed, f"example:{split}", index)
    item_id, src_code, tgt_code = assignment
    if cfg.task == "bilingual":
        source_text, target_text = corpus.pairs[item_id]
        example = TranslationExample(
            corpus.source_lang, corpus.target_lang, source_text, target_text
        )
        record = None
    else:
        record = corpus.records[item_id]
        example = example_from_record(corpus, record, src_code, tgt_code)

    step = index // cfg.batch_size if split == "train" else None
    step_policy = None
    reform_on = False
    if split == "train" and schedule is not None:
        step_policy = policy_at(step, schedule)
        fraction = step_policy.reform_fraction
        if 0.0 < fraction < 1.0:
            reform_on = rng.random() < fraction
        else:
            reform_on = fraction >= 1.0

    if not reform_on or cfg.reform == "none":
        out = baseline(example, cfg.fmt)
    elif cfg.reform == "pose":
        out = pose(example, step_policy.prefix_law.draw(rng), cfg.seg, cfg.fmt)
    elif cfg.reform == "prefix_suffix":
        out = prefix_suffix(
            example, step_policy.prefix_law.draw(rng), cfg.front_share, cfg.seg, cfg.fmt
        )
    elif cfg.reform == "parse":
        out = parse_reform(
            record, example.source_lang, example.target_lang, corpus.language(cfg.pivot), cfg.fmt
        )
    elif cfg.reform == "mips":
        candidates = sorted(set(corpus.codes) - {src_code, tgt_code})
        aux_in, aux_out = rng.sample(candidates, 2)
        out = mips_reform(
            record,
            example.source_lang,
            example.target_lang,
            corpus.language(aux_in),
            corpus.language(aux_out),
            cfg.fmt,
        )
    else:  # mask presets scaffold nothing; masking happens below
        out = baseline(example, cfg.fmt)

    input_text, parts, truncated = _truncate_parts(
        out.input_parts or (out.input_text,), cfg.max_len, cfg.seg, cfg.fmt
    )
    tag = out.tag
    meta = dict(out.meta)

    if reform_on and step_policy is not None and step_policy.mask is not None:
        interim = ReformulatedExample(input_text, out.target_text, tag, meta, parts)
        mask_cfg = step_policy.mask
        if mask_cfg.span:
            masked = span_mask(interim, mask_cfg.p, mask_cfg.mean_span, rng, cfg.seg)
        else:
            masked = mask_tokens(interim, mask_cfg.p, rng, cfg.seg)
        input_text = masked.input_text
        tag = masked.tag
        meta = dict(masked.meta)

    meta["source_lang"] = example.source_lang.code
    meta["target_lang"] = example.target_lang.code
    meta["truncated"] = truncated
    if step is not None:
        meta["step_index"] = step
    return {"input": input_text, "target": out.target_text, "tag": tag, "meta": meta}


def _encode_example(obj: dict) -> str:
    return json.dumps(obj, sort_keys=True, ensure_ascii=False, separators=(",", ":")) + "\n"


def _shard_job(args) -> dict:
    corpus, cfg, schedule, split, start, assignments, out_path = args
    tags: Counter = Counter()
    input_lengths: Counter = Counter()
    target_lengths: Counter = Counter()
    truncated = 0
    lines = []
    for offset, assignment in enumerate(assignments):
        obj = _build_example(corpus, cfg, schedule, split, start + offset, assignment)
        tags[obj["tag"]] += 1
        input_lengths[count_units(obj["input"], cfg.seg)] += 1
        target_lengths[count_units(obj["target"], cfg.seg)] += 1
        truncated += bool(obj["meta"]["truncated"])
        lines.append(_encode_example(obj))
    payload = "".join(lines).encode("utf-8")
    tmp_path = out_path.with_name(out_path.name + ".tmp")
    tmp_path.write_bytes(payload)
    os.replace(tmp_path, out_path)
    return {
        "path": out_path.name,
        "n_examples": len(assignments),
        "sha256": hashlib.sha256(payload).hexdigest(),
        "tags": dict(tags),
        "input_lengths": dict(input_lengths),
        "target_lengths": dict(target_lengths),
        "truncated": truncated,
    }


def _counter_stats(counter: Counter) -> dict:
    n = sum(counter.values())
    if n == 0:
        return {"mean": None, "median": None}
    total = sum(length * count for length, count in counter.items())
    values = []
    half = n // 2
    seen = 0
    lower = upper = None
    for length in sorted(counter):
        seen += counter[length]
        if lower is None and seen >= half + (n % 2):
            lower = length
        if upper is None and seen >= half + 1:
            upper = length
    if n % 2 == 1:
        median = float(lower)
    else:
        median = (lower + upper) / 2
    return {"mean": total / n, "median": median}


def _validate_against_corpus(corpus, cfg: BuildConfig) -> None:
    if cfg.task == "bilingual" and not isinstance(corpus, BilingualCorpus):
        raise ValidationError("bilingual task needs a BilingualCorpus")
    if cfg.task == "multiparallel" and not isinstance(corpus, MultiParallelCorpus):
        raise ValidationError("multiparallel task needs a MultiParallelCorpus")
    if cfg.task == "bilingual" and cfg.reform in ("parse", "mips"):
        raise ValidationError(f"{cfg.reform} needs a multi-parallel corpus")
    if cfg.reform == "parse" and cfg.pivot not in corpus.codes:
        raise ValidationError(f"pivot language {cfg.pivot} not in corpus")
    if cfg.reform == "mips" and len(corpus.codes) < 4:
        raise ValidationError(
            f"mips needs at least 4 languages, corpus has {len(corpus.codes)}"
        )


def build(
    corpus: BilingualCorpus | MultiParallelCorpus,
    cfg: BuildConfig,
    out_dir: str | Path,
    workers: int = 1,
) -> BuildManifest:
    """Write sharded JSONL splits plus a manifest with content digests."""
    if workers < 1:
        raise ValidationError("workers must be >= 1")
    _validate_against_corpus(corpus, cfg)
    schedule = cfg.effective_schedule()
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    n_items = len(corpus.pairs) if cfg.task == "bilingual" else len(corpus.records)
    pools = split_pools(n_items, cfg.split_fracs, cfg.seed)

    jobs = []
    for split, n_wanted in (("train", cfg.n_train), ("valid", cfg.n_valid), ("test", cfg.n_test)):
        if n_wanted == 0:
            continue
        pool = pools[split]
        if not pool:
            raise ValidationError(
                f"{split} pool is empty; adjust split_fracs or corpus size"
            )
        if cfg.task == "bilingual":
            assignments = _sample_bilingual(corpus, n_wanted, cfg.seed, pool, f"sample:{split}")
        else:
            assignments = sample_pairs(corpus, n_wanted, cfg.seed, pool, f"sample:{split}")
        for shard_index, start in enumerate(range(0, n_wanted, cfg.shard_size)):
            chunk = assignments[start : start + cfg.shard_size]
            path = out_dir / f"{split}-{shard_index:05d}.jsonl"
            jobs.append((corpus, cfg, schedule, split, start, chunk, path))

    if workers == 1 or len(jobs) <= 1:
        results = [_shard_job(job) for job in jobs]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool_exec:
            results = list(pool_exec.map(_shard_job, jobs, chunksize=1))

    splits: dict = {}
    for split in _SPLITS:
        split_results = [r for job, r in zip(jobs, results) if job[3] == split]
        tags: Counter = Counter()
        input_lengths: Counter = Counter()
        target_lengths: Counter = Counter()
        truncated = 0
        shards = []
        for r in split_results:
            tags.update(r["tags"])
            input_lengths.update({int(k): v for k, v in r["input_lengths"].items()})
            target_lengths.update({int(k): v for k, v in r["target_lengths"].items()})
            truncated += r["truncated"]
            shards.append(
                {"path": r["path"], "n_examples": r["n_examples"], "sha256": r["sha256"]}
            )
        splits[split] = {
            "n_examples": sum(tags.values()),
            "tags": dict(sorted(tags.items())),
            "truncated": truncated,
            "input_length": _counter_stats(input_lengths),
            "target_length": _counter_stats(target_lengths),
            "shards": shards,
        }

    manifest = BuildManifest(
        config=cfg.to_dict(),
        corpus_digest=corpus_digest(corpus),
        splits=splits,
    )
    payload = json.dumps(manifest.as_dict(), sort_keys=True, indent=2) + "\n"
    tmp = out_dir / "manifest.json.tmp"
    tmp.write_text(payload, encoding="utf-8")
    os.replace(tmp, out_dir / "manifest.json")
    return manifest


def batch_plan(
    cfg: BuildConfig, reform_active: bool, mean_tokens_per_example: float | None = None
) -> tuple[int, float | None]:
    """Examples per optimizer step, halved when a parallel-scaffold
    reformulation doubles per-example content; optionally a token estimate."""
    halve = cfg.reform in ("parse", "mips") and reform_active
    if halve and cfg.batch_size % 2 != 0:
        raise ValidationError("batch_size must be even to halve for parse/mips")
    examples = cfg.batch_size // 2 if halve else cfg.batch_size
    tokens = None if mean_tokens_per_example is None else examples * mean_tokens_per_example
    return examples, tokens


def stats(shard_paths: Iterable[str | Path], seg: Segmenter | None = None) -> dict:
    """Recount tags and token lengths straight from shard files."""
    seg = seg or Segmenter()
    if seg.kind == "external_counts":
        raise UsageError("use stats_from_counts for sidecar token counts")
    tags: Counter = Counter()
    input_lengths: list[int] = []
    target_lengths: list[int] = []
    for path in shard_paths:
        with Path(path).open(encoding="utf-8") as fh:
            for line in fh:
                obj = json.loads(line)
                tags[obj["tag"]] += 1
                input_lengths.append(count_units(obj["input"], seg))
                target_lengths.append(count_units(obj["target"], seg))
    if not input_lengths:
        return {
            "n_examples": 0,
            "tags": {},
            "input_length": {"mean": None, "median": None},
            "target_length": {"mean": None, "median": None},
        }
    return {
        "n_examples": len(input_lengths),
        "tags": dict(sorted(tags.items())),
        "input_length": {
            "mean": statistics.mean(input_lengths),
            "median": float(statistics.median(input_lengths)),
        },
        "target_length": {
            "mean": statistics.mean(target_lengths),
            "median": float(statistics.median(target_lengths)),
        },
    }


def stats_from_counts(counts_path: str | Path) -> dict:
    """Token stats from a sidecar count file produced by an external tokenizer."""
    from .textseg import read_sidecar_counts

    counts = read_sidecar_counts(counts_path)
    if not counts:
        return {"n_examples": 0, "length": {"mean": None, "median": None}}
    return {
        "n_examples": len(counts),
        "length": {"mean": statistics.mean(counts), "median": float(statistics.median(counts))},
    }
