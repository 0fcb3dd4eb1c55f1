"""Lossless text segmentation used for prefix selection, masking units, and stats.

Segmentation is exact: unit spans tile the whole string, so any prefix of
units is a literal slice of the original text. Separator characters
(whitespace, Tibetan tsheg) are carried on the unit that precedes them,
which keeps unit counts equal to intuitive word counts.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

from .errors import UsageError, ValidationError

KIND_UNICODE_WORDS = "unicode_words"
KIND_WHITESPACE = "whitespace"
KIND_CODEPOINTS = "codepoints"
KIND_EXTERNAL_COUNTS = "external_counts"

SEGMENTER_KINDS = (
    KIND_UNICODE_WORDS,
    KIND_WHITESPACE,
    KIND_CODEPOINTS,
    KIND_EXTERNAL_COUNTS,
)

# Script-specific word delimiters that are not Unicode whitespace.
# U+0F0B / U+0F0C are the Tibetan intersyllabic tsheg marks.
_EXTRA_SEPARATORS = frozenset({"་", "༌"})


@dataclass(frozen=True)
class Segmenter:
    """Segmentation policy. ``external_counts`` reads a sidecar count file and
    cannot slice text; it exists for reporting stats under an external
    subword tokenizer."""

    kind: str = KIND_UNICODE_WORDS
    counts_path: str | None = None

    def __post_init__(self) -> None:
        if self.kind not in SEGMENTER_KINDS:
            raise ValidationError(f"unknown segmenter kind: {self.kind!r}")
        if self.kind == KIND_EXTERNAL_COUNTS and not self.counts_path:
            raise ValidationError("external_counts segmenter requires counts_path")


@dataclass(frozen=True)
class Unit:
    """One segment: s[start:end], where s[start:core_end] is the word core and
    s[core_end:end] holds trailing separators."""

    text: str
    start: int
    end: int
    core_end: int


@dataclass(frozen=True)
class Segmentation:
    source: str
    units: tuple[Unit, ...]


def _is_separator(ch: str, whitespace_only: bool) -> bool:
    if ch.isspace():
        return True
    return not whitespace_only and ch in _EXTRA_SEPARATORS


def segment(s: str, seg: Segmenter | None = None) -> Segmentation:
    """Split ``s`` into units whose spans exactly tile the string."""
    seg = seg or Segmenter()
    if seg.kind == KIND_EXTERNAL_COUNTS:
        raise UsageError("external_counts cannot segment text; use sidecar counts")
    if not s:
        return Segmentation(s, ())
    if seg.kind == KIND_CODEPOINTS:
        units = tuple(Unit(s[i], i, i + 1, i + 1) for i in range(len(s)))
        return Segmentation(s, units)

    whitespace_only = seg.kind == KIND_WHITESPACE
    n = len(s)
    i = 0
    while i < n and _is_separator(s[i], whitespace_only):
        i += 1
    if i == n:
        # Separator-only string: a single unit with no core.
        return Segmentation(s, (Unit(s, 0, n, n),))

    units: list[Unit] = []
    start = 0  # leading separators attach to the first unit
    while i < n:
        while i < n and not _is_separator(s[i], whitespace_only):
            i += 1
        core_end = i
        while i < n and _is_separator(s[i], whitespace_only):
            i += 1
        units.append(Unit(s[start:i], start, i, core_end))
        start = i
    return Segmentation(s, tuple(units))


def take_prefix(segmentation: Segmentation, k: int) -> str:
    """Return the slice of the source covering the first ``k`` units.

    For k < unit count the trailing separators of the k-th unit are left
    out, so the result ends on a word core; for k == unit count the full
    source string is returned.
    """
    units = segmentation.units
    if k < 0 or k > len(units):
        raise UsageError(f"prefix length {k} out of range 0..{len(units)}")
    if k == 0:
        return ""
    if k == len(units):
        return segmentation.source
    return segmentation.source[: units[k - 1].core_end]


def take_suffix(segmentation: Segmentation, k: int) -> str:
    """Return the slice covering the last ``k`` units."""
    units = segmentation.units
    if k < 0 or k > len(units):
        raise UsageError(f"suffix length {k} out of range 0..{len(units)}")
    if k == 0:
        return ""
    return segmentation.source[units[len(units) - k].start :]


def count_units(s: str, seg: Segmenter | None = None) -> int:
    return len(segment(s, seg).units)


def token_length(s: str, seg: Segmenter | None = None) -> int:
    """Alias of count_units for stats-facing call sites."""
    return count_units(s, seg)


def read_sidecar_counts(path: str | Path) -> list[int]:
    """Read one integer per line, aligned with corpus line numbers."""
    counts: list[int] = []
    for lineno, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        value = raw.strip()
        if not value:
            raise ValidationError(f"{path}: line {lineno}: empty count")
        try:
            count = int(value)
        except ValueError as exc:
            raise ValidationError(f"{path}: line {lineno}: not an integer: {value!r}") from exc
        if count < 0:
            raise ValidationError(f"{path}: line {lineno}: negative count")
        counts.append(count)
    return counts


def sidecar_counts(seg: Segmenter) -> list[int]:
    if seg.kind != KIND_EXTERNAL_COUNTS:
        raise UsageError("sidecar_counts requires an external_counts segmenter")
    assert seg.counts_path is not None
    return read_sidecar_counts(seg.counts_path)
