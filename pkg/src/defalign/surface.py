"""Surface-form comparison of definition texts.

Longest common substrings are character-level and case-insensitive, so a
match may begin or end mid-word. ``word_count`` counts the whitespace
separated pieces inside the match, partial boundary words included.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .consistency import pearson
from .errors import UndefinedCorrelationError


@dataclass(frozen=True)
class MatchResult:
    substring: str
    char_len: int
    word_count: int
    pos_a: int
    pos_b: int


def lcs(text_a, text_b):
    """Longest common substring of two (normalised) texts.

    Ties resolve to the smallest offset in ``text_a``, then in ``text_b``.
    """
    a, b = text_a.lower(), text_b.lower()
    n, i, j = kernels.lcs_codes(kernels.codes(a), kernels.codes(b))
    n, i, j = int(n), int(i), int(j)
    sub = a[i:i + n]
    return MatchResult(sub, n, len(sub.split()), i if n else 0, j if n else 0)


@dataclass
class MatchHistogram:
    pair: tuple[str, str]
    bins: dict[int, int]
    mean_word_count: float
    threshold: int = 5
    long_matches: int = 0
    skipped: list[str] = field(default_factory=list)
    matches: dict[str, MatchResult] = field(default_factory=dict, repr=False)

    @property
    def n_pairs(self):
        return sum(self.bins.values())

    def longest(self):
        """Word and match with the most characters (ties: first in word order)."""
        best = None
        for word, m in self.matches.items():
            if best is None or m.char_len > best[1].char_len:
                best = (word, m)
        return best


def _by_word(records):
    return {r.word: r for r in records}


def match_histogram(defs_a, defs_b, vocabulary, threshold=5, pair=None):
    """Histogram of LCS word counts over ``vocabulary``.

    Words missing from either side are listed in ``skipped``.
    """
    a, b = _by_word(defs_a), _by_word(defs_b)
    if pair is None:
        pair = (_source_name(defs_a), _source_name(defs_b))
    bins, matches, skipped = {}, {}, []
    for w in vocabulary:
        if w not in a or w not in b:
            skipped.append(w)
            continue
        m = lcs(a[w].norm_text, b[w].norm_text)
        matches[w] = m
        bins[m.word_count] = bins.get(m.word_count, 0) + 1
    counts = [m.word_count for m in matches.values()]
    mean = math.fsum(counts) / len(counts) if counts else float("nan")
    return MatchHistogram(
        pair=tuple(pair),
        bins=dict(sorted(bins.items())),
        mean_word_count=mean,
        threshold=threshold,
        long_matches=sum(c >= threshold for c in counts),
        skipped=skipped,
        matches=matches,
    )


def _source_name(records):
    for r in records:
        return r.source.name
    return ""


def edit_distance(text_a, text_b):
    """Classic Levenshtein distance (insert, delete, substitute; unit costs)."""
    return kernels.levenshtein_codes(kernels.codes(text_a), kernels.codes(text_b))


def norm_edit_distance(text_a, text_b):
    """Edit distance divided by the longer length; two empty strings give 0."""
    longest = max(len(text_a), len(text_b))
    if longest == 0:
        return 0.0
    return edit_distance(text_a, text_b) / longest


@dataclass
class ScoreTable:
    """Per-word scores between two sources that are not embedding distances."""

    source_a: str
    source_b: str
    metric: str
    entries: dict[str, float]
    skipped: list[str] = field(default_factory=list)


def pair_edit_distances(defs_a, defs_b, vocabulary):
    """Normalised edit distance per word, computed on normalised texts."""
    a, b = _by_word(defs_a), _by_word(defs_b)
    out, skipped = {}, []
    for w in vocabulary:
        if w not in a or w not in b:
            skipped.append(w)
            continue
        out[w] = norm_edit_distance(a[w].norm_text, b[w].norm_text)
    return ScoreTable(_source_name(defs_a), _source_name(defs_b), "norm_edit", out, skipped)


class LengthUnit(enum.Enum):
    CHARS = "chars"
    TOKENS = "tokens"


def _lengths(records, unit):
    unit = LengthUnit(unit)
    attr = "char_len" if unit is LengthUnit.CHARS else "token_len"
    return {r.word: getattr(r, attr) for r in records}


@dataclass(frozen=True)
class LengthStats:
    n: int
    mean: float
    min: int
    max: int
    std: float  # population


def length_stats(records, unit=LengthUnit.CHARS):
    values = np.fromiter(_lengths(records, unit).values(), dtype=np.float64)
    if values.size == 0:
        raise ValueError("length_stats needs at least one record")
    return LengthStats(
        n=int(values.size),
        mean=float(values.mean()),
        min=int(values.min()),
        max=int(values.max()),
        std=float(values.std()),
    )


def length_correlation(records_a, records_b, unit=LengthUnit.CHARS):
    """Pearson r of definition lengths, paired by word over shared words."""
    la, lb = _lengths(records_a, unit), _lengths(records_b, unit)
    shared = sorted(set(la) & set(lb))
    if len(shared) < 2:
        raise UndefinedCorrelationError("need at least two shared words")
    return pearson([la[w] for w in shared], [lb[w] for w in shared])
