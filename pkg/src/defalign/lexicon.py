"""Study vocabulary: frequency-ranked lexicon loading, tier sampling, POS tags."""

from __future__ import annotations

import enum
import logging
from dataclasses import dataclass, replace
from pathlib import Path

from .errors import BoundsError, ConfigError, ParseError, ValidationError

log = logging.getLogger(__name__)


class Tier(enum.Enum):
    HIGH = "high"
    MEDIUM = "medium"
    LOW = "low"


class Pos(enum.Enum):
    NOUN = "NOUN"
    VERB = "VERB"
    ADJ = "ADJ"
    ADV = "ADV"
    OTHER = "OTHER"


TIER_ORDER = (Tier.HIGH, Tier.MEDIUM, Tier.LOW)
POS_ORDER = (Pos.NOUN, Pos.VERB, Pos.ADJ, Pos.ADV, Pos.OTHER)


@dataclass(frozen=True)
class LexiconEntry:
    word: str
    rank: int
    tier: Tier
    pos: Pos | None = None
    pos_source: str | None = None  # "file" or "heuristic"


Interval = tuple[int, int]


@dataclass(frozen=True)
class TierConfig:
    """Inclusive rank windows per tier.

    The default is 1000 top words plus four 500-word windows, split
    Medium = 5001-5500, 10001-10500 and Low = 20001-20500, 50001-50500.
    """

    top_window: Interval = (1, 1000)
    mid_windows: tuple[Interval, ...] = ((5001, 5500), (10001, 10500))
    low_windows: tuple[Interval, ...] = ((20001, 20500), (50001, 50500))

    def __post_init__(self):
        spans = self.windows()
        for tier, (lo, hi) in spans:
            if lo < 1 or hi < lo:
                raise ConfigError(f"bad {tier.value} window [{lo},{hi}]")
        ordered = sorted(w for _, w in spans)
        for (lo1, hi1), (lo2, hi2) in zip(ordered, ordered[1:]):
            if lo2 <= hi1:
                raise ConfigError(f"windows [{lo1},{hi1}] and [{lo2},{hi2}] overlap")

    def windows(self):
        out = [(Tier.HIGH, tuple(self.top_window))]
        out += [(Tier.MEDIUM, tuple(w)) for w in self.mid_windows]
        out += [(Tier.LOW, tuple(w)) for w in self.low_windows]
        return out

    def tier_of(self, rank):
        for tier, (lo, hi) in self.windows():
            if lo <= rank <= hi:
                return tier
        return None

    @property
    def size(self):
        return sum(hi - lo + 1 for _, (lo, hi) in self.windows())

    @classmethod
    def top_only(cls, n):
        return cls(top_window=(1, n), mid_windows=(), low_windows=())


def load_lexicon(path):
    """Read a frequency lexicon into ``[(word, rank), ...]``.

    Lines are ``word`` (file order is frequency order) or ``word<TAB>count``
    (sorted by count descending, ties by word). Mixing the two is an error.
    Words are lowercased; a case variant of an earlier word is folded into
    it, while an exact repeat is rejected.
    """
    path = Path(path)
    rows = []
    seen_raw = {}
    with_counts = None
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.rstrip("\r\n")
            if not line.strip():
                continue
            parts = line.split("\t")
            if len(parts) > 2 or not parts[0] or parts[0] != parts[0].strip() or " " in parts[0]:
                raise ParseError(f"malformed lexicon line {line!r}", path, lineno)
            has_count = len(parts) == 2
            if with_counts is None:
                with_counts = has_count
            elif with_counts != has_count:
                raise ParseError("mixed 'word' and 'word<TAB>count' lines", path, lineno)
            count = 0
            if has_count:
                try:
                    count = int(parts[1])
                except ValueError:
                    raise ParseError(f"count {parts[1]!r} is not an integer", path, lineno) from None
                if count < 0:
                    raise ParseError(f"negative count {count}", path, lineno)
            raw = parts[0]
            if raw in seen_raw:
                raise ValidationError(
                    f"duplicate word {raw!r} (first seen on line {seen_raw[raw]})", path, lineno)
            seen_raw[raw] = lineno
            rows.append((raw.lower(), count))

    if with_counts:
        rows.sort(key=lambda wc: (-wc[1], wc[0]))
    out = []
    kept = set()
    for word, _ in rows:
        if word in kept:
            continue
        kept.add(word)
        out.append((word, len(out) + 1))
    folded = len(rows) - len(out)
    if folded:
        log.info("%s: folded %d case-variant duplicates", path, folded)
    return out


def sample_tiers(lexicon, config=None):
    """Keep the words whose rank lies in a configured window, tagged by tier."""
    config = config or TierConfig()
    n = len(lexicon)
    for tier, (lo, hi) in config.windows():
        if hi > n:
            raise BoundsError(
                f"lexicon has {n} words but the {tier.value} window [{lo},{hi}] needs {hi}")
    out = []
    for word, rank in lexicon:
        tier = config.tier_of(rank)
        if tier is not None:
            out.append(LexiconEntry(word, rank, tier))
    out.sort(key=lambda e: e.rank)
    return out


# (suffix, tag), first match wins. A suffix only counts when at least
# _MIN_STEM letters precede it, so "table" and "fly" stay nouns.
_MIN_STEM = 3
_SUFFIX_RULES = (
    ("ly", Pos.ADV),
    ("ous", Pos.ADJ),
    ("ful", Pos.ADJ),
    ("ive", Pos.ADJ),
    ("able", Pos.ADJ),
    ("ize", Pos.VERB),
    ("ate", Pos.VERB),
    ("ify", Pos.VERB),
)


def heuristic_pos(word):
    """Approximate tag from word endings; anything unmatched is a noun."""
    for suffix, tag in _SUFFIX_RULES:
        if word.endswith(suffix) and len(word) - len(suffix) >= _MIN_STEM:
            return tag
    return Pos.NOUN


def load_pos_file(path):
    path = Path(path)
    tags = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.rstrip("\r\n")
            if not line.strip():
                continue
            parts = line.split("\t")
            if len(parts) != 2:
                raise ParseError(f"expected 'word<TAB>TAG', got {line!r}", path, lineno)
            word, tag = parts[0].strip().lower(), parts[1].strip().upper()
            try:
                tags[word] = Pos(tag)
            except ValueError:
                raise ParseError(f"unknown POS tag {parts[1]!r}", path, lineno) from None
    return tags


def assign_pos(entries, pos_file=None):
    tags = load_pos_file(pos_file) if pos_file is not None else {}
    out = []
    for e in entries:
        if e.word in tags:
            out.append(replace(e, pos=tags[e.word], pos_source="file"))
        else:
            out.append(replace(e, pos=heuristic_pos(e.word), pos_source="heuristic"))
    return out


SAMPLED_HEADER = ("word", "rank", "tier", "pos", "pos_source")


def write_sampled(entries, path):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\t".join(SAMPLED_HEADER) + "\n")
        for e in entries:
            fh.write("\t".join((
                e.word, str(e.rank), e.tier.value,
                e.pos.value if e.pos else "", e.pos_source or "",
            )) + "\n")


def read_sampled(path):
    """Inverse of :func:`write_sampled`."""
    path = Path(path)
    out = []
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().rstrip("\r\n").split("\t")
        if tuple(header) != SAMPLED_HEADER:
            raise ParseError(f"expected header {SAMPLED_HEADER}", path, 1)
        for lineno, line in enumerate(fh, 2):
            line = line.rstrip("\r\n")
            if not line:
                continue
            parts = line.split("\t")
            if len(parts) != len(SAMPLED_HEADER):
                raise ParseError(f"expected {len(SAMPLED_HEADER)} columns", path, lineno)
            word, rank, tier, pos, src = parts
            try:
                out.append(LexiconEntry(
                    word, int(rank), Tier(tier), Pos(pos) if pos else None, src or None))
            except ValueError as exc:
                raise ParseError(str(exc), path, lineno) from None
    ranks = [e.rank for e in out]
    if len(set(ranks)) != len(ranks):
        raise ValidationError("duplicate rank in sampled lexicon", path)
    return out
