"""Definition corpora, word-vector files, and the complete-coverage filter."""

from __future__ import annotations

import enum
import json
import logging
import math
import re
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ParseError, ValidationError

log = logging.getLogger(__name__)

_WS = re.compile(r"\s+")
_PROMPT_SUFFIX = re.compile(r"-([12])$")


class SourceKind(enum.Enum):
    PUBLISHED = "published"
    GENERATED = "generated"


@dataclass(frozen=True)
class SourceId:
    name: str
    kind: SourceKind = SourceKind.PUBLISHED
    prompt_type: int | None = None

    def __post_init__(self):
        if self.kind is SourceKind.GENERATED and self.prompt_type not in (1, 2):
            raise ValidationError(f"generated source {self.name!r} needs prompt type 1 or 2")
        if self.kind is SourceKind.PUBLISHED and self.prompt_type is not None:
            raise ValidationError(f"published source {self.name!r} cannot carry a prompt type")

    @classmethod
    def infer(cls, name):
        """``gpt4-2`` style names (``-1``/``-2`` suffix) are generated; others published."""
        m = _PROMPT_SUFFIX.search(name)
        if m:
            return cls(name, SourceKind.GENERATED, int(m.group(1)))
        return cls(name)

    @property
    def generated(self):
        return self.kind is SourceKind.GENERATED


def normalize(text):
    """Lowercase and collapse whitespace runs to one space. Punctuation is kept."""
    return _WS.sub(" ", text).strip().lower()


@dataclass(frozen=True)
class DefinitionRecord:
    word: str
    source: SourceId
    text: str
    norm_text: str = field(init=False)
    char_len: int = field(init=False)
    token_len: int = field(init=False)

    def __post_init__(self):
        norm = normalize(self.text)
        if not norm:
            raise ValidationError(f"empty definition for {self.word!r}")
        object.__setattr__(self, "norm_text", norm)
        object.__setattr__(self, "char_len", len(norm))
        object.__setattr__(self, "token_len", len(norm.split(" ")))


def parse_definitions(lines, source, path=None):
    """Parse JSON Lines into records. Returns ``(records, dropped)``.

    Several lines for one word are joined with ``"; "`` in file order.
    """
    texts = {}
    dropped = 0
    for lineno, line in enumerate(lines, 1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ParseError(f"invalid JSON: {exc.msg}", path, lineno) from None
        if not isinstance(obj, dict) or not isinstance(obj.get("word"), str) \
                or not isinstance(obj.get("definition"), str):
            raise ParseError('expected {"word": str, "definition": str}', path, lineno)
        word = obj["word"].strip().lower()
        if not word:
            raise ParseError("empty word", path, lineno)
        text = obj["definition"].strip()
        if not normalize(text):
            dropped += 1
            continue
        texts.setdefault(word, []).append(text)
    records = [DefinitionRecord(w, source, "; ".join(parts)) for w, parts in texts.items()]
    return records, dropped


def load_definitions(path, source):
    if isinstance(source, str):
        source = SourceId.infer(source)
    with open(path, encoding="utf-8") as fh:
        records, dropped = parse_definitions(fh, source, path)
    if dropped:
        log.info("%s: dropped %d empty definitions", path, dropped)
    return records


class VectorFormat(enum.Enum):
    PLAIN = "plain"        # word v1 ... vd
    HEADERED = "headered"  # "N d" header line, then plain rows


class EmbeddingTable:
    """Named vector space: ``words[i]`` owns row ``matrix[i]``.

    Rows are finite, nonzero, and all of length ``dim``.
    """

    def __init__(self, space_name, words, matrix):
        matrix = np.asarray(matrix, dtype=np.float64)
        words = list(words)
        if matrix.ndim != 2 or matrix.shape[0] != len(words):
            raise ValidationError(
                f"{space_name}: {len(words)} words but matrix shape {matrix.shape}")
        if matrix.shape[1] < 1:
            raise ValidationError(f"{space_name}: dimension must be positive")
        bad = ~np.isfinite(matrix).all(axis=1)
        if bad.any():
            raise ValidationError(f"{space_name}: non-finite value for {words[int(bad.argmax())]!r}")
        zero = ~matrix.any(axis=1)
        if zero.any():
            raise ValidationError(f"{space_name}: zero vector for {words[int(zero.argmax())]!r}")
        self.index = {}
        for i, w in enumerate(words):
            if w in self.index:
                raise ValidationError(f"{space_name}: duplicate word {w!r}")
            self.index[w] = i
        self.space_name = space_name
        self.words = words
        self.matrix = matrix
        self.matrix.flags.writeable = False

    @classmethod
    def from_dict(cls, space_name, vectors):
        words = list(vectors)
        if not words:
            raise ValidationError(f"{space_name}: no vectors")
        return cls(space_name, words, np.array([vectors[w] for w in words], dtype=np.float64))

    @property
    def dim(self):
        return self.matrix.shape[1]

    @property
    def vectors(self):
        return {w: self.matrix[i] for w, i in self.index.items()}

    def __len__(self):
        return len(self.words)

    def __contains__(self, word):
        return word in self.index

    def __getitem__(self, word):
        return self.matrix[self.index[word]]

    def rows(self, words):
        return self.matrix[[self.index[w] for w in words]]

    def __repr__(self):
        return f"EmbeddingTable({self.space_name!r}, n={len(self)}, dim={self.dim})"


def load_vectors(path, fmt=VectorFormat.PLAIN, space_name=None):
    """Parse a GloVe-style (plain) or word2vec/fastText ``.vec`` (headered) file.

    Repeated words keep their first row; all-zero rows are dropped. A header count that disagrees with
    the rows found is logged and ignored.
    """
    path = Path(path)
    fmt = VectorFormat(fmt)
    space_name = space_name or path.stem
    words, rows, seen = [], [], set()
    dim = None
    declared = None
    zero_rows = 0
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            parts = line.rstrip("\r\n").rstrip(" ").split(" ")
            if lineno == 1 and fmt is VectorFormat.HEADERED:
                try:
                    declared, dim = int(parts[0]), int(parts[1])
                    if len(parts) != 2 or dim < 1 or declared < 0:
                        raise ValueError
                except (ValueError, IndexError):
                    raise ParseError(f"bad header {line.strip()!r}, expected 'N d'", path, 1) from None
                continue
            if not parts[0]:
                if len(parts) == 1:
                    continue
                raise ParseError("row starts with a space", path, lineno)
            word, values = parts[0], parts[1:]
            if dim is None:
                if not values:
                    raise ParseError(f"no components for {word!r}", path, lineno)
                dim = len(values)
            if len(values) != dim:
                raise ParseError(
                    f"{word!r} has {len(values)} components, expected {dim}", path, lineno)
            try:
                vec = [float(v) for v in values]
            except ValueError:
                raise ParseError(f"non-numeric component for {word!r}", path, lineno) from None
            if not all(math.isfinite(v) for v in vec):
                raise ValidationError(f"non-finite component for {word!r}", path, lineno)
            if word in seen:
                log.warning("%s:%d: repeated word %r ignored", path, lineno, word)
                continue
            if not any(vec):
                # cosine is undefined; the word is treated as absent
                log.warning("%s:%d: zero vector for %r dropped", path, lineno, word)
                zero_rows += 1
                continue
            seen.add(word)
            words.append(word)
            rows.append(vec)
    if declared is not None and declared != len(words) + zero_rows:
        log.warning("%s: header declares %d rows, parsed %d", path, declared, len(words))
    if not words:
        raise ParseError("no vectors found", path)
    try:
        return EmbeddingTable(space_name, words, np.array(rows, dtype=np.float64))
    except ValidationError as exc:
        raise ValidationError(str(exc), path) from None


def dump_vectors(table, path, fmt=VectorFormat.HEADERED):
    """Write ``table`` so that :func:`load_vectors` reproduces it exactly."""
    fmt = VectorFormat(fmt)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        if fmt is VectorFormat.HEADERED:
            fh.write(f"{len(table)} {table.dim}\n")
        for w, row in zip(table.words, table.matrix):
            fh.write(w + " " + " ".join(repr(float(v)) for v in row) + "\n")


def clean_intersection(record_sets, required_sources=None, ranks=None):
    """Words defined by every required source, sorted by rank (then spelling).

    ``record_sets`` maps a source name (or :class:`SourceId`) to its records.
    Words without a rank sort after ranked ones.
    """
    def key(src):
        return src.name if isinstance(src, SourceId) else src

    sets = {key(s): {r.word for r in recs} for s, recs in record_sets.items()}
    required = [key(s) for s in (required_sources if required_sources is not None else sets)]
    if not required:
        raise ValueError("at least one required source")
    missing = [s for s in required if s not in sets]
    if missing:
        return []
    common = set.intersection(*(sets[s] for s in required))
    ranks = ranks or {}
    return sorted(common, key=lambda w: (ranks.get(w, math.inf), w))
