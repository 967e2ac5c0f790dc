"""Seeded synthetic inputs: big lexicons, a small end-to-end corpus, random spaces.

Nothing here pretends to be real dictionary data. The corpus fixture is
shaped like the real thing (seven sources, tiers, two word spaces) so that
every pipeline stage has something non-trivial to chew on.
"""

from __future__ import annotations

import itertools
import json
from pathlib import Path

import numpy as np

from .ingest import EmbeddingTable, dump_vectors
from .lexicon import LexiconEntry, Tier, TierConfig, assign_pos, write_sampled

_ONSETS = "b c d f g h j k l m n p r s t v w z br cr dr fl gr pl st tr".split()
_VOWELS = "a e i o u ai ea oo".split()


def synthetic_words(n, seed=0):
    """``n`` distinct lowercase pseudo-words, deterministic in ``seed``."""
    syllables = [o + v for o, v in itertools.product(_ONSETS, _VOWELS)]
    rng = np.random.default_rng(seed)
    out, seen = [], set()
    while len(out) < n:
        k = int(rng.integers(2, 5))
        w = "".join(syllables[i] for i in rng.integers(0, len(syllables), k))
        if w not in seen:
            seen.add(w)
            out.append(w)
    return out


def write_lexicon(path, n, seed=0, counts=False):
    words = synthetic_words(n, seed)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for i, w in enumerate(words):
            fh.write(f"{w}\t{10 * (n - i)}\n" if counts else f"{w}\n")
    return words


def random_space(name, words, dim, seed=0):
    rng = np.random.default_rng(seed)
    return EmbeddingTable(name, words, rng.normal(size=(len(words), dim)))


_FILLER = (
    "a an the of to in for with by from that which or and as any some "
    "person place thing act state quality process part group kind form system "
    "small large common usually especially often typically formal informal "
    "used made having being relating belonging done given known found "
    "body water light time land work food money power life language body "
    "animal plant tool building vehicle instrument substance structure member "
    "move change make cause produce hold keep carry bring give take show "
    "quick slow soft hard bright dark open closed high low young old"
).split()

PUBLISHED = ("wordnet", "merriam", "dictcom")
GENERATED = ("gpt3-1", "gpt3-2", "gpt4-1", "gpt4-2")
SOURCES = PUBLISHED + GENERATED

_SUFFIXES = ("", "", "", "", "ly", "ous", "ate", "ful", "ize")


def _paraphrase(tokens, rate, rng):
    out = []
    for t in tokens:
        u = rng.random()
        if u < rate / 2:
            out.append(_FILLER[int(rng.integers(len(_FILLER)))])
        elif u < rate:
            continue
        else:
            out.append(t)
    return out or tokens[:1]


def _definitions(word, tier, rng):
    core = [_FILLER[i] for i in rng.integers(0, len(_FILLER), int(rng.integers(8, 15)))]
    extra = [_FILLER[i] for i in rng.integers(0, len(_FILLER), int(rng.integers(6, 20)))]
    merriam = core + extra
    defs = {
        "wordnet": core[: max(3, len(core) * 2 // 3)],
        "merriam": merriam,
        # borrows heavily from merriam
        "dictcom": _paraphrase(merriam, 0.15, rng) + extra[: len(extra) // 2],
    }
    g3 = _paraphrase(core, 0.45, rng)
    defs["gpt3-1"] = g3
    defs["gpt3-2"] = _paraphrase(g3, 0.3, rng)
    g4 = ["the", "word", word, "refers", "to"] + _paraphrase(core + extra, 0.35, rng)
    defs["gpt4-1"] = g4
    defs["gpt4-2"] = _paraphrase(g4, 0.2, rng) + ["in", "general", "use"]
    text = {k: " ".join(v) + "." for k, v in defs.items()}
    if tier is Tier.LOW and rng.random() < 0.15:
        text["gpt3-1"] = f"I'm sorry, I don't know the meaning of the word {word}."
    return text


FIXTURE_TIER_SIZE = 20


def build_fixture(root, seed=7, n_per_tier=FIXTURE_TIER_SIZE, extra=2):
    """Write a small complete corpus under ``root``.

    Layout::

        lexicon.tsv            sampled lexicon (tiers + heuristic POS)
        corpus/<source>.jsonl  seven definition sources
        defvec/<source>.vec    definition embeddings (headered text)
        wordvec/glove.txt      plain-text word space
        wordvec/fasttext.vec   headered word space

    ``extra`` additional sampled words are missing from one source so the
    coverage filter has something to remove.
    """
    root = Path(root)
    rng = np.random.default_rng(seed)
    config = TierConfig()
    words = synthetic_words(n_per_tier * 3 + extra, seed)
    entries = []
    windows = {t: [w for tt, w in config.windows() if tt is t] for t in (Tier.HIGH, Tier.MEDIUM, Tier.LOW)}
    tiers = [Tier.HIGH, Tier.MEDIUM, Tier.LOW]
    for i, w in enumerate(words):
        tier = tiers[i % 3]
        lo, hi = windows[tier][i % len(windows[tier])]
        rank = lo + i  # unique: windows are far apart and i < window width
        suffix = _SUFFIXES[int(rng.integers(len(_SUFFIXES)))]
        entries.append(LexiconEntry(w + suffix, rank, tier))
    entries = assign_pos(sorted(entries, key=lambda e: e.rank))
    assert len({e.word for e in entries}) == len(entries)

    root.mkdir(parents=True, exist_ok=True)
    write_sampled(entries, root / "lexicon.tsv")

    missing = {e.word for e in entries[-extra:]} if extra else set()
    texts = {e.word: _definitions(e.word, e.tier, rng) for e in entries}
    (root / "corpus").mkdir(exist_ok=True)
    for src in SOURCES:
        with open(root / "corpus" / f"{src}.jsonl", "w", encoding="utf-8", newline="\n") as fh:
            for e in entries:
                if src == "wordnet" and e.word in missing:
                    continue
                fh.write(json.dumps({"word": e.word, "definition": texts[e.word][src]}) + "\n")

    # latent meaning -> noisy views; word spaces get noisier as frequency drops
    latent_dim = 12
    z = rng.normal(size=(len(entries), latent_dim))
    tier_noise = {Tier.HIGH: 0.3, Tier.MEDIUM: 0.7, Tier.LOW: 1.6}
    noise_scale = np.array([tier_noise[e.tier] for e in entries])[:, None]
    names = [e.word for e in entries]

    (root / "wordvec").mkdir(exist_ok=True)
    for name, dim, fmt, fname in (("glove", 25, "plain", "glove.txt"),
                                  ("fasttext", 30, "headered", "fasttext.vec")):
        proj = rng.normal(size=(latent_dim, dim))
        m = z @ proj + noise_scale * rng.normal(size=(len(entries), dim)) * 3.0
        dump_vectors(EmbeddingTable(name, names, np.round(m, 6)), root / "wordvec" / fname, fmt)

    (root / "defvec").mkdir(exist_ok=True)
    proj = rng.normal(size=(latent_dim, 16))
    for k, src in enumerate(SOURCES):
        view = z @ proj + 2.0 * rng.normal(size=(len(entries), 16))
        keep = [i for i, w in enumerate(names) if not (src == "wordnet" and w in missing)]
        table = EmbeddingTable(src, [names[i] for i in keep], np.round(view[keep], 6))
        dump_vectors(table, root / "defvec" / f"{src}.vec", "headered")
    return entries
