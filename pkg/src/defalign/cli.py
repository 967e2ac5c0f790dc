"""Command-line entry point: ``defalign {sample,fetch,embed,analyze,report}``.

Every subcommand writes into an output directory that holds one
``manifest.json`` describing the inputs of each run made into it.
"""

from __future__ import annotations

import argparse
import hashlib
import itertools
import json
import logging
import os
import sys
import time
from dataclasses import asdict
from pathlib import Path

from . import __version__, kernels
from .consistency import consistency_matrix
from .errors import ConfigError, DefalignError, ParseError, UndefinedCorrelationError
from .ingest import (EmbeddingTable, SourceId, SourceKind, VectorFormat, clean_intersection,
                     dump_vectors, load_definitions, load_vectors)
from .lexicon import (TierConfig, assign_pos, load_lexicon, read_sampled, sample_tiers,
                      write_sampled)
from .netclient import Client, ClientConfig, EmbedRequest
from .report import Format, LengthTable, MatchSummary, Stratum, _denan, emit, stratify
from .surface import (LengthUnit, ScoreTable, length_correlation, length_stats,
                      match_histogram, pair_edit_distances)
from .vectorspace import (DistanceKind, mean_distance_matrix, outlier_worksheet,
                          pair_distances)

log = logging.getLogger("defalign")

MANIFEST = "manifest.json"


# -- helpers -----------------------------------------------------------------

def _digest(path):
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def _now():
    epoch = os.environ.get("SOURCE_DATE_EPOCH")
    t = int(epoch) if epoch else time.time()
    return time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime(t))


def write_manifest(out_dir, run_key, config, inputs, seed=None):
    """Record one run in ``out_dir/manifest.json``, keeping other runs' entries."""
    path = Path(out_dir) / MANIFEST
    manifest = {"runs": {}}
    if path.exists():
        with open(path, encoding="utf-8") as fh:
            manifest = json.load(fh)
    manifest["runs"][run_key] = {
        "tool": "defalign",
        "version": __version__,
        "backend": kernels.BACKEND,
        "config": config,
        "inputs": {str(p): _digest(p) for p in sorted(inputs, key=str)},
        "seed": seed,
        "finished": _now(),
    }
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(manifest, fh, sort_keys=True, indent=2)
        fh.write("\n")
    return path


def _interval(text):
    try:
        lo, hi = (int(x) for x in text.split("-"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected LO-HI, got {text!r}") from None
    return lo, hi


def _read_config_file(path):
    """``key = value`` lines; ``#`` comments. Keys use flag spelling with - or _."""
    out = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ParseError(f"expected 'key = value', got {line!r}", path, lineno)
            k, v = (s.strip() for s in line.split("=", 1))
            out[k.replace("-", "_")] = v
    return out


def _read_words(path):
    """Word list from a sampled lexicon TSV or a plain one-word-per-line file."""
    with open(path, encoding="utf-8") as fh:
        first = fh.readline()
    if first.startswith("word\trank"):
        return [e.word for e in read_sampled(path)]
    return [w for w, _ in load_lexicon(path)]


def _detect_format(path):
    with open(path, encoding="utf-8") as fh:
        parts = fh.readline().split()
    if len(parts) == 2 and all(p.isdigit() for p in parts):
        return VectorFormat.HEADERED
    return VectorFormat.PLAIN


def _load_sources(corpus_dir):
    """``<name>.jsonl`` files; ``sources.json`` may pin kinds and prompt types."""
    corpus_dir = Path(corpus_dir)
    files = sorted(corpus_dir.glob("*.jsonl"))
    if not files:
        raise ConfigError(f"no *.jsonl definition files in {corpus_dir}")
    pinned = {}
    meta = corpus_dir / "sources.json"
    if meta.exists():
        with open(meta, encoding="utf-8") as fh:
            for name, spec in json.load(fh).items():
                pinned[name] = SourceId(name, SourceKind(spec.get("kind", "published")),
                                        spec.get("prompt_type"))
    out = {}
    for f in files:
        sid = pinned.get(f.stem) or SourceId.infer(f.stem)
        out[sid.name] = (sid, load_definitions(f, sid), f)
    # published sources first, then generated, each alphabetically
    return dict(sorted(out.items(), key=lambda kv: (kv[1][0].generated, kv[0])))


def _client_config(args, **extra):
    return ClientConfig(
        base_url=args.base_url,
        model_name=args.model,
        api_key_env=args.api_key_env,
        prompt_type=getattr(args, "prompt", 1),
        requests_per_minute=args.rpm,
        max_retries=args.max_retries,
        cache_dir=args.cache_dir,
        backoff_base=args.backoff,
        batch_size=getattr(args, "batch_size", 64),
        max_in_flight=args.jobs,
        **extra,
    )


# -- subcommands -------------------------------------------------------------

def cmd_sample(args):
    lexicon = load_lexicon(args.lexicon)
    if args.top is not None or args.mid or args.low:
        config = TierConfig(
            top_window=(1, args.top) if args.top is not None else (1, 1000),
            mid_windows=tuple(args.mid or ()),
            low_windows=tuple(args.low or ()),
        )
    else:
        config = TierConfig()
    entries = assign_pos(sample_tiers(lexicon, config), args.pos_file)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_sampled(entries, out / "sampled.tsv")
    inputs = [args.lexicon] + ([args.pos_file] if args.pos_file else [])
    write_manifest(out, "sample", {"tiers": asdict(config)}, inputs)
    log.info("sampled %d words into %s", len(entries), out / "sampled.tsv")
    return 0


def cmd_fetch(args):
    words = _read_words(args.words)
    config = _client_config(args, source_name=args.source_name)
    config.api_key()
    client = Client(config)
    records = client.fetch_many(words)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    target = out / f"{config.source.name}.jsonl"
    with open(target, "w", encoding="utf-8", newline="\n") as fh:
        for r in records:
            fh.write(json.dumps({"word": r.word, "definition": r.text}, ensure_ascii=False) + "\n")
    snap = asdict(config)
    write_manifest(out, f"fetch:{config.source.name}", snap, [args.words])
    log.info("%s: %d definitions, %d network calls", target, len(records), client.network_calls)
    return 0


def _embed_source(client, name, records):
    texts = [r.text for r in records]
    vectors = client.embed_texts(EmbedRequest(texts, name))
    return EmbeddingTable(name, [r.word for r in records], vectors)


def cmd_embed(args):
    sources = _load_sources(args.corpus)
    if args.source:
        unknown = set(args.source) - set(sources)
        if unknown:
            raise ConfigError(f"unknown sources {sorted(unknown)}")
        sources = {k: v for k, v in sources.items() if k in args.source}
    config = _client_config(args)
    config.api_key()
    client = Client(config)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for name, (_, records, _) in sources.items():
        dump_vectors(_embed_source(client, name, records), out / f"{name}.vec")
    write_manifest(out, "embed", asdict(config), [f for _, _, f in sources.values()])
    return 0


ONLY = ("surface", "vectors", "consistency")


def cmd_analyze(args):
    # validate and load everything before computing or writing anything
    only = set(args.only) if args.only else set(ONLY)
    entries = read_sampled(args.lexicon)
    if any(e.pos is None for e in entries):
        entries = assign_pos(entries)
    ranks = {e.word: e.rank for e in entries}
    tiers = {e.word: e.tier for e in entries}
    sources = _load_sources(args.corpus)
    inputs = [args.lexicon] + [f for _, _, f in sources.values()]
    for name, (_, recs, _) in sources.items():
        stray = [r.word for r in recs if r.word not in ranks]
        if stray:
            log.warning("%s: %d words not in the lexicon are ignored", name, len(stray))
    records = {n: [r for r in recs if r.word in ranks] for n, (_, recs, _) in sources.items()}
    ids = {n: sid for n, (sid, _, _) in sources.items()}
    vocab = clean_intersection(records, list(records), ranks)
    if not vocab:
        raise ConfigError("no word is defined by every source")

    need_vectors = only & {"vectors", "consistency"}
    def_tables = {}
    missing = []
    if need_vectors:
        if args.def_embeddings is None and args.offline:
            raise ConfigError("--offline needs --def-embeddings")
        for name in sources:
            p = Path(args.def_embeddings) / f"{name}.vec" if args.def_embeddings else None
            if p is not None and p.exists():
                def_tables[name] = load_vectors(p, _detect_format(p), space_name=name)
                inputs.append(p)
            else:
                missing.append(name)
        if missing and (args.offline or not args.base_url):
            raise ConfigError(
                "missing definition embeddings for " + ", ".join(missing)
                + (" (offline)" if args.offline else "; give --base-url to compute them"))
    word_spaces = []
    if "consistency" in only:
        if not args.word_vectors:
            raise ConfigError("consistency needs at least one --word-vectors NAME=PATH")
        for spec in args.word_vectors:
            name, sep, p = spec.partition("=")
            if not sep or not name or not p:
                raise ConfigError(f"--word-vectors expects NAME=PATH, got {spec!r}")
            if not Path(p).exists():
                raise ConfigError(f"word vectors not found: {p}")
            word_spaces.append(load_vectors(p, _detect_format(p), space_name=name))
            inputs.append(p)
    if missing:
        config = _client_config(args)
        config.api_key()
        client = Client(config)
        for name in missing:
            def_tables[name] = _embed_source(client, name, sources[name][1])

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    kind = DistanceKind(args.kind)
    names = list(sources)
    pub = [n for n in names if not ids[n].generated]
    gen = [n for n in names if ids[n].generated]
    cross = [(g, p) for g in gen for p in pub] or list(itertools.combinations(names, 2))

    if "surface" in only:
        lengths = LengthTable([(n, u, length_stats(records[n], u))
                               for n in names for u in LengthUnit])
        emit(lengths, Format.CSV, out / "lengths.csv")
        emit(lengths, Format.JSON, out / "lengths.json")
        corr_rows = []
        for a, b in itertools.combinations(gen, 2):
            if a.rsplit("-", 1)[0] != b.rsplit("-", 1)[0]:
                continue
            for u in LengthUnit:
                try:
                    r = length_correlation(records[a], records[b], u)
                except UndefinedCorrelationError:
                    r = float("nan")
                corr_rows.append({"a": a, "b": b, "unit": u.value, "r": r})
        _write_json(out / "length_correlation.json", corr_rows)

        (out / "lcs").mkdir(exist_ok=True)
        hists = []
        for a, b in itertools.combinations(names, 2):
            h = match_histogram(records[a], records[b], vocab, args.min_match_words, (a, b))
            hists.append(h)
            emit(h, Format.CSV, out / "lcs" / f"{a}__{b}.csv")
            emit(h, Format.JSON, out / "lcs" / f"{a}__{b}.json")
        summary = MatchSummary(hists)
        emit(summary, Format.CSV, out / "lcs_summary.csv")
        emit(summary, Format.PLOT, out / "lcs_average_series.csv")

        (out / "edit").mkdir(exist_ok=True)
        edit_tables = []
        for a, b in itertools.combinations(names, 2):
            t = pair_edit_distances(records[a], records[b], vocab)
            emit(t, Format.CSV, out / "edit" / f"{a}__{b}.csv")
            if (a, b) in cross or (b, a) in cross:
                edit_tables.append(t)
        emit(stratify(edit_tables, entries, Stratum.TIER, sources=ids), Format.CSV,
             out / "edit_strata_tier.csv")

    if "vectors" in only:
        (out / "distances").mkdir(exist_ok=True)
        tables = []
        for g, p in cross:
            t = pair_distances(def_tables[g], def_tables[p], vocab, kind)
            tables.append(t)
            emit(t, Format.CSV, out / "distances" / f"{g}__{p}.csv")
        for by in Stratum:
            st = stratify(tables, entries, by, sources=ids)
            emit(st, Format.CSV, out / f"strata_{by.value}.csv")
            emit(st, Format.JSON, out / f"strata_{by.value}.json")
        emit(mean_distance_matrix({n: def_tables[n] for n in names}, vocab, kind),
             Format.CSV, out / "mean_distance_matrix.csv")
        (out / "worksheets").mkdir(exist_ok=True)
        okind = DistanceKind(args.outlier_kind)
        for g, p in cross:
            t = pair_distances(def_tables[p], def_tables[g], vocab, okind)
            ws = outlier_worksheet(t, min(args.top_k, len(t)), records[p], records[g])
            emit(ws, Format.CSV, out / "worksheets" / f"{p}__{g}.csv")

    if "consistency" in only:
        grid = consistency_matrix([def_tables[n] for n in names], word_spaces, vocab, tiers,
                                  kind, jobs=args.jobs)
        emit(grid, Format.CSV, out / "consistency_grid.csv")
        emit(grid, Format.JSON, out / "consistency_grid.json")
        emit(grid, Format.PLOT, out / "consistency_series.csv")
        (out / "consistency").mkdir(exist_ok=True)
        for (s, sp), rep in grid.reports.items():
            emit(rep, Format.JSON, out / "consistency" / f"{s}__{sp}.json")

    config = {k: v for k, v in sorted(vars(args).items()) if k not in ("func",)}
    config["vocabulary_size"] = len(vocab)
    write_manifest(out, "analyze", config, inputs, seed=args.seed)
    log.info("analyzed %d words from %d sources into %s", len(vocab), len(names), out)
    return 0


def _write_json(path, obj):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(_denan(obj), fh, sort_keys=True, indent=2)
        fh.write("\n")


def cmd_report(args):
    entries = read_sampled(args.lexicon)
    if any(e.pos is None for e in entries):
        entries = assign_pos(entries)
    files = sorted(Path(args.distances).glob("*__*.csv"))
    if not files:
        raise ConfigError(f"no <a>__<b>.csv distance files in {args.distances}")
    tables = []
    for f in files:
        a, b = f.stem.split("__", 1)
        entries_ = {}
        with open(f, encoding="utf-8") as fh:
            header = fh.readline().strip()
            if header != "word,distance":
                raise ParseError("expected header 'word,distance'", f, 1)
            for lineno, line in enumerate(fh, 2):
                w, _, d = line.rstrip("\n").rpartition(",")
                try:
                    entries_[w] = float(d)
                except ValueError:
                    raise ParseError(f"bad distance {d!r}", f, lineno) from None
        tables.append(ScoreTable(a, b, args.metric, entries_))
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    st = stratify(tables, entries, Stratum(args.by), metric_name=args.metric)
    emit(st, Format.CSV, out / f"strata_{args.by}.csv")
    emit(st, Format.JSON, out / f"strata_{args.by}.json")
    write_manifest(out, f"report:{args.by}", {"by": args.by, "metric": args.metric},
                   [args.lexicon] + files)
    return 0


# -- parser ------------------------------------------------------------------

def _add_client_flags(p):
    p.add_argument("--base-url", help="provider base URL, e.g. https://api.openai.com/v1")
    p.add_argument("--model", default="gpt-4")
    p.add_argument("--api-key-env", default="OPENAI_API_KEY")
    p.add_argument("--rpm", type=int, default=60, help="requests per minute")
    p.add_argument("--max-retries", type=int, default=3)
    p.add_argument("--backoff", type=float, default=1.0, help="first retry delay, seconds")
    p.add_argument("--cache-dir", default=".defalign-cache")


def build_parser():
    parser = argparse.ArgumentParser(prog="defalign", description=__doc__.splitlines()[0])
    parser.add_argument("--config", help="key = value file supplying flag defaults")
    parser.add_argument("-v", "--verbose", action="store_true")
    parser.add_argument("--version", action="version", version=f"defalign {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sample", help="sample tiered study words from a frequency lexicon")
    p.add_argument("lexicon")
    p.add_argument("--top", type=int, help="top window is ranks 1..TOP")
    p.add_argument("--mid", type=_interval, action="append", help="medium window LO-HI")
    p.add_argument("--low", type=_interval, action="append", help="low window LO-HI")
    p.add_argument("--pos-file", help="word<TAB>TAG annotations")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("fetch", help="ask a chat endpoint to define each word")
    p.add_argument("words", help="sampled.tsv or one word per line")
    _add_client_flags(p)
    p.add_argument("--prompt", type=int, choices=(1, 2), default=1)
    p.add_argument("--source-name", help="output source name (default MODEL-PROMPT)")
    p.add_argument("--jobs", type=int, default=1, help="requests in flight")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_fetch)

    p = sub.add_parser("embed", help="embed definition texts through an embeddings endpoint")
    p.add_argument("corpus", help="directory of <source>.jsonl files")
    _add_client_flags(p)
    p.add_argument("--source", action="append", help="only these sources")
    p.add_argument("--batch-size", type=int, default=64)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_embed)

    p = sub.add_parser("analyze", help="run the measurement pipeline on a corpus")
    p.add_argument("--corpus", required=True, help="directory of <source>.jsonl files")
    p.add_argument("--lexicon", required=True, help="sampled.tsv from 'sample'")
    p.add_argument("--def-embeddings", help="directory of <source>.vec definition embeddings")
    p.add_argument("--word-vectors", action="append", metavar="NAME=PATH")
    p.add_argument("--only", action="append", choices=ONLY)
    p.add_argument("--kind", choices=[k.value for k in DistanceKind], default="cosine")
    p.add_argument("--outlier-kind", choices=[k.value for k in DistanceKind],
                   default="euclidean")
    p.add_argument("--top-k", type=int, default=50)
    p.add_argument("--min-match-words", type=int, default=5)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--seed", type=int, default=None, help="recorded in the manifest")
    p.add_argument("--offline", action="store_true", help="never touch the network")
    _add_client_flags(p)
    p.set_defaults(model="text-embedding-3-small")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("report", help="re-stratify per-word distance CSVs")
    p.add_argument("--distances", required=True, help="directory of <a>__<b>.csv files")
    p.add_argument("--lexicon", required=True)
    p.add_argument("--by", choices=[s.value for s in Stratum], default="tier")
    p.add_argument("--metric", default="cosine")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_report)
    return parser


def _apply_config_file(parser, argv):
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    if not known.config:
        return
    values = _read_config_file(known.config)
    for action in parser._subparsers._group_actions:
        for sp in action.choices.values():
            dests = {a.dest: a for a in sp._actions}
            defaults = {}
            for k, v in values.items():
                a = dests.get(k)
                if a is None:
                    continue
                if a.nargs == 0:
                    defaults[k] = v.lower() in ("1", "true", "yes", "on")
                elif isinstance(a, argparse._AppendAction):
                    defaults[k] = [a.type(x.strip()) if a.type else x.strip()
                                   for x in v.split(",") if x.strip()]
                else:
                    defaults[k] = a.type(v) if a.type else v
                    if a.required:
                        a.required = False
            sp.set_defaults(**defaults)


def main(argv=None):
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        _apply_config_file(parser, argv)
    except (OSError, DefalignError, ValueError) as exc:
        print(f"defalign: config: {exc}", file=sys.stderr)
        return ConfigError.exit_code
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except DefalignError as exc:
        print(f"defalign: {exc}", file=sys.stderr)
        return exc.exit_code
    except FileNotFoundError as exc:
        print(f"defalign: {exc}", file=sys.stderr)
        return ConfigError.exit_code


if __name__ == "__main__":
    sys.exit(main())
