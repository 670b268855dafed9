"""Command-line front end: parse, learn, invert, generate, compare.

Exit codes: 0 success, 1 input-data failure (unparsable sample),
2 usage or grammar failure (bad flags, missing paths, invalid grammar).
"""

from __future__ import annotations

import argparse
import csv
import io
import os
import sys
from pathlib import Path

from . import __version__
from .analysis import distribution_from_counts, ks_compare, uncovered_keys
from .generator import GeneratorConfig, generate_suite, write_suite
from .grammar import GrammarError, normalize_probabilities, parse_grammar, serialize_grammar, validate
from .inverter import invert
from .learner import CountTable, apply_counts, count_corpus
from .parser import ParseError, parser_for
from .tree import pretty, tree_to_json

DEFAULT_MAX_EXPANSIONS = 200
DEFAULT_RESAMPLES = 1000
DEFAULT_COUNT = 100
DEFAULT_SEED = 0

EXIT_OK, EXIT_DATA, EXIT_USAGE = 0, 1, 2
SKIP_NAMES = {"manifest.json"}


class UsageError(Exception):
    pass


def _color(text: str, code: str) -> str:
    if os.environ.get("NO_COLOR") or not sys.stderr.isatty():
        return text
    return f"\033[{code}m{text}\033[0m"


def _err(msg: str) -> None:
    print(_color("error:", "31") + " " + msg, file=sys.stderr)


def _note(msg: str) -> None:
    print(msg, file=sys.stderr)


def load_grammar(path):
    p = Path(path)
    if not p.is_file():
        raise UsageError(f"grammar file not found: {p}")
    g = parse_grammar(p.read_text(encoding="utf-8"))
    errors = [d for d in validate(g) if d.severity == "error"]
    if errors:
        raise GrammarError("; ".join(d.message for d in errors))
    return g


def read_dir(path) -> list[tuple[str, str]]:
    """Sample files of a corpus or suite directory, sorted by relative path.

    ``manifest.json`` and ``*.tree.json`` written by ``generate`` are skipped.
    """
    root = Path(path)
    if not root.is_dir():
        raise UsageError(f"directory not found: {root}")
    out = []
    for p in sorted(root.rglob("*")):
        if not p.is_file() or p.name in SKIP_NAMES or p.name.endswith(".tree.json"):
            continue
        out.append((str(p.relative_to(root)), p.read_text(encoding="utf-8")))
    return out


def _write(path, text: str) -> None:
    p = Path(path)
    if p.parent and not p.parent.exists():
        raise UsageError(f"output directory does not exist: {p.parent}")
    p.write_text(text, encoding="utf-8")


def cmd_parse(args) -> int:
    g = load_grammar(args.grammar)
    src = Path(args.input)
    if not src.is_file():
        raise UsageError(f"input file not found: {src}")
    result = parser_for(g).parse(src.read_text(encoding="utf-8"), source=str(src))
    print(tree_to_json(result.tree) if args.json else pretty(result.tree))
    if result.ambiguous:
        _note(f"note: {src} is ambiguous; the canonical tree was chosen")
    return EXIT_OK


def cmd_learn(args) -> int:
    g = load_grammar(args.grammar)
    corpus = read_dir(args.corpus)
    counted = count_corpus(g, corpus, skip_unparsable=args.skip_unparsable)
    learned = apply_counts(g, counted.table)
    _write(args.out, serialize_grammar(learned))
    if args.counts:
        _write(args.counts, counted.table.to_json(g) + "\n")
    for name, e in counted.skipped:
        _note(f"skipped {name}: {e}")
    for name in counted.ambiguous:
        _note(f"note: {name} is ambiguous; the canonical tree was counted")
    _note(f"learned from {counted.parsed} sample(s), skipped {len(counted.skipped)}")
    return EXIT_OK


def cmd_invert(args) -> int:
    g = load_grammar(args.grammar)
    if args.counts:
        table = CountTable.from_json(Path(args.counts).read_text(encoding="utf-8"), g)
        g = apply_counts(g, table)
    _write(args.out, serialize_grammar(invert(normalize_probabilities(g))))
    return EXIT_OK


def cmd_generate(args) -> int:
    g = normalize_probabilities(load_grammar(args.grammar))
    cfg = GeneratorConfig(args.max_expansions, args.seed, args.count)
    suite = generate_suite(g, cfg)
    write_suite(args.out, suite, g, cfg, emit_trees=args.emit_trees)
    _note(f"wrote {len(suite)} input(s) to {args.out}")
    return EXIT_OK


def cmd_compare(args) -> int:
    g = load_grammar(args.grammar)
    a_files, b_files = read_dir(args.suite_a), read_dir(args.suite_b)
    dists = []
    for label, files in (("a", a_files), ("b", b_files)):
        counted = count_corpus(g, files, skip_unparsable=args.skip_unparsable)
        for name, e in counted.skipped:
            _note(f"skipped {label}/{name}: {e}")
        dist = distribution_from_counts(g, counted.table)
        if dist.empty:
            _err(f"suite {label} has no parsable inputs")
            return EXIT_DATA
        dists.append(dist)
    a, b = dists
    report = ks_compare(a, b, args.resamples, args.seed)
    text = report.to_json(uncovered_keys(a, b)) + "\n"
    if args.report:
        _write(args.report, text)
    else:
        sys.stdout.write(text)
    if args.csv:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["nonterminal", "alternative", "frequency_a", "frequency_b"])
        for key, fa, fb in zip(a.keys, a.values, b.values):
            w.writerow([key[0], key[1], repr(fa), repr(fb)])
        _write(args.csv, buf.getvalue())
    _note("measure: production-usage frequency (stand-in for method-call frequency)")
    return EXIT_OK


def cmd_validate(args) -> int:
    g = load_grammar_unchecked(args.grammar)
    diags = validate(g)
    for d in diags:
        print(d)
    return EXIT_USAGE if any(d.severity == "error" for d in diags) else EXIT_OK


def load_grammar_unchecked(path):
    p = Path(path)
    if not p.is_file():
        raise UsageError(f"grammar file not found: {p}")
    return parse_grammar(p.read_text(encoding="utf-8"))


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="pgfuzz", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    def command(name, func, help):
        p = sub.add_parser(name, help=help)
        p.add_argument("--grammar", "-g", required=True, help="grammar file")
        p.set_defaults(func=func)
        return p

    p = command("parse", cmd_parse, "parse one input and print its derivation tree")
    p.add_argument("--input", "-i", required=True)
    p.add_argument("--json", action="store_true", help="print the tree as JSON")

    p = command("learn", cmd_learn, "learn probabilities from a corpus directory")
    p.add_argument("--corpus", "-c", required=True)
    p.add_argument("--out", "-o", required=True, help="probabilistic grammar output")
    p.add_argument("--counts", help="also write the expansion counts as JSON")
    p.add_argument("--skip-unparsable", action="store_true")

    p = command("invert", cmd_invert, "invert the probabilities of a grammar")
    p.add_argument("--out", "-o", required=True)
    p.add_argument("--counts", help="exact counts JSON from 'learn --counts'")

    p = command("generate", cmd_generate, "generate an input suite")
    p.add_argument("--out", "-o", required=True, help="output directory")
    p.add_argument("--count", "-n", type=int, default=DEFAULT_COUNT)
    p.add_argument("--max-expansions", type=int, default=DEFAULT_MAX_EXPANSIONS)
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--emit-trees", action="store_true")

    p = command("compare", cmd_compare, "compare production usage of two suites")
    p.add_argument("--suite-a", "-a", required=True)
    p.add_argument("--suite-b", "-b", required=True)
    p.add_argument("--resamples", type=int, default=DEFAULT_RESAMPLES)
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--report", help="write the JSON report here instead of stdout")
    p.add_argument("--csv", help="write per-key frequencies as CSV")
    p.add_argument("--skip-unparsable", action="store_true")

    command("validate", cmd_validate, "report grammar diagnostics")
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as e:
        return EXIT_USAGE if e.code else EXIT_OK
    try:
        return args.func(args)
    except ParseError as e:
        _err(str(e))
        return EXIT_DATA
    except (UsageError, GrammarError, ValueError, OSError) as e:
        _err(str(e))
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
