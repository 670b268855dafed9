"""Compare the compiled and pure-Python parsing kernels.

    python benchmarks/bench_parser.py [--repeat 3] [--inputs 2000]

Each workload is parsed with both kernels; the best wall time of
``--repeat`` runs is reported together with the speedup.  Both kernels must
produce identical trees, which is checked on every run.
"""

import argparse
import sys
import time
from pathlib import Path

from pgfuzz import GeneratorConfig, generate_suite, normalize_probabilities, parse_grammar
from pgfuzz import _chart_py
from pgfuzz.parser import Parser

DATA = Path(__file__).resolve().parent.parent / "tests" / "data"


def load(name):
    return parse_grammar((DATA / name).read_text())


def workloads(n_inputs):
    arith = load("arith.g")
    pcfg = normalize_probabilities(load("pcfg.g"))
    suite = [x.text for x in generate_suite(pcfg, GeneratorConfig(500, 0, n_inputs))]
    nested = "(" * 300 + "1" + ")" * 300
    return [
        ("arith: 10k-char left-recursive sum", arith, ["+".join(["1"] * 5000)]),
        ("arith: 300-deep parentheses", arith, [nested]),
        ("arith: mixed expression x200", arith, ["1 + (2 * 3) - -4 / (5 + 6 * 7)"] * 200),
        (f"pcfg: {n_inputs} generated inputs", pcfg, suite),
    ]


def run(parser, texts):
    return [parser.parse(t) for t in texts]


def best_time(fn, repeat):
    best, out = float("inf"), None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--inputs", type=int, default=2000)
    args = ap.parse_args(argv)
    try:
        from pgfuzz import _chart
    except ImportError:
        print("compiled kernel not built; nothing to compare", file=sys.stderr)
        return 1

    print(f"{'workload':40} {'chars':>8} {'python s':>10} {'compiled s':>11} {'speedup':>8}")
    for title, g, texts in workloads(args.inputs):
        slow_t, slow = best_time(lambda: run(Parser(g, _chart_py), texts), args.repeat)
        fast_t, fast = best_time(lambda: run(Parser(g, _chart), texts), args.repeat)
        if slow != fast:
            print(f"kernels disagree on {title}", file=sys.stderr)
            return 1
        chars = sum(map(len, texts))
        print(f"{title:40} {chars:8d} {slow_t:10.3f} {fast_t:11.3f} {slow_t / fast_t:7.1f}x")
    return 0


if __name__ == "__main__":
    sys.exit(main())
