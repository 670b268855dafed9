"""Bounded-size input generation from probabilistic grammars.

Generation runs in two phases.  Phase 1 expands open nonterminals
breadth-first, picking alternatives by their probabilities, until one more
expansion would exceed ``max_expansions``.  Phase 2 closes every node that is
still open using only alternatives that finish in the fewest expansions,
chosen uniformly; probabilities are ignored there, except that alternatives
with positive probability are preferred whenever they can finish on their
own (see ``closure_table``).

Random streams: input ``i`` of a suite with seed ``s`` uses Python's MT19937
(``random.Random``) seeded with the SHA-256 digest of ``"s:i"``.  That makes
every input independently reproducible and portable across platforms.
"""

from __future__ import annotations

import hashlib
import json
import random
from bisect import bisect_right
from collections import deque
from dataclasses import dataclass
from itertools import accumulate
from pathlib import Path
from typing import Optional

from .grammar import Grammar, GrammarError, productive_costs, serialize_grammar
from .tree import DerivationTree, Leaf, Node, serialize_tree, tree_to_json

INF = float("inf")


class NonProductiveError(GrammarError):
    def __init__(self, names):
        self.names = list(names)
        super().__init__("non-productive nonterminals: " + ", ".join(self.names))


@dataclass(frozen=True)
class GeneratorConfig:
    max_expansions: int
    seed: int
    count: int = 1

    def __post_init__(self):
        if self.max_expansions < 1:
            raise ValueError("max_expansions must be >= 1")
        if self.count < 1:
            raise ValueError("count must be >= 1")
        if not 0 <= self.seed < 2 ** 64:
            raise ValueError("seed must be a 64-bit unsigned integer")


@dataclass(frozen=True)
class MinCost:
    min_size: int
    min_alts: frozenset


def min_expansion_cost(g: Grammar) -> dict[str, MinCost]:
    """Fewest expansions needed to finish each nonterminal, with the
    alternatives achieving it."""
    cost = productive_costs(g)
    bad = [n for n, c in cost.items() if c == INF]
    if bad:
        raise NonProductiveError(bad)
    table = {}
    for rule in g.rules:
        alts = frozenset(
            i for i, a in enumerate(rule.alternatives)
            if 1 + sum(cost[n] for n in a.nonterminals) == cost[rule.lhs]
        )
        table[rule.lhs] = MinCost(int(cost[rule.lhs]), alts)
    return table


def closure_table(g: Grammar) -> dict[str, tuple[int, tuple[int, ...]]]:
    """Per nonterminal: (closure cost, alternatives usable during closure).

    Each nonterminal is first restricted to its positive-probability
    alternatives.  If that restriction cannot finish (infinite cost under
    the current restrictions of everything else), the nonterminal falls back
    to all its alternatives, and the fixpoint is recomputed until stable.
    Closure then follows the cheapest allowed alternatives, which strictly
    decreases the remaining cost and so always terminates.
    """
    min_expansion_cost(g)  # raises for non-productive grammars
    allowed = {
        r.lhs: [i for i, a in enumerate(r.alternatives) if (a.probability or 0) > 0]
        or list(range(len(r)))
        for r in g.rules
    }
    while True:
        cost = {r.lhs: INF for r in g.rules}
        changed = True
        while changed:
            changed = False
            for rule in g.rules:
                for i in allowed[rule.lhs]:
                    c = 1 + sum(cost[n] for n in rule.alternatives[i].nonterminals)
                    if c < cost[rule.lhs]:
                        cost[rule.lhs] = c
                        changed = True
        stuck = [r.lhs for r in g.rules if cost[r.lhs] == INF]
        if not stuck:
            break
        for name in stuck:
            allowed[name] = list(range(len(g[name])))
    table = {}
    for rule in g.rules:
        best = tuple(
            i for i in allowed[rule.lhs]
            if 1 + sum(cost[n] for n in rule.alternatives[i].nonterminals) == cost[rule.lhs]
        )
        table[rule.lhs] = (int(cost[rule.lhs]), best)
    return table


def rng_for(seed: int, index: int) -> random.Random:
    digest = hashlib.sha256(f"{seed}:{index}".encode()).digest()
    return random.Random(int.from_bytes(digest, "big"))


@dataclass(frozen=True)
class GenerationStats:
    phase1: int          # probabilistic expansions
    total: int           # all expansions, closure included
    closure_budget: int  # summed closure cost of the nodes open after phase 1


class Generator:
    """Precomputed sampling tables for one normalized grammar."""

    def __init__(self, g: Grammar):
        if not g.is_normalized():
            raise GrammarError("grammar must be normalized before generation")
        self.grammar = g
        names = g.nonterminals
        self.nt_id = {n: i for i, n in enumerate(names)}
        self.names = names
        self.cum = []
        self.alts = []  # per nt: list of (alt index, child spec tuple)
        for rule in g.rules:
            self.cum.append(list(accumulate(a.probability for a in rule.alternatives)))
            self.alts.append([
                tuple(Leaf(s.name) if s.terminal else self.nt_id[s.name] for s in a.symbols)
                for a in rule.alternatives
            ])
        closure = closure_table(g)
        self.closure_cost = [closure[n][0] for n in names]
        self.closure_alts = [closure[n][1] for n in names]
        self.last_positive = [
            max(i for i, a in enumerate(r.alternatives) if a.probability > 0) for r in g.rules
        ]

    def choose(self, nt: int, rng: random.Random) -> int:
        cum = self.cum[nt]
        i = bisect_right(cum, rng.random() * cum[-1])
        # rounding can put the draw at the very top of the range
        return i if i < len(cum) else self.last_positive[nt]

    def generate(self, rng: random.Random, max_expansions: int,
                 start: Optional[str] = None) -> tuple[DerivationTree, GenerationStats]:
        root = self.nt_id[start or self.grammar.start]
        # node records: [nt, alt, children]; children hold Leaf or record index
        records = [[root, -1, None]]
        queue = deque([0])
        expansions = 0
        while queue and expansions < max_expansions:
            self._expand(records, queue, self.choose(records[queue[0]][0], rng))
            expansions += 1
        phase1 = expansions
        budget = sum(self.closure_cost[records[r][0]] for r in queue)
        while queue:
            alts = self.closure_alts[records[queue[0]][0]]
            self._expand(records, queue, alts[0] if len(alts) == 1 else rng.choice(alts))
            expansions += 1
        return self._freeze(records), GenerationStats(phase1, expansions, budget)

    def _expand(self, records, queue, alt):
        r = queue.popleft()
        rec = records[r]
        rec[1] = alt
        kids = []
        for child in self.alts[rec[0]][alt]:
            if isinstance(child, Leaf):
                kids.append(child)
            else:
                kids.append(len(records))
                queue.append(len(records))
                records.append([child, -1, None])
        rec[2] = kids

    def _freeze(self, records) -> DerivationTree:
        built = [None] * len(records)
        names = self.names
        # children always have larger indices than their parent
        for r in range(len(records) - 1, -1, -1):
            nt, alt, kids = records[r]
            built[r] = Node(names[nt], alt,
                            tuple(k if isinstance(k, Leaf) else built[k] for k in kids))
        return built[0]


def generate_tree(g: Grammar, cfg: GeneratorConfig, rng: random.Random) -> DerivationTree:
    return Generator(g).generate(rng, cfg.max_expansions)[0]


@dataclass(frozen=True)
class GeneratedInput:
    index: int
    tree: DerivationTree
    text: str
    stats: GenerationStats


def generate_suite(g: Grammar, cfg: GeneratorConfig) -> list[GeneratedInput]:
    gen = Generator(g)
    out = []
    for i in range(cfg.count):
        tree, stats = gen.generate(rng_for(cfg.seed, i), cfg.max_expansions)
        out.append(GeneratedInput(i, tree, serialize_tree(tree, g, check=False), stats))
    return out


def grammar_hash(g: Grammar) -> str:
    return hashlib.sha256(serialize_grammar(g).encode("utf-8")).hexdigest()


def write_suite(out_dir, suite: list[GeneratedInput], g: Grammar, cfg: GeneratorConfig,
                emit_trees: bool = False) -> list[Path]:
    """Write ``NNNN.txt`` files (plus ``NNNN.tree.json``) and ``manifest.json``."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    width = max(4, len(str(cfg.count - 1)))
    files = []
    for item in suite:
        stem = f"{item.index:0{width}d}"
        path = out / f"{stem}.txt"
        path.write_bytes(item.text.encode("utf-8"))
        files.append(path)
        if emit_trees:
            (out / f"{stem}.tree.json").write_text(tree_to_json(item.tree) + "\n", encoding="utf-8")
    manifest = {
        "grammar_sha256": grammar_hash(g),
        "seed": cfg.seed,
        "max_expansions": cfg.max_expansions,
        "count": cfg.count,
        "rng": "MT19937 seeded with sha256('<seed>:<index>')",
        "files": [p.name for p in files],
    }
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2) + "\n", encoding="utf-8")
    return files
