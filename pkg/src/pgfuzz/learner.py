"""Learning alternative probabilities from a corpus of sample inputs."""

from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass, field, replace
from typing import Iterable, Union

from .grammar import Alternative, Grammar, GrammarError, Rule
from .parser import ParseError, parser_for
from .tree import DerivationTree, TreeError, check_tree, iter_nodes

Sample = Union[str, tuple[str, str]]


@dataclass
class CountTable:
    """Expansion counts per (nonterminal, alternative index)."""

    counts: Counter = field(default_factory=Counter)
    totals: Counter = field(default_factory=Counter)

    def add_tree(self, tree: DerivationTree) -> None:
        for node in iter_nodes(tree):
            self.counts[node.symbol, node.alt] += 1
            self.totals[node.symbol] += 1

    def merge(self, other: "CountTable") -> "CountTable":
        return CountTable(self.counts + other.counts, self.totals + other.totals)

    def __add__(self, other):
        return self.merge(other)

    def alt_counts(self, rule: Rule) -> list[int]:
        return [self.counts[rule.lhs, i] for i in range(len(rule))]

    def total(self, name: str) -> int:
        return self.totals[name]

    def __eq__(self, other):
        if not isinstance(other, CountTable):
            return NotImplemented
        # Counter equality treats missing keys as distinct from explicit zeros
        return +self.counts == +other.counts and +self.totals == +other.totals

    def to_json(self, g: Grammar) -> str:
        doc = {r.lhs: {"total": self.totals[r.lhs], "alts": self.alt_counts(r)} for r in g.rules}
        return json.dumps(doc, indent=2)

    @classmethod
    def from_json(cls, text: str, g: Grammar) -> "CountTable":
        doc = json.loads(text)
        table = cls()
        for name, entry in doc.items():
            if name not in g:
                raise GrammarError(f"counts mention unknown nonterminal {name}")
            alts = entry["alts"]
            if len(alts) != len(g[name]) or sum(alts) != entry["total"]:
                raise GrammarError(f"counts for {name} do not match the grammar")
            for i, c in enumerate(alts):
                if c:
                    table.counts[name, i] = int(c)
            if entry["total"]:
                table.totals[name] = int(entry["total"])
        return table


def count_expansions(trees: Iterable[DerivationTree], g: Grammar) -> CountTable:
    table = CountTable()
    for tree in trees:
        check_tree(tree, g)
        table.add_tree(tree)
    return table


def apply_counts(g: Grammar, table: CountTable) -> Grammar:
    """Annotate g with count-derived probabilities.

    Rules never expanded in the corpus get uniform probabilities, and every
    alternative keeps its integer count.
    """
    rules = []
    for rule in g.rules:
        counts = table.alt_counts(rule)
        total = sum(counts)
        n = len(rule)
        alts = tuple(
            replace(a, probability=(c / total if total else 1.0 / n), count=c)
            for a, c in zip(rule.alternatives, counts)
        )
        rules.append(Rule(rule.lhs, alts))
    return g.with_rules(rules)


@dataclass
class CorpusCounts:
    table: CountTable
    parsed: int = 0
    skipped: list = field(default_factory=list)    # (name, ParseError)
    ambiguous: list = field(default_factory=list)  # names


def _named(corpus: Iterable[Sample]):
    for i, item in enumerate(corpus):
        if isinstance(item, tuple):
            yield item
        else:
            yield f"<sample {i}>", item


def count_corpus(g: Grammar, corpus: Iterable[Sample], skip_unparsable: bool = False) -> CorpusCounts:
    """Parse every sample and accumulate expansion counts.

    Samples are plain strings or ``(name, text)`` pairs; the name appears in
    parse errors.  Without ``skip_unparsable`` the first failure propagates.
    """
    parser = parser_for(g)
    out = CorpusCounts(CountTable())
    for name, text in _named(corpus):
        try:
            result = parser.parse(text, source=name)
        except ParseError as e:
            if not skip_unparsable:
                raise
            out.skipped.append((name, e))
            continue
        out.parsed += 1
        if result.ambiguous:
            out.ambiguous.append(name)
        out.table.add_tree(result.tree)
    return out


def learn(g: Grammar, corpus: Iterable[Sample], skip_unparsable: bool = False) -> Grammar:
    """Probability-annotated copy of g learned from the corpus."""
    return apply_counts(g, count_corpus(g, corpus, skip_unparsable).table)


__all__ = [
    "CountTable", "CorpusCounts", "count_expansions", "apply_counts", "count_corpus", "learn",
    "TreeError",
]
