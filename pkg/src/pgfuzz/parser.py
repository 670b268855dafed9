"""Scannerless Earley parsing into canonical derivation trees.

Chart construction and canonical tree selection run in the compiled kernel
``pgfuzz._chart`` when it was built, and in the pure-Python
``pgfuzz._chart_py`` otherwise (or when ``PGFUZZ_PURE_PYTHON=1`` is set).
Grammars in which a nonterminal can derive itself over the same span always
use the Python kernel, which implements the cycle avoidance.

Ambiguity is resolved canonically: at every node the alternative with the
smallest index wins, and among its possible splits of the input span the
lexicographically smallest sequence of child boundaries wins.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from functools import lru_cache

from .grammar import Grammar
from .tree import DerivationTree

from . import _chart_py

if os.environ.get("PGFUZZ_PURE_PYTHON"):
    _kernel = _chart_py
else:
    try:
        from . import _chart as _kernel
    except ImportError:
        _kernel = _chart_py
KERNEL = "python" if _kernel is _chart_py else "cython"
COMPLETE = _chart_py.COMPLETE

class ParseError(ValueError):
    def __init__(self, position: int, expected: list[str], text: str, source: str = ""):
        self.position = position
        self.expected = expected
        self.line = text.count("\n", 0, position) + 1
        self.column = position - (text.rfind("\n", 0, position) + 1) + 1
        self.source = source
        got = repr(text[position:position + 10]) if position < len(text) else "end of input"
        exp = ", ".join(repr(e) for e in expected) or "end of input"
        where = f"{source}:" if source else ""
        super().__init__(f"{where}{self.line}:{self.column}: unexpected {got}; expected one of {exp}")


@dataclass(frozen=True)
class ParseResult:
    tree: DerivationTree
    ambiguous: bool


class _Compiled:
    """Integer tables describing the grammar for the chart kernels."""

    def __init__(self, g: Grammar):
        self.grammar = g
        self.nt_id = {r.lhs: i for i, r in enumerate(g.rules)}
        self.names = [r.lhs for r in g.rules]
        self.start_nt = self.nt_id[g.start]
        self.skip_ws = g.skip_whitespace
        self.terminals: list[str] = []
        term_id: dict[str, int] = {}
        self.alt_nt, self.alt_index, self.alt_syms, self.dot_base = [], [], [], []
        self.rule_alts: list[list[int]] = []
        nd = 0
        for i, rule in enumerate(g.rules):
            ids = []
            for j, alt in enumerate(rule.alternatives):
                syms = []
                for s in alt.symbols:
                    if s.terminal:
                        if s.name not in term_id:
                            term_id[s.name] = len(self.terminals)
                            self.terminals.append(s.name)
                        syms.append(-(term_id[s.name] + 1))
                    else:
                        syms.append(self.nt_id[s.name])
                ids.append(len(self.alt_nt))
                self.alt_nt.append(i)
                self.alt_index.append(j)
                self.alt_syms.append(syms)
                self.dot_base.append(nd)
                nd += len(syms) + 1
            self.rule_alts.append(ids)
        self.n_dotted = nd
        self.next_sym = [COMPLETE] * nd
        self.dotted_lhs = [0] * nd
        for a, syms in enumerate(self.alt_syms):
            for dot in range(len(syms) + 1):
                d = self.dot_base[a] + dot
                self.dotted_lhs[d] = self.alt_nt[a]
                if dot < len(syms):
                    self.next_sym[d] = syms[dot]
        self.predict = [[self.dot_base[a] for a in ids] for ids in self.rule_alts]
        self.term_codes = [[ord(c) for c in t] for t in self.terminals]
        self.nullable = self._nullable()
        self.cyclic = self._has_span_cycle()

    def _nullable(self) -> list[bool]:
        nullable = [False] * len(self.rule_alts)
        changed = True
        while changed:
            changed = False
            for a, syms in enumerate(self.alt_syms):
                nt = self.alt_nt[a]
                if not nullable[nt] and all(x >= 0 and nullable[x] for x in syms):
                    nullable[nt] = changed = True
        return nullable

    def _has_span_cycle(self) -> bool:
        # edge A -> B when B can cover the same span as A (siblings nullable)
        edges = {i: set() for i in range(len(self.rule_alts))}
        for a, syms in enumerate(self.alt_syms):
            for pos, x in enumerate(syms):
                if x >= 0 and all(y >= 0 and self.nullable[y]
                                  for q, y in enumerate(syms) if q != pos):
                    edges[self.alt_nt[a]].add(x)
        state = {}

        def visit(v):
            stack = [(v, iter(edges[v]))]
            state[v] = 1
            while stack:
                u, it = stack[-1]
                for w in it:
                    if state.get(w) == 1:
                        return True
                    if w not in state:
                        state[w] = 1
                        stack.append((w, iter(edges[w])))
                        break
                else:
                    state[u] = 2
                    stack.pop()
            return False

        return any(v not in state and visit(v) for v in edges)


class Parser:
    """Reusable parser for one grammar."""

    def __init__(self, g: Grammar, kernel=None):
        self.grammar = g
        self.c = _Compiled(g)
        self.kernel = kernel or _kernel
        # the compiled extractor does not implement same-span cycle avoidance
        if self.c.cyclic:
            self.kernel = _chart_py
        self.tables = self.kernel.prepare(self.c)

    def parse(self, text: str, source: str = "") -> ParseResult:
        end, error_pos, last_items, plan, ambiguous = self.kernel.parse_plan(self.tables, text)
        if plan is None:
            c = self.c
            expected = set()
            for code in last_items:
                x = c.next_sym[code % c.n_dotted]
                if x != COMPLETE and x < 0:
                    expected.add(c.terminals[-x - 1])
            raise ParseError(error_pos, sorted(expected), text, source)
        return ParseResult(self.build(plan), ambiguous)

    def build(self, plan: list[int]) -> DerivationTree:
        """Turn a pre-order list of alternative ids into a tree."""
        return self.kernel.build_tree(self.tables, plan)


@lru_cache(maxsize=32)
def parser_for(g: Grammar) -> Parser:
    return Parser(g)


def parse_input(g: Grammar, text: str) -> DerivationTree:
    """Parse ``text`` and return its canonical derivation tree."""
    return parser_for(g).parse(text).tree
