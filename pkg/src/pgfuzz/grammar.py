"""Context-free grammars with optional per-alternative probabilities.

A grammar is an ordered list of rules.  Each rule maps one nonterminal to an
ordered list of alternatives, and the index of an alternative inside its rule
is its identity everywhere else in the package (trees, counts, reports).

Text format::

    %start Expr ;          # optional, defaults to the first rule
    %whitespace skip ;     # optional, skip ASCII layout between terminals
    Letter -> 0.4 "a" | "b" | "c" ;
    Empty  -> ;            # epsilon alternative
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Iterable, Iterator, Optional

PROB_TOLERANCE = 1e-9

_IDENT = re.compile(r"[A-Za-z][A-Za-z0-9_]*")
_NUMBER = re.compile(r"(?:\d+(?:\.\d*)?|\.\d+)(?:[eE][+-]?\d+)?")
_ESCAPES = {'"': '"', "\\": "\\", "n": "\n", "t": "\t", "r": "\r"}
_UNESCAPES = {v: "\\" + k for k, v in _ESCAPES.items()}


class GrammarError(ValueError):
    """Raised for malformed grammar text or an inconsistent grammar."""

    def __init__(self, message: str, line: Optional[int] = None, column: Optional[int] = None):
        self.message = message
        self.line = line
        self.column = column
        where = f"{line}:{column}: " if line is not None else ""
        super().__init__(where + message)


@dataclass(frozen=True, slots=True)
class Symbol:
    name: str
    terminal: bool = False

    def __post_init__(self):
        if self.terminal:
            if not self.name:
                raise GrammarError("terminal literal must be non-empty")
        elif not _IDENT.fullmatch(self.name):
            raise GrammarError(f"invalid nonterminal name {self.name!r}")

    def __str__(self):
        return quote(self.name) if self.terminal else self.name


def NT(name: str) -> Symbol:
    return Symbol(name, False)


def T(literal: str) -> Symbol:
    return Symbol(literal, True)


@dataclass(frozen=True, slots=True)
class Alternative:
    """One right-hand side.

    ``count`` is the number of times this alternative was observed while
    learning; it is kept so that learned probabilities can be checked as exact
    fractions instead of floats.
    """

    symbols: tuple[Symbol, ...] = ()
    probability: Optional[float] = None
    count: Optional[int] = None

    def __post_init__(self):
        if self.probability is not None and not (0.0 <= self.probability <= 1.0):
            raise GrammarError(f"probability {self.probability} outside [0, 1]")
        if self.count is not None and self.count < 0:
            raise GrammarError("negative count")

    @property
    def nonterminals(self) -> Iterator[str]:
        return (s.name for s in self.symbols if not s.terminal)

    def __str__(self):
        body = " ".join(str(s) for s in self.symbols)
        if self.probability is None:
            return body
        return f"{format_probability(self.probability)} {body}".rstrip()


@dataclass(frozen=True, slots=True)
class Rule:
    lhs: str
    alternatives: tuple[Alternative, ...]

    def __post_init__(self):
        if not self.alternatives:
            raise GrammarError(f"rule {self.lhs} has no alternatives")
        specified = sum(a.probability for a in self.alternatives if a.probability is not None)
        if specified > 1 + PROB_TOLERANCE:
            raise GrammarError(f"probabilities of {self.lhs} sum to {specified} > 1")

    def __len__(self):
        return len(self.alternatives)

    @property
    def probabilities(self) -> tuple[Optional[float], ...]:
        return tuple(a.probability for a in self.alternatives)

    @property
    def counts(self) -> Optional[tuple[int, ...]]:
        if any(a.count is None for a in self.alternatives):
            return None
        return tuple(a.count for a in self.alternatives)

    def exact_probabilities(self) -> tuple[Fraction, ...]:
        """Probabilities as fractions; exact when counts are retained."""
        counts = self.counts
        if counts is not None:
            total = sum(counts)
            if total == 0:
                return (Fraction(1, len(counts)),) * len(counts)
            return tuple(Fraction(c, total) for c in counts)
        probs = normalized_rule(self).probabilities
        fracs = [_snap(p) for p in probs]
        total = sum(fracs)
        return tuple(f / total for f in fracs) if total else tuple(fracs)

    def is_normalized(self) -> bool:
        probs = self.probabilities
        return all(p is not None for p in probs) and abs(sum(probs) - 1.0) <= PROB_TOLERANCE


def _snap(p: float) -> Fraction:
    # recover small-denominator values such as 1/7 from their float rendering
    exact = Fraction(p)
    near = exact.limit_denominator(1_000_000)
    return near if abs(near - exact) <= 1e-12 else exact


@dataclass(frozen=True)
class Grammar:
    rules: tuple[Rule, ...]
    start: str
    skip_whitespace: bool = False
    _index: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        index = {}
        for rule in self.rules:
            if rule.lhs in index:
                raise GrammarError(f"duplicate rule for {rule.lhs}")
            index[rule.lhs] = rule
        object.__setattr__(self, "_index", index)
        if self.start not in index:
            raise GrammarError(f"start symbol {self.start} has no rule")
        for rule in self.rules:
            for alt in rule.alternatives:
                for name in alt.nonterminals:
                    if name not in index:
                        raise GrammarError(f"undefined nonterminal {name} referenced in {rule.lhs}")

    def __getitem__(self, name: str) -> Rule:
        return self._index[name]

    def __contains__(self, name: str) -> bool:
        return name in self._index

    def __iter__(self) -> Iterator[Rule]:
        return iter(self.rules)

    @property
    def nonterminals(self) -> list[str]:
        return [r.lhs for r in self.rules]

    def keys(self) -> list[tuple[str, int]]:
        """Every (nonterminal, alternative index) pair in grammar order."""
        return [(r.lhs, i) for r in self.rules for i in range(len(r))]

    def with_rules(self, rules: Iterable[Rule]) -> "Grammar":
        return Grammar(tuple(rules), self.start, self.skip_whitespace)

    def is_normalized(self) -> bool:
        return all(r.is_normalized() for r in self.rules)

    def __str__(self):
        return serialize_grammar(self)


# -- normalization ---------------------------------------------------------


def normalized_rule(rule: Rule) -> Rule:
    unspecified = [i for i, a in enumerate(rule.alternatives) if a.probability is None]
    if not unspecified:
        return rule
    specified = sum(a.probability for a in rule.alternatives if a.probability is not None)
    share = max(0.0, 1.0 - specified) / len(unspecified)
    alts = tuple(
        replace(a, probability=share) if a.probability is None else a
        for a in rule.alternatives
    )
    return Rule(rule.lhs, alts)


def normalize_probabilities(g: Grammar) -> Grammar:
    """Give every unannotated alternative an equal share of the remaining mass."""
    return g.with_rules(normalized_rule(r) for r in g.rules)


# -- parsing ---------------------------------------------------------------


class _Lexer:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    def error(self, message: str, pos: Optional[int] = None) -> GrammarError:
        pos = self.pos if pos is None else pos
        line = self.text.count("\n", 0, pos) + 1
        col = pos - (self.text.rfind("\n", 0, pos) + 1) + 1
        return GrammarError(message, line, col)

    def skip(self):
        text = self.text
        while self.pos < len(text):
            c = text[self.pos]
            if c in " \t\r\n":
                self.pos += 1
            elif c == "#":
                end = text.find("\n", self.pos)
                self.pos = len(text) if end < 0 else end
            else:
                break

    def peek(self) -> str:
        self.skip()
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def at_end(self) -> bool:
        return self.peek() == ""

    def expect(self, token: str):
        self.skip()
        if not self.text.startswith(token, self.pos):
            got = self.text[self.pos:self.pos + 10] or "end of input"
            raise self.error(f"expected {token!r}, got {got!r}")
        self.pos += len(token)

    def accept(self, token: str) -> bool:
        self.skip()
        if self.text.startswith(token, self.pos):
            self.pos += len(token)
            return True
        return False

    def ident(self) -> str:
        self.skip()
        m = _IDENT.match(self.text, self.pos)
        if not m:
            raise self.error("expected identifier")
        self.pos = m.end()
        return m.group()

    def number(self) -> Optional[float]:
        self.skip()
        m = _NUMBER.match(self.text, self.pos)
        if not m:
            return None
        start = self.pos
        self.pos = m.end()
        value = float(m.group())
        if not 0.0 <= value <= 1.0:
            raise self.error(f"probability {m.group()} outside [0, 1]", start)
        return value

    def string(self) -> str:
        start = self.pos
        self.pos += 1  # opening quote
        out = []
        text = self.text
        while True:
            if self.pos >= len(text) or text[self.pos] == "\n":
                raise self.error("unterminated string literal", start)
            c = text[self.pos]
            if c == '"':
                self.pos += 1
                break
            if c == "\\":
                esc = text[self.pos + 1:self.pos + 2]
                if esc not in _ESCAPES:
                    raise self.error(f"unknown escape \\{esc}")
                out.append(_ESCAPES[esc])
                self.pos += 2
            else:
                out.append(c)
                self.pos += 1
        if not out:
            raise self.error("empty terminal literal", start)
        return "".join(out)


def _parse_alternative(lex: _Lexer) -> Alternative:
    prob = lex.number()
    symbols = []
    while True:
        c = lex.peek()
        if c == '"':
            symbols.append(T(lex.string()))
        elif c.isalpha():
            symbols.append(NT(lex.ident()))
        elif c in ("|", ";"):
            break
        elif c == "":
            raise lex.error("unexpected end of input, expected ';'")
        else:
            raise lex.error(f"unexpected character {c!r}")
    return Alternative(tuple(symbols), prob)


def parse_grammar(text: str) -> Grammar:
    """Parse grammar text; alternatives keep their source order."""
    lex = _Lexer(text)
    rules: list[Rule] = []
    seen: dict[str, int] = {}
    start = None
    skip_ws = False
    refs: list[tuple[str, int]] = []

    while not lex.at_end():
        if lex.accept("%"):
            pos = lex.pos
            directive = lex.ident()
            if directive == "start":
                start = lex.ident()
            elif directive == "whitespace":
                mode = lex.ident()
                if mode != "skip":
                    raise lex.error(f"unknown whitespace mode {mode!r}")
                skip_ws = True
            else:
                raise lex.error(f"unknown directive %{directive}", pos)
            lex.expect(";")
            continue
        lex.skip()
        lhs_pos = lex.pos
        lhs = lex.ident()
        if lhs in seen:
            raise lex.error(f"duplicate rule for {lhs}", lhs_pos)
        seen[lhs] = lhs_pos
        lex.expect("->")
        alts = []
        while True:
            lex.skip()
            alt_pos = lex.pos
            alt = _parse_alternative(lex)
            refs.extend((name, alt_pos) for name in alt.nonterminals)
            alts.append(alt)
            if not lex.accept("|"):
                break
        lex.expect(";")
        try:
            rules.append(Rule(lhs, tuple(alts)))
        except GrammarError as e:
            raise lex.error(e.message, lhs_pos) from None

    if not rules:
        raise GrammarError("grammar has no rules", 1, 1)
    for name, pos in refs:
        if name not in seen:
            raise lex.error(f"undefined nonterminal {name}", pos)
    if start is None:
        start = rules[0].lhs
    elif start not in seen:
        raise GrammarError(f"start symbol {start} has no rule")
    return Grammar(tuple(rules), start, skip_ws)


# -- serialization ---------------------------------------------------------


def quote(literal: str) -> str:
    return '"' + "".join(_UNESCAPES.get(c, c) for c in literal) + '"'


def format_probability(p: float) -> str:
    if p == 0.0:
        return "0"
    if p == 1.0:
        return "1"
    # repr is the shortest string that round-trips the double exactly
    return repr(float(p))


def serialize_grammar(g: Grammar) -> str:
    lines = []
    if g.start != g.rules[0].lhs:
        lines.append(f"%start {g.start} ;")
    if g.skip_whitespace:
        lines.append("%whitespace skip ;")
    width = max(len(r.lhs) for r in g.rules)
    for rule in g.rules:
        head = f"{rule.lhs:<{width}} -> "
        alts = [str(a) for a in rule.alternatives]
        line = head + " | ".join(alts) + " ;"
        if len(line) > 100:
            pad = "\n" + " " * (width + 2) + "| "
            line = head + pad.join(alts) + " ;"
        lines.append(line)
    return "\n".join(lines) + "\n"


# -- validation ------------------------------------------------------------


@dataclass(frozen=True)
class Diagnostic:
    severity: str  # "error" or "warning"
    kind: str      # "unreachable", "non-productive", "probability-sum"
    nonterminal: str
    message: str

    def __str__(self):
        return f"{self.severity}: {self.message}"


def productive_costs(g: Grammar) -> dict[str, float]:
    """Fewest expansions needed to finish each nonterminal (inf if impossible).

    Bellman-Ford style fixpoint; terminals cost nothing and every expansion
    costs one.
    """
    inf = float("inf")
    cost = {r.lhs: inf for r in g.rules}
    changed = True
    while changed:
        changed = False
        for rule in g.rules:
            best = cost[rule.lhs]
            for alt in rule.alternatives:
                c = 1 + sum(cost[n] for n in alt.nonterminals)
                if c < best:
                    best = c
            if best < cost[rule.lhs]:
                cost[rule.lhs] = best
                changed = True
    return cost


def reachable(g: Grammar) -> set[str]:
    seen = {g.start}
    stack = [g.start]
    while stack:
        for alt in g[stack.pop()].alternatives:
            for name in alt.nonterminals:
                if name not in seen:
                    seen.add(name)
                    stack.append(name)
    return seen


def validate(g: Grammar) -> list[Diagnostic]:
    out = []
    costs = productive_costs(g)
    live = reachable(g)
    for rule in g.rules:
        if rule.lhs not in live:
            out.append(Diagnostic("warning", "unreachable", rule.lhs,
                                  f"{rule.lhs} is unreachable from {g.start}"))
        if costs[rule.lhs] == float("inf"):
            out.append(Diagnostic("error", "non-productive", rule.lhs,
                                  f"{rule.lhs} derives no finite terminal string"))
        probs = [p for p in rule.probabilities if p is not None]
        total = sum(probs)
        if total > 1 + PROB_TOLERANCE or any(not 0 <= p <= 1 for p in probs):
            out.append(Diagnostic("error", "probability-sum", rule.lhs,
                                  f"probabilities of {rule.lhs} sum to {total}"))
        elif len(probs) == len(rule) and abs(total - 1) > PROB_TOLERANCE:
            out.append(Diagnostic("error", "probability-sum", rule.lhs,
                                  f"probabilities of {rule.lhs} sum to {total}, not 1"))
    return out
