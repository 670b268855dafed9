"""Probability inversion: favour what the samples used least.

Each alternative's weight (its learned probability, or equivalently its
count) is replaced by the reciprocal and renormalized.  A zero weight has an
infinite reciprocal, so when a rule has unseen alternatives they split the
whole mass evenly and every seen alternative drops to zero.  This is done by
partitioning on zero weights, never with floating-point infinities.
"""

from __future__ import annotations

from dataclasses import replace
from fractions import Fraction
from typing import Sequence

from .grammar import Grammar, GrammarError, Rule


def invert_weights(weights: Sequence[Fraction]) -> list[Fraction]:
    zeros = [i for i, w in enumerate(weights) if w == 0]
    if zeros:
        share = Fraction(1, len(zeros))
        return [share if w == 0 else Fraction(0) for w in weights]
    recip = [1 / Fraction(w) for w in weights]
    total = sum(recip)
    return [r / total for r in recip]


def invert_rule(rule: Rule) -> Rule:
    if not rule.is_normalized():
        raise GrammarError(f"rule {rule.lhs} is not normalized; cannot invert")
    inverted = invert_weights(rule.exact_probabilities())
    alts = tuple(
        replace(a, probability=float(p), count=None)
        for a, p in zip(rule.alternatives, inverted)
    )
    return Rule(rule.lhs, alts)


def invert(g: Grammar) -> Grammar:
    return g.with_rules(invert_rule(r) for r in g.rules)
