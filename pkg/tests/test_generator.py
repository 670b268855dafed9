import re
from collections import Counter

import pytest
from hypothesis import given, settings, strategies as st

from pgfuzz import (
    GeneratorConfig, Generator, generate_suite, generate_tree, learn, min_expansion_cost,
    normalize_probabilities, parse_grammar, parse_input,
)
from pgfuzz.generator import NonProductiveError, closure_table, rng_for, write_suite
from pgfuzz.learner import count_corpus
from pgfuzz.tree import check_tree, frontier, iter_nodes, size

from oracles import min_costs_by_budget


def test_min_costs(arith):
    table = min_expansion_cost(arith)
    assert {n: c.min_size for n, c in table.items()} == {
        "Expr": 5, "Term": 4, "Factor": 3, "Int": 2, "Digit": 1}
    assert table["Digit"].min_alts == frozenset(range(10))
    assert table["Int"].min_alts == {1}
    assert table["Expr"].min_alts == {0}


@pytest.mark.parametrize("name", ["arith.g", "json.g", "pcfg.g"])
def test_min_costs_match_budget_oracle(name):
    from conftest import load
    g = load(name)
    got = {n: c.min_size for n, c in min_expansion_cost(g).items()}
    assert got == min_costs_by_budget(g)


def test_min_cost_trivial():
    assert min_expansion_cost(parse_grammar('S -> "a" ;'))["S"].min_size == 1


def test_non_productive():
    with pytest.raises(NonProductiveError, match="S"):
        min_expansion_cost(parse_grammar('S -> S "a" ;'))


def test_closure_agrees_with_min_cost_when_all_positive(learned, pcfg):
    for g in (learned, pcfg):
        mins = min_expansion_cost(g)
        closure = closure_table(g)
        for name, (cost, _) in closure.items():
            assert cost == mins[name].min_size


def test_closure_prefers_positive_alternatives(learned, inverted):
    assert closure_table(learned)["Digit"] == (1, (1, 2, 3))
    # only the zero-probability Term alternative finishes Expr in the inverted grammar
    assert closure_table(inverted)["Expr"][1] == (0,)
    assert closure_table(inverted)["Digit"][1] == (0, 4, 5, 6, 7, 8, 9)


def test_unnormalized_grammar_rejected(arith):
    from pgfuzz import GrammarError
    with pytest.raises(GrammarError):
        Generator(arith)


def test_config_validation():
    for bad in [dict(max_expansions=0, seed=1), dict(max_expansions=5, seed=-1),
                dict(max_expansions=5, seed=1, count=0)]:
        with pytest.raises(ValueError):
            GeneratorConfig(**bad)


def test_same_seed_same_tree(learned):
    cfg = GeneratorConfig(60, seed=11)
    a = generate_tree(learned, cfg, rng_for(11, 0))
    b = generate_tree(learned, cfg, rng_for(11, 0))
    assert a == b
    assert [x.text for x in generate_suite(learned, GeneratorConfig(60, 3, 20))] == \
        [x.text for x in generate_suite(learned, GeneratorConfig(60, 3, 20))]


def test_different_seeds_differ(pcfg):
    a = [x.text for x in generate_suite(pcfg, GeneratorConfig(80, 1, 20))]
    b = [x.text for x in generate_suite(pcfg, GeneratorConfig(80, 2, 20))]
    assert a != b


def test_learned_grammar_alphabet(learned):
    for item in generate_suite(learned, GeneratorConfig(50, 5, 300)):
        assert re.fullmatch(r"[123+*() ]*", item.text), item.text
        check_tree(item.tree, learned)


def test_inverted_grammar_alphabet(inverted):
    seen = Counter()
    for item in generate_suite(inverted, GeneratorConfig(50, 5, 300)):
        assert not set(item.text) & set("123"), item.text
        seen.update(item.text)
    assert seen["-"] and seen["/"]
    assert set(seen) & set("0456789")


def test_expansion_bounds(learned):
    mins = min_expansion_cost(learned)
    gen = Generator(learned)
    for i in range(1000):
        tree, stats = gen.generate(rng_for(9, i), 50)
        assert stats.phase1 <= 50
        assert stats.total == size(tree)
        assert stats.total <= stats.phase1 + stats.closure_budget
    assert all(closure_table(learned)[n][0] == c.min_size for n, c in mins.items())


def test_small_threshold_still_completes(pcfg, json_grammar):
    g = normalize_probabilities(json_grammar)
    for grammar in (pcfg, g):
        for i in range(50):
            tree, stats = Generator(grammar).generate(rng_for(0, i), 1)
            assert stats.phase1 == 1
            check_tree(tree, grammar)


def test_digit_frequencies_match_learned(learned):
    suite = generate_suite(learned, GeneratorConfig(200, 17, 1000))
    relearned = learn(learned, [x.text for x in suite])
    probs = relearned["Digit"].probabilities
    for got, want in zip(probs, learned["Digit"].probabilities):
        assert abs(got - want) <= 0.05


class RecordingGenerator(Generator):
    def __init__(self, g):
        super().__init__(g)
        self.picks = []

    def choose(self, nt, rng):
        alt = super().choose(nt, rng)
        self.picks.append((self.names[nt], alt))
        return alt


def test_phase_one_never_picks_zero_probability(inverted):
    gen = RecordingGenerator(inverted)
    for i in range(1000):
        gen.generate(rng_for(4, i), 50)
    assert gen.picks
    for name, alt in gen.picks:
        assert inverted[name].alternatives[alt].probability > 0


def test_generated_inputs_reparse(pcfg):
    suite = generate_suite(pcfg, GeneratorConfig(100, 8, 200))
    for item in suite:
        tree = parse_input(pcfg, item.text)
        assert frontier(tree) == frontier(item.tree)
    # the hand-written grammar is unambiguous, so counts survive re-parsing
    direct = Counter((n.symbol, n.alt) for x in suite for n in iter_nodes(x.tree))
    reparsed = count_corpus(pcfg, [x.text for x in suite]).table.counts
    assert +reparsed == +direct


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2 ** 64 - 1), st.integers(1, 120))
def test_any_seed_terminates(inverted, seed, threshold):
    tree, stats = Generator(inverted).generate(rng_for(seed, 0), threshold)
    check_tree(tree, inverted)
    assert stats.phase1 <= threshold


def test_write_suite_layout(tmp_path, learned):
    cfg = GeneratorConfig(40, 2, 12)
    suite = generate_suite(learned, cfg)
    write_suite(tmp_path / "out", suite, learned, cfg, emit_trees=True)
    names = sorted(p.name for p in (tmp_path / "out").iterdir())
    assert names[0] == "0000.tree.json" and names[1] == "0000.txt"
    assert "manifest.json" in names and len(names) == 25
    import json
    manifest = json.loads((tmp_path / "out" / "manifest.json").read_text())
    assert manifest["seed"] == 2 and manifest["count"] == 12
    assert len(manifest["grammar_sha256"]) == 64
