import sys

import pytest
from hypothesis import HealthCheck, given, settings, strategies as st

from pgfuzz import _chart_py
from pgfuzz.grammar import NT, T, Alternative, Grammar, Rule, parse_grammar
from pgfuzz.parser import KERNEL, ParseError, Parser, parse_input
from pgfuzz.tree import Leaf, Node, check_tree, frontier, iter_nodes, serialize_tree

from conftest import SAMPLE
from oracles import canonical_tree, recognizes

try:
    from pgfuzz import _chart
except ImportError:
    _chart = None

needs_ext = pytest.mark.skipif(_chart is None, reason="compiled kernel not built")
KERNELS = [pytest.param(_chart_py, id="python"),
           pytest.param(_chart, id="cython", marks=needs_ext)]


def digit(d):
    return Node("Digit", d, (Leaf(str(d)),))


def factor_int(d):
    return Node("Factor", 0, (Node("Int", 1, (digit(d),)),))


@pytest.mark.parametrize("kernel", KERNELS)
def test_sample_tree_shape(arith, kernel):
    tree = Parser(arith, kernel).parse(SAMPLE).tree
    inner = Node("Expr", 0, (Node("Term", 1, (
        Node("Term", 0, (factor_int(2),)), Leaf("*"), factor_int(3))),))
    expected = Node("Expr", 1, (
        Node("Expr", 0, (Node("Term", 0, (factor_int(1),)),)),
        Leaf("+"),
        Node("Term", 0, (Node("Factor", 3, (Leaf("("), inner, Leaf(")"))),)),
    ))
    assert tree == expected
    assert "".join(frontier(tree)) == "1+(2*3)"
    assert sum(1 for _ in iter_nodes(tree)) == 17


def test_single_terminal():
    g = parse_grammar('S -> "a" ;')
    assert parse_input(g, "a") == Node("S", 0, (Leaf("a"),))
    with pytest.raises(ParseError):
        parse_input(g, "aa")
    with pytest.raises(ParseError):
        parse_input(g, "")


def test_error_at_first_character(arith):
    with pytest.raises(ParseError) as info:
        parse_input(arith, ")(")
    err = info.value
    assert err.position == 0
    assert (err.line, err.column) == (1, 1)
    assert "(" in err.expected and "7" in err.expected and ")" not in err.expected


def test_error_position_and_line(arith):
    with pytest.raises(ParseError) as info:
        parse_input(arith, "1 +\n  2 )")
    assert info.value.position == 8
    assert (info.value.line, info.value.column) == (2, 5)


def test_error_at_end_of_input(arith):
    with pytest.raises(ParseError) as info:
        parse_input(arith, "1 +  ")
    assert info.value.position == 5
    assert "end of input" in str(info.value)


def test_layout_is_skipped_only_when_enabled():
    text = 'S -> "a" "b" ;'
    tight = parse_grammar(text)
    loose = parse_grammar("%whitespace skip ;\n" + text)
    assert parse_input(loose, " a \n\tb  ") == Node("S", 0, (Leaf("a"), Leaf("b")))
    with pytest.raises(ParseError):
        parse_input(tight, "a b")


def test_multi_character_terminals(json_grammar):
    tree = parse_input(json_grammar, '{"ab": [true, null, 12]}')
    assert "".join(frontier(tree)) == '{"ab":[true,null,12]}'
    check_tree(tree, json_grammar)


def test_epsilon_alternatives(json_grammar):
    tree = parse_input(json_grammar, "[]")
    assert tree.children[0] == Node("Array", 0, (Leaf("["), Node("Elements", 0, ()), Leaf("]")))
    tree = parse_input(json_grammar, '""')
    assert tree == Node("Value", 2, (Node("String", 0, (Leaf('"'), Node("Chars", 0, ()), Leaf('"'))),))


@pytest.mark.parametrize("kernel", KERNELS)
def test_long_left_recursive_input(arith, kernel):
    text = "+".join(["1"] * 5000)[:10_000]
    text = text.rstrip("+")
    tree = Parser(arith, kernel).parse(text).tree
    assert "".join(frontier(tree)) == text
    depth, t = 0, tree
    while t.alt == 1:
        depth += 1
        t = t.children[0]
    assert depth == text.count("+")
    assert depth > sys.getrecursionlimit()


def test_ambiguity_flag_and_canonical_choice():
    g = parse_grammar('E -> E "+" E | "a" ;')
    result = Parser(g).parse("a+a+a")
    assert result.ambiguous
    # leftmost split: the first child is as short as possible
    assert result.tree.children[0] == Node("E", 1, (Leaf("a"),))
    assert not Parser(g).parse("a+a").ambiguous
    assert [Parser(g).parse("a+a+a").tree for _ in range(3)] == [result.tree] * 3


def test_alternative_order_breaks_ties():
    g = parse_grammar('S -> A | B ;\nA -> "x" ;\nB -> "x" ;')
    result = parse_input(g, "x")
    assert result.alt == 0
    assert Parser(g).parse("x").ambiguous


def test_unambiguous_grammar_reports_no_ambiguity(arith):
    assert not Parser(arith).parse(SAMPLE).ambiguous


@pytest.mark.parametrize("grammar, text, expected", [
    ('A -> A | "a" ;', "a", Node("A", 1, (Leaf("a"),))),
    ('A -> B | "a" ;\nB -> A ;', "a", Node("A", 1, (Leaf("a"),))),
    ('S -> A ;\nA -> B | "b" ;\nB -> A | "c" ;', "c",
     Node("S", 0, (Node("A", 0, (Node("B", 1, (Leaf("c"),)),)),))),
    ('S -> S S | "a" | ;', "aa", None),
])
def test_cyclic_grammars(grammar, text, expected):
    g = parse_grammar(grammar)
    parser = Parser(g)
    assert parser.c.cyclic
    tree = parser.parse(text).tree
    assert tree == canonical_tree(g, text)
    if expected is not None:
        assert tree == expected
    check_tree(tree, g)


@needs_ext
def test_compiled_kernel_refuses_cyclic_grammars():
    g = parse_grammar('A -> A | "a" ;')
    assert Parser(g, _chart).kernel is _chart_py


def test_kernel_name():
    assert KERNEL in ("python", "cython")


# -- random grammars against the brute-force oracle -----------------------

NAMES = ["S", "A", "B"]
symbols = st.one_of(st.sampled_from([T("a"), T("b"), T("ab")]),
                    st.sampled_from([NT(n) for n in NAMES]))
alternatives = st.lists(symbols, max_size=3).map(lambda s: Alternative(tuple(s)))
rules = st.lists(alternatives, min_size=1, max_size=3).map(tuple)


@st.composite
def grammars(draw):
    return Grammar(tuple(Rule(n, draw(rules)) for n in NAMES), "S")


texts = st.text(alphabet="ab", max_size=5)


@settings(max_examples=300, deadline=None, suppress_health_check=[HealthCheck.too_slow])
@given(grammars(), texts)
def test_matches_brute_force_oracle(g, text):
    parser = Parser(g, _chart_py)
    expected = canonical_tree(g, text)
    assert (expected is not None) == recognizes(g, text)
    if expected is None:
        with pytest.raises(ParseError):
            parser.parse(text)
        return
    tree = parser.parse(text).tree
    assert tree == expected
    check_tree(tree, g)
    assert serialize_tree(tree, g) == text


@needs_ext
@settings(max_examples=300, deadline=None)
@given(grammars(), texts)
def test_kernels_agree(g, text):
    slow = Parser(g, _chart_py)
    fast = Parser(g, _chart)
    try:
        a = slow.parse(text)
    except ParseError as e:
        with pytest.raises(ParseError) as info:
            fast.parse(text)
        assert (info.value.position, info.value.expected) == (e.position, e.expected)
        return
    assert fast.parse(text) == a


arith_inputs = st.recursive(
    st.integers(0, 999).map(str),
    lambda inner: st.one_of(
        st.tuples(inner, st.sampled_from("+-*/"), inner).map(lambda t: f"{t[0]} {t[1]} {t[2]}"),
        inner.map(lambda s: f"({s})"),
        inner.map(lambda s: f"-{s}"),
    ),
    max_leaves=12,
)


@needs_ext
@settings(max_examples=100, deadline=None)
@given(arith_inputs)
def test_kernels_agree_on_arithmetic(arith, text):
    assert Parser(arith, _chart).parse(text) == Parser(arith, _chart_py).parse(text)


@settings(max_examples=100, deadline=None)
@given(arith_inputs)
def test_parse_serialize_round_trip(arith, text):
    tree = parse_input(arith, text)
    assert parse_input(arith, serialize_tree(tree, arith)) == tree
