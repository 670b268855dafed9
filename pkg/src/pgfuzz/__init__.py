"""Grammar-based input generation that learns production probabilities from
sample inputs, then generates more inputs like them or, with the
probabilities inverted, inputs unlike them."""

__version__ = "0.1.0"

from .grammar import (
    NT, T, Alternative, Diagnostic, Grammar, GrammarError, Rule, Symbol,
    normalize_probabilities, parse_grammar, serialize_grammar, validate,
)
from .tree import Leaf, Node, json_to_tree, serialize_tree, tree_to_json
from .parser import KERNEL, ParseError, ParseResult, Parser, parse_input
from .learner import CountTable, apply_counts, count_expansions, learn
from .inverter import invert
from .generator import (
    GeneratorConfig, Generator, generate_suite, generate_tree, min_expansion_cost,
)
from .analysis import FrequencyDistribution, KSReport, ks_compare, suite_distribution, uncovered_keys
