import sys
from fractions import Fraction
from pathlib import Path

import pytest

from pgfuzz import learn, invert, normalize_probabilities, parse_grammar

DATA = Path(__file__).parent / "data"
SAMPLE = "1 + (2 * 3)"

# Expected learned probabilities for SAMPLE, as exact fractions
F = Fraction
LEARNED_EXPECTED = {
    "Expr": (F(2, 3), F(1, 3), F(0)),
    "Term": (F(3, 4), F(1, 4), F(0)),
    "Factor": (F(3, 4), F(0), F(0), F(1, 4)),
    "Int": (F(0), F(1)),
    "Digit": (F(0), F(1, 3), F(1, 3), F(1, 3)) + (F(0),) * 6,
}
INVERTED_EXPECTED = {
    "Expr": (F(0), F(0), F(1)),
    "Term": (F(0), F(0), F(1)),
    "Factor": (F(0), F(1, 2), F(1, 2), F(0)),
    "Int": (F(1), F(0)),
    "Digit": (F(1, 7), F(0), F(0), F(0)) + (F(1, 7),) * 6,
}


def load(name):
    return parse_grammar((DATA / name).read_text())


@pytest.fixture(scope="session")
def arith():
    return load("arith.g")


@pytest.fixture(scope="session")
def learned(arith):
    return learn(arith, [SAMPLE])


@pytest.fixture(scope="session")
def inverted(learned):
    return invert(learned)


@pytest.fixture(scope="session")
def json_grammar():
    return load("json.g")


@pytest.fixture(scope="session")
def pcfg():
    return normalize_probabilities(load("pcfg.g"))


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(mod.RESULTS):
        terminalreporter.write_line(mod.RESULTS[num])
