import json
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from pgfuzz import (
    FrequencyDistribution, GeneratorConfig, generate_suite, ks_compare, suite_distribution,
    uncovered_keys,
)
from pgfuzz.analysis import silverman_bandwidth

from conftest import SAMPLE


def dist(values, keys=None):
    keys = keys or tuple(("K", i) for i in range(len(values)))
    total = sum(values)
    return FrequencyDistribution(tuple(keys), tuple(v / total for v in values), int(total))


def exact_pmf_distance(a, b):
    """Largest gap between the two step CDFs over the key axis."""
    ca = cb = Fraction(0)
    best = Fraction(0)
    for x, y in zip(a, b):
        ca += Fraction(x)
        cb += Fraction(y)
        best = max(best, abs(ca - cb))
    return float(best)


def test_sample_distribution(arith):
    d = suite_distribution(arith, [SAMPLE])
    assert d.expansions == 17
    freq = d.as_dict()
    assert freq["Expr", 0] == pytest.approx(2 / 17)
    assert freq["Digit", 1] == pytest.approx(1 / 17)
    assert freq["Expr", 2] == 0
    assert sum(d.values) == pytest.approx(1, abs=1e-9)
    assert d.keys == tuple(arith.keys())


def test_empty_suite(arith):
    d = suite_distribution(arith, [])
    assert d.empty
    with pytest.raises(ValueError, match="empty"):
        ks_compare(d, suite_distribution(arith, [SAMPLE]), 100, 0)


def test_identical_suites_identical_distributions(arith):
    assert suite_distribution(arith, [SAMPLE, "4"]) == suite_distribution(arith, ["4", SAMPLE])


def test_self_comparison_is_zero():
    a = dist([5, 1, 0, 3, 9])
    assert ks_compare(a, a, 1000, 3).statistic == 0.0


def test_disjoint_support_is_near_one():
    a = dist([5, 4, 3] + [0] * 12)
    b = dist([0] * 12 + [3, 4, 5])
    report = ks_compare(a, b, 1000, 1)
    assert report.statistic > 0.95
    assert report.p_value < 1e-6


def test_resample_floor():
    a = dist([1, 2])
    with pytest.raises(ValueError, match="resamples"):
        ks_compare(a, a, 9, 0)
    ks_compare(a, a, 10, 0)


def test_key_mismatch():
    with pytest.raises(ValueError):
        ks_compare(dist([1, 2]), dist([1, 2, 3]), 100, 0)


weights = st.lists(st.integers(0, 20), min_size=2, max_size=12)


@settings(max_examples=60, deadline=None)
@given(weights, weights, st.integers(0, 2 ** 32))
def test_symmetric_and_bounded(wa, wb, seed):
    n = min(len(wa), len(wb))
    wa, wb = wa[:n], wb[:n]
    if not sum(wa) or not sum(wb):
        return
    a, b = dist(wa), dist(wb)
    ab, ba = ks_compare(a, b, 200, seed), ks_compare(b, a, 200, seed)
    assert ab.statistic == ba.statistic
    assert 0 <= ab.statistic <= 1 and 0 <= ab.p_value <= 1


@settings(max_examples=30, deadline=None)
@given(weights, weights, st.integers(0, 2 ** 32))
def test_statistic_tracks_exact_cdf_gap(wa, wb, seed):
    # with negligible smoothing, the bootstrap statistic estimates the exact
    # distance between the two step CDFs
    n = min(len(wa), len(wb))
    wa, wb = wa[:n], wb[:n]
    if not sum(wa) or not sum(wb):
        return
    a, b = dist(wa), dist(wb)
    exact = exact_pmf_distance([Fraction(x, sum(wa)) for x in wa], [Fraction(x, sum(wb)) for x in wb])
    got = ks_compare(a, b, 20000, seed, bandwidth=1e-3).statistic
    assert abs(got - exact) <= 0.03


def test_silverman_against_textbook_formula():
    rng = np.random.default_rng(0)
    pts = rng.normal(size=500)
    h = silverman_bandwidth(pts, np.ones_like(pts))
    iqr = (np.percentile(pts, 75) - np.percentile(pts, 25)) / 1.34
    expected = 0.9 * min(pts.std(), iqr) * 500 ** -0.2
    assert h == pytest.approx(expected, rel=0.03)


def test_uncovered_keys(arith, learned, inverted):
    sample = suite_distribution(arith, [SAMPLE])
    suite = generate_suite(inverted, GeneratorConfig(40, 0, 200))
    other = suite_distribution(arith, [x.text for x in suite])
    missing = uncovered_keys(sample, other)
    assert ("Expr", 2) in missing
    assert {("Digit", d) for d in (0, 4, 5, 6, 7, 8, 9)} <= set(missing)
    assert uncovered_keys(sample, sample) == []
    inner = suite_distribution(arith, ["2*3"])
    assert uncovered_keys(sample, inner) == []


def test_report_json_shape():
    a = dist([1, 2, 3])
    report = ks_compare(a, dist([3, 2, 1]), 100, 5)
    doc = json.loads(report.to_json([("Expr", 2)]))
    assert set(doc) == {"statistic", "p_value", "uncovered", "resamples", "bandwidth"}
    assert doc["uncovered"] == [["Expr", 2]] and doc["resamples"] == 100
    assert doc["bandwidth"] > 0


def test_csv_lists_every_key(arith):
    text = suite_distribution(arith, [SAMPLE]).to_csv()
    lines = text.strip().splitlines()
    assert lines[0] == "nonterminal,alternative,frequency"
    assert len(lines) == 1 + len(arith.keys())


def test_direction_on_arithmetic(arith, learned, inverted):
    sample = suite_distribution(arith, [SAMPLE])
    prob = suite_distribution(arith, [x.text for x in generate_suite(learned, GeneratorConfig(40, 1, 100))])
    inv = suite_distribution(arith, [x.text for x in generate_suite(inverted, GeneratorConfig(40, 1, 100))])
    assert ks_compare(sample, prob, 1000, 0).statistic < ks_compare(sample, inv, 1000, 0).statistic
