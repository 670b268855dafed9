"""Suite-level comparison of production usage.

A suite is summarized by how often each (nonterminal, alternative) pair was
expanded, normalized to relative frequencies.  This stands in for method-call
frequencies of a program under test; only the trees are needed.

Two distributions are compared with a smoothed bootstrap KS test: each is
treated as a probability mass over the key axis (keys in grammar order),
smoothed with a Gaussian kernel, resampled, and the two resamples are fed to
a two-sample Kolmogorov-Smirnov test.  Both resamples are driven by the same
uniform and normal variates (common random numbers), so comparing a
distribution with itself gives exactly zero and the statistic is symmetric.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass
from typing import Iterable, Optional

import numpy as np
from scipy import stats

from .grammar import Grammar
from .learner import CountTable, Sample, count_corpus

MIN_RESAMPLES = 10


@dataclass(frozen=True)
class FrequencyDistribution:
    keys: tuple[tuple[str, int], ...]
    values: tuple[float, ...]
    expansions: int = 0

    @property
    def empty(self) -> bool:
        return self.expansions == 0

    def as_dict(self) -> dict[tuple[str, int], float]:
        return dict(zip(self.keys, self.values))

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["nonterminal", "alternative", "frequency"])
        for (name, i), v in zip(self.keys, self.values):
            w.writerow([name, i, repr(v)])
        return buf.getvalue()


@dataclass(frozen=True)
class KSReport:
    statistic: float
    p_value: float
    bootstrap_samples: int
    bandwidth: float

    def to_dict(self, uncovered=()):
        return {
            "statistic": self.statistic,
            "p_value": self.p_value,
            "uncovered": [list(k) for k in uncovered],
            "resamples": self.bootstrap_samples,
            "bandwidth": self.bandwidth,
        }

    def to_json(self, uncovered=()) -> str:
        return json.dumps(self.to_dict(uncovered), indent=2)


def distribution_from_counts(g: Grammar, table: CountTable) -> FrequencyDistribution:
    keys = tuple(g.keys())
    raw = [table.counts[k] for k in keys]
    total = sum(raw)
    values = tuple(c / total for c in raw) if total else tuple(0.0 for _ in keys)
    return FrequencyDistribution(keys, values, total)


def suite_distribution(g: Grammar, suite: Iterable[Sample],
                       skip_unparsable: bool = False) -> FrequencyDistribution:
    return distribution_from_counts(g, count_corpus(g, suite, skip_unparsable).table)


def silverman_bandwidth(points: np.ndarray, weights: np.ndarray,
                        n_obs: Optional[int] = None) -> float:
    """Silverman's rule of thumb for weighted 1-d data.

    ``n_obs`` is the number of observations behind the weights (defaults to
    the number of points).
    """
    n = n_obs or len(points)
    mean = np.average(points, weights=weights)
    sd = float(np.sqrt(np.average((points - mean) ** 2, weights=weights)))
    order = np.argsort(points)
    cdf = np.cumsum(weights[order]) / weights.sum()
    q1 = points[order][np.searchsorted(cdf, 0.25)]
    q3 = points[order][np.searchsorted(cdf, 0.75)]
    iqr = float(q3 - q1) / 1.34
    spread = min(sd, iqr) if iqr > 0 else sd
    h = 0.9 * spread * n ** -0.2
    return max(h, 1e-3)


def _check(a: FrequencyDistribution, b: FrequencyDistribution):
    if a.keys != b.keys:
        raise ValueError("distributions are over different key sets")
    if a.empty or b.empty:
        raise ValueError("cannot compare an empty distribution")


def ks_compare(a: FrequencyDistribution, b: FrequencyDistribution, resamples: int,
               seed: int, bandwidth: Optional[float] = None) -> KSReport:
    """Smoothed bootstrap two-sample KS test between two usage distributions."""
    if resamples < MIN_RESAMPLES:
        raise ValueError(f"resamples must be >= {MIN_RESAMPLES}")
    _check(a, b)
    pa = np.asarray(a.values, dtype=float)
    pb = np.asarray(b.values, dtype=float)
    positions = np.arange(len(pa), dtype=float)
    if bandwidth is None:
        # pooled data: every expansion of either suite is one observation
        bandwidth = silverman_bandwidth(positions, (pa + pb) / 2, a.expansions + b.expansions)
    rng = np.random.Generator(np.random.PCG64(seed))
    u = rng.random(resamples)
    z = rng.standard_normal(resamples)

    def draw(p):
        cdf = np.cumsum(p) / p.sum()
        idx = np.minimum(np.searchsorted(cdf, u, side="right"), len(p) - 1)
        return positions[idx] + bandwidth * z

    xa, xb = draw(pa), draw(pb)
    res = stats.ks_2samp(xa, xb, method="asymp")
    return KSReport(float(res.statistic), float(res.pvalue), resamples, float(bandwidth))


def uncovered_keys(sample: FrequencyDistribution, other: FrequencyDistribution) -> list:
    """Keys the sample never used but the other suite did."""
    if sample.keys != other.keys:
        raise ValueError("distributions are over different key sets")
    return [k for k, s, o in zip(sample.keys, sample.values, other.values) if s == 0 and o > 0]
