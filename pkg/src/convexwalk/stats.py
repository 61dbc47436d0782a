"""Small statistical utilities: Monte Carlo estimates with standard
errors, confidence intervals, bootstrap helpers and a two-sample
energy-distance test."""

from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import cdist


@dataclass(frozen=True)
class MCEstimate:
    """A Monte Carlo estimate together with its standard error."""

    estimate: float
    se: float
    n_samples: int

    def __float__(self):
        return float(self.estimate)


def binomial_estimate(successes, n):
    """MCEstimate for a Bernoulli probability from counts."""
    if n <= 0:
        raise ValueError("need at least one sample")
    p = successes / n
    se = np.sqrt(max(p * (1.0 - p), 0.0) / n)
    return MCEstimate(float(p), float(se), int(n))


def mean_estimate(values):
    """MCEstimate for a population mean from iid draws."""
    values = np.asarray(values, dtype=float)
    n = values.size
    if n == 0:
        raise ValueError("need at least one sample")
    se = values.std(ddof=1) / np.sqrt(n) if n > 1 else np.inf
    return MCEstimate(float(values.mean()), float(se), int(n))


def wilson_interval(successes, n, z):
    """Wilson score interval for a Bernoulli probability.

    Behaves sensibly at the boundary estimates 0 and 1, unlike the
    normal-approximation interval.
    """
    p = successes / n
    denom = 1.0 + z * z / n
    center = (p + z * z / (2 * n)) / denom
    half = z * np.sqrt(p * (1.0 - p) / n + z * z / (4 * n * n)) / denom
    return max(center - half, 0.0), min(center + half, 1.0)


def bootstrap_quantile_se(values, q, n_boot=200, rng=None):
    """Standard error of an empirical quantile by bootstrap resampling."""
    values = np.asarray(values, dtype=float)
    rng = np.random.default_rng(0) if rng is None else rng
    n = values.size
    reps = np.empty(n_boot)
    for i in range(n_boot):
        idx = rng.integers(0, n, size=n)
        reps[i] = np.quantile(values[idx], q)
    return float(reps.std(ddof=1))


def block_se(values, n_blocks=20):
    """Standard error of a mean from correlated draws via block means."""
    values = np.asarray(values, dtype=float)
    n = values.size
    m = max(n // n_blocks, 1)
    blocks = np.array([values[i * m:(i + 1) * m].mean() for i in range(n // m)])
    return float(blocks.std(ddof=1) / np.sqrt(len(blocks)))


def energy_distance(x, y):
    """Two-sample energy distance 2*E|X-Y| - E|X-X'| - E|Y-Y'|."""
    x = np.atleast_2d(np.asarray(x, dtype=float))
    y = np.atleast_2d(np.asarray(y, dtype=float))
    dxy = cdist(x, y).mean()
    dxx = cdist(x, x).mean()
    dyy = cdist(y, y).mean()
    return 2.0 * dxy - dxx - dyy


def energy_two_sample_test(x, y, n_permutations=199, rng=None, max_per_group=4000):
    """Permutation test of equality of two multivariate distributions.

    Returns (statistic, p_value).  Groups larger than ``max_per_group``
    are subsampled once up front so the permutation loop stays cheap.
    """
    rng = np.random.default_rng(0) if rng is None else rng
    x = np.atleast_2d(np.asarray(x, dtype=float))
    y = np.atleast_2d(np.asarray(y, dtype=float))
    if len(x) > max_per_group:
        x = x[rng.choice(len(x), size=max_per_group, replace=False)]
    if len(y) > max_per_group:
        y = y[rng.choice(len(y), size=max_per_group, replace=False)]
    stat = energy_distance(x, y)
    pooled = np.vstack([x, y])
    n_x = len(x)
    count = 0
    for _ in range(n_permutations):
        perm = rng.permutation(len(pooled))
        stat_p = energy_distance(pooled[perm[:n_x]], pooled[perm[n_x:]])
        if stat_p >= stat:
            count += 1
    p_value = (count + 1) / (n_permutations + 1)
    return float(stat), float(p_value)


def binned_tv(counts_or_probs_a, probs_b):
    """Total variation distance between two discrete distributions."""
    a = np.asarray(counts_or_probs_a, dtype=float)
    b = np.asarray(probs_b, dtype=float)
    a = a / a.sum()
    b = b / b.sum()
    return 0.5 * float(np.abs(a - b).sum())
