"""Small statistical helpers shared by the experiment layer and the tests."""

from __future__ import annotations

import math

import numpy as np


def wilson_interval(successes: int, trials: int, z: float = 1.959963984540054) -> tuple[float, float]:
    """Wilson 95% score interval for a binomial proportion."""
    if trials <= 0:
        raise ValueError("trials must be positive")
    phat = successes / trials
    z2 = z * z
    denom = 1.0 + z2 / trials
    center = (phat + z2 / (2 * trials)) / denom
    half = z * math.sqrt(phat * (1 - phat) / trials + z2 / (4 * trials * trials)) / denom
    lo = 0.0 if successes == 0 else max(0.0, center - half)
    hi = 1.0 if successes == trials else min(1.0, center + half)
    return lo, hi


def ks_distance_to_cdf(samples, cdf) -> float:
    """One-sample Kolmogorov-Smirnov distance of ``samples`` to a CDF callable.

    The same definition (sorted samples, two-sided step comparison) is used by
    every consumer so that independently computed values agree bit-for-bit.
    """
    xs = np.sort(np.asarray(samples, dtype=np.float64))
    n = xs.size
    if n == 0:
        raise ValueError("need at least one sample")
    f = np.asarray([cdf(x) for x in xs], dtype=np.float64)
    grid = np.arange(n, dtype=np.float64)
    d_plus = np.max((grid + 1.0) / n - f)
    d_minus = np.max(f - grid / n)
    return float(max(d_plus, d_minus))


def c_alpha_1d(alpha: float) -> float:
    """Normalizer of the limiting endpoint density (1 - |x|)^alpha on [-1, 1]."""
    return (alpha + 1.0) / 2.0


def endpoint_limit_cdf_1d(x: float, alpha: float) -> float:
    """CDF of the density c_alpha (1 - |x|)^alpha on [-1, 1] (d = 1)."""
    if x <= -1.0:
        return 0.0
    if x >= 1.0:
        return 1.0
    if x <= 0.0:
        return 0.5 * (1.0 + x) ** (alpha + 1.0)
    return 1.0 - 0.5 * (1.0 - x) ** (alpha + 1.0)


def frechet_limit_cdf(x: float, alpha: float, d: int) -> float:
    """Limit CDF of (top field value) / N^(d/alpha): exp(-c_d x^-alpha)."""
    if x <= 0.0:
        return 0.0
    c_d = 2.0**d / math.factorial(d)
    return math.exp(-c_d * x ** (-alpha))
