"""Log-domain helpers shared by the dynamic programs and the enumeration oracle.

Everything downstream works with log-weights in which -inf is the honest
representation of "no mass".  The helpers here must therefore treat -inf as
absorbing and never produce NaN from all-empty reductions.
"""

from __future__ import annotations

import numpy as np

NEG_INF = float("-inf")


def logsumexp(a: np.ndarray, axis: int | None = None) -> np.ndarray | float:
    """Stable log(sum(exp(a))) with max-subtraction; all-(-inf) reduces to -inf."""
    a = np.asarray(a, dtype=np.float64)
    m = np.max(a, axis=axis, keepdims=True)
    m_safe = np.where(np.isfinite(m), m, 0.0)
    with np.errstate(divide="ignore"):
        s = np.log(np.sum(np.exp(a - m_safe), axis=axis, keepdims=True))
    out = m + s  # -inf + (-inf) stays -inf for empty rows
    if axis is None:
        return float(out.reshape(-1)[0])
    return np.squeeze(out, axis=axis)


def logsumexp3(a: np.ndarray, b: np.ndarray, c: np.ndarray) -> np.ndarray:
    """Elementwise log(e^a + e^b + e^c); used by the width-3 lattice sweep."""
    m = np.maximum(np.maximum(a, b), c)
    m_safe = np.where(np.isfinite(m), m, 0.0)
    with np.errstate(divide="ignore"):
        s = np.log(np.exp(a - m_safe) + np.exp(b - m_safe) + np.exp(c - m_safe))
    return m + s


def logsumexp_sorted(values: np.ndarray) -> float:
    """Accumulate log-weights in ascending order; deterministic merge for oracles."""
    v = np.sort(np.asarray(values, dtype=np.float64))
    if v.size == 0:
        return NEG_INF
    return float(np.logaddexp.reduce(v))
