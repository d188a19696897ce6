"""Brute-force ground truth by full path enumeration.

Deliberately dumb: expand the (2d+1)-ary tree of trajectories level by level,
keep every partial weight, and merge per endpoint with a sorted log-domain
accumulation so the result does not depend on traversal order.  Capped at
10^6 paths; the dynamic program, the sampler, and the Viterbi decoder are all
validated against this module on instances under the cap.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .fields import FieldRealization
from .lattice import BallIndex
from .numerics import logsumexp_sorted
from .paths import PathSample
from .polymer import WalkKernel, endpoint_law_for

PATH_CAP = 10**6


@dataclass(frozen=True)
class EnumerationResult:
    """Exact quantities from summing every trajectory explicitly."""

    ball: BallIndex
    logU: float
    log_p: np.ndarray
    best_path: PathSample
    path_count: int


def enumerate_paths(field: FieldRealization, kernel: WalkKernel, N: int) -> EnumerationResult:
    if kernel.d != field.d:
        raise ValueError(f"kernel dimension {kernel.d} != field dimension {field.d}")
    if field.N < N:
        raise ValueError(f"field radius {field.N} below N={N}")
    n_steps = 2 * field.d + 1
    path_count = n_steps**N
    if path_count > PATH_CAP:
        raise ValueError(
            f"instance has {path_count} paths, above the enumeration cap {PATH_CAP}"
        )
    field = field.restrict(N)
    b = field.ball
    # successor via step s equals predecessor via -s; the lexicographic step
    # list of a centrally symmetric set reverses under negation, so the
    # successor table is the shift table with reversed columns.
    succ = b.shift_table()[:, ::-1]
    logk = kernel.log_probs

    positions = np.array([b.origin_index], dtype=np.int64)
    logw = np.zeros(1)
    level_positions: list[np.ndarray] = [positions]
    parents: list[np.ndarray] = []
    for _ in range(N):
        parent = np.repeat(np.arange(positions.size, dtype=np.int64), n_steps)
        positions = succ[positions].reshape(-1)  # stays in-ball: |x| grows by <= 1
        logw = np.repeat(logw, n_steps) + np.tile(logk, parent.size // n_steps)
        logw = logw + field.xi[positions]
        level_positions.append(positions)
        parents.append(parent)

    # per-endpoint exact log masses; ascending merge inside each endpoint group
    order = np.lexsort((logw, positions))
    pos_sorted = positions[order]
    logw_sorted = logw[order]
    starts = np.concatenate([[0], np.flatnonzero(np.diff(pos_sorted)) + 1])
    log_u = np.logaddexp.reduceat(logw_sorted, starts)
    logU = logsumexp_sorted(log_u)
    log_p = np.full(b.size, -np.inf)
    log_p[pos_sorted[starts]] = log_u - logU
    log_p.setflags(write=False)

    cursor = int(np.argmax(logw))
    best_logw = float(logw[cursor])
    best_indices = np.empty(N + 1, dtype=np.int64)
    for n in range(N, 0, -1):
        best_indices[n] = level_positions[n][cursor]
        cursor = int(parents[n - 1][cursor])
    best_indices[0] = b.origin_index
    best_path = PathSample(ball=b, site_indices=best_indices, log_weight=best_logw)

    return EnumerationResult(
        ball=b, logU=float(logU), log_p=log_p, best_path=best_path, path_count=path_count
    )


def _relative_log_diff(a: float, b: float) -> float:
    return abs(a - b) / max(1.0, abs(a), abs(b))


@dataclass(frozen=True)
class OracleComparison:
    max_log_p_diff: float
    logU_diff: float

    @property
    def worst(self) -> float:
        return max(self.max_log_p_diff, self.logU_diff)


def compare_dp_vs_oracle(field: FieldRealization, kernel: WalkKernel, N: int) -> OracleComparison:
    """Largest relative log discrepancy between the DP and full enumeration."""
    law = endpoint_law_for(field, kernel, N)
    exact = enumerate_paths(field, kernel, N)
    finite = np.isfinite(exact.log_p) & np.isfinite(law.log_p)
    if not np.array_equal(np.isfinite(exact.log_p), np.isfinite(law.log_p)):
        return OracleComparison(max_log_p_diff=float("inf"), logU_diff=float("inf"))
    diffs = [
        _relative_log_diff(float(a), float(b))
        for a, b in zip(law.log_p[finite], exact.log_p[finite])
    ]
    return OracleComparison(
        max_log_p_diff=max(diffs),
        logU_diff=_relative_log_diff(law.logU, exact.logU),
    )
