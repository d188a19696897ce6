"""Exact path sampling, maximum-weight decoding, and path-event predicates.

Sampling draws the endpoint from the normalized law and then walks backward:
given S_n = x, the predecessor is y with probability proportional to
u_{n-1}(y) kappa(x - y).  Because the forward fronts are exact, the sampled
path law is exactly the quenched polymer measure; no correction is needed.

The classifier evaluates every path event used by the localization analysis:
reach-and-stick concentration around the endpoint mode (with an injective
approach below the mode's potential and an arrival deadline), the rank events
that compare the best visited potential against the two discounted-potential
centers, the endpoint/holding refinements of those, and the loop-free and
deadline variants around each center.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from typing import Callable

import numpy as np

from .fields import FieldRealization, ModifiedFieldStats, OrderStats
from .lattice import BallIndex, LatticeSite
from .numerics import NEG_INF
from .polymer import EndpointLaw, FrontSequence, WalkKernel, endpoint_law
from .stats import wilson_interval


def arrival_slack(N: int, alpha: float) -> float:
    """Allowed excess, over the minimal |target| steps, of the arrival time.

    Scales like (log log N)^(2/alpha) N^(1-1/alpha) for alpha > 1 and like
    (log N)^(1+2/alpha) otherwise; alpha = 1 uses the second branch.  Both are
    o(N), so the deadline pins the arrival to a vanishing fraction of the
    horizon.
    """
    if N < 3:
        raise ValueError("need N >= 3 for a positive log log N")
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    if alpha > 1:
        return (math.log(math.log(N))) ** (2.0 / alpha) * N ** (1.0 - 1.0 / alpha)
    return (math.log(N)) ** (1.0 + 2.0 / alpha)


@dataclass(frozen=True)
class PathSample:
    """One trajectory S_0..S_N as ball indices, with its log sampling weight.

    ``log_weight`` is log[e^{H(S)} P(S)], the unnormalized quenched weight.
    """

    ball: BallIndex
    site_indices: np.ndarray
    log_weight: float

    def __post_init__(self) -> None:
        idx = np.ascontiguousarray(self.site_indices, dtype=np.int64)
        if idx[0] != self.ball.origin_index:
            raise ValueError("paths must start at the origin")
        deltas = np.abs(
            self.ball.coords[idx[1:]].astype(np.int64)
            - self.ball.coords[idx[:-1]].astype(np.int64)
        ).sum(axis=1)
        if deltas.size and deltas.max() > 1:
            raise ValueError("paths must move by at most one l1 step per unit time")
        idx.setflags(write=False)
        object.__setattr__(self, "site_indices", idx)

    @property
    def N(self) -> int:
        return self.site_indices.size - 1

    @property
    def steps(self) -> list[LatticeSite]:
        return [self.ball.site_at(int(i)) for i in self.site_indices]

    @cached_property
    def local_time(self) -> dict[tuple[int, ...], int]:
        """Visit counts over times 1..N; the counts sum to N."""
        idx, counts = np.unique(self.site_indices[1:], return_counts=True)
        return {
            tuple(int(c) for c in self.ball.coords[i]): int(n)
            for i, n in zip(idx, counts)
        }

    def endpoint(self) -> LatticeSite:
        return self.ball.site_at(int(self.site_indices[-1]))


def _front_matrix(fronts) -> tuple[BallIndex, np.ndarray]:
    """Rows n -> log u_n over the full ball (sentinel column appended)."""
    if isinstance(fronts, FrontSequence):
        cached = getattr(fronts, "_padded_matrix", None)
        if cached is not None:
            return fronts.ball, cached
        b = fronts.ball
        mat = fronts.matrix
    else:
        seq = list(fronts)
        b = seq[-1].ball
        mat = np.full((len(seq), b.size), NEG_INF)
        for fr in seq:
            lo, hi = b.window(fr.n)
            mat[fr.n, lo:hi] = fr.logw
    out = np.concatenate([mat, np.full((mat.shape[0], 1), NEG_INF)], axis=1)
    out.setflags(write=False)
    if isinstance(fronts, FrontSequence):
        fronts._padded_matrix = out
    return b, out


def sample_path_batch(
    fronts, field: FieldRealization, kernel: WalkKernel, rng: np.random.Generator, n_samples: int
) -> tuple[np.ndarray, np.ndarray]:
    """Draw ``n_samples`` exact paths; returns (positions, log_weights).

    ``positions`` has shape (n_samples, N+1) of ball indices in the full-ball
    layout; the per-path log weight is log[e^{H(S)} P(S)].
    """
    b, mat = _front_matrix(fronts)
    N = mat.shape[0] - 1
    if isinstance(fronts, FrontSequence) and fronts.fingerprint != field.restrict(N).fingerprint:
        raise ValueError("fronts were computed for a different field")
    law = endpoint_law(fronts)
    pred = b.shift_table()
    logk = kernel.log_probs
    n_steps = logk.size

    positions = np.empty((n_samples, N + 1), dtype=np.int64)
    log_kappa_sum = np.zeros(n_samples)

    p = np.exp(law.log_p)
    cdf = np.cumsum(p)
    cdf[-1] = 1.0
    positions[:, N] = np.searchsorted(cdf, rng.random(n_samples), side="right")

    rows = np.arange(n_samples)
    for n in range(N, 0, -1):
        cur = positions[:, n]
        cand = pred[cur]  # (n_samples, k); -1 selects the sentinel column
        w = mat[n - 1][cand] + logk[None, :]
        m = np.max(w, axis=1, keepdims=True)
        cum = np.cumsum(np.exp(w - m), axis=1)
        r = rng.random(n_samples) * cum[:, -1]
        # '<=' skips zero-mass candidates when r hits a flat cdf segment exactly
        j = np.minimum((cum <= r[:, None]).sum(axis=1), n_steps - 1)
        chosen = cand[rows, j]
        bad = chosen < 0  # float boundary artifacts only; fall back to the mode
        if bad.any():
            jb = np.argmax(w[bad], axis=1)
            chosen[bad] = cand[bad, jb]
            j[bad] = jb
        positions[:, n - 1] = chosen
        log_kappa_sum += logk[j]

    log_weights = field.xi[positions[:, 1:]].sum(axis=1) + log_kappa_sum
    return positions, log_weights


def sample_path(
    fronts, field: FieldRealization, kernel: WalkKernel, rng: np.random.Generator
) -> PathSample:
    """Draw a single trajectory distributed exactly as the quenched measure."""
    positions, log_weights = sample_path_batch(fronts, field, kernel, rng, 1)
    b, _ = _front_matrix(fronts)
    return PathSample(ball=b, site_indices=positions[0], log_weight=float(log_weights[0]))


def viterbi_path(field: FieldRealization, kernel: WalkKernel, N: int) -> PathSample:
    """Maximum-weight trajectory of log[e^{H(S)} P(S)] via a max-plus sweep.

    Ties are broken toward the lowest predecessor index, which makes the
    decoded path deterministic.
    """
    if kernel.d != field.d:
        raise ValueError(f"kernel dimension {kernel.d} != field dimension {field.d}")
    if field.N < N:
        raise ValueError(f"field radius {field.N} below N={N}")
    field = field.restrict(N)
    b = field.ball
    pred = b.shift_table()
    logk = kernel.log_probs
    cur = np.full(b.size + 1, NEG_INF)
    cur[b.origin_index] = 0.0
    back = np.zeros((N, b.size), dtype=np.int32)
    for n in range(N):
        stop = b.window(n + 1)[1]
        cand = cur[pred[:stop]] + logk[None, :]
        best = np.argmax(cand, axis=1)
        rows = np.arange(stop)
        nxt = np.full(b.size + 1, NEG_INF)
        nxt[:stop] = field.xi[:stop] + cand[rows, best]
        back[n, :stop] = pred[rows, best]
        cur = nxt

    end = int(np.argmax(cur[:-1]))
    indices = np.empty(N + 1, dtype=np.int64)
    indices[N] = end
    for n in range(N, 0, -1):
        indices[n - 1] = back[n - 1, indices[n]]
    return PathSample(ball=b, site_indices=indices, log_weight=float(cur[end]))


@dataclass(frozen=True)
class EventFlags:
    """Membership of one path in every analyzed event.

    Flags nest by construction: in_tilde_wi -> in_wi -> in_ai for i = 1, 2,
    and in_c implies that the path ends at the endpoint mode within its
    arrival deadline.
    """

    in_c: bool
    in_a1: bool
    in_a2: bool
    in_w1: bool
    in_w2: bool
    in_tilde_w1: bool
    in_tilde_w2: bool
    in_d1: bool
    in_d2: bool
    in_k1: bool
    in_k2: bool
    visited_top_rank: int
    tau_w: int | None


class EventClassifier:
    """Evaluates the path events for one (field, statistics, law) triple."""

    def __init__(
        self,
        field: FieldRealization,
        stats: OrderStats,
        modified: ModifiedFieldStats,
        law: EndpointLaw,
    ):
        fingerprints = {field.fingerprint, stats.fingerprint, modified.fingerprint}
        if law.fingerprint is not None:
            fingerprints.add(law.fingerprint)
        if len(fingerprints) > 1:
            raise ValueError("field, statistics, and law must share provenance")
        if not (field.ball == stats.ball == modified.ball == law.ball):
            raise ValueError("field, statistics, and law must share one ball")
        self.field = field
        self.ball = field.ball
        self.ranks = stats.ranks
        self.law = law
        self.N = law.N
        self.slack = arrival_slack(self.N, field.alpha)
        self.w_index = law.w_index
        self.w_norm = int(field.ball.norms[law.w_index])
        self.xi_w = float(field.xi[law.w_index])
        self.z_index = (modified.z_index(1), modified.z_index(2))
        self.z_norm = tuple(int(field.ball.norms[i]) for i in self.z_index)
        self.j_rank = tuple(stats.rank_of_index(i) for i in self.z_index)

    def classify(self, path: PathSample) -> EventFlags:
        if path.ball != self.ball or path.N != self.N:
            raise ValueError("path does not match the classifier's field and horizon")
        return self._classify_indices(path.site_indices)

    def _first_passage(self, pos: np.ndarray, target: int) -> int | None:
        hits = np.flatnonzero(pos == target)
        return int(hits[0]) if hits.size else None

    @staticmethod
    def _injective_prefix(pos: np.ndarray, tau: int) -> bool:
        return np.unique(pos[: tau + 1]).size == tau + 1

    def _classify_indices(self, pos: np.ndarray) -> EventFlags:
        xi = self.field.xi
        visited_rank = int(self.ranks[pos[1:]].min())

        tau_w = self._first_passage(pos, self.w_index)
        in_c = False
        if tau_w is not None and tau_w <= self.w_norm + self.slack:
            in_c = (
                bool(np.all(pos[tau_w:] == self.w_index))
                and self._injective_prefix(pos, tau_w)
                and bool(np.all(xi[pos[:tau_w]] < self.xi_w))
            )

        per_center = []
        for side in (0, 1):
            z_idx = self.z_index[side]
            in_a = visited_rank == self.j_rank[side]
            in_w = in_a and pos[-1] == z_idx
            if in_w:
                holding = int(np.count_nonzero(pos[1:] == z_idx))
                in_tilde_w = holding > (self.N - self.z_norm[side]) / 2.0
            else:
                in_tilde_w = False
            tau = self._first_passage(pos, z_idx)
            in_d = (
                tau is not None
                and self._injective_prefix(pos, tau)
                and bool(np.all(pos[tau:] == z_idx))
            )
            in_k = tau is not None and tau <= self.z_norm[side] + self.slack
            per_center.append((in_a, in_w, in_tilde_w, in_d, in_k))

        (a1, w1, tw1, d1, k1), (a2, w2, tw2, d2, k2) = per_center
        return EventFlags(
            in_c=in_c,
            in_a1=a1,
            in_a2=a2,
            in_w1=w1,
            in_w2=w2,
            in_tilde_w1=tw1,
            in_tilde_w2=tw2,
            in_d1=d1,
            in_d2=d2,
            in_k1=k1,
            in_k2=k2,
            visited_top_rank=visited_rank,
            tau_w=tau_w,
        )


def classify_path(
    path: PathSample,
    field: FieldRealization,
    modified: ModifiedFieldStats,
    law: EndpointLaw,
    stats: OrderStats | None = None,
) -> EventFlags:
    """One-off classification; batch callers should reuse an EventClassifier."""
    from .fields import order_statistics

    if stats is None:
        stats = order_statistics(field)
    return EventClassifier(field, stats, modified, law).classify(path)


def path_to_csv(path: PathSample, file) -> None:
    """Trajectory dump for the plotting side: step index, coordinates."""
    import csv

    header = ["step"] + [f"x{j + 1}" for j in range(path.ball.d)]
    with open(file, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for n, i in enumerate(path.site_indices):
            writer.writerow([n] + [int(c) for c in path.ball.coords[i]])


@dataclass(frozen=True)
class EventEstimate:
    estimate: float
    ci_low: float
    ci_high: float
    samples: int
    hits: int


def estimate_event_probability(
    fronts,
    field: FieldRealization,
    kernel: WalkKernel,
    event: Callable[[PathSample], bool],
    samples: int,
    rng: np.random.Generator,
) -> EventEstimate:
    """Monte Carlo probability of a path event with a Wilson 95% interval.

    The sampler is exact, so the estimate is unbiased; ``event`` is any
    predicate on PathSample.
    """
    if samples < 100:
        raise ValueError("need at least 100 samples for a meaningful interval")
    b, _ = _front_matrix(fronts)
    positions, log_weights = sample_path_batch(fronts, field, kernel, rng, samples)
    hits = 0
    for row, lw in zip(positions, log_weights):
        path = PathSample(ball=b, site_indices=row, log_weight=float(lw))
        if event(path):
            hits += 1
    lo, hi = wilson_interval(hits, samples)
    return EventEstimate(
        estimate=hits / samples, ci_low=lo, ci_high=hi, samples=samples, hits=hits
    )
