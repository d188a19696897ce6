"""Exact quenched polymer measure via a log-domain transfer-matrix sweep.

The endpoint-constrained weights satisfy

    log u_{n+1}(x) = xi(x) + logsumexp_{|y-x|<=1} [ log u_n(y) + log kappa(x-y) ]

with log u_0 = 0 at the origin and -inf elsewhere (time 0 carries no potential
term).  Raw weights overflow doubles for moderate N, so everything stays in
log domain and -inf is the exact representation of zero mass.  The front at
time n lives on the ball of radius n only; the sequence of fronts is kept as
one (N+1, |B_N|) matrix whose row n is -inf outside B_n.
"""

from __future__ import annotations

from collections.abc import Mapping, Sequence
from dataclasses import dataclass

import numpy as np

from .fields import FieldRealization, ModifiedFieldStats, modified_field_stats
from .lattice import BallIndex, LatticeSite, ball
from .numerics import NEG_INF, logsumexp, logsumexp3

KERNEL_SUM_TOL = 1e-12


@dataclass(frozen=True)
class WalkKernel:
    """One-step law on {y : |y| <= 1}; positive everywhere (hold included)."""

    d: int
    steps: tuple[tuple[int, ...], ...]  # lexicographically ascending
    probs: np.ndarray

    @property
    def log_probs(self) -> np.ndarray:
        return np.log(self.probs)

    @property
    def hold_prob(self) -> float:
        return float(self.probs[self.steps.index((0,) * self.d)])

    def prob(self, step: tuple[int, ...]) -> float:
        return float(self.probs[self.steps.index(tuple(step))])

    def __repr__(self) -> str:
        pairs = ", ".join(f"{s}:{p:g}" for s, p in zip(self.steps, self.probs))
        return f"WalkKernel(d={self.d}, {pairs})"


def _canonical_steps(d: int) -> list[tuple[int, ...]]:
    return [tuple(r) for r in ball(d, 1).steps()]


def make_kernel(weights: Mapping) -> WalkKernel:
    """Validate a step-probability map into a kernel.

    ``weights`` must be defined on exactly the 2d+1 steps with |y| <= 1; every
    weight must be positive (holding included) and they must sum to one.
    """
    items = {}
    for key, value in weights.items():
        step = (int(key),) if isinstance(key, (int, np.integer)) else tuple(int(c) for c in key)
        items[step] = float(value)
    if not items:
        raise ValueError("empty kernel specification")
    d = len(next(iter(items)))
    expected = _canonical_steps(d)
    if set(items) != set(expected):
        raise ValueError(
            f"kernel must assign a weight to exactly the steps {expected}, "
            f"got {sorted(items)}"
        )
    probs = np.array([items[s] for s in expected], dtype=np.float64)
    if np.any(probs < 0):
        raise ValueError("kernel weights must be nonnegative")
    if np.any(probs == 0):
        dead = expected[int(np.argmin(probs))]
        raise ValueError(
            f"kernel weight for step {dead} is zero; every step with |y| <= 1 "
            "(the hold step included) must have positive probability"
        )
    total = float(probs.sum())
    if abs(total - 1.0) > KERNEL_SUM_TOL:
        raise ValueError(f"kernel weights sum to {total!r}, not 1")
    probs.setflags(write=False)
    return WalkKernel(d=d, steps=tuple(expected), probs=probs)


def uniform_kernel(d: int) -> WalkKernel:
    steps = _canonical_steps(d)
    return make_kernel({s: 1.0 / len(steps) for s in steps})


@dataclass(frozen=True)
class LogWeightFront:
    """log u_n over the ball of radius n (sites beyond n carry zero mass)."""

    n: int
    ball: BallIndex
    logw: np.ndarray


class FrontSequence(Sequence):
    """All fronts n = 0..N of one recursion, backed by a single matrix.

    Row n holds log u_n over B_N in canonical layout (-inf outside B_n);
    indexing returns the ``LogWeightFront`` view on B_n.
    """

    def __init__(self, b: BallIndex, matrix: np.ndarray, fingerprint: str):
        self.ball = b
        self.matrix = matrix
        self.matrix.setflags(write=False)
        self.fingerprint = fingerprint

    def __len__(self) -> int:
        return self.matrix.shape[0]

    def __getitem__(self, n) -> LogWeightFront:
        if isinstance(n, slice):
            return [self[i] for i in range(*n.indices(len(self)))]
        if n < 0:
            n += len(self)
        if not 0 <= n < len(self):
            raise IndexError(n)
        lo, hi = self.ball.window(n)
        return LogWeightFront(n=n, ball=ball(self.ball.d, n), logw=self.matrix[n, lo:hi])

    @property
    def N(self) -> int:
        return len(self) - 1

    @property
    def final_logw(self) -> np.ndarray:
        return self.matrix[-1]


def _check_dp_inputs(field: FieldRealization, kernel: WalkKernel, N: int) -> FieldRealization:
    if kernel.d != field.d:
        raise ValueError(f"kernel dimension {kernel.d} != field dimension {field.d}")
    if field.N < N:
        raise ValueError(f"field radius {field.N} is smaller than the horizon N={N}")
    return field.restrict(N)


def _sweep_1d(field: FieldRealization, kernel: WalkKernel, N: int) -> np.ndarray:
    """Width-3 sweep in natural order with one -inf padding cell per side."""
    size = 2 * N + 1
    mid = N + 1  # center in the padded frame
    lk_minus, lk_hold, lk_plus = (float(v) for v in kernel.log_probs)
    xi_pad = np.full(size + 2, NEG_INF)
    xi_pad[1:-1] = field.xi
    rows = np.full((N + 1, size + 2), NEG_INF)
    rows[0, mid] = 0.0
    for n in range(N):
        cur = rows[n]
        lo, hi = mid - (n + 1), mid + n + 2
        from_left = cur[lo - 1 : hi - 1] + lk_plus   # predecessor y = x - 1
        from_hold = cur[lo:hi] + lk_hold
        from_right = cur[lo + 1 : hi + 1] + lk_minus  # predecessor y = x + 1
        rows[n + 1, lo:hi] = xi_pad[lo:hi] + logsumexp3(from_left, from_hold, from_right)
    return rows[:, 1:-1]


def _sweep_general(field: FieldRealization, kernel: WalkKernel, N: int) -> np.ndarray:
    b = field.ball
    pred = b.shift_table()  # [i, j] = index of site_i - steps[j]
    logk = kernel.log_probs
    rows = np.full((N + 1, b.size), NEG_INF)
    rows[0, b.origin_index] = 0.0
    padded = np.append(rows[0], NEG_INF)  # sentinel slot for pred == -1
    for n in range(N):
        stop = b.window(n + 1)[1]
        cand = padded[pred[:stop]] + logk[None, :]
        rows[n + 1, :stop] = field.xi[:stop] + logsumexp(cand, axis=1)
        padded[:-1] = rows[n + 1]
    return rows


def forward_recursion(field: FieldRealization, kernel: WalkKernel, N: int) -> FrontSequence:
    """Run the transfer-matrix sweep and keep every front n = 0..N."""
    field = _check_dp_inputs(field, kernel, N)
    rows = _sweep_1d(field, kernel, N) if field.d == 1 else _sweep_general(field, kernel, N)
    return FrontSequence(field.ball, rows, field.fingerprint)


def final_front(field: FieldRealization, kernel: WalkKernel, N: int) -> LogWeightFront:
    """Memory-lean variant keeping only the time-N front (trial loops use this)."""
    field = _check_dp_inputs(field, kernel, N)
    b = field.ball
    if field.d == 1:
        mid = N + 1
        lk_minus, lk_hold, lk_plus = (float(v) for v in kernel.log_probs)
        xi_pad = np.full(b.size + 2, NEG_INF)
        xi_pad[1:-1] = field.xi
        cur = np.full(b.size + 2, NEG_INF)
        cur[mid] = 0.0
        nxt = np.full(b.size + 2, NEG_INF)
        for n in range(N):
            lo, hi = mid - (n + 1), mid + n + 2
            from_left = cur[lo - 1 : hi - 1] + lk_plus
            from_hold = cur[lo:hi] + lk_hold
            from_right = cur[lo + 1 : hi + 1] + lk_minus
            nxt[lo:hi] = xi_pad[lo:hi] + logsumexp3(from_left, from_hold, from_right)
            cur, nxt = nxt, cur
        out = cur[1:-1].copy()
    else:
        pred = b.shift_table()
        logk = kernel.log_probs
        cur = np.full(b.size + 1, NEG_INF)
        cur[b.origin_index] = 0.0
        nxt = np.full(b.size + 1, NEG_INF)
        for n in range(N):
            stop = b.window(n + 1)[1]
            cand = cur[pred[:stop]] + logk[None, :]
            nxt[:stop] = field.xi[:stop] + logsumexp(cand, axis=1)
            cur, nxt = nxt, cur
        out = cur[:-1].copy()
    out.setflags(write=False)
    return LogWeightFront(n=N, ball=b, logw=out)


def _argmax_lexicographic(b: BallIndex, values: np.ndarray) -> tuple[int, bool]:
    """Index of the maximum; exact ties resolved toward the smallest site."""
    top = np.max(values)
    cands = np.flatnonzero(values == top)
    if cands.size == 1:
        return int(cands[0]), False
    best = min(cands, key=lambda i: tuple(b.coords[i]))
    return int(best), True


@dataclass(frozen=True)
class EndpointLaw:
    """Normalized endpoint distribution at time N, in log domain."""

    N: int
    ball: BallIndex
    log_p: np.ndarray
    logU: float
    w: LatticeSite
    w_index: int
    ties_detected: bool
    fingerprint: str | None

    def p_of(self, site: LatticeSite) -> float:
        i = self.ball.index_of_site(site)
        if i < 0:
            return 0.0
        return float(np.exp(self.log_p[i]))

    @property
    def p_w(self) -> float:
        return float(np.exp(self.log_p[self.w_index]))


def endpoint_law(fronts, fingerprint: str | None = None) -> EndpointLaw:
    """Normalize the final front: log p = log u_N - log U, mode site included."""
    if isinstance(fronts, FrontSequence):
        last = fronts[len(fronts) - 1]
        fingerprint = fronts.fingerprint if fingerprint is None else fingerprint
    elif isinstance(fronts, LogWeightFront):
        last = fronts
    else:
        last = fronts[-1]
    logw = last.logw
    if not np.any(np.isfinite(logw)):
        raise RuntimeError("endpoint front carries no mass; recursion state corrupt")
    logU = float(logsumexp(logw))
    log_p = logw - logU
    log_p.setflags(write=False)
    w_index, tied = _argmax_lexicographic(last.ball, log_p)
    return EndpointLaw(
        N=last.n,
        ball=last.ball,
        log_p=log_p,
        logU=logU,
        w=last.ball.site_at(w_index),
        w_index=w_index,
        ties_detected=tied,
        fingerprint=fingerprint,
    )


def endpoint_law_for(field: FieldRealization, kernel: WalkKernel, N: int) -> EndpointLaw:
    """Convenience: sweep with the lean recursion and normalize."""
    front = final_front(field, kernel, N)
    return endpoint_law(front, fingerprint=field.restrict(N).fingerprint)


@dataclass(frozen=True)
class LocalizationMass:
    """Endpoint mass at the mode and at the two discounted-potential centers."""

    p_w: float
    p_z1: float
    p_z2: float
    two_point_mass: float
    w_in_top_two: bool
    w_equals_z1: bool


def localization_mass(law: EndpointLaw, modified: ModifiedFieldStats) -> LocalizationMass:
    if (
        law.fingerprint is not None
        and modified.fingerprint is not None
        and law.fingerprint != modified.fingerprint
    ):
        raise ValueError("endpoint law and field statistics come from different fields")
    if law.ball != modified.ball:
        raise ValueError("endpoint law and field statistics use different balls")
    p_z1 = float(np.exp(law.log_p[modified.z_index(1)]))
    p_z2 = float(np.exp(law.log_p[modified.z_index(2)]))
    z_sites = {modified.z_site(1), modified.z_site(2)}
    return LocalizationMass(
        p_w=law.p_w,
        p_z1=p_z1,
        p_z2=p_z2,
        two_point_mass=p_z1 + p_z2,
        w_in_top_two=law.w in z_sites,
        w_equals_z1=law.w == modified.z_site(1),
    )


@dataclass(frozen=True)
class ComparatorResult:
    """Reach-and-stick weights of the two candidate centers (d = 1 only)."""

    choice: str  # "z1" | "z2"
    site: LatticeSite
    z1: LatticeSite
    z2: LatticeSite
    log_b_z1: float
    log_b_z2: float


def _log_stick_weight(field: FieldRealization, kernel: WalkKernel, N: int, x: int) -> float:
    """log of e^{H(S)} P(S) for the straight path to x followed by holding.

    The interior sum runs over the |x| - 1 sites strictly between 0 and x; the
    target value is collected N + 1 - |x| times (arrival step through time N).
    For x = 0 the path holds throughout: (N+1) xi(0) + N log kappa(0).
    """
    b = field.ball
    k = abs(x)
    sgn = 1 if x > 0 else -1
    log_hold = np.log(kernel.hold_prob)
    if k == 0:
        return float((N + 1) * field.xi[b.origin_index] + N * log_hold)
    interior_idx = b.index_of(
        np.arange(1, k).reshape(-1, 1) * sgn
    )
    interior = float(field.xi[interior_idx].sum()) if k > 1 else 0.0
    log_step = np.log(kernel.prob((sgn,)))
    xi_x = float(field.xi[b.index_of(np.array([x]))])
    return interior + (N + 1 - k) * xi_x + k * log_step + (N - k) * log_hold


def comparator_1d(field: FieldRealization, N: int, kernel: WalkKernel) -> ComparatorResult:
    """Predict the endpoint mode by comparing the two reach-and-stick weights."""
    if field.d != 1 or kernel.d != 1:
        raise ValueError("the reach-and-stick comparator is defined for d = 1 only")
    if field.N < N:
        raise ValueError(f"field radius {field.N} below N={N}")
    restricted = field.restrict(N)
    modified = modified_field_stats(restricted)
    z1, z2 = modified.z_site(1), modified.z_site(2)
    log_b1 = _log_stick_weight(restricted, kernel, N, z1.coords[0])
    log_b2 = _log_stick_weight(restricted, kernel, N, z2.coords[0])
    choice = "z1" if log_b1 > log_b2 else "z2"
    return ComparatorResult(
        choice=choice,
        site=z1 if choice == "z1" else z2,
        z1=z1,
        z2=z2,
        log_b_z1=log_b1,
        log_b_z2=log_b2,
    )


def endpoint_law_to_csv(law: EndpointLaw, path) -> None:
    """CSV export (site coordinates, log_p) for the plotting side."""
    import csv

    from .serialize import float_repr

    header = [f"x{j + 1}" for j in range(law.ball.d)] + ["log_p"]
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for i in range(law.ball.size):
            row = [int(c) for c in law.ball.coords[i]]
            writer.writerow(row + [float_repr(law.log_p[i])])
