"""The random potential and its order statistics.

A field realization assigns one positive value to every site of a ball.  The
production sampler draws i.i.d. Pareto(alpha) values by inverse CDF, which
keeps a realization bit-reproducible from its 64-bit seed token.  Besides the
raw values we track two rankings:

* the order statistics of the values themselves, and
* the order statistics of the distance-discounted values
  ``psi(x) = (1 - |x|/(N+1)) * xi(x)``, whose top two sites are the candidate
  localization centers of the polymer endpoint.

Values of a continuous law are almost surely distinct; under finite precision
we still break ties deterministically (lexicographically smallest site wins)
and raise a ``ties_detected`` flag so statistical runs can drop those fields.
"""

from __future__ import annotations

import csv
import hashlib
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .lattice import BallIndex, LatticeSite, ball


def seed_token(master_seed: int, *path: int) -> int:
    """Derive a 64-bit stream token from a master seed and an index path.

    Trials keyed by (master_seed, i) are independent of execution order and
    of how many workers consume them.
    """
    ss = np.random.SeedSequence([int(master_seed), *[int(p) for p in path]])
    return int(ss.generate_state(1, np.uint64)[0])


def pareto_inverse_cdf(u, alpha: float):
    """Quantile transform: u in (0, 1] -> value with tail P(X > t) = t^-alpha."""
    return np.asarray(u, dtype=np.float64) ** (-1.0 / alpha)


@dataclass(frozen=True)
class FieldRealization:
    """Potential values over a ball, with enough provenance to regenerate."""

    ball: BallIndex
    xi: np.ndarray
    alpha: float
    seed: int | None

    def __post_init__(self) -> None:
        xi = np.ascontiguousarray(self.xi, dtype=np.float64)
        if xi.shape != (self.ball.size,):
            raise ValueError(
                f"field has {xi.shape[0]} values for a ball of {self.ball.size} sites"
            )
        if not np.all(np.isfinite(xi)):
            raise ValueError("field values must be finite")
        if np.any(xi < 0.0):
            raise ValueError("field values must be nonnegative")
        xi.setflags(write=False)
        object.__setattr__(self, "xi", xi)

    @cached_property
    def fingerprint(self) -> str:
        h = hashlib.sha256(self.xi.tobytes()).hexdigest()[:16]
        return f"{self.ball.d}d-N{self.ball.N}-{h}"

    @property
    def d(self) -> int:
        return self.ball.d

    @property
    def N(self) -> int:
        return self.ball.N

    def xi_at(self, site: LatticeSite) -> float:
        return float(self.xi[self.ball.index_of_site(site)])

    def restrict(self, n: int) -> "FieldRealization":
        """The same potential viewed on the sub-ball of radius n."""
        if n == self.ball.N:
            return self
        lo, hi = self.ball.window(n)
        return FieldRealization(ball(self.d, n), self.xi[lo:hi], self.alpha, self.seed)


def sample_pareto_field(seed: int, alpha: float, b: BallIndex) -> FieldRealization:
    """Draw an i.i.d. Pareto(alpha) field over the ball, one value per site.

    Uses xi = U^(-1/alpha) with U uniform on (0, 1]; every value is >= 1 and
    the draw is a pure function of (seed, alpha, d, N).
    """
    if alpha <= 0:
        raise ValueError(f"alpha must be positive, got {alpha}")
    rng = np.random.default_rng(int(seed))
    u = 1.0 - rng.random(b.size)  # (0, 1]: avoids u = 0 -> infinite value
    return FieldRealization(b, pareto_inverse_cdf(u, alpha), alpha, int(seed))


def constant_field(d: int, N: int, value: float, alpha: float = 1.0) -> FieldRealization:
    """Degenerate test potential xi == value (used by debugging flags and tests)."""
    b = ball(d, N)
    return FieldRealization(b, np.full(b.size, float(value)), alpha, None)


def _ranked_order(values: np.ndarray, b: BallIndex) -> tuple[np.ndarray, bool]:
    """Indices sorting ``values`` descending, site-lexicographic on exact ties."""
    keys = [b.coords[:, j] for j in range(b.d - 1, -1, -1)]
    order = np.lexsort((*keys, -values))
    sorted_vals = values[order]
    ties = bool(np.any(sorted_vals[1:] == sorted_vals[:-1]))
    return order, ties


@dataclass(frozen=True)
class OrderStats:
    """Field values sorted in decreasing order with their achieving sites."""

    ball: BallIndex
    values: np.ndarray      # descending
    site_order: np.ndarray  # ball index achieving values[k-1]
    ranks: np.ndarray       # ball index -> 1-based rank
    ties_detected: bool
    alpha: float
    fingerprint: str

    def X(self, k: int) -> float:
        """k-th largest value (1-based)."""
        return float(self.values[k - 1])

    def site(self, k: int) -> LatticeSite:
        return self.ball.site_at(int(self.site_order[k - 1]))

    def site_index(self, k: int) -> int:
        return int(self.site_order[k - 1])

    def rank_of_index(self, i: int) -> int:
        return int(self.ranks[i])


def order_statistics(field: FieldRealization) -> OrderStats:
    if field.ball.size == 0:
        raise ValueError("cannot rank an empty field")
    order, ties = _ranked_order(field.xi, field.ball)
    ranks = np.empty(field.ball.size, dtype=np.int64)
    ranks[order] = np.arange(1, field.ball.size + 1)
    ranks.setflags(write=False)
    values = field.xi[order]
    values.setflags(write=False)
    order = order.astype(np.int64)
    order.setflags(write=False)
    return OrderStats(
        ball=field.ball,
        values=values,
        site_order=order,
        ranks=ranks,
        ties_detected=ties,
        alpha=field.alpha,
        fingerprint=field.fingerprint,
    )


@dataclass(frozen=True)
class ModifiedFieldStats:
    """Order statistics of the distance-discounted field psi.

    ``psi(x) = (1 - |x|/(N+1)) xi(x)`` is the per-step energy rate of the
    strategy that walks straight to x and holds there; its top two sites z1
    and z2 are where the endpoint law is expected to concentrate.
    """

    ball: BallIndex
    psi: np.ndarray
    order: OrderStats
    fingerprint: str

    def Z(self, k: int) -> float:
        return self.order.X(k)

    def z_site(self, k: int) -> LatticeSite:
        return self.order.site(k)

    def z_index(self, k: int) -> int:
        return self.order.site_index(k)

    @property
    def ties_detected(self) -> bool:
        return self.order.ties_detected


def modified_field_stats(field: FieldRealization) -> ModifiedFieldStats:
    b = field.ball
    psi = (1.0 - b.norms / (b.N + 1.0)) * field.xi
    psi.setflags(write=False)
    pseudo = FieldRealization(b, psi, field.alpha, None)
    order = order_statistics(pseudo)
    return ModifiedFieldStats(
        ball=b, psi=psi, order=order, fingerprint=field.fingerprint
    )


@dataclass(frozen=True)
class GapReport:
    """Spacings of the two rankings, raw and rescaled by the extreme-value unit.

    ``scale = N^(d/alpha)`` is the magnitude of the top field values, so the
    ``*_scaled`` entries are O(1) diagnostics; ``n_times_z12_gap`` is the
    N * (Z1 - Z2) quantity whose divergence separates the top two centers.
    """

    N: int
    xi_gaps: np.ndarray
    min_xi_gap: float
    z12_gap: float
    z13_gap: float
    scale: float
    xi_gaps_scaled: np.ndarray
    z12_gap_scaled: float
    z13_gap_scaled: float
    n_times_z12_gap: float


def gap_diagnostics(
    stats: OrderStats, modified: ModifiedFieldStats, k_max: int
) -> GapReport:
    if k_max >= stats.ball.size:
        raise ValueError(f"k_max={k_max} must be below the ball size {stats.ball.size}")
    if k_max < 1:
        raise ValueError("k_max must be at least 1")
    if stats.fingerprint != modified.fingerprint:
        raise ValueError("order statistics and modified statistics disagree on the field")
    N, d = stats.ball.N, stats.ball.d
    xi_gaps = stats.values[:k_max] - stats.values[1 : k_max + 1]
    z12 = modified.Z(1) - modified.Z(2) if stats.ball.size >= 2 else float("nan")
    z13 = modified.Z(1) - modified.Z(3) if stats.ball.size >= 3 else float("nan")
    scale = float(N ** (d / stats.alpha)) if N > 0 else 1.0
    return GapReport(
        N=N,
        xi_gaps=xi_gaps,
        min_xi_gap=float(xi_gaps.min()),
        z12_gap=float(z12),
        z13_gap=float(z13),
        scale=scale,
        xi_gaps_scaled=xi_gaps / scale,
        z12_gap_scaled=float(z12 / scale),
        z13_gap_scaled=float(z13 / scale),
        n_times_z12_gap=float(N * z12),
    )


def field_to_csv(field: FieldRealization, path) -> None:
    """Snapshot for the plotting side: site coordinates, xi, psi."""
    from .serialize import float_repr

    stats = modified_field_stats(field)
    header = [f"x{j + 1}" for j in range(field.d)] + ["xi", "psi"]
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for i in range(field.ball.size):
            row = [int(c) for c in field.ball.coords[i]]
            writer.writerow(row + [float_repr(field.xi[i]), float_repr(stats.psi[i])])
