"""Geometry of l1 balls on Z^d and the dense site <-> index bijection.

The dynamic programs sweep dense arrays, so every ball of radius N carries a
fixed enumeration of its sites.  The layout is chosen so that the sites of any
smaller ball B_n occupy one contiguous index window:

* d = 1: natural order -N..N (index = x + N); B_n is the centered window.
* d >= 2: shells of increasing l1 norm, lexicographic within each shell;
  B_n is the prefix covering shells 0..n.

Either way ``window(n)`` returns the contiguous index range whose enumeration
coincides, in order, with the one ``BallIndex(d, n)`` would use, which lets a
field or a log-weight array restrict to a smaller radius as a cheap view.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

SUPPORTED_DIMENSIONS = (1, 2, 3)

#: Refuse to enumerate balls beyond this many sites (dense arrays only).
DEFAULT_MAX_SITES = 20_000_000


class CapacityError(ValueError):
    """Instance too large for the dense-array representation."""


@dataclass(frozen=True)
class LatticeSite:
    """A point of Z^d; ``norm`` is always the l1 norm of ``coords``."""

    coords: tuple[int, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "coords", tuple(int(c) for c in self.coords))

    @property
    def norm(self) -> int:
        return sum(abs(c) for c in self.coords)

    @property
    def d(self) -> int:
        return len(self.coords)

    def __repr__(self) -> str:  # compact in tables and error messages
        return f"Site{self.coords}"


def ball_cardinality(d: int, N: int) -> int:
    """|B_N| in closed form (used for the capacity check before enumeration)."""
    if d == 1:
        return 2 * N + 1
    if d == 2:
        return 2 * N * N + 2 * N + 1
    if d == 3:
        return (4 * N**3 + 6 * N**2 + 8 * N + 3) // 3
    raise ValueError(f"unsupported dimension d={d}; supported: {SUPPORTED_DIMENSIONS}")


def _shell_coords(d: int, r: int) -> np.ndarray:
    """Sites with l1 norm exactly r, lexicographically ascending, as (k, d) ints."""
    if r == 0:
        return np.zeros((1, d), dtype=np.int32)
    if d == 1:
        return np.array([[-r], [r]], dtype=np.int32)
    if d == 2:
        rows = []
        for x1 in range(-r, r + 1):
            rem = r - abs(x1)
            if rem == 0:
                rows.append((x1, 0))
            else:
                rows.append((x1, -rem))
                rows.append((x1, rem))
        return np.array(rows, dtype=np.int32)
    rows = []
    for x1 in range(-r, r + 1):
        rem1 = r - abs(x1)
        for x2 in range(-rem1, rem1 + 1):
            rem2 = rem1 - abs(x2)
            if rem2 == 0:
                rows.append((x1, x2, 0))
            else:
                rows.append((x1, x2, -rem2))
                rows.append((x1, x2, rem2))
    return np.array(rows, dtype=np.int32)


class BallIndex:
    """Dense enumeration of B_N = {x in Z^d : |x| <= N} with O(log) site lookup."""

    def __init__(self, d: int, N: int, max_sites: int = DEFAULT_MAX_SITES):
        if d not in SUPPORTED_DIMENSIONS:
            raise ValueError(
                f"unsupported dimension d={d}; supported: {SUPPORTED_DIMENSIONS}"
            )
        if N < 0:
            raise ValueError(f"radius must be nonnegative, got N={N}")
        size = ball_cardinality(d, N)
        if size > max_sites:
            raise CapacityError(
                f"B_{N} in d={d} has {size} sites, above the dense-storage cap "
                f"of {max_sites}"
            )
        self.d = d
        self.N = N
        self.size = size

        if d == 1:
            coords = np.arange(-N, N + 1, dtype=np.int32).reshape(-1, 1)
        else:
            coords = np.concatenate([_shell_coords(d, r) for r in range(N + 1)])
        self.coords = coords
        self.coords.setflags(write=False)
        self.norms = np.abs(coords).sum(axis=1).astype(np.int32)
        self.norms.setflags(write=False)

        if d == 1:
            self.origin_index = N
            self._shell_cum = None
            self._key_order = None
            self._sorted_keys = None
        else:
            self.origin_index = 0
            cum = np.zeros(N + 2, dtype=np.int64)
            np.add.at(cum, self.norms + 1, 1)
            self._shell_cum = np.cumsum(cum)
            keys = self._pack(coords)
            self._key_order = np.argsort(keys).astype(np.int64)
            self._sorted_keys = keys[self._key_order]
        self._shift_table: np.ndarray | None = None

    def _pack(self, coords: np.ndarray) -> np.ndarray:
        """Injective int64 key for coordinate rows inside [-N, N]^d."""
        base = np.int64(2 * self.N + 1)
        key = np.zeros(coords.shape[0], dtype=np.int64)
        for j in range(self.d):
            key = key * base + (coords[:, j].astype(np.int64) + self.N)
        return key

    def window(self, n: int) -> tuple[int, int]:
        """Index range [start, stop) covering exactly B_n, in B_n's own order."""
        if not 0 <= n <= self.N:
            raise ValueError(f"sub-radius n={n} outside [0, {self.N}]")
        if self.d == 1:
            return self.N - n, self.N + n + 1
        return 0, int(self._shell_cum[n + 1])

    def index_of(self, coords) -> np.ndarray | int:
        """Indices of coordinate rows; -1 for sites outside the ball."""
        arr = np.asarray(coords, dtype=np.int64)
        scalar = arr.ndim == 1
        if scalar:
            arr = arr.reshape(1, -1)
        if arr.shape[-1] != self.d:
            raise ValueError(f"expected coordinates of dimension {self.d}")
        inside = np.abs(arr).sum(axis=1) <= self.N
        out = np.full(arr.shape[0], -1, dtype=np.int64)
        if self.d == 1:
            out[inside] = arr[inside, 0] + self.N
        elif inside.any():
            key = np.zeros(arr.shape[0], dtype=np.int64)
            base = np.int64(2 * self.N + 1)
            for j in range(self.d):
                key = key * base + (arr[:, j] + self.N)
            pos = np.searchsorted(self._sorted_keys, key[inside])
            out[inside] = self._key_order[pos]
        if scalar:
            return int(out[0])
        return out

    def site_at(self, i: int) -> LatticeSite:
        return LatticeSite(tuple(int(c) for c in self.coords[i]))

    def index_of_site(self, site: LatticeSite) -> int:
        return int(self.index_of(np.asarray(site.coords)))

    def steps(self) -> np.ndarray:
        """The 2d+1 admissible one-step moves, lexicographically ascending."""
        rows = sorted(
            [tuple(r) for r in _shell_coords(self.d, 1)] + [(0,) * self.d]
        )
        return np.array(rows, dtype=np.int32)

    def shift_table(self) -> np.ndarray:
        """(size, 2d+1) table: entry [i, j] = index of site_i - steps[j], or -1."""
        if self._shift_table is None:
            steps = self.steps()
            shifted = self.coords[:, None, :].astype(np.int64) - steps[None, :, :]
            table = self.index_of(shifted.reshape(-1, self.d)).reshape(
                self.size, steps.shape[0]
            )
            table.setflags(write=False)
            self._shift_table = table
        return self._shift_table

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, BallIndex) and other.d == self.d and other.N == self.N
        )

    def __hash__(self) -> int:
        return hash((self.d, self.N))

    def __repr__(self) -> str:
        return f"BallIndex(d={self.d}, N={self.N}, size={self.size})"


@lru_cache(maxsize=512)
def ball(d: int, N: int) -> BallIndex:
    """Cached ball factory; the DP and the trial loops share these instances."""
    return BallIndex(d, N)


def enumerate_ball(d: int, N: int, max_sites: int = DEFAULT_MAX_SITES) -> BallIndex:
    """Build the site <-> index bijection for B_N (uncached entry point)."""
    if max_sites == DEFAULT_MAX_SITES:
        return ball(d, N)
    return BallIndex(d, N, max_sites=max_sites)
