"""A deterministic potential that forces the endpoint mode onto the runner-up.

Construction (d = 1, alpha > 1): place a moderate spike at x = n and a taller
one at y = 3n, fill the sites strictly between them at the mean potential
value m = alpha/(alpha-1), and keep everything else in a wide window at the
support minimum.  As the horizon N grows through (11n/2, 13n/2) the
discounted values of x and y swap order at some N*; just before and at the
swap the two discounted values nearly tie, and the interior reward collected
en route to y makes the polymer end at y even while y is still the *second*
discounted-potential site.  Detecting that N* and confirming w = z2 with the
full dynamic program reproduces the infinitely-many-swaps phenomenon at one
explicit horizon.

Every clause of the construction is rechecked against the realized array by
scanning, never assumed from the construction itself.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .fields import FieldRealization, modified_field_stats
from .lattice import LatticeSite, ball
from .polymer import WalkKernel, comparator_1d, endpoint_law_for


class ScenarioError(ValueError):
    """A precondition or construction clause failed; message names it."""


class SwitchNotFoundError(RuntimeError):
    """The discounted values did not swap inside the scan window."""


@dataclass(frozen=True)
class ClauseCheck:
    name: str
    ok: bool
    detail: str


@dataclass
class ScenarioField:
    """The constructed potential over the window [-7n, (1+eps) 7n]."""

    n: int
    epsilon: float
    eta: float
    alpha: float
    x: int
    y: int
    xi_x: float
    xi_y: float
    m_alpha: float
    window_lo: int
    window_hi: int
    xi_window: np.ndarray
    clause_checks: tuple[ClauseCheck, ...]
    N_star: int | None = None

    def xi_at(self, site: int) -> float:
        return float(self.xi_window[site - self.window_lo])

    def field_at_radius(self, N: int) -> FieldRealization:
        if not (self.window_lo <= -N and N <= self.window_hi):
            raise ValueError(f"window does not cover the ball of radius {N}")
        lo = -N - self.window_lo
        return FieldRealization(
            ball(1, N), self.xi_window[lo : lo + 2 * N + 1], self.alpha, None
        )

    def psi(self, N: int, site: int) -> float:
        return (1.0 - abs(site) / (N + 1.0)) * self.xi_at(site)

    def psi_gap(self, N: int) -> float:
        """Discounted value of y minus that of x; negative while x leads."""
        return self.psi(N, self.y) - self.psi(N, self.x)


def default_eta(alpha: float, kernel: WalkKernel) -> float:
    """Half of m_alpha + log(step/hold); positive under the standing assumption."""
    m_alpha = alpha / (alpha - 1.0)
    return 0.5 * (m_alpha + math.log(kernel.prob((1,)) / kernel.hold_prob))


def check_scenario_preconditions(n: int, kernel: WalkKernel, alpha: float) -> float:
    """Validate the standing assumptions; returns m_alpha.

    These do not depend on epsilon, so a failure here is final and is never
    retried by the epsilon-halving policy.
    """
    if kernel.d != 1:
        raise ScenarioError("the switch scenario is a d = 1 construction")
    if alpha <= 1:
        raise ScenarioError(f"alpha must exceed 1 (mean potential finite), got {alpha}")
    m_alpha = alpha / (alpha - 1.0)
    log_ratio = math.log(kernel.prob((1,)) / kernel.hold_prob)
    if not log_ratio > -m_alpha:
        raise ScenarioError(
            f"need log(kappa(1)/kappa(0)) > -m_alpha: {log_ratio:.6g} <= {-m_alpha:.6g}"
        )
    unit = n ** (1.0 / alpha)
    if not m_alpha < unit / 2.0:
        raise ScenarioError(
            f"need m_alpha < n^(1/alpha)/2: {m_alpha:.6g} >= {unit / 2.0:.6g}"
        )
    return m_alpha


def build_switch_scenario(
    n: int, epsilon: float, eta: float, kernel: WalkKernel, alpha: float
) -> ScenarioField:
    m_alpha = check_scenario_preconditions(n, kernel, alpha)
    if epsilon <= 0 or eta <= 0:
        raise ScenarioError("epsilon and eta must be positive")
    unit = n ** (1.0 / alpha)

    x, y = n, 3 * n
    xi_x = (1.0 + epsilon / 2.0) * unit
    xi_y = (1.0 + epsilon / 2.0) * (5.0 / 3.0) * unit
    window_lo = -7 * n
    window_hi = math.ceil((1.0 + epsilon) * 7 * n)
    xi = np.ones(window_hi - window_lo + 1)
    xi[(x + 1 - window_lo) : (y - window_lo)] = m_alpha
    xi[x - window_lo] = xi_x
    xi[y - window_lo] = xi_y

    sites = np.arange(window_lo, window_hi + 1)
    checks = []

    def in_open(v: np.ndarray, lo: float, hi: float) -> np.ndarray:
        return (v > lo) & (v < hi)

    for name, center, scale in (("x", n, unit), ("y", 3 * n, (5.0 / 3.0) * unit)):
        band = (sites >= center) & (sites <= math.floor((1.0 + epsilon) * center))
        hits = sites[band & in_open(xi, scale, (1.0 + epsilon) * scale)]
        ok = hits.size == 1 and hits[0] == center
        checks.append(
            ClauseCheck(
                name=f"unique_{name}",
                ok=ok,
                detail=f"sites with the prescribed value in the {name}-band: {hits.tolist()}",
            )
        )
    others = (sites != x) & (sites != y)
    worst = float(xi[others].max())
    checks.append(
        ClauseCheck(
            name="background_below_half_unit",
            ok=worst < unit / 2.0,
            detail=f"max background value {worst:.6g} vs bound {unit / 2.0:.6g}",
        )
    )
    interior_sum = float(xi[(x + 1 - window_lo) : (y - window_lo)].sum())
    needed = (m_alpha - eta) * (y - x)
    checks.append(
        ClauseCheck(
            name="interior_sum",
            ok=interior_sum > needed,
            detail=f"interior sum {interior_sum:.6g} vs (m_alpha - eta)(y - x) = {needed:.6g}",
        )
    )
    failed = [c for c in checks if not c.ok]
    if failed:
        raise ScenarioError(
            "construction clauses failed: "
            + "; ".join(f"{c.name} ({c.detail})" for c in failed)
        )
    xi.setflags(write=False)
    return ScenarioField(
        n=n,
        epsilon=epsilon,
        eta=eta,
        alpha=alpha,
        x=x,
        y=y,
        xi_x=xi_x,
        xi_y=xi_y,
        m_alpha=m_alpha,
        window_lo=window_lo,
        window_hi=window_hi,
        xi_window=xi,
        clause_checks=tuple(checks),
    )


@dataclass(frozen=True)
class ScanRow:
    N: int
    psi_x: float
    psi_y: float
    psi_gap: float
    z1: int
    z2: int
    predicted_w: int
    dp_w: int | None = None


@dataclass(frozen=True)
class SwitchResult:
    N_star: int
    w_at_N_star: LatticeSite
    z1_at_N_star: LatticeSite
    z2_at_N_star: LatticeSite
    w_is_z2: bool
    swap_found: bool
    scan: tuple[ScanRow, ...]
    scenario: ScenarioField


def detect_switch(scenario: ScenarioField, kernel: WalkKernel) -> SwitchResult:
    """Scan the horizon window for the discounted-value swap and confirm by DP.

    The scan itself uses the closed-form discounted values and the
    reach-and-stick comparator (cheap per horizon); the swap horizon N* and
    the window edges are then confirmed with the full dynamic program.
    """
    n = scenario.n
    first = math.floor(11 * n / 2) + 1
    last = math.ceil(13 * n / 2) - 1
    rows: list[ScanRow] = []
    for N in range(first, last + 1):
        gap = scenario.psi_gap(N)
        z1, z2 = (scenario.x, scenario.y) if gap < 0 else (scenario.y, scenario.x)
        if gap == 0.0:  # exact tie: the lexicographic rule favors the smaller site
            z1, z2 = scenario.x, scenario.y
        comp = comparator_1d(scenario.field_at_radius(N), N, kernel)
        rows.append(
            ScanRow(
                N=N,
                psi_x=scenario.psi(N, scenario.x),
                psi_y=scenario.psi(N, scenario.y),
                psi_gap=gap,
                z1=z1,
                z2=z2,
                predicted_w=comp.site.coords[0],
            )
        )

    if not (rows[0].psi_gap < 0 < rows[-1].psi_gap):
        raise SwitchNotFoundError(
            f"no discounted-value sign change in ({11 * n / 2:g}, {13 * n / 2:g}): "
            f"gap({rows[0].N}) = {rows[0].psi_gap:.6g}, "
            f"gap({rows[-1].N}) = {rows[-1].psi_gap:.6g} "
            f"(n={n}, epsilon={scenario.epsilon}, eta={scenario.eta})"
        )
    below = [r.N for r in rows if r.psi_gap <= 0]
    N_star = max(below)

    def dp_row(row: ScanRow) -> tuple[ScanRow, LatticeSite, LatticeSite, LatticeSite]:
        field = scenario.field_at_radius(row.N)
        modified = modified_field_stats(field)
        law = endpoint_law_for(field, kernel, row.N)
        return (
            replace(row, dp_w=law.w.coords[0]),
            law.w,
            modified.z_site(1),
            modified.z_site(2),
        )

    confirmed: dict[int, tuple] = {}
    for N in {rows[0].N, N_star, min(N_star + 1, rows[-1].N), rows[-1].N}:
        confirmed[N] = dp_row(rows[N - first])
    rows = [confirmed[r.N][0] if r.N in confirmed else r for r in rows]

    _, w_star, z1_star, z2_star = confirmed[N_star]
    # sanity: the modified-field argmaxes must be exactly the two spikes
    if {z1_star.coords[0], z2_star.coords[0]} != {scenario.x, scenario.y}:
        raise SwitchNotFoundError(
            f"top discounted sites at N*={N_star} are {z1_star}, {z2_star}, "
            f"not the constructed pair ({scenario.x}, {scenario.y})"
        )
    scenario.N_star = N_star
    return SwitchResult(
        N_star=N_star,
        w_at_N_star=w_star,
        z1_at_N_star=z1_star,
        z2_at_N_star=z2_star,
        w_is_z2=w_star == z2_star,
        swap_found=True,
        scan=tuple(rows),
        scenario=scenario,
    )


@dataclass(frozen=True)
class SwitchStudy:
    result: SwitchResult
    epsilon_used: float
    attempts: int


def run_switch_study(
    n: int,
    epsilon: float,
    eta: float | None,
    kernel: WalkKernel,
    alpha: float,
    max_retries: int = 4,
) -> SwitchStudy:
    """Build-and-detect with the epsilon-halving retry policy.

    A failure to build or to find the swap at a given epsilon is treated as a
    parameter problem: epsilon is halved and the construction retried, up to
    ``max_retries`` times, before the last error propagates.
    """
    check_scenario_preconditions(n, kernel, alpha)  # epsilon-independent: fail fast
    if eta is None:
        eta = default_eta(alpha, kernel)
    eps = epsilon
    last_error: Exception | None = None
    for attempt in range(1, max_retries + 2):
        try:
            scenario = build_switch_scenario(n, eps, eta, kernel, alpha)
            result = detect_switch(scenario, kernel)
            return SwitchStudy(result=result, epsilon_used=eps, attempts=attempt)
        except (ScenarioError, SwitchNotFoundError) as err:
            last_error = err
            eps /= 2.0
    raise type(last_error)(
        f"switch scenario failed after {max_retries + 1} attempts "
        f"(final epsilon {eps * 2.0:g}): {last_error}"
    )
