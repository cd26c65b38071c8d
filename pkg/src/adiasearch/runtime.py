"""Running-time computation for split adiabatic searches.

The saturated-schedule time integral for arbitrary splittings, its
closed-form value for equal splits under the linear schedule, the square
root scaling of the fully split search, scaling exponents, published-table
reproduction, and the optimal time parameterization s(t).
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import IntegrationWarning, quad
from scipy.interpolate import PchipInterpolator
from scipy.optimize import brentq

from .core import Precision, Schedule, Splitting, equal_splitting, linear_schedule

MAX_TABLE_QUBITS = 64  # beyond this, doubles cannot resolve (N-1)/N**2 anyway

_QUAD_LIMIT = 500


class QuadratureError(RuntimeError):
    """Adaptive quadrature failed to reach the requested tolerance."""

    def __init__(self, message: str, value: float | None = None, estimate: float | None = None):
        super().__init__(message)
        self.value = value
        self.estimate = estimate


@dataclass(frozen=True)
class RunTimeResult:
    """Schedule-optimal running time (as the product epsilon * T) plus scaling exponents.

    beta is infinite for a single block, matching its defining relation.
    """

    splitting: Splitting
    eps_t: float
    alpha: float
    beta: float
    method: str


def _time_integrand(splitting: Splitting, schedule: Schedule):
    """dt/ds times epsilon for the bound-saturating time parameterization."""
    dims = np.array(splitting.block_dims, dtype=float)
    weights = (dims - 1.0) / dims**2

    def integrand(s: float) -> float:
        f = float(schedule.f(s))
        g = float(schedule.g(s))
        df = float(schedule.df(s))
        dg = float(schedule.dg(s))
        gaps_sq = (f - g) ** 2 + (4.0 * f * g) / dims
        return abs(df * g - dg * f) * math.sqrt(float(np.sum(weights / gaps_sq**3)))

    return integrand


def _gap_minimum_breakpoints(schedule: Schedule) -> list[float]:
    """Interior s where f = g; every block gap bottoms out there."""
    def crossing(s):
        return float(schedule.f(s)) - float(schedule.g(s))

    if crossing(0.0) > 0.0 > crossing(1.0):
        return [brentq(crossing, 0.0, 1.0, xtol=1e-14)]
    return []


def _peak_breakpoints(splitting: Splitting, schedule: Schedule) -> list[float]:
    """Forced subdivision points bracketing the integrand peak at f = g.

    A block of dimension N peaks with half-width about f / (sqrt(N) |f'-g'|)
    in s, far below what adaptive sampling stumbles on for large N (2^-32 of
    the interval at 64 qubits), so a ladder of scales around the crossing is
    pinned explicitly for every distinct block dimension.
    """
    crossings = _gap_minimum_breakpoints(schedule)
    if not crossings:
        return []
    s_star = crossings[0]
    f_star = float(schedule.f(s_star))
    slope = max(abs(float(schedule.df(s_star)) - float(schedule.dg(s_star))), 1e-6)
    points = {s_star}
    for dim in set(splitting.block_dims):
        width = 2.0 * f_star / (math.sqrt(dim) * slope)
        for scale in (1.0, 8.0, 64.0, 512.0, 4096.0):
            for sign in (-1.0, 1.0):
                candidate = s_star + sign * scale * width
                if 0.0 < candidate < 1.0:
                    points.add(candidate)
    return sorted(points)


def _check_not_singular(schedule: Schedule):
    s = np.linspace(0.0, 1.0, 257)
    total = np.asarray(schedule.f(s), dtype=float) + np.asarray(schedule.g(s), dtype=float)
    if np.min(total) < 1e-9:
        k = int(np.argmin(total))
        raise ValueError(
            f"singular schedule: f = g = 0 near s = {s[k]:.4f}, the gap closes there"
        )


def _quad_piece(integrand, lo: float, hi: float, rel_tol: float, points=None):
    """One adaptive panel, returning (value, error estimate).

    Roundoff chatter from panels that sit right on the peak is tolerated
    here; callers judge the summed error estimate against the whole
    integral, which is what the tolerance is about.
    """
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", IntegrationWarning)
        value, err = quad(
            integrand,
            lo,
            hi,
            points=points,
            epsabs=0.0,
            epsrel=rel_tol,
            limit=_QUAD_LIMIT,
        )
    return value, err


def _check_converged(total: float, err_total: float, rel_tol: float, context: str):
    if err_total > 10.0 * rel_tol * max(abs(total), 1e-300):
        raise QuadratureError(
            f"quadrature did not converge for {context}: value {total!r}, "
            f"summed error estimate {err_total!r}",
            value=total,
            estimate=err_total,
        )


def _integrate_piecewise(splitting: Splitting, schedule: Schedule, rel_tol: float) -> float:
    """Integrate the time integrand over [0, 1] split at the peak ladder."""
    integrand = _time_integrand(splitting, schedule)
    edges = [0.0] + _peak_breakpoints(splitting, schedule) + [1.0]
    total = 0.0
    err_total = 0.0
    for lo, hi in zip(edges, edges[1:]):
        value, err = _quad_piece(integrand, lo, hi, rel_tol)
        total += value
        err_total += err
    _check_converged(total, err_total, rel_tol, "the running-time integral")
    return total


def scaling_coefficients(eps_t: float, n: int, num_blocks: int) -> tuple[float, float]:
    """Exponents relating eps_t to sqrt(m * 2^(n/m)) and to sqrt(m).

    The first (alpha) measures closeness to square-root-of-dimension
    scaling; the second (beta) is reported as infinity for a single block,
    where its defining base is 1.
    """
    if eps_t <= 0.0:
        raise ValueError(f"eps_t must be positive, got {eps_t}")
    if num_blocks < 1:
        raise ValueError(f"number of blocks must be >= 1, got {num_blocks}")
    log_base = math.log(num_blocks) + (n / num_blocks) * math.log(2.0)
    alpha = 2.0 * math.log(eps_t) / log_base
    beta = math.inf if num_blocks == 1 else 2.0 * math.log(eps_t) / math.log(num_blocks)
    return alpha, beta


def running_time_integral(
    splitting: Splitting,
    schedule: Schedule | None = None,
    precision: Precision | None = None,
) -> RunTimeResult:
    """Schedule-optimal running time of a split search by adaptive quadrature.

    Integrates |f'g - g'f| * sqrt(sum_i (N_i - 1)/N_i**2 / omega_i**6) over
    s in [0, 1]. The integrand peaks where f = g with width shrinking as
    1/sqrt(N_i), so that point is passed to the quadrature as a forced
    subdivision; a plain uniform rule would miss the peak for large blocks.
    """
    schedule = schedule if schedule is not None else linear_schedule()
    precision = precision if precision is not None else Precision()
    _check_not_singular(schedule)
    eps_t = _integrate_piecewise(splitting, schedule, precision.quad_tol)
    alpha, beta = scaling_coefficients(eps_t, splitting.n, splitting.num_blocks)
    return RunTimeResult(splitting, eps_t, alpha, beta, "quadrature")


def closed_form_eps_t(n: int, num_blocks: int) -> float:
    """Equal-split running time under the linear schedule, in closed form.

    Substituting u = 2s - 1 turns each block's integral into
    (1/2) * integral of (a*u**2 + b)**(-3/2) with a = 1 - 1/N and b = 1/N,
    which evaluates to N; the total collapses to sqrt(m * (2^(n/m) - 1)).
    """
    if num_blocks < 1:
        raise ValueError(f"number of blocks must be >= 1, got {num_blocks}")
    if n % num_blocks != 0:
        raise ValueError(f"{num_blocks} does not divide n={n}")
    block_dim = 2 ** (n // num_blocks)
    return math.sqrt(num_blocks * (block_dim - 1))


def max_structured_time(n: int, precision: Precision | None = None) -> RunTimeResult:
    """Running time sqrt(n)/epsilon of the fully split search.

    Saturating the degenerate adiabatic condition with the per-qubit matrix
    element integrates to exactly sqrt(n) for eps_t, consistent with the
    equal-split closed form at one qubit per block.
    """
    if n < 1:
        raise ValueError(f"qubit count must be >= 1, got {n}")
    splitting = equal_splitting(n, n)
    eps_t = math.sqrt(n)
    alpha, beta = scaling_coefficients(eps_t, n, n)
    return RunTimeResult(splitting, eps_t, alpha, beta, "max_structured")


@dataclass(frozen=True)
class TimeSchedule:
    """Monotone time parameterization s(t) with its total time.

    Produced by :func:`optimal_schedule` (where the rate samples come from
    the saturated bound) or from user samples. Interpolation is monotone
    piecewise cubic in both directions.
    """

    base: Schedule
    total_time: float
    t_nodes: np.ndarray
    s_nodes: np.ndarray
    rate_nodes: np.ndarray
    _s_of_t: object = field(default=None, repr=False, compare=False)
    _t_of_s: object = field(default=None, repr=False, compare=False)
    _rate_of_s: object = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        if self.total_time < 0.0:
            raise ValueError(f"total time must be >= 0, got {self.total_time}")
        if self.total_time > 0.0:
            object.__setattr__(self, "_s_of_t", PchipInterpolator(self.t_nodes, self.s_nodes))
            object.__setattr__(self, "_t_of_s", PchipInterpolator(self.s_nodes, self.t_nodes))
            object.__setattr__(self, "_rate_of_s", PchipInterpolator(self.s_nodes, self.rate_nodes))

    @classmethod
    def from_samples(cls, t_nodes, s_nodes, base: Schedule | None = None) -> "TimeSchedule":
        """Build from sampled (t, s); rates come from the interpolant's slope."""
        t_nodes = np.asarray(t_nodes, dtype=float)
        s_nodes = np.asarray(s_nodes, dtype=float)
        if t_nodes.ndim != 1 or t_nodes.size < 2:
            raise ValueError("need at least two (t, s) samples")
        if np.any(np.diff(t_nodes) <= 0.0) or np.any(np.diff(s_nodes) <= 0.0):
            raise ValueError("t and s samples must be strictly increasing")
        rates = PchipInterpolator(t_nodes, s_nodes).derivative()(t_nodes)
        return cls(
            base if base is not None else linear_schedule(),
            float(t_nodes[-1] - t_nodes[0]),
            t_nodes - t_nodes[0],
            s_nodes,
            np.asarray(rates, dtype=float),
        )

    @classmethod
    def quench(cls, base: Schedule | None = None) -> "TimeSchedule":
        """Zero-duration parameterization: measure immediately at s = 1."""
        return cls(
            base if base is not None else linear_schedule(),
            0.0,
            np.array([0.0]),
            np.array([1.0]),
            np.array([0.0]),
        )

    def s_of_t(self, t):
        if self.total_time == 0.0:
            return np.ones_like(np.asarray(t, dtype=float)) if np.ndim(t) else 1.0
        clipped = np.clip(t, 0.0, self.total_time)
        return np.clip(self._s_of_t(clipped), 0.0, 1.0)

    def t_of_s(self, s):
        if self.total_time == 0.0:
            return np.zeros_like(np.asarray(s, dtype=float)) if np.ndim(s) else 0.0
        return np.clip(self._t_of_s(np.clip(s, 0.0, 1.0)), 0.0, self.total_time)

    def rate(self, s):
        """ds/dt as a function of s."""
        if self.total_time == 0.0:
            return np.zeros_like(np.asarray(s, dtype=float)) if np.ndim(s) else 0.0
        return self._rate_of_s(np.clip(s, 0.0, 1.0))

    def scaled(self, new_total_time: float) -> "TimeSchedule":
        """Same path through s, uniformly stretched to a new total time."""
        if new_total_time <= 0.0:
            raise ValueError(f"scaled total time must be > 0, got {new_total_time}")
        if self.total_time == 0.0:
            raise ValueError("cannot scale a zero-duration schedule")
        factor = new_total_time / self.total_time
        return TimeSchedule(
            self.base,
            new_total_time,
            self.t_nodes * factor,
            self.s_nodes,
            self.rate_nodes / factor,
        )


def optimal_schedule(
    splitting: Splitting,
    precision: Precision | None = None,
    grid: int = 1001,
    schedule: Schedule | None = None,
) -> TimeSchedule:
    """Time parameterization that saturates the adiabatic bound everywhere.

    Tabulates t(s) by accumulating the time integrand over a uniform s grid
    (each cell integrated adaptively) and inverts it monotonically. The
    total time agrees with :func:`running_time_integral` to quadrature
    tolerance, and ds/dt is smallest where the gap is smallest.
    """
    if grid < 100:
        raise ValueError(f"grid must have at least 100 samples, got {grid}")
    precision = precision if precision is not None else Precision()
    schedule = schedule if schedule is not None else linear_schedule()
    _check_not_singular(schedule)
    integrand = _time_integrand(splitting, schedule)
    peak_points = _peak_breakpoints(splitting, schedule)
    s_nodes = np.linspace(0.0, 1.0, grid)
    t_nodes = np.zeros(grid)
    err_total = 0.0
    for k in range(1, grid):
        lo, hi = s_nodes[k - 1], s_nodes[k]
        inner = [p for p in peak_points if lo < p < hi]
        piece, err = _quad_piece(integrand, lo, hi, precision.quad_tol, points=inner or None)
        t_nodes[k] = t_nodes[k - 1] + piece / precision.epsilon
        # far tails of huge blocks can fall below the resolution of the
        # accumulated time; keep the tabulation strictly increasing
        if t_nodes[k] <= t_nodes[k - 1]:
            t_nodes[k] = np.nextafter(t_nodes[k - 1], np.inf)
        err_total += err / precision.epsilon
    _check_converged(t_nodes[-1], err_total, precision.quad_tol, "the time tabulation")
    rate_nodes = np.array([precision.epsilon / integrand(s) for s in s_nodes])
    return TimeSchedule(schedule, float(t_nodes[-1]), t_nodes, s_nodes, rate_nodes)


def _divisors(n: int) -> list[int]:
    return [m for m in range(1, n + 1) if n % m == 0]


def reproduce_table(n: int, precision: Precision | None = None) -> list[RunTimeResult]:
    """One quadrature row per divisor of n (ascending), linear schedule."""
    if not 1 <= n <= MAX_TABLE_QUBITS:
        raise ValueError(f"n must be in [1, {MAX_TABLE_QUBITS}], got {n}")
    precision = precision if precision is not None else Precision()
    schedule = linear_schedule()
    return [
        running_time_integral(equal_splitting(n, m), schedule, precision)
        for m in _divisors(n)
    ]


def round_half_away(x: float, decimals: int) -> float:
    """Round with ties away from zero, as the published tables do."""
    scale = 10.0**decimals
    return math.copysign(math.floor(abs(x) * scale + 0.5), x) / scale


def _display_row(result: RunTimeResult) -> tuple[int, int, float, float, float]:
    m = result.splitting.num_blocks
    return (
        m,
        result.splitting.n // m,
        round_half_away(result.eps_t, 2),
        round_half_away(result.alpha, 4),
        result.beta if math.isinf(result.beta) else round_half_away(result.beta, 4),
    )


def table_to_csv(results: list[RunTimeResult]) -> str:
    """Display-rounded table: eps_t to 2 decimals, exponents to 4."""
    lines = ["m,n_per_m,eps_T,alpha,beta"]
    for result in results:
        m, n_per_m, eps_t, alpha, beta = _display_row(result)
        beta_text = "inf" if math.isinf(beta) else f"{beta:.4f}"
        lines.append(f"{m},{n_per_m},{eps_t:.2f},{alpha:.4f},{beta_text}")
    return "\n".join(lines) + "\n"


def table_to_json(results: list[RunTimeResult]) -> str:
    rows = []
    for result in results:
        m, n_per_m, eps_t, alpha, beta = _display_row(result)
        rows.append(
            {
                "m": m,
                "n_per_m": n_per_m,
                "eps_T": eps_t,
                "alpha": alpha,
                "beta": "inf" if math.isinf(beta) else beta,
            }
        )
    return json.dumps(rows, indent=2) + "\n"
