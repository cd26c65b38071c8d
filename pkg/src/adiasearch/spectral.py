"""Closed-form spectral quantities for split adiabatic searches.

Per-block energy gaps, the product-state eigenvalue ladder of the fully
split search, level degeneracies, transition matrix elements, and tabulated
gap profiles over the interpolation parameter.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize_scalar

from .core import Schedule, Splitting

# Profile minima are refined from the grid to this bracket width.
_REFINE_TOL = 1e-12


def subsystem_gap(block_dim, f, g):
    """Gap between the two lowest levels of one search block.

    A block of dimension ``block_dim`` driven by f*(uniform-state projector
    penalty) + g*(target-state projector penalty) has spectral gap
    sqrt((f - g)**2 + 4*f*g/block_dim). Accepts array-valued f, g.
    """
    if block_dim < 2:
        raise ValueError(f"block dimension must be >= 2, got {block_dim}")
    return np.sqrt((f - g) ** 2 + (4.0 / block_dim) * f * g)


def max_structured_eigenvalue(n: int, spin_sum, f: float, g: float) -> float:
    """Energy of the fully split (one clause per qubit) Hamiltonian.

    Levels are labelled by the half-integer ladder spin_sum in
    {-n/2, ..., n/2}; the ground state sits at spin_sum = n/2. The value is
    (n/2)*(f + g) - spin_sum*sqrt(f**2 + g**2).
    """
    two_m = 2.0 * spin_sum
    if abs(two_m - round(two_m)) > 1e-12:
        raise ValueError(f"spin sum must step in halves, got {spin_sum}")
    if (round(two_m) - n) % 2 != 0 or abs(spin_sum) > n / 2 + 1e-12:
        raise ValueError(f"spin sum {spin_sum} outside the ladder for n={n}")
    return 0.5 * n * (f + g) - spin_sum * math.hypot(f, g)


def max_structured_degeneracy(n: int, level: int) -> int:
    """Multiplicity of the level-th distinct energy of the fully split search.

    level 0 is the unique ground state, level 1 the n-fold degenerate first
    excited state; in general the count is binomial(n, level).
    """
    if not 0 <= level <= n:
        raise ValueError(f"level must be in [0, {n}], got {level}")
    return math.comb(n, level)


def max_structured_matrix_element(f: float, g: float, df: float, dg: float) -> float:
    """Magnitude of the per-qubit drive matrix element for the full split.

    Between the ground state and any one of the degenerate first excited
    states the drive couples with strength |df*g - dg*f| / (2*sqrt(f**2+g**2));
    only the magnitude matters because only its square enters the
    degenerate adiabaticity condition.
    """
    if f == 0.0 and g == 0.0:
        raise ValueError("matrix element is singular at f = g = 0")
    return 0.5 * abs(df * g - dg * f) / math.hypot(f, g)


@dataclass(frozen=True)
class GapProfile:
    """Per-block and global gaps sampled over the interpolation parameter."""

    splitting: Splitting
    s: np.ndarray
    block_gaps: np.ndarray  # shape (samples, num_blocks)
    global_gap: np.ndarray
    omega_min: float
    s_min: float

    def to_csv(self) -> str:
        names = [f"omega_{i + 1}" for i in range(self.splitting.num_blocks)]
        lines = ["s," + ",".join(names) + ",omega_global"]
        for k in range(self.s.size):
            cells = [f"{self.s[k]:.17g}"]
            cells += [f"{v:.17g}" for v in self.block_gaps[k]]
            cells.append(f"{self.global_gap[k]:.17g}")
            lines.append(",".join(cells))
        return "\n".join(lines) + "\n"


def gap_profile(splitting: Splitting, schedule: Schedule, grid: int = 1001) -> GapProfile:
    """Tabulate every block gap and the global gap on a uniform s grid.

    The blocks act on disjoint tensor factors, so the first excited total
    energy sits one smallest block gap above the ground energy and the
    global gap is the minimum over blocks. The minimum over s is refined by
    golden-section search around the best grid sample.
    """
    if grid < 2:
        raise ValueError(f"grid must have at least 2 samples, got {grid}")
    s = np.linspace(0.0, 1.0, grid)
    f = np.asarray(schedule.f(s), dtype=float)
    g = np.asarray(schedule.g(s), dtype=float)
    block_gaps = np.column_stack(
        [subsystem_gap(dim, f, g) for dim in splitting.block_dims]
    )
    global_gap = block_gaps.min(axis=1)

    def omega(x):
        ff, gg = schedule.f(x), schedule.g(x)
        return min(subsystem_gap(dim, ff, gg) for dim in splitting.block_dims)

    k = int(np.argmin(global_gap))
    s_min, omega_min = s[k], float(global_gap[k])
    if 0 < k < grid - 1 and global_gap[k] < min(global_gap[k - 1], global_gap[k + 1]):
        try:
            res = minimize_scalar(
                omega,
                bracket=(s[k - 1], s[k], s[k + 1]),
                method="golden",
                options={"xtol": _REFINE_TOL},
            )
        except ValueError:
            res = None  # degenerate bracket, keep the grid sample
        if res is not None and res.fun <= omega_min:
            s_min, omega_min = float(np.clip(res.x, 0.0, 1.0)), float(res.fun)
    return GapProfile(splitting, s, block_gaps, global_gap, omega_min, s_min)
