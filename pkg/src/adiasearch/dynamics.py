"""Direct integration of the time-dependent search dynamics.

A fixed-step 4th-order integrator drives the state through H(s(t)) without
building dense matrices, recording ground-state overlap, the adiabaticity
diagnostic, and norm drift at uniform checkpoints in s. Norm drift is never
corrected, only watched: exceeding the limit is an error, not a warning,
because renormalizing would mask step-size problems.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.linalg import eigh
from scipy.sparse.linalg import LinearOperator, eigsh

from .core import MarkedState, Precision, Schedule, Splitting
from .hamiltonian import DENSE_CAP, MatrixFreeHamiltonian, build_initial
from .runtime import TimeSchedule
from .spectral import max_structured_matrix_element, subsystem_gap

CHECKPOINT_COUNT = 101
NORM_DRIFT_LIMIT = 1e-6
GUARANTEE_SLACK = 0.01  # the 1 - eps**2 success estimate is not exact at finite eps

# Full diagonalization below this dimension; per-block closed forms above.
_DENSE_EIG_DIM = 1024
_CLUSTER_TOL = 1e-8


class NormDriftError(RuntimeError):
    """State norm drifted beyond the allowed limit during integration."""


class DegenerateLevelWarning(UserWarning):
    """First excited level is degenerate; the summed condition applies."""


def rk4_propagate(apply_h, psi: np.ndarray, t0: float, t1: float, nsteps: int) -> np.ndarray:
    """Integrate i * dpsi/dt = H(t) psi with classical fixed-step RK4.

    ``apply_h(t, v)`` must return H(t) @ v. Returns the state at t1 without
    renormalizing.
    """
    if nsteps < 1:
        raise ValueError(f"nsteps must be >= 1, got {nsteps}")
    h = (t1 - t0) / nsteps
    for k in range(nsteps):
        t = t0 + k * h
        k1 = -1j * apply_h(t, psi)
        k2 = -1j * apply_h(t + 0.5 * h, psi + (0.5 * h) * k1)
        k3 = -1j * apply_h(t + 0.5 * h, psi + (0.5 * h) * k2)
        k4 = -1j * apply_h(t + h, psi + h * k3)
        psi = psi + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    return psi


def _cluster_indices(vals: np.ndarray, start: int) -> list[int]:
    """Indices of the eigenvalue cluster beginning at position ``start``."""
    tol = _CLUSTER_TOL * max(1.0, float(np.abs(vals).max()))
    anchor = vals[start]
    return [k for k in range(start, vals.size) if vals[k] - anchor <= tol]


class _SpectralProbe:
    """Instantaneous eigen-diagnostics for one (splitting, marked) problem.

    Uses full dense diagonalization up to 1024 dimensions; beyond that the
    transition element comes from the exact per-block closed form and the
    ground vector from a Lanczos solve.
    """

    def __init__(self, splitting: Splitting, marked: MarkedState):
        self.splitting = splitting
        self.applier = MatrixFreeHamiltonian(splitting, marked)
        self.dense = splitting.dim <= _DENSE_EIG_DIM
        if self.dense:
            self.h_initial, _ = build_initial(splitting)
            self.final_diag = self.applier.final_diag

    def _dense_eigens(self, f: float, g: float):
        h = f * self.h_initial + np.diag(g * self.final_diag)
        return eigh(h)

    def ground_vector(self, f: float, g: float) -> tuple[float, np.ndarray, float]:
        """(E0, ground eigenvector, gap to the next level)."""
        if self.dense:
            vals, vecs = self._dense_eigens(f, g)
            return float(vals[0]), vecs[:, 0], float(vals[1] - vals[0])
        op = LinearOperator(
            (self.splitting.dim,) * 2,
            matvec=lambda v: self.applier.apply(f, g, v),
            dtype=float,
        )
        # deterministic generic start; the uniform vector is an exact
        # eigenvector at s = 0 and stalls the Lanczos iteration
        v0 = np.random.default_rng(7).standard_normal(self.splitting.dim)
        vals, vecs = eigsh(op, k=2, which="SA", v0=v0)
        order = np.argsort(vals)
        return float(vals[order[0]]), vecs[:, order[0]], float(vals[order[1]] - vals[order[0]])

    def transition_element(self, f: float, g: float, df: float, dg: float):
        """(element, gap, cluster size) for the drive coupling into the first
        excited cluster: the norm of that cluster's projection of dH/ds
        applied to the ground state."""
        if self.dense:
            vals, vecs = self._dense_eigens(f, g)
            cluster = _cluster_indices(vals, 1)
            drive = self.applier.apply(df, dg, vecs[:, 0])
            amps = vecs[:, cluster].T @ drive
            omega = float(vals[cluster[0]] - vals[0])
            return float(np.linalg.norm(amps)), omega, len(cluster)
        # exact per-block form: each block couples only to its own excited
        # direction, with strength |f'g - g'f| sqrt(N-1) / (N * omega_block)
        dims = np.array(self.splitting.block_dims, dtype=float)
        gaps = np.array([subsystem_gap(d, f, g) for d in dims])
        omega = float(gaps.min())
        tol = _CLUSTER_TOL * max(1.0, omega)
        at_min = gaps - omega <= tol
        elements = (
            abs(df * g - dg * f) * np.sqrt(dims[at_min] - 1.0) / (dims[at_min] * gaps[at_min])
        )
        return float(np.sqrt(np.sum(elements**2))), omega, int(at_min.sum())


def adiabaticity_lhs(splitting: Splitting, schedule: Schedule, s: float, ds_dt: float) -> float:
    """Drive matrix element times |ds/dt| over the squared gap at s.

    Computed from instantaneous eigenvectors; when the first excited level
    is degenerate the element is the root-sum-square over the degenerate
    states (a warning points callers at the summed condition, whose square
    root this value already is). Gaps and element magnitudes do not depend
    on the marked state.
    """
    f = float(schedule.f(s))
    g = float(schedule.g(s))
    if f == 0.0 and g == 0.0:
        raise ValueError(f"schedule vanishes at s={s}; the operator is zero there")
    if ds_dt == 0.0:
        return 0.0
    probe = _SpectralProbe(splitting, MarkedState.zeros(splitting.n))
    element, omega, cluster_size = probe.transition_element(
        f, g, float(schedule.df(s)), float(schedule.dg(s))
    )
    if cluster_size > 1:
        warnings.warn(
            f"first excited level is {cluster_size}-fold degenerate at s={s}; "
            "use degenerate_adiabaticity_lhs for the summed condition",
            DegenerateLevelWarning,
            stacklevel=2,
        )
    return element * abs(ds_dt) / omega**2


def degenerate_adiabaticity_lhs(n: int, schedule: Schedule, s: float, ds_dt: float) -> float:
    """Summed squared condition for the fully split search.

    All n first-excited states couple with the same per-qubit element, so
    the left side is n * (element * ds/dt)**2 / omega**4 with
    omega**2 = f**2 + g**2; a schedule saturating this at epsilon**2 runs
    for total time sqrt(n)/epsilon.
    """
    f = float(schedule.f(s))
    g = float(schedule.g(s))
    element = max_structured_matrix_element(f, g, float(schedule.df(s)), float(schedule.dg(s)))
    omega_sq = f * f + g * g
    return n * (element * ds_dt) ** 2 / omega_sq**2


def instantaneous_ground_overlap(
    state: np.ndarray,
    splitting: Splitting,
    marked: MarkedState,
    schedule: Schedule,
    s: float,
) -> float:
    """Squared overlap of ``state`` with the instantaneous ground state."""
    probe = _SpectralProbe(splitting, marked)
    _, ground, gap = probe.ground_vector(float(schedule.f(s)), float(schedule.g(s)))
    if gap < 1e-12:
        raise RuntimeError(f"ground state is near-degenerate at s={s} (gap {gap:.3e})")
    return float(abs(np.vdot(ground, state)) ** 2)


@dataclass(frozen=True)
class EvolutionReport:
    """Outcome of one schedule-driven evolution with checkpoint diagnostics."""

    n: int
    parts: tuple[int, ...]
    marked: str
    epsilon: float
    total_time: float
    success_probability: float
    guarantee_threshold: float
    guarantee_met: bool
    max_adiabaticity_lhs: float
    norm_drift: float
    checkpoint_t: np.ndarray
    checkpoint_s: np.ndarray
    checkpoint_overlap: np.ndarray
    checkpoint_lhs: np.ndarray
    checkpoint_norm: np.ndarray

    def to_json_dict(self) -> dict:
        return {
            "n": self.n,
            "parts": list(self.parts),
            "marked": self.marked,
            "epsilon": self.epsilon,
            "total_time": self.total_time,
            "success_probability": self.success_probability,
            "guarantee_threshold": self.guarantee_threshold,
            "guarantee_met": self.guarantee_met,
            "max_adiabaticity_lhs": self.max_adiabaticity_lhs,
            "norm_drift": self.norm_drift,
            "checkpoints": {
                "t": [float(x) for x in self.checkpoint_t],
                "s": [float(x) for x in self.checkpoint_s],
                "ground_overlap": [float(x) for x in self.checkpoint_overlap],
                "adiabaticity_lhs": [float(x) for x in self.checkpoint_lhs],
                "norm": [float(x) for x in self.checkpoint_norm],
            },
        }

    def checkpoints_to_csv(self) -> str:
        lines = ["t,s,overlap,lhs,norm"]
        for k in range(self.checkpoint_t.size):
            lines.append(
                f"{self.checkpoint_t[k]:.17g},{self.checkpoint_s[k]:.17g},"
                f"{self.checkpoint_overlap[k]:.17g},{self.checkpoint_lhs[k]:.17g},"
                f"{self.checkpoint_norm[k]:.17g}"
            )
        return "\n".join(lines) + "\n"


def evolve(
    splitting: Splitting,
    marked: MarkedState,
    schedule_t: TimeSchedule,
    precision: Precision | None = None,
) -> EvolutionReport:
    """Integrate from the uniform superposition to the end of the schedule.

    The step size is 1 / (ode_steps_per_unit_time * max operator norm),
    trimmed so checkpoints are hit exactly; runs are deterministic for a
    fixed precision. A zero-duration schedule is an instant quench: the
    success probability is just the uniform weight on the marked state.
    """
    precision = precision if precision is not None else Precision()
    if splitting.n > DENSE_CAP:
        raise ValueError(f"n={splitting.n} exceeds the evolution cap of {DENSE_CAP} qubits")
    if marked.n != splitting.n:
        raise ValueError(f"marked state has {marked.n} bits, splitting expects {splitting.n}")
    dim = splitting.dim
    psi = np.full(dim, 1.0 / math.sqrt(dim), dtype=complex)
    threshold = 1.0 - precision.epsilon**2 - GUARANTEE_SLACK

    if schedule_t.total_time == 0.0:
        p = float(abs(psi[marked.index]) ** 2)
        return EvolutionReport(
            splitting.n,
            splitting.parts,
            marked.to_string(),
            precision.epsilon,
            0.0,
            p,
            threshold,
            p >= threshold,
            0.0,
            0.0,
            np.array([0.0]),
            np.array([1.0]),
            np.array([p]),
            np.array([0.0]),
            np.array([1.0]),
        )

    base = schedule_t.base
    total_time = schedule_t.total_time
    s_checks = np.linspace(0.0, 1.0, CHECKPOINT_COUNT)
    t_checks = np.asarray(schedule_t.t_of_s(s_checks), dtype=float)
    t_checks[0], t_checks[-1] = 0.0, total_time
    t_checks = np.maximum.accumulate(t_checks)

    f_checks = np.asarray(base.f(s_checks), dtype=float)
    g_checks = np.asarray(base.g(s_checks), dtype=float)
    norm_bound = float(np.max(np.abs(f_checks) + np.abs(g_checks)) * splitting.num_blocks)
    h_target = 1.0 / (precision.ode_steps_per_unit_time * norm_bound)

    applier = MatrixFreeHamiltonian(splitting, marked)
    probe = _SpectralProbe(splitting, marked)

    def apply_h(t, v):
        s = float(schedule_t.s_of_t(t))
        return applier.apply(float(base.f(s)), float(base.g(s)), v)

    overlaps = np.zeros(CHECKPOINT_COUNT)
    lhs_vals = np.zeros(CHECKPOINT_COUNT)
    norms = np.zeros(CHECKPOINT_COUNT)
    drift = 0.0
    for k in range(CHECKPOINT_COUNT):
        if k > 0 and t_checks[k] > t_checks[k - 1]:
            dt = t_checks[k] - t_checks[k - 1]
            nsteps = max(1, int(math.ceil(dt / h_target)))
            psi = rk4_propagate(apply_h, psi, t_checks[k - 1], t_checks[k], nsteps)
        norm = float(np.linalg.norm(psi))
        norms[k] = norm
        drift = max(drift, abs(norm - 1.0))
        if abs(norm - 1.0) > NORM_DRIFT_LIMIT:
            raise NormDriftError(
                f"norm drifted by {abs(norm - 1.0):.3e} at s={s_checks[k]:.3f}; raise "
                f"ode_steps_per_unit_time (currently {precision.ode_steps_per_unit_time})"
            )
        f, g = float(f_checks[k]), float(g_checks[k])
        df, dg = float(base.df(s_checks[k])), float(base.dg(s_checks[k]))
        _, ground, _ = probe.ground_vector(f, g)
        overlaps[k] = abs(np.vdot(ground, psi)) ** 2
        element, omega, _ = probe.transition_element(f, g, df, dg)
        rate = float(schedule_t.rate(s_checks[k]))
        lhs_vals[k] = element * abs(rate) / omega**2

    p = float(abs(psi[marked.index]) ** 2)
    return EvolutionReport(
        splitting.n,
        splitting.parts,
        marked.to_string(),
        precision.epsilon,
        total_time,
        p,
        threshold,
        p >= threshold,
        float(lhs_vals.max()),
        drift,
        t_checks,
        s_checks,
        overlaps,
        lhs_vals,
        norms,
    )
