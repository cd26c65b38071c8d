"""Shared problem definitions for structured adiabatic search.

A search problem is described by a :class:`Splitting` (how the n qubits are
partitioned into independently searched blocks), a :class:`MarkedState` (the
unique satisfying assignment), an interpolation :class:`Schedule` (f, g), and
a :class:`Precision` bundle for the numerical routines. All types here are
immutable after construction and safe to share across threads.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.interpolate import PchipInterpolator

# Schedules must hit f(0)=1, g(0)=0, f(1)=0, g(1)=1 this tightly.
SCHEDULE_BOUNDARY_TOL = 1e-12


@dataclass(frozen=True)
class Splitting:
    """Contiguous partition of ``n`` qubits into blocks of sizes ``parts``.

    Qubit 1 is the most significant bit of a basis-state index. Block 1
    covers qubits 1..parts[0], block 2 the next run, and so on. A single
    block of size n is the unstructured search; n blocks of size 1 the
    maximally structured one.
    """

    n: int
    parts: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "parts", tuple(int(p) for p in self.parts))
        if self.n < 1:
            raise ValueError(f"qubit count must be >= 1, got {self.n}")
        if not self.parts:
            raise ValueError("parts must be a non-empty list of block sizes")
        if any(p < 1 for p in self.parts):
            raise ValueError(f"every block size must be >= 1, got {self.parts}")
        if sum(self.parts) != self.n:
            raise ValueError(
                f"block sizes {list(self.parts)} sum to {sum(self.parts)}, expected n={self.n}"
            )

    @property
    def num_blocks(self) -> int:
        return len(self.parts)

    @property
    def dim(self) -> int:
        """Total Hilbert-space dimension 2**n."""
        return 1 << self.n

    @property
    def block_dims(self) -> tuple[int, ...]:
        """Per-block dimensions 2**n_i."""
        return tuple(1 << p for p in self.parts)

    def block_fields(self) -> list[tuple[int, int]]:
        """(shift, mask) pairs that extract each block's bits from an index."""
        fields = []
        shift = self.n
        for p in self.parts:
            shift -= p
            fields.append((shift, (1 << p) - 1))
        return fields

    def is_maximal(self) -> bool:
        """True when every block is a single qubit."""
        return all(p == 1 for p in self.parts)


def make_splitting(n: int, parts) -> Splitting:
    """Validated splitting of ``n`` qubits into the given block sizes."""
    return Splitting(n, tuple(parts))


def equal_splitting(n: int, num_blocks: int) -> Splitting:
    """Splitting of ``n`` qubits into ``num_blocks`` blocks of equal size."""
    if num_blocks < 1:
        raise ValueError(f"number of blocks must be >= 1, got {num_blocks}")
    if n % num_blocks != 0:
        raise ValueError(f"{num_blocks} does not divide n={n}")
    return Splitting(n, (n // num_blocks,) * num_blocks)


@dataclass(frozen=True)
class MarkedState:
    """Target bit assignment z_1 ... z_n, qubit 1 first."""

    bits: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "bits", tuple(int(b) for b in self.bits))
        if not self.bits:
            raise ValueError("marked state needs at least one bit")
        if any(b not in (0, 1) for b in self.bits):
            raise ValueError(f"marked bits must be 0 or 1, got {self.bits}")

    @classmethod
    def from_string(cls, text: str) -> "MarkedState":
        if not text or set(text) - {"0", "1"}:
            raise ValueError(f"marked state must be a non-empty bitstring, got {text!r}")
        return cls(tuple(int(c) for c in text))

    @classmethod
    def zeros(cls, n: int) -> "MarkedState":
        return cls((0,) * n)

    @property
    def n(self) -> int:
        return len(self.bits)

    @property
    def index(self) -> int:
        """Basis-state index with qubit 1 as the most significant bit."""
        value = 0
        for b in self.bits:
            value = (value << 1) | b
        return value

    def block_values(self, splitting: Splitting) -> tuple[int, ...]:
        """Restriction of the assignment to each block, as block-local indices."""
        if len(self.bits) != splitting.n:
            raise ValueError(
                f"marked state has {len(self.bits)} bits, splitting expects {splitting.n}"
            )
        idx = self.index
        return tuple((idx >> shift) & mask for shift, mask in splitting.block_fields())

    def to_string(self) -> str:
        return "".join(str(b) for b in self.bits)


class Schedule:
    """Interpolation pair (f, g) on s in [0, 1] with derivatives.

    f weighs the mixing Hamiltonian, g the problem Hamiltonian. Every
    schedule satisfies f(0)=1, g(0)=0, f(1)=0, g(1)=1 and both functions
    are monotone.
    """

    kind = "base"

    def f(self, s):
        raise NotImplementedError

    def g(self, s):
        raise NotImplementedError

    def df(self, s):
        raise NotImplementedError

    def dg(self, s):
        raise NotImplementedError


class LinearSchedule(Schedule):
    """f(s) = 1 - s, g(s) = s."""

    kind = "linear"

    def f(self, s):
        return 1.0 - s

    def g(self, s):
        return s + 0.0

    def df(self, s):
        return -1.0 + 0.0 * s

    def dg(self, s):
        return 1.0 + 0.0 * s


class TabulatedSchedule(Schedule):
    """Monotone piecewise-cubic schedule through samples (s_k, f_k, g_k).

    Interpolation is shape preserving, so the samples' monotonicity carries
    over to the interpolant and its derivative exists everywhere.
    """

    kind = "tabulated"

    def __init__(self, s_nodes, f_nodes, g_nodes):
        s_nodes = np.asarray(s_nodes, dtype=float)
        f_nodes = np.asarray(f_nodes, dtype=float)
        g_nodes = np.asarray(g_nodes, dtype=float)
        if s_nodes.ndim != 1 or s_nodes.size < 2:
            raise ValueError("need at least two schedule samples")
        if f_nodes.shape != s_nodes.shape or g_nodes.shape != s_nodes.shape:
            raise ValueError("s, f, g sample arrays must have equal length")
        if np.any(np.diff(s_nodes) <= 0):
            raise ValueError("schedule samples must have strictly increasing s")
        if abs(s_nodes[0]) > SCHEDULE_BOUNDARY_TOL or abs(s_nodes[-1] - 1.0) > SCHEDULE_BOUNDARY_TOL:
            raise ValueError("schedule samples must span s = 0 to s = 1")
        for name, vals, v0, v1 in (("f", f_nodes, 1.0, 0.0), ("g", g_nodes, 0.0, 1.0)):
            if abs(vals[0] - v0) > SCHEDULE_BOUNDARY_TOL or abs(vals[-1] - v1) > SCHEDULE_BOUNDARY_TOL:
                raise ValueError(f"{name} must run from {v0} to {v1}")
        if np.any(np.diff(f_nodes) > SCHEDULE_BOUNDARY_TOL):
            raise ValueError("f samples must be non-increasing")
        if np.any(np.diff(g_nodes) < -SCHEDULE_BOUNDARY_TOL):
            raise ValueError("g samples must be non-decreasing")
        self._f = PchipInterpolator(s_nodes, f_nodes)
        self._g = PchipInterpolator(s_nodes, g_nodes)
        self._df = self._f.derivative()
        self._dg = self._g.derivative()
        self.s_nodes = s_nodes
        self.f_nodes = f_nodes
        self.g_nodes = g_nodes

    def f(self, s):
        return self._f(s)

    def g(self, s):
        return self._g(s)

    def df(self, s):
        return self._df(s)

    def dg(self, s):
        return self._dg(s)


def linear_schedule() -> LinearSchedule:
    """The straight-line interpolation f = 1 - s, g = s."""
    return LinearSchedule()


def tabulated_schedule(s_nodes, f_nodes, g_nodes) -> TabulatedSchedule:
    """Monotone interpolated schedule through the given samples."""
    return TabulatedSchedule(s_nodes, f_nodes, g_nodes)


@dataclass(frozen=True)
class Precision:
    """Accuracy settings shared by the quadrature and evolution routines.

    epsilon is the adiabaticity parameter; quad_tol the relative tolerance
    for time integrals; ode_steps_per_unit_time the fixed-step resolution of
    the state integrator (per unit of time times operator norm).
    """

    epsilon: float = 0.2
    quad_tol: float = 1e-9
    ode_steps_per_unit_time: int = 64

    def __post_init__(self):
        if not 0.0 < self.epsilon < 1.0:
            raise ValueError(f"epsilon must be in (0, 1), got {self.epsilon}")
        if self.quad_tol <= 0.0:
            raise ValueError(f"quad_tol must be positive, got {self.quad_tol}")
        if self.ode_steps_per_unit_time < 1:
            raise ValueError(
                f"ode_steps_per_unit_time must be >= 1, got {self.ode_steps_per_unit_time}"
            )


_DESCRIPTOR_KEYS = {"n", "parts", "marked", "schedule"}


def problem_to_dict(splitting: Splitting, marked: MarkedState, schedule: Schedule) -> dict:
    """JSON-ready problem descriptor, e.g. {"n": 6, "parts": [3, 3], ...}."""
    if isinstance(schedule, LinearSchedule):
        sched = "linear"
    elif isinstance(schedule, TabulatedSchedule):
        sched = {
            "s": [float(x) for x in schedule.s_nodes],
            "f": [float(x) for x in schedule.f_nodes],
            "g": [float(x) for x in schedule.g_nodes],
        }
    else:
        raise ValueError(f"cannot serialize schedule of kind {schedule.kind!r}")
    return {
        "n": splitting.n,
        "parts": list(splitting.parts),
        "marked": marked.to_string(),
        "schedule": sched,
    }


def problem_from_dict(data: dict) -> tuple[Splitting, MarkedState, Schedule]:
    """Parse a problem descriptor produced by :func:`problem_to_dict`."""
    unknown = set(data) - _DESCRIPTOR_KEYS
    if unknown:
        raise ValueError(f"unknown descriptor keys: {sorted(unknown)}")
    missing = _DESCRIPTOR_KEYS - set(data)
    if missing:
        raise ValueError(f"missing descriptor keys: {sorted(missing)}")
    splitting = make_splitting(int(data["n"]), data["parts"])
    marked = MarkedState.from_string(data["marked"])
    if marked.n != splitting.n:
        raise ValueError("marked state length does not match n")
    sched = data["schedule"]
    if sched == "linear":
        schedule: Schedule = linear_schedule()
    elif isinstance(sched, dict):
        extra = set(sched) - {"s", "f", "g"}
        if extra:
            raise ValueError(f"unknown schedule keys: {sorted(extra)}")
        schedule = tabulated_schedule(sched["s"], sched["f"], sched["g"])
    else:
        raise ValueError(f"unsupported schedule descriptor: {sched!r}")
    return splitting, marked, schedule
