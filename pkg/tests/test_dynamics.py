import math
import warnings

import numpy as np
import pytest
from scipy.integrate import quad
from scipy.linalg import expm

from adiasearch.core import MarkedState, Precision, linear_schedule, make_splitting
from adiasearch.dynamics import (
    DegenerateLevelWarning,
    NormDriftError,
    adiabaticity_lhs,
    degenerate_adiabaticity_lhs,
    evolve,
    instantaneous_ground_overlap,
    rk4_propagate,
)
from adiasearch.runtime import TimeSchedule, max_structured_time, optimal_schedule


def _optimal_report(n, parts, eps, marked=None, steps=None):
    splitting = make_splitting(n, parts)
    marked = marked if marked is not None else MarkedState.zeros(n)
    kwargs = {"epsilon": eps}
    if steps is not None:
        kwargs["ode_steps_per_unit_time"] = steps
    precision = Precision(**kwargs)
    schedule_t = optimal_schedule(splitting, precision)
    return evolve(splitting, marked, schedule_t, precision)


def test_rk4_order_against_matrix_exponential():
    rng = np.random.default_rng(0)
    raw = rng.standard_normal((8, 8))
    frozen = (raw + raw.T) / 2.0
    psi0 = rng.standard_normal(8) + 1j * rng.standard_normal(8)
    psi0 /= np.linalg.norm(psi0)
    duration = 3.0
    exact = expm(-1j * frozen * duration) @ psi0

    errors = []
    for nsteps in (30, 60, 120, 240):
        psi = rk4_propagate(lambda t, v: frozen @ v, psi0, 0.0, duration, nsteps)
        errors.append(np.linalg.norm(psi - exact))
    orders = [math.log2(errors[i] / errors[i + 1]) for i in range(3)]
    for order in orders:
        assert abs(order - 4.0) <= 0.3


def test_rk4_validates_steps():
    with pytest.raises(ValueError):
        rk4_propagate(lambda t, v: v, np.ones(2, dtype=complex), 0.0, 1.0, 0)


def test_quench_probability_is_uniform_weight():
    for n, parts in [(2, [2]), (3, [1, 2])]:
        splitting = make_splitting(n, parts)
        report = evolve(splitting, MarkedState.zeros(n), TimeSchedule.quench(), Precision(epsilon=0.5))
        assert report.success_probability == pytest.approx(2.0**-n, abs=1e-12)
        assert not report.guarantee_met
        assert report.total_time == 0.0


def test_norm_conservation_at_default_resolution():
    report = _optimal_report(2, [2], 0.2)
    assert report.norm_drift / report.total_time < 1e-9


def test_frozen_success_probabilities():
    # converged integrator values (stable to 1e-10 across 64 vs 256 steps)
    frozen = {
        (2, (2,), 0.1): 0.9747890507,
        (3, (1, 1, 1), 0.1): 0.9887707162,
        (3, (3,), 0.1): 0.9994822801,
        (1, (1,), 0.1): 0.9777901328,
        (1, (1,), 0.2): 0.8990109626,
    }
    for (n, parts, eps), expected in frozen.items():
        report = _optimal_report(n, list(parts), eps)
        assert report.success_probability == pytest.approx(expected, abs=1e-6)


def test_success_examples_that_meet_the_estimate():
    report = _optimal_report(3, [1, 1, 1], 0.1)
    assert report.success_probability >= 0.98
    assert report.guarantee_met
    # slower drive at the same structure comes even closer to certainty
    report = _optimal_report(3, [1, 1, 1], 0.05)
    assert report.success_probability >= 0.99


def test_marked_state_independence():
    rng = np.random.default_rng(8)
    splitting = make_splitting(3, [1, 2])
    precision = Precision(epsilon=0.2)
    schedule_t = optimal_schedule(splitting, precision)
    baseline = evolve(splitting, MarkedState.zeros(3), schedule_t, precision)
    for _ in range(3):
        bits = MarkedState(tuple(int(b) for b in rng.integers(0, 2, 3)))
        report = evolve(splitting, bits, schedule_t, precision)
        assert report.success_probability == pytest.approx(
            baseline.success_probability, abs=1e-9
        )


def test_adiabaticity_zero_rate():
    assert adiabaticity_lhs(make_splitting(2, [2]), linear_schedule(), 0.3, 0.0) == 0.0


def test_adiabaticity_saturated_along_optimal_schedule():
    sched = linear_schedule()
    for n in (1, 2, 4):
        splitting = make_splitting(n, [n])
        precision = Precision(epsilon=0.2)
        schedule_t = optimal_schedule(splitting, precision)
        for s in np.linspace(0.0, 1.0, 11):
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", DegenerateLevelWarning)
                value = adiabaticity_lhs(splitting, sched, float(s), float(schedule_t.rate(s)))
            assert value == pytest.approx(precision.epsilon, rel=0.01)


def test_adiabaticity_linear_in_time_bound():
    # driving uniformly over T = N / eps keeps the diagnostic below eps
    sched = linear_schedule()
    eps = 0.1
    for n in (1, 2, 3):
        splitting = make_splitting(n, [n])
        dim = 2.0**n
        rate = eps / dim
        values = []
        for s in np.linspace(0.0, 1.0, 101):
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", DegenerateLevelWarning)
                values.append(adiabaticity_lhs(splitting, sched, float(s), rate))
        assert max(values) <= eps * (1.0 + 1e-9)
        assert max(values) == pytest.approx(eps * math.sqrt((dim - 1.0) / dim), rel=1e-6)


def test_degenerate_warning_for_maximal_split():
    with pytest.warns(DegenerateLevelWarning):
        adiabaticity_lhs(make_splitting(3, [1, 1, 1]), linear_schedule(), 0.5, 0.1)


def test_degenerate_condition_reduces_to_square_for_one_qubit():
    sched = linear_schedule()
    splitting = make_splitting(1, [1])
    for s, rate in [(0.2, 0.05), (0.5, 0.11), (0.8, 0.03)]:
        single = adiabaticity_lhs(splitting, sched, s, rate)
        summed = degenerate_adiabaticity_lhs(1, sched, s, rate)
        assert summed == pytest.approx(single**2, rel=1e-9)


def test_degenerate_condition_scales_linearly_with_qubits():
    sched = linear_schedule()
    one = degenerate_adiabaticity_lhs(1, sched, 0.4, 0.07)
    four = degenerate_adiabaticity_lhs(4, sched, 0.4, 0.07)
    assert four == pytest.approx(4.0 * one, rel=1e-12)


def test_degenerate_condition_saturates_at_eps_squared():
    eps = 0.1
    sched = linear_schedule()
    for n in (1, 5):
        schedule_t = optimal_schedule(make_splitting(n, [1] * n), Precision(epsilon=eps))
        for s in (0.0, 0.3, 0.5, 0.9, 1.0):
            value = degenerate_adiabaticity_lhs(n, sched, s, float(schedule_t.rate(s)))
            assert value == pytest.approx(eps**2, rel=1e-6)


def test_sqrt_n_time_from_saturating_the_summed_condition():
    # integrate the saturated path directly and compare with the closed form
    for n in (7, 13):
        integrand = lambda s: 0.5 * math.sqrt(n) * ((1.0 - s) ** 2 + s * s) ** -1.5
        eps_t, _ = quad(integrand, 0.0, 1.0, epsabs=0.0, epsrel=1e-10)
        assert eps_t == pytest.approx(math.sqrt(n), rel=1e-8)
        assert eps_t == pytest.approx(max_structured_time(n).eps_t, rel=1e-8)


def test_ground_overlap_boundaries():
    splitting = make_splitting(2, [2])
    marked = MarkedState.zeros(2)
    sched = linear_schedule()
    uniform = np.full(4, 0.5, dtype=complex)
    assert instantaneous_ground_overlap(uniform, splitting, marked, sched, 0.0) == pytest.approx(
        1.0, abs=1e-12
    )
    precision = Precision(epsilon=0.1)
    report = evolve(splitting, marked, optimal_schedule(splitting, precision), precision)
    assert report.checkpoint_overlap[-1] == pytest.approx(report.success_probability, abs=1e-9)
    assert report.checkpoint_overlap[0] == pytest.approx(1.0, abs=1e-9)


def test_ground_overlap_stays_high_along_slow_run():
    report = _optimal_report(3, [3], 0.1)
    assert report.checkpoint_overlap.min() >= 0.95


def test_norm_drift_error_guidance():
    # one step per unit time over a long run leaves visible norm drift
    splitting = make_splitting(2, [2])
    precision = Precision(epsilon=0.05, ode_steps_per_unit_time=1)
    schedule_t = optimal_schedule(splitting, precision)
    with pytest.raises(NormDriftError, match="ode_steps_per_unit_time"):
        evolve(splitting, MarkedState.zeros(2), schedule_t, precision)


def test_evolve_validates_inputs():
    with pytest.raises(ValueError):
        evolve(
            make_splitting(13, [13]),
            MarkedState.zeros(13),
            TimeSchedule.quench(),
            Precision(),
        )
    with pytest.raises(ValueError):
        evolve(
            make_splitting(2, [2]),
            MarkedState.zeros(3),
            TimeSchedule.quench(),
            Precision(),
        )


def test_evolve_report_serialization():
    report = _optimal_report(2, [1, 1], 0.2)
    payload = report.to_json_dict()
    assert payload["n"] == 2
    assert payload["parts"] == [1, 1]
    assert len(payload["checkpoints"]["t"]) == 101
    csv_text = report.checkpoints_to_csv()
    lines = csv_text.strip().split("\n")
    assert lines[0] == "t,s,overlap,lhs,norm"
    assert len(lines) == 102
