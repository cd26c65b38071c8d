import numpy as np
import pytest

from adiasearch.core import (
    MarkedState,
    Precision,
    equal_splitting,
    linear_schedule,
    make_splitting,
    problem_from_dict,
    problem_to_dict,
    tabulated_schedule,
)


def test_make_splitting_examples():
    sp = make_splitting(6, [6])
    assert sp.num_blocks == 1
    assert sp.block_dims == (64,)
    assert sp.dim == 64

    sp = make_splitting(1, [1])
    assert sp.num_blocks == 1
    assert sp.block_dims == (2,)

    sp = make_splitting(6, [3, 2, 1])
    assert sp.num_blocks == 3
    assert sp.block_dims == (8, 4, 2)


def test_make_splitting_errors():
    with pytest.raises(ValueError):
        make_splitting(6, [3, 2])
    with pytest.raises(ValueError):
        make_splitting(6, [7, -1])
    with pytest.raises(ValueError):
        make_splitting(6, [])
    with pytest.raises(ValueError):
        make_splitting(0, [0])


def test_equal_splitting():
    assert equal_splitting(30, 5).parts == (6,) * 5
    assert equal_splitting(6, 6).parts == (1,) * 6
    with pytest.raises(ValueError):
        equal_splitting(6, 4)
    assert equal_splitting(6, 1) == make_splitting(6, [6])


def test_block_dims_product_is_total_dim():
    rng = np.random.default_rng(3)
    for _ in range(25):
        n = int(rng.integers(1, 12))
        parts = []
        left = n
        while left:
            p = int(rng.integers(1, left + 1))
            parts.append(p)
            left -= p
        sp = make_splitting(n, parts)
        assert np.prod([float(d) for d in sp.block_dims]) == 2.0**n


def test_marked_state_big_endian_index():
    marked = MarkedState.from_string("010110")
    assert marked.index == 0b010110 == 22
    assert marked.to_string() == "010110"
    assert marked.block_values(make_splitting(6, [3, 3])) == (0b010, 0b110)
    assert marked.block_values(make_splitting(6, [2, 2, 2])) == (0b01, 0b01, 0b10)
    assert MarkedState.zeros(4).index == 0


def test_marked_state_validation():
    with pytest.raises(ValueError):
        MarkedState.from_string("01a")
    with pytest.raises(ValueError):
        MarkedState.from_string("")
    with pytest.raises(ValueError):
        MarkedState((0, 2))
    with pytest.raises(ValueError):
        MarkedState.from_string("01").block_values(make_splitting(3, [3]))


def test_linear_schedule_values():
    sched = linear_schedule()
    assert (sched.f(0.0), sched.g(0.0)) == (1.0, 0.0)
    assert (sched.f(0.5), sched.g(0.5)) == (0.5, 0.5)
    for s in (0.0, 0.3, 1.0):
        assert sched.df(s) == -1.0
        assert sched.dg(s) == 1.0


def test_schedule_boundaries_every_kind():
    nodes = np.linspace(0.0, 1.0, 9)
    tab = tabulated_schedule(nodes, 1.0 - nodes**2, nodes**2)
    for sched in (linear_schedule(), tab):
        assert abs(float(sched.f(0.0)) - 1.0) <= 1e-12
        assert abs(float(sched.g(0.0))) <= 1e-12
        assert abs(float(sched.f(1.0))) <= 1e-12
        assert abs(float(sched.g(1.0)) - 1.0) <= 1e-12


def test_tabulated_schedule_derivative_matches_finite_difference():
    nodes = np.linspace(0.0, 1.0, 33)
    tab = tabulated_schedule(nodes, 1.0 - nodes**2, nodes**2)
    h = 1e-6
    for s in (0.21, 0.5, 0.83):
        fd_f = (tab.f(s + h) - tab.f(s - h)) / (2.0 * h)
        fd_g = (tab.g(s + h) - tab.g(s - h)) / (2.0 * h)
        assert float(tab.df(s)) == pytest.approx(fd_f, rel=1e-5, abs=1e-7)
        assert float(tab.dg(s)) == pytest.approx(fd_g, rel=1e-5, abs=1e-7)


def test_tabulated_schedule_rejects_bad_samples():
    nodes = np.linspace(0.0, 1.0, 5)
    with pytest.raises(ValueError):
        tabulated_schedule(nodes, [1.0, 0.5, 0.6, 0.2, 0.0], nodes)  # f not monotone
    with pytest.raises(ValueError):
        tabulated_schedule(nodes, 1.0 - nodes, [0.0, 0.3, 0.2, 0.6, 1.0])  # g not monotone
    with pytest.raises(ValueError):
        tabulated_schedule(nodes, 0.9 - 0.9 * nodes, nodes)  # f(0) != 1
    with pytest.raises(ValueError):
        tabulated_schedule([0.0, 0.5, 0.5, 0.7, 1.0], 1.0 - nodes, nodes)  # s not increasing


def test_precision_validation():
    prec = Precision()
    assert prec.epsilon == 0.2
    with pytest.raises(ValueError):
        Precision(epsilon=0.0)
    with pytest.raises(ValueError):
        Precision(epsilon=1.0)
    with pytest.raises(ValueError):
        Precision(quad_tol=0.0)
    with pytest.raises(ValueError):
        Precision(ode_steps_per_unit_time=0)


def test_problem_descriptor_roundtrip():
    splitting = make_splitting(6, [3, 3])
    marked = MarkedState.from_string("010110")
    data = problem_to_dict(splitting, marked, linear_schedule())
    assert data == {"n": 6, "parts": [3, 3], "marked": "010110", "schedule": "linear"}
    back_split, back_marked, back_sched = problem_from_dict(data)
    assert back_split == splitting
    assert back_marked == marked
    assert back_sched.kind == "linear"


def test_problem_descriptor_tabulated_roundtrip():
    nodes = np.linspace(0.0, 1.0, 9)
    tab = tabulated_schedule(nodes, 1.0 - nodes**2, nodes**2)
    data = problem_to_dict(make_splitting(2, [2]), MarkedState.zeros(2), tab)
    _, _, back = problem_from_dict(data)
    assert back.kind == "tabulated"
    assert float(back.f(0.5)) == pytest.approx(0.75, abs=1e-12)


def test_problem_descriptor_rejects_bad_input():
    good = {"n": 2, "parts": [2], "marked": "00", "schedule": "linear"}
    with pytest.raises(ValueError):
        problem_from_dict({**good, "extra": 1})
    with pytest.raises(ValueError):
        problem_from_dict({"n": 2, "parts": [2], "schedule": "linear"})
    with pytest.raises(ValueError):
        problem_from_dict({**good, "marked": "000"})
    with pytest.raises(ValueError):
        problem_from_dict({**good, "schedule": "cubic"})
