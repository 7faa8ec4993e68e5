import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from orliczode import exprlang
from orliczode.errors import ConfigError, HypothesisViolation
from orliczode.families import smooth_bump
from orliczode.ode1 import (
    FirstOrderProblem,
    differential_residual,
    estimate_mM,
    solve_first_order,
    wellposed_report_1,
)
from orliczode.orlicz import NFunction
from orliczode.realline import Decay, Grid, GridFunction, box

CLAMP = "y + 0.5*min(1, max(-1, y))"


@pytest.mark.parametrize(
    "q, m, M",
    [("2*y", 2.0, 2.0), (CLAMP, 1.0, 1.5), ("y + 0.2*tanh(y)", 1.0, 1.2)],
)
def test_estimate_mM(q, m, M):
    mh, Mh = estimate_mM(exprlang.parse(q))
    assert mh == pytest.approx(m, abs=2e-3)
    assert Mh == pytest.approx(M, abs=2e-3)


@pytest.mark.parametrize("q", ["y^3", "0*y", "y*abs(y)"])
def test_band_violations(q):
    with pytest.raises(HypothesisViolation):
        estimate_mM(exprlang.parse(q))


@pytest.mark.parametrize("q", ["y + 1", "x*y"])
def test_q_must_vanish_and_be_autonomous(q):
    with pytest.raises(ConfigError):
        estimate_mM(exprlang.parse(q))


def test_zero_data_gives_zero():
    g = Grid.uniform(10.0, 401)
    sol = solve_first_order(FirstOrderProblem.build("y", GridFunction.zeros(g)))
    assert np.all(sol.y.values == 0)


def test_linear_box_closed_form():
    g = Grid.uniform(20.0, 4001)
    sol = solve_first_order(FirstOrderProblem.build("y", box(g, 0.0, 1.0)))
    x = g.nodes
    # y(x) = -int_x^inf e^{x-t} 1_[0,1](t) dt
    exact = -np.where(x < 0, np.exp(x) * (1 - math.exp(-1)), np.where(x <= 1, 1 - np.exp(x - 1), 0.0))
    k = int(np.argmin(np.abs(x)))
    assert sol.y.values[k] == pytest.approx(-0.6321, abs=g.max_cell)
    assert np.max(np.abs(sol.y.values - exact)) <= g.max_cell
    assert sol.iterations == 2 and sol.increments[-1] == 0.0


def test_narrow_box_matches_kernel():
    g = Grid.uniform(10.0, 8001)
    w = 0.01
    sol = solve_first_order(FirstOrderProblem.build("2*y", box(g, -w / 2, w / 2, 1 / w)))
    x = g.nodes
    left = x < -w
    np.testing.assert_allclose(sol.y.values[left], -np.exp(2 * x[left]), rtol=2e-3)
    assert np.all(np.abs(sol.y.values[x > w]) < 1e-12)


def test_clamp_rate_below_bound():
    g = Grid.uniform(20.0, 4001)
    prob = FirstOrderProblem.build(CLAMP, smooth_bump(g, 0, 1, 3.0))
    sol = solve_first_order(prob)
    assert sol.contraction_bound == pytest.approx(0.2, abs=1e-3)
    assert sol.contraction_rate <= sol.contraction_bound + 0.05
    assert sol.fixed_point_residual <= 1e-10


def test_residual_second_order():
    res = []
    for n in (2001, 4001, 8001):
        g = Grid.uniform(20.0, n)
        sol = solve_first_order(FirstOrderProblem.build(CLAMP, smooth_bump(g, 0, 1, 3.0)))
        res.append(sol.residual_inf)
    assert res[0] / res[1] > 3.5 and res[1] / res[2] > 3.5


@settings(max_examples=15, deadline=None)
@given(a=st.floats(-2.0, 2.0), c=st.floats(0.5, 1.5), s=st.floats(0.05, 1.0))
def test_monotone_in_data(a, c, s):
    # g1 <= g2 pointwise gives Q[g1] >= Q[g2] for increasing q
    g = Grid.uniform(15.0, 1201)
    g1 = smooth_bump(g, a, c, 1.0)
    g2 = g1 + smooth_bump(g, a, c, s)
    y1 = solve_first_order(FirstOrderProblem.build(CLAMP, g1)).y.values
    y2 = solve_first_order(FirstOrderProblem.build(CLAMP, g2)).y.values
    assert np.all(y1 >= y2 - 1e-10)


def test_decreasing_q_uses_left_kernel():
    g = Grid.uniform(20.0, 4001)
    prob = FirstOrderProblem.build("-y", box(g, 0.0, 1.0))
    assert prob.orientation == -1.0
    sol = solve_first_order(prob)
    x = g.nodes
    # y' + y = 1_[0,1]: y = int_{-inf}^x e^{t-x} 1_[0,1](t) dt
    exact = np.where(x < 0, 0.0, np.where(x <= 1, 1 - np.exp(-x), (math.e - 1) * np.exp(-x)))
    assert np.max(np.abs(sol.y.values - exact)) <= g.max_cell


def test_problem_validation():
    g = Grid.uniform(5.0, 101)
    with pytest.raises(HypothesisViolation):
        FirstOrderProblem(exprlang.parse("y"), GridFunction.zeros(g), 2.0, 1.0)


def test_differential_residual_of_exact_solution():
    g = Grid.uniform(10.0, 2001)
    # y = e^{-x^2} with g = y' - y
    x = g.nodes
    y = GridFunction(g, np.exp(-x * x))
    data = GridFunction(g, -2 * x * np.exp(-x * x) - np.exp(-x * x))
    assert differential_residual(y, exprlang.parse("y"), data) < 1e-4


def test_wellposed_report_empty_and_zero():
    g = Grid.uniform(5.0, 201)
    rep = wellposed_report_1("y", [GridFunction.zeros(g)], NFunction.power(2))
    assert rep["ratios"] == [] and rep["C_empirical"] == 0.0


def _batch(g):
    return [
        smooth_bump(g, 0, 1, 1.0),
        smooth_bump(g, 2, 0.5, -2.0),
        GridFunction.from_callable(g, lambda t: np.exp(-np.abs(t)), Decay.exponential(1.0)),
        box(g, -1.0, 2.0),
        GridFunction.from_callable(g, lambda t: 1.0 / (1 + t * t), Decay.power(2.0)),
    ]


def test_wellposed_report_stable():
    reps = [wellposed_report_1("y", _batch(Grid.uniform(30.0, n)), NFunction.power(2)) for n in (3001, 6001)]
    c0, c1 = reps[0]["C_empirical"], reps[1]["C_empirical"]
    assert 0 < c0 < math.inf
    assert abs(c1 / c0 - 1) <= 0.1
    # |Q[g]|_p <= |g|_p / m for q = y (Young with the kernel e^{-t}), up to O(h^2)
    for p, r in reps[1]["lp_ratios"].items():
        assert r <= 1.0 + 1e-4
        assert r == pytest.approx(reps[0]["lp_ratios"][p], rel=0.01)
