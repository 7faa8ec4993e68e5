import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from orliczode.errors import ConfigError
from orliczode.realline import (
    Decay,
    Grid,
    GridFunction,
    OneSidedExponential,
    QuadratureConfig,
    TwoSidedExponential,
    box,
    convolve,
    differentiate,
    exp_sweep,
    integrate,
    integrate_with_tail,
    load_csv,
    lp_norm,
    save_csv,
    tail_measure,
)


def exp_abs(grid):
    return GridFunction.from_callable(grid, lambda t: np.exp(-np.abs(t)), Decay.exponential(1.0))


def test_grid_validation():
    with pytest.raises(ConfigError):
        Grid(np.array([0.0, 1.0]), 1.0)
    with pytest.raises(ConfigError):
        Grid(np.array([-1.0, 0.5, 0.0, 1.0]), 1.0)
    with pytest.raises(ConfigError):
        Grid(np.linspace(-1, 1, 11), -1.0)
    with pytest.raises(ConfigError):
        Grid(np.linspace(-5, 1, 11), 5.0)


def test_refined_grid_keeps_nodes():
    g = Grid.uniform(3.0, 13)
    r = g.refined()
    assert r.n == 25
    np.testing.assert_array_equal(r.nodes[::2], g.nodes)


def test_nonfinite_values_name_the_node():
    g = Grid.uniform(1.0, 5)
    with pytest.raises(ConfigError, match="node 2"):
        GridFunction(g, [0, 0, np.nan, 0, 0])


def test_values_are_read_only():
    f = GridFunction.zeros(Grid.uniform(1.0, 5))
    with pytest.raises(ValueError):
        f.values[0] = 1.0


@pytest.mark.parametrize("rule", ["composite-simpson", "trapezoid"])
def test_integrate_zero(rule):
    g = Grid.uniform(10.0, 101)
    assert integrate(GridFunction.zeros(g), QuadratureConfig(rule)) == 0.0


def test_integrate_unit_box():
    g = Grid.uniform(10.0, 2001)
    assert integrate(box(g, 0.0, 1.0)) == pytest.approx(1.0, abs=g.max_cell)
    assert integrate(box(g, 0.0, 1.0), QuadratureConfig("trapezoid")) == pytest.approx(1.0, abs=1e-12)


def test_integrate_exp_abs():
    g = Grid.uniform(40.0, 8001)
    val, tail = integrate_with_tail(exp_abs(g))
    # exact window integral 2(1 - e^-40)
    assert val == pytest.approx(2.0 * (1 - math.exp(-40.0)), abs=1e-8)
    assert tail == pytest.approx(2.0 * math.exp(-40.0), rel=1e-6)


def test_unknown_rule_rejected():
    with pytest.raises(ConfigError):
        QuadratureConfig("gauss")


@pytest.mark.parametrize(
    "p, expected",
    [(1.0, 2.0), (2.0, 1.0), (math.inf, 1.0)],
)
def test_lp_exp_abs(p, expected):
    g = Grid.uniform(40.0, 8001)
    assert lp_norm(exp_abs(g), p) == pytest.approx(expected, rel=1e-8)


def test_lp_box():
    g = Grid.uniform(10.0, 4001)
    assert lp_norm(box(g, 0.0, 4.0), 2.0) == pytest.approx(2.0, abs=1e-3)


def test_lp_rejects_small_p():
    with pytest.raises(ConfigError):
        lp_norm(GridFunction.zeros(Grid.uniform(1.0, 5)), 0.5)


def test_lp_large_p_does_not_underflow():
    g = Grid.uniform(10.0, 2001)
    f = GridFunction.from_callable(g, lambda t: 1e-200 * np.exp(-t * t))
    val = lp_norm(f, 50.0)
    assert 0 < val < 1e-199


@settings(max_examples=40, deadline=None)
@given(
    c=st.floats(0.01, 100.0),
    p=st.sampled_from([1.0, 1.5, 2.0, 3.0, 7.0]),
)
def test_lp_homogeneous(c, p):
    g = Grid.uniform(5.0, 401)
    f = GridFunction.from_callable(g, lambda t: np.exp(-t * t) * (1 + 0.3 * np.sin(3 * t)))
    assert lp_norm(f * c, p) == pytest.approx(c * lp_norm(f, p), rel=1e-12)


@settings(max_examples=30, deadline=None)
@given(st.lists(st.floats(-5, 5), min_size=21, max_size=21), st.lists(st.floats(-5, 5), min_size=21, max_size=21))
def test_triangle_inequality(a, b):
    g = Grid.uniform(2.0, 21)
    f1, f2 = GridFunction(g, a), GridFunction(g, b)
    for p in (1.0, 2.0, 4.0, math.inf):
        assert lp_norm(f1 + f2, p, QuadratureConfig("trapezoid")) <= (
            lp_norm(f1, p, QuadratureConfig("trapezoid")) + lp_norm(f2, p, QuadratureConfig("trapezoid"))
        ) * (1 + 1e-12) + 1e-12


def test_tail_measure_examples():
    g = Grid.uniform(40.0, 8001)
    assert tail_measure(exp_abs(g), math.exp(-1.0)) == pytest.approx(2.0, abs=g.max_cell)
    assert tail_measure(exp_abs(g), 2.0) == 0.0
    assert tail_measure(box(g, 0.0, 1.0), 0.5) == pytest.approx(1.0, abs=g.max_cell)


def test_tail_measure_vectorised_and_monotone():
    g = Grid.uniform(10.0, 1001)
    f = GridFunction.from_callable(g, lambda t: np.exp(-t * t))
    w = np.geomspace(1e-6, 0.999, 200)
    T = tail_measure(f, w)
    assert T.shape == w.shape
    assert np.all(np.diff(T) <= 1e-12)
    # {e^{-x^2} > w} = (-sqrt(log 1/w), sqrt(log 1/w))
    np.testing.assert_allclose(T, 2 * np.sqrt(np.log(1 / w)), atol=3 * g.max_cell)


def test_tail_measure_rejects_nonpositive_level():
    with pytest.raises(ConfigError):
        tail_measure(GridFunction.zeros(Grid.uniform(1.0, 5)), 0.0)


def test_differentiate():
    g = Grid.uniform(5.0, 1001)
    const = GridFunction(g, np.full(g.n, 3.0))
    assert np.max(np.abs(differentiate(const, 1).values)) < 1e-12
    sq = GridFunction.from_callable(g, lambda t: t * t)
    np.testing.assert_allclose(differentiate(sq, 2).values, 2.0, atol=1e-8)
    s = GridFunction.from_callable(g, np.sin)
    d = differentiate(s, 1)
    k = int(np.argmin(np.abs(g.nodes)))
    assert d.values[k] == pytest.approx(1.0, abs=g.max_cell ** 2)


def test_differentiate_second_order_convergence():
    errs = []
    for n in (401, 801, 1601):
        g = Grid.uniform(4.0, n)
        f = GridFunction.from_callable(g, lambda t: np.exp(-t * t))
        d2 = differentiate(f, 2).values
        errs.append(np.max(np.abs(d2 - (4 * g.nodes ** 2 - 2) * np.exp(-g.nodes ** 2))))
    assert errs[0] / errs[1] > 3.5 and errs[1] / errs[2] > 3.5


def test_exp_sweep_constant_data():
    # int_{-inf}^{x} e^{-(x-t)} dt = 1 with the left tail supplied
    h = np.full(100, 0.1)
    out = exp_sweep(h, 0.1 * h / 0.1, np.ones(101), start=1.0)
    np.testing.assert_allclose(out, 1.0, rtol=1e-13)


def test_exp_sweep_small_rates_match_plain_integral():
    h = np.full(50, 0.02)
    r = np.linspace(0, 1, 51) ** 2
    out = exp_sweep(h, np.full(50, 1e-14), r)
    trap = np.concatenate([[0], np.cumsum(h * (r[:-1] + r[1:]) / 2)])
    np.testing.assert_allclose(out, trap, rtol=1e-10, atol=1e-15)


def test_convolve_zero():
    g = Grid.uniform(10.0, 201)
    out = convolve(GridFunction.zeros(g), TwoSidedExponential(0.5, 1.0))
    assert np.all(out.values == 0)


def test_convolve_narrow_box():
    g = Grid.uniform(20.0, 8001)
    w = 0.02
    f = box(g, -w / 2, w / 2, 1.0 / w)
    out = convolve(f, TwoSidedExponential(0.5, 1.0))
    # away from the box the result is the kernel times sinh(w/2)/(w/2)
    far = np.abs(g.nodes) > w
    np.testing.assert_allclose(out.values[far], 0.5 * np.exp(-np.abs(g.nodes[far])), rtol=1e-4)
    assert out.values[np.argmin(np.abs(g.nodes))] == pytest.approx(0.5, abs=w)


def test_convolve_constant_interior():
    g = Grid.uniform(30.0, 3001)
    one = GridFunction(g, np.ones(g.n), Decay.compact())
    out = convolve(one, TwoSidedExponential(0.5, 1.0))
    inner = np.abs(g.nodes) <= 10
    np.testing.assert_allclose(out.values[inner], 1.0, atol=1e-8)


def test_convolve_against_closed_form():
    g = Grid.uniform(40.0, 8001)
    out = convolve(exp_abs(g), TwoSidedExponential(0.5, 1.0))
    ax = np.abs(g.nodes)
    np.testing.assert_allclose(out.values, 0.5 * (1 + ax) * np.exp(-ax), atol=1e-5)


def test_one_sided_kernel():
    g = Grid.uniform(20.0, 4001)
    f = box(g, 0.0, 1.0)
    y = convolve(f, OneSidedExponential(1.0))
    k = int(np.argmin(np.abs(g.nodes)))
    assert y.values[k] == pytest.approx(1 - math.exp(-1.0), abs=g.max_cell)


def test_convolve_rejects_nonintegrable_kernel():
    g = Grid.uniform(1.0, 11)
    with pytest.raises(ConfigError):
        convolve(GridFunction.zeros(g), TwoSidedExponential(1.0, 0.0))


@pytest.mark.parametrize("decay", [Decay.compact(), Decay.exponential(2.5), Decay.power(1.5), Decay.unknown()])
def test_csv_round_trip(tmp_path, decay):
    g = Grid.uniform(3.0, 61)
    f = GridFunction.from_callable(g, lambda t: np.exp(-t * t) / 3.0, decay)
    path = tmp_path / "f.csv"
    save_csv(f, path)
    back = load_csv(path)
    np.testing.assert_array_equal(back.values, f.values)
    np.testing.assert_array_equal(back.x, f.x)
    assert back.decay == decay
    assert back.grid.truncation_radius == 3.0
    meta = json.loads(path.with_suffix(".json").read_text())
    assert meta["decay_class"]["kind"] == decay.kind


def test_csv_bad_header(tmp_path):
    p = tmp_path / "bad.csv"
    p.write_text("a,b\n0,1\n")
    with pytest.raises(ConfigError):
        load_csv(p)
