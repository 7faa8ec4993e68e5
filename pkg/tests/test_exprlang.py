import math
import random

import numpy as np
import pytest

from orliczode.exprlang import (
    ExprDomainError,
    ExprSyntaxError,
    evaluate,
    parse,
    to_source,
    variables_of,
)


@pytest.mark.parametrize(
    "src, x, y, expected",
    [
        ("x^2", 3.0, 0.0, 9.0),
        ("exp(-abs(x))", 0.0, 0.0, 1.0),
        ("min(1, max(0, y))", 0.0, 2.0, 1.0),
        ("x*y", 2.0, 3.0, 6.0),
        ("log(e)", 0.0, 0.0, 1.0),
        ("pow(x,1/2)", 4.0, 0.0, 2.0),
        ("2^3^2", 0.0, 0.0, 512.0),
        ("-2^2", 0.0, 0.0, -4.0),
        ("2^-1", 0.0, 0.0, 0.5),
        ("1-2-3", 0.0, 0.0, -4.0),
        ("8/4/2", 0.0, 0.0, 1.0),
        ("2*3+4*5", 0.0, 0.0, 26.0),
        ("--x", 1.5, 0.0, 1.5),
        ("sign(-x) + sqrt(9)", 2.0, 0.0, 2.0),
        ("1 + sin(x)^2", math.pi / 2, 0.0, 2.0),
        ("1.5e1 + .5", 0.0, 0.0, 15.5),
        ("pi", 0.0, 0.0, math.pi),
    ],
)
def test_examples(src, x, y, expected):
    assert evaluate(parse(src), x=x, y=y) == pytest.approx(expected, rel=1e-15)


@pytest.mark.parametrize(
    "src, offset",
    [("1 +", 3), ("(x", 2), ("x $ 2", 2), ("", 0), ("1 2", 2)],
)
def test_syntax_errors_carry_offset(src, offset):
    with pytest.raises(ExprSyntaxError) as err:
        parse(src)
    assert err.value.offset == offset


@pytest.mark.parametrize("src", ["foo(x)", "z + 1", "exp(1, 2)", "min(1)", "pi(2)"])
def test_unknown_names_and_arity(src):
    with pytest.raises(ExprSyntaxError):
        parse(src)


@pytest.mark.parametrize(
    "src, x",
    [("log(x)", 0.0), ("log(x)", -1.0), ("sqrt(x)", -0.5), ("x^(-1)", 0.0), ("x^0.5", -2.0), ("1/x", 0.0)],
)
def test_domain_errors(src, x):
    with pytest.raises(ExprDomainError) as err:
        evaluate(parse(src), x=x)
    assert err.value.node is not None


def test_vectorised_evaluation():
    e = parse("x^2 + y")
    x = np.linspace(-1, 1, 5)
    np.testing.assert_allclose(evaluate(e, x=x, y=1.0), x * x + 1.0)
    assert evaluate(parse("3"), x=x).shape == x.shape


def test_custom_variables():
    e = parse("u^2", variables=("u",))
    assert evaluate(e, u=3.0) == 9.0
    with pytest.raises(ExprSyntaxError):
        parse("x", variables=("u",))
    assert variables_of(parse("x + y*exp(x)")) == {"x", "y"}


# random expressions against an independent reference built on python's math


_UNARY = {
    "exp": "math.exp",
    "log": "math.log",
    "abs": "abs",
    "sqrt": "math.sqrt",
    "sign": "_sign",
    "sin": "math.sin",
    "cos": "math.cos",
    "tanh": "math.tanh",
}
_BINARY = {"min": "min", "max": "max", "pow": "math.pow"}


def _sign(v):
    return (v > 0) - (v < 0)


def _gen(rng, depth):
    """Return (our source, python source)."""
    if depth == 0 or rng.random() < 0.25:
        k = rng.random()
        if k < 0.35:
            v = rng.choice(["x", "y"])
            return v, v
        if k < 0.45:
            c = rng.choice(["pi", "e"])
            return c, f"math.{c}"
        v = repr(round(rng.uniform(-4, 4), 3)) if rng.random() < 0.6 else str(rng.randint(0, 5))
        return v, v
    k = rng.random()
    if k < 0.45:
        op = rng.choice("+-*/^")
        a, pa = _gen(rng, depth - 1)
        b, pb = _gen(rng, depth - 1)
        py = f"math.pow(({pa}), ({pb}))" if op == "^" else f"(({pa}) {op} ({pb}))"
        return f"({a}) {op} ({b})", py
    if k < 0.55:
        a, pa = _gen(rng, depth - 1)
        return f"-({a})", f"(-({pa}))"
    if k < 0.85:
        fn = rng.choice(sorted(_UNARY))
        a, pa = _gen(rng, depth - 1)
        return f"{fn}({a})", f"{_UNARY[fn]}({pa})"
    fn = rng.choice(sorted(_BINARY))
    a, pa = _gen(rng, depth - 1)
    b, pb = _gen(rng, depth - 1)
    return f"{fn}({a}, {b})", f"{_BINARY[fn]}(({pa}), ({pb}))"


def _reference(py, x, y):
    try:
        v = eval(py, {"math": math, "_sign": _sign, "abs": abs, "min": min, "max": max}, {"x": x, "y": y})
    except (ValueError, ZeroDivisionError):
        return "domain"
    except OverflowError:
        return "overflow"
    return float(v)


def test_fuzz_against_reference():
    rng = random.Random(20240611)
    compared = domain = 0
    for _ in range(1000):
        src, py = _gen(rng, 4)
        x, y = rng.uniform(-3, 3), rng.uniform(-3, 3)
        ref = _reference(py, x, y)
        e = parse(src)
        if ref == "overflow":
            continue
        if ref == "domain":
            with pytest.raises(ExprDomainError):
                evaluate(e, x=x, y=y)
            domain += 1
            continue
        with np.errstate(all="ignore"):
            got = evaluate(e, x=x, y=y)
        if not math.isfinite(ref):
            continue
        assert got == pytest.approx(ref, rel=1e-9, abs=1e-12), src
        compared += 1
    assert compared > 500 and domain > 20


def test_print_parse_idempotent():
    rng = random.Random(7)
    for _ in range(1000):
        src, _ = _gen(rng, 5)
        once = to_source(parse(src))
        assert to_source(parse(once)) == once
        assert parse(once) == parse(src)


@pytest.mark.parametrize("n", [1, 2, 3])
def test_flat_precedence_matches_python(n):
    # unparenthesised chains with unary minus and ^ follow python's ** rules
    rng = random.Random(n)
    for _ in range(300):
        toks = [str(rng.randint(1, 4))]
        for _ in range(rng.randint(1, 5)):
            op = rng.choice(["+", "-", "*", "/", "^"])
            toks += [op, ("-" if rng.random() < 0.2 else "") + str(rng.randint(1, 3))]
        src = " ".join(toks)
        try:
            ref = float(eval(src.replace("^", "**")))
        except (ZeroDivisionError, OverflowError):
            continue
        assert evaluate(parse(src)) == pytest.approx(ref, rel=1e-12), src
