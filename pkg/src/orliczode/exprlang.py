"""Arithmetic expressions in ``x`` and ``y`` given as text.

Grammar, loosest binding first::

    expr  := term (('+' | '-') term)*
    term  := unary (('*' | '/') unary)*
    unary := '-' unary | power
    power := atom ('^' unary)?          # right associative
    atom  := number | name | name '(' expr (',' expr)* ')' | '(' expr ')'

Evaluation is vectorised over numpy arrays.  Operations that would leave
the reals raise :class:`ExprDomainError` instead of producing NaN.

>>> evaluate(parse("min(1, max(0, y))"), y=2.0)
1.0
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Iterable, Union

import numpy as np

from .errors import ConfigError

__all__ = [
    "Num",
    "Var",
    "Const",
    "Neg",
    "BinOp",
    "Call",
    "Expr",
    "ExprSyntaxError",
    "ExprDomainError",
    "parse",
    "evaluate",
    "to_source",
    "variables_of",
]


class ExprSyntaxError(ConfigError):
    def __init__(self, msg: str, offset: int):
        super().__init__(f"{msg} at offset {offset}")
        self.offset = offset


class ExprDomainError(ConfigError, ArithmeticError):
    def __init__(self, msg: str, node: "Expr"):
        super().__init__(f"{msg} in {to_source(node)}")
        self.node = node


@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Const:
    name: str


@dataclass(frozen=True)
class Neg:
    operand: "Expr"


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Call:
    fn: str
    args: tuple


Expr = Union[Num, Var, Const, Neg, BinOp, Call]

CONSTANTS = {"pi": math.pi, "e": math.e}
FUNCTIONS = {"exp": 1, "log": 1, "abs": 1, "sqrt": 1, "sign": 1, "sin": 1, "cos": 1, "tanh": 1, "min": 2, "max": 2, "pow": 2}

_TOKEN = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?)|(?P<name>[A-Za-z_]\w*)|(?P<op>[-+*/^(),]))"
)


def _tokenize(src: str):
    pos, out = 0, []
    while pos < len(src):
        if src[pos:].strip() == "":
            break
        m = _TOKEN.match(src, pos)
        if not m or m.end() == pos:
            off = pos + len(src[pos:]) - len(src[pos:].lstrip())
            raise ExprSyntaxError(f"unexpected character {src[off]!r}", off)
        kind = m.lastgroup
        start = m.start(kind)
        out.append((kind, m.group(kind), start))
        pos = m.end()
    out.append(("end", "", len(src)))
    return out


class _Parser:
    def __init__(self, src: str, variables: tuple):
        self.toks = _tokenize(src)
        self.i = 0
        self.variables = variables

    def peek(self):
        return self.toks[self.i]

    def take(self):
        tok = self.toks[self.i]
        self.i += 1
        return tok

    def expect(self, text):
        kind, val, off = self.take()
        if val != text or kind != "op":
            raise ExprSyntaxError(f"expected {text!r}, found {val or 'end of input'!r}", off)

    def expr(self):
        node = self.term()
        while self.peek()[1] in ("+", "-") and self.peek()[0] == "op":
            op = self.take()[1]
            node = BinOp(op, node, self.term())
        return node

    def term(self):
        node = self.unary()
        while self.peek()[1] in ("*", "/") and self.peek()[0] == "op":
            op = self.take()[1]
            node = BinOp(op, node, self.unary())
        return node

    def unary(self):
        if self.peek()[:2] == ("op", "-"):
            self.take()
            return Neg(self.unary())
        return self.power()

    def power(self):
        base = self.atom()
        if self.peek()[:2] == ("op", "^"):
            self.take()
            return BinOp("^", base, self.unary())
        return base

    def atom(self):
        kind, val, off = self.take()
        if kind == "num":
            v = float(val)
            if not math.isfinite(v):
                raise ExprSyntaxError(f"literal {val} overflows", off)
            return Num(v)
        if kind == "name":
            if self.peek()[:2] == ("op", "("):
                if val not in FUNCTIONS:
                    raise ExprSyntaxError(f"unknown function {val!r}", off)
                self.take()
                args = [self.expr()]
                while self.peek()[:2] == ("op", ","):
                    self.take()
                    args.append(self.expr())
                self.expect(")")
                if len(args) != FUNCTIONS[val]:
                    raise ExprSyntaxError(
                        f"{val} takes {FUNCTIONS[val]} argument(s), got {len(args)}", off
                    )
                return Call(val, tuple(args))
            if val in self.variables:
                return Var(val)
            if val in CONSTANTS:
                return Const(val)
            if val in FUNCTIONS:
                raise ExprSyntaxError(f"function {val!r} needs arguments", off)
            raise ExprSyntaxError(f"unknown identifier {val!r}", off)
        if (kind, val) == ("op", "("):
            node = self.expr()
            self.expect(")")
            return node
        raise ExprSyntaxError(f"unexpected {val or 'end of input'!r}", off)


def parse(src: str, variables: Iterable[str] = ("x", "y")) -> Expr:
    """Parse ``src`` into an expression tree over the given variable names."""
    if not isinstance(src, str) or not src.strip():
        raise ExprSyntaxError("empty expression", 0)
    p = _Parser(src, tuple(variables))
    node = p.expr()
    kind, val, off = p.peek()
    if kind != "end":
        raise ExprSyntaxError(f"unexpected {val!r}", off)
    return node


def _power(node, a, b):
    a, b = np.broadcast_arrays(np.asarray(a, float), np.asarray(b, float))
    if np.any((a == 0) & (b < 0)):
        raise ExprDomainError("zero to a negative power", node)
    if np.any((a < 0) & (b != np.round(b))):
        raise ExprDomainError("negative base with non-integer exponent", node)
    with np.errstate(over="ignore"):
        return np.power(a, b)


def _eval(node, env):
    if isinstance(node, Num):
        return node.value
    if isinstance(node, Var):
        return env[node.name]
    if isinstance(node, Const):
        return CONSTANTS[node.name]
    if isinstance(node, Neg):
        return -_eval(node.operand, env)
    if isinstance(node, BinOp):
        a = _eval(node.left, env)
        b = _eval(node.right, env)
        if node.op == "+":
            return a + b
        if node.op == "-":
            return a - b
        if node.op == "*":
            return a * b
        if node.op == "/":
            if np.any(np.asarray(b) == 0):
                raise ExprDomainError("division by zero", node)
            return a / b
        return _power(node, a, b)
    fn = node.fn
    args = [_eval(a, env) for a in node.args]
    if fn == "exp":
        with np.errstate(over="ignore"):
            return np.exp(args[0])
    if fn == "log":
        if np.any(np.asarray(args[0]) <= 0):
            raise ExprDomainError("log of a nonpositive number", node)
        return np.log(args[0])
    if fn == "sqrt":
        if np.any(np.asarray(args[0]) < 0):
            raise ExprDomainError("sqrt of a negative number", node)
        return np.sqrt(args[0])
    if fn == "abs":
        return np.abs(args[0])
    if fn == "sign":
        return np.sign(args[0])
    if fn == "sin":
        return np.sin(args[0])
    if fn == "cos":
        return np.cos(args[0])
    if fn == "tanh":
        return np.tanh(args[0])
    if fn == "min":
        return np.minimum(args[0], args[1])
    if fn == "max":
        return np.maximum(args[0], args[1])
    return _power(node, args[0], args[1])


def evaluate(e: Expr, x=0.0, y=0.0, **env):
    """Value of ``e`` at ``(x, y)``; arrays broadcast.

    Scalars in give a Python float out.
    """
    env = {"x": x, "y": y, **env}
    scalar = all(np.ndim(v) == 0 for v in env.values())
    out = _eval(e, env)
    if scalar:
        return float(out)
    shape = np.broadcast_shapes(*(np.shape(v) for v in env.values()))
    return np.broadcast_to(np.asarray(out, dtype=float), shape).copy()


def to_source(e: Expr) -> str:
    """Canonical, fully parenthesised text that parses back to ``e``."""
    if isinstance(e, Num):
        return repr(e.value)
    if isinstance(e, (Var, Const)):
        return e.name
    if isinstance(e, Neg):
        return f"(-{to_source(e.operand)})"
    if isinstance(e, BinOp):
        return f"({to_source(e.left)} {e.op} {to_source(e.right)})"
    return f"{e.fn}({', '.join(to_source(a) for a in e.args)})"


def variables_of(e: Expr) -> set:
    if isinstance(e, Var):
        return {e.name}
    if isinstance(e, Neg):
        return variables_of(e.operand)
    if isinstance(e, BinOp):
        return variables_of(e.left) | variables_of(e.right)
    if isinstance(e, Call):
        out = set()
        for a in e.args:
            out |= variables_of(a)
        return out
    return set()
