"""N-functions, the Luxemburg norm and sampled growth-class certificates."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any

import numpy as np

from . import exprlang
from .errors import ConfigError, NumericFailure
from .realline import GridFunction, QuadratureConfig, differentiate, _quad

__all__ = [
    "NFunction",
    "Delta2Result",
    "Nabla2Result",
    "luxemburg_norm",
    "luxemburg_functional",
    "delta2_check",
    "nabla2_check",
    "orlicz_sobolev_norm",
]


class NFunction:
    """An even Orlicz N-function ``N(u)``.

    Build one with :meth:`power`, :meth:`power_log`, :meth:`eos` or
    :meth:`custom`.  ``N(u)`` and ``log N(u)`` are both available; the log
    form keeps fast-growing (exponential) N-functions usable far out.
    """

    def __init__(self, family: str, params: dict, fn, log_fn):
        self.family = family
        self.params = params
        self._fn = fn
        self._log_fn = log_fn

    def __repr__(self):
        args = ", ".join(f"{k}={v!r}" for k, v in self.params.items())
        return f"NFunction.{self.family}({args})"

    def __call__(self, u):
        a = np.abs(np.asarray(u, dtype=float))
        with np.errstate(over="ignore", divide="ignore", invalid="ignore"):
            out = self._fn(a)
        return float(out) if np.ndim(u) == 0 else out

    def log_value(self, u):
        """``log N(|u|)``; ``-inf`` at zero."""
        a = np.abs(np.asarray(u, dtype=float))
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            out = np.where(a > 0, self._log_fn(np.where(a > 0, a, 1.0)), -np.inf)
        return float(out) if np.ndim(u) == 0 else out

    @classmethod
    def power(cls, p: float) -> "NFunction":
        p = float(p)
        if not p >= 1:
            raise ConfigError("power N-function needs p >= 1")
        return cls("power", {"p": p}, lambda a: a ** p, lambda a: p * np.log(a))

    @classmethod
    def power_log(cls, m: float, r: float) -> "NFunction":
        """``|u|^m log^r(exp(m + |r|) + |u|)`` with ``m > 1``."""
        m, r = float(m), float(r)
        if not m > 1:
            raise ConfigError("power_log N-function needs m > 1")
        shift = math.exp(m + abs(r))

        def fn(a):
            return a ** m * np.log(shift + a) ** r

        def log_fn(a):
            return m * np.log(a) + r * np.log(np.log(shift + a))

        return cls("power_log", {"m": m, "r": r}, fn, log_fn)

    @classmethod
    def eos(cls, eos_fn: Any) -> "NFunction":
        """Wrap an :class:`orliczode.eos.EosFunction`."""
        return cls("eos", {"eos": eos_fn}, eos_fn.value, eos_fn.log_value)

    @classmethod
    def custom(cls, src: str, check: bool = True) -> "NFunction":
        """N-function from an expression in ``u``, validated on a log grid."""
        expr = exprlang.parse(src, variables=("u",))

        def fn(a):
            return exprlang.evaluate(expr, u=np.asarray(a, dtype=float))

        def log_fn(a):
            return np.log(fn(a))

        out = cls("custom", {"expr": src}, fn, log_fn)
        if check:
            _validate(out)
        return out

    @classmethod
    def from_config(cls, spec: dict) -> "NFunction":
        fam = spec.get("family")
        if fam == "power":
            return cls.power(spec["p"])
        if fam == "power_log":
            return cls.power_log(spec["m"], spec["r"])
        if fam == "custom":
            return cls.custom(spec["expr"])
        if fam == "eos":
            from .eos import PhiFunction, build_eos

            return cls.eos(build_eos(spec.get("alpha", 1.0), PhiFunction.from_config(spec["phi"])))
        raise ConfigError(f"unknown N-function family {fam!r}")


def _validate(N: NFunction, n: int = 512) -> None:
    u = np.geomspace(1e-6, 1e6, n)
    try:
        pos, neg = N(u), N(-u)
        zero = N(0.0)
    except ArithmeticError as exc:
        raise ConfigError(f"N-function not defined on the check grid: {exc}") from exc
    if zero != 0:
        raise ConfigError("N(0) must be 0")
    finite = np.isfinite(pos)
    if not np.allclose(pos[finite], neg[finite], rtol=1e-12, atol=0):
        raise ConfigError("N-function must be even")
    if np.any(pos[finite] <= 0):
        raise ConfigError("N(u) must be positive for u != 0")
    v = pos[finite]
    uf = u[finite]
    if np.any(np.diff(v) < -1e-12 * np.abs(v[1:])):
        raise ConfigError("N-function must be nondecreasing on u >= 0")
    slope = np.diff(v) / np.diff(uf)
    if np.any(np.diff(slope) < -1e-8 * np.abs(slope[1:])):
        raise ConfigError("N-function must be convex on u >= 0")


def luxemburg_functional(f: GridFunction, N: NFunction, k: float, cfg: QuadratureConfig | None = None) -> float:
    """``I(N(|f|/k))`` over the window."""
    cfg = cfg or QuadratureConfig()
    vals = N(np.abs(f.values) / k)
    if not np.all(np.isfinite(vals)):
        return math.inf
    return _quad(f.x, vals, cfg.rule)


def luxemburg_norm(
    f: GridFunction,
    N: NFunction,
    cfg: QuadratureConfig | None = None,
    rtol: float = 1e-12,
) -> float:
    """Smallest ``k`` with ``I(N(|f|/k)) <= 1``.

    Bisection in ``log k``; the returned value always satisfies the
    inequality.  Raises :class:`NumericFailure` if no ``k`` up to the
    overflow guard works.
    """
    top = float(np.max(np.abs(f.values)))
    if top == 0.0:
        return 0.0

    def J(k):
        return luxemburg_functional(f, N, k, cfg)

    hi = top
    while J(hi) > 1.0:
        hi *= 2.0
        if not math.isfinite(hi) or hi / top > 1e18:
            raise NumericFailure("norm diverges on window")
    lo = hi / 2.0
    while J(lo) <= 1.0:
        hi = lo
        lo /= 2.0
        if lo < 1e-300:
            return 0.0
    while hi / lo - 1.0 > rtol:
        mid = math.sqrt(lo) * math.sqrt(hi)
        if J(mid) <= 1.0:
            hi = mid
        else:
            lo = mid
    return hi


@dataclass(frozen=True)
class Delta2Result:
    member: bool
    witness_k: float
    sup_ratio: float
    sup_ratio_doubled: float
    label: str = "sampled membership"


@dataclass(frozen=True)
class Nabla2Result:
    member: bool
    witness_l: float
    label: str = "sampled membership"


def _u_grid(u_max: float, u_min: float = 1e-6, per_decade: int = 64) -> np.ndarray:
    decades = max(math.log10(u_max / u_min), 1.0)
    return np.geomspace(u_min, u_max, int(decades * per_decade) + 1)


def _sup_log_ratio(N: NFunction, u: np.ndarray) -> float:
    return float(np.max(N.log_value(2 * u) - N.log_value(u)))


def delta2_check(N: NFunction, u_max: float = 1e6) -> Delta2Result:
    """Sampled test of ``sup_u N(2u)/N(u) < inf``.

    The sup is taken on ``(0, u_max]`` and on ``(0, 2 u_max]``; the class
    is accepted when the two agree to 1%.
    """
    if not u_max > 0:
        raise ConfigError("u_max must be positive")
    s1 = _sup_log_ratio(N, _u_grid(u_max))
    s2 = _sup_log_ratio(N, _u_grid(2 * u_max))
    member = bool(np.isfinite(s2) and s2 - s1 <= math.log(1.01))
    r1 = math.exp(min(s1, 700.0))
    r2 = math.exp(min(s2, 700.0))
    return Delta2Result(member, 1.01 * r2 if member else math.inf, r1, r2)


def _nabla2_ok(N: NFunction, u: np.ndarray, l: float) -> bool:
    lhs = N.log_value(2 * u) + math.log(2 * l)
    rhs = N.log_value(l * u)
    return bool(np.all(lhs <= rhs + 1e-12 * np.maximum(1.0, np.abs(rhs))))


def nabla2_check(N: NFunction, u_max: float = 1e6, l_max: float = 256.0) -> Nabla2Result:
    """Sampled search for ``l > 1`` with ``N(2u) <= N(lu)/(2l)``.

    ``l`` runs over ``(1, l_max]`` in steps of 1/8; the smallest ``l`` that
    works on both ``(0, u_max]`` and ``(0, 2 u_max]`` is the witness.
    """
    if not u_max > 0:
        raise ConfigError("u_max must be positive")
    u1, u2 = _u_grid(u_max), _u_grid(2 * u_max)
    for l in np.arange(1.125, l_max + 1e-9, 0.125):
        if _nabla2_ok(N, u1, l) and _nabla2_ok(N, u2, l):
            return Nabla2Result(True, float(l))
    return Nabla2Result(False, math.inf)


def orlicz_sobolev_norm(y: GridFunction, N: NFunction, k: int = 1, cfg: QuadratureConfig | None = None) -> float:
    """``||y|| + sum_{l<=k} ||y^(l)||`` in ``L(N)``, derivatives by finite differences."""
    if k not in (1, 2):
        raise ConfigError("k must be 1 or 2")
    total = luxemburg_norm(y, N, cfg)
    for order in range(1, k + 1):
        total += luxemburg_norm(differentiate(y, order), N, cfg)
    return total
