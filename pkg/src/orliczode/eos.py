"""Exponential Orlicz spaces and their moment-norm description.

A generator ``phi`` (defined for ``z >= 1``) enters through
``h(y) = phi(exp(y))``.  Its Young-Fenchel conjugate ``h*`` fixes the
splice point and coefficient of the N-function ``exp_alpha phi``, the
weight ``psi(p) = exp(h*(p)/p)`` of the moment norm
``||f||_G = sup_{p >= alpha} |f|_p / psi(p)`` and the tail bound
``T(|f|, w) <= exp(-h(log w))``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np

from . import exprlang
from .errors import ConfigError, NumericFailure
from .orlicz import NFunction, luxemburg_norm
from .realline import GridFunction, log_lp_norm, tail_measure

__all__ = [
    "PhiFunction",
    "EosFunction",
    "Conjugate",
    "fenchel",
    "double_conjugate",
    "psi",
    "build_eos",
    "gamma",
    "GammaResult",
    "p_grid",
    "g_norm",
    "g_norm_profile",
    "GNormReport",
    "lorentz_seminorm_log",
    "lorentz_g_norm",
    "equivalence_report",
    "equivalence_batch",
    "EquivalenceReport",
    "verify_tail_bound",
    "TailBoundReport",
]

_GOLD = (math.sqrt(5.0) - 1.0) / 2.0
_Y_LIMIT = 1e3


class PhiFunction:
    """A generator ``phi`` of an exponential Orlicz space.

    Families: ``power(m)`` is ``z^m``; ``power_log(m, r)`` is
    ``z^m log^r(exp(m + |r|) + z)``; ``log_power(beta)`` is
    ``log^(1+beta)(2 + z)``; ``custom(src)`` is an expression in ``z``.
    """

    def __init__(self, family: str, params: dict, h, phi):
        self.family = family
        self.params = params
        self._h = h
        self._phi = phi
        self._conj: dict[float, Conjugate] = {}

    def __repr__(self):
        args = ", ".join(f"{k}={v!r}" for k, v in self.params.items())
        return f"PhiFunction.{self.family}({args})"

    def h(self, y):
        with np.errstate(over="ignore", invalid="ignore"):
            out = self._h(np.asarray(y, dtype=float))
        return float(out) if np.ndim(y) == 0 else out

    def __call__(self, z):
        with np.errstate(over="ignore", invalid="ignore"):
            out = self._phi(np.asarray(z, dtype=float))
        return float(out) if np.ndim(z) == 0 else out

    @classmethod
    def power(cls, m: float) -> "PhiFunction":
        m = float(m)
        if not m > 0:
            raise ConfigError("power phi needs m > 0")
        return cls("power", {"m": m}, lambda y: np.exp(m * y), lambda z: z ** m)

    @classmethod
    def power_log(cls, m: float, r: float) -> "PhiFunction":
        m, r = float(m), float(r)
        if not m > 0:
            raise ConfigError("power_log phi needs m > 0")
        log_shift = m + abs(r)

        def h(y):
            return np.exp(m * y) * np.logaddexp(log_shift, y) ** r

        def phi(z):
            return z ** m * np.log(math.exp(log_shift) + z) ** r

        return cls("power_log", {"m": m, "r": r}, h, phi)

    @classmethod
    def log_power(cls, beta: float) -> "PhiFunction":
        beta = float(beta)
        if not beta > 0:
            raise ConfigError("log_power phi needs beta > 0")
        log2 = math.log(2.0)
        return cls(
            "log_power",
            {"beta": beta},
            lambda y: np.logaddexp(log2, y) ** (1 + beta),
            lambda z: np.log(2 + z) ** (1 + beta),
        )

    @classmethod
    def custom(cls, src: str) -> "PhiFunction":
        expr = exprlang.parse(src, variables=("z",))

        def phi(z):
            return exprlang.evaluate(expr, z=np.asarray(z, dtype=float))

        return cls("custom", {"expr": src}, lambda y: phi(np.exp(y)), phi)

    @classmethod
    def from_config(cls, spec: dict) -> "PhiFunction":
        fam = spec.get("family")
        try:
            if fam == "power":
                return cls.power(spec["m"])
            if fam == "power_log":
                return cls.power_log(spec["m"], spec["r"])
            if fam == "log_power":
                return cls.log_power(spec["beta"])
            if fam == "custom":
                return cls.custom(spec["expr"])
        except KeyError as exc:
            raise ConfigError(f"phi family {fam!r} is missing parameter {exc}") from None
        raise ConfigError(f"unknown phi family {fam!r}")

    def class_report(self, k_max: int = 60) -> dict:
        """Sampled checks that ``phi`` is admissible.

        ``h`` increasing and convex on ``[0, k_max]``, and the series
        ``sum_{k>=3} exp(h(k) - h(k+1))`` with its last ten term ratios
        at most 0.9.
        """
        y = np.linspace(0.0, float(k_max), 20 * k_max + 1)
        hv = self.h(y)
        fin = np.isfinite(hv)
        d1 = np.diff(hv[fin])
        d2 = np.diff(d1)
        increasing = bool(np.all(d1 > 0))
        convex = bool(np.all(d2 >= -1e-8 * np.maximum(1.0, np.abs(hv[fin][2:]))))
        k = np.arange(3, k_max + 2, dtype=float)
        hk = self.h(k)
        with np.errstate(invalid="ignore"):
            log_terms = hk[:-1] - hk[1:]
            log_ratios = np.diff(log_terms)
        log_ratios = np.where(np.isnan(log_ratios), -np.inf, log_ratios)
        tail = log_ratios[-10:]
        series_ok = bool(np.all(tail <= math.log(0.9)))
        with np.errstate(invalid="ignore"):
            partial = float(np.nansum(np.exp(log_terms)))
        return {
            "increasing": increasing,
            "convex": convex,
            "series_partial_sum": partial,
            "series_converges": series_ok,
            "admissible": increasing and convex and series_ok,
            "label": "sampled certificate",
        }


class Conjugate(NamedTuple):
    value: float
    argmax: float
    interior: bool


def _golden_max(g, a: float, b: float, xtol: float) -> float:
    c = b - _GOLD * (b - a)
    d = a + _GOLD * (b - a)
    gc, gd = g(c), g(d)
    while b - a > xtol:
        if gc >= gd:
            b, d, gd = d, c, gc
            c = b - _GOLD * (b - a)
            gc = g(c)
        else:
            a, c, gc = c, d, gd
            d = a + _GOLD * (b - a)
            gd = g(d)
    return 0.5 * (a + b)


def _concave_argmax(g, lo: float, what: str, limit: float = _Y_LIMIT) -> tuple[float, bool]:
    # argmax of a concave g on [lo, inf); bool says whether it is interior
    step = 1e-7 * max(1.0, abs(lo))
    if g(lo + step) <= g(lo):
        return lo, False
    hi = lo + 1.0
    while g(2 * hi - lo) > g(hi):
        hi = 2 * hi - lo
        if hi > limit:
            raise NumericFailure(f"maximizer not localized ({what})")
    top = 2 * hi - lo
    x = _golden_max(g, lo, top, 1e-12 * max(1.0, top))
    return x, True


def fenchel(phi: PhiFunction, w: float) -> Conjugate:
    """``h*(w) = sup_{y >= 0} (y w - h(y))`` and its maximizer.

    Golden-section search over an expanding bracket; ``h`` convex makes
    the objective unimodal.  Results are cached on ``phi``.
    """
    w = float(w)
    hit = phi._conj.get(w)
    if hit is not None:
        return hit

    def g(y):
        hv = phi.h(y)
        return -math.inf if not math.isfinite(hv) else y * w - hv

    y0, interior = _concave_argmax(g, 0.0, f"h* at w={w!r}")
    out = Conjugate(y0 * w - phi.h(y0), y0, interior)
    phi._conj[w] = out
    return out


def double_conjugate(phi: PhiFunction, y: float, w_min: float = 0.0) -> float:
    """``h**(y) = sup_{w >= w_min} (y w - h*(w))``, both sups numeric."""
    y = float(y)

    def g(w):
        return y * w - fenchel(phi, w).value

    w_star, _ = _concave_argmax(g, w_min, f"h** at y={y!r}", limit=1e15)
    return g(w_star)


def psi(phi: PhiFunction, p: float) -> float:
    """``exp(h*(p)/p)``."""
    p = float(p)
    return math.exp(fenchel(phi, p).value / p)


def log_psi(phi: PhiFunction, p: float) -> float:
    return fenchel(phi, float(p)).value / float(p)


@dataclass(frozen=True, eq=False)
class EosFunction:
    """``exp_alpha phi``: ``C2 u^alpha`` on ``[0, C1]``, ``exp(phi(u))`` beyond."""

    alpha: float
    phi: PhiFunction
    C1: float
    C2: float

    @property
    def log_C1(self) -> float:
        return math.log(self.C1)

    def log_value(self, u):
        a = np.abs(np.asarray(u, dtype=float))
        with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
            low = math.log(self.C2) + self.alpha * np.log(a)
            high = self.phi(np.maximum(a, self.C1))
        out = np.where(a <= self.C1, low, high)
        return float(out) if np.ndim(u) == 0 else out

    def value(self, u):
        a = np.abs(np.asarray(u, dtype=float))
        with np.errstate(over="ignore"):
            out = np.where(a <= self.C1, self.C2 * a ** self.alpha, np.exp(self.phi(np.maximum(a, self.C1))))
        return float(out) if np.ndim(u) == 0 else out

    __call__ = value

    def continuity_gap(self) -> float:
        """Relative jump of the two pieces at ``C1``."""
        left = self.C2 * self.C1 ** self.alpha
        right = math.exp(self.phi(self.C1))
        return abs(left - right) / right

    def is_convex(self, n: int = 2001) -> bool:
        u = np.linspace(0.0, 4.0 * self.C1 + 4.0, n)
        logs = self.log_value(u[1:])
        keep = logs < 600
        uu = np.concatenate([[0.0], u[1:][keep]])
        v = np.concatenate([[0.0], np.exp(logs[keep])])
        slope = np.diff(v) / np.diff(uu)
        return bool(np.all(np.diff(slope) >= -1e-8 * np.maximum(1.0, np.abs(slope[1:]))))

    def n_function(self) -> NFunction:
        return NFunction.eos(self)


def build_eos(alpha: float, phi: PhiFunction) -> EosFunction:
    """Splice ``C2 z^alpha`` to ``exp(phi(z))`` at the tangency point.

    ``C2 = exp(-h*(alpha))`` and ``C1 = exp(y0(alpha))``; the two pieces
    then agree in value at ``C1``.
    """
    alpha = float(alpha)
    if not alpha >= 1:
        raise ConfigError("alpha must be >= 1")
    conj = fenchel(phi, alpha)
    C1 = math.exp(conj.argmax)
    C2 = math.exp(-conj.value)
    if not (0 < C2 < math.inf):
        raise NumericFailure(f"C2 = {C2!r} is not in (0, inf)")
    out = EosFunction(alpha, phi, C1, C2)
    if out.continuity_gap() > 1e-8:
        raise NumericFailure(f"exp_alpha phi is discontinuous at C1 (gap {out.continuity_gap():.3g})")
    return out


@dataclass(frozen=True)
class GammaResult:
    p: float
    log_gamma: float
    z_star: float
    log_conjugate: float
    c4: float

    @property
    def value(self) -> float:
        return math.exp(self.log_gamma) if self.log_gamma < 709 else math.inf


def gamma(alpha: float, phi: PhiFunction, p: float, eos: EosFunction | None = None) -> GammaResult:
    """``sup_{z > 0} z^p / exp_alpha phi(z)``, worked in ``t = log z``.

    A coarse scan over ``t`` locates the peak, golden section refines it.
    ``c4`` is the smallest constant with ``gamma(p) <= c4^p exp h*(p)``.
    """
    p = float(p)
    if p < alpha:
        raise ConfigError("gamma needs p >= alpha")
    eos = eos or build_eos(alpha, phi)

    def F(t):
        v = p * t - float(eos.log_value(math.exp(t)))
        return v if math.isfinite(v) else -math.inf

    lo = -50.0
    hi = 1.0
    while F(hi + 1.0) > F(hi) or hi < eos.log_C1 + 1.0:
        hi += max(1.0, hi)
        if hi > _Y_LIMIT:
            raise NumericFailure("sup not localized in gamma")
    ts = np.linspace(lo, hi + 1.0, 2001)
    vals = np.array([F(t) for t in ts])
    i = int(np.argmax(vals))
    a, b = ts[max(i - 1, 0)], ts[min(i + 1, ts.size - 1)]
    t_star = _golden_max(F, a, b, 1e-12 * max(1.0, abs(b)))
    lg = max(F(t_star), float(vals[i]))
    hstar = fenchel(phi, p).value
    c4 = math.exp((lg - hstar) / p)
    return GammaResult(p, lg, math.exp(t_star), hstar, c4)


def p_grid(alpha: float, p_max: float = 200.0, ratio: float = 1.1) -> np.ndarray:
    """``alpha * ratio^j`` up to ``p_max``, with ``p_max`` itself appended."""
    if p_max < alpha:
        raise ConfigError("p_max must be >= alpha")
    n = int(math.floor(math.log(p_max / alpha) / math.log(ratio) + 1e-12))
    ps = alpha * ratio ** np.arange(n + 1)
    if ps[-1] < p_max * (1 - 1e-12):
        ps = np.append(ps, p_max)
    return ps


@dataclass(frozen=True)
class GNormReport:
    value: float
    p_star: float
    at_cap: bool
    ps: np.ndarray = field(repr=False)
    log_ratios: np.ndarray = field(repr=False)


def g_norm_profile(
    f: GridFunction, alpha: float, phi: PhiFunction, p_max: float = 200.0, ratio: float = 1.1
) -> GNormReport:
    """``sup_p |f|_p / psi(p)`` on the geometric grid, with where it was attained."""
    ps = p_grid(alpha, p_max, ratio)
    logs = np.array([log_lp_norm(f, p) - log_psi(phi, p) for p in ps])
    if np.all(np.isneginf(logs)):
        return GNormReport(0.0, float(ps[0]), False, ps, logs)
    i = int(np.argmax(logs))
    return GNormReport(float(math.exp(logs[i])), float(ps[i]), i == ps.size - 1, ps, logs)


def g_norm(f: GridFunction, alpha: float, phi: PhiFunction, p_max: float = 200.0, ratio: float = 1.1) -> float:
    return g_norm_profile(f, alpha, phi, p_max, ratio).value


def _w_levels(f: GridFunction, n: int = 3000) -> np.ndarray:
    top = float(np.max(np.abs(f.values)))
    levels = np.concatenate([np.geomspace(top * 1e-9, top, n), np.linspace(top / n, top, n)])
    return np.unique(levels)


def _distribution(f: GridFunction) -> tuple[np.ndarray, np.ndarray]:
    w = _w_levels(f)
    with np.errstate(divide="ignore"):
        return w, np.log(tail_measure(f, w))


def lorentz_seminorm_log(
    f: GridFunction, p: float, b: float, form: str = "printed", dist: tuple | None = None
) -> float:
    """``log ||f||_{p,b}`` from the distribution function.

    ``form="printed"`` integrates ``T^(p/b) d(x^b)``; ``form="standard"``
    uses ``T^(b/p)``, the usual Lorentz exponent.  Both agree at ``b = p``.
    """
    if form not in ("printed", "standard"):
        raise ConfigError(f"unknown Lorentz form {form!r}")
    if not b >= 1:
        raise ConfigError("b must be >= 1")
    if not np.any(f.values):
        return -math.inf
    w, logT = dist if dist is not None else _distribution(f)
    if math.isinf(b):
        return float(np.max(np.log(w) + logT / p))
    expo = p / b if form == "printed" else b / p
    # trapezoid in w of exp(expo*log T + log b + (b-1) log w), done in logs
    log_g = expo * logT + math.log(b) + (b - 1) * np.log(w)
    dw = np.diff(w)
    pair = np.logaddexp(log_g[:-1], log_g[1:]) + np.log(0.5 * dw)
    log_int = float(np.logaddexp.reduce(pair))
    # [0, w_0] piece: T is constant there to within the first level
    log_int = float(np.logaddexp(log_int, expo * logT[0] + b * math.log(w[0])))
    return log_int / b


def lorentz_g_norm(
    f: GridFunction,
    alpha: float,
    phi: PhiFunction,
    b: float,
    p_max: float = 200.0,
    ratio: float = 1.1,
    form: str = "printed",
) -> float:
    """``sup_p ||f||_{p,b} / psi(p)`` over the same grid as :func:`g_norm`."""
    if not np.any(f.values):
        return 0.0
    ps = p_grid(alpha, p_max, ratio)
    dist = _distribution(f)
    logs = [lorentz_seminorm_log(f, p, b, form, dist) - log_psi(phi, p) for p in ps]
    top = max(logs)
    if top == -math.inf:
        return 0.0
    return math.exp(top) if top < 709 else math.inf


@dataclass(frozen=True)
class EquivalenceReport:
    orlicz: float
    gnorm: float
    ratio: float | None
    diverged: str | None = None


def equivalence_report(f: GridFunction, eos: EosFunction, p_max: float = 200.0) -> EquivalenceReport:
    """Luxemburg norm in ``exp_alpha phi`` next to the moment norm."""
    gn = g_norm(f, eos.alpha, eos.phi, p_max)
    try:
        on = luxemburg_norm(f, NFunction.eos(eos))
    except NumericFailure as exc:
        return EquivalenceReport(math.inf, gn, None, f"orlicz: {exc}")
    if gn == 0.0 and on == 0.0:
        return EquivalenceReport(0.0, 0.0, None)
    if not math.isfinite(gn):
        return EquivalenceReport(on, gn, None, "gnorm diverges")
    return EquivalenceReport(on, gn, on / gn)


def equivalence_batch(fs: Sequence[GridFunction], eos: EosFunction, p_max: float = 200.0) -> dict:
    """Reports for a family plus the empirical two-sided constants."""
    reps = [equivalence_report(f, eos, p_max) for f in fs]
    ratios = [r.ratio for r in reps if r.ratio is not None]
    return {
        "reports": reps,
        "C3": min(ratios) if ratios else None,
        "C4": max(ratios) if ratios else None,
        "spread": max(ratios) / min(ratios) if ratios else None,
    }


@dataclass(frozen=True)
class TailBoundReport:
    ok: bool
    normalizer: float
    crossover: float
    chebyshev_margin: float
    theorem_margin: float
    fenchel_moreau_gap: float
    w_chebyshev: np.ndarray = field(repr=False)
    w_theorem: np.ndarray = field(repr=False)


def verify_tail_bound(f: GridFunction, eos: EosFunction, p_max: float = 200.0) -> TailBoundReport:
    """Check the distribution-function bound behind the moment-norm equivalence.

    ``f`` is divided by its G-norm so that ``|f|_p^p <= exp h*(p)`` on the
    p-grid.  Two checks follow: the Chebyshev bound
    ``T(w) <= min_p exp(h*(p) - p log w)`` for ``w`` up to ``max |f|``, and
    ``T(w) <= exp(-h(log w))`` for ``w`` above the crossover ``C1``.
    Margins are ``min(1 - T/bound)``; nonnegative means the bound holds.
    """
    phi, alpha = eos.phi, eos.alpha
    gn = g_norm(f, alpha, phi, p_max)
    C5 = eos.C1
    if gn == 0.0:
        empty = np.zeros(0)
        return TailBoundReport(True, 0.0, C5, 1.0, 1.0, 0.0, empty, empty)
    fn = f * (1.0 / gn)
    top = fn.sup()
    ps = p_grid(alpha, p_max)
    hs = np.array([fenchel(phi, p).value for p in ps])

    w1 = np.geomspace(top * 1e-4, top, 200)
    T1 = tail_measure(fn, w1)
    log_cheb = np.min(hs[:, None] - ps[:, None] * np.log(w1)[None, :], axis=0)
    with np.errstate(over="ignore", invalid="ignore"):
        cheb_margin = float(np.min(1.0 - np.where(T1 > 0, T1 * np.exp(-log_cheb), 0.0)))

    w_hi = max(C5, top) * math.e ** 3
    w2 = np.geomspace(C5, w_hi, 100)
    T2 = tail_measure(fn, w2)
    hlog = phi.h(np.log(w2))
    with np.errstate(over="ignore", invalid="ignore"):
        theorem_margin = float(np.min(1.0 - np.where(T2 > 0, T2 * np.exp(hlog), 0.0)))
    # inf over p of h*(p) - p log w against -h(log w), on w where the optimum p is on the grid
    log_w2 = np.log(w2)
    inner = np.min(hs[:, None] - ps[:, None] * log_w2[None, :], axis=0)
    eps = 1e-6 * np.maximum(1.0, np.abs(log_w2))
    slope = (phi.h(log_w2 + eps) - phi.h(log_w2 - eps)) / (2 * eps)
    on_grid = (slope >= ps[0]) & (slope <= ps[-1])
    gap = np.abs(inner + hlog) / np.maximum(1.0, np.abs(hlog))
    fm_gap = float(np.max(gap[on_grid])) if on_grid.any() else 0.0
    ok = cheb_margin >= 0 and theorem_margin >= 0
    return TailBoundReport(ok, gn, C5, cheb_margin, theorem_margin, fm_gap, w1, w2)
