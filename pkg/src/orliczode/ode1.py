"""First-order problem ``y' - q(y) = g`` on the whole line.

With ``c = (m + M)/2`` and ``q`` increasing the equation reads
``y' - c y = g + q(y) - c y``.  The bounded solution of the linear part is
``y(x) = -int_x^inf exp(-c (t - x)) r(t) dt`` and the perturbation
``q(y) - c y`` has Lipschitz constant ``(M - m)/2``, so the iteration
contracts with factor ``(M - m)/(M + m)`` in the sup norm.  A decreasing
``q`` is handled the same way with ``y' + c y`` and the kernel running
over ``t <= x``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import exprlang
from .errors import ConfigError, HypothesisViolation, NumericFailure
from .orlicz import NFunction, luxemburg_norm, orlicz_sobolev_norm
from .realline import Decay, GridFunction, OneSidedExponential, convolve, lp_norm

__all__ = [
    "FirstOrderProblem",
    "FirstOrderSolution",
    "estimate_mM",
    "solve_first_order",
    "wellposed_report_1",
]


def _q_values(q: exprlang.Expr, y):
    return exprlang.evaluate(q, x=0.0, y=np.asarray(y, dtype=float))


def estimate_mM(q: exprlang.Expr, y_window: float = 10.0, n: int = 201) -> tuple[float, float]:
    """Sampled slope band ``[m, M]`` of ``q``.

    Min and max of ``|q(a) - q(b)|/|a - b|`` over all pairs of an ``n``
    point grid on ``[-y_window, y_window]``.  The same is done with ``2n``
    points; a lower slope that keeps collapsing under refinement (or is
    not positive) means the monotonicity band is violated.
    """
    if "x" in exprlang.variables_of(q):
        raise ConfigError("q must depend on y only")
    if _q_values(q, 0.0) != 0.0:
        raise ConfigError("q(0) must be 0")

    def band(k):
        y = np.linspace(-y_window, y_window, k)
        v = _q_values(q, y)
        i, j = np.triu_indices(k, 1)
        s = np.abs(v[i] - v[j]) / np.abs(y[i] - y[j])
        return float(s.min()), float(s.max())

    m1, M1 = band(n)
    m2, M2 = band(2 * n)
    if not m2 > 0 or m2 < 0.5 * m1:
        raise HypothesisViolation(
            f"monotonicity band violated: sampled m = {m2:.3g} (was {m1:.3g} on the coarser grid)"
        )
    if not math.isfinite(M2):
        raise HypothesisViolation("q is not Lipschitz on the sampled window")
    return min(m1, m2), max(M1, M2)


@dataclass(frozen=True, eq=False)
class FirstOrderProblem:
    q: exprlang.Expr
    g: GridFunction
    m_hat: float
    M_hat: float

    @property
    def orientation(self) -> float:
        """+1 for increasing ``q``, -1 for decreasing (a band ``m > 0`` forces one)."""
        return 1.0 if _q_values(self.q, 1.0) > _q_values(self.q, -1.0) else -1.0

    def __post_init__(self):
        if _q_values(self.q, 0.0) != 0.0:
            raise ConfigError("q(0) must be 0")
        if not (0 < self.m_hat <= self.M_hat < math.inf):
            raise HypothesisViolation(f"need 0 < m <= M < inf, got m={self.m_hat}, M={self.M_hat}")

    @classmethod
    def build(cls, q, g: GridFunction, y_window: float | None = None, n: int = 201) -> "FirstOrderProblem":
        """Parse ``q`` if needed and sample its slope band."""
        if isinstance(q, str):
            q = exprlang.parse(q)
        if y_window is None:
            y_window = max(10.0, 4.0 * g.sup())
        m, M = estimate_mM(q, y_window, n)
        return cls(q, g, m, M)

    @property
    def center(self) -> float:
        return 0.5 * (self.m_hat + self.M_hat)

    @property
    def contraction_bound(self) -> float:
        return (self.M_hat - self.m_hat) / (self.M_hat + self.m_hat)


@dataclass(frozen=True, eq=False)
class FirstOrderSolution:
    y: GridFunction
    iterations: int
    increments: list = field(repr=False)
    contraction_rate: float
    contraction_bound: float
    fixed_point_residual: float
    residual_inf: float


def _resolvent(r: GridFunction, c: float, sign: float = 1.0) -> GridFunction:
    # bounded solution of y' - sign*c y = r
    if sign > 0:
        return -convolve(r, OneSidedExponential(c))
    return convolve(r, OneSidedExponential(c, side="left"))


def _measured_rate(incs: Sequence[float]) -> float:
    scale = max(incs) if incs else 0.0
    ratios = [b / a for a, b in zip(incs, incs[1:]) if a > 1e3 * np.finfo(float).eps * max(scale, 1e-300)]
    return max(ratios) if ratios else 0.0


def differential_residual(y: GridFunction, q: exprlang.Expr, g: GridFunction, interior: float = 0.5) -> float:
    """``max |y' - q(y) - g|`` on the inner part of the window.

    The central difference of ``y`` is an average of ``y'`` over two cells,
    so the data ``q(y) + g`` is averaged the same way (weights 1/4, 1/2,
    1/4).  That keeps jumps in ``g`` from showing up as O(1) residuals.
    """
    x, v = y.x, y.values
    dy = (v[2:] - v[:-2]) / (x[2:] - x[:-2])
    rhs = _q_values(q, v) + g.values
    avg = 0.25 * rhs[:-2] + 0.5 * rhs[1:-1] + 0.25 * rhs[2:]
    keep = np.abs(x[1:-1]) <= interior * y.grid.truncation_radius
    return float(np.max(np.abs(dy - avg)[keep])) if keep.any() else 0.0


def solve_first_order(
    prob: FirstOrderProblem, tol: float = 1e-10, max_iter: int = 500
) -> FirstOrderSolution:
    """Bounded solution of ``y' - q(y) = g`` by iterated linearisation about ``c``."""
    c = prob.center
    sgn = prob.orientation
    sc = sgn * c
    g = prob.g
    y = GridFunction.zeros(g.grid)
    incs: list[float] = []
    growth = 0
    for it in range(1, max_iter + 1):
        r = g.with_values(g.values + _q_values(prob.q, y.values) - sc * y.values)
        y_new = _resolvent(r, c, sgn)
        inc = float(np.max(np.abs(y_new.values - y.values)))
        incs.append(inc)
        y = y_new
        if inc <= tol:
            break
        growth = growth + 1 if len(incs) > 1 and inc > incs[-2] else 0
        if growth >= 5:
            raise HypothesisViolation("iteration diverges: increments grew for 5 consecutive steps")
    else:
        raise NumericFailure(f"no convergence in {max_iter} iterations (last increment {incs[-1]:.3g})")
    y = y.with_values(y.values, g.decay if g.decay.kind != "compact" else Decay.exponential(c))
    r = g.with_values(g.values + _q_values(prob.q, y.values) - sc * y.values)
    fp = float(np.max(np.abs(_resolvent(r, c, sgn).values - y.values)))
    return FirstOrderSolution(
        y=y,
        iterations=len(incs),
        increments=incs,
        contraction_rate=_measured_rate(incs),
        contraction_bound=prob.contraction_bound,
        fixed_point_residual=fp,
        residual_inf=differential_residual(y, prob.q, g),
    )


def wellposed_report_1(
    q,
    batch: Sequence[GridFunction],
    N: NFunction,
    ps: Sequence[float] = (1.0, 2.0, 4.0, math.inf),
    tol: float = 1e-10,
) -> dict:
    """Empirical constants for ``||Q[g]||_{W1(L(N))} <= C ||g||_{L(N)}``.

    Reports per-function and pairwise-difference ratios, their maximum as
    the empirical constant, and the L_p ratios ``|Q[g]|_p / |g|_p``.
    """
    if isinstance(q, str):
        q = exprlang.parse(q)
    y_window = max([10.0] + [4.0 * g.sup() for g in batch])
    m, M = estimate_mM(q, y_window)
    sols = [solve_first_order(FirstOrderProblem(q, g, m, M), tol).y for g in batch]
    ratios, diff_ratios = [], []
    lp = {str(p): [] for p in ps}
    for g, y in zip(batch, sols):
        gn = luxemburg_norm(g, N)
        if gn > 0:
            ratios.append(orlicz_sobolev_norm(y, N, 1) / gn)
            for p in ps:
                lp[str(p)].append(lp_norm(y, p) / lp_norm(g, p))
    for i in range(len(batch)):
        for j in range(i + 1, len(batch)):
            dg = batch[i] - batch[j]
            dn = luxemburg_norm(dg, N)
            if dn > 0:
                diff_ratios.append(orlicz_sobolev_norm(sols[i] - sols[j], N, 1) / dn)
    allr = ratios + diff_ratios
    return {
        "m_hat": m,
        "M_hat": M,
        "ratios": ratios,
        "difference_ratios": diff_ratios,
        "C_empirical": max(allr) if allr else 0.0,
        "lp_ratios": {k: (max(v) if v else 0.0) for k, v in lp.items()},
        "label": "sampled certificate",
    }
