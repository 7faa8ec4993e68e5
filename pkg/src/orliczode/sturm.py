"""Second-order problem ``y'' - q0(x) y - v(x, y) = g`` on the whole line.

The Green function of ``y'' - q0 y`` decaying at both ends is built from
the two principal solutions.  They are marched as logarithmic derivatives
``z = u'/u`` (a Riccati equation), which never overflows, and

    Gamma(x, t) = u_minus(min) u_plus(max) / W,   W = u_minus' u_plus - u_minus u_plus'

is positive and symmetric.  With this sign convention the decaying
solution of the linear problem is ``y = -int Gamma(x, t) g(t) dt``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.integrate import solve_ivp

from . import exprlang
from .errors import ConfigError, ContractionError, NumericFailure
from .orlicz import NFunction, luxemburg_norm, orlicz_sobolev_norm
from .realline import Decay, Grid, GridFunction, differentiate, exp_sweep, lp_norm, _edge_tail

__all__ = [
    "Potential",
    "Geometry",
    "GreenFunction",
    "SecondOrderSolution",
    "d_of_x",
    "d_profile",
    "nu",
    "s_kernel_norm",
    "kappa",
    "geometry",
    "green_build",
    "verify_green_bounds",
    "solve_linear",
    "v_norm",
    "solve_nonlinear",
    "kolmogorov_check",
    "wellposed_report_2",
]

_SQRT2 = math.sqrt(2.0)


def _as_expr(e):
    return exprlang.parse(e) if isinstance(e, str) else e


def _q0_values(q0, x):
    return exprlang.evaluate(q0, x=np.asarray(x, dtype=float), y=0.0)


# composite Gauss-Legendre on [0, 1]: 16 panels of 8 points
def _gl_nodes(panels: int = 16, order: int = 8):
    t, w = np.polynomial.legendre.leggauss(order)
    edges = np.linspace(0.0, 1.0, panels + 1)
    mid = 0.5 * (edges[:-1] + edges[1:])
    half = 0.5 * np.diff(edges)
    u = (mid[:, None] + half[:, None] * t[None, :]).ravel()
    wt = (half[:, None] * w[None, :]).ravel()
    return u, wt


_U, _W = _gl_nodes()


def _level(q0, x: np.ndarray, d: np.ndarray) -> np.ndarray:
    # int_0^{d sqrt2} dt int_{x-t}^{x+t} q0 = D^2 int_0^1 (q0(x+Du) + q0(x-Du)) (1-u) du
    D = d * _SQRT2
    off = D[:, None] * _U[None, :]
    vals = _q0_values(q0, x[:, None] + off) + _q0_values(q0, x[:, None] - off)
    return D * D * (vals @ (_W * (1.0 - _U)))


def d_profile(q0, x, radius: float | None = None, iters: int = 200) -> np.ndarray:
    """Solve ``int_0^{d sqrt2} dt int_{x-t}^{x+t} q0 = 2`` for ``d`` at each ``x``.

    Vectorised bisection on ``[0, radius]``; the left side is nondecreasing
    in ``d``.
    """
    q0 = _as_expr(q0)
    x = np.atleast_1d(np.asarray(x, dtype=float))
    R = float(radius if radius is not None else max(10.0, 2 * np.max(np.abs(x))))
    lo = np.zeros_like(x)
    hi = np.full_like(x, R)
    top = _level(q0, x, hi)
    if np.any(top < 2.0):
        bad = x[np.argmax(top < 2.0)]
        raise NumericFailure(f"d(x) exceeds window at x = {bad!r}")
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        below = _level(q0, x, mid) < 2.0
        lo = np.where(below, mid, lo)
        hi = np.where(below, hi, mid)
        if np.all(hi - lo <= 4 * np.finfo(float).eps * hi):
            break
    return 0.5 * (lo + hi)


def d_of_x(q0, x: float, radius: float | None = None) -> float:
    return float(d_profile(q0, [x], radius)[0])


def nu(B: float) -> float:
    """``8 exp(-1/e) B max(B, 1)``."""
    return 8.0 * math.exp(-1.0 / math.e) * B * max(B, 1.0)


def s_kernel_norm(B: float, p: float) -> float:
    """``|s|_p`` for ``s(x) = B sqrt2 exp(-2^{-3/2} |x| / B)``, in closed form."""
    if math.isinf(p):
        return B * _SQRT2
    return B * _SQRT2 * (4.0 * _SQRT2 * B / p) ** (1.0 / p)


def kappa(B: float, p_max: float = 200.0, ratio: float = 1.01) -> float:
    """``sup_{1 <= p <= p_max} |s|_p`` over a geometric grid (plus ``p = inf``)."""
    n = int(math.log(p_max) / math.log(ratio))
    ps = np.append(ratio ** np.arange(n + 1), p_max)
    return max(max(s_kernel_norm(B, p) for p in ps), s_kernel_norm(B, math.inf))


@dataclass(frozen=True, eq=False)
class Geometry:
    d: GridFunction
    A: float
    B: float
    nuB: float
    kappaB: float


def geometry(q0, grid: Grid) -> Geometry:
    q0 = _as_expr(q0)
    dv = d_profile(q0, grid.nodes, max(10.0, 2 * grid.truncation_radius))
    A, B = float(dv.min()), float(dv.max())
    return Geometry(GridFunction(grid, dv, Decay.unknown()), A, B, nu(B), kappa(B))


@dataclass(frozen=True, eq=False)
class GreenFunction:
    """Green function data on a grid, kept in logarithmic form.

    ``log_u_minus`` and ``log_u_plus`` are normalised to 0 at the node
    nearest ``x = 0``; ``wronskian`` is ``W`` for that normalisation.
    """

    grid: Grid
    z_minus: np.ndarray = field(repr=False)
    z_plus: np.ndarray = field(repr=False)
    log_u_minus: np.ndarray = field(repr=False)
    log_u_plus: np.ndarray = field(repr=False)
    wronskian: float
    wronskian_drift: float

    @property
    def u_minus(self) -> GridFunction:
        with np.errstate(over="raise"):
            return GridFunction(self.grid, np.exp(self.log_u_minus))

    @property
    def u_plus(self) -> GridFunction:
        with np.errstate(over="raise"):
            return GridFunction(self.grid, np.exp(self.log_u_plus))

    def rho(self) -> np.ndarray:
        """Diagonal ``Gamma(x, x)`` at every node."""
        return np.exp(self.log_u_minus + self.log_u_plus) / self.wronskian

    def at_nodes(self, i, j) -> np.ndarray:
        """``Gamma`` at node index pairs (broadcasting)."""
        i, j = np.broadcast_arrays(np.asarray(i), np.asarray(j))
        lo, hi = np.minimum(i, j), np.maximum(i, j)
        return np.exp(self.log_u_minus[lo] + self.log_u_plus[hi]) / self.wronskian

    def __call__(self, x, t):
        """``Gamma(x, t)`` with logs interpolated linearly between nodes."""
        xs = self.grid.nodes
        a, b = np.minimum(x, t), np.maximum(x, t)
        la = np.interp(a, xs, self.log_u_minus)
        lb = np.interp(b, xs, self.log_u_plus)
        return np.exp(la + lb) / self.wronskian

    def matrix(self, idx=None) -> np.ndarray:
        idx = np.arange(self.grid.n) if idx is None else np.asarray(idx)
        return self.at_nodes(idx[:, None], idx[None, :])


def _march(q0, x_nodes: np.ndarray, z0: float, rtol: float) -> tuple[np.ndarray, np.ndarray]:
    def rhs(x, s):
        return [float(_q0_values(q0, x)) - s[0] * s[0], s[0]]

    sol = solve_ivp(
        rhs, (x_nodes[0], x_nodes[-1]), [z0, 0.0], method="DOP853", t_eval=x_nodes, rtol=rtol, atol=1e-13
    )
    if not sol.success:
        raise NumericFailure(f"Riccati march failed: {sol.message}")
    return sol.y[0], sol.y[1]


def green_build(q0, grid: Grid, rtol: float = 1e-12) -> GreenFunction:
    """Green function of ``y'' - q0 y`` from the two principal solutions.

    ``u_minus`` is marched from ``-X`` and ``u_plus`` back from ``+X``, each
    started in its decaying WKB direction (``z = +-sqrt(q0)`` at the edge).
    """
    q0 = _as_expr(q0)
    x = grid.nodes
    q_edges = _q0_values(q0, x[[0, -1]])
    if np.any(q_edges <= 0):
        raise NumericFailure("recessive direction undefined at edge (q0 vanishes at a window edge)")
    if np.any(_q0_values(q0, x) < 0):
        raise ConfigError("q0 must be nonnegative")
    zm, Lm = _march(q0, x, math.sqrt(q_edges[0]), rtol)
    zp_r, Lp_r = _march(q0, x[::-1], -math.sqrt(q_edges[1]), rtol)
    zp, Lp = zp_r[::-1], Lp_r[::-1]
    k = int(np.argmin(np.abs(x)))
    Lm = Lm - Lm[k]
    Lp = Lp - Lp[k]
    Wx = np.exp(Lm + Lp) * (zm - zp)
    W = float(Wx[k])
    if not W > 0:
        raise NumericFailure("principal solutions are not independent (W <= 0)")
    drift = float(np.max(np.abs(Wx / W - 1.0)))
    if drift > 1e-4:
        raise NumericFailure(f"Wronskian drifts by {drift:.2e} across the window")
    return GreenFunction(grid, zm, zp, Lm, Lp, W, drift)


def _interior_indices(grid: Grid, frac: float = 0.5, max_nodes: int = 600) -> np.ndarray:
    idx = np.flatnonzero(np.abs(grid.nodes) <= frac * grid.truncation_radius)
    if idx.size > max_nodes:
        idx = idx[np.linspace(0, idx.size - 1, max_nodes).round().astype(int)]
    return idx


def verify_green_bounds(G: GreenFunction, geo: Geometry, frac: float = 0.5) -> dict:
    """Check the diagonal band and both exponential envelopes on interior pairs.

    Margins are relative: ``(bound - Gamma)/bound`` for upper bounds and
    ``(Gamma - bound)/bound`` for lower bounds; a negative margin is a
    violation.  For the lower envelope the largest ``|x - t|`` up to which
    it holds is also reported.
    """
    idx = _interior_indices(G.grid, frac)
    x = G.grid.nodes[idx]
    rho = G.rho()[idx]
    d = geo.d.values[idx]
    diag_lo = 2 ** -1.5 * d
    diag_hi = 2 ** -0.5 * d
    gam = G.matrix(idx)
    sep = np.abs(x[:, None] - x[None, :])
    A, B = geo.A, geo.B
    upper = B * _SQRT2 * np.exp(-(2 ** -1.5) * sep / B)
    lower = 2 ** -1.5 * A * np.exp(-(2 ** -2.5) * sep / A)
    up_m = (upper - gam) / upper
    lo_m = (gam - lower) / lower
    bad = lo_m < 0
    holds_to = float(sep[bad].min()) if bad.any() else float(sep.max())
    sym = float(np.max(np.abs(gam - gam.T) / gam))
    return {
        "diagonal_lower_margin": float(np.min((rho - diag_lo) / diag_lo)),
        "diagonal_upper_margin": float(np.min((diag_hi - rho) / diag_hi)),
        "upper_envelope_margin": float(up_m.min()),
        "lower_envelope_margin": float(lo_m.min()),
        "lower_envelope_holds_below": holds_to,
        "symmetry_error": sym,
        "positive": bool(np.all(gam > 0)),
        "pairs": int(idx.size ** 2),
    }


def _sweeps(G: GreenFunction, r: np.ndarray, decay: Decay) -> np.ndarray:
    h = G.grid.cells
    a_fwd = np.diff(G.log_u_minus)
    a_bwd = (G.log_u_plus[:-1] - G.log_u_plus[1:])[::-1]
    start_l = _edge_tail(r[0], G.z_minus[0], decay)
    start_r = _edge_tail(r[-1], -G.z_plus[-1], decay)
    fwd = exp_sweep(h, a_fwd, r, start_l)
    bwd = exp_sweep(h[::-1], a_bwd, r[::-1], start_r)[::-1]
    return -G.rho() * (fwd + bwd)


def second_order_residual(y: GridFunction, q0_vals: np.ndarray, src: np.ndarray, frac: float = 0.5) -> float:
    """``max |D2 y - q0 y - <src>|`` on the inner part of the window.

    ``D2`` is the three-point second difference and ``<src>`` the matching
    hat-weighted average ``(s[i-1] + 4 s[i] + s[i+1]) / 6`` of the source,
    so jumps in the data do not register as O(1) residuals.
    """
    x, v = y.x, y.values
    h1 = x[1:-1] - x[:-2]
    h2 = x[2:] - x[1:-1]
    d2 = 2.0 * (v[:-2] / (h1 * (h1 + h2)) - v[1:-1] / (h1 * h2) + v[2:] / (h2 * (h1 + h2)))
    avg = (src[:-2] + 4.0 * src[1:-1] + src[2:]) / 6.0
    res = np.abs(d2 - q0_vals[1:-1] * v[1:-1] - avg)
    keep = np.abs(x[1:-1]) <= frac * y.grid.truncation_radius
    return float(res[keep].max()) if keep.any() else 0.0


def _residual_scale(y: GridFunction, q0_vals: np.ndarray, src: np.ndarray) -> float:
    h = y.grid.max_cell
    return h * h * (float(np.max(np.abs(q0_vals))) + 1.0) * (y.sup() * (1.0 + float(np.max(q0_vals))) + float(np.max(np.abs(src))))


def solve_linear(G: GreenFunction, g: GridFunction, q0=None, check: bool = True) -> GridFunction:
    """Decaying solution of ``y'' - q0 y = g``: ``y = -int Gamma(., t) g(t) dt``.

    Product integration with ``g`` linear between nodes.  With ``q0`` given
    and ``check`` on, the discrete residual is compared against a grid
    scaled tolerance and a gross failure raises :class:`NumericFailure`.
    """
    if g.grid is not G.grid and not np.array_equal(g.grid.nodes, G.grid.nodes):
        raise ConfigError("g and the Green function live on different grids")
    y = GridFunction(G.grid, _sweeps(G, g.values, g.decay), _solution_decay(G, g.decay))
    if q0 is not None and check:
        qv = _q0_values(_as_expr(q0), G.grid.nodes)
        res = second_order_residual(y, qv, g.values)
        if res > 100 * max(_residual_scale(y, qv, g.values), 1e-12):
            raise NumericFailure(f"discretization failure: residual {res:.3g}")
    return y


def _solution_decay(G: GreenFunction, decay: Decay) -> Decay:
    rate = float(min(G.z_minus[0], -G.z_plus[-1]))
    if decay.kind == "compact":
        return Decay.exponential(rate)
    if decay.kind == "exponential":
        return Decay.exponential(min(rate, decay.param))
    return decay


def v_norm(v, x_nodes, y_window: float = 10.0, n: int = 101) -> float:
    """Sampled ``sup_x sup_{y != z} |v(x,y) - v(x,z)| / |y - z|``."""
    v = _as_expr(v)
    x = np.asarray(x_nodes, dtype=float)
    at0 = exprlang.evaluate(v, x=x, y=np.zeros_like(x))
    if np.any(at0 != 0):
        k = int(np.argmax(at0 != 0))
        raise ConfigError(f"v(x, 0) = 0 is required; v({x[k]!r}, 0) = {at0[k]!r}")
    y = np.linspace(-y_window, y_window, n)
    i, j = np.triu_indices(n, 1)
    best = 0.0
    for chunk in np.array_split(x, max(1, x.size // 256)):
        vals = exprlang.evaluate(v, x=chunk[:, None], y=y[None, :])
        q = np.abs(vals[:, i] - vals[:, j]) / np.abs(y[i] - y[j])
        best = max(best, float(q.max()))
    return best


@dataclass(frozen=True, eq=False)
class Potential:
    q0: exprlang.Expr
    v: exprlang.Expr
    v_norm: float

    @classmethod
    def build(cls, q0, v, grid: Grid, y_window: float = 10.0, n: int = 101) -> "Potential":
        """Parse, check ``q0 >= 0`` and ``v(x, 0) = 0`` on the grid, sample ``|||v|||``."""
        q0, v = _as_expr(q0), _as_expr(v)
        if np.any(_q0_values(q0, grid.nodes) < 0):
            raise ConfigError("q0 must be nonnegative on the grid")
        stride = max(1, grid.n // 400)
        return cls(q0, v, v_norm(v, grid.nodes[::stride], y_window, n))


@dataclass(frozen=True, eq=False)
class SecondOrderSolution:
    y: GridFunction
    iterations: int
    increments: list = field(repr=False)
    contraction_rate: float
    contraction_bound: float
    residual_inf: float
    kappaB: float
    nuB: float
    nu_condition: bool


def solve_nonlinear(
    pot: Potential,
    G: GreenFunction,
    geo: Geometry,
    g: GridFunction,
    tol: float = 1e-10,
    max_iter: int = 500,
) -> SecondOrderSolution:
    """Picard iteration ``y <- S[g + v(., y)]`` from ``y = S[g]``.

    Requires the certificate ``|||v||| kappa(B) < 1``; the weaker
    condition ``|||v||| < 1/nu(B)`` is reported alongside.
    """
    cert = pot.v_norm * geo.kappaB
    cond_nu = pot.v_norm < 1.0 / geo.nuB
    if not cert < 1.0:
        raise ContractionError(
            f"contraction certificate failed: |||v|||*kappa(B) = {cert:.4g} >= 1 "
            f"(kappa(B) = {geo.kappaB:.4g}; nu(B) = {geo.nuB:.4g}, |||v|||*nu(B) = {pot.v_norm * geo.nuB:.4g}, "
            f"|||v||| < 1/nu(B) {'holds' if cond_nu else 'fails'})"
        )
    x = G.grid.nodes
    qv = _q0_values(pot.q0, x)

    def src_of(yv):
        return g.values + exprlang.evaluate(pot.v, x=x, y=yv)

    y = _sweeps(G, g.values, g.decay)
    incs: list[float] = []
    for _ in range(max_iter):
        y_new = _sweeps(G, src_of(y), g.decay)
        inc = float(np.max(np.abs(y_new - y)))
        incs.append(inc)
        y = y_new
        if inc <= tol:
            break
    else:
        raise NumericFailure(f"Picard iteration did not converge (last increment {incs[-1]:.3g})")
    sol = GridFunction(G.grid, y, _solution_decay(G, g.decay))
    scale = max(incs) if incs else 0.0
    ratios = [b / a for a, b in zip(incs, incs[1:]) if a > 1e3 * np.finfo(float).eps * max(scale, 1e-300)]
    return SecondOrderSolution(
        y=sol,
        iterations=len(incs),
        increments=incs,
        contraction_rate=max(ratios) if ratios else 0.0,
        contraction_bound=cert,
        residual_inf=second_order_residual(sol, qv, src_of(y)),
        kappaB=geo.kappaB,
        nuB=geo.nuB,
        nu_condition=bool(cond_nu),
    )


def kolmogorov_check(y: GridFunction, p: float) -> dict:
    """``|y'|_p^2 <= 16 |y|_p |y''|_p`` by finite differences."""
    d1 = differentiate(y, 1)
    d2 = differentiate(y, 2)
    lhs = lp_norm(d1, p) ** 2
    rhs = 16.0 * lp_norm(y, p) * lp_norm(d2, p)
    return {"lhs": lhs, "rhs": rhs, "holds": bool(lhs <= rhs * (1 + 1e-6))}


def _young_sup(B: float, beta: float) -> float:
    # sup of |s|_p over p in [1, beta/(beta-1))
    top = math.inf if beta == 1 else beta / (beta - 1)
    ps = np.linspace(1.0, min(top, 1e3), 2001)[:-1] if math.isfinite(top) else np.geomspace(1.0, 1e3, 2001)
    out = max(s_kernel_norm(B, p) for p in ps)
    if not math.isfinite(top):
        out = max(out, s_kernel_norm(B, math.inf))
    return out


def wellposed_report_2(
    pot: Potential,
    G: GreenFunction,
    geo: Geometry,
    batch: Sequence[GridFunction],
    N,
    beta: float,
    tol: float = 1e-10,
) -> dict:
    """Empirical constants for ``||S[g]||_{L(N)} <= C ||g||_{L_beta}``.

    ``N`` is an :class:`NFunction` or an ``EosFunction``.  Also runs the
    Young-inequality step on the linear part, the ``W2(L(N))`` ratios and
    the Kolmogorov inequality on every solution.
    """
    if not isinstance(N, NFunction):
        N = NFunction.eos(N)
        if beta < N.params["eos"].alpha:
            raise ConfigError("beta must be >= alpha for an exponential Orlicz space")
    sols = [solve_nonlinear(pot, G, geo, g, tol) for g in batch]
    ys = [s.y for s in sols]
    young = _young_sup(geo.B, beta)
    ratios, w2, diff, young_rows, kolm = [], [], [], [], []
    for g, y in zip(batch, ys):
        gb = lp_norm(g, beta)
        if gb == 0:
            continue
        ratios.append(luxemburg_norm(y, N) / gb)
        w2.append(orlicz_sobolev_norm(y, N, 2) / gb)
        lin = solve_linear(G, g)
        for r in (beta, 2 * beta):
            young_rows.append({"r": r, "lhs": lp_norm(lin, r), "rhs": gb * young})
        for p in (1.0, 2.0, 4.0):
            kolm.append(kolmogorov_check(y, p)["holds"])
    for i in range(len(batch)):
        for j in range(i + 1, len(batch)):
            dg = lp_norm(batch[i] - batch[j], beta)
            if dg > 0:
                diff.append(luxemburg_norm(ys[i] - ys[j], N) / dg)
    allr = ratios + diff
    q0_sup = float(np.max(_q0_values(pot.q0, G.grid.nodes)))
    return {
        "ratios": ratios,
        "difference_ratios": diff,
        "C4_empirical": max(allr) if allr else 0.0,
        "w2_ratios": w2,
        "w2_C4_empirical": max(w2) if w2 else 0.0,
        "q0_sup_sampled": q0_sup,
        "young_sup_s": young,
        "young_checks": young_rows,
        "young_holds": all(r["lhs"] <= r["rhs"] * (1 + 1e-9) for r in young_rows),
        "kolmogorov_holds": all(kolm),
        "iterations": [s.iterations for s in sols],
        "contraction_rates": [s.contraction_rate for s in sols],
        "label": "sampled certificate",
    }
