"""Ill-posedness of the linear problem between Lebesgue spaces.

The data ``g(x) = (x log^2 x)^(-1/beta)`` for ``x >= 2`` lies in ``L_beta``
but not in any ``L_(beta-delta)``, and the decaying solution inherits the
same tail, ``|y(x)| ~ g(x) int Gamma(x, t) dt``.  On a window the
divergence shows up as truncated norms that keep growing with the radius.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import exprlang
from .errors import ConfigError, HypothesisViolation
from .realline import Decay, Grid, GridFunction, lp_norm
from .sturm import d_profile, green_build, solve_linear

__all__ = ["IllposedConfig", "counterexample_g", "demonstrate", "SIGN_NOTE"]

SIGN_NOTE = (
    "data exponent is -1/beta: the printed +1/beta gives data that is unbounded and "
    "outside L_beta, while the stated asymptotics of the solution require -1/beta"
)


@dataclass(frozen=True)
class IllposedConfig:
    beta: float = 2.0
    delta: float = 0.5
    alpha: float = 1.2
    q0: str = "1"
    radii: tuple = (50.0, 100.0, 200.0, 400.0)
    cell: float = 0.05
    probe: float = 100.0
    inner: float = 10.0

    def __post_init__(self):
        if not self.alpha > 1:
            raise ConfigError("alpha must exceed 1")
        if not self.beta > self.alpha:
            raise ConfigError("beta must exceed alpha")
        if not 0 < self.delta < self.beta - self.alpha:
            raise ConfigError("delta must lie in (0, beta - alpha)")
        r = tuple(float(v) for v in self.radii)
        if len(r) < 2 or any(b <= a for a, b in zip(r, r[1:])) or r[0] <= 2:
            raise ConfigError("radii must be increasing and larger than 2")
        if not self.cell > 0:
            raise ConfigError("cell must be positive")
        object.__setattr__(self, "radii", r)


def counterexample_g(beta: float, grid: Grid) -> GridFunction:
    """``(x log^2 x)^(-1/beta)`` for ``x >= 2``, zero below."""
    if not beta > 1:
        raise ConfigError("beta must exceed 1")
    x = grid.nodes
    out = np.zeros_like(x)
    m = x >= 2.0
    out[m] = (x[m] * np.log(x[m]) ** 2) ** (-1.0 / beta)
    return GridFunction(grid, out, Decay.power(1.0 / beta))


@dataclass
class RadiusRow:
    radius: float
    nodes: int
    norm_beta: float
    norm_lower: float
    data_norm_beta: float
    data_norm_lower: float
    log_ratio_min: float
    log_ratio_max: float
    tail_share: float
    probe_ratio: float | None = None


@dataclass
class IllposedReport:
    config: IllposedConfig
    rows: list = field(default_factory=list)
    header: str = SIGN_NOTE

    @property
    def beta_increments(self) -> list[float]:
        v = [r.norm_beta for r in self.rows]
        return [(b - a) / a if a > 0 else 0.0 for a, b in zip(v, v[1:])]

    @property
    def lower_increments(self) -> list[float]:
        v = [r.norm_lower for r in self.rows]
        return [(b - a) / a if a > 0 else 0.0 for a, b in zip(v, v[1:])]

    @property
    def probe_ratio(self) -> float | None:
        vals = [r.probe_ratio for r in self.rows if r.probe_ratio is not None]
        return vals[-1] if vals else None

    def to_dict(self) -> dict:
        return {
            "header": self.header,
            "beta": self.config.beta,
            "delta": self.config.delta,
            "rows": [r.__dict__ for r in self.rows],
            "beta_increments": self.beta_increments,
            "lower_increments": self.lower_increments,
            "probe_ratio": self.probe_ratio,
        }


def _window_share(y: GridFunction, p: float, lo: float) -> float:
    # fraction of |y|_p^p carried by x >= lo
    x = y.x
    a = np.abs(y.values) ** p
    total = np.trapezoid(a, x)
    if total == 0:
        return 0.0
    m = x >= lo
    return float(np.trapezoid(a[m], x[m]) / total)


def demonstrate(cfg: IllposedConfig, data=None) -> IllposedReport:
    """Solve ``y'' - q0 y = g`` on each window and tabulate the truncated norms.

    ``data`` overrides the counterexample (a callable ``grid -> GridFunction``).
    """
    q0 = exprlang.parse(cfg.q0)
    A = float(np.min(d_profile(q0, np.linspace(-cfg.radii[-1], cfg.radii[-1], 201), 4 * cfg.radii[-1])))
    if not A > 0:
        raise HypothesisViolation("inf d(x) must be positive")
    lower = cfg.beta - cfg.delta
    rep = IllposedReport(cfg)
    for X in cfg.radii:
        n = 4 * int(math.ceil(X / cfg.cell / 2)) + 1
        grid = Grid.uniform(X, n)
        g = data(grid) if data is not None else counterexample_g(cfg.beta, grid)
        G = green_build(q0, grid)
        y = solve_linear(G, g, q0)
        x = grid.nodes
        band = (x >= X / 4) & (x <= X / 2) & (g.values > 0)
        ya = np.abs(y.values[band])
        if band.any() and np.all(ya > 0):
            lr = np.log(ya) / np.log(g.values[band])
            lr_min, lr_max = float(lr.min()), float(lr.max())
        else:
            lr_min = lr_max = math.nan
        probe = None
        if X >= 2 * cfg.probe:
            k = int(np.argmin(np.abs(x - cfg.probe)))
            row = G.at_nodes(k, np.arange(grid.n))
            mass = float(np.trapezoid(row, x))
            gk = g.values[k]
            probe = float(abs(y.values[k]) / (gk * mass)) if gk > 0 else math.nan
        rep.rows.append(
            RadiusRow(
                radius=X,
                nodes=n,
                norm_beta=lp_norm(y, cfg.beta),
                norm_lower=lp_norm(y, lower),
                data_norm_beta=lp_norm(g, cfg.beta),
                data_norm_lower=lp_norm(g, lower),
                log_ratio_min=lr_min,
                log_ratio_max=lr_max,
                tail_share=_window_share(y, lower, cfg.inner),
                probe_ratio=probe,
            )
        )
    return rep
