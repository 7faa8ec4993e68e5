"""Functions on a truncated real line.

Everything "on R" in this package lives on a window ``[-X, X]`` sampled by a
:class:`Grid`.  Functions between nodes are taken to be linear.  Operations
that would need values outside the window estimate the missing tail from the
:class:`Decay` tag carried by each :class:`GridFunction` instead of silently
dropping it.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Union

import numpy as np
from scipy import integrate as _spi

from .errors import ConfigError

__all__ = [
    "Decay",
    "Grid",
    "GridFunction",
    "QuadratureConfig",
    "TwoSidedExponential",
    "OneSidedExponential",
    "integrate",
    "integrate_with_tail",
    "truncation_tail",
    "lp_norm",
    "tail_measure",
    "differentiate",
    "convolve",
    "exp_sweep",
    "box",
    "save_csv",
    "load_csv",
]

_DECAY_KINDS = ("compact", "exponential", "power", "unknown")


@dataclass(frozen=True)
class Decay:
    """How a function behaves beyond the window.

    ``exponential`` carries the rate ``lam`` in ``|f(x)| ~ exp(-lam |x|)``,
    ``power`` the exponent ``s`` in ``|f(x)| ~ |x|^-s``.
    """

    kind: str = "unknown"
    param: float | None = None

    def __post_init__(self):
        if self.kind not in _DECAY_KINDS:
            raise ConfigError(f"unknown decay class {self.kind!r}")
        if self.kind in ("exponential", "power"):
            if self.param is None or not self.param > 0:
                raise ConfigError(f"{self.kind} decay needs a positive parameter")

    @classmethod
    def compact(cls) -> "Decay":
        return cls("compact")

    @classmethod
    def exponential(cls, rate: float) -> "Decay":
        return cls("exponential", float(rate))

    @classmethod
    def power(cls, exponent: float) -> "Decay":
        return cls("power", float(exponent))

    @classmethod
    def unknown(cls) -> "Decay":
        return cls("unknown")

    def to_dict(self) -> dict:
        return {"kind": self.kind, "param": self.param}

    @classmethod
    def from_dict(cls, d) -> "Decay":
        if isinstance(d, str):
            return cls(d)
        return cls(d["kind"], d.get("param"))


@dataclass(frozen=True, eq=False)
class Grid:
    """Strictly increasing nodes spanning ``[-X, X]``."""

    nodes: np.ndarray
    truncation_radius: float

    def __post_init__(self):
        x = np.array(self.nodes, dtype=float)
        if x.ndim != 1 or x.size < 3:
            raise ConfigError("a grid needs at least 3 nodes")
        dx = np.diff(x)
        if not np.all(dx > 0):
            raise ConfigError("grid nodes must be strictly increasing")
        X = float(self.truncation_radius)
        if not X > 0:
            raise ConfigError("truncation radius must be positive")
        cell = dx.max()
        if abs(x[0] + X) > cell or abs(x[-1] - X) > cell or abs(x[0] + x[-1]) > cell:
            raise ConfigError("grid must span [-X, X] symmetrically to within one cell")
        x.flags.writeable = False
        object.__setattr__(self, "nodes", x)
        object.__setattr__(self, "truncation_radius", X)

    @classmethod
    def uniform(cls, radius: float, n: int) -> "Grid":
        """Uniform grid with ``n`` nodes on ``[-radius, radius]``.

        Use ``n = 4k + 1`` to keep ``x = 0`` on a Simpson panel boundary.
        """
        return cls(np.linspace(-radius, radius, int(n)), radius)

    @property
    def n(self) -> int:
        return self.nodes.size

    @property
    def cells(self) -> np.ndarray:
        return np.diff(self.nodes)

    @property
    def max_cell(self) -> float:
        return float(self.cells.max())

    def refined(self) -> "Grid":
        """Grid with every cell halved (node count ``2n - 1``)."""
        x = self.nodes
        mid = 0.5 * (x[:-1] + x[1:])
        out = np.empty(2 * x.size - 1)
        out[0::2] = x
        out[1::2] = mid
        return Grid(out, self.truncation_radius)

    def __len__(self):
        return self.n


@dataclass(frozen=True, eq=False)
class GridFunction:
    """Real values at the nodes of a grid, plus a decay tag."""

    grid: Grid
    values: np.ndarray
    decay: Decay = field(default_factory=Decay)

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        if v.shape != (self.grid.n,):
            raise ConfigError(f"expected {self.grid.n} values, got shape {v.shape}")
        bad = np.flatnonzero(~np.isfinite(v))
        if bad.size:
            raise ConfigError(f"non-finite value at node {bad[0]} (x = {self.grid.nodes[bad[0]]!r})")
        v.flags.writeable = False
        object.__setattr__(self, "values", v)

    @classmethod
    def from_callable(cls, grid: Grid, fn: Callable, decay: Decay | None = None) -> "GridFunction":
        return cls(grid, np.asarray(fn(grid.nodes), dtype=float) * np.ones(grid.n), decay or Decay())

    @classmethod
    def zeros(cls, grid: Grid) -> "GridFunction":
        return cls(grid, np.zeros(grid.n), Decay.compact())

    @property
    def x(self) -> np.ndarray:
        return self.grid.nodes

    def with_values(self, values, decay: Decay | None = None) -> "GridFunction":
        return GridFunction(self.grid, values, self.decay if decay is None else decay)

    def __mul__(self, c: float) -> "GridFunction":
        return self.with_values(self.values * float(c))

    __rmul__ = __mul__

    def __neg__(self) -> "GridFunction":
        return self * -1.0

    def __add__(self, other: "GridFunction") -> "GridFunction":
        return self.with_values(self.values + other.values, _weaker(self.decay, other.decay))

    def __sub__(self, other: "GridFunction") -> "GridFunction":
        return self.with_values(self.values - other.values, _weaker(self.decay, other.decay))

    def abs(self) -> "GridFunction":
        return self.with_values(np.abs(self.values))

    def sup(self) -> float:
        return float(np.max(np.abs(self.values)))

    def __call__(self, x):
        """Piecewise-linear interpolation, zero outside the window."""
        return np.interp(x, self.grid.nodes, self.values, left=0.0, right=0.0)


def _weaker(a: Decay, b: Decay) -> Decay:
    order = {"compact": 0, "exponential": 1, "power": 2, "unknown": 3}
    if a.kind == b.kind and a.kind in ("exponential", "power"):
        return Decay(a.kind, min(a.param, b.param))
    return a if order[a.kind] >= order[b.kind] else b


@dataclass(frozen=True)
class QuadratureConfig:
    rule: str = "composite-simpson"
    abs_tol: float = 1e-10
    rel_tol: float = 1e-8

    def __post_init__(self):
        if self.rule not in ("trapezoid", "composite-simpson"):
            raise ConfigError(f"unknown quadrature rule {self.rule!r}")
        if not (self.abs_tol > 0 and self.rel_tol > 0):
            raise ConfigError("quadrature tolerances must be positive")


_DEFAULT_QUAD = QuadratureConfig()


def _quad(x: np.ndarray, v: np.ndarray, rule: str) -> float:
    if rule == "composite-simpson":
        return float(_spi.simpson(v, x=x))
    return float(np.trapezoid(v, x))


def truncation_tail(f: GridFunction, power: float = 1.0) -> float:
    """Estimate of ``int_{|x|>X} |f|^power`` from the decay tag.

    Returns ``inf`` when the tag cannot bound a nonzero edge value.
    """
    edges = np.abs(f.values[[0, -1]]) ** power
    if f.decay.kind == "compact" or not edges.any():
        return 0.0
    X = f.grid.truncation_radius
    if f.decay.kind == "exponential":
        return float(edges.sum() / (power * f.decay.param))
    if f.decay.kind == "power":
        s = f.decay.param * power
        if s <= 1:
            return math.inf
        return float(edges.sum() * X / (s - 1))
    return math.inf


def integrate_with_tail(f: GridFunction, cfg: QuadratureConfig | None = None) -> tuple[float, float]:
    """Window integral of ``f`` and an estimate of the neglected tail mass."""
    cfg = cfg or _DEFAULT_QUAD
    return _quad(f.x, f.values, cfg.rule), truncation_tail(f)


def integrate(f: GridFunction, cfg: QuadratureConfig | None = None) -> float:
    return integrate_with_tail(f, cfg)[0]


def lp_norm(f: GridFunction, p: float, cfg: QuadratureConfig | None = None) -> float:
    """``(int |f|^p)^(1/p)`` on the window; ``max |f|`` for ``p = inf``.

    The integrand is scaled by ``max |f|`` first so large ``p`` does not
    underflow.
    """
    p = float(p)
    if not p >= 1:
        raise ConfigError(f"lp_norm needs p >= 1, got {p}")
    a = np.abs(f.values)
    top = a.max()
    if math.isinf(p) or top == 0:
        return float(top)
    cfg = cfg or _DEFAULT_QUAD
    s = _quad(f.x, (a / top) ** p, cfg.rule)
    return float(top * s ** (1.0 / p))


def log_lp_norm(f: GridFunction, p: float, cfg: QuadratureConfig | None = None) -> float:
    """``log |f|_p``; ``-inf`` for the zero function."""
    n = lp_norm(f, p, cfg)
    return math.log(n) if n > 0 else -math.inf


def tail_measure(f: GridFunction, w):
    """Length of ``{x : |f(x)| > w}`` for the piecewise-linear ``|f|``.

    ``w`` may be a scalar or an array of levels.
    """
    w_arr = np.asarray(w, dtype=float)
    if np.any(w_arr <= 0):
        raise ConfigError("tail_measure needs w > 0")
    a = np.abs(f.values)
    lo = np.minimum(a[:-1], a[1:])
    hi = np.maximum(a[:-1], a[1:])
    h = f.grid.cells
    span = hi - lo
    ramp = span > 0
    safe = np.where(ramp, span, 1.0)
    wf = w_arr.ravel()
    out = np.empty(wf.size)
    step = max(1, 2_000_000 // h.size)
    for s in range(0, wf.size, step):
        wc = wf[s : s + step, None]
        with np.errstate(over="ignore"):
            frac = np.where(ramp, np.clip((hi - wc) / safe, 0.0, 1.0), lo > wc)
        out[s : s + step] = frac @ h
    return float(out[0]) if w_arr.ndim == 0 else out.reshape(w_arr.shape)


def _fd_weights(z: float, x: np.ndarray, m: int) -> np.ndarray:
    # Fornberg's recursion for the weights of the m-th derivative at z.
    n = x.size
    c = np.zeros((n, m + 1))
    c1, c4 = 1.0, x[0] - z
    c[0, 0] = 1.0
    for i in range(1, n):
        mn = min(i, m)
        c2, c5, c4 = 1.0, c4, x[i] - z
        for j in range(i):
            c3 = x[i] - x[j]
            c2 *= c3
            if j == i - 1:
                for k in range(mn, 0, -1):
                    c[i, k] = c1 * (k * c[i - 1, k - 1] - c5 * c[i - 1, k]) / c2
                c[i, 0] = -c1 * c5 * c[i - 1, 0] / c2
            for k in range(mn, 0, -1):
                c[j, k] = (c4 * c[j, k] - k * c[j, k - 1]) / c3
            c[j, 0] = c4 * c[j, 0] / c3
        c1 = c2
    return c[:, m]


def differentiate(f: GridFunction, order: int = 1) -> GridFunction:
    """Finite-difference derivative of order 1 or 2.

    Three-point central stencils inside, one-sided stencils at the ends;
    second order on uniform grids.
    """
    if order not in (1, 2):
        raise ConfigError("order must be 1 or 2")
    x, v = f.x, f.values
    if x.size < order + 2:
        raise ConfigError(f"need at least {order + 2} nodes for order {order}")
    if order == 1:
        d = np.gradient(v, x, edge_order=2)
    else:
        h1 = x[1:-1] - x[:-2]
        h2 = x[2:] - x[1:-1]
        d = np.empty_like(v)
        d[1:-1] = 2.0 * (v[:-2] / (h1 * (h1 + h2)) - v[1:-1] / (h1 * h2) + v[2:] / (h2 * (h1 + h2)))
        d[0] = _fd_weights(x[0], x[:4], 2) @ v[:4]
        d[-1] = _fd_weights(x[-1], x[-4:], 2) @ v[-4:]
    return f.with_values(d, Decay.unknown() if f.decay.kind == "unknown" else f.decay)


def _cell_weights(a: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    # int_0^1 e^{-a u} u du and int_0^1 e^{-a u} (1-u) du, stable for small a
    a = np.asarray(a, dtype=float)
    small = a < 1e-3
    asafe = np.where(small, 1.0, a)
    em = np.exp(-asafe)
    p = np.where(small, 0.5 - a / 3 + a * a / 8 - a ** 3 / 30, (1 - em * (1 + asafe)) / asafe ** 2)
    q = np.where(small, 0.5 - a / 6 + a * a / 24 - a ** 3 / 120, -np.expm1(-asafe) / asafe - p)
    return p, q


def exp_sweep(h: np.ndarray, a: np.ndarray, r: np.ndarray, start: float = 0.0) -> np.ndarray:
    """Left-to-right sweep ``F_i = int_{t <= x_i} exp(-(L(x_i) - L(t))) r(t) dt``.

    ``L`` is nondecreasing and piecewise linear with increment ``a[i]`` on
    cell ``i``; ``r`` is piecewise linear.  Each cell is integrated exactly,
    so the result is exact for piecewise-linear ``r`` and constant rates.
    ``start`` is the contribution from the left of the first node.
    """
    p, q = _cell_weights(a)
    lam = np.exp(-np.asarray(a, dtype=float))
    src = h * (p * r[:-1] + q * r[1:])
    out = np.empty(r.size)
    acc = float(start)
    out[0] = acc
    lam_l = lam.tolist()
    src_l = src.tolist()
    for i in range(len(src_l)):
        acc = lam_l[i] * acc + src_l[i]
        out[i + 1] = acc
    return out


@dataclass(frozen=True)
class TwoSidedExponential:
    """Kernel ``amplitude * exp(-rate |u|)``."""

    amplitude: float
    rate: float

    @property
    def mass(self) -> float:
        return 2.0 * self.amplitude / self.rate


@dataclass(frozen=True)
class OneSidedExponential:
    """Kernel giving ``amplitude * int_x^inf exp(-rate (t - x)) f(t) dt``.

    With ``side="left"`` the integral runs over ``t <= x`` instead.
    """

    rate: float
    amplitude: float = 1.0
    side: str = "right"

    @property
    def mass(self) -> float:
        return self.amplitude / self.rate


Kernel = Union[TwoSidedExponential, OneSidedExponential]


def _edge_tail(edge_value: float, rate: float, decay: Decay) -> float:
    # int_0^inf exp(-rate u) f(edge + u) du, from the decay model
    if decay.kind == "compact" or edge_value == 0.0:
        return 0.0
    if decay.kind == "exponential":
        return edge_value / (rate + decay.param)
    if decay.kind == "power":
        return edge_value / rate
    return 0.0


def _left_sweep(f: GridFunction, rate: float) -> np.ndarray:
    h = f.grid.cells
    start = _edge_tail(f.values[0], rate, f.decay)
    return exp_sweep(h, rate * h, f.values, start)


def _right_sweep(f: GridFunction, rate: float) -> np.ndarray:
    h = f.grid.cells[::-1]
    start = _edge_tail(f.values[-1], rate, f.decay)
    return exp_sweep(h, rate * h, f.values[::-1], start)[::-1]


def convolve(f: GridFunction, kernel: Kernel) -> GridFunction:
    """``(k * f)(x)`` at every node for a closed-form exponential kernel."""
    rate = float(kernel.rate)
    if not rate > 0:
        raise ConfigError("kernel tail is not integrable (rate must be positive)")
    if isinstance(kernel, TwoSidedExponential):
        vals = kernel.amplitude * (_left_sweep(f, rate) + _right_sweep(f, rate))
    elif isinstance(kernel, OneSidedExponential):
        if kernel.side == "right":
            vals = kernel.amplitude * _right_sweep(f, rate)
        elif kernel.side == "left":
            vals = kernel.amplitude * _left_sweep(f, rate)
        else:
            raise ConfigError(f"unknown kernel side {kernel.side!r}")
    else:
        raise ConfigError(f"unsupported kernel {kernel!r}")
    decay = f.decay
    if decay.kind == "exponential":
        decay = Decay.exponential(min(decay.param, rate))
    elif decay.kind == "compact":
        decay = Decay.exponential(rate)
    return GridFunction(f.grid, vals, decay)


def box(grid: Grid, a: float, b: float, height: float = 1.0) -> GridFunction:
    """Indicator of ``[a, b]`` with value ``height/2`` at nodes on the ends.

    With ``a`` and ``b`` on nodes the trapezoid rule integrates it exactly.
    """
    x = grid.nodes
    tol = 1e-12 * max(1.0, grid.truncation_radius)
    v = np.where((x > a + tol) & (x < b - tol), 1.0, 0.0)
    v = np.where(np.abs(x - a) <= tol, 0.5, v)
    v = np.where(np.abs(x - b) <= tol, 0.5, v)
    return GridFunction(grid, height * v, Decay.compact())


def _sidecar(path: Path) -> Path:
    return path.with_suffix(".json")


def save_csv(f: GridFunction, path) -> None:
    """Write ``x,value`` rows plus a JSON sidecar next to ``path``."""
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["x", "value"])
        for xi, vi in zip(f.x, f.values):
            w.writerow([repr(float(xi)), repr(float(vi))])
    meta = {"truncation_radius": f.grid.truncation_radius, "decay_class": f.decay.to_dict()}
    _sidecar(path).write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")


def load_csv(path, decay: Decay | None = None) -> GridFunction:
    """Read a function written by :func:`save_csv`.

    A missing sidecar means the window is the node span and the decay is
    unknown unless ``decay`` is given.
    """
    path = Path(path)
    xs, vs = [], []
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != ["x", "value"]:
            raise ConfigError(f"{path}: expected header 'x,value'")
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            try:
                xs.append(float(row[0]))
                vs.append(float(row[1]))
            except (ValueError, IndexError) as exc:
                raise ConfigError(f"{path}:{lineno}: bad row {row!r}") from exc
    side = _sidecar(path)
    radius = max(abs(xs[0]), abs(xs[-1])) if xs else 0.0
    if side.exists():
        meta = json.loads(side.read_text())
        radius = float(meta.get("truncation_radius", radius))
        if decay is None and "decay_class" in meta:
            decay = Decay.from_dict(meta["decay_class"])
    return GridFunction(Grid(np.array(xs), radius), np.array(vs), decay or Decay())
