"""The fixed ten-function family used by the verification suites."""

from __future__ import annotations

import numpy as np

from .realline import Decay, Grid, GridFunction, box

__all__ = ["FAMILY_NAMES", "test_family", "smooth_bump"]

FAMILY_NAMES = (
    "gauss",
    "gauss_wide",
    "spike",
    "exp_abs",
    "exp_fast",
    "box_unit",
    "box_tall",
    "cauchy",
    "power_log_tail",
    "sech",
)


def test_family(grid: Grid) -> list[GridFunction]:
    """Gaussians, exponentials, boxes and slowly decaying tails.

    The spike and the tall box are large enough that the exponential piece
    of an ``exp_alpha phi`` N-function is active at the Luxemburg norm.
    """
    x = grid.nodes
    ax = np.abs(x)
    fc = GridFunction.from_callable
    return [
        fc(grid, lambda t: np.exp(-t * t), Decay.exponential(10.0)),
        fc(grid, lambda t: np.exp(-t * t / 8.0), Decay.exponential(1.0)),
        fc(grid, lambda t: 8.0 * np.exp(-((t / 0.1) ** 2)), Decay.exponential(10.0)),
        fc(grid, lambda t: np.exp(-np.abs(t)), Decay.exponential(1.0)),
        fc(grid, lambda t: 0.5 * np.exp(-2.0 * np.abs(t)), Decay.exponential(2.0)),
        box(grid, 0.0, 1.0),
        box(grid, 0.0, 0.1, 6.0),
        fc(grid, lambda t: 1.0 / (1.0 + t * t), Decay.power(2.0)),
        GridFunction(grid, (1.0 + ax) ** -1.5 * np.log(np.e + ax), Decay.power(1.4)),
        fc(grid, lambda t: 1.0 / np.cosh(t), Decay.exponential(1.0)),
    ]


test_family.__test__ = False  # not a pytest test


def smooth_bump(grid: Grid, center: float = 0.0, width: float = 1.0, height: float = 1.0) -> GridFunction:
    """``height * exp(-((x - center)/width)^2)``."""
    return GridFunction.from_callable(
        grid,
        lambda t: height * np.exp(-(((t - center) / width) ** 2)),
        Decay.exponential(1.0 / width),
    )
