"""Orlicz-space well-posedness tools for ODEs on the whole line.

Modules
-------
realline   grids, window functions, quadrature, L_p norms, convolution
exprlang   text expressions for potentials, data and N-functions
orlicz     N-functions, Luxemburg norm, growth-class checks
eos        exponential Orlicz spaces and their moment (G-) norms
ode1       first-order monotone problem
sturm      second-order problem: geometry, Green function, Picard solver
illposed   divergence of truncated L_p norms for slowly decaying data
cli        command-line driver
"""

from .errors import ConfigError, ContractionError, HypothesisViolation, NumericFailure, OrliczOdeError
from .realline import Decay, Grid, GridFunction, lp_norm

__all__ = [
    "ConfigError",
    "ContractionError",
    "HypothesisViolation",
    "NumericFailure",
    "OrliczOdeError",
    "Decay",
    "Grid",
    "GridFunction",
    "lp_norm",
]

__version__ = "0.1.0"
