"""Exception hierarchy shared by all modules.

The CLI maps these onto exit codes: hypothesis violations are a correct
negative result (1), configuration problems are usage errors (2) and
everything else numeric is a failure (3).
"""


class OrliczOdeError(Exception):
    """Base class for all package errors."""


class ConfigError(OrliczOdeError, ValueError):
    """Invalid input data or configuration."""


class HypothesisViolation(OrliczOdeError):
    """A theorem hypothesis (monotonicity band, contraction, ...) fails."""


class NumericFailure(OrliczOdeError, ArithmeticError):
    """A numerical procedure did not produce a trustworthy answer."""


class ContractionError(HypothesisViolation):
    """The fixed-point map is not certified to be a contraction."""
