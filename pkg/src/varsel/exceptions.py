"""Exception types raised across the package.

Everything derives from :class:`VarselError` so callers can catch one
type at the CLI boundary.  Data problems and config problems are kept
distinct because the former depend on the sample and the latter are
programming errors.
"""

from __future__ import annotations


class VarselError(Exception):
    """Base class for all errors raised by this package."""


class ConfigInvalid(VarselError, ValueError):
    """A configuration object or argument is out of its legal range."""


class DimensionMismatch(VarselError, ValueError):
    """Array shapes do not line up (rows, columns, or layer dims)."""


class LengthMismatch(VarselError, ValueError):
    """Two sequences that must have equal length do not."""


class ConstantColumn(VarselError):
    """A column has zero sample standard deviation and cannot be scaled."""

    def __init__(self, column):
        self.column = column
        super().__init__(f"column {column!r} is constant (zero sample SD)")


class RankDeficient(VarselError):
    """The design matrix is numerically rank deficient."""


class InsufficientDf(VarselError):
    """No residual degrees of freedom: fewer than p + 1 observations."""


class PerfectFit(VarselError):
    """Residual sum of squares is numerically zero; t-values undefined."""


class NonFiniteLoss(VarselError):
    """Training produced a non-finite loss (divergence)."""


class NoConvergence(VarselError):
    """An iterative solver hit its iteration cap before converging."""

    def __init__(self, max_iter, message=None):
        self.max_iter = max_iter
        super().__init__(message or f"no convergence after {max_iter} iterations")


class TooManyPredictors(VarselError):
    """More predictors than the model's padded input width."""

    def __init__(self, p, p_max):
        self.p = p
        self.p_max = p_max
        super().__init__(f"got {p} predictors but the model accepts at most {p_max}")


class TooManyPredictorsForExhaustive(VarselError):
    """Exhaustive subset search refused: 2**p subsets would be too many."""


class FormatError(VarselError):
    """A serialized artifact (corpus or weights file) is malformed."""

    def __init__(self, line, message):
        self.line = line
        super().__init__(f"line {line}: {message}")


class ParseError(VarselError):
    """A CSV cell could not be parsed as a number."""

    def __init__(self, line, column, message=None):
        self.line = line
        self.column = column
        super().__init__(message or f"line {line}, column {column!r}: not a number")


class EmptyFile(VarselError):
    """An input file contains no data rows."""


class NegativeValue(VarselError):
    """A value is negative where a non-negative one is required."""

    def __init__(self, column, row, message=None):
        self.column = column
        self.row = row
        super().__init__(message or f"column {column!r}, row {row}: negative value")


class PipelineEmpty(VarselError):
    """Every predictor was pruned; nothing left to select from."""
