"""Column standardization and no-intercept least squares.

Every selection method in this package works on z-scored data: each
column of the design matrix and the response is centered and divided by
its sample standard deviation (n - 1 divisor).  After z-scoring, the
intercept of the underlying linear model is identically zero, so the
regression is always fit without one.

The production solver uses a QR factorization; an explicit
normal-equation inverse is reserved for the high-precision oracle in
the test suite.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_triangular

from ._validation import as_float_matrix, as_float_vector, check_same_rows, column_names_of
from .exceptions import ConstantColumn, DimensionMismatch, InsufficientDf, PerfectFit, RankDeficient

# Ratio of smallest to largest |diag(R)| below which the design is
# treated as rank deficient.
RANK_TOL = 1e-10

# rss below this fraction of ||zy||^2 means the fit is numerically
# perfect and t-values are undefined.
PERFECT_FIT_TOL = 1e-12


@dataclass(frozen=True)
class RawDataset:
    """A design matrix and response before any scaling.

    Parameters
    ----------
    x : ndarray of shape (n, p)
        Predictor columns.
    y : ndarray of shape (n,)
        Response.
    column_names : tuple of str
        One name per predictor column, unique.
    """

    x: np.ndarray
    y: np.ndarray
    column_names: tuple

    def __post_init__(self):
        x = as_float_matrix(self.x, "x")
        y = as_float_vector(self.y, "y")
        check_same_rows(x, y)
        n, p = x.shape
        if n < 2:
            raise DimensionMismatch("need at least 2 observations")
        if p < 1:
            raise DimensionMismatch("need at least 1 predictor column")
        names = tuple(self.column_names)
        if len(names) != p:
            raise DimensionMismatch(f"{len(names)} names for {p} columns")
        if len(set(names)) != p:
            raise ValueError("column names must be unique")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "column_names", names)

    @property
    def n_obs(self):
        return self.x.shape[0]

    @property
    def n_predictors(self):
        return self.x.shape[1]


def make_raw_dataset(x, y):
    """Build a :class:`RawDataset` from array-likes, keeping DataFrame column names."""
    xm = as_float_matrix(x, "x")
    return RawDataset(xm, as_float_vector(y, "y"), column_names_of(x, xm.shape[1]))


@dataclass(frozen=True)
class StandardizedDataset:
    """Z-scored design and response, with the scalers needed to invert.

    ``zx`` columns and ``zy`` have zero mean and unit sample SD when
    produced by :func:`standardize`; the dataclass itself does not
    enforce that, so tests can construct ad-hoc instances.
    """

    zx: np.ndarray
    zy: np.ndarray
    x_means: np.ndarray
    x_sds: np.ndarray
    y_mean: float
    y_sd: float

    @property
    def n_obs(self):
        return self.zx.shape[0]

    @property
    def n_predictors(self):
        return self.zx.shape[1]


def standardize(raw: RawDataset) -> StandardizedDataset:
    """Z-score every predictor column and the response.

    Uses the sample standard deviation (n - 1 divisor).  Raises
    :class:`ConstantColumn` if any column, or the response, has zero
    sample SD; such data carries no scale and cannot be standardized.
    """
    x, y = raw.x, raw.y
    means = x.mean(axis=0)
    sds = x.std(axis=0, ddof=1)
    for j, sd in enumerate(sds):
        if sd == 0.0:
            raise ConstantColumn(raw.column_names[j])
    y_mean = float(y.mean())
    y_sd = float(y.std(ddof=1))
    if y_sd == 0.0:
        raise ConstantColumn("y")
    return StandardizedDataset(
        zx=(x - means) / sds,
        zy=(y - y_mean) / y_sd,
        x_means=means,
        x_sds=sds,
        y_mean=y_mean,
        y_sd=y_sd,
    )


def destandardize(std: StandardizedDataset):
    """Invert :func:`standardize`, returning ``(x, y)`` on the original scale."""
    x = std.zx * std.x_sds + std.x_means
    y = std.zy * std.y_sd + std.y_mean
    return x, y


@dataclass(frozen=True)
class OlsFit:
    """No-intercept least-squares fit on standardized data.

    Attributes
    ----------
    beta_hat : ndarray of shape (p,)
        Coefficient estimates.
    se : ndarray of shape (p,)
        Standard errors, ``sqrt(s2 * diag((X'X)^-1))``.
    t_values : ndarray of shape (p,)
        ``beta_hat / se``.
    rss_raw : float
        Residual sum of squares.
    df_resid : int
        Residual degrees of freedom, ``n - p``.
    """

    beta_hat: np.ndarray
    se: np.ndarray
    t_values: np.ndarray
    rss_raw: float
    df_resid: int

    @property
    def s2(self):
        """Residual variance estimate ``rss_raw / df_resid``."""
        return self.rss_raw / self.df_resid


def fit_ols_no_intercept(std: StandardizedDataset) -> OlsFit:
    """Least squares without an intercept, via QR.

    Raises
    ------
    InsufficientDf
        If ``n <= p`` (no residual degrees of freedom).
    RankDeficient
        If the smallest-to-largest ratio of ``|diag(R)|`` falls below
        ``RANK_TOL``.
    PerfectFit
        If the residual sum of squares is numerically zero relative to
        ``||zy||^2``; the t-values would be infinite.
    """
    zx = np.asarray(std.zx, dtype=float)
    zy = np.asarray(std.zy, dtype=float)
    if zx.ndim != 2 or zy.ndim != 1 or zx.shape[0] != zy.shape[0]:
        raise DimensionMismatch("zx must be (n, p) and zy (n,) with matching n")
    n, p = zx.shape
    if n <= p:
        raise InsufficientDf(f"n={n} observations for p={p} predictors")

    q, r = np.linalg.qr(zx, mode="reduced")
    diag = np.abs(np.diag(r))
    if diag.max() == 0.0 or diag.min() / diag.max() < RANK_TOL:
        raise RankDeficient("design matrix is numerically rank deficient")

    beta = solve_triangular(r, q.T @ zy, lower=False)
    resid = zy - zx @ beta
    rss = float(resid @ resid)
    yy = float(zy @ zy)
    if yy == 0.0 or rss < PERFECT_FIT_TOL * yy:
        raise PerfectFit("residuals are numerically zero; t-values undefined")

    s2 = rss / (n - p)
    # diag((X'X)^-1) = row sums of squares of R^{-1}.
    r_inv = solve_triangular(r, np.eye(p), lower=False)
    xtx_inv_diag = np.sum(r_inv * r_inv, axis=1)
    se = np.sqrt(s2 * xtx_inv_diag)
    return OlsFit(
        beta_hat=beta,
        se=se,
        t_values=beta / se,
        rss_raw=rss,
        df_resid=n - p,
    )
