"""Classical variable selectors used as comparison methods.

Four families: partial-t stepwise testing (forward and backward),
exhaustive best-subset search under AIC or BIC, and the LASSO solved
by cyclic coordinate descent with a cross-validated penalty.

All of them run on standardized data and fit without an intercept,
through the same estimator surface as the neural selector.
"""

from __future__ import annotations

import itertools
import math
import warnings

import numpy as np
from scipy import stats

from ._validation import as_float_matrix, as_float_vector
from .exceptions import (
    ConfigInvalid,
    NoConvergence,
    RankDeficient,
    TooManyPredictorsForExhaustive,
)
from .ols import StandardizedDataset, fit_ols_no_intercept
from .selection import BaseSelector

# Hard cap for the 2^p enumeration.
EXHAUSTIVE_MAX_P = 20

# Coordinate-descent coefficients below this magnitude count as zero
# when forming the selection mask.
LASSO_ZERO_TOL = 1e-8

# Exhaustive-search score used in place of -inf when a subset fits
# perfectly (rss == 0) and the log-likelihood degenerates.
RSS_ZERO_SENTINEL = -1e300


def _subset_std(std, cols):
    """View of a StandardizedDataset restricted to the given columns."""
    cols = list(cols)
    return StandardizedDataset(
        zx=std.zx[:, cols],
        zy=std.zy,
        x_means=std.x_means[cols],
        x_sds=std.x_sds[cols],
        y_mean=std.y_mean,
        y_sd=std.y_sd,
    )


def _p_values(fit):
    """Two-sided p-values of the fit's t-statistics."""
    return 2.0 * stats.t.sf(np.abs(fit.t_values), fit.df_resid)


class ForwardSelector(BaseSelector):
    """Forward stepwise selection on partial-t significance.

    Starting from the empty model, each step fits every candidate added
    to the current set and admits the one with the smallest partial-t
    p-value, provided it is below ``alpha_enter``.  Ties go to the
    lowest column index.  Stops when no candidate qualifies or after
    ``max_steps`` additions.
    """

    method_name = "forward"

    def __init__(self, alpha_enter=0.05, max_steps=None):
        self.alpha_enter = alpha_enter
        self.max_steps = max_steps

    def _select(self, std):
        if not 0.0 < self.alpha_enter < 1.0:
            raise ConfigInvalid("alpha_enter must be in (0, 1)")
        p = std.n_predictors
        cap = p if self.max_steps is None else min(self.max_steps, p)
        included = []
        excluded = list(range(p))
        while excluded and len(included) < cap:
            best_j = None
            best_pv = np.inf
            for j in excluded:
                cols = included + [j]
                fit = fit_ols_no_intercept(_subset_std(std, cols))
                pv = float(_p_values(fit)[-1])
                if pv < best_pv:
                    best_pv = pv
                    best_j = j
            if best_pv < self.alpha_enter:
                included.append(best_j)
                excluded.remove(best_j)
            else:
                break
        mask = np.zeros(p, dtype=bool)
        mask[included] = True
        return mask, None


class BackwardSelector(BaseSelector):
    """Backward elimination on partial-t significance.

    Starting from the full model, repeatedly drops the predictor with
    the largest p-value while that p-value is at least
    ``alpha_remove``.  Ties go to the lowest column index.
    """

    method_name = "backward"

    def __init__(self, alpha_remove=0.05, max_steps=None):
        self.alpha_remove = alpha_remove
        self.max_steps = max_steps

    def _select(self, std):
        if not 0.0 < self.alpha_remove < 1.0:
            raise ConfigInvalid("alpha_remove must be in (0, 1)")
        p = std.n_predictors
        cap = p if self.max_steps is None else min(self.max_steps, p)
        included = list(range(p))
        for _ in range(cap):
            if not included:
                break
            fit = fit_ols_no_intercept(_subset_std(std, included))
            pv = _p_values(fit)
            worst = int(np.argmax(pv))
            if pv[worst] >= self.alpha_remove:
                included.pop(worst)
            else:
                break
        mask = np.zeros(p, dtype=bool)
        mask[included] = True
        return mask, None


def _information_score(n, rss, k, criterion):
    """Gaussian concentrated-likelihood score, smaller is better."""
    if rss <= 0.0:
        warnings.warn("zero RSS in exhaustive search; using sentinel score")
        base = RSS_ZERO_SENTINEL
    else:
        base = n * math.log(rss / n)
    penalty = 2.0 * k if criterion == "aic" else k * math.log(n)
    return base + penalty


class ExhaustiveSelector(BaseSelector):
    """Best-subset search scoring every one of the 2^p subsets.

    The empty subset participates with ``rss = ||zy||^2``.  Iteration
    runs in (size, lexicographic) order and keeps the first strict
    improvement, so score ties resolve toward fewer predictors and then
    lexicographically smaller index sets.
    """

    def __init__(self, criterion="aic"):
        self.criterion = criterion

    @property
    def method_name(self):
        return self.criterion

    def _select(self, std):
        if self.criterion not in ("aic", "bic"):
            raise ConfigInvalid(f"unknown criterion {self.criterion!r}")
        zx, zy = std.zx, std.zy
        n, p = zx.shape
        if p > EXHAUSTIVE_MAX_P:
            raise TooManyPredictorsForExhaustive(
                f"p={p} would require {2 ** p} fits; cap is p={EXHAUSTIVE_MAX_P}"
            )
        yy = float(zy @ zy)
        best_score = None
        best_subset = ()
        for k in range(0, p + 1):
            for subset in itertools.combinations(range(p), k):
                if k == 0:
                    rss = yy
                else:
                    xs = zx[:, list(subset)]
                    gram = xs.T @ xs
                    xty = xs.T @ zy
                    try:
                        beta = np.linalg.solve(gram, xty)
                    except np.linalg.LinAlgError as exc:
                        raise RankDeficient(f"singular subset {subset}") from exc
                    rss = yy - float(xty @ beta)
                score = _information_score(n, max(rss, 0.0), k, self.criterion)
                if best_score is None or score < best_score:
                    best_score = score
                    best_subset = subset
        mask = np.zeros(p, dtype=bool)
        mask[list(best_subset)] = True
        self.score_ = best_score
        return mask, None


def soft_threshold(rho, lam):
    """Proximal map of ``lam * |.|``: shrink toward zero by ``lam``."""
    if rho > lam:
        return rho - lam
    if rho < -lam:
        return rho + lam
    return 0.0


def lasso_objective(zx, zy, lam, beta):
    """``(1/n) ||zy - zx beta||^2 + lam * ||beta||_1``."""
    r = zy - zx @ beta
    return float(r @ r) / zx.shape[0] + lam * float(np.sum(np.abs(beta)))


def lambda_max(zx, zy):
    """Smallest penalty for which the all-zero solution is stationary.

    Uses the same per-column arithmetic as the coordinate-descent update
    so that ``lam >= lambda_max`` keeps every coordinate at exactly zero.
    """
    zx = as_float_matrix(zx, "zx")
    zy = as_float_vector(zy, "zy")
    n, p = zx.shape
    return max(
        abs(2.0 * float(np.ascontiguousarray(zx[:, j]) @ zy) / n)
        for j in range(p)
    )


def default_lambda_grid(zx, zy, num=100, span=1e-4):
    """Log-spaced descending grid from lambda_max down to lambda_max*span."""
    if num < 2:
        raise ConfigInvalid(f"grid needs at least 2 points, got num={num}")
    if not 0.0 < span < 1.0:
        raise ConfigInvalid(f"span must be in (0, 1), got {span}")
    top = lambda_max(zx, zy)
    if top <= 0.0:
        raise ConfigInvalid("lambda_max is zero; response is orthogonal to every column")
    return np.geomspace(top, top * span, num)


def lasso_coordinate_descent(zx, zy, lam, warm_start=None, tol=1e-7, max_iter=1000,
                             history=False):
    """Cyclic coordinate descent for the penalized objective.

    Minimizes ``(1/n)||zy - zx beta||^2 + lam ||beta||_1``.  Each pass
    exactly minimizes one coordinate at a time via soft-thresholding;
    convergence is declared when the largest coordinate change in a
    full cycle drops below ``tol``.  With ``history=True`` the return
    value is ``(beta, objectives)`` with one objective value recorded
    after every full cycle.
    """
    zx = as_float_matrix(zx, "zx")
    zy = as_float_vector(zy, "zy")
    if lam < 0:
        raise ConfigInvalid("lambda must be >= 0")
    if tol <= 0:
        raise ConfigInvalid("tol must be > 0")
    n, p = zx.shape
    beta = np.zeros(p) if warm_start is None else np.asarray(warm_start, dtype=float).copy()
    if beta.shape != (p,):
        raise ConfigInvalid(f"warm start has shape {beta.shape}, expected ({p},)")
    resid = zy - zx @ beta
    scale = 2.0 * np.sum(zx * zx, axis=0) / n   # a_j = (2/n) x_j'x_j
    cols = [np.ascontiguousarray(zx[:, j]) for j in range(p)]
    objectives = []
    for _ in range(max_iter):
        biggest = 0.0
        for j in range(p):
            if scale[j] == 0.0:
                continue
            old = beta[j]
            rho = 2.0 * float(cols[j] @ resid) / n + scale[j] * old
            new = soft_threshold(rho, lam) / scale[j]
            if new != old:
                resid += cols[j] * (old - new)
                beta[j] = new
                delta = abs(new - old)
                if delta > biggest:
                    biggest = delta
        if history:
            objectives.append(lasso_objective(zx, zy, lam, beta))
        if biggest < tol:
            return (beta, objectives) if history else beta
    raise NoConvergence(max_iter)


class LassoSelector(BaseSelector):
    """LASSO with the penalty chosen by seeded k-fold cross-validation.

    Solves down a descending ``lambda_grid`` with warm starts, inside
    each training fold and finally on the full data at the winning
    penalty.  A variable is selected when its refit coefficient exceeds
    ``LASSO_ZERO_TOL`` in magnitude.

    Attributes
    ----------
    lambda_ : float
        Penalty minimizing mean validation MSE (largest such value).
    coef_ : ndarray of shape (p,)
        Refit coefficients at ``lambda_``.
    """

    method_name = "lasso"

    def __init__(self, lambda_grid=None, folds=10, max_iter=1000, tol=1e-7, seed=0):
        self.lambda_grid = lambda_grid
        self.folds = folds
        self.max_iter = max_iter
        self.tol = tol
        self.seed = seed

    def _select(self, std):
        zx, zy = std.zx, std.zy
        n = zx.shape[0]
        if not 2 <= self.folds <= n:
            raise ConfigInvalid(f"folds must be in [2, n={n}]")
        if self.lambda_grid is None:
            grid = default_lambda_grid(zx, zy)
        else:
            grid = np.asarray(self.lambda_grid, dtype=float)
            if grid.ndim != 1 or grid.size < 1 or np.any(grid < 0):
                raise ConfigInvalid("lambda_grid must be 1-D and nonnegative")
            if grid.size > 1 and np.any(np.diff(grid) >= 0):
                raise ConfigInvalid("lambda_grid must be strictly descending")

        rng = np.random.default_rng(self.seed)
        fold_of = np.array_split(rng.permutation(n), self.folds)
        mse = np.zeros((self.folds, grid.size))
        for f, val_idx in enumerate(fold_of):
            train_idx = np.setdiff1d(np.arange(n), val_idx)
            xt, yt = zx[train_idx], zy[train_idx]
            xv, yv = zx[val_idx], zy[val_idx]
            beta = None
            for gi, lam in enumerate(grid):
                beta = lasso_coordinate_descent(
                    xt, yt, lam, warm_start=beta, tol=self.tol, max_iter=self.max_iter
                )
                err = yv - xv @ beta
                mse[f, gi] = float(err @ err) / err.size
        best_gi = int(np.argmin(mse.mean(axis=0)))

        beta = None
        for lam in grid[: best_gi + 1]:
            beta = lasso_coordinate_descent(
                zx, zy, lam, warm_start=beta, tol=self.tol, max_iter=self.max_iter
            )
        self.lambda_ = float(grid[best_gi])
        self.coef_ = beta.copy()
        return np.abs(beta) > LASSO_ZERO_TOL, None
