"""Variable selectors with a scikit-learn style estimator surface.

Every selector follows the same protocol: ``fit(X, y)`` z-scores the
data, runs the method on the standardized no-intercept regression, and
exposes the chosen variables as the boolean ``support_`` attribute.
``transform(X)`` then keeps the selected columns, so a fitted selector
drops into sklearn pipelines.

The neural selector implements the padded pipeline: standardize, fit
OLS, take the t-statistics, zero-pad them to the network's input
width, run the forward pass, and threshold the first p output scores.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from typing import Optional

import numpy as np
from sklearn.base import BaseEstimator

from .exceptions import ConfigInvalid, TooManyPredictors
from .network import MlpParams, forward, load_weights
from .ols import fit_ols_no_intercept, make_raw_dataset, standardize


def pad_t_vector(t, p_max):
    """Zero-pad a length-p t-vector to length ``p_max``."""
    t = np.asarray(t, dtype=float)
    p = t.shape[0]
    if p > p_max:
        raise TooManyPredictors(p, p_max)
    out = np.zeros(p_max)
    out[:p] = t
    return out


def unpad_mask(padded, p):
    """First ``p`` entries of a padded mask."""
    padded = np.asarray(padded)
    if p > padded.shape[0]:
        raise TooManyPredictors(p, padded.shape[0])
    return padded[:p].copy()


@dataclass(frozen=True)
class SelectorModel:
    """A trained network plus the fixed input width and score threshold."""

    params: MlpParams
    p_max: int
    threshold: float = 0.5

    def __post_init__(self):
        dims = self.params.layer_dims
        if dims[0] != self.p_max or dims[-1] != self.p_max:
            raise ConfigInvalid(
                f"network ends {dims[0]}/{dims[-1]} must both equal p_max={self.p_max}"
            )
        if not 0.0 < self.threshold < 1.0:
            raise ConfigInvalid("threshold must be in (0, 1)")


def load_selector_model(path, threshold=0.5):
    """Read a weight file and wrap it as a :class:`SelectorModel`."""
    params = load_weights(path)
    return SelectorModel(params=params, p_max=params.layer_dims[0], threshold=threshold)


@dataclass(frozen=True)
class SelectionResult:
    """Outcome of one selection call.

    ``scores`` is per-variable network output for the neural method and
    ``None`` for methods that only produce a mask.
    """

    mask: np.ndarray
    scores: Optional[np.ndarray]
    method: str
    elapsed_seconds: float


class BaseSelector(BaseEstimator):
    """Shared fit/transform plumbing for all selection methods."""

    method_name = "base"

    def fit(self, X, y):
        """Standardize the data, run the method, record the chosen mask."""
        started = time.perf_counter()
        raw = make_raw_dataset(X, y)
        std = standardize(raw)
        mask, scores = self._select(std)
        self.support_ = np.asarray(mask, dtype=bool)
        self.scores_ = scores
        self.n_features_in_ = raw.n_predictors
        self.feature_names_in_ = raw.column_names
        self.elapsed_seconds_ = time.perf_counter() - started
        return self

    def _select(self, std):
        raise NotImplementedError

    def _check_fitted(self):
        if not hasattr(self, "support_"):
            raise ConfigInvalid(f"{type(self).__name__} has not been fitted")

    def get_support(self, indices=False):
        self._check_fitted()
        if indices:
            return np.flatnonzero(self.support_)
        return self.support_.copy()

    def transform(self, X):
        """Keep only the selected columns of ``X``."""
        self._check_fitted()
        if hasattr(X, "iloc"):
            return X.iloc[:, np.flatnonzero(self.support_)]
        X = np.asarray(X)
        return X[:, self.support_]

    def fit_transform(self, X, y):
        return self.fit(X, y).transform(X)

    def select(self, X, y):
        """Fit and wrap the outcome as a :class:`SelectionResult`."""
        self.fit(X, y)
        return SelectionResult(
            mask=self.support_.astype(np.uint8),
            scores=None if self.scores_ is None else self.scores_.copy(),
            method=self.method_name,
            elapsed_seconds=self.elapsed_seconds_,
        )


class NeuralNetSelector(BaseSelector):
    """Selection by a trained network reading the OLS t-statistics.

    Parameters
    ----------
    model : SelectorModel
        Trained network with its padded input width and threshold.

    Attributes
    ----------
    support_ : bool ndarray of shape (p,)
        Variables whose score strictly exceeds the threshold.  A score
        exactly at the threshold classifies as inactive.
    scores_ : ndarray of shape (p,)
        Network outputs for the first p coordinates, each in (0, 1).
    t_values_ : ndarray of shape (p,)
        The t-statistics fed to the network.
    """

    method_name = "ann"

    def __init__(self, model):
        self.model = model

    def _select(self, std):
        if std.n_predictors > self.model.p_max:
            raise TooManyPredictors(std.n_predictors, self.model.p_max)
        fit = fit_ols_no_intercept(std)
        self.t_values_ = fit.t_values.copy()
        padded = pad_t_vector(fit.t_values, self.model.p_max)
        out, _ = forward(self.model.params, padded)
        scores = unpad_mask(out, std.n_predictors).astype(float)
        mask = scores > self.model.threshold
        return mask, scores
