"""Simulation studies comparing selectors.

Three studies, mirroring how selection methods are usually judged:

* a confusion study over a grid of sample sizes and noise levels,
  pooling correct-positive and correct-negative rates per cell;
* a power study that walks a single coefficient down a magnitude
  ladder and records how often each method still selects it;
* a timing bench that measures the bare selection step.

Every replicate draws its dataset from a dedicated seed substream, so
results are reproducible and identical no matter how work is batched,
and all methods see exactly the same datasets.
"""

from __future__ import annotations

import csv
import time
from dataclasses import dataclass, field

import numpy as np

from .baselines import (
    BackwardSelector,
    ExhaustiveSelector,
    lambda_max,
    lasso_coordinate_descent,
)
from .corpus import GenConfig, generate_dataset, generate_fixed_beta_dataset
from .exceptions import ConfigInvalid, ConstantColumn, LengthMismatch, PerfectFit, RankDeficient
from .network import forward
from .ols import fit_ols_no_intercept, standardize

MAX_REDRAWS_PER_CELL = 100

# Coefficient magnitudes for the power study, from clearly detectable
# down to absent.
DEFAULT_BETA_LADDER = (1.0, 0.5, 0.25, 0.2, 0.15, 0.1, 0.05, 0.025, 0.01, 0.0)


@dataclass(frozen=True)
class ConfusionRates:
    """Pooled class-conditional rates.

    ``cp`` is the fraction of truly active predictors that were
    selected, ``cn`` the fraction of truly inactive ones that were
    dropped; ``fn = 1 - cp`` and ``fp = 1 - cn``.
    """

    cp: float
    cn: float
    positives: int
    negatives: int

    @property
    def fn(self):
        return 1.0 - self.cp

    @property
    def fp(self):
        return 1.0 - self.cn

    @classmethod
    def from_counts(cls, tp, fn, tn, fp):
        positives = tp + fn
        negatives = tn + fp
        cp = tp / positives if positives else float("nan")
        cn = tn / negatives if negatives else float("nan")
        return cls(cp=cp, cn=cn, positives=positives, negatives=negatives)


def confusion_from_masks(predicted, actual):
    """Pool one or more prediction/truth mask pairs into rates."""
    predicted = np.asarray(predicted).astype(bool)
    actual = np.asarray(actual).astype(bool)
    if predicted.shape != actual.shape:
        raise LengthMismatch(
            f"predicted shape {predicted.shape} != actual shape {actual.shape}"
        )
    predicted = predicted.ravel()
    actual = actual.ravel()
    tp = int(np.sum(predicted & actual))
    fn = int(np.sum(~predicted & actual))
    tn = int(np.sum(~predicted & ~actual))
    fp = int(np.sum(predicted & ~actual))
    return ConfusionRates.from_counts(tp, fn, tn, fp)


@dataclass(frozen=True)
class StudyGrid:
    """Experimental grid for the confusion study."""

    n_levels: tuple = (50, 250, 1000)
    sigma2_levels: tuple = (0.01, 0.1, 0.5)
    reps: int = 1000
    seed: int = 0
    p: int = 10

    def __post_init__(self):
        if not self.n_levels or not self.sigma2_levels:
            raise ConfigInvalid("grid needs at least one n and one sigma2 level")
        if any(s <= 0 for s in self.sigma2_levels):
            raise ConfigInvalid("sigma2 levels must be positive")
        if self.reps < 1:
            raise ConfigInvalid("reps must be >= 1")
        if self.p < 1:
            raise ConfigInvalid("p must be >= 1")
        if min(self.n_levels) < self.p + 5:
            raise ConfigInvalid(
                f"smallest n {min(self.n_levels)} leaves too few degrees of "
                f"freedom for p={self.p}"
            )


def _cell_dataset(p, n, sigma2, seed, rep):
    """Deterministic dataset for one replicate of one grid cell.

    The substream is keyed by (n, sigma2, rep, attempt), so a replicate
    produces the same bytes no matter which order cells run in, and a
    degenerate draw advances only its own attempt counter.
    """
    cfg = GenConfig(count=1, master_seed=seed, p_max=p,
                    n_range=(n, n), sigma2_law=("fixed", float(sigma2)))
    key_s2 = int(round(sigma2 * 1000))
    for attempt in range(MAX_REDRAWS_PER_CELL + 1):
        seq = np.random.SeedSequence(seed, spawn_key=(n, key_s2, rep, attempt))
        rng = np.random.default_rng(seq)
        raw, mask, _ = generate_dataset(p, cfg, rng)
        try:
            fit_ols_no_intercept(standardize(raw))
        except (PerfectFit, RankDeficient, ConstantColumn):
            continue
        return raw, mask
    raise ConfigInvalid(
        f"cell (n={n}, sigma2={sigma2}) rep {rep}: too many degenerate draws"
    )


def _confusion_cell(selectors, grid, n, s2):
    counts = {name: [0, 0, 0, 0] for name in selectors}
    for rep in range(grid.reps):
        raw, mask = _cell_dataset(grid.p, n, s2, grid.seed, rep)
        actual = mask.astype(bool)
        for name, sel in selectors.items():
            got = sel.select(raw.x, raw.y).mask.astype(bool)
            c = counts[name]
            c[0] += int(np.sum(got & actual))
            c[1] += int(np.sum(~got & actual))
            c[2] += int(np.sum(~got & ~actual))
            c[3] += int(np.sum(got & ~actual))
    return counts


def run_confusion_study(selectors, grid, threads=1):
    """Pooled confusion rates per method and grid cell.

    ``selectors`` maps method names to fitted-on-demand selector
    estimators; every method sees the same replicate datasets.  Cells
    may run on ``threads`` workers; each worker gets its own estimator
    clones and every replicate has a fixed seed substream, so the
    result does not depend on the thread count.  Returns
    ``{(method, n, sigma2): ConfusionRates}``.
    """
    cells = [(n, s2) for n in grid.n_levels for s2 in grid.sigma2_levels]
    if threads > 1:
        from concurrent.futures import ThreadPoolExecutor
        from sklearn.base import clone

        def job(cell):
            fresh = {name: clone(sel) for name, sel in selectors.items()}
            return _confusion_cell(fresh, grid, *cell)

        with ThreadPoolExecutor(max_workers=threads) as pool:
            per_cell = list(pool.map(job, cells))
    else:
        per_cell = [_confusion_cell(selectors, grid, *cell) for cell in cells]
    return {(name, n, s2): ConfusionRates.from_counts(*counts[name])
            for (n, s2), counts in zip(cells, per_cell)
            for name in selectors}


def write_confusion_csv(results, grid, selectors, path):
    """One row per method and cell, rates to six decimals."""
    with open(path, "w", newline="") as sink:
        writer = csv.writer(sink)
        writer.writerow(["method", "n", "sigma2", "cp", "cn", "fp", "fn",
                         "positives", "negatives"])
        for name in selectors:
            for n in grid.n_levels:
                for s2 in grid.sigma2_levels:
                    r = results[(name, n, s2)]
                    writer.writerow([name, n, f"{s2:.6f}",
                                     f"{r.cp:.6f}", f"{r.cn:.6f}",
                                     f"{r.fp:.6f}", f"{r.fn:.6f}",
                                     r.positives, r.negatives])


@dataclass(frozen=True)
class PowerCurve:
    """Selection rate of the first predictor along a coefficient ladder."""

    betas: tuple
    rates: dict
    n: int
    sigma2: float
    reps: int


def run_power_study(selectors, betas=DEFAULT_BETA_LADDER, n=1000, sigma2=0.01,
                    reps=200, seed=0, p=10):
    """How often each method keeps x1 as its coefficient shrinks.

    The remaining p-1 coefficients are zero throughout, so the rate at
    beta=0 is the per-variable false-selection rate.
    """
    if reps < 1:
        raise ConfigInvalid("reps must be >= 1")
    betas = tuple(float(b) for b in betas)
    if any(b < 0 for b in betas):
        raise ConfigInvalid("coefficient ladder must be non-negative")
    hits = {name: np.zeros(len(betas)) for name in selectors}
    key_s2 = int(round(sigma2 * 1000))
    for bi, b in enumerate(betas):
        beta_vec = np.zeros(p)
        beta_vec[0] = b
        for rep in range(reps):
            seq = np.random.SeedSequence(seed, spawn_key=(n, key_s2, bi, rep))
            rng = np.random.default_rng(seq)
            raw, _ = generate_fixed_beta_dataset(beta_vec, n, sigma2, rng)
            for name, sel in selectors.items():
                got = sel.select(raw.x, raw.y).mask
                hits[name][bi] += float(got[0])
    rates = {name: h / reps for name, h in hits.items()}
    return PowerCurve(betas=betas, rates=rates, n=n, sigma2=sigma2, reps=reps)


def write_power_csv(curve, path):
    with open(path, "w", newline="") as sink:
        writer = csv.writer(sink)
        writer.writerow(["absBeta", "method", "rate"])
        for name, rates in curve.rates.items():
            for b, r in zip(curve.betas, rates):
                writer.writerow([f"{b:.6f}", name, f"{r:.6f}"])


def is_monotone_within(values, slack):
    """True when the sequence never drops by more than ``slack``."""
    v = np.asarray(values, dtype=float)
    return bool(np.all(v[1:] >= v[:-1] - slack))


@dataclass(frozen=True)
class TimingTable:
    """Median wall-clock seconds per selection call."""

    medians: dict
    n_levels: tuple
    methods: tuple
    reps: int


def _timed_ops(std):
    """Bare selection callables on an already standardized dataset."""
    lam = 0.5 * lambda_max(std.zx, std.zy)
    return {
        "lasso": lambda: lasso_coordinate_descent(std.zx, std.zy, lam),
        "backward": lambda: BackwardSelector()._select(std),
        "aic": lambda: ExhaustiveSelector("aic")._select(std),
    }


def run_timing_bench(n_levels=(100, 400, 1600), p=10, reps=5, seed=0,
                     methods=("lasso", "backward", "aic")):
    """Time the selection step itself on shared datasets.

    Standardization happens outside the clock; the first call per
    method and sample size is a discarded warm-up.
    """
    if reps < 1:
        raise ConfigInvalid("reps must be >= 1")
    medians = {}
    for n in n_levels:
        stds = []
        for rep in range(reps + 1):  # extra dataset for the warm-up
            raw, _ = _cell_dataset(p, n, 0.1, seed, rep)
            stds.append(standardize(raw))
        for method in methods:
            _timed_ops(stds[0])[method]()  # warm-up, discarded
            times = np.empty(reps)
            for rep in range(reps):
                op = _timed_ops(stds[rep + 1])[method]
                started = time.perf_counter()
                op()
                times[rep] = time.perf_counter() - started
            medians[(method, n)] = float(np.median(times))
    return TimingTable(medians=medians, n_levels=tuple(n_levels),
                       methods=tuple(methods), reps=reps)


def write_timing_csv(table, path):
    with open(path, "w", newline="") as sink:
        writer = csv.writer(sink)
        writer.writerow(["method", "n", "median_seconds"])
        for method in table.methods:
            for n in table.n_levels:
                writer.writerow([method, n, f"{table.medians[(method, n)]:.6f}"])


def padded_validation(model, corpus):
    """Class-conditional accuracy of a padded network on a corpus.

    Only the first p outputs of each record count, since positions
    beyond a record's true predictor count are padding.  Returns the
    pooled rates and the row-normalized 2x2 matrix
    [[cn, fp], [fn, cp]].
    """
    t = corpus.inputs()
    if t.shape[1] != model.p_max:
        raise ConfigInvalid(
            f"corpus width {t.shape[1]} != model width {model.p_max}"
        )
    out, _ = forward(model.params, t)
    pred = out > model.threshold
    tp = fn = tn = fp = 0
    for i, rec in enumerate(corpus.records):
        actual = rec.mask[:rec.p].astype(bool)
        got = pred[i, :rec.p]
        tp += int(np.sum(got & actual))
        fn += int(np.sum(~got & actual))
        tn += int(np.sum(~got & ~actual))
        fp += int(np.sum(got & ~actual))
    rates = ConfusionRates.from_counts(tp, fn, tn, fp)
    matrix = np.array([[rates.cn, rates.fp], [rates.fn, rates.cp]])
    return rates, matrix
