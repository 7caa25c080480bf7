"""Real-data workflow: CSV ingestion, descriptive statistics, skew
transform, correlation pruning, and a multi-method selection report.

The stages mirror how a regression dataset is usually prepared: drop
incomplete rows, tame right-skewed counts with log(x+1), remove one
variable from each highly correlated pair (keeping the one more
correlated with the target), then standardize and run every selector
on the same final design.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np
import pandas as pd

from .baselines import (
    BackwardSelector,
    ExhaustiveSelector,
    ForwardSelector,
    LassoSelector,
)
from .exceptions import (
    ConfigInvalid,
    ConstantColumn,
    EmptyFile,
    NegativeValue,
    ParseError,
    PipelineEmpty,
)
from .selection import NeuralNetSelector

REPORT_METHODS = ("ann", "lasso", "forward", "backward", "aic", "bic")

# Tokens treated as missing values on input.
MISSING_TOKENS = {"", "na", "n/a", "nan", "null"}


@dataclass(frozen=True)
class Frame:
    """Named real columns of equal length; missing entries are NaN."""

    names: tuple
    data: np.ndarray
    dropped_rows: int = 0

    def __post_init__(self):
        data = np.asarray(self.data, dtype=float)
        names = tuple(str(n) for n in self.names)
        if data.ndim != 2 or data.shape[1] != len(names):
            raise ConfigInvalid(
                f"data shape {data.shape} does not match {len(names)} names"
            )
        if len(set(names)) != len(names):
            raise ConfigInvalid("column names must be unique")
        object.__setattr__(self, "data", data)
        object.__setattr__(self, "names", names)

    @property
    def row_count(self):
        return self.data.shape[0]

    def column(self, name):
        return self.data[:, self.names.index(name)].copy()

    def without_columns(self, drop):
        keep = [i for i, n in enumerate(self.names) if n not in set(drop)]
        return Frame(tuple(self.names[i] for i in keep),
                     self.data[:, keep], self.dropped_rows)


@dataclass(frozen=True)
class PipelineSpec:
    """Configuration of the preparation stages."""

    target: str
    log_columns: tuple = ()
    corr_threshold: float = 0.90
    keep_policy: str = "keep-stronger-target-correlation"

    def __post_init__(self):
        object.__setattr__(self, "log_columns", tuple(self.log_columns))
        if not 0.0 < self.corr_threshold < 1.0:
            raise ConfigInvalid("corr_threshold must be in (0, 1)")
        if self.target in self.log_columns:
            raise ConfigInvalid("the target is not log-transformed")
        if self.keep_policy != "keep-stronger-target-correlation":
            raise ConfigInvalid(f"unknown keep policy {self.keep_policy!r}")


def _parse_cell(token, line_no, col_no, col_name, is_target):
    token = token.strip()
    if token.lower() in MISSING_TOKENS:
        return math.nan, False
    try:
        return float(token), False
    except ValueError:
        if is_target:
            return math.nan, True  # caller drops and counts the row
        raise ParseError(
            line_no, col_no,
            f"non-numeric value {token!r} in column {col_name!r}"
        ) from None


def load_csv(path, target_column=None):
    """Read a comma-separated file with a header row into a Frame.

    Missing tokens (empty, NA, NaN, null) become NaN.  A row whose
    target cell holds unparseable text is dropped and counted in
    ``Frame.dropped_rows``; an unparseable predictor cell is an error,
    reported with its line and column.
    """
    with open(path, newline="") as source:
        reader = csv.reader(source)
        rows = [row for row in reader if any(cell.strip() for cell in row)]
    if not rows:
        raise EmptyFile(f"{path} has no content")
    header = [h.strip() for h in rows[0]]
    if len(set(header)) != len(header):
        raise ParseError(1, 0, "duplicate column names")
    if target_column is not None and target_column not in header:
        raise ConfigInvalid(f"target column {target_column!r} not in header")
    if len(rows) == 1:
        raise EmptyFile(f"{path} has a header but no data rows")
    target_idx = header.index(target_column) if target_column is not None else None

    parsed = []
    dropped = 0
    for line_no, row in enumerate(rows[1:], start=2):
        if len(row) != len(header):
            raise ParseError(line_no, 0,
                             f"expected {len(header)} fields, got {len(row)}")
        values = []
        drop_row = False
        for col_no, token in enumerate(row, start=1):
            value, unparseable_target = _parse_cell(
                token, line_no, col_no, header[col_no - 1],
                is_target=(col_no - 1 == target_idx))
            if unparseable_target:
                drop_row = True
                break
            values.append(value)
        if drop_row:
            dropped += 1
            continue
        parsed.append(values)
    if not parsed:
        raise EmptyFile(f"{path}: every data row was dropped")
    return Frame(tuple(header), np.array(parsed, dtype=float), dropped_rows=dropped)


def drop_missing(frame):
    """Remove rows with any missing value; returns (frame, removed count)."""
    keep = ~np.isnan(frame.data).any(axis=1)
    removed = int(np.sum(~keep))
    return Frame(frame.names, frame.data[keep], frame.dropped_rows), removed


def describe(frame):
    """Five-number summary per column, as a DataFrame.

    Uses the sample standard deviation; a column with fewer than two
    distinct observed values is marked degenerate.  Missing entries are
    excluded and reflected in ``count``.
    """
    rows = []
    for j, name in enumerate(frame.names):
        col = frame.data[:, j]
        col = col[~np.isnan(col)]
        if col.size == 0:
            raise ConfigInvalid(f"column {name!r} has no observed values")
        sd = float(np.std(col, ddof=1)) if col.size > 1 else 0.0
        rows.append({
            "mean": float(np.mean(col)),
            "sd": sd,
            "min": float(np.min(col)),
            "median": float(np.median(col)),
            "max": float(np.max(col)),
            "count": int(col.size),
            "degenerate": bool(col.size == 1 or sd == 0.0),
        })
    return pd.DataFrame(rows, index=list(frame.names))


def log_shift(frame, columns):
    """Apply x -> ln(x+1) to the named columns; inputs must be >= 0."""
    names = set(columns)
    unknown = names - set(frame.names)
    if unknown:
        raise ConfigInvalid(f"unknown columns {sorted(unknown)}")
    data = frame.data.copy()
    for j, name in enumerate(frame.names):
        if name not in names:
            continue
        col = data[:, j]
        bad = np.flatnonzero(col < 0)  # NaN compares false, passes through
        if bad.size:
            raise NegativeValue(name, int(bad[0]))
        data[:, j] = np.log1p(col)
    return Frame(frame.names, data, frame.dropped_rows)


def pearson_matrix(frame):
    """Pearson correlations between all columns; diagonal exactly 1."""
    if frame.row_count < 2:
        raise ConfigInvalid("need at least two rows for correlations")
    for j, name in enumerate(frame.names):
        if np.std(frame.data[:, j]) == 0.0:
            raise ConstantColumn(name)
    corr = np.corrcoef(frame.data, rowvar=False)
    corr = (corr + corr.T) / 2.0
    np.fill_diagonal(corr, 1.0)
    return corr


@dataclass(frozen=True)
class PruneAction:
    kept: str
    dropped: str
    pair_r: float


def prune_correlated(frame, spec):
    """Break up predictor pairs with |r| above the threshold.

    Pairs are processed in descending |r| over the original matrix; in
    each still-intact pair the variable less correlated with the target
    is dropped.  Returns the reduced frame and the actions taken.
    """
    if spec.target not in frame.names:
        raise ConfigInvalid(f"target {spec.target!r} not in frame")
    corr = pearson_matrix(frame)
    t = frame.names.index(spec.target)
    predictors = [i for i in range(len(frame.names)) if i != t]
    pairs = [(i, j) for a, i in enumerate(predictors) for j in predictors[a + 1:]
             if abs(corr[i, j]) > spec.corr_threshold]
    pairs.sort(key=lambda ij: (-abs(corr[ij[0], ij[1]]), ij[0], ij[1]))

    alive = set(predictors)
    actions = []
    for i, j in pairs:
        if i not in alive or j not in alive:
            continue
        # keep the member more correlated with the target; ties keep
        # the earlier column
        weaker, stronger = (i, j) if abs(corr[i, t]) < abs(corr[j, t]) else (j, i)
        alive.remove(weaker)
        actions.append(PruneAction(kept=frame.names[stronger],
                                   dropped=frame.names[weaker],
                                   pair_r=float(corr[i, j])))
    dropped_names = [frame.names[i] for i in predictors if i not in alive]
    return frame.without_columns(dropped_names), actions


@dataclass(frozen=True)
class SelectionReport:
    """Per-variable yes/no decisions of every method."""

    variables: tuple
    decisions: dict
    rows_used: int
    rows_dropped_missing: int
    prune_actions: tuple

    def to_dataframe(self):
        table = {m: ["yes" if b else "no" for b in self.decisions[m]]
                 for m in REPORT_METHODS}
        return pd.DataFrame(table, index=list(self.variables))


def write_report_csv(report, path):
    with open(path, "w", newline="") as sink:
        writer = csv.writer(sink)
        writer.writerow(["variable", *REPORT_METHODS])
        for i, name in enumerate(report.variables):
            writer.writerow([name] + [
                "yes" if report.decisions[m][i] else "no" for m in REPORT_METHODS
            ])


def run_selection_report(frame, spec, model, lasso_seed=0):
    """Full pipeline: clean, transform, prune, standardize, select.

    ``model`` is the trained padded network used for the "ann" column;
    the five classical baselines run on exactly the same final design.
    """
    if spec.target not in frame.names:
        raise ConfigInvalid(f"target {spec.target!r} not in frame")
    frame, removed = drop_missing(frame)
    if frame.row_count == 0:
        raise PipelineEmpty("no complete rows")
    frame = log_shift(frame, spec.log_columns)
    frame, actions = prune_correlated(frame, spec)
    variables = tuple(n for n in frame.names if n != spec.target)
    if not variables:
        raise PipelineEmpty("no predictors left after pruning")

    x = np.column_stack([frame.column(v) for v in variables])
    y = frame.column(spec.target)
    selectors = {
        "ann": NeuralNetSelector(model),
        "lasso": LassoSelector(seed=lasso_seed),
        "forward": ForwardSelector(),
        "backward": BackwardSelector(),
        "aic": ExhaustiveSelector("aic"),
        "bic": ExhaustiveSelector("bic"),
    }
    decisions = {}
    for name, sel in selectors.items():
        decisions[name] = sel.select(x, y).mask.astype(bool)
    return SelectionReport(
        variables=variables,
        decisions=decisions,
        rows_used=frame.row_count,
        rows_dropped_missing=removed,
        prune_actions=tuple(actions),
    )
