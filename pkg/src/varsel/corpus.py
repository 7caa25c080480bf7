"""Synthetic regression datasets and training corpora for the selector net.

A corpus record is built by: draw an inclusion mask (each bit
Bernoulli(0.5)), a sample size, an iid standard-normal design, signed
coefficients for the active positions, and Gaussian noise; fit the
standardized no-intercept regression; keep the t-statistics together
with the truth mask, both zero-padded to the configured width.

Record k derives its random stream from ``(master_seed, k, attempt)``
through `numpy`'s SeedSequence spawning, so generation is reproducible
bit-for-bit at any thread count, and a degenerate draw (perfect fit or
rank-deficient design) is simply retried on ``attempt + 1``.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .exceptions import ConfigInvalid, FormatError, PerfectFit, RankDeficient
from .ols import RawDataset, fit_ols_no_intercept, standardize

# Residual degrees of freedom guaranteed per generated dataset: n is
# redrawn until n >= p + MIN_EXTRA_DF.
MIN_EXTRA_DF = 5


@dataclass(frozen=True)
class GenConfig:
    """Laws governing corpus generation.

    ``sigma2_law`` is a tag plus parameters: ``("log-uniform", lo, hi)``
    draws the noise variance log-uniformly on [lo, hi]; ``("fixed", v)``
    always uses v.
    """

    count: int
    master_seed: int
    p_max: int = 100
    n_range: tuple = (20, 2000)
    beta_mag_range: tuple = (0.01, 5.0)
    sigma2_law: tuple = ("log-uniform", 0.01, 0.5)

    def __post_init__(self):
        if self.count < 1:
            raise ConfigInvalid("count must be >= 1")
        if not 1 <= self.p_max <= 100:
            raise ConfigInvalid("p_max must be in [1, 100]")
        lo, hi = self.n_range
        if lo > hi or lo < 2:
            raise ConfigInvalid(f"bad n_range {self.n_range}")
        if hi < self.p_max + MIN_EXTRA_DF:
            raise ConfigInvalid("n_range too small for p_max")
        blo, bhi = self.beta_mag_range
        if not 0 < blo < bhi:
            raise ConfigInvalid(f"bad beta_mag_range {self.beta_mag_range}")
        _check_sigma2_law(self.sigma2_law)


def _check_sigma2_law(law):
    tag = law[0]
    if tag == "log-uniform":
        if len(law) != 3 or not 0 < law[1] <= law[2]:
            raise ConfigInvalid(f"bad log-uniform law {law}")
    elif tag == "fixed":
        if len(law) != 2 or law[1] <= 0:
            raise ConfigInvalid(f"bad fixed law {law}")
    else:
        raise ConfigInvalid(f"unknown sigma2 law tag {tag!r}")


def draw_mask(p, rng):
    """Inclusion mask of length p, each bit independent Bernoulli(0.5)."""
    if p < 1:
        raise ConfigInvalid("p must be >= 1")
    return rng.integers(0, 2, size=p).astype(np.uint8)


def draw_coefficients(mask, rng, mag_range=(0.01, 5.0)):
    """Signed coefficients: zero where the mask is 0; elsewhere the sign
    is +/-1 equiprobable and the magnitude uniform on the open interval."""
    mask = np.asarray(mask)
    beta = np.zeros(mask.shape[0])
    active = np.flatnonzero(mask == 1)
    if active.size:
        lo, hi = mag_range
        signs = rng.integers(0, 2, size=active.size) * 2 - 1
        mags = lo + rng.random(active.size) * (hi - lo)
        beta[active] = signs * mags
    return beta


def draw_sigma2(law, rng):
    """Noise variance per the configured law."""
    _check_sigma2_law(law)
    if law[0] == "fixed":
        return float(law[1])
    lo, hi = law[1], law[2]
    return float(math.exp(rng.uniform(math.log(lo), math.log(hi))))


def draw_sample_size(p, rng, n_range):
    """n ~ DiscreteUniform over n_range, redrawn until n >= p + 5."""
    lo, hi = n_range
    if hi < p + MIN_EXTRA_DF:
        raise ConfigInvalid(f"n_range {n_range} cannot reach n >= {p + MIN_EXTRA_DF}")
    while True:
        n = int(rng.integers(lo, hi + 1))
        if n >= p + MIN_EXTRA_DF:
            return n


def generate_dataset(p, config, rng):
    """One synthetic dataset: returns ``(raw, mask, (n, sigma2))``.

    Draw order is mask, n, design, coefficients, noise variance, noise.
    """
    if p > config.p_max:
        raise ConfigInvalid(f"p={p} exceeds p_max={config.p_max}")
    mask = draw_mask(p, rng)
    n = draw_sample_size(p, rng, config.n_range)
    x = rng.standard_normal((n, p))
    beta = draw_coefficients(mask, rng, config.beta_mag_range)
    sigma2 = draw_sigma2(config.sigma2_law, rng)
    eps = rng.normal(0.0, math.sqrt(sigma2), size=n)
    raw = RawDataset(x, x @ beta + eps, tuple(f"x{j + 1}" for j in range(p)))
    return raw, mask, (n, sigma2)


def generate_fixed_beta_dataset(beta, n, sigma2, rng):
    """Dataset with prescribed coefficients, size, and noise variance.

    Used by the power study, where the coefficient ladder is fixed
    rather than drawn.  Returns ``(raw, mask)`` with the mask marking
    nonzero coefficients.
    """
    beta = np.asarray(beta, dtype=float)
    p = beta.shape[0]
    x = rng.standard_normal((n, p))
    eps = rng.normal(0.0, math.sqrt(sigma2), size=n)
    raw = RawDataset(x, x @ beta + eps, tuple(f"x{j + 1}" for j in range(p)))
    return raw, (beta != 0).astype(np.uint8)


@dataclass(frozen=True)
class CorpusRecord:
    """One training/validation record.

    ``t_values`` and ``mask`` have length ``p_max`` with exact zeros at
    positions ``>= p``.
    """

    t_values: np.ndarray
    mask: np.ndarray
    p: int
    n: int
    sigma2: float


@dataclass
class Corpus:
    """A list of records plus the config that generated them."""

    records: list
    config: GenConfig
    role: str = "training"
    redraws: int = 0

    def __len__(self):
        return len(self.records)

    @property
    def p_max(self):
        return self.config.p_max

    def inputs(self):
        """(count, p_max) matrix of padded t-vectors."""
        return np.array([r.t_values for r in self.records])

    def targets(self):
        """(count, p_max) matrix of padded truth masks, as floats."""
        return np.array([r.mask for r in self.records], dtype=float)


def _record_stream(master_seed, index, attempt):
    return np.random.default_rng(
        np.random.SeedSequence(master_seed, spawn_key=(index, attempt))
    )


MAX_REDRAWS_PER_RECORD = 100


def _build_record(config, index, fixed_p):
    """Generate record ``index``, retrying degenerate fits on fresh substreams."""
    attempt = 0
    while True:
        rng = _record_stream(config.master_seed, index, attempt)
        p = fixed_p if fixed_p is not None else int(rng.integers(1, config.p_max + 1))
        raw, mask, (n, sigma2) = generate_dataset(p, config, rng)
        try:
            fit = fit_ols_no_intercept(standardize(raw))
        except (PerfectFit, RankDeficient):
            attempt += 1
            if attempt > MAX_REDRAWS_PER_RECORD:
                raise ConfigInvalid(
                    f"record {index}: {attempt} degenerate draws in a row; "
                    "the generating configuration is unsuitable"
                )
            continue
        t_pad = np.zeros(config.p_max)
        t_pad[:p] = fit.t_values
        g_pad = np.zeros(config.p_max, dtype=np.uint8)
        g_pad[:p] = mask
        return CorpusRecord(t_pad, g_pad, p, n, sigma2), attempt


def build_corpus(config, fixed_p=None, role="training", threads=1):
    """Generate ``config.count`` records.

    ``fixed_p`` pins every record's predictor count (the fixed-p study);
    otherwise p is drawn uniformly on {1, ..., p_max} per record.
    Output is identical for any ``threads`` value.
    """
    if fixed_p is not None and not 1 <= fixed_p <= config.p_max:
        raise ConfigInvalid(f"fixed_p={fixed_p} out of range [1, {config.p_max}]")
    indices = range(config.count)
    if threads and threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            built = list(pool.map(lambda k: _build_record(config, k, fixed_p), indices))
    else:
        built = [_build_record(config, k, fixed_p) for k in indices]
    records = [rec for rec, _ in built]
    redraws = sum(att for _, att in built)
    return Corpus(records=records, config=config, role=role, redraws=redraws)


# --- corpus file format ---------------------------------------------------
#
# Header:  CORPUS v1 pMax=<int> count=<int> seed=<int>
# Record:  p=<int> n=<int> s2=<real> t=<c1,...,c_pMax> g=<b1,...,b_pMax>
#
# Reals are written with repr(), the shortest decimal that round-trips
# binary64 exactly, so save -> load is bit-exact.


def save_corpus(corpus, path):
    with open(path, "w") as sink:
        cfg = corpus.config
        sink.write(f"CORPUS v1 pMax={cfg.p_max} count={len(corpus)} seed={cfg.master_seed}\n")
        for rec in corpus.records:
            t = ",".join(repr(float(v)) for v in rec.t_values)
            g = ",".join(str(int(b)) for b in rec.mask)
            sink.write(f"p={rec.p} n={rec.n} s2={repr(float(rec.sigma2))} t={t} g={g}\n")


def _take(token, key, line_no):
    if not token.startswith(key + "="):
        raise FormatError(line_no, f"expected {key}=..., got {token!r}")
    return token[len(key) + 1:]


def load_corpus(path, role="training"):
    """Parse a corpus file; raises :class:`FormatError` with the line number."""
    with open(path) as source:
        lines = source.read().splitlines()
    if not lines:
        raise FormatError(1, "missing header")
    head = lines[0].split()
    if len(head) != 5 or head[0] != "CORPUS" or head[1] != "v1":
        raise FormatError(1, f"bad header {lines[0]!r}")
    try:
        p_max = int(_take(head[2], "pMax", 1))
        count = int(_take(head[3], "count", 1))
        seed = int(_take(head[4], "seed", 1))
    except ValueError as exc:
        raise FormatError(1, str(exc)) from exc

    records = []
    for i, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        parts = line.split()
        if len(parts) != 5:
            raise FormatError(i, f"expected 5 fields, got {len(parts)}")
        try:
            p = int(_take(parts[0], "p", i))
            n = int(_take(parts[1], "n", i))
            s2 = float(_take(parts[2], "s2", i))
            t = np.array([float(v) for v in _take(parts[3], "t", i).split(",")])
            g_items = [int(v) for v in _take(parts[4], "g", i).split(",")]
        except ValueError as exc:
            raise FormatError(i, str(exc)) from exc
        if t.shape[0] != p_max or len(g_items) != p_max:
            raise FormatError(i, f"vectors must have length pMax={p_max}")
        if not 1 <= p <= p_max:
            raise FormatError(i, f"p={p} out of range")
        if any(b not in (0, 1) for b in g_items):
            raise FormatError(i, "mask bits must be 0 or 1")
        g = np.array(g_items, dtype=np.uint8)
        if np.any(t[p:] != 0.0) or np.any(g[p:] != 0):
            raise FormatError(i, "padding beyond p must be zero")
        if not np.all(np.isfinite(t)) or not np.isfinite(s2) or s2 <= 0:
            raise FormatError(i, "non-finite or non-positive values")
        records.append(CorpusRecord(t, g, p, n, float(s2)))
    if len(records) != count:
        raise FormatError(len(lines), f"header says {count} records, found {len(records)}")
    config = GenConfig(count=count, master_seed=seed, p_max=p_max)
    return Corpus(records=records, config=config, role=role)
