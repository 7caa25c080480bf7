"""From-scratch multilayer perceptron with sigmoid layers.

Forward pass, binary-cross-entropy loss, exact backprop gradients, a
mini-batch training loop with either plain gradient descent or
adaptive-moment updates, and a textual weight format.  Everything is
plain numpy; training is deterministic given the config seed.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .exceptions import ConfigInvalid, DimensionMismatch, FormatError, NonFiniteLoss

# Predictions are clamped to [CLAMP, 1 - CLAMP] inside the loss so a
# saturated output cannot produce an infinite loss.
CLAMP = 1e-12

ADAM_BETA1 = 0.9
ADAM_BETA2 = 0.999
ADAM_EPS = 1e-8


@dataclass
class MlpParams:
    """Weights of a fully connected sigmoid network.

    ``weights[l]`` has shape (d_{l+1}, d_l) and ``biases[l]`` length
    d_{l+1}, mapping activations of layer l to pre-activations of layer
    l+1.  Every layer uses the sigmoid activation.

    ``input_clip``, when set, winsorizes the inputs to [-clip, clip]
    before the first layer.  Inputs with a huge dynamic range (t-values
    reach the hundreds) otherwise saturate the first layer on exactly
    the examples that carry signal; clipping far above the decision
    region preserves the selection function while keeping gradients
    alive.  The value is part of the model and travels with the weight
    file.
    """

    layer_dims: tuple
    weights: list
    biases: list
    activations: tuple = field(default=None)
    input_clip: float = None

    def __post_init__(self):
        dims = tuple(int(d) for d in self.layer_dims)
        if len(dims) < 2 or any(d < 1 for d in dims):
            raise ConfigInvalid(f"bad layer dims {dims}")
        n_layers = len(dims) - 1
        if self.activations is None:
            self.activations = ("sigmoid",) * n_layers
        self.activations = tuple(self.activations)
        if len(self.weights) != n_layers or len(self.biases) != n_layers:
            raise DimensionMismatch("one weight matrix and bias vector per layer")
        if len(self.activations) != n_layers or any(a != "sigmoid" for a in self.activations):
            raise ConfigInvalid("only sigmoid activations are supported")
        if self.input_clip is not None:
            clip = float(self.input_clip)
            if not np.isfinite(clip) or clip <= 0.0:
                raise ConfigInvalid(f"input_clip must be positive, got {self.input_clip}")
            self.input_clip = clip
        for l in range(n_layers):
            w = np.asarray(self.weights[l], dtype=float)
            b = np.asarray(self.biases[l], dtype=float)
            if w.shape != (dims[l + 1], dims[l]) or b.shape != (dims[l + 1],):
                raise DimensionMismatch(
                    f"layer {l}: weight shape {w.shape}, bias shape {b.shape} "
                    f"inconsistent with dims {dims}"
                )
            if not (np.all(np.isfinite(w)) and np.all(np.isfinite(b))):
                raise ValueError(f"layer {l}: non-finite parameters")
            self.weights[l] = w
            self.biases[l] = b
        self.layer_dims = dims

    @property
    def n_layers(self):
        return len(self.layer_dims) - 1

    def copy(self):
        return MlpParams(
            self.layer_dims,
            [w.copy() for w in self.weights],
            [b.copy() for b in self.biases],
            self.activations,
            self.input_clip,
        )


@dataclass(frozen=True)
class TrainConfig:
    """Training hyperparameters; defaults follow common practice."""

    epochs: int
    seed: int
    learning_rate: float = 1e-3
    batch_size: int = 128
    loss: str = "bce"
    optimizer: str = "adam"
    input_clip: float = None

    def __post_init__(self):
        if self.learning_rate <= 0:
            raise ConfigInvalid("learning_rate must be > 0")
        if self.input_clip is not None and (
            not np.isfinite(self.input_clip) or self.input_clip <= 0.0
        ):
            raise ConfigInvalid(f"input_clip must be positive, got {self.input_clip}")
        if self.epochs < 1:
            raise ConfigInvalid("epochs must be >= 1")
        if self.batch_size < 1:
            raise ConfigInvalid("batch_size must be >= 1")
        if self.loss != "bce":
            raise ConfigInvalid(f"unknown loss {self.loss!r}")
        if self.optimizer not in ("adam", "sgd"):
            raise ConfigInvalid(f"unknown optimizer {self.optimizer!r}")


@dataclass(frozen=True)
class TrainReport:
    final_loss: float
    loss_history: np.ndarray
    epochs_run: int
    wall_clock_seconds: float


def sigmoid(z):
    """Numerically stable logistic function, elementwise.

    Both branches evaluate exp on a non-positive argument, so there is
    no overflow for any finite z.
    """
    z = np.asarray(z, dtype=float)
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    if out.ndim == 0:
        return float(out)
    return out


def init_params(layer_dims, rng, input_clip=None):
    """Symmetric uniform init on +/- sqrt(6 / (fan_in + fan_out)); zero biases."""
    dims = tuple(int(d) for d in layer_dims)
    weights, biases = [], []
    for d_in, d_out in zip(dims[:-1], dims[1:]):
        limit = np.sqrt(6.0 / (d_in + d_out))
        weights.append(rng.uniform(-limit, limit, size=(d_out, d_in)))
        biases.append(np.zeros(d_out))
    return MlpParams(dims, weights, biases, input_clip=input_clip)


def forward(params, x):
    """Run the network; returns ``(output, cache)``.

    ``x`` may be a single input of length d0 or a batch of shape
    (m, d0).  The cache holds the activation of every layer (input
    included) and is what backprop consumes.
    """
    x = np.asarray(x, dtype=float)
    if x.shape[-1] != params.layer_dims[0]:
        raise DimensionMismatch(
            f"input width {x.shape[-1]}, network expects {params.layer_dims[0]}"
        )
    if x.ndim not in (1, 2):
        raise DimensionMismatch("input must be a vector or a batch matrix")
    if params.input_clip is not None:
        x = np.clip(x, -params.input_clip, params.input_clip)
    a = x
    cache = [a]
    for w, b in zip(params.weights, params.biases):
        a = sigmoid(a @ w.T + b)
        cache.append(a)
    return a, cache


def bce_loss(predicted, target):
    """Binary cross-entropy, averaged over every output coordinate."""
    p = np.clip(np.asarray(predicted, dtype=float), CLAMP, 1.0 - CLAMP)
    t = np.asarray(target, dtype=float)
    if p.shape != t.shape:
        raise DimensionMismatch(f"predicted {p.shape} vs target {t.shape}")
    return float(-np.mean(t * np.log(p) + (1.0 - t) * np.log(1.0 - p)))


def _grads_from_cache(params, cache, target):
    """Gradients of bce_loss(forward(x), target) from a forward cache.

    For a sigmoid output with cross-entropy the output-layer delta is
    (prediction - target), scaled by the loss's mean normalization.
    """
    out = cache[-1]
    t = np.asarray(target, dtype=float)
    single = out.ndim == 1
    if single:
        out = out[None, :]
        t = t[None, :]
        batch_cache = [a[None, :] for a in cache[:-1]] + [out]
    else:
        batch_cache = cache
    if t.shape != out.shape:
        raise DimensionMismatch(f"target {t.shape} vs output {out.shape}")
    m, d = out.shape
    delta = (out - t) / (m * d)
    grad_w = [None] * params.n_layers
    grad_b = [None] * params.n_layers
    for l in range(params.n_layers - 1, -1, -1):
        a_prev = batch_cache[l]
        grad_w[l] = delta.T @ a_prev
        grad_b[l] = delta.sum(axis=0)
        if l > 0:
            a = batch_cache[l]
            delta = (delta @ params.weights[l]) * a * (1.0 - a)
    return grad_w, grad_b


def backprop(params, x, target):
    """Exact gradient of ``bce_loss(forward(params, x), target)``."""
    _, cache = forward(params, x)
    return _grads_from_cache(params, cache, target)


def _resolve_arrays(corpus):
    if hasattr(corpus, "inputs"):
        return corpus.inputs(), corpus.targets()
    t, g = corpus
    return np.asarray(t, dtype=float), np.asarray(g, dtype=float)


def train(corpus, layer_dims, cfg):
    """Mini-batch training; returns ``(MlpParams, TrainReport)``.

    ``corpus`` is a :class:`~varsel.corpus.Corpus` or a plain
    ``(inputs, targets)`` pair of matrices.  Initialization and batch
    shuffling come from a stream seeded with ``cfg.seed``, so equal
    configs give bit-identical parameters.
    """
    t_all, g_all = _resolve_arrays(corpus)
    n = t_all.shape[0]
    if n == 0:
        raise ConfigInvalid("corpus is empty")
    dims = tuple(int(d) for d in layer_dims)
    if dims[0] != t_all.shape[1] or dims[-1] != g_all.shape[1]:
        raise ConfigInvalid(
            f"arch {dims} does not match corpus widths "
            f"({t_all.shape[1]} in, {g_all.shape[1]} out)"
        )
    if cfg.batch_size > n:
        raise ConfigInvalid(f"batch_size {cfg.batch_size} exceeds corpus size {n}")

    rng = np.random.default_rng(cfg.seed)
    params = init_params(dims, rng, input_clip=cfg.input_clip)
    adam = cfg.optimizer == "adam"
    if adam:
        m_w = [np.zeros_like(w) for w in params.weights]
        v_w = [np.zeros_like(w) for w in params.weights]
        m_b = [np.zeros_like(b) for b in params.biases]
        v_b = [np.zeros_like(b) for b in params.biases]
        step = 0

    history = np.empty(cfg.epochs)
    started = time.perf_counter()
    for epoch in range(cfg.epochs):
        perm = rng.permutation(n)
        running = 0.0
        for lo in range(0, n, cfg.batch_size):
            idx = perm[lo:lo + cfg.batch_size]
            xb, tb = t_all[idx], g_all[idx]
            out, cache = forward(params, xb)
            running += bce_loss(out, tb) * idx.size
            grad_w, grad_b = _grads_from_cache(params, cache, tb)
            if adam:
                step += 1
                c1 = 1.0 - ADAM_BETA1 ** step
                c2 = 1.0 - ADAM_BETA2 ** step
                for l in range(params.n_layers):
                    for g, p, mom, vel in (
                        (grad_w[l], params.weights[l], m_w[l], v_w[l]),
                        (grad_b[l], params.biases[l], m_b[l], v_b[l]),
                    ):
                        mom *= ADAM_BETA1
                        mom += (1.0 - ADAM_BETA1) * g
                        vel *= ADAM_BETA2
                        vel += (1.0 - ADAM_BETA2) * g * g
                        p -= cfg.learning_rate * (mom / c1) / (np.sqrt(vel / c2) + ADAM_EPS)
            else:
                for l in range(params.n_layers):
                    params.weights[l] -= cfg.learning_rate * grad_w[l]
                    params.biases[l] -= cfg.learning_rate * grad_b[l]
        epoch_loss = running / n
        if not np.isfinite(epoch_loss) or not all(
            np.all(np.isfinite(w)) for w in params.weights
        ):
            raise NonFiniteLoss(f"training diverged at epoch {epoch + 1}")
        history[epoch] = epoch_loss
    elapsed = time.perf_counter() - started
    report = TrainReport(
        final_loss=float(history[-1]),
        loss_history=history,
        epochs_run=cfg.epochs,
        wall_clock_seconds=elapsed,
    )
    return params, report


def loss_trend_ok(history, window=500, tol=1e-6):
    """Check the loss does not increase across any ``window``-epoch span."""
    h = np.asarray(history, dtype=float)
    if h.size <= window:
        return True
    return bool(np.all(h[window:] <= h[:-window] + tol))


# --- weight file format ---------------------------------------------------
#
# MLPSEL v1
# dims d0 d1 ... dL
# layer 0 sigmoid
# <d1 rows: d0 weights then the bias, space-separated>
# layer 1 sigmoid
# ...
#
# Values use 17 significant digits, enough to round-trip binary64
# exactly.


def save_weights(params, path):
    with open(path, "w") as sink:
        sink.write("MLPSEL v1\n")
        sink.write("dims " + " ".join(str(d) for d in params.layer_dims) + "\n")
        if params.input_clip is not None:
            sink.write(f"clip {params.input_clip:.17g}\n")
        for l in range(params.n_layers):
            sink.write(f"layer {l} sigmoid\n")
            w, b = params.weights[l], params.biases[l]
            for i in range(w.shape[0]):
                row = [f"{v:.17g}" for v in w[i]] + [f"{b[i]:.17g}"]
                sink.write(" ".join(row) + "\n")


def load_weights(path):
    """Parse a weight file; raises :class:`FormatError` with the line number."""
    with open(path) as source:
        lines = source.read().splitlines()
    if not lines or lines[0].strip() != "MLPSEL v1":
        raise FormatError(1, "expected 'MLPSEL v1' header")
    if len(lines) < 2 or not lines[1].startswith("dims "):
        raise FormatError(2, "expected 'dims ...' line")
    try:
        dims = tuple(int(v) for v in lines[1].split()[1:])
    except ValueError as exc:
        raise FormatError(2, str(exc)) from exc
    if len(dims) < 2 or any(d < 1 for d in dims):
        raise FormatError(2, f"bad dims {dims}")

    weights, biases = [], []
    cursor = 2
    input_clip = None
    if cursor < len(lines) and lines[cursor].startswith("clip "):
        try:
            input_clip = float(lines[cursor].split()[1])
        except (ValueError, IndexError) as exc:
            raise FormatError(cursor + 1, str(exc)) from exc
        if not np.isfinite(input_clip) or input_clip <= 0.0:
            raise FormatError(cursor + 1, f"bad clip value {input_clip}")
        cursor += 1
    for l in range(len(dims) - 1):
        if cursor >= len(lines):
            raise FormatError(len(lines) + 1, f"missing 'layer {l} sigmoid'")
        if lines[cursor].strip() != f"layer {l} sigmoid":
            raise FormatError(cursor + 1, f"expected 'layer {l} sigmoid'")
        cursor += 1
        d_in, d_out = dims[l], dims[l + 1]
        w = np.empty((d_out, d_in))
        b = np.empty(d_out)
        for i in range(d_out):
            if cursor >= len(lines):
                raise FormatError(len(lines) + 1, "unexpected end of file")
            try:
                row = [float(v) for v in lines[cursor].split()]
            except ValueError as exc:
                raise FormatError(cursor + 1, str(exc)) from exc
            if len(row) != d_in + 1:
                raise FormatError(
                    cursor + 1, f"expected {d_in + 1} values, got {len(row)}"
                )
            if not all(np.isfinite(v) for v in row):
                raise FormatError(cursor + 1, "non-finite value")
            w[i] = row[:-1]
            b[i] = row[-1]
            cursor += 1
        weights.append(w)
        biases.append(b)
    if any(line.strip() for line in lines[cursor:]):
        raise FormatError(cursor + 1, "trailing content after last layer")
    return MlpParams(dims, weights, biases, input_clip=input_clip)
