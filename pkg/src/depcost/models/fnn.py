"""Feedforward regression network (ReLU hidden layers, inverted dropout, Adam)."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import DataError, ShapeError, TrainingError

HIDDEN = (500, 250, 125, 125)


@dataclass
class FnnConfig:
    hidden: tuple[int, ...] = HIDDEN
    dropout: float = 0.3
    learning_rate: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    adam_eps: float = 1e-8
    epochs: int = 150
    batch_size: int = 32
    # regress the z-scored target; predictions are mapped back to label units
    standardize_target: bool = True

    def __post_init__(self):
        self.hidden = tuple(int(h) for h in self.hidden)
        if not 0 <= self.dropout < 1:
            raise ValueError("dropout must lie in [0, 1)")
        if self.epochs < 1 or self.batch_size < 1:
            raise ValueError("epochs and batch_size must be >= 1")


@dataclass
class FnnModel:
    weights: list[np.ndarray]
    biases: list[np.ndarray]
    config: FnnConfig = field(default_factory=FnnConfig)
    y_mean: float = 0.0
    y_scale: float = 1.0
    # Adam state
    m: list[np.ndarray] = field(default_factory=list)
    v: list[np.ndarray] = field(default_factory=list)
    step: int = 0
    loss_history: list[float] = field(default_factory=list)

    @property
    def layer_sizes(self) -> tuple[int, ...]:
        return (self.weights[0].shape[0],) + tuple(w.shape[1] for w in self.weights)

    @property
    def n_params(self) -> int:
        return int(sum(w.size + b.size for w, b in zip(self.weights, self.biases)))

    def predict(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        if X.ndim != 2 or X.shape[1] != self.weights[0].shape[0]:
            raise ShapeError(f"expected {self.weights[0].shape[0]} columns, got shape {X.shape}")
        out, _ = forward(self.weights, self.biases, X)
        return out[:, 0] * self.y_scale + self.y_mean


def param_count(n_inputs: int, hidden=HIDDEN) -> int:
    sizes = (n_inputs,) + tuple(hidden) + (1,)
    return sum(a * b + b for a, b in zip(sizes[:-1], sizes[1:]))


def init_params(n_inputs: int, hidden=HIDDEN, rng=None):
    """He-normal weights, zero biases."""
    rng = rng if rng is not None else np.random.default_rng(0)
    sizes = (n_inputs,) + tuple(hidden) + (1,)
    weights = [rng.normal(0.0, np.sqrt(2.0 / a), size=(a, b)) for a, b in zip(sizes[:-1], sizes[1:])]
    biases = [np.zeros(b) for b in sizes[1:]]
    return weights, biases


def forward(weights, biases, X, dropout: float = 0.0, rng=None):
    """Returns (output, cache). Dropout masks are drawn from ``rng`` when dropout > 0."""
    acts = [X]
    masks = []
    h = X
    last = len(weights) - 1
    for k, (W, b) in enumerate(zip(weights, biases)):
        z = h @ W + b
        if k == last:
            h = z
            break
        h = np.maximum(z, 0.0)
        if dropout > 0:
            mask = (rng.random(h.shape) >= dropout) / (1.0 - dropout)
            h = h * mask
        else:
            mask = None
        masks.append(mask)
        acts.append(h)
    return h, (acts, masks)


def loss_and_grads(weights, biases, X, y, dropout: float = 0.0, rng=None):
    """Mean squared error and its gradients with respect to every weight and bias."""
    out, (acts, masks) = forward(weights, biases, X, dropout, rng)
    n = X.shape[0]
    diff = out[:, 0] - y
    loss = float(np.mean(diff * diff))
    delta = (2.0 / n) * diff[:, None]
    gw = [None] * len(weights)
    gb = [None] * len(biases)
    for k in range(len(weights) - 1, -1, -1):
        gw[k] = acts[k].T @ delta
        gb[k] = delta.sum(axis=0)
        if k == 0:
            break
        delta = delta @ weights[k].T
        if masks[k - 1] is not None:
            delta = delta * masks[k - 1]
        # ReLU derivative; dropped units already carry a zero mask
        delta = delta * (acts[k] > 0)
    return loss, gw, gb


def _adam_update(model: FnnModel, gw, gb):
    cfg = model.config
    model.step += 1
    t = model.step
    c1 = 1.0 - cfg.beta1 ** t
    c2 = 1.0 - cfg.beta2 ** t
    params = model.weights + model.biases
    grads = gw + gb
    for p, g, m, v in zip(params, grads, model.m, model.v):
        m *= cfg.beta1
        m += (1.0 - cfg.beta1) * g
        v *= cfg.beta2
        v += (1.0 - cfg.beta2) * g * g
        p -= cfg.learning_rate * (m / c1) / (np.sqrt(v / c2) + cfg.adam_eps)


def fnn_fit(X, y, epochs: int | None = None, batch: int | None = None, seed: int = 0,
            config: FnnConfig | None = None) -> FnnModel:
    """Train with minibatch Adam on MSE for a fixed number of epochs.

    Rows are reshuffled each epoch and dropout masks are redrawn per batch,
    both from a generator seeded by ``seed``. A non-finite loss raises
    ``TrainingError`` carrying the epoch index.
    """
    cfg = config or FnnConfig()
    if epochs is not None:
        cfg = FnnConfig(**{**cfg.__dict__, "epochs": epochs})
    if batch is not None:
        cfg = FnnConfig(**{**cfg.__dict__, "batch_size": batch})
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    if X.ndim != 2 or X.shape[0] != y.shape[0]:
        raise ShapeError("X must be 2-D with one row per target")
    if len(y) < 1 or not (np.all(np.isfinite(X)) and np.all(np.isfinite(y))):
        raise DataError("empty or non-finite training data")

    rng = np.random.default_rng(seed)
    weights, biases = init_params(X.shape[1], cfg.hidden, rng)
    y_mean, y_scale = 0.0, 1.0
    if cfg.standardize_target:
        y_mean = float(y.mean())
        y_scale = float(y.std()) or 1.0
    yt = (y - y_mean) / y_scale
    model = FnnModel(weights, biases, cfg, y_mean, y_scale,
                     m=[np.zeros_like(p) for p in weights + biases],
                     v=[np.zeros_like(p) for p in weights + biases])
    n = len(yt)
    for epoch in range(cfg.epochs):
        order = rng.permutation(n)
        total = 0.0
        for start in range(0, n, cfg.batch_size):
            idx = order[start:start + cfg.batch_size]
            loss, gw, gb = loss_and_grads(model.weights, model.biases, X[idx], yt[idx],
                                          cfg.dropout, rng)
            if not np.isfinite(loss):
                raise TrainingError(f"non-finite loss in epoch {epoch}", epoch=epoch)
            _adam_update(model, gw, gb)
            total += loss * len(idx)
        model.loss_history.append(total / n)
    return model
