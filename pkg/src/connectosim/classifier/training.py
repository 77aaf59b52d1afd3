"""Cross-entropy training with Adam, early stopping, and small-cohort
regularization (dense-layer dropout, gradient clipping, decoupled weight
decay, plateau learning-rate decay).

Training is fully deterministic for a given seed: initialization, the
stratified train/validation split, batch shuffling and dropout masks all
draw from one seeded generator, and arithmetic runs in float32
single-threaded. The returned parameters are the best-validation-loss
snapshot, stored as float64.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from ..errors import ContractViolationError
from ..graph import Connectome
from ..stages import Stage
from . import network
from .network import ModelParameters


@dataclass(frozen=True)
class TrainingConfig:
    learning_rate: float = 0.001
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8
    batch_size: int = 32
    max_epochs: int = 80
    patience: int = 10
    seed: int = 0
    validation_fraction: float = 0.15
    # regularization for the few-hundred-sample regime; all optional extras
    dropout: float = 0.5
    grad_clip_norm: float = 1.0
    weight_decay: float = 0.05
    lr_decay_factor: float = 0.3
    lr_decay_patience: int = 4

    def __post_init__(self):
        if self.learning_rate <= 0:
            raise ContractViolationError("learning_rate must be positive")
        if self.patience < 1:
            raise ContractViolationError("patience must be >= 1")
        if not (0.0 <= self.validation_fraction < 1.0):
            raise ContractViolationError("validation_fraction must be in [0, 1)")
        if not (0.0 <= self.dropout < 1.0):
            raise ContractViolationError("dropout must be in [0, 1)")


class _Adam:
    """Adam on the cross-entropy gradient; weight decay is applied
    separately (decoupled) by the training loop."""

    def __init__(self, param_names, cfg: TrainingConfig, dtype):
        self.cfg = cfg
        self.t = 0
        self.m = {n: None for n in param_names}
        self.v = {n: None for n in param_names}
        self.dtype = dtype

    def step(self, params: ModelParameters, grads: dict, lr: float) -> ModelParameters:
        cfg = self.cfg
        self.t += 1
        corr1 = 1.0 - cfg.beta1**self.t
        corr2 = 1.0 - cfg.beta2**self.t
        new = {}
        for name, g in grads.items():
            if self.m[name] is None:
                self.m[name] = np.zeros_like(g)
                self.v[name] = np.zeros_like(g)
            self.m[name] = cfg.beta1 * self.m[name] + (1.0 - cfg.beta1) * g
            self.v[name] = cfg.beta2 * self.v[name] + (1.0 - cfg.beta2) * g * g
            m_hat = self.m[name] / corr1
            v_hat = self.v[name] / corr2
            update = lr * m_hat / (np.sqrt(v_hat) + cfg.epsilon)
            new[name] = (getattr(params, name) - update).astype(self.dtype)
        return replace(params, **new)


def _build_tensors(dataset, dtype):
    q = dataset[0][0].node_count
    for g, _ in dataset:
        if g.node_count != q:
            raise ContractViolationError(
                f"all graphs must share q; found {g.node_count} and {q}"
            )
    x = np.stack([g.weights.astype(dtype) / 100.0 for g, _ in dataset])[..., None]
    y = np.array([stage.value for _, stage in dataset], dtype=np.int64)
    return x, y, q


def _stratified_split(y, fraction, rng):
    train_idx, val_idx = [], []
    for label in np.unique(y):
        idx = np.nonzero(y == label)[0]
        idx = idx[rng.permutation(len(idx))]
        n_val = int(round(fraction * len(idx)))
        val_idx.extend(idx[:n_val])
        train_idx.extend(idx[n_val:])
    return np.sort(np.array(train_idx, dtype=np.int64)), np.sort(
        np.array(val_idx, dtype=np.int64)
    )


def cross_entropy(probs: np.ndarray, labels: np.ndarray) -> float:
    picked = probs[np.arange(len(labels)), labels]
    return float(-np.mean(np.log(np.maximum(picked, 1e-12))))


def _dataset_loss(params, x, y, batch_size):
    total, n = 0.0, 0
    for start in range(0, len(y), batch_size):
        xb = x[start : start + batch_size]
        yb = y[start : start + batch_size]
        probs, _ = network.forward(params, xb)
        total += cross_entropy(probs, yb) * len(yb)
        n += len(yb)
    return total / max(n, 1)


def _clip_gradients(grads: dict, max_norm: float) -> dict:
    norm = np.sqrt(sum(float((g.astype(np.float64) ** 2).sum()) for g in grads.values()))
    if norm <= max_norm or norm == 0.0:
        return grads
    scale = max_norm / norm
    return {k: v * scale for k, v in grads.items()}


def train(
    dataset: Sequence[tuple[Connectome, Stage]],
    config: TrainingConfig,
    history_out: list | None = None,
) -> ModelParameters:
    """Train on labeled connectomes; returns the best-validation parameters.

    history_out, when given, collects per-epoch (train_loss, val_loss) pairs.
    """
    if len(dataset) == 0:
        raise ContractViolationError("training dataset is empty")
    dtype = np.float32
    x, y, q = _build_tensors(dataset, dtype)
    rng = np.random.default_rng(config.seed)
    params = network.initialize_parameters(q, rng, dtype=dtype)
    train_idx, val_idx = _stratified_split(y, config.validation_fraction, rng)
    if len(train_idx) == 0:
        raise ContractViolationError("validation split left no training samples")
    monitor_idx = val_idx if len(val_idx) > 0 else train_idx

    adam = _Adam(params.field_names(), config, dtype)
    lr = config.learning_rate
    best_loss = np.inf
    best_arrays = {k: v.copy() for k, v in params.arrays().items()}
    stale = 0

    for _epoch in range(config.max_epochs):
        order = train_idx[rng.permutation(len(train_idx))]
        epoch_loss, seen = 0.0, 0
        for start in range(0, len(order), config.batch_size):
            batch = order[start : start + config.batch_size]
            xb, yb = x[batch], y[batch]
            probs, cache = network.forward(
                params, xb, keep_cache=True, dropout=config.dropout, dropout_rng=rng
            )
            epoch_loss += cross_entropy(probs, yb) * len(yb)
            seen += len(yb)
            dz = probs.copy()
            dz[np.arange(len(yb)), yb] -= 1.0
            dz /= len(yb)
            _, grads = network.backward(params, cache, dz.astype(dtype))
            if config.grad_clip_norm > 0:
                grads = _clip_gradients(grads, config.grad_clip_norm)
            params = adam.step(params, grads, lr)
            if config.weight_decay > 0:
                shrink = {
                    name: (arr * (1.0 - lr * config.weight_decay)).astype(dtype)
                    for name, arr in params.arrays().items()
                    if not name.endswith("_b")
                }
                params = replace(params, **shrink)
        val_loss = _dataset_loss(params, x[monitor_idx], y[monitor_idx], config.batch_size)
        if history_out is not None:
            history_out.append((epoch_loss / max(seen, 1), val_loss))
        if val_loss < best_loss:
            best_loss = val_loss
            best_arrays = {k: v.copy() for k, v in params.arrays().items()}
            stale = 0
        else:
            stale += 1
            if stale % config.lr_decay_patience == 0:
                lr *= config.lr_decay_factor
            if stale >= config.patience:
                break

    best = ModelParameters(**best_arrays).astype(np.float64)
    best.validate()
    return best


def evaluate_accuracy(params: ModelParameters, dataset) -> float:
    """Fraction of graphs whose argmax matches the label."""
    if len(dataset) == 0:
        raise ContractViolationError("empty evaluation dataset")
    x, y, _ = _build_tensors(dataset, np.float64)
    hits = 0
    for start in range(0, len(y), 64):
        probs, _ = network.forward(params, x[start : start + 64])
        hits += int(np.sum(np.argmax(probs, axis=1) == y[start : start + 64]))
    return hits / len(y)
