"""The four-class stage classifier over adjacency matrices.

Architecture: two edge-to-edge layers (32 filters each), an edge-to-node
layer (64 filters), a node-to-graph dense layer (256 units), dense layers of
128 and 30 units, and a 4-way softmax output. Hidden activations are
Leaky ReLU with slope 0.33. The graph enters as its weight matrix scaled to
[0, 1] (integer weights divided by 100).

Edge importance is the gradient of a class probability with respect to each
input cell, obtained by backpropagation and symmetrized.
"""

from __future__ import annotations

from dataclasses import dataclass, fields, replace
from typing import Optional

import numpy as np

from ..errors import ContractViolationError, NumericError
from ..graph import Connectome
from ..stages import ImportanceMap, Stage, StageProbabilities
from . import layers

LEAKY_SLOPE = 0.33
E2E1_FILTERS = 32
E2E2_FILTERS = 32
E2N_FILTERS = 64
N2G_UNITS = 256
FC1_UNITS = 128
FC2_UNITS = 30
N_CLASSES = 4


@dataclass(frozen=True)
class ModelParameters:
    """All layer weights; immutable container, arrays are not copied."""

    e2e1_r: np.ndarray
    e2e1_c: np.ndarray
    e2e1_b: np.ndarray
    e2e2_r: np.ndarray
    e2e2_c: np.ndarray
    e2e2_b: np.ndarray
    e2n_w: np.ndarray
    e2n_b: np.ndarray
    n2g_w: np.ndarray
    n2g_b: np.ndarray
    fc1_w: np.ndarray
    fc1_b: np.ndarray
    fc2_w: np.ndarray
    fc2_b: np.ndarray
    out_w: np.ndarray
    out_b: np.ndarray

    @property
    def node_count(self) -> int:
        return self.e2e1_r.shape[2]

    def field_names(self) -> tuple[str, ...]:
        return tuple(f.name for f in fields(self))

    def arrays(self) -> dict[str, np.ndarray]:
        return {name: getattr(self, name) for name in self.field_names()}

    def astype(self, dtype) -> "ModelParameters":
        return replace(
            self, **{k: v.astype(dtype) for k, v in self.arrays().items()}
        )

    def validate(self) -> None:
        q = self.node_count
        expected = expected_shapes(q)
        for name, arr in self.arrays().items():
            if arr.shape != expected[name]:
                raise ContractViolationError(
                    f"{name} has shape {arr.shape}, expected {expected[name]}"
                )
            if not np.all(np.isfinite(arr)):
                raise NumericError(f"non-finite values in {name}")


def expected_shapes(q: int) -> dict[str, tuple[int, ...]]:
    return {
        "e2e1_r": (E2E1_FILTERS, 1, q),
        "e2e1_c": (E2E1_FILTERS, 1, q),
        "e2e1_b": (E2E1_FILTERS,),
        "e2e2_r": (E2E2_FILTERS, E2E1_FILTERS, q),
        "e2e2_c": (E2E2_FILTERS, E2E1_FILTERS, q),
        "e2e2_b": (E2E2_FILTERS,),
        "e2n_w": (E2N_FILTERS, E2E2_FILTERS, q),
        "e2n_b": (E2N_FILTERS,),
        "n2g_w": (N2G_UNITS, q * E2N_FILTERS),
        "n2g_b": (N2G_UNITS,),
        "fc1_w": (FC1_UNITS, N2G_UNITS),
        "fc1_b": (FC1_UNITS,),
        "fc2_w": (FC2_UNITS, FC1_UNITS),
        "fc2_b": (FC2_UNITS,),
        "out_w": (N_CLASSES, FC2_UNITS),
        "out_b": (N_CLASSES,),
    }


def initialize_parameters(q: int, rng: np.random.Generator, dtype=np.float64) -> ModelParameters:
    """Seeded initialization; zero biases.

    Cross-shaped and edge-to-node filters start as random convex averages
    (positive weights normalized to a fixed sum): the early network then
    computes monotone mixtures of degree-profile statistics, which keeps the
    class signal linearly readable at initialization and bounds activations
    independently of q. Dense layers use He-style scaling for the Leaky ReLU
    slope. Zero-mean conv filters scramble the signal into the nonlinearity
    and measurably stall learning on small cohorts.
    """
    gain = np.sqrt(2.0 / (1.0 + LEAKY_SLOPE**2))

    def dense(shape, fan_in):
        return (rng.standard_normal(shape) * gain / np.sqrt(fan_in)).astype(dtype)

    def averaging(shape, total):
        w = np.abs(rng.standard_normal(shape))
        return (w / w.sum(axis=tuple(range(1, w.ndim)), keepdims=True) * total).astype(dtype)

    zeros = lambda n: np.zeros(n, dtype=dtype)
    return ModelParameters(
        e2e1_r=averaging((E2E1_FILTERS, 1, q), 0.5),
        e2e1_c=averaging((E2E1_FILTERS, 1, q), 0.5),
        e2e1_b=zeros(E2E1_FILTERS),
        e2e2_r=averaging((E2E2_FILTERS, E2E1_FILTERS, q), 0.5),
        e2e2_c=averaging((E2E2_FILTERS, E2E1_FILTERS, q), 0.5),
        e2e2_b=zeros(E2E2_FILTERS),
        e2n_w=averaging((E2N_FILTERS, E2E2_FILTERS, q), 1.0),
        e2n_b=zeros(E2N_FILTERS),
        n2g_w=dense((N2G_UNITS, q * E2N_FILTERS), q * E2N_FILTERS),
        n2g_b=zeros(N2G_UNITS),
        fc1_w=dense((FC1_UNITS, N2G_UNITS), N2G_UNITS),
        fc1_b=zeros(FC1_UNITS),
        fc2_w=dense((FC2_UNITS, FC1_UNITS), FC1_UNITS),
        fc2_b=zeros(FC2_UNITS),
        out_w=dense((N_CLASSES, FC2_UNITS), FC2_UNITS),
        out_b=zeros(N_CLASSES),
    )


def forward(
    params: ModelParameters,
    x: np.ndarray,
    keep_cache: bool = False,
    dropout: float = 0.0,
    dropout_rng: Optional[np.random.Generator] = None,
):
    """Full forward pass on a (B, q, q, 1) batch; returns (probs, cache).

    dropout > 0 applies inverted dropout to the two hidden dense layers
    (training only; inference always runs the plain deterministic pass).
    """
    a = LEAKY_SLOPE
    cache: dict = {}

    def drop(h, key):
        if dropout <= 0.0:
            return h
        mask = (dropout_rng.random(h.shape) >= dropout).astype(h.dtype) / (1.0 - dropout)
        cache[key] = mask
        return h * mask

    xt = layers.transpose_input(x)
    a1 = layers.edge2edge_forward(x, params.e2e1_r, params.e2e1_c, params.e2e1_b, xt=xt)
    h1 = layers.leaky_relu(a1, a)
    h1t = layers.transpose_input(h1)
    a2 = layers.edge2edge_forward(h1, params.e2e2_r, params.e2e2_c, params.e2e2_b, xt=h1t)
    h2 = layers.leaky_relu(a2, a)
    a3 = layers.edge2node_forward(h2, params.e2n_w, params.e2n_b)
    h3 = layers.leaky_relu(a3, a)
    flat = h3.reshape(h3.shape[0], -1)
    a4 = layers.dense_forward(flat, params.n2g_w, params.n2g_b)
    h4 = drop(layers.leaky_relu(a4, a), "m4")
    a5 = layers.dense_forward(h4, params.fc1_w, params.fc1_b)
    h5 = drop(layers.leaky_relu(a5, a), "m5")
    a6 = layers.dense_forward(h5, params.fc2_w, params.fc2_b)
    h6 = layers.leaky_relu(a6, a)
    z = layers.dense_forward(h6, params.out_w, params.out_b)
    probs = layers.softmax(z)
    if keep_cache:
        cache.update(
            x=x, xt=xt, a1=a1, h1=h1, h1t=h1t, a2=a2, h2=h2, a3=a3, h3=h3,
            flat=flat, a4=a4, h4=h4, a5=a5, h5=h5, a6=a6, h6=h6, z=z, probs=probs,
        )
    return probs, cache


def backward(params: ModelParameters, cache: dict, dz: np.ndarray):
    """Backpropagate from logits gradient dz; returns (dx, grads by field)."""
    a = LEAKY_SLOPE
    grads: dict[str, np.ndarray] = {}
    dh6, grads["out_w"], grads["out_b"] = layers.dense_backward(cache["h6"], params.out_w, dz)
    da6 = layers.leaky_relu_backward(cache["a6"], dh6, a)
    dh5, grads["fc2_w"], grads["fc2_b"] = layers.dense_backward(cache["h5"], params.fc2_w, da6)
    if "m5" in cache:
        dh5 = dh5 * cache["m5"]
    da5 = layers.leaky_relu_backward(cache["a5"], dh5, a)
    dh4, grads["fc1_w"], grads["fc1_b"] = layers.dense_backward(cache["h4"], params.fc1_w, da5)
    if "m4" in cache:
        dh4 = dh4 * cache["m4"]
    da4 = layers.leaky_relu_backward(cache["a4"], dh4, a)
    dflat, grads["n2g_w"], grads["n2g_b"] = layers.dense_backward(
        cache["flat"], params.n2g_w, da4
    )
    dh3 = dflat.reshape(cache["h3"].shape)
    da3 = layers.leaky_relu_backward(cache["a3"], dh3, a)
    dh2, grads["e2n_w"], grads["e2n_b"] = layers.edge2node_backward(
        cache["h2"], params.e2n_w, da3
    )
    da2 = layers.leaky_relu_backward(cache["a2"], dh2, a)
    dh1, grads["e2e2_r"], grads["e2e2_c"], grads["e2e2_b"] = layers.edge2edge_backward(
        cache["h1"], params.e2e2_r, params.e2e2_c, da2, xt=cache["h1t"]
    )
    da1 = layers.leaky_relu_backward(cache["a1"], dh1, a)
    dx, grads["e2e1_r"], grads["e2e1_c"], grads["e2e1_b"] = layers.edge2edge_backward(
        cache["x"], params.e2e1_r, params.e2e1_c, da1, xt=cache["xt"]
    )
    return dx, grads


def graph_input(g: Connectome, q: int, dtype=np.float64) -> np.ndarray:
    if g.node_count != q:
        raise ContractViolationError(
            f"model is shaped for q={q}, graph has q={g.node_count}"
        )
    return (g.weights.astype(dtype) / 100.0)[None, :, :, None]


def classify(params: ModelParameters, g: Connectome) -> StageProbabilities:
    """Stage probabilities for one graph."""
    x = graph_input(g, params.node_count, np.float64)
    probs, _ = forward(params.astype(np.float64), x)
    if not np.all(np.isfinite(probs)):
        raise NumericError("forward pass produced non-finite activations")
    return StageProbabilities.from_array(probs[0])


def class_score_gradient(
    params: ModelParameters, g: Connectome, stage: Stage
) -> np.ndarray:
    """d p_stage / d input, symmetrized with zero diagonal (q x q)."""
    params64 = params.astype(np.float64)
    x = graph_input(g, params.node_count, np.float64)
    probs, cache = forward(params64, x, keep_cache=True)
    if not np.all(np.isfinite(probs)):
        raise NumericError("forward pass produced non-finite activations")
    dprobs = np.zeros_like(probs)
    dprobs[0, stage.value] = 1.0
    dz = layers.softmax_backward(probs, dprobs)
    dx, _ = backward(params64, cache, dz)
    grad = dx[0, :, :, 0]
    sym = (grad + grad.T) / 2.0
    np.fill_diagonal(sym, 0.0)
    return sym


def edge_importance(
    params: ModelParameters, g: Connectome, stage: Optional[Stage] = None
) -> ImportanceMap:
    """Saliency map for a class (default: the predicted class)."""
    if stage is None:
        stage = classify(params, g).argmax()
    return ImportanceMap(values=class_score_gradient(params, g, stage), target_class=stage)
