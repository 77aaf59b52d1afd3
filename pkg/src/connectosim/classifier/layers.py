"""Forward and backward passes for the topology-aware layers.

All functions are pure: no hidden state, gradients returned explicitly.
The cross-shaped edge-to-edge filter mixes row i and column j of the
adjacency tensor; edge-to-node collapses each row to a node feature. The
contractions are phrased as flat matrix products so they hit BLAS.

Shapes (batch-first):
    edge-to-edge: (B, q, q, C_in) -> (B, q, q, F), params r, c: (F, C_in, q)
    edge-to-node: (B, q, q, C)    -> (B, q, F),    params w:    (F, C, q)
"""

from __future__ import annotations

import numpy as np


def _rowmat(x: np.ndarray) -> np.ndarray:
    b, q, _, cin = x.shape
    return x.reshape(b * q, q * cin)


def _filtmat(f_param: np.ndarray) -> np.ndarray:
    # (F, C, q) -> (q*C, F) matching the (k, c) flattening of the input
    f, c, q = f_param.shape
    return np.ascontiguousarray(f_param.transpose(2, 1, 0)).reshape(q * c, f)


def transpose_input(x: np.ndarray) -> np.ndarray:
    """Swap the two node axes; cached by callers to avoid repeat copies."""
    return np.ascontiguousarray(x.transpose(0, 2, 1, 3))


def edge2edge_forward(x, r, c, bias, xt=None):
    """O[b,i,j,f] = sum_{ch,k} r[f,ch,k] x[b,i,k,ch] + c[f,ch,k] x[b,k,j,ch] + bias[f]."""
    squeeze = x.ndim == 3
    if squeeze:
        x = x[None]
    b, q = x.shape[0], x.shape[1]
    nfilt = r.shape[0]
    if xt is None:
        xt = transpose_input(x)
    row = (_rowmat(x) @ _filtmat(r)).reshape(b, q, nfilt)
    col = (_rowmat(xt) @ _filtmat(c)).reshape(b, q, nfilt)
    out = row[:, :, None, :] + col[:, None, :, :]
    out += bias
    return out[0] if squeeze else out


def edge2edge_backward(x, r, c, dout, xt=None):
    """Gradients (dx, dr, dc, dbias) of the edge-to-edge layer."""
    squeeze = x.ndim == 3
    if squeeze:
        x = x[None]
        dout = dout[None]
    b, q = x.shape[0], x.shape[1]
    cin = x.shape[3]
    nfilt = r.shape[0]
    if xt is None:
        xt = transpose_input(x)
    drow = dout.sum(axis=2).reshape(b * q, nfilt)
    dcol = dout.sum(axis=1).reshape(b * q, nfilt)
    dbias = dout.sum(axis=(0, 1, 2))
    # (q*C, F) gradients back to (F, C, q)
    dr = (_rowmat(x).T @ drow).reshape(q, cin, nfilt).transpose(2, 1, 0)
    dc = (_rowmat(xt).T @ dcol).reshape(q, cin, nfilt).transpose(2, 1, 0)
    dx = (drow @ _filtmat(r).T).reshape(b, q, q, cin)
    dxt = (dcol @ _filtmat(c).T).reshape(b, q, q, cin)
    dx += dxt.transpose(0, 2, 1, 3)
    if squeeze:
        return dx[0], dr, dc, dbias
    return dx, dr, dc, dbias


def edge2node_forward(x, w, bias):
    """N[b,i,f] = sum_{ch,j} w[f,ch,j] x[b,i,j,ch] + bias[f]."""
    squeeze = x.ndim == 3
    if squeeze:
        x = x[None]
    b, q = x.shape[0], x.shape[1]
    nfilt = w.shape[0]
    out = (_rowmat(x) @ _filtmat(w)).reshape(b, q, nfilt) + bias
    return out[0] if squeeze else out


def edge2node_backward(x, w, dout):
    squeeze = x.ndim == 3
    if squeeze:
        x = x[None]
        dout = dout[None]
    b, q = x.shape[0], x.shape[1]
    cin = x.shape[3]
    nfilt = w.shape[0]
    dflat = dout.reshape(b * q, nfilt)
    dbias = dout.sum(axis=(0, 1))
    dw = (_rowmat(x).T @ dflat).reshape(q, cin, nfilt).transpose(2, 1, 0)
    dx = (dflat @ _filtmat(w).T).reshape(b, q, q, cin)
    if squeeze:
        return dx[0], dw, dbias
    return dx, dw, dbias


def dense_forward(x, weight, bias):
    """x (B, n_in) @ weight.T (n_in, n_out) + bias."""
    return x @ weight.T + bias


def dense_backward(x, weight, dout):
    dw = dout.T @ x
    dbias = dout.sum(axis=0)
    dx = dout @ weight
    return dx, dw, dbias


def leaky_relu(x, alpha):
    return np.where(x > 0, x, alpha * x)


def leaky_relu_backward(x, dout, alpha):
    return np.where(x > 0, dout, alpha * dout)


def softmax(z):
    """Row-wise stable softmax."""
    shifted = z - z.max(axis=-1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=-1, keepdims=True)


def softmax_backward(probs, dprobs):
    """VJP of softmax: dz_k = p_k (dp_k - sum_j dp_j p_j)."""
    inner = (dprobs * probs).sum(axis=-1, keepdims=True)
    return probs * (dprobs - inner)
