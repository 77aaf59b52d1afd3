"""Connectome data model: symmetric integer-weighted graphs over dense node labels.

Weights are integers in [0, 100] (scaled connection strengths). An edge is
active iff its weight is strictly positive; weight 0 means the connection is
absent. All mutation elsewhere in the package is modeled as constructing a
new Connectome.
"""

from __future__ import annotations

from typing import Iterable, NamedTuple, Optional, Sequence

import numpy as np

from .errors import ContractViolationError, GraphValidationError

MAX_WEIGHT = 100


class Edge(NamedTuple):
    """Canonical active edge: x < y, weight in [1, 100]."""

    x: int
    y: int
    w: int


def canonical_pair(x: int, y: int) -> tuple[int, int]:
    """Order an undirected node pair as (min, max)."""
    return (x, y) if x < y else (y, x)


class Connectome:
    """Immutable symmetric weighted graph over nodes 0..q-1.

    The weight matrix is validated on construction: square, symmetric,
    zero diagonal, integer entries in [0, 100]. Invalid input raises
    GraphValidationError instead of being silently repaired.
    """

    __slots__ = ("_weights", "_node_names")

    def __init__(self, weights, node_names: Optional[Sequence[str]] = None):
        arr = np.asarray(weights)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
            raise GraphValidationError(
                f"weight matrix must be square, got shape {arr.shape}"
            )
        if arr.shape[0] < 1:
            raise GraphValidationError("graph needs at least one node")
        if not np.issubdtype(arr.dtype, np.integer):
            if not np.all(np.equal(np.mod(arr, 1), 0)):
                raise GraphValidationError("weights must be integers (scaled 0-100)")
            arr = arr.astype(np.int64)
        else:
            arr = arr.astype(np.int64)
        bad = (arr < 0) | (arr > MAX_WEIGHT)
        if bad.any():
            i, j = np.argwhere(bad)[0]
            raise GraphValidationError(
                f"weight[{i}][{j}]={arr[i, j]} outside [0, {MAX_WEIGHT}]"
            )
        if np.any(np.diagonal(arr) != 0):
            v = int(np.argwhere(np.diagonal(arr) != 0)[0][0])
            raise GraphValidationError(f"self-loop at node {v} (diagonal must be 0)")
        asym = arr != arr.T
        if asym.any():
            i, j = np.argwhere(asym)[0]
            raise GraphValidationError(
                f"asymmetric weights at ({i},{j}): {arr[i, j]} != {arr[j, i]}"
            )
        arr.setflags(write=False)
        self._weights = arr
        if node_names is not None and len(node_names) != arr.shape[0]:
            raise GraphValidationError(
                f"{len(node_names)} node names for {arr.shape[0]} nodes"
            )
        self._node_names = tuple(node_names) if node_names is not None else None

    @property
    def node_count(self) -> int:
        return self._weights.shape[0]

    @property
    def weights(self) -> np.ndarray:
        """Read-only q x q integer weight matrix."""
        return self._weights

    @property
    def node_names(self) -> Optional[tuple[str, ...]]:
        """Optional sidecar labels; not part of graph identity."""
        return self._node_names

    def weight(self, x: int, y: int) -> int:
        self._check_index(x)
        self._check_index(y)
        return int(self._weights[x, y])

    def degree(self, v: int) -> int:
        """Number of active edges incident to v."""
        self._check_index(v)
        return int(np.count_nonzero(self._weights[v]))

    def degrees(self) -> np.ndarray:
        """Active-edge degree of every node."""
        return np.count_nonzero(self._weights, axis=1)

    def active_edges(self) -> list[Edge]:
        """Canonical active edges sorted by (x, y)."""
        xs, ys = np.nonzero(np.triu(self._weights, k=1))
        return [Edge(int(x), int(y), int(self._weights[x, y])) for x, y in zip(xs, ys)]

    def active_pairs(self) -> list[tuple[int, int]]:
        """Canonical (x, y) pairs of active edges, sorted."""
        xs, ys = np.nonzero(np.triu(self._weights, k=1))
        return [(int(x), int(y)) for x, y in zip(xs, ys)]

    def edge_count(self) -> int:
        """Number of active canonical edges."""
        return int(np.count_nonzero(np.triu(self._weights, k=1)))

    def is_active(self, x: int, y: int) -> bool:
        return self.weight(x, y) > 0

    def adjacency_masks(self) -> list[int]:
        """Per-node neighbor bitmasks over active edges (for exact solvers)."""
        masks = [0] * self.node_count
        for x, y in self.active_pairs():
            masks[x] |= 1 << y
            masks[y] |= 1 << x
        return masks

    def replace_weights(self, new_weights: np.ndarray) -> "Connectome":
        """Construct a new Connectome with the same name table."""
        return Connectome(new_weights, node_names=self._node_names)

    def _check_index(self, v: int) -> None:
        if not (isinstance(v, (int, np.integer)) and 0 <= v < self.node_count):
            raise ContractViolationError(
                f"node index {v!r} out of range [0, {self.node_count})"
            )

    def __eq__(self, other) -> bool:
        if not isinstance(other, Connectome):
            return NotImplemented
        return np.array_equal(self._weights, other._weights)

    def __hash__(self):
        return hash(self._weights.tobytes())

    def __repr__(self):
        return f"Connectome(q={self.node_count}, edges={self.edge_count()})"


def validate_selection(g: Connectome, pairs: Iterable[tuple[int, int]]) -> frozenset[tuple[int, int]]:
    """Canonicalize an edge selection and require every pair active in g.

    Raises ContractViolationError on inactive or out-of-range pairs.
    """
    out = set()
    for x, y in pairs:
        cx, cy = canonical_pair(int(x), int(y))
        if not (0 <= cx < g.node_count and 0 <= cy < g.node_count) or cx == cy:
            raise ContractViolationError(f"invalid edge pair ({x}, {y})")
        if g.weights[cx, cy] == 0:
            raise ContractViolationError(f"edge ({cx}, {cy}) is not active")
        out.add((cx, cy))
    return frozenset(out)


def selection_sorted(selection: Iterable[tuple[int, int]]) -> list[tuple[int, int]]:
    """Deterministic (x, y)-sorted view of a selection."""
    return sorted(selection)
