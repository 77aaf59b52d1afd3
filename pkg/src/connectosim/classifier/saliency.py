"""Ranking active edges by saliency and splitting them into importance tiers."""

from __future__ import annotations

from typing import Optional

import numpy as np

from ..errors import ContractViolationError
from ..graph import Connectome
from ..rounding import ceil_decimal_product
from ..stages import ImportanceMap


def _values(importance) -> np.ndarray:
    return np.asarray(getattr(importance, "values", importance), dtype=float)


def ranked_active_edges(
    importance, g: Connectome, use_absolute: bool = False
) -> list[tuple[int, int]]:
    """Active edges by descending importance, ties by ascending (x, y).

    Ranking uses the signed gradient by default; use_absolute ranks by
    magnitude instead.
    """
    imp = _values(importance)
    key = (lambda p: (-abs(imp[p]), p)) if use_absolute else (lambda p: (-imp[p], p))
    return sorted(g.active_pairs(), key=key)


def partition_by_importance(
    importance,
    g: Connectome,
    fraction: float,
    use_absolute: bool = False,
) -> tuple[frozenset[tuple[int, int]], frozenset[tuple[int, int]]]:
    """Split active edges into (important, unimportant) tiers.

    The top ceil(fraction * |E|) edges by importance are the important ones;
    the two sets partition the active edges.
    """
    if not (0.0 < fraction < 1.0):
        raise ContractViolationError(f"fraction must be in (0, 1), got {fraction}")
    ranked = ranked_active_edges(importance, g, use_absolute)
    cut = ceil_decimal_product(fraction, len(ranked))
    return frozenset(ranked[:cut]), frozenset(ranked[cut:])


def importance_threshold(
    importance,
    g: Connectome,
    fraction: float,
    use_absolute: bool = False,
) -> float:
    """The importance value of the last edge inside the important tier.

    Used as the cut point T for threshold-filtered solvers: important means
    value >= T, unimportant means value <= T (edges exactly at T pass both).
    """
    if not (0.0 < fraction < 1.0):
        raise ContractViolationError(f"fraction must be in (0, 1), got {fraction}")
    ranked = ranked_active_edges(importance, g, use_absolute)
    if not ranked:
        raise ContractViolationError("no active edges to rank")
    cut = ceil_decimal_product(fraction, len(ranked))
    imp = _values(importance)
    x, y = ranked[cut - 1]
    return abs(imp[x, y]) if use_absolute else float(imp[x, y])
