"""Graph metrics over active-edge topology: density and Newman assortativity.

Density uses the literal normalization |E| / (q(q-1)). Assortativity is the
degree-pair correlation r = sum_xy xy(e_xy - a_x b_y) / (sigma_a sigma_b),
computed over every active edge counted in both orientations. The sums are
accumulated in exact integer arithmetic and converted to float only at the
end, so the result is as accurate as a single rounding.

A registry maps metric names to their functions so callers (the optimizer in
particular) can treat metric evaluation as an external, pluggable computation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Dict

from .errors import ContractViolationError, UndefinedMetricError
from .graph import Connectome


@dataclass(frozen=True)
class DegreeMixing:
    """Degree-pair distribution of a graph's active edges.

    e maps ordered degree pairs (x, y) to the fraction of oriented edges
    joining endpoint degrees x and y; a and b are its marginals; sigma_a
    and sigma_b are the standard deviations of those marginal distributions.
    """

    e: Dict[tuple[int, int], float]
    a: Dict[int, float]
    b: Dict[int, float]
    sigma_a: float
    sigma_b: float


def density(g: Connectome) -> float:
    """|E| / (q(q-1)) over active edges."""
    q = g.node_count
    if q < 2:
        raise UndefinedMetricError(f"density needs at least 2 nodes, got {q}")
    return g.edge_count() / (q * (q - 1))


def _pair_counts(g: Connectome) -> tuple[Dict[tuple[int, int], int], int]:
    """Ordered degree-pair counts (each edge in both orientations) and total."""
    deg = g.degrees()
    counts: Dict[tuple[int, int], int] = {}
    for x, y, _ in g.active_edges():
        dx, dy = int(deg[x]), int(deg[y])
        counts[(dx, dy)] = counts.get((dx, dy), 0) + 1
        counts[(dy, dx)] = counts.get((dy, dx), 0) + 1
    return counts, 2 * g.edge_count()


def degree_mixing(g: Connectome) -> DegreeMixing:
    """Expose the e_xy distribution and its marginals for inspection/testing."""
    if g.edge_count() == 0:
        raise UndefinedMetricError("degree mixing undefined on an edgeless graph")
    counts, n = _pair_counts(g)
    e = {k: c / n for k, c in counts.items()}
    a: Dict[int, float] = {}
    b: Dict[int, float] = {}
    for (x, y), frac in e.items():
        a[x] = a.get(x, 0.0) + frac
        b[y] = b.get(y, 0.0) + frac
    mean_a = sum(x * w for x, w in a.items())
    mean_b = sum(y * w for y, w in b.items())
    var_a = sum(x * x * w for x, w in a.items()) - mean_a**2
    var_b = sum(y * y * w for y, w in b.items()) - mean_b**2
    return DegreeMixing(e=e, a=a, b=b, sigma_a=math.sqrt(max(var_a, 0.0)), sigma_b=math.sqrt(max(var_b, 0.0)))


def assortativity(g: Connectome) -> float:
    """Newman degree assortativity over active edges.

    Raises UndefinedMetricError when there are no active edges or when the
    endpoint-degree variance vanishes (all endpoint degrees identical).
    """
    if g.edge_count() == 0:
        raise UndefinedMetricError("assortativity undefined on an edgeless graph")
    counts, n = _pair_counts(g)
    # Integer sufficient statistics over the oriented degree-pair distribution.
    s_x = sum(x * c for (x, _), c in counts.items())
    s_y = sum(y * c for (_, y), c in counts.items())
    s_xx = sum(x * x * c for (x, _), c in counts.items())
    s_yy = sum(y * y * c for (_, y), c in counts.items())
    s_xy = sum(x * y * c for (x, y), c in counts.items())
    var_x = n * s_xx - s_x * s_x
    var_y = n * s_yy - s_y * s_y
    if var_x == 0 or var_y == 0:
        raise UndefinedMetricError(
            "assortativity undefined: endpoint degrees have zero variance"
        )
    return (n * s_xy - s_x * s_y) / math.sqrt(var_x) / math.sqrt(var_y)


MetricFn = Callable[[Connectome], float]

_REGISTRY: Dict[str, MetricFn] = {}


def register_metric(name: str, fn: MetricFn) -> None:
    """Register a metric under a stable name (external-computation hook)."""
    key = name.lower()
    if key in _REGISTRY:
        raise ContractViolationError(f"metric {name!r} already registered")
    _REGISTRY[key] = fn


def get_metric(name: str) -> MetricFn:
    try:
        return _REGISTRY[name.lower()]
    except KeyError:
        raise ContractViolationError(f"unknown metric {name!r}") from None


def metric_names() -> list[str]:
    return sorted(_REGISTRY)


register_metric("density", density)
register_metric("assortativity", assortativity)
