"""Seeded synthetic connectome generator.

Stands in for clinical data, which is not distributable. Per-stage edge
counts follow the published per-stage means and standard deviations; on top
of the random background each graph carries a planted clique whose size
range and preferred node region depend on the stage, giving both the
classifier and the structural-evolution experiments a learnable, explicitly
synthetic signal. No clinical claim attaches to these graphs.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from ..errors import ContractViolationError, InfeasibleError
from ..graph import Connectome
from ..stages import Stage

DEFAULT_NODE_COUNT = 84

# per-stage edge-count statistics (mean, sd) at q=84
STAGE_EDGE_STATS = {
    Stage.CIS: (2036.31, 139.19),
    Stage.RR: (1951.25, 235.43),
    Stage.PP: (1760.96, 293.58),
    Stage.SP: (1634.56, 315.27),
}

# planted-structure knobs: clique size range and the node window the clique
# is sampled from (fractions of q, so they scale with graph size). Windows
# are disjoint per stage so the planted structure is regionally consistent
# across samples of a stage, which is what makes the labels learnable.
STAGE_CLIQUE_SIZES = {
    Stage.CIS: (18, 21),
    Stage.RR: (15, 18),
    Stage.PP: (12, 15),
    Stage.SP: (8, 11),
}
STAGE_CLIQUE_WINDOWS = {
    Stage.CIS: (0.00, 0.25),
    Stage.RR: (0.25, 0.50),
    Stage.PP: (0.50, 0.75),
    Stage.SP: (0.75, 1.00),
}

# class counts of the reference cohort (63 + 199 + 190 + 126 = 578)
BENCHMARK_CLASS_COUNTS = {
    Stage.CIS: 63,
    Stage.RR: 199,
    Stage.SP: 190,
    Stage.PP: 126,
}


@dataclass(frozen=True)
class SyntheticSpec:
    stage: Stage
    node_count: int = DEFAULT_NODE_COUNT
    edge_mean: Optional[float] = None
    edge_sd: Optional[float] = None
    clique_size_range: Optional[tuple[int, int]] = None
    clique_window: Optional[tuple[float, float]] = None
    weight_range: tuple[int, int] = (1, 100)

    def __post_init__(self):
        if self.node_count < 2:
            raise ContractViolationError("synthetic graphs need at least 2 nodes")
        mean = self.edge_mean if self.edge_mean is not None else STAGE_EDGE_STATS[self.stage][0]
        sd = self.edge_sd if self.edge_sd is not None else STAGE_EDGE_STATS[self.stage][1]
        if mean <= 0 or sd < 0:
            raise ContractViolationError("edge count mean must be > 0 and sd >= 0")
        lo, hi = self.weight_range
        if not (1 <= lo <= hi <= 100):
            raise ContractViolationError("weight range must satisfy 1 <= lo <= hi <= 100")

    @property
    def resolved_edge_stats(self) -> tuple[float, float]:
        stats = STAGE_EDGE_STATS[self.stage]
        return (
            self.edge_mean if self.edge_mean is not None else stats[0],
            self.edge_sd if self.edge_sd is not None else stats[1],
        )

    @property
    def resolved_clique_sizes(self) -> tuple[int, int]:
        return self.clique_size_range or STAGE_CLIQUE_SIZES[self.stage]

    @property
    def resolved_window(self) -> tuple[float, float]:
        return self.clique_window or STAGE_CLIQUE_WINDOWS[self.stage]


def generate_synthetic(spec: SyntheticSpec, seed: int) -> tuple[Connectome, Stage]:
    """One labeled synthetic connectome, deterministic per (spec, seed)."""
    q = spec.node_count
    max_edges = q * (q - 1) // 2
    mean, sd = spec.resolved_edge_stats
    if mean > max_edges:
        raise InfeasibleError(
            f"edge mean {mean} infeasible for q={q} (max {max_edges})"
        )
    rng = np.random.default_rng(seed)

    lo, hi = spec.resolved_clique_sizes
    hi = min(hi, q)
    lo = min(lo, hi)
    size = int(rng.integers(lo, hi + 1))
    w_lo, w_hi = spec.resolved_window
    pool_start = int(round(w_lo * q))
    pool_end = max(int(round(w_hi * q)), pool_start + size)
    pool = np.arange(pool_start, min(pool_end, q))
    if len(pool) < size:
        pool = np.arange(q)
    # anchor the clique at the window start with light jitter: the planted
    # region is consistent across same-stage samples, which is what makes
    # the stage labels learnable from modest cohort sizes
    jitter = min(2, len(pool) - size)
    members = pool[:size] if jitter <= 0 else np.sort(
        rng.choice(pool[: size + jitter], size=size, replace=False)
    )

    target = int(np.clip(round(rng.normal(mean, sd)), size * (size - 1) // 2, max_edges))

    matrix = np.zeros((q, q), dtype=np.int64)
    planted = {(int(a), int(b)) for i, a in enumerate(members) for b in members[i + 1 :]}
    rest = [
        (i, j)
        for i in range(q)
        for j in range(i + 1, q)
        if (i, j) not in planted
    ]
    extra = target - len(planted)
    chosen = list(planted)
    if extra > 0:
        picks = rng.choice(len(rest), size=extra, replace=False)
        chosen.extend(rest[i] for i in picks)
    weights = rng.integers(spec.weight_range[0], spec.weight_range[1] + 1, size=len(chosen))
    for (i, j), w in zip(chosen, weights):
        matrix[i, j] = matrix[j, i] = int(w)
    return Connectome(matrix), spec.stage


def generate_benchmark(
    seed: int,
    class_counts: Optional[dict[Stage, int]] = None,
    node_count: int = DEFAULT_NODE_COUNT,
) -> list[tuple[Connectome, Stage]]:
    """Labeled cohort with the reference class proportions, deterministic."""
    counts = class_counts or BENCHMARK_CLASS_COUNTS
    master = np.random.default_rng(seed)
    out = []
    for stage in sorted(counts, key=lambda s: s.value):
        spec = SyntheticSpec(stage=stage, node_count=node_count)
        for _ in range(counts[stage]):
            out.append(generate_synthetic(spec, int(master.integers(1 << 62))))
    return out
