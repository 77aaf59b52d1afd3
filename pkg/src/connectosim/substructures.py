"""Exact solvers for the structural selection criteria.

Max clique and maximum independent set use branch and bound with a greedy
coloring bound over node bitmasks; min vertex cover is the complement of the
maximum independent set. Every solver canonicalizes ties to the
lexicographically smallest sorted node list so repeated runs (and history
diffs) are reproducible.

The clique solver optionally restricts the admissible edge set by edge
importance: ONLY_UNIMPORTANT admits edges with importance <= threshold,
ONLY_IMPORTANT admits importance >= threshold (both non-strict).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import CapacityError, ContractViolationError
from .graph import Connectome

EXACT_NODE_CEILING = 512


class Variant(enum.Enum):
    MAX_CLIQUE = "clique"
    INDEPENDENT_SET = "independent-set"
    MAX_DEGREE_NODE = "max-degree"
    K_HUB = "k-hub"
    MIN_VERTEX_COVER = "mvc"


class ImportanceFilter(enum.Enum):
    NONE = "none"
    ONLY_IMPORTANT = "only-important"
    ONLY_UNIMPORTANT = "only-unimportant"


@dataclass(frozen=True)
class StructuralCriterion:
    variant: Variant
    k: Optional[int] = None
    importance_filter: ImportanceFilter = ImportanceFilter.NONE

    def __post_init__(self):
        if self.variant is Variant.K_HUB:
            if self.k is None or self.k < 1:
                raise ContractViolationError("k-hub requires k >= 1")
        elif self.k is not None:
            raise ContractViolationError(f"{self.variant.value} takes no k")
        if (
            self.importance_filter is not ImportanceFilter.NONE
            and self.variant is not Variant.MAX_CLIQUE
        ):
            raise ContractViolationError(
                "importance filtering is only defined for the clique criterion"
            )


@dataclass(frozen=True)
class StructureSolution:
    nodes: frozenset[int]
    selection: frozenset[tuple[int, int]]
    optimum_size: int

    def sorted_nodes(self) -> list[int]:
        return sorted(self.nodes)

    def sorted_selection(self) -> list[tuple[int, int]]:
        return sorted(self.selection)


def _check_capacity(g: Connectome, max_nodes: int) -> None:
    if g.node_count > max_nodes:
        raise CapacityError(
            f"exact solver ceiling is {max_nodes} nodes, graph has {g.node_count}"
        )


def _importance_values(importance) -> np.ndarray:
    return np.asarray(getattr(importance, "values", importance), dtype=float)


def _admissible_masks(
    g: Connectome,
    filter_mode: ImportanceFilter,
    importance,
    threshold: Optional[float],
) -> list[int]:
    """Neighbor bitmasks over the admissible edge set."""
    if filter_mode is ImportanceFilter.NONE:
        return g.adjacency_masks()
    if importance is None or threshold is None:
        raise ContractViolationError(
            "importance filter requires an importance map and a threshold"
        )
    imp = _importance_values(importance)
    if imp.shape != (g.node_count, g.node_count):
        raise ContractViolationError(
            f"importance shape {imp.shape} does not match q={g.node_count}"
        )
    masks = [0] * g.node_count
    for x, y in g.active_pairs():
        v = imp[x, y]
        keep = v >= threshold if filter_mode is ImportanceFilter.ONLY_IMPORTANT else v <= threshold
        if keep:
            masks[x] |= 1 << y
            masks[y] |= 1 << x
    return masks


def _iter_bits(mask: int):
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


def _search_clique(adj: list[int], cand: int, goal: Optional[int] = None) -> list[int]:
    """Best clique within the candidate mask via coloring-bounded search.

    With a goal, the search stops as soon as a clique of that size is found.
    """
    best: list[int] = []

    def expand(mask: int, current: list[int]) -> bool:
        nonlocal best
        if not mask:
            if len(current) > len(best):
                best = current.copy()
            return goal is not None and len(best) >= goal
        order: list[int] = []
        bounds: list[int] = []
        uncolored = mask
        color = 0
        while uncolored:
            color += 1
            avail = uncolored
            while avail:
                v = (avail & -avail).bit_length() - 1
                bit = 1 << v
                avail &= ~(adj[v] | bit)
                uncolored &= ~bit
                order.append(v)
                bounds.append(color)
        limit = goal if goal is not None else None
        for idx in range(len(order) - 1, -1, -1):
            prune_at = len(best) if limit is None else min(len(best), limit - 1)
            if len(current) + bounds[idx] <= prune_at:
                return False
            v = order[idx]
            current.append(v)
            if expand(mask & adj[v], current):
                return True
            current.pop()
            mask &= ~(1 << v)
        return False

    expand(cand, [])
    return best


def _iter_bits_desc(mask: int):
    while mask:
        v = mask.bit_length() - 1
        yield v
        mask ^= 1 << v


def _canonical_max_clique(adj: list[int], q: int, largest: bool = False) -> list[int]:
    """Maximum clique canonicalized as a sorted node list.

    By default the lexicographically smallest such list; with largest=True
    the lexicographically largest (used to canonicalize vertex covers, whose
    lex-smallest form is the complement of the lex-largest independent set).
    """
    universe = (1 << q) - 1
    omega = len(_search_clique(adj, universe))
    if omega == 0:
        return []
    committed: list[int] = []
    cand = universe
    order = _iter_bits_desc if largest else _iter_bits
    while len(committed) < omega:
        need = omega - len(committed) - 1
        for v in order(cand):
            sub = cand & adj[v] & ~((1 << (v + 1)) - 1)
            if need == 0 or len(_search_clique(adj, sub, goal=need)) >= need:
                committed.append(v)
                cand = sub
                break
        else:  # pragma: no cover - unreachable if omega is correct
            raise AssertionError("canonical clique construction failed")
    return committed


def _complement_masks(adj: list[int], q: int) -> list[int]:
    universe = (1 << q) - 1
    return [(~adj[v]) & universe & ~(1 << v) for v in range(q)]


def _clique_selection(nodes: list[int]) -> frozenset[tuple[int, int]]:
    return frozenset(
        (nodes[i], nodes[j]) for i in range(len(nodes)) for j in range(i + 1, len(nodes))
    )


def solve_max_clique(
    g: Connectome,
    filter_mode: ImportanceFilter = ImportanceFilter.NONE,
    importance=None,
    threshold: Optional[float] = None,
    max_nodes: int = EXACT_NODE_CEILING,
) -> StructureSolution:
    """Maximum clique over the admissible edge set.

    Admissible edges are all active edges, or only those passing the
    importance filter. The selection is every admissible edge inside the
    clique (all its pairs, by clique completeness).
    """
    _check_capacity(g, max_nodes)
    adj = _admissible_masks(g, filter_mode, importance, threshold)
    nodes = _canonical_max_clique(adj, g.node_count)
    return StructureSolution(
        nodes=frozenset(nodes),
        selection=_clique_selection(nodes),
        optimum_size=len(nodes),
    )


def _max_independent_nodes(
    g: Connectome, max_nodes: int, largest: bool = False
) -> list[int]:
    _check_capacity(g, max_nodes)
    comp = _complement_masks(g.adjacency_masks(), g.node_count)
    return _canonical_max_clique(comp, g.node_count, largest=largest)


def solve_independent_set(
    g: Connectome, max_nodes: int = EXACT_NODE_CEILING
) -> StructureSolution:
    """Maximum independent set; selection = active edges leaving the set."""
    nodes = _max_independent_nodes(g, max_nodes)
    chosen = set(nodes)
    selection = frozenset(
        (x, y) for x, y in g.active_pairs() if (x in chosen) != (y in chosen)
    )
    return StructureSolution(
        nodes=frozenset(nodes), selection=selection, optimum_size=len(nodes)
    )


def solve_min_vertex_cover(
    g: Connectome, max_nodes: int = EXACT_NODE_CEILING
) -> StructureSolution:
    """Minimum vertex cover as the complement of the maximum independent set.

    The selection keeps only active edges with BOTH endpoints in the cover.
    The cover itself is canonicalized lex-smallest, i.e. it complements the
    lexicographically largest maximum independent set.
    """
    independent = set(_max_independent_nodes(g, max_nodes, largest=True))
    cover = frozenset(v for v in range(g.node_count) if v not in independent)
    selection = frozenset(
        (x, y) for x, y in g.active_pairs() if x in cover and y in cover
    )
    return StructureSolution(nodes=cover, selection=selection, optimum_size=len(cover))


def solve_max_degree_node(g: Connectome) -> StructureSolution:
    """Single node of maximum degree (smallest index on ties) and its edges."""
    deg = g.degrees()
    v = int(np.argmax(deg))  # argmax returns the first (smallest) index on ties
    selection = frozenset(
        (x, y) for x, y in g.active_pairs() if v in (x, y)
    )
    return StructureSolution(
        nodes=frozenset([v]), selection=selection, optimum_size=1
    )


def solve_k_hub(g: Connectome, k: int) -> StructureSolution:
    """The k highest-degree nodes (ties to smaller index) and incident edges."""
    if not (1 <= k <= g.node_count):
        raise ContractViolationError(f"k must be in [1, {g.node_count}], got {k}")
    deg = g.degrees()
    ranked = sorted(range(g.node_count), key=lambda v: (-deg[v], v))
    chosen = set(ranked[:k])
    selection = frozenset(
        (x, y) for x, y in g.active_pairs() if x in chosen or y in chosen
    )
    return StructureSolution(
        nodes=frozenset(chosen), selection=selection, optimum_size=k
    )


def solve(
    g: Connectome,
    criterion: StructuralCriterion,
    importance=None,
    threshold: Optional[float] = None,
    max_nodes: int = EXACT_NODE_CEILING,
) -> StructureSolution:
    """Dispatch a criterion to its solver."""
    if criterion.variant is Variant.MAX_CLIQUE:
        return solve_max_clique(
            g,
            filter_mode=criterion.importance_filter,
            importance=importance,
            threshold=threshold,
            max_nodes=max_nodes,
        )
    if criterion.variant is Variant.INDEPENDENT_SET:
        return solve_independent_set(g, max_nodes=max_nodes)
    if criterion.variant is Variant.MAX_DEGREE_NODE:
        return solve_max_degree_node(g)
    if criterion.variant is Variant.K_HUB:
        return solve_k_hub(g, criterion.k)
    if criterion.variant is Variant.MIN_VERTEX_COVER:
        return solve_min_vertex_cover(g, max_nodes=max_nodes)
    raise ContractViolationError(f"unknown criterion {criterion.variant!r}")
