"""Ground-fact text format for interoperability with answer-set solvers.

Predicates: node/1, edge/3, edge_1/3, dc/3, imp/3, result/2, result_1/2,
th/1. Weights are the graph's 0-100 integers; probabilities and importance
values are scaled to integers by round-half-up of 100x. Output is canonical
and byte-deterministic: a fixed predicate order (node, edge, edge_1, dc,
imp, result, result_1, th), arguments ascending within each predicate, one
fact per line, each terminated by a period.

When a previous graph is attached, pairs active there but inactive in the
current graph are additionally emitted as weight-0 edge facts so the
document is self-contained for disruption-counting rules.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Mapping, Optional, Union

import numpy as np

from ..errors import FactSyntaxError, GraphValidationError
from ..graph import Connectome, canonical_pair
from ..rounding import scale_to_percent
from ..stages import ImportanceMap, Stage, StageProbabilities

STAGE_NAMES = tuple(s.name for s in Stage)


@dataclass(frozen=True)
class FactExtras:
    """Optional companion data carried alongside the graph facts."""

    previous: Optional[Connectome] = None
    importance: Optional[Mapping[tuple[int, int], float]] = None
    degradation: Optional[Mapping[tuple[int, int], int]] = None
    result: Optional[Mapping[Stage, float]] = None
    result_prev: Optional[Mapping[Stage, float]] = None
    threshold: Optional[int] = None

    def is_empty(self) -> bool:
        return all(
            v is None
            for v in (
                self.previous,
                self.importance,
                self.degradation,
                self.result,
                self.result_prev,
                self.threshold,
            )
        )


def _as_importance_mapping(importance, g: Connectome):
    if importance is None:
        return None
    if isinstance(importance, ImportanceMap):
        return {(x, y): float(importance.values[x, y]) for x, y in g.active_pairs()}
    return {canonical_pair(*k): float(v) for k, v in importance.items()}


def _as_result_mapping(result):
    if result is None:
        return None
    if isinstance(result, StageProbabilities):
        return {stage: result.of(stage) for stage in Stage}
    return {k if isinstance(k, Stage) else Stage.from_name(k): float(v) for k, v in result.items()}


def _as_degradation_mapping(degradation):
    if degradation is None:
        return None
    entries = getattr(degradation, "entries", degradation)
    return {canonical_pair(*k): int(v) for k, v in entries.items()}


def _edge_facts(name: str, g: Connectome, zero_pairs=()) -> list[str]:
    lines = [f"{name}({x},{y},{w})." for x, y, w in g.active_edges()]
    lines.extend(f"{name}({x},{y},0)." for x, y in sorted(zero_pairs))
    return sorted(lines, key=_edge_sort_key(name))


def _edge_sort_key(name: str):
    pattern = re.compile(rf"{name}\((\d+),(\d+),(-?\d+)\)\.")

    def key(line):
        m = pattern.fullmatch(line)
        return (int(m.group(1)), int(m.group(2)))

    return key


def emit_facts(g: Connectome, extras: Optional[FactExtras] = None) -> str:
    """Canonical fact text for a graph and optional extras."""
    extras = extras or FactExtras()
    lines: list[str] = [f"node({v})." for v in range(g.node_count)]

    zero_pairs = []
    if extras.previous is not None:
        if extras.previous.node_count != g.node_count:
            raise GraphValidationError("previous graph has a different node count")
        gone = (extras.previous.weights > 0) & (g.weights == 0)
        xs, ys = np.nonzero(np.triu(gone, k=1))
        zero_pairs = list(zip(map(int, xs), map(int, ys)))
    lines.extend(_edge_facts("edge", g, zero_pairs))
    if extras.previous is not None:
        lines.extend(_edge_facts("edge_1", extras.previous))

    degradation = _as_degradation_mapping(extras.degradation)
    if degradation is not None:
        lines.extend(
            f"dc({x},{y},{dc})." for (x, y), dc in sorted(degradation.items())
        )
    importance = _as_importance_mapping(extras.importance, g)
    if importance is not None:
        lines.extend(
            f"imp({x},{y},{scale_to_percent(v)})."
            for (x, y), v in sorted(importance.items())
        )
    for pred, mapping in (("result", extras.result), ("result_1", extras.result_prev)):
        values = _as_result_mapping(mapping)
        if values is not None:
            lines.extend(
                sorted(
                    f'{pred}("{stage.name}",{scale_to_percent(p)}).'
                    for stage, p in values.items()
                )
            )
    if extras.threshold is not None:
        lines.append(f"th({int(extras.threshold)}).")
    return "\n".join(lines) + "\n"


_FACT_RE = re.compile(r"^([a-z_][a-zA-Z0-9_]*)\((.*)\)\.$")
_INT_RE = re.compile(r"^-?\d+$")


def _split_args(body: str, line_no: int) -> list[str]:
    args = [a.strip() for a in body.split(",")]
    if any(not a for a in args):
        raise FactSyntaxError("empty argument", line_no)
    return args


def _int_arg(token: str, line_no: int) -> int:
    if not _INT_RE.match(token):
        raise FactSyntaxError(f"expected integer, got {token!r}", line_no)
    return int(token)


def _stage_arg(token: str, line_no: int) -> Stage:
    name = token.strip('"')
    if name not in STAGE_NAMES:
        raise FactSyntaxError(f"unknown stage {token!r}", line_no)
    return Stage[name]


def parse_facts(text: str) -> tuple[Connectome, FactExtras]:
    """Inverse of emit_facts; accepts facts in any order and non-canonical
    edge orientation. Raises FactSyntaxError with the offending line."""
    nodes: set[int] = set()
    edges: dict[tuple[int, int], int] = {}
    prev_edges: dict[tuple[int, int], int] = {}
    importance: dict[tuple[int, int], float] = {}
    degradation: dict[tuple[int, int], int] = {}
    results: dict[Stage, float] = {}
    results_prev: dict[Stage, float] = {}
    threshold: Optional[int] = None

    def add_edge(store, pair, w, line_no, pred):
        if pair in store and store[pair] != w:
            raise FactSyntaxError(
                f"conflicting {pred} facts for {pair}: {store[pair]} vs {w}", line_no
            )
        store[pair] = w

    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("%", 1)[0].strip()
        if not line:
            continue
        m = _FACT_RE.match(line)
        if not m:
            raise FactSyntaxError(f"not a ground fact: {raw.strip()!r}", line_no)
        pred, body = m.group(1), m.group(2)
        args = _split_args(body, line_no)
        if pred == "node" and len(args) == 1:
            nodes.add(_int_arg(args[0], line_no))
        elif pred in ("edge", "edge_1") and len(args) == 3:
            x, y, w = (_int_arg(a, line_no) for a in args)
            if x == y:
                raise FactSyntaxError(f"self-loop edge ({x},{y})", line_no)
            if not (0 <= w <= 100):
                raise FactSyntaxError(f"edge weight {w} outside [0, 100]", line_no)
            store = edges if pred == "edge" else prev_edges
            add_edge(store, canonical_pair(x, y), w, line_no, pred)
        elif pred == "dc" and len(args) == 3:
            x, y, d = (_int_arg(a, line_no) for a in args)
            degradation[canonical_pair(x, y)] = d
        elif pred == "imp" and len(args) == 3:
            x, y = _int_arg(args[0], line_no), _int_arg(args[1], line_no)
            importance[canonical_pair(x, y)] = _int_arg(args[2], line_no) / 100.0
        elif pred in ("result", "result_1") and len(args) == 2:
            stage = _stage_arg(args[0], line_no)
            value = _int_arg(args[1], line_no) / 100.0
            (results if pred == "result" else results_prev)[stage] = value
        elif pred == "th" and len(args) == 1:
            threshold = _int_arg(args[0], line_no)
        else:
            raise FactSyntaxError(f"unknown predicate {pred}/{len(args)}", line_no)

    if not nodes:
        raise FactSyntaxError("document declares no node facts", 1)
    q = max(nodes) + 1
    if nodes != set(range(q)):
        raise FactSyntaxError("node facts must cover a dense 0..q-1 range", 1)

    def build(store):
        matrix = np.zeros((q, q), dtype=np.int64)
        for (x, y), w in store.items():
            if x >= q or y >= q:
                raise FactSyntaxError(f"edge ({x},{y}) references undeclared node", 1)
            matrix[x, y] = matrix[y, x] = w
        return Connectome(matrix)

    g = build(edges)
    extras = FactExtras(
        previous=build(prev_edges) if prev_edges else None,
        importance=importance or None,
        degradation=degradation or None,
        result=results or None,
        result_prev=results_prev or None,
        threshold=threshold,
    )
    return g, extras
