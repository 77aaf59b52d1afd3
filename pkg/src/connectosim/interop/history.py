"""Versioned JSON export of evolution histories.

Carries everything a reader needs to reproduce plots or replay baselines:
the run configuration snapshot, per-iteration probabilities, selections,
verdicts, modified-edge counts, and each iteration's full adjacency matrix.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Union

from ..engine import (
    EvolutionHistory,
    IterationRecord,
    Outcome,
    OutcomeKind,
    RecordVerdict,
    RunConfig,
)
from ..errors import ContractViolationError
from ..graph import Connectome
from ..stages import Stage, StageProbabilities
from ..validity import ValidityVerdict, Verdict

FORMAT_TAG = "connectosim-history"
SCHEMA_VERSION = 1


def _verdict_to_dict(v: RecordVerdict) -> dict:
    return {
        "tag": v.tag.value,
        "removed_edge_count": v.checker.removed_edge_count if v.checker else None,
        "severe": v.checker.severe if v.checker else None,
        "violated_rule": [s.name for s in v.checker.violated_rule]
        if v.checker and v.checker.violated_rule
        else None,
        "label_mismatch": [s.name for s in v.label_mismatch] if v.label_mismatch else None,
    }


def _verdict_from_dict(d: dict) -> RecordVerdict:
    if d.get("label_mismatch"):
        expected, predicted = (Stage.from_name(s) for s in d["label_mismatch"])
        return RecordVerdict.from_label_mismatch(expected, predicted)
    if d.get("removed_edge_count") is None:
        return RecordVerdict.passed()
    rule = d.get("violated_rule")
    checker = ValidityVerdict(
        tag=Verdict(d["tag"]),
        removed_edge_count=int(d["removed_edge_count"]),
        severe=bool(d["severe"]),
        violated_rule=tuple(Stage.from_name(s) for s in rule) if rule else None,
    )
    return RecordVerdict.from_checker(checker)


def export_history(history: EvolutionHistory) -> dict:
    """Machine-readable document; json.dumps-able as is."""
    return {
        "format": FORMAT_TAG,
        "schema_version": SCHEMA_VERSION,
        "outcome": {
            "kind": history.outcome.kind.value,
            "abort_index": history.outcome.abort_index,
            "reason": history.outcome.reason,
        },
        "config": {
            "policy": history.config.policy,
            "exit_condition": history.config.exit_condition,
            "percent": history.config.percent,
            "seed": history.config.seed,
            "checker_threshold": history.config.checker_threshold,
            "importance_fraction": history.config.importance_fraction,
            "initial_label": history.config.initial_label,
        },
        "records": [
            {
                "index": r.index,
                "probabilities": {s.name: r.probabilities.of(s) for s in Stage},
                "selection": [list(p) for p in sorted(r.selection)],
                "modified_edge_count": r.modified_edge_count,
                "verdict": _verdict_to_dict(r.verdict),
                "adjacency": r.graph.weights.tolist(),
            }
            for r in history.records
        ],
    }


def import_history(doc: dict) -> EvolutionHistory:
    if doc.get("format") != FORMAT_TAG:
        raise ContractViolationError(f"not a history document: {doc.get('format')!r}")
    if doc.get("schema_version") != SCHEMA_VERSION:
        raise ContractViolationError(
            f"unsupported history schema version {doc.get('schema_version')!r}"
        )
    cfg = doc["config"]
    config = RunConfig(
        policy=cfg["policy"],
        exit_condition=cfg["exit_condition"],
        percent=cfg["percent"],
        seed=cfg["seed"],
        checker_threshold=cfg["checker_threshold"],
        importance_fraction=cfg["importance_fraction"],
        initial_label=cfg.get("initial_label"),
    )
    records = tuple(
        IterationRecord(
            index=r["index"],
            graph=Connectome(r["adjacency"]),
            probabilities=StageProbabilities(
                r["probabilities"]["CIS"],
                r["probabilities"]["RR"],
                r["probabilities"]["PP"],
                r["probabilities"]["SP"],
            ),
            selection=frozenset((int(x), int(y)) for x, y in r["selection"]),
            verdict=_verdict_from_dict(r["verdict"]),
            modified_edge_count=r["modified_edge_count"],
        )
        for r in doc["records"]
    )
    out = doc["outcome"]
    outcome = Outcome(
        kind=OutcomeKind(out["kind"]),
        abort_index=out.get("abort_index"),
        reason=out.get("reason"),
    )
    return EvolutionHistory(records=records, outcome=outcome, config=config)


def save_history(history: EvolutionHistory, path: Union[str, Path]) -> None:
    Path(path).write_text(json.dumps(export_history(history), indent=2) + "\n")


def load_history(path: Union[str, Path]) -> EvolutionHistory:
    return import_history(json.loads(Path(path).read_text()))
