"""Classification validity checking between consecutive simulation steps.

A transition is severely disruptive when more than T edges went from active
to inactive between the previous and current graph. Under severe disruption,
configured stage transitions (by default any move into CIS from a later
stage) are biologically implausible and the verdict is FAIL; everything else
is OK. The rule set is data so domain experts can extend it.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from .errors import ContractViolationError
from .graph import Connectome
from .rounding import ceil_decimal_product
from .stages import Stage, StageProbabilities

DEFAULT_FORBIDDEN = (
    (Stage.RR, Stage.CIS),
    (Stage.PP, Stage.CIS),
    (Stage.SP, Stage.CIS),
)


class Verdict(enum.Enum):
    OK = "OK"
    FAIL = "FAIL"


@dataclass(frozen=True)
class CheckerConfig:
    """Threshold T plus the forbidden (from, to) transitions.

    A None threshold means "derive from the initial graph": ceil of 10% of
    its active-edge count, resolved once per run by resolve_threshold.
    """

    severe_disruption_threshold: Optional[int] = None
    forbidden_transitions: tuple[tuple[Stage, Stage], ...] = DEFAULT_FORBIDDEN

    def __post_init__(self):
        t = self.severe_disruption_threshold
        if t is not None and t < 0:
            raise ContractViolationError("threshold must be non-negative")
        if not self.forbidden_transitions:
            raise ContractViolationError("forbidden transition set must be nonempty")

    def resolve_threshold(self, g0: Connectome) -> int:
        if self.severe_disruption_threshold is not None:
            return self.severe_disruption_threshold
        return ceil_decimal_product(0.1, g0.edge_count())

    def with_threshold(self, t: int) -> "CheckerConfig":
        return CheckerConfig(
            severe_disruption_threshold=t,
            forbidden_transitions=self.forbidden_transitions,
        )


@dataclass(frozen=True)
class ValidityVerdict:
    tag: Verdict
    removed_edge_count: int
    severe: bool
    violated_rule: Optional[tuple[Stage, Stage]] = None

    def __post_init__(self):
        if self.tag is Verdict.FAIL and (not self.severe or self.violated_rule is None):
            raise ContractViolationError(
                "FAIL verdicts require severe disruption and a violated rule"
            )

    @property
    def ok(self) -> bool:
        return self.tag is Verdict.OK


def removed_edge_count(prev_g: Connectome, cur_g: Connectome) -> int:
    """Canonical edges active before and inactive now (counted once)."""
    if prev_g.node_count != cur_g.node_count:
        raise ContractViolationError(
            f"graphs differ in node count: {prev_g.node_count} vs {cur_g.node_count}"
        )
    gone = (prev_g.weights > 0) & (cur_g.weights == 0)
    return int(np.count_nonzero(np.triu(gone, k=1)))


def check(
    prev_g: Connectome,
    cur_g: Connectome,
    prev_r: StageProbabilities,
    cur_r: StageProbabilities,
    cfg: CheckerConfig,
) -> ValidityVerdict:
    """Verdict for one transition; cfg must carry a concrete threshold."""
    threshold = cfg.severe_disruption_threshold
    if threshold is None:
        threshold = cfg.resolve_threshold(prev_g)
    removed = removed_edge_count(prev_g, cur_g)
    severe = removed > threshold
    if severe:
        transition = (prev_r.argmax(), cur_r.argmax())
        if transition in cfg.forbidden_transitions:
            return ValidityVerdict(
                tag=Verdict.FAIL,
                removed_edge_count=removed,
                severe=True,
                violated_rule=transition,
            )
    return ValidityVerdict(tag=Verdict.OK, removed_edge_count=removed, severe=severe)


def load_rules(path) -> CheckerConfig:
    """Checker configuration from a JSON file:
    {"severe_disruption_threshold": 100|null,
     "forbidden_transitions": [["RR","CIS"], ...]}"""
    raw = json.loads(Path(path).read_text())
    transitions = tuple(
        (Stage.from_name(a), Stage.from_name(b))
        for a, b in raw.get("forbidden_transitions", [])
    )
    if not transitions:
        transitions = DEFAULT_FORBIDDEN
    return CheckerConfig(
        severe_disruption_threshold=raw.get("severe_disruption_threshold"),
        forbidden_transitions=transitions,
    )


def save_rules(cfg: CheckerConfig, path) -> None:
    Path(path).write_text(
        json.dumps(
            {
                "severe_disruption_threshold": cfg.severe_disruption_threshold,
                "forbidden_transitions": [
                    [a.name, b.name] for a, b in cfg.forbidden_transitions
                ],
            },
            indent=2,
        )
        + "\n"
    )
