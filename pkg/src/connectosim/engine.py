"""Evolution engine: iterates select -> evolve -> classify -> check.

A run starts by classifying the initial graph (iteration 0), then repeats:
evaluate the exit condition; derive the edge selection from the policy;
build the next graph (degradation for plain structural criteria, hard
removal for metric targets and importance-restricted criteria); classify;
run the validity checker. A FAIL verdict aborts the run immediately.

Degradation decrements are frozen from the initial graph: dc = ceil(w0 * p / 100)
per edge active in G0, never recomputed from intermediate graphs. Edges
outside the selection are copied bit-identically.

Per-step randomness comes from default_rng([seed, step_index]), so runs are
replayable and interactive sessions advance deterministically.
"""

from __future__ import annotations

import abc
import enum
from dataclasses import dataclass, field
from typing import Callable, Iterable, Optional, Sequence

import numpy as np

from .classifier.base import StageClassifier
from .classifier.saliency import importance_threshold
from .errors import ConnectosimError, ContractViolationError, InfeasibleError
from .graph import Connectome, validate_selection
from .optimizer import Direction, ImportanceBias, MetricTarget, optimize
from .stages import Stage, StageProbabilities
from .substructures import ImportanceFilter, StructuralCriterion, Variant, solve
from .validity import CheckerConfig, ValidityVerdict, Verdict, check

DEFAULT_IMPORTANCE_FRACTION = 0.4


# ---------------------------------------------------------------------------
# degradation bookkeeping

@dataclass(frozen=True)
class DegradationMap:
    """Per-edge decrement frozen from G0: dc = ceil(w0 * p / 100)."""

    entries: dict[tuple[int, int], int]
    percent: int

    def decrement(self, x: int, y: int) -> int:
        try:
            return self.entries[(x, y)]
        except KeyError:
            raise ContractViolationError(
                f"edge ({x}, {y}) has no degradation coefficient (inactive in G0)"
            ) from None


def compute_degradation_map(g0: Connectome, percent: int) -> DegradationMap:
    if not (1 <= percent <= 100):
        raise ContractViolationError(f"degradation percent must be in 1..100, got {percent}")
    entries = {
        (x, y): -((-w * percent) // 100)  # ceil(w * percent / 100) in integers
        for x, y, w in g0.active_edges()
    }
    return DegradationMap(entries=entries, percent=percent)


def apply_degradation(
    g: Connectome, selection: Iterable[tuple[int, int]], dc: DegradationMap
) -> Connectome:
    """Selected edges lose their frozen decrement (clamped at 0)."""
    sel = validate_selection(g, selection)
    weights = g.weights.copy()
    for x, y in sel:
        w = int(weights[x, y]) - dc.decrement(x, y)
        weights[x, y] = weights[y, x] = max(w, 0)
    return g.replace_weights(weights)


def apply_removal(g: Connectome, selection: Iterable[tuple[int, int]]) -> Connectome:
    """Selected edges' weights are set to 0."""
    sel = validate_selection(g, selection)
    weights = g.weights.copy()
    for x, y in sel:
        weights[x, y] = weights[y, x] = 0
    return g.replace_weights(weights)


def random_baseline_selection(
    g: Connectome,
    count: int,
    excluded: Iterable[tuple[int, int]],
    rng,
) -> frozenset[tuple[int, int]]:
    """count distinct active edges drawn uniformly outside the excluded set.

    rng is a numpy Generator or an integer seed.
    """
    if not isinstance(rng, np.random.Generator):
        rng = np.random.default_rng(rng)
    excluded = set(excluded)
    eligible = [p for p in g.active_pairs() if p not in excluded]
    if count > len(eligible):
        raise InfeasibleError(
            f"need {count} random edges but only {len(eligible)} are eligible"
        )
    if count == 0:
        return frozenset()
    picks = rng.choice(len(eligible), size=count, replace=False)
    return frozenset(eligible[i] for i in picks)


# ---------------------------------------------------------------------------
# policies

class UpdateMode(enum.Enum):
    DEGRADE = "degrade"
    REMOVE = "remove"


@dataclass
class StepContext:
    index: int
    graph: Connectome
    classifier: StageClassifier
    rng: np.random.Generator
    seed: int


class EvolutionPolicy(abc.ABC):
    """Selects the edges to modify each iteration and how to modify them."""

    @abc.abstractmethod
    def select(self, ctx: StepContext) -> frozenset[tuple[int, int]]:
        ...

    @abc.abstractmethod
    def update_mode(self) -> UpdateMode:
        ...

    @abc.abstractmethod
    def describe(self) -> dict:
        ...


class StructuralPolicy(EvolutionPolicy):
    """Solve a structural criterion on the current graph each iteration.

    Plain criteria degrade the selected edges; importance-restricted cliques
    remove them outright, with the threshold derived each step from the
    classifier's saliency at the configured fraction.
    """

    def __init__(
        self,
        criterion: StructuralCriterion,
        fraction: float = DEFAULT_IMPORTANCE_FRACTION,
    ):
        self.criterion = criterion
        self.fraction = fraction

    def select(self, ctx: StepContext) -> frozenset[tuple[int, int]]:
        g = ctx.graph
        if self.criterion.importance_filter is ImportanceFilter.NONE:
            return solve(g, self.criterion).selection
        if g.edge_count() == 0:
            return frozenset()
        imp = ctx.classifier.edge_importance(g)
        threshold = importance_threshold(imp, g, self.fraction)
        return solve(g, self.criterion, importance=imp, threshold=threshold).selection

    def update_mode(self) -> UpdateMode:
        if self.criterion.importance_filter is ImportanceFilter.NONE:
            return UpdateMode.DEGRADE
        return UpdateMode.REMOVE

    def describe(self) -> dict:
        return {
            "kind": "structural",
            "criterion": self.criterion.variant.value,
            "k": self.criterion.k,
            "importance_filter": self.criterion.importance_filter.value,
            "fraction": self.fraction,
        }


class MetricPolicy(EvolutionPolicy):
    """Drive a metric toward a relative target by minimal removals."""

    def __init__(self, target: MetricTarget, exact_edge_ceiling: Optional[int] = None):
        self.target = target
        self.exact_edge_ceiling = exact_edge_ceiling

    def select(self, ctx: StepContext) -> frozenset[tuple[int, int]]:
        importance = None
        if self.target.importance_bias is not ImportanceBias.NONE:
            importance = ctx.classifier.edge_importance(ctx.graph)
        kwargs = {}
        if self.exact_edge_ceiling is not None:
            kwargs["exact_edge_ceiling"] = self.exact_edge_ceiling
        result = optimize(
            ctx.graph, self.target, importance=importance, seed=ctx.seed, **kwargs
        )
        return result.removed

    def update_mode(self) -> UpdateMode:
        return UpdateMode.REMOVE

    def describe(self) -> dict:
        return {
            "kind": "metric",
            "metric": self.target.metric,
            "direction": self.target.direction.value,
            "relative_change": self.target.relative_change,
            "importance_bias": self.target.importance_bias.value,
        }


class ManualPolicy(EvolutionPolicy):
    """Selections supplied externally, e.g. by an interactive user."""

    def __init__(
        self,
        provider: Callable[[int, Connectome], Iterable[tuple[int, int]]],
        mode: UpdateMode = UpdateMode.DEGRADE,
    ):
        self.provider = provider
        self.mode = mode

    def select(self, ctx: StepContext) -> frozenset[tuple[int, int]]:
        return validate_selection(ctx.graph, self.provider(ctx.index, ctx.graph))

    def update_mode(self) -> UpdateMode:
        return self.mode

    def describe(self) -> dict:
        return {"kind": "manual", "mode": self.mode.value}


class RandomBaselinePolicy(EvolutionPolicy):
    """Per-iteration random selections matching a structural twin's counts,
    never touching the twin's own edges."""

    def __init__(
        self,
        counts: Sequence[int],
        excluded: Sequence[Iterable[tuple[int, int]]],
        mode: UpdateMode,
    ):
        if len(counts) != len(excluded):
            raise ContractViolationError("counts and excluded lists must align")
        self.counts = tuple(int(c) for c in counts)
        self.excluded = tuple(frozenset(e) for e in excluded)
        self.mode = mode

    def select(self, ctx: StepContext) -> frozenset[tuple[int, int]]:
        step = ctx.index - 1
        if step >= len(self.counts):
            raise InfeasibleError(
                f"baseline has counts for {len(self.counts)} iterations, "
                f"step {ctx.index} requested"
            )
        return random_baseline_selection(
            ctx.graph, self.counts[step], self.excluded[step], ctx.rng
        )

    def update_mode(self) -> UpdateMode:
        return self.mode

    def describe(self) -> dict:
        return {
            "kind": "random-baseline",
            "counts": list(self.counts),
            "mode": self.mode.value,
        }


# ---------------------------------------------------------------------------
# exit conditions

class ExitCondition(abc.ABC):
    @abc.abstractmethod
    def satisfied(self, records: Sequence["IterationRecord"]) -> bool:
        ...

    @abc.abstractmethod
    def describe(self) -> dict:
        ...


@dataclass(frozen=True)
class MaxIterations(ExitCondition):
    n: int

    def __post_init__(self):
        if self.n < 1:
            raise ContractViolationError("iteration count must be >= 1")

    def satisfied(self, records) -> bool:
        return len(records) - 1 >= self.n

    def describe(self) -> dict:
        return {"kind": "max-iterations", "n": self.n}


@dataclass(frozen=True)
class TransitionDetected(ExitCondition):
    def satisfied(self, records) -> bool:
        if len(records) < 2:
            return False
        return records[-1].probabilities.argmax() != records[0].probabilities.argmax()

    def describe(self) -> dict:
        return {"kind": "transition"}


@dataclass(frozen=True)
class ProbabilityDeltaBelow(ExitCondition):
    epsilon: float

    def __post_init__(self):
        if self.epsilon <= 0:
            raise ContractViolationError("epsilon must be positive")

    def satisfied(self, records) -> bool:
        if len(records) < 2:
            return False
        delta = np.abs(
            records[-1].probabilities.as_array() - records[-2].probabilities.as_array()
        )
        return float(delta.max()) < self.epsilon

    def describe(self) -> dict:
        return {"kind": "probability-delta", "epsilon": self.epsilon}


def exit_condition_from_descriptor(desc: dict) -> ExitCondition:
    kind = desc.get("kind")
    if kind == "max-iterations":
        return MaxIterations(int(desc["n"]))
    if kind == "transition":
        return TransitionDetected()
    if kind == "probability-delta":
        return ProbabilityDeltaBelow(float(desc["epsilon"]))
    raise ContractViolationError(f"unknown exit condition {kind!r}")


# ---------------------------------------------------------------------------
# history

@dataclass(frozen=True)
class RecordVerdict:
    """Per-record verdict: the checker's result, or the initial-label gate."""

    tag: Verdict
    checker: Optional[ValidityVerdict] = None
    label_mismatch: Optional[tuple[Stage, Stage]] = None  # (expected, predicted)

    @property
    def ok(self) -> bool:
        return self.tag is Verdict.OK

    @classmethod
    def passed(cls, checker: Optional[ValidityVerdict] = None) -> "RecordVerdict":
        return cls(tag=Verdict.OK, checker=checker)

    @classmethod
    def from_checker(cls, verdict: ValidityVerdict) -> "RecordVerdict":
        return cls(tag=verdict.tag, checker=verdict)

    @classmethod
    def from_label_mismatch(cls, expected: Stage, predicted: Stage) -> "RecordVerdict":
        return cls(tag=Verdict.FAIL, label_mismatch=(expected, predicted))


@dataclass(frozen=True)
class IterationRecord:
    index: int
    graph: Connectome
    probabilities: StageProbabilities
    selection: frozenset[tuple[int, int]]  # edges modified to produce this graph
    verdict: RecordVerdict
    modified_edge_count: int


class OutcomeKind(enum.Enum):
    COMPLETED = "completed"
    ABORTED = "aborted"
    ERROR = "error"


@dataclass(frozen=True)
class Outcome:
    kind: OutcomeKind
    abort_index: Optional[int] = None
    reason: Optional[str] = None


@dataclass(frozen=True)
class RunConfig:
    policy: dict
    exit_condition: dict
    percent: int
    seed: int
    checker_threshold: int
    importance_fraction: float
    initial_label: Optional[str] = None


@dataclass(frozen=True)
class EvolutionHistory:
    records: tuple[IterationRecord, ...]
    outcome: Outcome
    config: RunConfig

    def __post_init__(self):
        for i, rec in enumerate(self.records):
            if rec.index != i:
                raise ContractViolationError("record indices must be consecutive from 0")
        if self.outcome.kind is OutcomeKind.COMPLETED and not all(
            r.verdict.ok for r in self.records
        ):
            raise ContractViolationError("completed runs cannot carry FAIL verdicts")
        if self.outcome.kind is OutcomeKind.ABORTED and (
            not self.records or self.records[-1].verdict.ok
        ):
            raise ContractViolationError("aborted runs must end on a FAIL verdict")

    def __len__(self):
        return len(self.records)


# ---------------------------------------------------------------------------
# the run state machine

class RunState:
    """Mutable in-progress run; the engine loop and the HTTP sessions share it."""

    def __init__(
        self,
        g0: Connectome,
        classifier: StageClassifier,
        checker_cfg: CheckerConfig,
        percent: int,
        seed: int,
        policy_descriptor: Optional[dict] = None,
        exit_descriptor: Optional[dict] = None,
        initial_label: Optional[Stage] = None,
        importance_fraction: float = DEFAULT_IMPORTANCE_FRACTION,
    ):
        if seed < 0:
            raise ContractViolationError(f"seed must be non-negative, got {seed}")
        self.g0 = g0
        self.classifier = classifier
        self.threshold = checker_cfg.resolve_threshold(g0)
        self.checker_cfg = checker_cfg.with_threshold(self.threshold)
        self.percent = percent
        self.seed = seed
        self.dc_map = compute_degradation_map(g0, percent)
        self.importance_fraction = importance_fraction
        self.policy_descriptor = policy_descriptor or {"kind": "unspecified"}
        self.exit_descriptor = exit_descriptor or {"kind": "unspecified"}
        self.initial_label = initial_label
        self.outcome: Optional[Outcome] = None

        probs = classifier.classify(g0)
        if initial_label is not None and probs.argmax() != initial_label:
            verdict = RecordVerdict.from_label_mismatch(initial_label, probs.argmax())
            self.outcome = Outcome(
                OutcomeKind.ABORTED, abort_index=0, reason="initial-label-mismatch"
            )
        else:
            verdict = RecordVerdict.passed()
        self.records: list[IterationRecord] = [
            IterationRecord(
                index=0,
                graph=g0,
                probabilities=probs,
                selection=frozenset(),
                verdict=verdict,
                modified_edge_count=0,
            )
        ]

    @property
    def running(self) -> bool:
        return self.outcome is None

    @property
    def current_graph(self) -> Connectome:
        return self.records[-1].graph

    def step(self, policy: EvolutionPolicy, fatal_errors: bool = True) -> IterationRecord:
        """Execute one framework iteration; returns the appended record.

        With fatal_errors, a policy failure permanently ends the run with an
        ERROR outcome (batch semantics); without it the state is untouched so
        an interactive caller may retry with a different policy.
        """
        if not self.running:
            raise ContractViolationError(f"run already ended: {self.outcome}")
        index = len(self.records)
        prev = self.records[-1]
        ctx = StepContext(
            index=index,
            graph=prev.graph,
            classifier=self.classifier,
            rng=np.random.default_rng([self.seed, index]),
            seed=self.seed + index,
        )
        try:
            selection = policy.select(ctx)
            if policy.update_mode() is UpdateMode.DEGRADE:
                new_graph = apply_degradation(prev.graph, selection, self.dc_map)
            else:
                new_graph = apply_removal(prev.graph, selection)
        except ConnectosimError as exc:
            if fatal_errors:
                self.outcome = Outcome(
                    OutcomeKind.ERROR, abort_index=index, reason=f"policy-error: {exc}"
                )
            raise
        probs = self.classifier.classify(new_graph)
        checker_verdict = check(
            prev.graph, new_graph, prev.probabilities, probs, self.checker_cfg
        )
        record = IterationRecord(
            index=index,
            graph=new_graph,
            probabilities=probs,
            selection=selection,
            verdict=RecordVerdict.from_checker(checker_verdict),
            modified_edge_count=len(selection),
        )
        self.records.append(record)
        if checker_verdict.tag is Verdict.FAIL:
            self.outcome = Outcome(
                OutcomeKind.ABORTED, abort_index=index, reason="checker-fail"
            )
        return record

    def complete(self) -> None:
        if self.running:
            self.outcome = Outcome(OutcomeKind.COMPLETED)

    def reset(self) -> None:
        """Back to iteration 0 (a fresh classification of G0)."""
        self.outcome = None
        first = self.records[0]
        self.records = [first]
        if first.verdict.tag is Verdict.FAIL:
            self.outcome = Outcome(
                OutcomeKind.ABORTED, abort_index=0, reason="initial-label-mismatch"
            )

    def history(self) -> EvolutionHistory:
        outcome = self.outcome or Outcome(OutcomeKind.COMPLETED)
        config = RunConfig(
            policy=self.policy_descriptor,
            exit_condition=self.exit_descriptor,
            percent=self.percent,
            seed=self.seed,
            checker_threshold=self.threshold,
            importance_fraction=self.importance_fraction,
            initial_label=self.initial_label.name if self.initial_label else None,
        )
        return EvolutionHistory(records=tuple(self.records), outcome=outcome, config=config)


def run(
    g0: Connectome,
    policy: EvolutionPolicy,
    classifier: StageClassifier,
    exit_condition: ExitCondition,
    checker_cfg: Optional[CheckerConfig] = None,
    percent: int = 50,
    seed: int = 0,
    initial_label: Optional[Stage] = None,
    importance_fraction: float = DEFAULT_IMPORTANCE_FRACTION,
) -> EvolutionHistory:
    """Full framework run; never raises on policy infeasibility (the outcome
    records the error and the partial history is returned)."""
    state = RunState(
        g0,
        classifier,
        checker_cfg or CheckerConfig(),
        percent,
        seed,
        policy_descriptor=policy.describe(),
        exit_descriptor=exit_condition.describe(),
        initial_label=initial_label,
        importance_fraction=importance_fraction,
    )
    while state.running:
        if exit_condition.satisfied(state.records):
            state.complete()
            break
        try:
            state.step(policy)
        except ConnectosimError:
            break  # outcome already set to ERROR
    return state.history()


STRUCTURAL_KINDS = {v.value: v for v in Variant}


def policy_from_descriptor(desc: dict) -> EvolutionPolicy:
    """Rebuild a policy from its describe() dict (manual providers excluded)."""
    kind = desc.get("kind")
    if kind == "structural":
        criterion = StructuralCriterion(
            variant=Variant(desc["criterion"]),
            k=desc.get("k"),
            importance_filter=ImportanceFilter(desc.get("importance_filter", "none")),
        )
        return StructuralPolicy(
            criterion, fraction=desc.get("fraction", DEFAULT_IMPORTANCE_FRACTION)
        )
    if kind == "metric":
        target = MetricTarget(
            metric=desc["metric"],
            direction=Direction(desc["direction"]),
            relative_change=float(desc["relative_change"]),
            importance_bias=ImportanceBias(desc.get("importance_bias", "none")),
        )
        return MetricPolicy(target)
    if kind == "random-baseline":
        raise ContractViolationError(
            "random baselines are rebuilt from a history file, not a descriptor"
        )
    raise ContractViolationError(f"unknown policy kind {kind!r}")


def paired_baseline_policy(
    history: EvolutionHistory, mode: Optional[UpdateMode] = None
) -> RandomBaselinePolicy:
    """Random policy replaying a run's per-iteration counts, excluding the
    structural selections of the twin."""
    counts = [r.modified_edge_count for r in history.records[1:]]
    excluded = [r.selection for r in history.records[1:]]
    if mode is None:
        desc = history.config.policy
        degrade = desc.get("kind") == "structural" and desc.get("importance_filter", "none") == "none"
        mode = UpdateMode.DEGRADE if degrade else UpdateMode.REMOVE
    return RandomBaselinePolicy(counts=counts, excluded=excluded, mode=mode)


def run_paired_baseline(
    g0: Connectome,
    history: EvolutionHistory,
    classifier: StageClassifier,
    seed: int,
    checker_cfg: Optional[CheckerConfig] = None,
) -> EvolutionHistory:
    """Replay a structural run with size-matched random selections."""
    policy = paired_baseline_policy(history)
    if len(history.records) < 2:
        state = RunState(
            g0,
            classifier,
            checker_cfg or CheckerConfig(),
            history.config.percent,
            seed,
            policy_descriptor=policy.describe(),
            exit_descriptor={"kind": "max-iterations", "n": 0},
        )
        state.complete()
        return state.history()
    return run(
        g0,
        policy,
        classifier,
        MaxIterations(len(history.records) - 1),
        checker_cfg=checker_cfg,
        percent=history.config.percent,
        seed=seed,
        importance_fraction=history.config.importance_fraction,
    )
