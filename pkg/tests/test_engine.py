import numpy as np
import pytest

from connectosim.classifier.base import StageClassifier
from connectosim.engine import (
    ManualPolicy,
    MaxIterations,
    MetricPolicy,
    OutcomeKind,
    ProbabilityDeltaBelow,
    RandomBaselinePolicy,
    RunState,
    StructuralPolicy,
    TransitionDetected,
    UpdateMode,
    apply_degradation,
    apply_removal,
    compute_degradation_map,
    exit_condition_from_descriptor,
    paired_baseline_policy,
    policy_from_descriptor,
    random_baseline_selection,
    run,
    run_paired_baseline,
)
from connectosim.errors import ContractViolationError, InfeasibleError
from connectosim.graph import Connectome
from connectosim.optimizer import Direction, ImportanceBias, MetricTarget
from connectosim.stages import ImportanceMap, Stage, StageProbabilities
from connectosim.substructures import ImportanceFilter, StructuralCriterion, Variant
from connectosim.validity import CheckerConfig, Verdict

from conftest import StubClassifier, graph_from_pairs
from oracles import random_connectome_matrix


class TestDegradationMap:
    def test_half_weight(self):
        g = graph_from_pairs(3, [(0, 1)], w=100)
        dc = compute_degradation_map(g, 50)
        assert dc.decrement(0, 1) == 50

    def test_ceiling(self):
        g = graph_from_pairs(3, [(0, 1)], w=3)
        assert compute_degradation_map(g, 50).decrement(0, 1) == 2

    def test_inactive_edge_absent(self):
        g = graph_from_pairs(3, [(0, 1)])
        dc = compute_degradation_map(g, 25)
        with pytest.raises(ContractViolationError, match="no degradation"):
            dc.decrement(0, 2)

    def test_percent_range(self):
        g = graph_from_pairs(3, [(0, 1)])
        with pytest.raises(ContractViolationError):
            compute_degradation_map(g, 0)
        with pytest.raises(ContractViolationError):
            compute_degradation_map(g, 101)

    @pytest.mark.parametrize("percent,max_steps", [(50, 2), (25, 4)])
    def test_virtual_removal_bound_exhaustive(self, percent, max_steps):
        # every starting weight hits 0 within the documented number of steps
        for w0 in range(1, 101):
            g0 = graph_from_pairs(2, [(0, 1)], w=w0)
            dc = compute_degradation_map(g0, percent)
            g = g0
            steps = 0
            while g.weight(0, 1) > 0:
                g = apply_degradation(g, [(0, 1)], dc)
                steps += 1
                assert steps <= max_steps, f"w0={w0} not removed in {max_steps}"


class TestApplyOps:
    def test_degradation_clamps_and_preserves(self):
        g = graph_from_pairs(4, [(0, 1), (1, 2), (2, 3)], w=10)
        dc = compute_degradation_map(g, 50)
        g2 = apply_degradation(g, [(0, 1)], dc)
        assert g2.weight(0, 1) == 5
        assert g2.weight(1, 2) == 10
        g3 = apply_degradation(g2, [(0, 1)], dc)
        assert g3.weight(0, 1) == 0

    def test_degradation_empty_selection_identity(self):
        g = graph_from_pairs(3, [(0, 1)])
        dc = compute_degradation_map(g, 25)
        assert apply_degradation(g, [], dc) == g

    def test_removal(self):
        g = graph_from_pairs(3, [(0, 1), (1, 2)])
        g2 = apply_removal(g, [(1, 2)])
        assert g2.weight(1, 2) == 0
        assert g2.weight(0, 1) == 50

    def test_removal_requires_active(self):
        g = graph_from_pairs(3, [(0, 1)])
        with pytest.raises(ContractViolationError):
            apply_removal(g, [(0, 2)])


class TestRandomBaselineSelection:
    def test_zero_and_all(self):
        g = graph_from_pairs(4, [(0, 1), (1, 2), (2, 3)])
        rng = np.random.default_rng(0)
        assert random_baseline_selection(g, 0, [], rng) == frozenset()
        assert random_baseline_selection(g, 3, [], rng) == frozenset(g.active_pairs())

    def test_excluded_respected(self):
        g = graph_from_pairs(4, [(0, 1), (1, 2), (2, 3)])
        sel = random_baseline_selection(g, 2, [(1, 2)], np.random.default_rng(1))
        assert (1, 2) not in sel
        assert len(sel) == 2

    def test_deterministic_per_seed(self):
        g = Connectome(random_connectome_matrix(10, 0.5, 3))
        a = random_baseline_selection(g, 5, [], np.random.default_rng(42))
        b = random_baseline_selection(g, 5, [], np.random.default_rng(42))
        assert a == b
        # an integer seed works directly as well
        assert random_baseline_selection(g, 5, [], 42) == a

    def test_insufficient_raises(self):
        g = graph_from_pairs(3, [(0, 1)])
        with pytest.raises(InfeasibleError):
            random_baseline_selection(g, 2, [], np.random.default_rng(0))


def cis_then_stay(g):
    return Stage.CIS


class TestRun:
    def test_identity_policy_runs_to_completion(self):
        g = Connectome(random_connectome_matrix(8, 0.5, 1))
        policy = ManualPolicy(lambda i, graph: [], mode=UpdateMode.DEGRADE)
        history = run(
            g, policy, StubClassifier(cis_then_stay), MaxIterations(4),
            checker_cfg=CheckerConfig(0), seed=9,
        )
        assert history.outcome.kind is OutcomeKind.COMPLETED
        assert len(history.records) == 5
        assert all(r.graph == g for r in history.records)
        assert all(r.verdict.ok for r in history.records)

    def test_single_edge_clique_degradation(self):
        g = graph_from_pairs(2, [(0, 1)], w=80)
        policy = StructuralPolicy(StructuralCriterion(Variant.MAX_CLIQUE))
        history = run(
            g, policy, StubClassifier(cis_then_stay), MaxIterations(3),
            checker_cfg=CheckerConfig(10), percent=50, seed=0,
        )
        weights = [r.graph.weight(0, 1) for r in history.records]
        assert weights[0] == 80
        assert weights[1] == 40  # 80 - ceil(80*50/100)
        assert weights[2] == 0   # clamped
        assert history.outcome.kind is OutcomeKind.COMPLETED

    def test_forced_fail_aborts(self):
        g = Connectome(random_connectome_matrix(8, 0.9, 2))

        def rr_then_cis(graph):
            return Stage.RR if graph.edge_count() == g.edge_count() else Stage.CIS

        policy = MetricPolicy(MetricTarget("density", Direction.DECREASE, 0.25))
        history = run(
            g, policy, StubClassifier(rr_then_cis), MaxIterations(4),
            checker_cfg=CheckerConfig(0), seed=5,
        )
        assert history.outcome.kind is OutcomeKind.ABORTED
        assert history.outcome.abort_index == 1
        assert history.records[-1].verdict.tag is Verdict.FAIL
        assert len(history.records) == 2

    def test_initial_label_mismatch_aborts_at_zero(self):
        g = Connectome(random_connectome_matrix(8, 0.7, 3))
        policy = ManualPolicy(lambda i, graph: [])
        history = run(
            g, policy, StubClassifier(cis_then_stay), MaxIterations(2),
            checker_cfg=CheckerConfig(0), seed=1, initial_label=Stage.SP,
        )
        assert history.outcome.kind is OutcomeKind.ABORTED
        assert history.outcome.abort_index == 0
        assert history.outcome.reason == "initial-label-mismatch"
        assert len(history.records) == 1
        assert history.records[0].verdict.tag is Verdict.FAIL

    def test_policy_error_yields_error_outcome(self):
        g = graph_from_pairs(3, [(0, 1)])
        policy = ManualPolicy(lambda i, graph: [(0, 2)])  # inactive edge
        history = run(
            g, policy, StubClassifier(cis_then_stay), MaxIterations(3),
            checker_cfg=CheckerConfig(0), seed=0,
        )
        assert history.outcome.kind is OutcomeKind.ERROR
        assert "policy-error" in history.outcome.reason
        assert len(history.records) == 1  # partial history: record 0 only

    def test_weight_monotonicity_and_frame_rule(self):
        g = Connectome(random_connectome_matrix(12, 0.6, 7))
        policy = StructuralPolicy(StructuralCriterion(Variant.MAX_CLIQUE))
        history = run(
            g, policy, StubClassifier(cis_then_stay), MaxIterations(4),
            checker_cfg=CheckerConfig(), percent=25, seed=3,
        )
        for prev, cur in zip(history.records, history.records[1:]):
            assert np.all(cur.graph.weights <= prev.graph.weights)
            untouched = np.ones((12, 12), dtype=bool)
            for x, y in cur.selection:
                untouched[x, y] = untouched[y, x] = False
            assert np.array_equal(
                cur.graph.weights[untouched], prev.graph.weights[untouched]
            )

    def test_transition_exit(self):
        g = Connectome(random_connectome_matrix(8, 0.8, 11))

        def density_based(graph):
            return Stage.CIS if graph.edge_count() > g.edge_count() // 2 else Stage.PP

        policy = MetricPolicy(MetricTarget("density", Direction.DECREASE, 0.3))
        history = run(
            g, policy, StubClassifier(density_based), TransitionDetected(),
            checker_cfg=CheckerConfig(10_000), seed=2,
        )
        assert history.outcome.kind is OutcomeKind.COMPLETED
        assert history.records[-1].probabilities.argmax() == Stage.PP
        assert history.records[-2].probabilities.argmax() == Stage.CIS

    def test_probability_delta_exit(self):
        g = Connectome(random_connectome_matrix(6, 0.6, 4))
        policy = ManualPolicy(lambda i, graph: [])
        history = run(
            g, policy, StubClassifier(cis_then_stay), ProbabilityDeltaBelow(0.01),
            checker_cfg=CheckerConfig(0), seed=0,
        )
        # identity policy: probabilities identical from step 1 -> exit at 2 records
        assert history.outcome.kind is OutcomeKind.COMPLETED
        assert len(history.records) == 2

    def test_seed_determinism(self):
        g = Connectome(random_connectome_matrix(10, 0.7, 5))
        policy = MetricPolicy(MetricTarget("density", Direction.DECREASE, 0.2))
        h1 = run(g, policy, StubClassifier(cis_then_stay), MaxIterations(3),
                 checker_cfg=CheckerConfig(), seed=77)
        h2 = run(g, policy, StubClassifier(cis_then_stay), MaxIterations(3),
                 checker_cfg=CheckerConfig(), seed=77)
        for a, b in zip(h1.records, h2.records):
            assert a.graph == b.graph
            assert a.selection == b.selection


class TestImportanceFilteredPolicy:
    def test_filtered_clique_removes(self):
        g = Connectome(random_connectome_matrix(10, 0.7, 8))
        criterion = StructuralCriterion(
            Variant.MAX_CLIQUE, importance_filter=ImportanceFilter.ONLY_UNIMPORTANT
        )
        policy = StructuralPolicy(criterion, fraction=0.4)
        assert policy.update_mode() is UpdateMode.REMOVE
        history = run(
            g, policy, StubClassifier(cis_then_stay), MaxIterations(2),
            checker_cfg=CheckerConfig(10_000), seed=1,
        )
        assert history.outcome.kind is OutcomeKind.COMPLETED
        sel = history.records[1].selection
        for x, y in sel:
            assert history.records[1].graph.weight(x, y) == 0


class TestPairedBaseline:
    def test_counts_match_and_structure_excluded(self):
        g = Connectome(random_connectome_matrix(14, 0.7, 9))
        policy = StructuralPolicy(StructuralCriterion(Variant.MAX_CLIQUE))
        twin = run(
            g, policy, StubClassifier(cis_then_stay), MaxIterations(3),
            checker_cfg=CheckerConfig(), percent=50, seed=4,
        )
        baseline = run_paired_baseline(g, twin, StubClassifier(cis_then_stay), seed=123)
        assert baseline.outcome.kind is OutcomeKind.COMPLETED
        assert len(baseline.records) == len(twin.records)
        for t, b in zip(twin.records[1:], baseline.records[1:]):
            assert b.modified_edge_count == t.modified_edge_count
            assert not (b.selection & t.selection)

    def test_baseline_mode_follows_twin(self):
        g = Connectome(random_connectome_matrix(10, 0.8, 10))
        structural = run(
            g, StructuralPolicy(StructuralCriterion(Variant.MAX_CLIQUE)),
            StubClassifier(cis_then_stay), MaxIterations(2),
            checker_cfg=CheckerConfig(), seed=6,
        )
        assert paired_baseline_policy(structural).mode is UpdateMode.DEGRADE
        metric = run(
            g, MetricPolicy(MetricTarget("density", Direction.DECREASE, 0.1)),
            StubClassifier(cis_then_stay), MaxIterations(2),
            checker_cfg=CheckerConfig(10_000), seed=6,
        )
        assert paired_baseline_policy(metric).mode is UpdateMode.REMOVE


class TestDescriptors:
    def test_policy_round_trip(self):
        policies = [
            StructuralPolicy(StructuralCriterion(Variant.K_HUB, k=3)),
            StructuralPolicy(
                StructuralCriterion(
                    Variant.MAX_CLIQUE, importance_filter=ImportanceFilter.ONLY_IMPORTANT
                ),
                fraction=0.25,
            ),
            MetricPolicy(
                MetricTarget(
                    "assortativity",
                    Direction.INCREASE,
                    0.1,
                    importance_bias=ImportanceBias.PREFER_UNIMPORTANT,
                )
            ),
        ]
        for p in policies:
            rebuilt = policy_from_descriptor(p.describe())
            assert rebuilt.describe() == p.describe()

    def test_exit_round_trip(self):
        for e in (MaxIterations(4), TransitionDetected(), ProbabilityDeltaBelow(0.05)):
            assert exit_condition_from_descriptor(e.describe()).describe() == e.describe()

    def test_unknown_rejected(self):
        with pytest.raises(ContractViolationError):
            policy_from_descriptor({"kind": "nope"})
        with pytest.raises(ContractViolationError):
            exit_condition_from_descriptor({"kind": "nope"})


class TestRunState:
    def test_interactive_nonfatal_error(self):
        g = graph_from_pairs(3, [(0, 1)])
        state = RunState(g, StubClassifier(cis_then_stay), CheckerConfig(0), 50, 1)
        with pytest.raises(ContractViolationError):
            state.step(ManualPolicy(lambda i, graph: [(0, 2)]), fatal_errors=False)
        assert state.running
        state.step(ManualPolicy(lambda i, graph: []))
        assert len(state.records) == 2

    def test_reset_restores_iteration_zero(self):
        g = Connectome(random_connectome_matrix(8, 0.6, 12))
        state = RunState(g, StubClassifier(cis_then_stay), CheckerConfig(), 50, 3)
        state.step(ManualPolicy(lambda i, graph: []))
        state.complete()
        state.reset()
        assert state.running
        assert len(state.records) == 1
        assert state.current_graph == g

    def test_step_after_end_rejected(self):
        g = graph_from_pairs(3, [(0, 1)])
        state = RunState(g, StubClassifier(cis_then_stay), CheckerConfig(0), 50, 1)
        state.complete()
        with pytest.raises(ContractViolationError, match="ended"):
            state.step(ManualPolicy(lambda i, graph: []))


class TestFullScaleImportancePolicies:
    def test_filtered_clique_with_neural_classifier(self):
        # the complete importance-restricted path at connectome scale:
        # saliency -> threshold at the 40% fraction -> filtered clique -> removal
        from connectosim.classifier import NeuralStageClassifier, initialize_parameters
        from connectosim.interop import SyntheticSpec, generate_synthetic
        from connectosim.stages import Stage as St

        g0, _ = generate_synthetic(SyntheticSpec(stage=St.CIS), 321)
        clf = NeuralStageClassifier(initialize_parameters(84, np.random.default_rng(1)))
        policy = StructuralPolicy(
            StructuralCriterion(
                Variant.MAX_CLIQUE, importance_filter=ImportanceFilter.ONLY_UNIMPORTANT
            ),
            fraction=0.4,
        )
        history = run(
            g0, policy, clf, MaxIterations(2),
            checker_cfg=CheckerConfig(10_000), percent=50, seed=9,
        )
        assert history.outcome.kind is OutcomeKind.COMPLETED
        assert len(history.records) == 3
        for record in history.records[1:]:
            for x, y in record.selection:
                assert record.graph.weight(x, y) == 0

    def test_metric_bias_with_neural_classifier(self):
        from connectosim.classifier import NeuralStageClassifier, initialize_parameters
        from connectosim.interop import SyntheticSpec, generate_synthetic
        from connectosim.stages import Stage as St

        g0, _ = generate_synthetic(SyntheticSpec(stage=St.RR), 654)
        clf = NeuralStageClassifier(initialize_parameters(84, np.random.default_rng(2)))
        policy = MetricPolicy(
            MetricTarget(
                "density", Direction.DECREASE, 0.1,
                importance_bias=ImportanceBias.PREFER_IMPORTANT,
            )
        )
        history = run(
            g0, policy, clf, MaxIterations(2),
            checker_cfg=CheckerConfig(10_000), seed=3,
        )
        assert history.outcome.kind is OutcomeKind.COMPLETED
        # removal counts follow the per-iteration ceil(0.1 * |E|) law
        edges0 = g0.edge_count()
        first = history.records[1].modified_edge_count
        assert first == -(-edges0 // 10)
