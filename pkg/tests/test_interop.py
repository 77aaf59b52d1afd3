import io
import json

import numpy as np
import pytest

from connectosim.engine import (
    ManualPolicy,
    MaxIterations,
    MetricPolicy,
    OutcomeKind,
    StructuralPolicy,
    UpdateMode,
    compute_degradation_map,
    run,
)
from connectosim.errors import (
    ContractViolationError,
    FactSyntaxError,
    GraphValidationError,
    InfeasibleError,
)
from connectosim.graph import Connectome
from connectosim.interop import (
    BENCHMARK_CLASS_COUNTS,
    FactExtras,
    STAGE_EDGE_STATS,
    SyntheticSpec,
    emit_facts,
    export_history,
    generate_benchmark,
    generate_synthetic,
    import_history,
    load_history,
    load_matrix,
    parse_facts,
    save_history,
    save_matrix,
)
from connectosim.optimizer import Direction, MetricTarget
from connectosim.stages import Stage, StageProbabilities
from connectosim.substructures import StructuralCriterion, Variant
from connectosim.validity import CheckerConfig

from conftest import GOLDEN_DIR, StubClassifier, graph_from_pairs
from oracles import random_connectome_matrix


class TestEmitFacts:
    def test_single_edge_document(self):
        g = graph_from_pairs(2, [(0, 1)], w=57)
        text = emit_facts(g)
        assert text == "node(0).\nnode(1).\nedge(0,1,57).\n"

    def test_empty_graph_nodes_only(self):
        g = Connectome(np.zeros((3, 3), dtype=int))
        assert emit_facts(g) == "node(0).\nnode(1).\nnode(2).\n"

    def test_importance_scaling(self):
        g = graph_from_pairs(6, [(2, 5)])
        text = emit_facts(g, FactExtras(importance={(2, 5): 0.4321}))
        assert "imp(2,5,43)." in text.splitlines()

    def test_matches_golden_small(self):
        g = graph_from_pairs(3, [(0, 1)], w=57)
        m = g.weights.copy()
        m[1, 2] = m[2, 1] = 3
        g = Connectome(m)
        extras = FactExtras(
            importance={(0, 1): 0.4321},
            result=StageProbabilities(0.25, 0.25, 0.25, 0.25),
            threshold=100,
        )
        assert emit_facts(g, extras) == (GOLDEN_DIR / "small.facts").read_text()

    def test_matches_golden_transition(self):
        prev = Connectome(
            [[0, 57, 10], [57, 0, 3], [10, 3, 0]]
        )
        cur = Connectome([[0, 57, 0], [57, 0, 0], [0, 0, 0]])
        dc = compute_degradation_map(prev, 50)
        extras = FactExtras(previous=prev, degradation=dc, threshold=2)
        assert emit_facts(cur, extras) == (GOLDEN_DIR / "transition.facts").read_text()

    def test_byte_deterministic(self):
        g = Connectome(random_connectome_matrix(10, 0.5, 3))
        assert emit_facts(g) == emit_facts(g)


class TestParseFacts:
    def test_round_trip_random_graphs(self):
        for seed in range(20):
            g = Connectome(random_connectome_matrix(12, 0.4, seed))
            parsed, extras = parse_facts(emit_facts(g))
            assert parsed == g
            assert extras.is_empty()

    def test_round_trip_large(self):
        g = Connectome(random_connectome_matrix(84, 0.55, 5))
        parsed, _ = parse_facts(emit_facts(g))
        assert parsed == g

    def test_round_trip_extras(self):
        g = graph_from_pairs(4, [(0, 1), (1, 2), (2, 3)], w=40)
        prev = graph_from_pairs(4, [(0, 1), (1, 2), (2, 3), (0, 3)], w=40)
        extras = FactExtras(
            previous=prev,
            importance={(0, 1): 0.25, (1, 2): -0.1},
            degradation={(0, 1): 10, (1, 2): 20},
            result={Stage.CIS: 0.7, Stage.RR: 0.1, Stage.PP: 0.1, Stage.SP: 0.1},
            result_prev={Stage.CIS: 0.25, Stage.RR: 0.25, Stage.PP: 0.25, Stage.SP: 0.25},
            threshold=5,
        )
        parsed, back = parse_facts(emit_facts(g, extras))
        assert parsed == g
        assert back.previous == prev
        assert back.importance == {(0, 1): 0.25, (1, 2): -0.1}
        assert back.degradation == {(0, 1): 10, (1, 2): 20}
        assert back.result == {Stage.CIS: 0.7, Stage.RR: 0.1, Stage.PP: 0.1, Stage.SP: 0.1}
        assert back.threshold == 5

    def test_non_canonical_edge_accepted(self):
        g, _ = parse_facts("node(0).\nnode(1).\nedge(1,0,50).\n")
        assert g.active_edges()[0][:2] == (0, 1)

    def test_out_of_range_weight_rejected_with_line(self):
        with pytest.raises(FactSyntaxError, match="line 3"):
            parse_facts("node(0).\nnode(1).\nedge(0,1,101).\n")

    def test_conflicting_duplicates_rejected(self):
        text = "node(0).\nnode(1).\nedge(0,1,50).\nedge(1,0,60).\n"
        with pytest.raises(FactSyntaxError, match="conflicting"):
            parse_facts(text)

    def test_syntax_error_line_number(self):
        with pytest.raises(FactSyntaxError, match="line 2"):
            parse_facts("node(0).\nnot a fact\n")

    def test_sparse_nodes_rejected(self):
        with pytest.raises(FactSyntaxError, match="dense"):
            parse_facts("node(0).\nnode(2).\n")

    def test_comments_and_blank_lines_ignored(self):
        text = "% header\nnode(0).\n\nnode(1).  % trailing\nedge(0,1,9).\n"
        g, _ = parse_facts(text)
        assert g.weight(0, 1) == 9


class TestMatrixIO:
    def test_save_load_round_trip(self):
        for seed in range(10):
            g = Connectome(random_connectome_matrix(9, 0.5, seed))
            buf = io.StringIO()
            save_matrix(g, buf)
            assert load_matrix(io.StringIO(buf.getvalue())) == g

    def test_integer_cells_taken_verbatim(self):
        g = load_matrix(io.StringIO("0 1 1\n1 0 1\n1 1 0\n"))
        assert g.weight(0, 1) == 1

    def test_real_cells_scaled(self):
        g = load_matrix(io.StringIO("0.0 0.57\n0.57 0.0\n"))
        assert g.weight(0, 1) == 57

    def test_real_half_rounds_up(self):
        g = load_matrix(io.StringIO("0.0 0.575\n0.575 0.0\n"))
        assert g.weight(0, 1) == 58

    def test_comma_delimiter(self):
        g = load_matrix(io.StringIO("0,25,0\n25,0,3\n0,3,0\n"))
        assert g.weight(1, 2) == 3

    def test_asymmetric_named(self):
        with pytest.raises(GraphValidationError, match=r"\(0,1\)"):
            load_matrix(io.StringIO("0 5\n4 0\n"))

    def test_ragged_rejected(self):
        with pytest.raises(GraphValidationError, match="ragged"):
            load_matrix(io.StringIO("0 1\n1\n"))

    def test_non_numeric_rejected(self):
        with pytest.raises(GraphValidationError, match="non-numeric"):
            load_matrix(io.StringIO("0 x\nx 0\n"))

    def test_real_out_of_unit_range_rejected(self):
        with pytest.raises(GraphValidationError, match="outside"):
            load_matrix(io.StringIO("0.0 1.5\n1.5 0.0\n"))

    def test_file_paths(self, tmp_path):
        g = graph_from_pairs(3, [(0, 2)], w=31)
        path = tmp_path / "m.txt"
        save_matrix(g, path)
        assert load_matrix(path) == g


def small_history(seed=3):
    g = Connectome(random_connectome_matrix(8, 0.7, seed))
    policy = MetricPolicy(MetricTarget("density", Direction.DECREASE, 0.2))
    return run(
        g, policy, StubClassifier(lambda graph: Stage.CIS), MaxIterations(4),
        checker_cfg=CheckerConfig(10_000), seed=seed,
    )


class TestHistoryExport:
    def test_document_shape_completed(self):
        h = small_history()
        doc = export_history(h)
        assert doc["outcome"]["kind"] == "completed"
        assert len(doc["records"]) == 5
        assert doc["records"][0]["selection"] == []
        assert doc["records"][2]["adjacency"] == h.records[2].graph.weights.tolist()

    def test_aborted_document(self):
        g = Connectome(random_connectome_matrix(8, 0.8, 4))

        def rr_then_cis(graph):
            return Stage.RR if graph.edge_count() == g.edge_count() else Stage.CIS

        policy = MetricPolicy(MetricTarget("density", Direction.DECREASE, 0.3))
        h = run(g, policy, StubClassifier(rr_then_cis), MaxIterations(4),
                checker_cfg=CheckerConfig(0), seed=2)
        doc = export_history(h)
        assert doc["outcome"]["kind"] == "aborted"
        assert doc["outcome"]["abort_index"] == 1
        assert len(doc["records"]) == 2
        assert doc["records"][1]["verdict"]["tag"] == "FAIL"

    def test_round_trip_identity(self):
        h = small_history(seed=9)
        assert import_history(export_history(h)) == h

    def test_json_serializable_and_file_round_trip(self, tmp_path):
        h = small_history(seed=5)
        path = tmp_path / "history.json"
        save_history(h, path)
        json.loads(path.read_text())  # valid JSON
        assert load_history(path) == h

    def test_rejects_foreign_document(self):
        with pytest.raises(ContractViolationError):
            import_history({"format": "something-else"})


class TestSyntheticGenerator:
    def test_cis_edge_count_in_band(self):
        mean, sd = STAGE_EDGE_STATS[Stage.CIS]
        for seed in range(10):
            g, stage = generate_synthetic(SyntheticSpec(stage=Stage.CIS), seed)
            assert stage == Stage.CIS
            assert g.node_count == 84
            assert abs(g.edge_count() - mean) <= 4 * sd

    def test_seed_determinism(self):
        spec = SyntheticSpec(stage=Stage.RR)
        a, _ = generate_synthetic(spec, 42)
        b, _ = generate_synthetic(spec, 42)
        assert a == b

    def test_stage_means_ordered(self):
        # over many draws the SP average sits below the CIS average
        cis, sp = [], []
        for seed in range(100):
            g, _ = generate_synthetic(SyntheticSpec(stage=Stage.CIS), seed)
            cis.append(g.edge_count())
            g, _ = generate_synthetic(SyntheticSpec(stage=Stage.SP), seed)
            sp.append(g.edge_count())
        assert np.mean(sp) < np.mean(cis)

    def test_planted_clique_present(self):
        g, _ = generate_synthetic(SyntheticSpec(stage=Stage.CIS), 7)
        # the anchored window is fully interconnected for at least the
        # minimum planted size
        from connectosim.substructures import solve_max_clique

        sol = solve_max_clique(g)
        assert sol.optimum_size >= 18

    def test_weights_in_range(self):
        g, _ = generate_synthetic(SyntheticSpec(stage=Stage.PP), 3)
        w = g.weights[g.weights > 0]
        assert w.min() >= 1 and w.max() <= 100

    def test_benchmark_counts(self):
        data = generate_benchmark(seed=1, class_counts={s: 3 for s in Stage})
        assert len(data) == 12
        assert sum(1 for _, s in data if s == Stage.CIS) == 3

    def test_default_benchmark_class_counts(self):
        assert sum(BENCHMARK_CLASS_COUNTS.values()) == 578

    def test_infeasible_spec_rejected(self):
        with pytest.raises(InfeasibleError):
            generate_synthetic(
                SyntheticSpec(stage=Stage.CIS, node_count=10, edge_mean=2036.0), 0
            )

    def test_small_q_supported(self):
        g, _ = generate_synthetic(
            SyntheticSpec(stage=Stage.SP, node_count=20, edge_mean=60, edge_sd=5), 4
        )
        assert g.node_count == 20
