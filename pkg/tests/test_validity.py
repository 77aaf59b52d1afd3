import numpy as np
import pytest

from connectosim.errors import ContractViolationError
from connectosim.graph import Connectome
from connectosim.stages import Stage, StageProbabilities
from connectosim.validity import (
    CheckerConfig,
    Verdict,
    ValidityVerdict,
    check,
    load_rules,
    removed_edge_count,
    save_rules,
)

from conftest import graph_from_pairs
from oracles import random_connectome_matrix


def probs_for(stage, top=0.7):
    rest = (1.0 - top) / 3
    vec = [rest] * 4
    vec[stage.value] = top
    return StageProbabilities(*vec)


def drop_edges(g, n):
    m = g.weights.copy()
    removed = 0
    for x, y in g.active_pairs():
        if removed == n:
            break
        m[x, y] = m[y, x] = 0
        removed += 1
    assert removed == n
    return Connectome(m)


def big_graph(seed=0):
    return Connectome(random_connectome_matrix(30, 0.8, seed))


class TestCheck:
    def test_severe_into_cis_fails(self):
        g = big_graph()
        g2 = drop_edges(g, 150)
        v = check(g, g2, probs_for(Stage.RR), probs_for(Stage.CIS), CheckerConfig(100))
        assert v.tag is Verdict.FAIL
        assert v.severe
        assert v.violated_rule == (Stage.RR, Stage.CIS)
        assert v.removed_edge_count == 150

    def test_no_removal_ok(self):
        g = big_graph()
        v = check(g, g, probs_for(Stage.RR), probs_for(Stage.CIS), CheckerConfig(0))
        assert v.tag is Verdict.OK
        assert not v.severe
        assert v.removed_edge_count == 0

    def test_severe_out_of_cis_ok(self):
        g = big_graph()
        g2 = drop_edges(g, 150)
        v = check(g, g2, probs_for(Stage.CIS), probs_for(Stage.RR), CheckerConfig(100))
        assert v.tag is Verdict.OK
        assert v.severe

    def test_not_severe_into_cis_ok(self):
        g = big_graph()
        g2 = drop_edges(g, 80)
        v = check(g, g2, probs_for(Stage.SP), probs_for(Stage.CIS), CheckerConfig(100))
        assert v.tag is Verdict.OK

    def test_exactly_threshold_not_severe(self):
        g = big_graph()
        g2 = drop_edges(g, 100)
        v = check(g, g2, probs_for(Stage.RR), probs_for(Stage.CIS), CheckerConfig(100))
        assert not v.severe
        assert v.tag is Verdict.OK

    def test_threshold_monotonicity(self):
        g = big_graph()
        g2 = drop_edges(g, 120)
        prev, cur = probs_for(Stage.PP), probs_for(Stage.CIS)
        failed_at = [
            t
            for t in range(0, 140, 7)
            if check(g, g2, prev, cur, CheckerConfig(t)).tag is Verdict.FAIL
        ]
        # failing thresholds form a prefix: if it fails at T it fails below T
        assert failed_at == [t for t in range(0, 140, 7) if t < 120]

    def test_custom_rule_set(self):
        g = big_graph()
        g2 = drop_edges(g, 50)
        cfg = CheckerConfig(10, forbidden_transitions=((Stage.SP, Stage.RR),))
        assert check(g, g2, probs_for(Stage.SP), probs_for(Stage.RR), cfg).tag is Verdict.FAIL
        assert check(g, g2, probs_for(Stage.RR), probs_for(Stage.CIS), cfg).tag is Verdict.OK

    def test_mismatched_q_rejected(self):
        a = graph_from_pairs(3, [(0, 1)])
        b = graph_from_pairs(4, [(0, 1)])
        with pytest.raises(ContractViolationError, match="node count"):
            check(a, b, probs_for(Stage.CIS), probs_for(Stage.CIS), CheckerConfig(0))

    def test_argmax_invariance_fuzz(self):
        g = big_graph()
        g2 = drop_edges(g, 150)
        cfg = CheckerConfig(100)
        rng = np.random.default_rng(5)
        base_cases = [
            (Stage.RR, Stage.CIS),
            (Stage.CIS, Stage.RR),
            (Stage.SP, Stage.SP),
            (Stage.PP, Stage.CIS),
        ]
        for prev_stage, cur_stage in base_cases:
            expected = check(
                g, g2, probs_for(prev_stage), probs_for(cur_stage), cfg
            ).tag
            for _ in range(250):
                prev = _random_probs_with_argmax(rng, prev_stage)
                cur = _random_probs_with_argmax(rng, cur_stage)
                assert check(g, g2, prev, cur, cfg).tag is expected


def _random_probs_with_argmax(rng, stage):
    vec = rng.random(4) * 0.5
    vec[stage.value] = 0.5 + rng.random() * 0.5
    vec = vec / vec.sum()
    order = np.argsort(-vec)
    if order[0] != stage.value:  # extremely unlikely; force it
        vec[stage.value] += vec[order[0]]
        vec /= vec.sum()
    return StageProbabilities(*vec)


class TestRemovedEdgeCount:
    def test_counts_canonical_once(self):
        g = graph_from_pairs(4, [(0, 1), (1, 2), (2, 3)])
        g2 = graph_from_pairs(4, [(1, 2)])
        assert removed_edge_count(g, g2) == 2

    def test_weight_decrease_not_removal(self):
        g = graph_from_pairs(3, [(0, 1)], w=80)
        g2 = graph_from_pairs(3, [(0, 1)], w=10)
        assert removed_edge_count(g, g2) == 0


class TestConfig:
    def test_default_threshold_from_g0(self):
        g = big_graph()
        cfg = CheckerConfig()
        assert cfg.resolve_threshold(g) == -(-g.edge_count() // 10)

    def test_explicit_threshold_kept(self):
        assert CheckerConfig(42).resolve_threshold(big_graph()) == 42

    def test_nonempty_rules_required(self):
        with pytest.raises(ContractViolationError):
            CheckerConfig(0, forbidden_transitions=())

    def test_fail_verdict_invariant(self):
        with pytest.raises(ContractViolationError):
            ValidityVerdict(Verdict.FAIL, 5, severe=False, violated_rule=None)

    def test_rules_file_round_trip(self, tmp_path):
        cfg = CheckerConfig(77, forbidden_transitions=((Stage.SP, Stage.RR), (Stage.RR, Stage.CIS)))
        path = tmp_path / "rules.json"
        save_rules(cfg, path)
        assert load_rules(path) == cfg

    def test_rules_file_defaults(self, tmp_path):
        path = tmp_path / "rules.json"
        path.write_text('{"severe_disruption_threshold": null, "forbidden_transitions": []}')
        cfg = load_rules(path)
        assert cfg.severe_disruption_threshold is None
        assert (Stage.RR, Stage.CIS) in cfg.forbidden_transitions
