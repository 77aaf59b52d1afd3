import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent))

import numpy as np
import pytest

from connectosim.classifier.base import StageClassifier
from connectosim.graph import Connectome
from connectosim.stages import ImportanceMap, Stage, StageProbabilities

GOLDEN_DIR = Path(__file__).parent / "golden"


def graph_from_pairs(q, pairs, w=50):
    m = np.zeros((q, q), dtype=np.int64)
    for x, y in pairs:
        m[x, y] = m[y, x] = w
    return Connectome(m)


class StubClassifier(StageClassifier):
    """Deterministic classifier for pipeline tests: stage via a script
    callable (graph -> Stage), defaulting to an edge-count rule."""

    def __init__(self, script=None):
        self.script = script

    def classify(self, g):
        if self.script is not None:
            stage = self.script(g)
        else:
            stage = Stage.CIS if g.edge_count() >= 3 else Stage.RR
        vec = [0.1, 0.1, 0.1, 0.1]
        vec[stage.value] = 0.7
        return StageProbabilities(*vec)

    def edge_importance(self, g, stage=None):
        values = g.weights.astype(float) / 100.0
        values = (values + values.T) / 2
        np.fill_diagonal(values, 0.0)
        return ImportanceMap(
            values=values, target_class=stage or self.classify(g).argmax()
        )


@pytest.fixture
def k3():
    return graph_from_pairs(3, [(0, 1), (0, 2), (1, 2)])


@pytest.fixture
def p3():
    return graph_from_pairs(3, [(0, 1), (1, 2)])


@pytest.fixture
def p4():
    return graph_from_pairs(4, [(0, 1), (1, 2), (2, 3)])


@pytest.fixture
def c4():
    return graph_from_pairs(4, [(0, 1), (1, 2), (2, 3), (0, 3)])


@pytest.fixture
def star5():
    # center 2, leaves 0,1,3,4
    return graph_from_pairs(5, [(2, 0), (2, 1), (2, 3), (2, 4)])
