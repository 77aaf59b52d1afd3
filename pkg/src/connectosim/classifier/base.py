"""Pluggable stage-classifier interface consumed by the evolution engine."""

from __future__ import annotations

import abc
from typing import Optional

from ..graph import Connectome
from ..stages import ImportanceMap, Stage, StageProbabilities
from . import network
from .network import ModelParameters


class StageClassifier(abc.ABC):
    """Anything that classifies connectomes and scores edge importance."""

    @abc.abstractmethod
    def classify(self, g: Connectome) -> StageProbabilities:
        ...

    @abc.abstractmethod
    def edge_importance(
        self, g: Connectome, stage: Optional[Stage] = None
    ) -> ImportanceMap:
        ...


class NeuralStageClassifier(StageClassifier):
    """The trained network behind the StageClassifier interface."""

    def __init__(self, params: ModelParameters):
        params.validate()
        self.params = params

    def classify(self, g: Connectome) -> StageProbabilities:
        return network.classify(self.params, g)

    def edge_importance(
        self, g: Connectome, stage: Optional[Stage] = None
    ) -> ImportanceMap:
        return network.edge_importance(self.params, g, stage)
