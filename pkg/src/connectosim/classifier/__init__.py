"""Topology-aware four-class stage classifier with saliency support."""

from .base import NeuralStageClassifier, StageClassifier
from .checkpoint import load_model, save_model
from .layers import (
    edge2edge_backward,
    edge2edge_forward,
    edge2node_backward,
    edge2node_forward,
    softmax,
)
from .network import (
    LEAKY_SLOPE,
    ModelParameters,
    classify,
    class_score_gradient,
    edge_importance,
    initialize_parameters,
)
from .saliency import importance_threshold, partition_by_importance, ranked_active_edges
from .training import TrainingConfig, evaluate_accuracy, train

__all__ = [
    "LEAKY_SLOPE",
    "ModelParameters",
    "NeuralStageClassifier",
    "StageClassifier",
    "TrainingConfig",
    "classify",
    "class_score_gradient",
    "edge2edge_backward",
    "edge2edge_forward",
    "edge2node_backward",
    "edge2node_forward",
    "edge_importance",
    "evaluate_accuracy",
    "importance_threshold",
    "initialize_parameters",
    "load_model",
    "partition_by_importance",
    "ranked_active_edges",
    "save_model",
    "softmax",
    "train",
]
