"""Serialization and data interchange: ground facts, matrix files, history
documents, and the synthetic connectome generator."""

from .facts import FactExtras, emit_facts, parse_facts
from .history import export_history, import_history, load_history, save_history
from .matrixio import load_matrix, save_matrix
from .synthetic import (
    BENCHMARK_CLASS_COUNTS,
    STAGE_EDGE_STATS,
    SyntheticSpec,
    generate_benchmark,
    generate_synthetic,
)

__all__ = [
    "BENCHMARK_CLASS_COUNTS",
    "FactExtras",
    "STAGE_EDGE_STATS",
    "SyntheticSpec",
    "emit_facts",
    "export_history",
    "generate_benchmark",
    "generate_synthetic",
    "import_history",
    "load_history",
    "load_matrix",
    "parse_facts",
    "save_history",
    "save_matrix",
]
