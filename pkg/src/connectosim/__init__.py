"""connectosim: iterative damage simulation over weighted brain-connectome
graphs, with structural and metric-driven edge selection, a topology-aware
stage classifier with saliency, rule-based transition validity checking,
and full evolution histories."""

from .graph import Connectome, Edge
from .stages import ImportanceMap, Stage, StageProbabilities

__version__ = "0.1.0"

__all__ = [
    "Connectome",
    "Edge",
    "ImportanceMap",
    "Stage",
    "StageProbabilities",
    "__version__",
]
