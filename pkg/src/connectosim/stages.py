"""Disease-stage labels and classifier output containers."""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .errors import ContractViolationError, NumericError


class Stage(enum.Enum):
    """The four clinical stages, in fixed tie-break order."""

    CIS = 0
    RR = 1
    PP = 2
    SP = 3

    @classmethod
    def from_name(cls, name: str) -> "Stage":
        try:
            return cls[name.upper()]
        except KeyError:
            raise ContractViolationError(f"unknown stage {name!r}") from None


STAGE_ORDER = (Stage.CIS, Stage.RR, Stage.PP, Stage.SP)


@dataclass(frozen=True)
class StageProbabilities:
    """Four-way probability vector; argmax ties break in stage order."""

    p_cis: float
    p_rr: float
    p_pp: float
    p_sp: float

    def __post_init__(self):
        vec = self.as_array()
        if not np.all(np.isfinite(vec)):
            raise NumericError("non-finite stage probability")
        if np.any(vec <= 0.0) or np.any(vec >= 1.0):
            raise ContractViolationError("probabilities must lie in (0, 1)")
        if abs(float(vec.sum()) - 1.0) > 1e-9:
            raise ContractViolationError(
                f"probabilities must sum to 1, got {vec.sum():.12f}"
            )

    def as_array(self) -> np.ndarray:
        return np.array([self.p_cis, self.p_rr, self.p_pp, self.p_sp], dtype=float)

    def of(self, stage: Stage) -> float:
        return float(self.as_array()[stage.value])

    def argmax(self) -> Stage:
        return STAGE_ORDER[int(np.argmax(self.as_array()))]

    @classmethod
    def from_array(cls, vec) -> "StageProbabilities":
        a = np.asarray(vec, dtype=float)
        if a.shape != (4,):
            raise ContractViolationError(f"expected 4 probabilities, got {a.shape}")
        return cls(float(a[0]), float(a[1]), float(a[2]), float(a[3]))


@dataclass(frozen=True)
class ImportanceMap:
    """Per-edge saliency: symmetric q x q gradient matrix, zero diagonal."""

    values: np.ndarray
    target_class: Stage

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim != 2 or v.shape[0] != v.shape[1]:
            raise ContractViolationError(f"importance must be square, got {v.shape}")
        if not np.allclose(v, v.T, atol=0.0):
            raise ContractViolationError("importance matrix must be symmetric")
        if np.any(np.diagonal(v) != 0.0):
            raise ContractViolationError("importance diagonal must be zero")
        v = v.copy()
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    def of(self, x: int, y: int) -> float:
        return float(self.values[x, y])
