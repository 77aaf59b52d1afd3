"""Versioned model checkpoints: one .npz holding every array plus a JSON meta
record (format tag, version, node count, activation slope, stage order)."""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from ..errors import ContractViolationError
from ..stages import STAGE_ORDER
from .network import LEAKY_SLOPE, ModelParameters

FORMAT_TAG = "connectosim-model"
FORMAT_VERSION = 1


def save_model(params: ModelParameters, path) -> None:
    params.validate()
    meta = json.dumps(
        {
            "format": FORMAT_TAG,
            "version": FORMAT_VERSION,
            "q": params.node_count,
            "leaky_slope": LEAKY_SLOPE,
            "stages": [s.name for s in STAGE_ORDER],
        }
    )
    np.savez(Path(path), meta=np.array(meta), **params.arrays())


def load_model(path) -> ModelParameters:
    path = Path(path)
    if not path.exists():
        raise ContractViolationError(f"model checkpoint not found: {path}")
    with np.load(path, allow_pickle=False) as archive:
        if "meta" not in archive:
            raise ContractViolationError(f"{path} is not a model checkpoint")
        meta = json.loads(str(archive["meta"]))
        if meta.get("format") != FORMAT_TAG:
            raise ContractViolationError(f"{path}: unexpected format {meta.get('format')!r}")
        if meta.get("version") != FORMAT_VERSION:
            raise ContractViolationError(
                f"{path}: unsupported checkpoint version {meta.get('version')!r}"
            )
        arrays = {k: archive[k] for k in archive.files if k != "meta"}
    try:
        params = ModelParameters(**arrays)
    except TypeError as exc:
        raise ContractViolationError(f"{path}: missing arrays ({exc})") from None
    params.validate()
    return params
