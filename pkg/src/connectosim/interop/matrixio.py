"""Adjacency-matrix files: delimiter-separated q x q numeric grids.

Cells are either integers 0-100 (taken verbatim) or reals in [0, 1]
(detected by a decimal point anywhere in the file and scaled by 100 with
round-half-up, parsed through Decimal so the written digits govern the
rounding). Saving always emits the integer form, space-separated.
"""

from __future__ import annotations

import io
from decimal import Decimal, InvalidOperation
from pathlib import Path
from typing import TextIO, Union

import numpy as np

from ..errors import GraphValidationError
from ..graph import Connectome

PathOrStream = Union[str, Path, TextIO]


def _read_text(source: PathOrStream) -> str:
    if hasattr(source, "read"):
        return source.read()
    return Path(source).read_text()


def _write_text(target: PathOrStream, text: str) -> None:
    if hasattr(target, "write"):
        target.write(text)
    else:
        Path(target).write_text(text)


def save_matrix(g: Connectome, target: PathOrStream) -> None:
    rows = (" ".join(str(int(w)) for w in row) for row in g.weights)
    _write_text(target, "\n".join(rows) + "\n")


def load_matrix(source: PathOrStream, node_names=None) -> Connectome:
    text = _read_text(source)
    lines = [line.strip() for line in text.splitlines()]
    rows = [line for line in lines if line]
    if not rows:
        raise GraphValidationError("matrix file is empty")
    delimiter = "," if "," in rows[0] else None
    cells = [
        [tok.strip() for tok in (row.split(delimiter) if delimiter else row.split())]
        for row in rows
    ]
    width = len(cells[0])
    for i, row in enumerate(cells):
        if len(row) != width:
            raise GraphValidationError(
                f"ragged matrix: row {i} has {len(row)} cells, expected {width}"
            )
    real_mode = any("." in tok for row in cells for tok in row)
    matrix = np.zeros((len(cells), width), dtype=np.int64)
    for i, row in enumerate(cells):
        for j, tok in enumerate(row):
            matrix[i, j] = _parse_cell(tok, i, j, real_mode)
    return Connectome(matrix, node_names=node_names)


def _parse_cell(token: str, i: int, j: int, real_mode: bool) -> int:
    if real_mode:
        try:
            value = Decimal(token)
        except InvalidOperation:
            raise GraphValidationError(
                f"non-numeric cell at ({i},{j}): {token!r}"
            ) from None
        if not (0 <= value <= 1):
            raise GraphValidationError(
                f"real cell at ({i},{j}) outside [0, 1]: {token}"
            )
        return int((value * 100 + Decimal("0.5")).to_integral_value(rounding="ROUND_FLOOR"))
    try:
        return int(token)
    except ValueError:
        raise GraphValidationError(
            f"non-numeric cell at ({i},{j}): {token!r}"
        ) from None
