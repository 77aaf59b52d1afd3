"""Deterministic rounding rules shared across modules.

Fractions written as short decimals (0.1, 0.4, ...) are re-read through
their string form so arithmetic follows the decimal the caller wrote, not
the nearest binary float.
"""

from __future__ import annotations

import math
from fractions import Fraction


def ceil_decimal_product(fraction: float, count: int) -> int:
    """ceil(fraction * count) with fraction read as its printed decimal."""
    return math.ceil(Fraction(str(fraction)) * count)


def round_half_up(value: float) -> int:
    """Round to nearest integer, halves toward +infinity."""
    return math.floor(value + 0.5)


def scale_to_percent(value: float) -> int:
    """Map a real (typically in [0, 1]) to the 0-100 integer encoding."""
    return round_half_up(100.0 * value)
