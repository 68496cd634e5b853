"""Distances and summary statistics over potential tables."""

from __future__ import annotations

import math
from typing import Sequence


def hellinger(p1: Sequence[float], p2: Sequence[float]) -> float:
    """Hellinger distance in [0, 1] between two potential tables.

    Each table is normalized by its own sum before comparison, so the result
    is invariant under positive rescaling of either table.  Zero entries are
    fine; an all-zero table is not.  Accumulation runs left to right in the
    given (canonical row) order.
    """
    a = [float(x) for x in p1]
    b = [float(x) for x in p2]
    if len(a) != len(b):
        raise ValueError(f"table length mismatch: {len(a)} vs {len(b)}")
    if not a:
        raise ValueError("empty potential table")
    for table in (a, b):
        for x in table:
            if not (x >= 0.0) or math.isinf(x):
                raise ValueError(f"potentials must be finite and non-negative, got {x!r}")
    s1 = sum(a)
    s2 = sum(b)
    if s1 <= 0.0 or s2 <= 0.0:
        raise ValueError("table has no positive entry")
    acc = 0.0
    for x, y in zip(a, b):
        d = math.sqrt(x / s1) - math.sqrt(y / s2)
        acc += d * d
    return min(1.0, math.sqrt(acc / 2.0))


def distinct_count(potentials: Sequence[float]) -> int:
    """Number of distinct values under exact float equality.

    Reduction writes the identical group mean into every member row, so no
    epsilon bucketing is needed or wanted here.
    """
    return len({float(x) for x in potentials})
