"""numpy implementations of the hot loops; the semantic reference for ``_ckernels``."""
from __future__ import annotations

import numpy as np


def accumulate_boxes(positions: np.ndarray, exps: np.ndarray, counts: np.ndarray) -> None:
    """``counts[b] += 1`` for each ``e``, where ``b = #{k : positions[k] <= e}``."""
    if exps.size == 0:
        return
    top = positions.shape[0]
    if top < 2 or counts.shape[0] < top:
        raise ValueError("positions too short or counts array too small")
    if exps.max() >= positions[-1] or exps.min() < 0:
        raise ValueError("ball beyond materialized walk")
    boxes = np.searchsorted(positions, exps, side="right")
    hits = np.bincount(boxes)
    counts[: hits.shape[0]] += hits


def sup_deviation(positions: np.ndarray, m: float, n: float) -> float:
    """``sup_{0 <= y <= n} |nu(y) - y/m|`` evaluated at the jumps of ``nu`` and at ``n``."""
    if positions.shape[0] == 0 or positions[-1] <= n:
        raise ValueError("walk not materialized beyond n")
    top = int(np.searchsorted(positions, n, side="right"))
    s = positions[1:top] / m
    k = np.arange(1, top, dtype=np.float64)
    best = 1.0
    if s.size:
        best = max(best, float(np.abs((k + 1.0) - s).max()), float(np.abs(k - s).max()))
    return max(best, abs(top - n / m))
