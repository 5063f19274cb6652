"""Batch-means error bars for Monte Carlo inequality checks."""
from __future__ import annotations

import math
from typing import Callable

import numpy as np

DEFAULT_BATCHES = 20


def batch_means_error(stat: Callable[[np.ndarray], float], points: np.ndarray, batches: int = DEFAULT_BATCHES) -> float:
    """Standard error of ``stat(points)`` from its spread over contiguous batches.

    Antithetic clouds store ``x`` and ``-x`` in separate halves; reorder them
    with :func:`pair_interleave` first so each pair stays in one batch.
    """
    M = points.shape[0]
    if batches < 2 or M < 2 * batches:
        return 0.0
    idx = np.array_split(np.arange(M), batches)
    vals = np.array([stat(points[k]) for k in idx])
    return float(np.std(vals, ddof=1) / math.sqrt(batches))


def pair_interleave(points: np.ndarray) -> np.ndarray:
    """Reorder ``[x_1..x_m, -x_1..-x_m]`` as ``[x_1, -x_1, x_2, -x_2, ...]``."""
    M = points.shape[0]
    if M % 2:
        return points
    h = M // 2
    out = np.empty_like(points)
    out[0::2] = points[:h]
    out[1::2] = points[h:]
    return out
