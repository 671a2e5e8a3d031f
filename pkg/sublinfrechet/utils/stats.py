"""Small statistics helpers for trial reports."""

from __future__ import annotations

import math
from typing import Sequence, Tuple

import numpy as np
from scipy.stats import norm


def wilson_interval(successes: int, total: int, confidence: float = 0.95) -> Tuple[float, float]:
    """Wilson score interval for a binomial proportion."""
    if total <= 0:
        return 0.0, 1.0
    if not 0 <= successes <= total:
        raise ValueError(f"successes must lie in [0, {total}], got {successes}")
    z = float(norm.ppf(0.5 + confidence / 2.0))
    p = successes / total
    denom = 1.0 + z * z / total
    center = (p + z * z / (2 * total)) / denom
    half = z * math.sqrt(p * (1 - p) / total + z * z / (4 * total * total)) / denom
    return max(0.0, center - half), min(1.0, center + half)


def wilson_lower(successes: int, total: int, confidence: float = 0.95) -> float:
    return wilson_interval(successes, total, confidence)[0]


def quartiles(values: Sequence[float]) -> Tuple[float, float, float]:
    if len(values) == 0:
        return 0.0, 0.0, 0.0
    q1, q2, q3 = np.percentile(np.asarray(values, dtype=float), [25, 50, 75])
    return float(q1), float(q2), float(q3)


def percentile(values: Sequence[float], q: float) -> float:
    if len(values) == 0:
        return 0.0
    return float(np.percentile(np.asarray(values, dtype=float), q))
