"""
Interval estimates and the runs test for trial outcomes.
"""

import logging
from math import sqrt
from typing import Sequence, Tuple

from scipy.stats import binomtest, norm

from fraisse.constants import DEFAULT_CONFIDENCE

logger = logging.getLogger(__name__)


def wilson_interval(successes: int, trials: int, confidence: float = DEFAULT_CONFIDENCE) -> Tuple[float, float]:
    """Wilson score interval for a success fraction; ``(0, 1)`` without trials."""
    if trials < 0 or not 0 <= successes <= trials:
        raise ValueError(f"Need 0 <= successes <= trials, got {successes}/{trials}")
    if trials == 0:
        return 0.0, 1.0
    interval = binomtest(successes, trials).proportion_ci(confidence_level=confidence, method="wilson")
    return float(interval.low), float(interval.high)


def half_width(successes: int, trials: int, confidence: float = DEFAULT_CONFIDENCE) -> float:
    low, high = wilson_interval(successes, trials, confidence)
    return (high - low) / 2.0


def runs_test(outcomes: Sequence[bool]) -> float:
    """Two-sided p-value of the Wald-Wolfowitz runs test.

    Returns 1.0 when the sequence has only one kind of outcome, since there
    is nothing to test.
    """
    values = [bool(x) for x in outcomes]
    n1 = sum(values)
    n2 = len(values) - n1
    n = n1 + n2
    if n1 == 0 or n2 == 0:
        return 1.0
    runs = 1 + sum(1 for a, b in zip(values, values[1:]) if a != b)
    mean = 2.0 * n1 * n2 / n + 1.0
    variance = 2.0 * n1 * n2 * (2.0 * n1 * n2 - n) / (n * n * (n - 1))
    if variance <= 0:
        return 1.0
    z = (runs - mean) / sqrt(variance)
    p = float(2.0 * norm.sf(abs(z)))
    logger.debug(f"runs test: {runs} runs, expected {mean:.2f}, z={z:.3f}, p={p:.4f}")
    return p
