"""Small numerical helpers shared by the model modules."""

from typing import Callable, Tuple

import numpy as np


def first_argmax(values: np.ndarray, rtol: float = 1e-12) -> int:
    """
    Index of the first entry within ``rtol`` (relative) of the maximum.

    Ties are resolved toward the smallest index, i.e. the smallest maximizer
    when ``values`` is laid out over an ascending grid.
    """
    values = np.asarray(values, dtype=float)
    best = np.nanmax(values)
    threshold = best - rtol * max(1.0, abs(best))
    return int(np.argmax(values >= threshold))


def bisect_increasing(
    func: Callable[[np.ndarray], np.ndarray],
    target: np.ndarray,
    lo: float,
    hi: float,
    tol: float = 1e-10,
    max_iter: int = 200,
) -> np.ndarray:
    """
    Vectorized bisection for the smallest ``x`` in ``[lo, hi]`` with ``func(x) >= target``.

    ``func`` must be non-decreasing. Targets above ``func(hi)`` return ``hi``.
    """
    target = np.atleast_1d(np.asarray(target, dtype=float))
    left = np.full(target.shape, float(lo))
    right = np.full(target.shape, float(hi))
    for _ in range(max_iter):
        if np.all(right - left <= tol):
            break
        mid = 0.5 * (left + right)
        ok = func(mid) >= target
        right = np.where(ok, mid, right)
        left = np.where(ok, left, mid)
    return right


def mean_and_stderr(samples: np.ndarray) -> Tuple[float, float]:
    samples = np.asarray(samples, dtype=float)
    if samples.size < 2:
        return float(samples.mean()), 0.0
    return float(samples.mean()), float(samples.std(ddof=1) / np.sqrt(samples.size))
