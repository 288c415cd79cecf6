"""
Bidding strategies: monotone maps from values to bids.

Closed-form strategies carry analytic derivatives; grid strategies use
monotone linear interpolation, flat-clamped outside the grid, with central
difference derivatives.
"""

import logging
from abc import ABC, abstractmethod
from typing import Any, Optional, Sequence

import numpy as np

from auctionlab.core.exceptions import ConfigError, NotIncreasing
from auctionlab.utils.numerics import bisect_increasing

logger = logging.getLogger(__name__)

DERIVATIVE_STEP = 1e-6


def _out(values: np.ndarray) -> Any:
    return float(values) if np.ndim(values) == 0 else values


class Strategy(ABC):
    """
    Abstract base class for bid functions.

    Attributes:
        repr_tag: One of ``identity``, ``linear``, ``affine``,
            ``fp-symmetric``, ``thresholded``, ``custom-grid``.
        domain_lo: Smallest value the strategy is evaluated at.
        domain_hi: Largest value used when inverting numerically.
    """

    repr_tag: str = "abstract"
    domain_lo: float = 0.0
    domain_hi: float = np.inf

    @abstractmethod
    def __call__(self, x: Any) -> Any:
        """Bid(s) for value(s) ``x``."""

    def derivative(self, x: Any) -> Any:
        """Central difference with a one-sided step at the lower edge of the domain."""
        x = np.asarray(x, dtype=float)
        h = DERIVATIVE_STEP
        left = np.maximum(x - h, self.domain_lo)
        right = x + h
        if np.isfinite(self.domain_hi):
            right = np.minimum(right, self.domain_hi)
        width = right - left
        with np.errstate(divide="ignore", invalid="ignore"):
            slope = (np.asarray(self(right)) - np.asarray(self(left))) / width
        return _out(np.where(width > 0, slope, 0.0))

    def inverse(self, b: Any) -> Any:
        """Smallest value whose bid reaches ``b``; clamped to the domain."""
        b = np.asarray(b, dtype=float)
        hi = self.domain_hi if np.isfinite(self.domain_hi) else 1e12
        x = bisect_increasing(lambda v: np.asarray(self(v)), b.ravel(), self.domain_lo, hi, tol=1e-12)
        return _out(x.reshape(b.shape))

    def tabulate(self, values: Sequence[float]) -> np.ndarray:
        return np.asarray(self(np.asarray(values, dtype=float)), dtype=float)

    def describe(self) -> dict:
        return {"repr": self.repr_tag}


class Truthful(Strategy):
    repr_tag = "identity"

    def __call__(self, x: Any) -> Any:
        return _out(np.asarray(x, dtype=float) * 1.0)

    def derivative(self, x: Any) -> Any:
        return _out(np.ones(np.shape(x)))

    def inverse(self, b: Any) -> Any:
        return _out(np.asarray(b, dtype=float) * 1.0)


class Linear(Strategy):
    """Linear shading ``beta(x) = alpha * x``."""

    repr_tag = "linear"

    def __init__(self, alpha: float):
        if alpha <= 0:
            raise ConfigError("linear shading factor must be positive")
        self.alpha = float(alpha)

    def __call__(self, x: Any) -> Any:
        return _out(self.alpha * np.asarray(x, dtype=float))

    def derivative(self, x: Any) -> Any:
        return _out(np.full(np.shape(x), self.alpha))

    def inverse(self, b: Any) -> Any:
        return _out(np.asarray(b, dtype=float) / self.alpha)

    def describe(self) -> dict:
        return {"repr": self.repr_tag, "alpha": self.alpha}


class Affine(Strategy):
    """``beta(x) = max(0, slope * x + intercept)``."""

    repr_tag = "affine"

    def __init__(self, slope: float, intercept: float = 0.0):
        if slope <= 0:
            raise ConfigError("affine strategy needs a positive slope")
        self.slope = float(slope)
        self.intercept = float(intercept)

    def __call__(self, x: Any) -> Any:
        return _out(np.maximum(0.0, self.slope * np.asarray(x, dtype=float) + self.intercept))

    def derivative(self, x: Any) -> Any:
        x = np.asarray(x, dtype=float)
        return _out(np.where(self.slope * x + self.intercept > 0, self.slope, 0.0))

    def inverse(self, b: Any) -> Any:
        x = (np.asarray(b, dtype=float) - self.intercept) / self.slope
        return _out(np.maximum(x, self.domain_lo))

    def describe(self) -> dict:
        return {"repr": self.repr_tag, "slope": self.slope, "intercept": self.intercept}


class GridStrategy(Strategy):
    """
    Strategy tabulated on a value grid.

    Values are strictly sorted; bids must be non-decreasing. Evaluation uses
    linear interpolation and is flat-clamped outside ``[values[0], values[-1]]``.
    """

    repr_tag = "custom-grid"

    def __init__(self, values: Sequence[float], bids: Sequence[float], repr_tag: Optional[str] = None):
        v = np.asarray(values, dtype=float)
        b = np.asarray(bids, dtype=float)
        if v.ndim != 1 or v.shape != b.shape or v.size < 2:
            raise ConfigError("grid strategy needs matching 1-d value and bid arrays of length >= 2")
        v, first = np.unique(v, return_index=True)
        b = b[first]
        if np.any(b < -1e-12):
            raise ConfigError("bids must be non-negative")
        if np.any(np.diff(b) < -1e-9 * max(1.0, float(np.abs(b).max()))):
            raise NotIncreasing("grid strategy bids decrease along the value grid")
        self.values = v
        self.bids = np.maximum(np.maximum.accumulate(b), 0.0)
        self.domain_lo = float(v[0])
        self.domain_hi = float(v[-1])
        if repr_tag is not None:
            self.repr_tag = repr_tag

    def __call__(self, x: Any) -> Any:
        return _out(np.interp(np.asarray(x, dtype=float), self.values, self.bids))

    def inverse(self, b: Any) -> Any:
        b = np.asarray(b, dtype=float)
        if np.all(np.diff(self.bids) > 0):
            return _out(np.interp(b, self.bids, self.values))
        return super().inverse(b)

    def describe(self) -> dict:
        return {
            "repr": self.repr_tag,
            "grid_size": int(self.values.size),
            "lo": self.domain_lo,
            "hi": self.domain_hi,
        }


__all__ = [
    "Strategy",
    "Truthful",
    "Linear",
    "Affine",
    "GridStrategy",
    "DERIVATIVE_STEP",
]
