"""
Value Distributions Module

Parametric and empirical value laws together with the virtual-value
machinery built on them: regularity/MHR diagnostics, monopoly price and
revenue, and ironing by concavification of the revenue curve in quantile
space.
"""

import logging
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from functools import cached_property
from typing import Any, Optional, Sequence, Tuple

import numpy as np
from scipy import integrate, optimize, special, stats
from scipy.spatial import ConvexHull, QhullError

from auctionlab.core.config import settings
from auctionlab.core.exceptions import (
    AtomicDistribution,
    ConfigError,
    EmptySample,
    GridTooCoarse,
    OutOfSupport,
    Unbounded,
    ZeroDensity,
)
from auctionlab.utils.numerics import bisect_increasing, first_argmax

logger = logging.getLogger(__name__)

_SUPPORT_TOL = 1e-12


def _out(values: np.ndarray) -> Any:
    return float(values) if np.ndim(values) == 0 else values


class Distribution(ABC):
    """
    Abstract base class for value distributions.

    Subclasses provide ``cdf``, ``quantile`` and, when continuous, ``pdf``.
    All methods are vectorized over numpy arrays and return a float for
    scalar input. Instances are immutable.
    """

    family: str = "abstract"
    is_atomic: bool = False

    @property
    @abstractmethod
    def lo(self) -> float:
        """Infimum of the support."""

    @property
    @abstractmethod
    def hi(self) -> float:
        """Supremum of the support (may be ``inf``)."""

    @abstractmethod
    def cdf(self, x: Any) -> Any:
        """Right-continuous cdf ``P(X <= x)``."""

    @abstractmethod
    def quantile(self, q: Any) -> Any:
        """Generalized inverse ``inf{x : F(x) >= q}``."""

    def pdf(self, x: Any) -> Any:
        raise AtomicDistribution(f"{self.family} distribution has no density")

    def cdf_left(self, x: Any) -> Any:
        """Left limit ``P(X < x)``; equal to ``cdf`` for continuous laws."""
        return self.cdf(x)

    def acceptance(self, price: Any) -> Any:
        """``P(X >= price)``: probability that a buyer accepts ``price``."""
        return _out(1.0 - np.asarray(self.cdf_left(price), dtype=float))

    def sample(self, size: Any, rng: np.random.Generator) -> np.ndarray:
        return np.asarray(self.quantile(rng.random(size)), dtype=float)

    def mean(self) -> float:
        """Expectation computed in quantile space; ``inf`` when it diverges."""
        value, _ = integrate.quad(lambda u: float(self.quantile(u)), 0.0, 1.0, limit=200)
        return float(value)

    def cap(self) -> float:
        """Right end used for grids and quadrature."""
        if np.isfinite(self.hi):
            return float(self.hi)
        return float(self.quantile(1.0 - settings.QUANTILE_CAP))

    def inverse_hazard(self, x: Any) -> Any:
        """``(1 - F(x)) / f(x)``; ``inf`` where the density vanishes."""
        x = np.asarray(x, dtype=float)
        dens = np.asarray(self.pdf(x), dtype=float)
        tail = 1.0 - np.asarray(self.cdf(x), dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = np.where(dens > 0, tail / np.where(dens > 0, dens, 1.0), np.inf)
        return _out(ratio)

    def virtual_value(self, x: Any) -> Any:
        """
        Virtual value ``x - (1 - F(x)) / f(x)``.

        Raises:
            AtomicDistribution: If the law has atoms.
            OutOfSupport: If ``x`` lies outside the support.
            ZeroDensity: If the density vanishes at ``x``.
        """
        if self.is_atomic:
            raise AtomicDistribution(
                f"Pointwise virtual value is undefined for the atomic {self.family} law; use iron()"
            )
        x = np.asarray(x, dtype=float)
        if np.any((x < self.lo - _SUPPORT_TOL) | (x > self.hi + _SUPPORT_TOL)):
            raise OutOfSupport(f"Value outside support [{self.lo}, {self.hi}]")
        ih = np.asarray(self.inverse_hazard(x), dtype=float)
        if not np.all(np.isfinite(ih)):
            raise ZeroDensity(f"Density of {self.family} vanishes at the requested value")
        return _out(x - ih)

    def describe(self) -> dict:
        return {"family": self.family, "lo": self.lo, "hi": self.hi}


# Continuous families


@dataclass(frozen=True)
class Uniform(Distribution):
    a: float = 0.0
    b: float = 1.0
    family: str = field(default="uniform", init=False)

    def __post_init__(self) -> None:
        if not (0.0 <= self.a < self.b):
            raise ConfigError(f"uniform requires 0 <= a < b, got a={self.a}, b={self.b}")

    @property
    def lo(self) -> float:
        return self.a

    @property
    def hi(self) -> float:
        return self.b

    def cdf(self, x: Any) -> Any:
        x = np.asarray(x, dtype=float)
        return _out(np.clip((x - self.a) / (self.b - self.a), 0.0, 1.0))

    def pdf(self, x: Any) -> Any:
        x = np.asarray(x, dtype=float)
        inside = (x >= self.a) & (x <= self.b)
        return _out(np.where(inside, 1.0 / (self.b - self.a), 0.0))

    def quantile(self, q: Any) -> Any:
        q = np.asarray(q, dtype=float)
        return _out(self.a + q * (self.b - self.a))

    def inverse_hazard(self, x: Any) -> Any:
        return _out(self.b - np.asarray(x, dtype=float))

    def mean(self) -> float:
        return 0.5 * (self.a + self.b)


@dataclass(frozen=True)
class Exponential(Distribution):
    """Exponential law in scale form: ``F(x) = 1 - exp(-x / scale)``."""

    scale: float = 1.0
    family: str = field(default="exponential", init=False)

    def __post_init__(self) -> None:
        if self.scale <= 0:
            raise ConfigError("exponential scale must be positive")

    @property
    def lo(self) -> float:
        return 0.0

    @property
    def hi(self) -> float:
        return np.inf

    def cdf(self, x: Any) -> Any:
        x = np.maximum(np.asarray(x, dtype=float), 0.0)
        return _out(-np.expm1(-x / self.scale))

    def pdf(self, x: Any) -> Any:
        x = np.asarray(x, dtype=float)
        return _out(np.where(x >= 0, np.exp(-np.maximum(x, 0.0) / self.scale) / self.scale, 0.0))

    def quantile(self, q: Any) -> Any:
        q = np.asarray(q, dtype=float)
        with np.errstate(divide="ignore"):
            return _out(-self.scale * np.log1p(-q))

    def inverse_hazard(self, x: Any) -> Any:
        return _out(np.full(np.shape(x), self.scale, dtype=float))

    def mean(self) -> float:
        return self.scale


class _ScipyBacked(Distribution):
    """Continuous family delegating to a frozen ``scipy.stats`` law."""

    @cached_property
    def _law(self) -> Any:
        raise NotImplementedError

    def cdf(self, x: Any) -> Any:
        return _out(self._law.cdf(np.asarray(x, dtype=float)))

    def pdf(self, x: Any) -> Any:
        return _out(self._law.pdf(np.asarray(x, dtype=float)))

    def quantile(self, q: Any) -> Any:
        return _out(self._law.ppf(np.asarray(q, dtype=float)))

    def inverse_hazard(self, x: Any) -> Any:
        x = np.asarray(x, dtype=float)
        dens = self._law.pdf(x)
        with np.errstate(divide="ignore", invalid="ignore"):
            return _out(np.where(dens > 0, self._law.sf(x) / np.where(dens > 0, dens, 1.0), np.inf))

    def mean(self) -> float:
        return float(self._law.mean())


@dataclass(frozen=True)
class LogNormal(_ScipyBacked):
    """Log-normal law: ``log X ~ N(mu, sigma^2)``."""

    mu: float = 0.0
    sigma: float = 1.0
    family: str = field(default="lognormal", init=False)

    def __post_init__(self) -> None:
        if self.sigma <= 0:
            raise ConfigError("lognormal sigma must be positive")

    @cached_property
    def _law(self) -> Any:
        return stats.lognorm(s=self.sigma, scale=np.exp(self.mu))

    @property
    def lo(self) -> float:
        return 0.0

    @property
    def hi(self) -> float:
        return np.inf


@dataclass(frozen=True)
class GeneralizedPareto(_ScipyBacked):
    """
    Generalized Pareto law with location ``mu``, shape ``xi < 1`` and scale ``sigma``.

    Its virtual value is affine: ``(1 - xi) x + xi mu - sigma``. Shapes in
    ``(0, 1)`` are accepted and flagged through ``extended_range``.
    """

    mu: float = 0.0
    xi: float = 0.0
    sigma: float = 1.0
    family: str = field(default="gpd", init=False)

    def __post_init__(self) -> None:
        if self.sigma <= 0:
            raise ConfigError("gpd sigma must be positive")
        if self.xi >= 1:
            raise ConfigError("gpd requires xi < 1 (finite mean)")
        if self.mu < 0:
            raise ConfigError("gpd location must be non-negative")
        if self.extended_range:
            logger.info("GPD shape in extended range", extra={"xi": self.xi})

    @property
    def extended_range(self) -> bool:
        return 0.0 < self.xi < 1.0

    @cached_property
    def _law(self) -> Any:
        return stats.genpareto(c=self.xi, loc=self.mu, scale=self.sigma)

    @property
    def lo(self) -> float:
        return self.mu

    @property
    def hi(self) -> float:
        return self.mu - self.sigma / self.xi if self.xi < 0 else np.inf

    def inverse_hazard(self, x: Any) -> Any:
        x = np.asarray(x, dtype=float)
        return _out(self.sigma + self.xi * (x - self.mu))

    def mean(self) -> float:
        return self.mu + self.sigma / (1.0 - self.xi)


@dataclass(frozen=True)
class Kumaraswamy(Distribution):
    """Kumaraswamy law on [0, 1]: ``F(x) = 1 - (1 - x^a)^b``."""

    a: float = 1.0
    b: float = 1.0
    family: str = field(default="kumaraswamy", init=False)

    def __post_init__(self) -> None:
        if self.a <= 0 or self.b <= 0:
            raise ConfigError("kumaraswamy parameters must be positive")

    @property
    def lo(self) -> float:
        return 0.0

    @property
    def hi(self) -> float:
        return 1.0

    def cdf(self, x: Any) -> Any:
        x = np.clip(np.asarray(x, dtype=float), 0.0, 1.0)
        return _out(1.0 - (1.0 - x**self.a) ** self.b)

    def pdf(self, x: Any) -> Any:
        x = np.asarray(x, dtype=float)
        inside = (x > 0) & (x < 1)
        xc = np.clip(x, 1e-300, 1.0)
        with np.errstate(divide="ignore", invalid="ignore"):
            dens = self.a * self.b * xc ** (self.a - 1) * (1.0 - xc**self.a) ** (self.b - 1)
        return _out(np.where(inside, dens, 0.0))

    def quantile(self, q: Any) -> Any:
        q = np.asarray(q, dtype=float)
        return _out((1.0 - (1.0 - q) ** (1.0 / self.b)) ** (1.0 / self.a))

    def inverse_hazard(self, x: Any) -> Any:
        x = np.asarray(x, dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            ih = (1.0 - x**self.a) / (self.a * self.b * x ** (self.a - 1))
        return _out(np.where(np.isfinite(ih), ih, np.inf))

    def mean(self) -> float:
        return float(self.b * special.beta(1.0 + 1.0 / self.a, self.b))


@dataclass(frozen=True)
class Pareto(Distribution):
    """Pareto law ``F(x) = 1 - (xm / x)^alpha`` for ``x >= xm``."""

    alpha: float = 1.0
    xm: float = 1.0
    family: str = field(default="pareto", init=False)

    def __post_init__(self) -> None:
        if self.alpha <= 0 or self.xm <= 0:
            raise ConfigError("pareto parameters must be positive")

    @property
    def lo(self) -> float:
        return self.xm

    @property
    def hi(self) -> float:
        return np.inf

    def cdf(self, x: Any) -> Any:
        x = np.maximum(np.asarray(x, dtype=float), self.xm)
        return _out(1.0 - (self.xm / x) ** self.alpha)

    def pdf(self, x: Any) -> Any:
        x = np.asarray(x, dtype=float)
        xc = np.maximum(x, self.xm)
        return _out(np.where(x >= self.xm, self.alpha * self.xm**self.alpha / xc ** (self.alpha + 1), 0.0))

    def quantile(self, q: Any) -> Any:
        q = np.asarray(q, dtype=float)
        with np.errstate(divide="ignore"):
            return _out(self.xm * (1.0 - q) ** (-1.0 / self.alpha))

    def inverse_hazard(self, x: Any) -> Any:
        return _out(np.asarray(x, dtype=float) / self.alpha)

    def mean(self) -> float:
        return self.alpha * self.xm / (self.alpha - 1.0) if self.alpha > 1 else np.inf


@dataclass(frozen=True)
class HeavyTail(Distribution):
    """
    Regular law with infinite mean on which the empirical monopoly price fails.

    ``F(x) = 1 - 1/x`` on [1, 2) and ``1 - 1/(2(x - 1))`` for ``x >= 2``;
    the revenue curve equals 1 on [1, 2] and decays beyond.
    """

    family: str = field(default="heavy-tail", init=False)

    @property
    def lo(self) -> float:
        return 1.0

    @property
    def hi(self) -> float:
        return np.inf

    def cdf(self, x: Any) -> Any:
        x = np.maximum(np.asarray(x, dtype=float), 1.0)
        return _out(np.where(x < 2.0, 1.0 - 1.0 / x, 1.0 - 0.5 / (x - 1.0 + (x < 2.0))))

    def pdf(self, x: Any) -> Any:
        x = np.asarray(x, dtype=float)
        xc = np.maximum(x, 1.0)
        dens = np.where(xc < 2.0, 1.0 / xc**2, 0.5 / np.maximum(xc - 1.0, 1.0) ** 2)
        return _out(np.where(x >= 1.0, dens, 0.0))

    def quantile(self, q: Any) -> Any:
        q = np.asarray(q, dtype=float)
        with np.errstate(divide="ignore"):
            low = 1.0 / (1.0 - np.minimum(q, 0.5))
            high = 1.0 + 0.5 / (1.0 - q)
        return _out(np.where(q < 0.5, low, high))

    def inverse_hazard(self, x: Any) -> Any:
        x = np.asarray(x, dtype=float)
        return _out(np.where(x < 2.0, x, x - 1.0))

    def mean(self) -> float:
        return np.inf


@dataclass(frozen=True)
class Truncated(Distribution):
    """A continuous law conditioned on ``[lower, upper]``."""

    base: Distribution
    lower: float
    upper: float
    family: str = field(default="truncated", init=False)

    def __post_init__(self) -> None:
        if self.base.is_atomic:
            raise ConfigError("truncation requires a continuous base law")
        if not (self.lower < self.upper):
            raise ConfigError("truncation requires lower < upper")
        if self._mass <= 0:
            raise ConfigError("truncation window carries no probability mass")

    @cached_property
    def _f_lo(self) -> float:
        return float(self.base.cdf(self.lower))

    @cached_property
    def _mass(self) -> float:
        return float(self.base.cdf(self.upper)) - float(self.base.cdf(self.lower))

    @property
    def lo(self) -> float:
        return max(self.lower, self.base.lo)

    @property
    def hi(self) -> float:
        return min(self.upper, self.base.hi)

    def cdf(self, x: Any) -> Any:
        x = np.clip(np.asarray(x, dtype=float), self.lo, self.hi)
        return _out(np.clip((np.asarray(self.base.cdf(x)) - self._f_lo) / self._mass, 0.0, 1.0))

    def pdf(self, x: Any) -> Any:
        x = np.asarray(x, dtype=float)
        inside = (x >= self.lo) & (x <= self.hi)
        return _out(np.where(inside, np.asarray(self.base.pdf(x)) / self._mass, 0.0))

    def quantile(self, q: Any) -> Any:
        q = np.asarray(q, dtype=float)
        return _out(np.clip(self.base.quantile(self._f_lo + q * self._mass), self.lo, self.hi))

    def inverse_hazard(self, x: Any) -> Any:
        x = np.asarray(x, dtype=float)
        dens = np.asarray(self.base.pdf(x), dtype=float)
        tail = float(self.base.cdf(self.hi)) - np.asarray(self.base.cdf(x), dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            return _out(np.where(dens > 0, tail / np.where(dens > 0, dens, 1.0), np.inf))


@dataclass(frozen=True)
class Mixture(Distribution):
    components: Tuple[Distribution, ...]
    weights: Tuple[float, ...]
    family: str = field(default="mixture", init=False)

    def __post_init__(self) -> None:
        if len(self.components) == 0 or len(self.components) != len(self.weights):
            raise ConfigError("mixture needs one weight per component")
        w = np.asarray(self.weights, dtype=float)
        if np.any(w < 0) or abs(w.sum() - 1.0) > 1e-9:
            raise ConfigError("mixture weights must be non-negative and sum to 1")
        object.__setattr__(self, "is_atomic", any(c.is_atomic for c in self.components))

    @property
    def lo(self) -> float:
        return min(c.lo for c in self.components)

    @property
    def hi(self) -> float:
        return max(c.hi for c in self.components)

    def cdf(self, x: Any) -> Any:
        x = np.asarray(x, dtype=float)
        return _out(sum(w * np.asarray(c.cdf(x)) for c, w in zip(self.components, self.weights)))

    def cdf_left(self, x: Any) -> Any:
        x = np.asarray(x, dtype=float)
        return _out(sum(w * np.asarray(c.cdf_left(x)) for c, w in zip(self.components, self.weights)))

    def pdf(self, x: Any) -> Any:
        if self.is_atomic:
            return super().pdf(x)
        x = np.asarray(x, dtype=float)
        return _out(sum(w * np.asarray(c.pdf(x)) for c, w in zip(self.components, self.weights)))

    def quantile(self, q: Any) -> Any:
        q = np.asarray(q, dtype=float)
        flat = np.atleast_1d(q).ravel()
        hi = max(c.cap() for c in self.components)
        result = bisect_increasing(
            lambda x: np.asarray(self.cdf(x)), flat, self.lo, hi, tol=1e-13
        )
        if not np.isfinite(self.hi):
            result = np.where(flat >= 1.0, np.inf, result)
        return _out(result.reshape(q.shape))

    def sample(self, size: Any, rng: np.random.Generator) -> np.ndarray:
        n = int(np.prod(size))
        labels = rng.choice(len(self.components), size=n, p=np.asarray(self.weights))
        out = np.empty(n)
        for k, comp in enumerate(self.components):
            idx = np.flatnonzero(labels == k)
            if idx.size:
                out[idx] = comp.sample(idx.size, rng)
        return out.reshape(size)

    def mean(self) -> float:
        return float(sum(w * c.mean() for c, w in zip(self.components, self.weights)))


# Atomic families


class Discrete(Distribution):
    """
    Finitely supported law given by atoms and probabilities.

    The cdf is a right-continuous step function and the quantile picks the
    smallest atom whose cumulative probability reaches ``q``.
    """

    family = "discrete"
    is_atomic = True

    def __init__(self, atoms: Sequence[float], probs: Sequence[float]):
        atoms_arr = np.asarray(atoms, dtype=float)
        probs_arr = np.asarray(probs, dtype=float)
        if atoms_arr.size == 0 or atoms_arr.shape != probs_arr.shape:
            raise ConfigError("discrete law needs matching non-empty atoms and probabilities")
        if np.any(atoms_arr < 0) or np.any(probs_arr < 0):
            raise ConfigError("atoms and probabilities must be non-negative")
        if abs(probs_arr.sum() - 1.0) > 1e-9:
            raise ConfigError("discrete probabilities must sum to 1")
        uniq, inverse = np.unique(atoms_arr, return_inverse=True)
        merged = np.bincount(inverse, weights=probs_arr)
        self._atoms = uniq
        self._probs = merged / merged.sum()
        cum = np.cumsum(self._probs)
        cum[-1] = 1.0
        self._cum = cum

    @property
    def atoms(self) -> np.ndarray:
        return self._atoms.copy()

    @property
    def probs(self) -> np.ndarray:
        return self._probs.copy()

    @property
    def lo(self) -> float:
        return float(self._atoms[0])

    @property
    def hi(self) -> float:
        return float(self._atoms[-1])

    def cdf(self, x: Any) -> Any:
        idx = np.searchsorted(self._atoms, np.asarray(x, dtype=float), side="right")
        return _out(np.where(idx > 0, self._cum[np.maximum(idx - 1, 0)], 0.0))

    def cdf_left(self, x: Any) -> Any:
        idx = np.searchsorted(self._atoms, np.asarray(x, dtype=float), side="left")
        return _out(np.where(idx > 0, self._cum[np.maximum(idx - 1, 0)], 0.0))

    def quantile(self, q: Any) -> Any:
        q = np.asarray(q, dtype=float)
        idx = np.searchsorted(self._cum, q - 1e-15, side="left")
        return _out(self._atoms[np.clip(idx, 0, self._atoms.size - 1)])

    def inverse_hazard(self, x: Any) -> Any:
        raise AtomicDistribution("inverse hazard is undefined for atomic laws")

    def mean(self) -> float:
        return float(np.dot(self._atoms, self._probs))

    def __repr__(self) -> str:
        return f"{self.__class__.__name__}(atoms={self._atoms.tolist()}, probs={self._probs.tolist()})"


class PointMass(Discrete):
    family = "point"

    def __init__(self, value: float):
        super().__init__([value], [1.0])

    @property
    def value(self) -> float:
        return float(self._atoms[0])


class EmpiricalDistribution(Discrete):
    """Empirical law of a sample: each observation carries mass ``1/T``."""

    family = "empirical"

    def __init__(self, samples: Sequence[float]):
        arr = np.asarray(samples, dtype=float).ravel()
        if arr.size == 0:
            raise EmptySample("empirical distribution needs at least one sample")
        super().__init__(arr, np.full(arr.size, 1.0 / arr.size))
        self._n = arr.size

    @property
    def size(self) -> int:
        return self._n


class PushforwardDistribution(Distribution):
    """
    Law of ``beta(X)`` for ``X ~ base`` and an increasing strategy ``beta``.

    The strategy must expose ``__call__``, ``derivative`` and ``inverse``.
    """

    family = "pushforward"

    def __init__(self, base: Distribution, strategy: Any):
        if base.is_atomic:
            raise ConfigError("pushforward bid laws require a continuous value law")
        self.base = base
        self.strategy = strategy

    @property
    def lo(self) -> float:
        return float(self.strategy(self.base.lo))

    @property
    def hi(self) -> float:
        if not np.isfinite(self.base.hi):
            return np.inf
        return float(self.strategy(self.base.hi))

    def cdf(self, b: Any) -> Any:
        b = np.asarray(b, dtype=float)
        x = np.asarray(self.strategy.inverse(b), dtype=float)
        out = np.asarray(self.base.cdf(x), dtype=float)
        out = np.where(b < self.lo, 0.0, out)
        return _out(np.where(b >= self.hi, 1.0, out))

    def quantile(self, q: Any) -> Any:
        return _out(np.asarray(self.strategy(self.base.quantile(q)), dtype=float))

    def pdf(self, b: Any) -> Any:
        x = np.asarray(self.strategy.inverse(np.asarray(b, dtype=float)), dtype=float)
        slope = np.asarray(self.strategy.derivative(x), dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            return _out(np.where(slope > 0, np.asarray(self.base.pdf(x)) / slope, 0.0))

    def inverse_hazard(self, b: Any) -> Any:
        x = np.asarray(self.strategy.inverse(np.asarray(b, dtype=float)), dtype=float)
        slope = np.asarray(self.strategy.derivative(x), dtype=float)
        return _out(np.asarray(self.base.inverse_hazard(x), dtype=float) * slope)

    def sample(self, size: Any, rng: np.random.Generator) -> np.ndarray:
        return np.asarray(self.strategy(self.base.sample(size, rng)), dtype=float)


# Virtual values, monopoly prices and ironing


@dataclass(frozen=True)
class VirtualValueTable:
    """
    Tabulated (ironed) virtual values on a quantile grid.

    Attributes:
        grid: Values ``F^{-1}(q_k)``, sorted ascending.
        psi: Virtual value at each grid point.
        psi_ironed: Ironed virtual value at each grid point (non-decreasing).
        regular: True when no ironing was needed.
        mhr: Monotone hazard rate flag.
        quantiles: The quantile grid ``q_k``.
        profit: Revenue curve ``(1 - q_k) F^{-1}(q_k)``.
        envelope: Upper concave envelope of ``profit``.
    """

    grid: np.ndarray
    psi: np.ndarray
    psi_ironed: np.ndarray
    regular: bool
    mhr: bool
    quantiles: np.ndarray
    profit: np.ndarray
    envelope: np.ndarray

    def ironed_at(self, x: Any) -> Any:
        """Interpolate the ironed virtual value at ``x`` (clamped to the grid)."""
        return _out(np.interp(np.asarray(x, dtype=float), self.grid, self.psi_ironed))

    def ironed_intervals(self, tol: float = 1e-9) -> list:
        """Value intervals ``[a, b]`` on which the envelope lies strictly above the profit."""
        scale = max(1.0, float(np.max(np.abs(self.profit))))
        flat = (self.envelope - self.profit) > tol * scale
        intervals = []
        k = 0
        while k < flat.size:
            if flat[k]:
                start = k
                while k < flat.size and flat[k]:
                    k += 1
                intervals.append((float(self.grid[max(start - 1, 0)]), float(self.grid[min(k, flat.size - 1)])))
            k += 1
        return intervals


def virtual_value(d: Distribution, x: Any) -> Any:
    """
    Virtual value ``psi(x) = x - (1 - F(x)) / f(x)``.

    Args:
        d: A continuous distribution.
        x: Value(s) in the support.

    Returns:
        The virtual value(s); may be negative.

    Raises:
        ZeroDensity: If ``f(x) = 0`` and no closed form applies.
        OutOfSupport: If ``x`` lies outside the support.
        AtomicDistribution: If ``d`` has atoms.
    """
    return d.virtual_value(x)


def monopoly_revenue(d: Distribution, r: Any) -> Any:
    """Posted-price revenue ``r * P(X >= r)``; equals ``r (1 - F(r))`` for continuous laws."""
    r = np.asarray(r, dtype=float)
    return _out(r * np.asarray(d.acceptance(r), dtype=float))


def _argmax_profit(d: Distribution, grid_size: Optional[int] = None) -> float:
    """Smallest maximizer of the revenue curve, without the finite-mean check."""
    if d.is_atomic:
        atoms = np.asarray(d.atoms if hasattr(d, "atoms") else d.quantile(np.linspace(0, 1, 1025)))
        atoms = np.unique(atoms)
        return float(atoms[first_argmax(np.asarray(monopoly_revenue(d, atoms)))])

    g = grid_size or settings.PROFIT_GRID
    q = np.linspace(0.0, 1.0, g)
    if not np.isfinite(d.hi):
        q[-1] = 1.0 - settings.QUANTILE_CAP
    x = np.asarray(d.quantile(q), dtype=float)
    profit = x * (1.0 - q)
    k = first_argmax(profit)

    def neg_profit(u: float) -> float:
        return -float(d.quantile(u)) * (1.0 - u)

    left, right = q[max(k - 1, 0)], q[min(k + 1, g - 1)]
    if right > left:
        res = optimize.minimize_scalar(neg_profit, bounds=(left, right), method="bounded",
                                       options={"xatol": 1e-12})
        if res.success and -res.fun > profit[k] * (1.0 + 1e-12) + 1e-15:
            return float(d.quantile(res.x))
    return float(x[k])


def monopoly_price(
    d: Distribution, grid_size: Optional[int] = None, require_finite_mean: bool = True
) -> float:
    """
    Monopoly price: the smallest maximizer of ``r (1 - F(r))``.

    Continuous laws are searched on a uniform quantile grid (10^5 points by
    default) and refined locally; atomic laws are searched over their atoms.

    Laws with an infinite mean can still have a bounded revenue curve; pass
    ``require_finite_mean=False`` to search them anyway.

    Raises:
        Unbounded: If the expectation of ``d`` is infinite.
    """
    if require_finite_mean and not np.isfinite(d.mean()):
        raise Unbounded(f"{d.family} law has infinite expectation; monopoly price undefined")
    return _argmax_profit(d, grid_size)


def _upper_envelope(q: np.ndarray, p: np.ndarray) -> np.ndarray:
    """Upper concave envelope of the points ``(q_k, p_k)`` evaluated on ``q``."""
    points = np.column_stack([q, p])
    try:
        hull = ConvexHull(points)
        vertices = points[np.unique(hull.vertices)]
    except QhullError:
        # Collinear points: the envelope is the chord itself.
        vertices = points[[0, -1]]
    vertices = vertices[np.lexsort((-vertices[:, 1], vertices[:, 0]))]
    q0, p0 = points[0]
    q1, p1 = points[-1]
    chord = p0 + (vertices[:, 0] - q0) * (p1 - p0) / (q1 - q0)
    upper = vertices[vertices[:, 1] >= chord - 1e-12 * max(1.0, np.abs(p).max())]
    _, first = np.unique(upper[:, 0], return_index=True)
    upper = upper[first]
    env = np.interp(q, upper[:, 0], upper[:, 1])
    return np.maximum(env, p)


def _atomic_table(d: Discrete) -> VirtualValueTable:
    atoms = d.atoms
    q = np.append(np.asarray(d.cdf_left(atoms), dtype=float), 1.0)
    profit = np.append(atoms * (1.0 - q[:-1]), 0.0)
    psi = -np.diff(profit) / np.diff(q)
    env = _upper_envelope(q, profit)
    psi_ironed = np.maximum.accumulate(-np.diff(env) / np.diff(q))
    regular = bool(np.all(np.diff(psi) >= -1e-9))
    return VirtualValueTable(
        grid=atoms,
        psi=psi,
        psi_ironed=psi_ironed,
        regular=regular,
        mhr=False,
        quantiles=q[:-1],
        profit=profit[:-1],
        envelope=env[:-1],
    )


def iron(d: Distribution, grid_size: Optional[int] = None) -> VirtualValueTable:
    """
    Iron the virtual value of ``d`` by concavifying its revenue curve.

    Builds ``(q_k, (1 - q_k) F^{-1}(q_k))`` on a uniform quantile grid,
    takes the upper concave envelope and returns the negated envelope slope
    as the ironed virtual value. On flattened intervals the ironed value is
    the average of ``psi`` over the interval.

    Args:
        d: Value distribution.
        grid_size: Number of quantile points (at least 16).

    Returns:
        The VirtualValueTable.

    Raises:
        GridTooCoarse: If ``grid_size < 16``.
    """
    g = settings.IRONING_GRID if grid_size is None else int(grid_size)
    if g < 16:
        raise GridTooCoarse(f"ironing grid needs at least 16 points, got {g}")
    if d.is_atomic:
        return _atomic_table(d)

    q = np.linspace(0.0, 1.0, g)
    if not np.isfinite(d.hi):
        q[-1] = 1.0 - settings.QUANTILE_CAP
    x = np.asarray(d.quantile(q), dtype=float)
    profit = (1.0 - q) * x

    numeric_psi = -np.gradient(profit, q, edge_order=2)
    with np.errstate(all="ignore"):
        try:
            analytic = x - np.asarray(d.inverse_hazard(x), dtype=float)
        except AtomicDistribution:
            analytic = numeric_psi
    psi = np.where(np.isfinite(analytic), analytic, numeric_psi)

    env = _upper_envelope(q, profit)
    scale = max(1.0, float(np.abs(profit).max()))
    touching = (env - profit) <= 1e-9 * scale
    chord_slope = -np.gradient(env, q)
    psi_ironed = np.maximum.accumulate(np.where(touching, psi, chord_slope))

    # Flat segments carry the exact chord value between their touching endpoints.
    flat_idx = np.flatnonzero(~touching)
    if flat_idx.size:
        breaks = np.flatnonzero(np.diff(flat_idx) > 1)
        starts = np.r_[flat_idx[0], flat_idx[breaks + 1]]
        ends = np.r_[flat_idx[breaks], flat_idx[-1]]
        for s, e in zip(starts, ends):
            a, b = max(s - 1, 0), min(e + 1, g - 1)
            slope = -(profit[b] - profit[a]) / (q[b] - q[a])
            psi_ironed[s : e + 1] = slope
        psi_ironed = np.maximum.accumulate(psi_ironed)

    regular, mhr = regularity_report(d, g)
    logger.debug(
        "Ironed virtual value table built",
        extra={"family": d.family, "grid_size": g, "flat_points": int(flat_idx.size)},
    )
    return VirtualValueTable(
        grid=x,
        psi=psi,
        psi_ironed=psi_ironed,
        regular=regular,
        mhr=mhr,
        quantiles=q,
        profit=profit,
        envelope=env,
    )


def regularity_report(d: Distribution, grid_size: Optional[int] = None) -> Tuple[bool, bool]:
    """
    Check regularity (``psi`` non-decreasing) and MHR (hazard rate non-decreasing).

    Both are evaluated on the interior quantile grid ``(k + 1/2) / G``.
    """
    g = settings.IRONING_GRID if grid_size is None else int(grid_size)
    if g < 16:
        raise GridTooCoarse(f"regularity grid needs at least 16 points, got {g}")
    if d.is_atomic:
        table = _atomic_table(d)
        return table.regular, False

    q = (np.arange(g) + 0.5) / g
    x = np.asarray(d.quantile(q), dtype=float)
    with np.errstate(all="ignore"):
        ih = np.asarray(d.inverse_hazard(x), dtype=float)
    finite = np.isfinite(ih)
    x, ih = x[finite], ih[finite]
    psi = x - ih
    tol_psi = 1e-9 * max(1.0, float(np.abs(psi).max()) if psi.size else 1.0)
    regular = bool(np.all(np.diff(psi) >= -tol_psi))
    tol_h = 1e-9 * max(1.0, float(np.abs(ih).max()) if ih.size else 1.0)
    mhr = bool(np.all(np.diff(ih) <= tol_h))
    return regular, mhr


def profit_curve(d: Distribution, points: int = 256) -> Tuple[np.ndarray, np.ndarray]:
    """Revenue curve ``(r, r P(X >= r))`` on a value grid over ``[0, cap]``."""
    r = np.linspace(0.0, d.cap(), points)
    return r, np.asarray(monopoly_revenue(d, r), dtype=float)


__all__ = [
    "Distribution",
    "Uniform",
    "Exponential",
    "LogNormal",
    "GeneralizedPareto",
    "Kumaraswamy",
    "Pareto",
    "HeavyTail",
    "Truncated",
    "Mixture",
    "Discrete",
    "PointMass",
    "EmpiricalDistribution",
    "PushforwardDistribution",
    "VirtualValueTable",
    "virtual_value",
    "monopoly_price",
    "monopoly_revenue",
    "iron",
    "regularity_report",
    "profit_curve",
]
