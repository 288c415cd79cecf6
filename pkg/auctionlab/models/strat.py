"""
Strategic Shading Module

Bid shading against a seller who learns reserves from the bid law. The
key object is ``h_beta``, the virtual value of the pushforward bid law
expressed at the bidder's value: the seller's reserve and the bidder's
payment depend on the strategy only through it.
"""

import logging
from dataclasses import dataclass
from typing import Any, Callable, Optional

import numpy as np
from scipy import integrate, optimize

from auctionlab.core.config import settings
from auctionlab.core.exceptions import (
    AtomicDistribution,
    ConfigError,
    NoRoot,
    NonMonotone,
    ZeroDensity,
)
from auctionlab.core.rng import stream
from auctionlab.models.dist import (
    Distribution,
    PushforwardDistribution,
    monopoly_price,
)
from auctionlab.models.equil import fp_symmetric_equilibrium
from auctionlab.models.strategy import GridStrategy, Linear, Strategy, Truthful
from auctionlab.utils.numerics import mean_and_stderr

logger = logging.getLogger(__name__)

BETA_FROM_G_QMAX = 0.99
SHADED_QMAX = 1.0 - 1e-6


def h_of_beta(beta: Strategy, F: Distribution, x: Any) -> Any:
    """
    ``h_beta(x) = beta(x) - beta'(x) (1 - F(x)) / f(x)``.

    Raises:
        ZeroDensity: If ``f(x) = 0``.
        NonMonotone: If ``beta'(x) <= 0``.
    """
    x_arr = np.asarray(x, dtype=float)
    slope = np.asarray(beta.derivative(x_arr), dtype=float)
    if np.any(slope <= 0):
        raise NonMonotone("strategy is not strictly increasing at the requested value")
    ih = np.asarray(F.inverse_hazard(x_arr), dtype=float)
    if not np.all(np.isfinite(ih)):
        raise ZeroDensity(f"density of {F.family} vanishes at the requested value")
    out = np.asarray(beta(x_arr), dtype=float) - slope * ih
    return float(out) if out.ndim == 0 else out


class Thresholded(Strategy):
    """
    ``beta(r) (1 - F(r)) / (1 - F(x))`` below the threshold ``r``, ``base`` above.

    Below ``r`` the pushforward virtual value is zero, so a seller setting the
    monopoly price of the bid law excludes no one.
    """

    repr_tag = "thresholded"

    def __init__(self, F: Distribution, base: Strategy, r: float):
        if F.is_atomic:
            raise AtomicDistribution("thresholded strategies need a continuous value law")
        self.F = F
        self.base = base
        self.r = float(max(r, F.lo))
        self.domain_lo = float(F.lo)
        self.C = float(base(self.r)) * (1.0 - float(F.cdf(self.r)))

    def __call__(self, x: Any) -> Any:
        x = np.asarray(x, dtype=float)
        with np.errstate(divide="ignore"):
            below = self.C / (1.0 - np.asarray(self.F.cdf(x), dtype=float))
        out = np.where(x < self.r, below, np.asarray(self.base(x), dtype=float))
        return float(out) if out.ndim == 0 else out

    def derivative(self, x: Any) -> Any:
        x = np.asarray(x, dtype=float)
        tail = 1.0 - np.asarray(self.F.cdf(x), dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            below = self.C * np.asarray(self.F.pdf(x), dtype=float) / tail**2
        out = np.where(x < self.r, below, np.asarray(self.base.derivative(x), dtype=float))
        return float(out) if out.ndim == 0 else out

    def inverse(self, b: Any) -> Any:
        b = np.asarray(b, dtype=float)
        at_r = float(self.base(self.r))
        with np.errstate(divide="ignore", invalid="ignore"):
            q = np.clip(1.0 - self.C / np.where(b > 0, b, np.inf), 0.0, 1.0)
        below = np.asarray(self.F.quantile(q), dtype=float)
        above = np.asarray(self.base.inverse(np.maximum(b, at_r)), dtype=float)
        out = np.where(b < at_r, np.maximum(below, self.domain_lo), above)
        return float(out) if out.ndim == 0 else out

    def describe(self) -> dict:
        return {"repr": self.repr_tag, "r": self.r, "base": self.base.describe()}


@dataclass(frozen=True)
class ShadedStrategy:
    """
    A strategy with its ``h_beta`` table and reserve value.

    Attributes:
        strategy: The bid function.
        F: Value law.
        grid: Value grid (quantiles of ``F``).
        h: ``h_beta`` on the grid.
        reserve_value: Smallest value not excluded by a seller posting the
            monopoly price of the bid law.
    """

    strategy: Strategy
    F: Distribution
    grid: np.ndarray
    h: np.ndarray
    reserve_value: float

    @classmethod
    def build(
        cls, strategy: Strategy, F: Distribution, grid_size: Optional[int] = None
    ) -> "ShadedStrategy":
        g = grid_size or settings.STRATEGY_GRID
        grid = np.asarray(F.quantile(np.linspace(0.0, SHADED_QMAX, g)), dtype=float)
        with np.errstate(all="ignore"):
            h = np.asarray(h_of_beta(strategy, F, grid), dtype=float)
        scale = max(1.0, float(np.abs(h).max()))
        negative = np.flatnonzero(h < -1e-9 * scale)
        if negative.size == 0:
            reserve = float(grid[0])
        else:
            reserve = float(grid[min(negative[-1] + 1, grid.size - 1)])
        return cls(strategy=strategy, F=F, grid=grid, h=h, reserve_value=reserve)

    def __call__(self, x: Any) -> Any:
        return self.strategy(x)

    def h_at(self, x: Any) -> np.ndarray:
        return np.interp(np.asarray(x, dtype=float), self.grid, self.h)

    @property
    def reserve_bid(self) -> float:
        return float(self.strategy(self.reserve_value))

    def describe(self) -> dict:
        return {**self.strategy.describe(), "reserve_value": self.reserve_value}


def beta_from_g(
    g: Callable[[np.ndarray], np.ndarray],
    F: Distribution,
    x0: float,
    C: float,
    q_max: float = BETA_FROM_G_QMAX,
    grid_size: Optional[int] = None,
) -> GridStrategy:
    """
    Strategy whose ``h_beta`` equals ``g`` from ``x0`` on, with ``beta(x0) = C``.

    ``beta(x) = [C (1 - F(x0)) - int_{x0}^x g f] / (1 - F(x))``, tabulated on
    a quantile grid up to ``q_max`` with the integral taken in quantile space.

    Raises:
        NotIncreasing: If the tabulated strategy decreases.
    """
    if F.is_atomic:
        raise AtomicDistribution("beta_from_g needs a continuous value law")
    q0 = float(F.cdf(x0))
    if not q0 < q_max < 1.0:
        raise ConfigError("q_max must lie strictly between F(x0) and 1")
    size = grid_size or settings.STRATEGY_GRID
    q = np.linspace(q0, q_max, size)
    x = np.asarray(F.quantile(q), dtype=float)
    x[0] = x0
    integral = integrate.cumulative_trapezoid(np.asarray(g(x), dtype=float), q, initial=0.0)
    beta = (C * (1.0 - q0) - integral) / (1.0 - q)
    return GridStrategy(x, beta, repr_tag="custom-grid")


def thresholded_strategy(F: Distribution, base: Strategy, r: float) -> ShadedStrategy:
    return ShadedStrategy.build(Thresholded(F, base, r), F)


def bid_law(F: Distribution, beta: Strategy) -> PushforwardDistribution:
    """Law of ``beta(X)`` for ``X ~ F``."""
    inner = beta.strategy if isinstance(beta, ShadedStrategy) else beta
    return PushforwardDistribution(F, inner)


def seller_reserve_against(s: ShadedStrategy) -> float:
    """Monopoly price of the bid law the seller observes."""
    return monopoly_price(bid_law(s.F, s.strategy), require_finite_mean=False)


@dataclass(frozen=True)
class StrategicOutcome:
    utility: float
    payment: float
    utility_se: float
    payment_se: float


def strategic_utility(
    s: ShadedStrategy, G: Distribution, n_draws: int = 1_000_000, seed: int = 0
) -> StrategicOutcome:
    """
    Utility ``E[(X - h(X)) G(beta(X)) 1{X >= x_beta}]`` and payment ``E[h(X) G(beta(X)) 1{X >= x_beta}]``.

    ``G`` is the law of the highest competing bid in a lazy second-price
    auction whose reserve for this bidder is the monopoly price of its bid law.
    """
    x = s.F.sample(n_draws, stream(seed, "strategic-utility"))
    h = s.h_at(x)
    win = np.asarray(G.cdf(np.asarray(s(x), dtype=float)), dtype=float) * (x >= s.reserve_value)
    utility, u_se = mean_and_stderr((x - h) * win)
    payment, p_se = mean_and_stderr(h * win)
    return StrategicOutcome(utility, payment, u_se, p_se)


def _competing_density(G: Distribution, b: float) -> float:
    try:
        return float(G.pdf(b))
    except AtomicDistribution:
        return 0.0


def linear_strategy_utility(alpha: float, F: Distribution, G: Distribution) -> float:
    """
    Expected utility of bidding ``alpha * x`` against ``G`` when the seller
    posts the monopoly price of the bid law (reserve value = monopoly price of ``F``).
    """
    r = monopoly_price(F)

    def integrand(x: float) -> float:
        return (x - alpha * float(F.virtual_value(x))) * float(G.cdf(alpha * x)) * float(F.pdf(x))

    value, _ = integrate.quad(integrand, r, F.cap(), limit=200)
    return float(value)


@dataclass(frozen=True)
class AlphaResult:
    alpha: float
    utility: float
    used_fallback: bool


def optimal_linear_alpha(F: Distribution, G: Distribution) -> AlphaResult:
    """
    Best linear shading factor ``alpha`` in (0, 1].

    Solves ``(1 - a) E[g(aX) X^2 1{X >= r}] = r (1 - F(r)) G(a r)`` with
    Brent's method. Without a sign change (e.g. no competing density) the
    utility itself is maximized on [1e-3, 1] and the result is flagged.
    """
    r = monopoly_price(F)
    tail = r * (1.0 - float(F.cdf(r)))
    hi = F.cap()

    def foc(a: float) -> float:
        second, _ = integrate.quad(
            lambda x: _competing_density(G, a * x) * x * x * float(F.pdf(x)), r, hi, limit=200
        )
        return (1.0 - a) * second - tail * float(G.cdf(a * r))

    lo_a, hi_a = 1e-6, 1.0
    f_lo, f_hi = foc(lo_a), foc(hi_a)
    if f_lo > 0 > f_hi:
        alpha = optimize.brentq(foc, lo_a, hi_a, xtol=1e-10)
        return AlphaResult(alpha, linear_strategy_utility(alpha, F, G), False)

    logger.warning(
        "No sign change in the first-order condition; maximizing utility directly",
        extra={"foc_low": f_lo, "foc_high": f_hi},
    )
    res = optimize.minimize_scalar(
        lambda a: -linear_strategy_utility(a, F, G),
        bounds=(1e-3, 1.0),
        method="bounded",
        options={"xatol": 1e-6},
    )
    return AlphaResult(float(res.x), float(-res.fun), True)


def thresholded_nash_reserve(F: Distribution, n: int) -> float:
    """
    Threshold ``r`` of the symmetric equilibrium among thresholded strategies.

    Root of ``(n - 1) E[X F^(n-2)(X) (1 - F(X)) 1{X <= r}] = r (1 - F(r)) F^(n-1)(r)``.

    Raises:
        NoRoot: If the equation has no sign change on the support.
    """
    if n < 2:
        raise ConfigError("thresholded equilibrium needs at least two bidders")
    lo, hi = F.lo, F.cap()

    def balance(r: float) -> float:
        lhs, _ = integrate.quad(
            lambda x: x * float(F.cdf(x)) ** (n - 2) * (1.0 - float(F.cdf(x))) * float(F.pdf(x)),
            lo,
            r,
            limit=200,
        )
        Fr = float(F.cdf(r))
        return (n - 1) * lhs - r * (1.0 - Fr) * Fr ** (n - 1)

    a = lo + 1e-6 * (hi - lo)
    b = hi - 1e-9 * (hi - lo)
    fa, fb = balance(a), balance(b)
    if fa * fb > 0:
        raise NoRoot(f"no thresholded equilibrium root for n={n}")
    return float(optimize.brentq(balance, a, b, xtol=1e-12))


def myerson_shading(F: Distribution, n: int, grid_size: Optional[int] = None) -> GridStrategy:
    """
    Equilibrium shading against per-bidder Myerson auctions: ``E[beta_I(X) | X >= x]``
    where ``beta_I`` is the first-price symmetric equilibrium.
    """
    beta_i = fp_symmetric_equilibrium(F, n, grid_size)
    g = grid_size or settings.STRATEGY_GRID
    q = np.linspace(0.0, 1.0, g)
    if not np.isfinite(F.hi):
        q[-1] = 1.0 - settings.QUANTILE_CAP
    x = np.asarray(F.quantile(q), dtype=float)
    b = np.asarray(beta_i(x), dtype=float)
    upper = integrate.cumulative_trapezoid(b[::-1], -q[::-1], initial=0.0)[::-1]
    width = 1.0 - q
    with np.errstate(divide="ignore", invalid="ignore"):
        shaded = np.where(width > 0, upper / np.where(width > 0, width, 1.0), b[-1])
    if np.isfinite(F.hi):
        shaded[-1] = b[-1]
    return GridStrategy(x, np.maximum(np.maximum.accumulate(shaded), b), repr_tag="custom-grid")


__all__ = [
    "h_of_beta",
    "Thresholded",
    "ShadedStrategy",
    "beta_from_g",
    "thresholded_strategy",
    "bid_law",
    "seller_reserve_against",
    "StrategicOutcome",
    "strategic_utility",
    "linear_strategy_utility",
    "AlphaResult",
    "optimal_linear_alpha",
    "thresholded_nash_reserve",
    "myerson_shading",
    "Linear",
    "Truthful",
]
