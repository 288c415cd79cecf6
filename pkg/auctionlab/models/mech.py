"""
Sealed-Bid Mechanisms Module

Allocation and payment rules for single-item sealed-bid auctions and the
Monte Carlo layer that estimates expected revenue, utilities and welfare.

Every mechanism is vectorized over a batch of bid profiles (an ``(N, n)``
array). Ties in every argmax go to the lowest bidder index.
"""

import logging
import math
from abc import ABC, abstractmethod
from dataclasses import dataclass
from enum import Enum
from typing import Any, List, Optional, Sequence, Tuple

import numpy as np
from joblib import Parallel, delayed
from scipy import integrate

from auctionlab.core.config import settings
from auctionlab.core.exceptions import ConfigError, InconsistentArity
from auctionlab.core.rng import stream
from auctionlab.models.dist import Distribution, VirtualValueTable, iron
from auctionlab.models.strategy import Strategy, Truthful
from auctionlab.utils.numerics import bisect_increasing

logger = logging.getLogger(__name__)


class MechanismKind(str, Enum):
    """Supported mechanism families."""

    VICKREY = "vickrey"
    SP_ANONYMOUS = "sp-anonymous"
    SP_LAZY = "sp-lazy"
    SP_EAGER = "sp-eager"
    L_LEVEL = "l-level"
    MYERSON = "myerson"
    BOOSTED_SP = "boosted-sp"
    FIRST_PRICE = "first-price"


@dataclass(frozen=True)
class AuctionOutcome:
    """Outcome of one auction: winner (or None) and per-bidder payments."""

    winner: Optional[int]
    payments: np.ndarray
    allocated: bool

    @property
    def revenue(self) -> float:
        return float(self.payments.sum())

    def utilities(self, values: Sequence[float]) -> np.ndarray:
        values = np.asarray(values, dtype=float)
        gain = np.zeros_like(values)
        if self.winner is not None:
            gain[self.winner] = values[self.winner]
        return gain - self.payments

    def welfare(self, values: Sequence[float]) -> float:
        if self.winner is None:
            return 0.0
        return float(np.asarray(values, dtype=float)[self.winner])


@dataclass(frozen=True)
class BatchOutcome:
    """
    Outcomes for a batch of profiles.

    Attributes:
        winners: Winner index per profile, ``-1`` when the item is not sold.
        payments: ``(N, n)`` payments.
    """

    winners: np.ndarray
    payments: np.ndarray

    @property
    def allocated(self) -> np.ndarray:
        return self.winners >= 0

    @property
    def revenue(self) -> np.ndarray:
        return self.payments.sum(axis=1)

    def allocation(self) -> np.ndarray:
        alloc = np.zeros(self.payments.shape, dtype=bool)
        rows = np.flatnonzero(self.winners >= 0)
        alloc[rows, self.winners[rows]] = True
        return alloc

    def utilities(self, values: np.ndarray) -> np.ndarray:
        return np.where(self.allocation(), values, 0.0) - self.payments

    def welfare(self, values: np.ndarray) -> np.ndarray:
        return np.where(self.allocation(), values, 0.0).sum(axis=1)

    def row(self, k: int) -> AuctionOutcome:
        w = int(self.winners[k])
        return AuctionOutcome(
            winner=None if w < 0 else w,
            payments=self.payments[k].copy(),
            allocated=w >= 0,
        )


def _as_profiles(bids: Any) -> np.ndarray:
    arr = np.asarray(bids, dtype=float)
    if arr.ndim == 1:
        arr = arr[None, :]
    if arr.ndim != 2 or arr.shape[1] < 1:
        raise ConfigError("bid profiles must be a non-empty (N, n) array")
    if not np.all(np.isfinite(arr)) or np.any(arr < 0):
        raise ConfigError("bids must be finite and non-negative")
    return arr


def _top_two(bids: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Lowest-index argmax and the highest bid among the others."""
    winners = np.argmax(bids, axis=1)
    if bids.shape[1] == 1:
        return winners, np.zeros(bids.shape[0])
    others = bids.copy()
    others[np.arange(bids.shape[0]), winners] = -np.inf
    return winners, others.max(axis=1)


class Mechanism(ABC):
    """
    Abstract base class for mechanisms.

    Subclasses implement ``allocate_and_pay`` over a batch of profiles.
    ``run`` executes a single profile.
    """

    kind: MechanismKind

    @property
    def arity(self) -> Optional[int]:
        """Number of bidders the parameters are built for; None if any."""
        return None

    def _check(self, bids: Any) -> np.ndarray:
        profiles = _as_profiles(bids)
        if self.arity is not None and profiles.shape[1] != self.arity:
            raise InconsistentArity(
                f"{self.kind.value} is parameterized for {self.arity} bidders, got {profiles.shape[1]}"
            )
        return profiles

    @abstractmethod
    def allocate_and_pay(self, bids: Any) -> BatchOutcome:
        """Run the mechanism on each row of ``bids``."""

    def run(self, bids: Sequence[float]) -> AuctionOutcome:
        """
        Run the mechanism on a single bid profile.

        Args:
            bids: One non-negative bid per bidder.

        Returns:
            The AuctionOutcome.

        Raises:
            InconsistentArity: If the parameters do not match the number of bids.
        """
        profile = np.asarray(bids, dtype=float)
        if profile.ndim != 1:
            raise ConfigError("run expects a single bid profile")
        return self.allocate_and_pay(profile[None, :]).row(0)

    def describe(self) -> dict:
        return {"kind": self.kind.value}


class Vickrey(Mechanism):
    kind = MechanismKind.VICKREY

    def allocate_and_pay(self, bids: Any) -> BatchOutcome:
        b = self._check(bids)
        winners, second = _top_two(b)
        payments = np.zeros_like(b)
        payments[np.arange(b.shape[0]), winners] = second
        return BatchOutcome(winners=winners.astype(int), payments=payments)


class SecondPriceLazy(Mechanism):
    """Lazy reserves: the top bidder wins only if it clears its own reserve."""

    kind = MechanismKind.SP_LAZY

    def __init__(self, reserves: Sequence[float]):
        r = np.asarray(reserves, dtype=float)
        if r.ndim != 1 or r.size == 0 or np.any(r < 0):
            raise ConfigError("reserves must be a non-empty vector of non-negative prices")
        self.reserves = r

    @property
    def arity(self) -> Optional[int]:
        return int(self.reserves.size)

    def _reserve_row(self, n: int) -> np.ndarray:
        return self.reserves

    def allocate_and_pay(self, bids: Any) -> BatchOutcome:
        b = self._check(bids)
        rows = np.arange(b.shape[0])
        reserves = self._reserve_row(b.shape[1])
        winners, second = _top_two(b)
        own_reserve = reserves[winners]
        sold = b[rows, winners] >= own_reserve
        payments = np.zeros_like(b)
        payments[rows, winners] = np.where(sold, np.maximum(own_reserve, second), 0.0)
        return BatchOutcome(winners=np.where(sold, winners, -1).astype(int), payments=payments)

    def describe(self) -> dict:
        return {"kind": self.kind.value, "reserves": self.reserves.tolist()}


class SecondPriceAnonymous(SecondPriceLazy):
    """Second price with a single reserve shared by all bidders."""

    kind = MechanismKind.SP_ANONYMOUS

    def __init__(self, reserve: float):
        if reserve < 0:
            raise ConfigError("reserve must be non-negative")
        self.reserve = float(reserve)
        self.reserves = np.array([self.reserve])

    @property
    def arity(self) -> Optional[int]:
        return None

    def _reserve_row(self, n: int) -> np.ndarray:
        return np.full(n, self.reserve)

    def describe(self) -> dict:
        return {"kind": self.kind.value, "reserve": self.reserve}


class SecondPriceEager(SecondPriceLazy):
    """Eager reserves: bidders below their own reserve are removed first."""

    kind = MechanismKind.SP_EAGER

    def allocate_and_pay(self, bids: Any) -> BatchOutcome:
        b = self._check(bids)
        rows = np.arange(b.shape[0])
        cleared = b >= self.reserves[None, :]
        masked = np.where(cleared, b, -np.inf)
        winners, second = _top_two(masked)
        sold = cleared.any(axis=1)
        price = np.maximum(self.reserves[winners], np.where(np.isfinite(second), second, 0.0))
        payments = np.zeros_like(b)
        payments[rows, winners] = np.where(sold, price, 0.0)
        return BatchOutcome(winners=np.where(sold, winners, -1).astype(int), payments=payments)


class LLevel(Mechanism):
    """
    L-level auction with per-bidder non-decreasing floors ``r_i^0 <= ... <= r_i^{L-1}``.

    A bidder's index is the highest level it clears (-1 below ``r_i^0``); the
    highest index wins, ties go to the highest bid and then to the lowest
    bidder index. The winner pays the lowest bid that would still win.
    """

    kind = MechanismKind.L_LEVEL

    def __init__(self, floors: Sequence[Sequence[float]]):
        f = np.asarray(floors, dtype=float)
        if f.ndim != 2 or f.shape[0] == 0 or f.shape[1] == 0:
            raise ConfigError("floors must be an (n, L) matrix")
        if np.any(f < 0) or np.any(np.diff(f, axis=1) < 0):
            raise ConfigError("floors must be non-negative and non-decreasing in the level")
        self.floors = f

    @property
    def arity(self) -> Optional[int]:
        return int(self.floors.shape[0])

    @property
    def levels(self) -> int:
        return int(self.floors.shape[1])

    def indices(self, bids: np.ndarray) -> np.ndarray:
        return (bids[:, :, None] >= self.floors[None, :, :]).sum(axis=2) - 1

    def allocate_and_pay(self, bids: Any) -> BatchOutcome:
        b = self._check(bids)
        N, n = b.shape
        rows = np.arange(N)
        idx = self.indices(b)
        top = idx.max(axis=1)
        candidates = (idx == top[:, None]) & (top[:, None] >= 0)
        winners = np.argmax(np.where(candidates, b, -np.inf), axis=1)
        sold = top >= 0

        others_idx = idx.astype(float)
        others_idx[rows, winners] = -np.inf
        m2 = others_idx.max(axis=1) if n > 1 else np.full(N, -1.0)
        m2 = np.where(np.isfinite(m2), m2, -1.0).astype(int)
        competing = (others_idx == m2[:, None]) & (m2[:, None] >= 0)
        c2 = np.where(competing, b, -np.inf).max(axis=1)
        c2 = np.where(np.isfinite(c2), c2, 0.0)

        own = self.floors[winners]
        level = np.clip(m2, 0, self.levels - 1)
        price = np.where(m2 < 0, own[:, 0], np.maximum(own[rows, level], c2))
        has_next = (m2 >= 0) & (m2 + 1 < self.levels)
        next_floor = own[rows, np.clip(m2 + 1, 0, self.levels - 1)]
        price = np.where(has_next, np.minimum(price, next_floor), price)

        payments = np.zeros_like(b)
        payments[rows, winners] = np.where(sold, price, 0.0)
        return BatchOutcome(winners=np.where(sold, winners, -1).astype(int), payments=payments)

    def describe(self) -> dict:
        return {"kind": self.kind.value, "floors": self.floors.tolist()}


class _VirtualBidMechanism(Mechanism):
    """
    Allocate to the highest non-negative virtual bid; the winner pays the
    smallest bid whose virtual value still reaches the best competing one.
    """

    @abstractmethod
    def virtual_bids(self, bids: np.ndarray) -> np.ndarray:
        """Non-decreasing virtual bid per column; ``-inf`` marks an ineligible bid."""

    @abstractmethod
    def invert(self, i: int, target: np.ndarray) -> np.ndarray:
        """Smallest bid of bidder ``i`` whose virtual bid reaches ``target``."""

    def allocate_and_pay(self, bids: Any) -> BatchOutcome:
        b = self._check(bids)
        N, n = b.shape
        rows = np.arange(N)
        v = self.virtual_bids(b)
        eligible = np.where(v >= 0, v, -np.inf)
        winners, best_other = _top_two(eligible)
        sold = np.isfinite(eligible[rows, winners])
        target = np.maximum(0.0, np.where(np.isfinite(best_other), best_other, 0.0))

        payments = np.zeros_like(b)
        for i in range(n):
            sel = np.flatnonzero(sold & (winners == i))
            if sel.size:
                # The threshold never exceeds the bid; the cap only trims bisection tolerance.
                payments[sel, i] = np.minimum(self.invert(i, target[sel]), b[sel, i])
        return BatchOutcome(winners=np.where(sold, winners, -1).astype(int), payments=payments)


class Myerson(_VirtualBidMechanism):
    """
    Myerson auction over per-bidder priors, using ironed virtual values.

    Bids below a prior's lowest value are ineligible; bids above its
    tabulated range take the last ironed virtual value.
    """

    kind = MechanismKind.MYERSON

    def __init__(self, priors: Sequence[Distribution], grid_size: Optional[int] = None):
        if len(priors) == 0:
            raise ConfigError("myerson needs at least one prior")
        self.priors = list(priors)
        self.tables: List[VirtualValueTable] = [iron(p, grid_size) for p in self.priors]

    @property
    def arity(self) -> Optional[int]:
        return len(self.priors)

    def virtual_bids(self, bids: np.ndarray) -> np.ndarray:
        return np.column_stack(
            [
                np.where(
                    bids[:, i] >= t.grid[0],
                    np.interp(bids[:, i], t.grid, t.psi_ironed),
                    -np.inf,
                )
                for i, t in enumerate(self.tables)
            ]
        )

    def invert(self, i: int, target: np.ndarray) -> np.ndarray:
        t = self.tables[i]
        return bisect_increasing(
            lambda x: np.interp(x, t.grid, t.psi_ironed),
            target,
            float(t.grid[0]),
            float(t.grid[-1]),
            tol=1e-10,
        )

    def reserves(self) -> np.ndarray:
        """Per-bidder reserve: smallest value with non-negative ironed virtual value."""
        return np.array([float(self.invert(i, np.zeros(1))[0]) for i in range(len(self.tables))])

    def describe(self) -> dict:
        return {"kind": self.kind.value, "priors": [p.describe() for p in self.priors]}


class BoostedSecondPrice(_VirtualBidMechanism):
    """Boosted second price: virtual bid ``boost_i * b_i - r_i``."""

    kind = MechanismKind.BOOSTED_SP

    def __init__(self, boosts: Sequence[float], reserves: Sequence[float]):
        beta = np.asarray(boosts, dtype=float)
        r = np.asarray(reserves, dtype=float)
        if beta.shape != r.shape or beta.ndim != 1 or beta.size == 0:
            raise InconsistentArity("boosts and reserves must be vectors of equal length")
        if np.any(beta <= 0) or np.any(r < 0):
            raise ConfigError("boosts must be positive and reserves non-negative")
        self.boosts = beta
        self.reserves = r

    @property
    def arity(self) -> Optional[int]:
        return int(self.boosts.size)

    def virtual_bids(self, bids: np.ndarray) -> np.ndarray:
        return self.boosts[None, :] * bids - self.reserves[None, :]

    def invert(self, i: int, target: np.ndarray) -> np.ndarray:
        return (target + self.reserves[i]) / self.boosts[i]

    def describe(self) -> dict:
        return {
            "kind": self.kind.value,
            "boosts": self.boosts.tolist(),
            "reserves": self.reserves.tolist(),
        }


class FirstPrice(Mechanism):
    kind = MechanismKind.FIRST_PRICE

    def __init__(self, reserve: float = 0.0):
        if reserve < 0:
            raise ConfigError("reserve must be non-negative")
        self.reserve = float(reserve)

    def allocate_and_pay(self, bids: Any) -> BatchOutcome:
        b = self._check(bids)
        rows = np.arange(b.shape[0])
        winners = np.argmax(b, axis=1)
        top = b[rows, winners]
        sold = top >= self.reserve
        payments = np.zeros_like(b)
        payments[rows, winners] = np.where(sold, top, 0.0)
        return BatchOutcome(winners=np.where(sold, winners, -1).astype(int), payments=payments)

    def describe(self) -> dict:
        return {"kind": self.kind.value, "reserve": self.reserve}


def run(m: Mechanism, bids: Sequence[float]) -> AuctionOutcome:
    """Run ``m`` on a single bid profile."""
    return m.run(bids)


# Monte Carlo layer


@dataclass(frozen=True)
class MechanismMetrics:
    """Monte Carlo estimates with standard errors."""

    revenue: float
    utilities: np.ndarray
    welfare: float
    sale_rate: float
    revenue_se: float
    utilities_se: np.ndarray
    welfare_se: float
    n_draws: int

    def as_dict(self) -> dict:
        out = {
            "revenue": self.revenue,
            "revenue_se": self.revenue_se,
            "welfare": self.welfare,
            "welfare_se": self.welfare_se,
            "sale_rate": self.sale_rate,
        }
        for i, (u, se) in enumerate(zip(self.utilities, self.utilities_se)):
            out[f"utility_{i}"] = float(u)
            out[f"utility_{i}_se"] = float(se)
        return out


def draw_values(dists: Sequence[Distribution], size: int, rng: np.random.Generator) -> np.ndarray:
    """Independent value draws, one column per bidder, sampled bidder by bidder."""
    return np.column_stack([d.sample(size, rng) for d in dists])


def shard_generator(seed: int, shard: int) -> np.random.Generator:
    return stream(seed, "mc", shard)


def _shard_sums(
    m: Mechanism,
    dists: Sequence[Distribution],
    strategies: Sequence[Strategy],
    size: int,
    seed: int,
    shard: int,
) -> np.ndarray:
    values = draw_values(dists, size, shard_generator(seed, shard))
    bids = np.column_stack([s(values[:, i]) for i, s in enumerate(strategies)])
    outcome = m.allocate_and_pay(bids)
    revenue = outcome.revenue
    utils = outcome.utilities(values)
    welfare = outcome.welfare(values)
    stacked = np.column_stack([revenue, welfare, outcome.allocated.astype(float), utils])
    return np.concatenate([stacked.sum(axis=0), (stacked**2).sum(axis=0)])


def expected_metrics(
    m: Mechanism,
    dists: Sequence[Distribution],
    strategies: Optional[Sequence[Strategy]] = None,
    n_draws: int = 1_000_000,
    seed: int = 0,
    n_jobs: Optional[int] = None,
) -> MechanismMetrics:
    """
    Monte Carlo estimate of revenue, utilities, welfare and sale rate.

    Draws are split in fixed-size shards, each with its own derived stream;
    partial sums are combined in shard order so the result depends only on
    ``seed`` and ``n_draws``, never on ``n_jobs``.

    Args:
        m: Mechanism to evaluate.
        dists: Value law of each bidder.
        strategies: Bid function of each bidder (truthful when omitted).
        n_draws: Number of value profiles.
        seed: Master seed.
        n_jobs: Worker count (defaults to ``settings.N_JOBS``).

    Returns:
        MechanismMetrics with standard errors.
    """
    n = len(dists)
    if strategies is None:
        strategies = [Truthful() for _ in range(n)]
    if len(strategies) != n:
        raise InconsistentArity("one strategy per distribution is required")
    if m.arity is not None and m.arity != n:
        raise InconsistentArity(f"mechanism expects {m.arity} bidders, got {n}")
    if n_draws < 1:
        raise ConfigError("n_draws must be at least 1")

    shard_size = settings.MC_SHARD_SIZE
    n_shards = math.ceil(n_draws / shard_size)
    sizes = [min(shard_size, n_draws - k * shard_size) for k in range(n_shards)]
    jobs = n_jobs or settings.N_JOBS
    if jobs == 1 or n_shards == 1:
        parts = [_shard_sums(m, dists, strategies, s, seed, k) for k, s in enumerate(sizes)]
    else:
        parts = Parallel(n_jobs=jobs)(
            delayed(_shard_sums)(m, dists, strategies, s, seed, k) for k, s in enumerate(sizes)
        )
    total = np.zeros_like(parts[0])
    for part in parts:
        total = total + part

    width = total.size // 2
    mean = total[:width] / n_draws
    second = total[width:] / n_draws
    if n_draws > 1:
        var = np.maximum(second - mean**2, 0.0) * n_draws / (n_draws - 1)
        se = np.sqrt(var / n_draws)
    else:
        se = np.zeros_like(mean)
    logger.debug(
        "Expected metrics estimated",
        extra={"mechanism": m.kind.value, "n_draws": n_draws, "shards": n_shards},
    )
    return MechanismMetrics(
        revenue=float(mean[0]),
        utilities=mean[3:].copy(),
        welfare=float(mean[1]),
        sale_rate=float(mean[2]),
        revenue_se=float(se[0]),
        utilities_se=se[3:].copy(),
        welfare_se=float(se[1]),
        n_draws=n_draws,
    )


def sp_anonymous_expected_revenue(d: Distribution, n: int, r: float) -> float:
    """
    Exact expected revenue of a symmetric second-price auction with anonymous reserve ``r``.

    ``R(r) = r (1 - F(r-)^n) + int_r^hi (1 - H(y)) dy`` where ``H`` is the
    cdf of the second-highest of ``n`` values.
    """
    if n < 1:
        raise ConfigError("need at least one bidder")
    r = float(max(r, 0.0))
    f_left = float(d.cdf_left(r))
    head = r * (1.0 - f_left**n)
    hi = d.cap()
    if r >= hi:
        return head

    def tail(y: float) -> float:
        F = float(d.cdf(y))
        if n == 1:
            return 0.0
        return 1.0 - (F**n + n * F ** (n - 1) * (1.0 - F))

    points = None
    if d.is_atomic and hasattr(d, "atoms"):
        inside = [a for a in d.atoms if r < a < hi]
        points = inside or None
    body, _ = integrate.quad(tail, r, hi, points=points, limit=200)
    return head + body


__all__ = [
    "MechanismKind",
    "AuctionOutcome",
    "BatchOutcome",
    "Mechanism",
    "Vickrey",
    "SecondPriceAnonymous",
    "SecondPriceLazy",
    "SecondPriceEager",
    "LLevel",
    "Myerson",
    "BoostedSecondPrice",
    "FirstPrice",
    "MechanismMetrics",
    "run",
    "draw_values",
    "shard_generator",
    "expected_metrics",
    "sp_anonymous_expected_revenue",
]
