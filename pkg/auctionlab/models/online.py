"""
Online Learning Module

Sequential decision algorithms for the seller: UCB and EXP3 bandits,
posted-price learners over a discretized price grid, the cautious and
binary-search pricing baselines against a fixed buyer, and the
epoch-based learning of an anonymous reserve in symmetric second-price
auctions.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence

import numpy as np
import pandas as pd
from scipy import integrate, optimize, special

from auctionlab.core.exceptions import ConfigError, DegenerateCompetition, RewardOutOfRange
from auctionlab.core.rng import stream
from auctionlab.models.dist import Distribution
from auctionlab.models.mech import sp_anonymous_expected_revenue
from auctionlab.utils.numerics import bisect_increasing, first_argmax

logger = logging.getLogger(__name__)

RESERVE_BAND_GRID = 512
MIN_FIRST_EPOCH = 32


@dataclass
class BanditState:
    """
    Mutable state shared by UCB and EXP3.

    ``scores`` holds the cumulative EXP3 reward estimates; sampling
    probabilities are ``softmax(eta * scores)``.
    """

    K: int
    T: int
    pulls: np.ndarray
    sums: np.ndarray
    scores: np.ndarray
    eta: float
    t: int = 0

    @classmethod
    def new(cls, K: int, T: int, eta: Optional[float] = None) -> "BanditState":
        if K < 1 or T < 1:
            raise ConfigError("bandit needs K >= 1 arms and horizon T >= 1")
        if eta is None:
            eta = math.sqrt(math.log(K) / (K * T)) if K > 1 else 0.0
        return cls(K=K, T=T, pulls=np.zeros(K, dtype=int), sums=np.zeros(K),
                   scores=np.zeros(K), eta=float(eta))

    @property
    def means(self) -> np.ndarray:
        return np.where(self.pulls > 0, self.sums / np.maximum(self.pulls, 1), 0.0)

    def record(self, arm: int, reward: float) -> None:
        if not 0.0 <= reward <= 1.0:
            raise RewardOutOfRange(f"reward {reward} outside [0, 1]")
        self.pulls[arm] += 1
        self.sums[arm] += reward
        self.t += 1


def ucb_index(s: BanditState) -> np.ndarray:
    """``mean + sqrt(log T / N)``; infinite for arms not yet pulled."""
    with np.errstate(divide="ignore"):
        bonus = np.sqrt(math.log(s.T) / s.pulls) if s.T > 1 else np.zeros(s.K)
    return np.where(s.pulls > 0, s.means + bonus, np.inf)


def ucb_step(s: BanditState) -> int:
    """Unpulled arms first in index order, then the largest index (lowest arm on ties)."""
    unpulled = np.flatnonzero(s.pulls == 0)
    if unpulled.size:
        return int(unpulled[0])
    return int(np.argmax(ucb_index(s)))


def exp3_probabilities(s: BanditState) -> np.ndarray:
    return special.softmax(s.eta * s.scores)


def exp3_step(s: BanditState, rng: np.random.Generator) -> int:
    p = exp3_probabilities(s)
    return int(min(np.searchsorted(np.cumsum(p), rng.random(), side="right"), s.K - 1))


def exp3_update(s: BanditState, arm: int, reward: float) -> None:
    """
    Loss-based update ``X_hat = 1 - (1 - X) / p`` on the pulled arm.

    The constant 1 added to every arm cancels in the softmax and is not stored.
    """
    p = exp3_probabilities(s)[arm]
    s.record(arm, reward)
    s.scores[arm] -= (1.0 - reward) / p


class UCB:
    """UCB with the known-horizon bonus ``sqrt(log T / N_k)``."""

    name = "ucb"

    def __init__(self, K: int, T: int):
        self.state = BanditState.new(K, T)

    def select(self, rng: Optional[np.random.Generator] = None) -> int:
        return ucb_step(self.state)

    def update(self, arm: int, reward: float) -> None:
        self.state.record(arm, reward)


class EXP3:
    """EXP3 with ``eta = sqrt(log K / (K T))`` and log-domain weights."""

    name = "exp3"

    def __init__(self, K: int, T: int, eta: Optional[float] = None):
        self.state = BanditState.new(K, T, eta)

    def probabilities(self) -> np.ndarray:
        return exp3_probabilities(self.state)

    def select(self, rng: Optional[np.random.Generator] = None) -> int:
        if rng is None:
            raise ConfigError("EXP3 needs an RNG stream")
        return exp3_step(self.state, rng)

    def update(self, arm: int, reward: float) -> None:
        exp3_update(self.state, arm, reward)


BANDITS = {"ucb": UCB, "exp3": EXP3}


def make_bandit(algo: str, K: int, T: int) -> Any:
    try:
        return BANDITS[algo](K, T)
    except KeyError:
        raise ConfigError(f"unknown bandit {algo!r}; expected one of {sorted(BANDITS)}") from None


@dataclass
class BanditEpisode:
    arms: np.ndarray
    rewards: np.ndarray
    regret: float

    def to_frame(self, table: np.ndarray) -> pd.DataFrame:
        best = table.sum(axis=0).argmax()
        gap = table[:, best] - self.rewards
        return pd.DataFrame(
            {
                "t": np.arange(1, self.arms.size + 1),
                "action": self.arms,
                "reward": self.rewards,
                "cumulative_regret": np.cumsum(gap),
            }
        )


def run_bandit(algo: str, table: np.ndarray, seed: int = 0) -> BanditEpisode:
    """
    Play a bandit against a ``(T, K)`` reward table.

    Regret is measured against the best fixed arm in hindsight.
    """
    table = np.asarray(table, dtype=float)
    T, K = table.shape
    learner = make_bandit(algo, K, T)
    rng = stream(seed, "bandit", algo)
    arms = np.zeros(T, dtype=int)
    rewards = np.zeros(T)
    for t in range(T):
        arm = learner.select(rng)
        arms[t] = arm
        rewards[t] = table[t, arm]
        learner.update(arm, rewards[t])
    regret = float(table.sum(axis=0).max() - rewards.sum())
    return BanditEpisode(arms=arms, rewards=rewards, regret=regret)


@dataclass
class PricingEpisode:
    """
    Prices posted to a stream of buyers who accept iff value >= price.

    Attributes:
        prices: Posted prices ``p_t``.
        accepts: Acceptance flags ``d_t``.
        values: Buyer values.
        benchmark: Per-round revenue of the comparator price.
        grid_benchmark: Per-round revenue of the best grid price, when a grid is used.
    """

    prices: np.ndarray
    accepts: np.ndarray
    values: np.ndarray
    benchmark: float
    grid_benchmark: Optional[float] = None
    meta: Dict[str, Any] = field(default_factory=dict)

    @property
    def T(self) -> int:
        return int(self.prices.size)

    @property
    def revenue(self) -> float:
        return float(np.sum(self.prices * self.accepts))

    @property
    def regret(self) -> float:
        return self.benchmark * self.T - self.revenue

    @property
    def grid_regret(self) -> Optional[float]:
        if self.grid_benchmark is None:
            return None
        return self.grid_benchmark * self.T - self.revenue

    def to_frame(self) -> pd.DataFrame:
        gained = self.prices * self.accepts
        return pd.DataFrame(
            {
                "t": np.arange(1, self.T + 1),
                "price": self.prices,
                "accept": self.accepts.astype(int),
                "cumulative_regret": np.cumsum(self.benchmark - gained),
            }
        )


def best_fixed_price(values: Sequence[float], grid: Optional[Sequence[float]] = None) -> tuple:
    """
    Best fixed price in hindsight and its per-round revenue.

    Without a grid every observed value is a candidate; ties go to the smallest price.
    """
    x = np.sort(np.asarray(values, dtype=float))
    candidates = np.unique(x) if grid is None else np.unique(np.asarray(grid, dtype=float))
    accepted = x.size - np.searchsorted(x, candidates, side="left")
    revenue = candidates * accepted / x.size
    k = first_argmax(revenue)
    return float(candidates[k]), float(revenue[k])


def price_grid(eps: float) -> np.ndarray:
    """Prices ``k * eps`` for ``k < ceil(1 / eps)``."""
    if not 0.0 < eps < 1.0:
        raise ConfigError("eps must lie in (0, 1)")
    count = math.ceil(round(1.0 / eps, 9))
    return np.round(np.arange(count) * eps, 12)


def posted_price_bandit(
    values: Sequence[float],
    eps: float,
    stochastic: bool = True,
    seed: int = 0,
) -> PricingEpisode:
    """
    Learn a posted price over the ``eps``-grid with UCB (stochastic) or EXP3 (adversarial).

    The reward of posting ``p`` is ``p * 1{x_t >= p}``.
    """
    x = np.asarray(values, dtype=float)
    if x.size == 0:
        raise ConfigError("value stream is empty")
    grid = price_grid(eps)
    learner = make_bandit("ucb" if stochastic else "exp3", grid.size, x.size)
    rng = stream(seed, "posted-price")
    prices = np.zeros(x.size)
    accepts = np.zeros(x.size, dtype=bool)
    for t in range(x.size):
        arm = learner.select(rng)
        prices[t] = grid[arm]
        accepts[t] = x[t] >= prices[t]
        learner.update(arm, float(prices[t] * accepts[t]))
    _, best = best_fixed_price(x)
    _, best_grid = best_fixed_price(x, grid)
    return PricingEpisode(
        prices=prices,
        accepts=accepts,
        values=x,
        benchmark=best,
        grid_benchmark=best_grid,
        meta={"algo": learner.name, "eps": eps, "arms": int(grid.size)},
    )


def cautious_epochs(T: int) -> int:
    """``ceil(log2 log2 T) + 1`` epochs (one for tiny horizons)."""
    if T < 4:
        return 1
    return math.ceil(round(math.log2(math.log2(T)), 12)) + 1


def cautious_search(x: float, T: int) -> PricingEpisode:
    """
    Cautious ascending search against a fixed buyer value ``x``.

    Epoch ``l`` climbs from the last accepted price in steps ``2^-(2^l)``
    and ends at the first rejection or when the next price would exceed 1.
    After the last epoch the last accepted price is posted until ``T``.
    """
    if not 0.0 <= x <= 1.0:
        raise ConfigError("buyer value must lie in [0, 1]")
    if T < 1:
        raise ConfigError("horizon must be positive")
    prices: List[float] = []
    accepted_price = 0.0
    epochs = cautious_epochs(T)
    for level in range(epochs):
        step = 2.0 ** -(2**level)
        p = accepted_price + step
        while len(prices) < T and p <= 1.0:
            prices.append(p)
            if x >= p:
                accepted_price = p
                p += step
            else:
                break
    prices.extend([accepted_price] * (T - len(prices)))
    posted = np.asarray(prices[:T])
    values = np.full(T, float(x))
    return PricingEpisode(
        prices=posted,
        accepts=values >= posted,
        values=values,
        benchmark=float(x),
        meta={"algo": "cautious", "epochs": epochs, "final_price": accepted_price},
    )


def binary_search_pricing(x: float, T: int, precision: Optional[float] = None) -> PricingEpisode:
    """Bisection on the acceptance threshold down to ``precision`` (default 1/T), then exploit."""
    if not 0.0 <= x <= 1.0:
        raise ConfigError("buyer value must lie in [0, 1]")
    precision = 1.0 / T if precision is None else precision
    lo, hi = 0.0, 1.0
    prices: List[float] = []
    while hi - lo > precision and len(prices) < T:
        p = 0.5 * (lo + hi)
        prices.append(p)
        if x >= p:
            lo = p
        else:
            hi = p
    prices.extend([lo] * (T - len(prices)))
    posted = np.asarray(prices)
    values = np.full(T, float(x))
    return PricingEpisode(
        prices=posted,
        accepts=values >= posted,
        values=values,
        benchmark=float(x),
        meta={"algo": "binary-search", "precision": precision},
    )


# Reserve learning in symmetric second-price auctions


def optimal_anonymous_reserve(d: Distribution, n: int, grid: int = RESERVE_BAND_GRID) -> float:
    """Smallest maximizer of the exact anonymous-reserve revenue, grid search plus refinement."""
    r = np.linspace(d.lo, d.cap(), grid)
    revenue = np.array([sp_anonymous_expected_revenue(d, n, v) for v in r])
    k = first_argmax(revenue)
    if d.is_atomic:
        return float(r[k])
    left, right = r[max(k - 1, 0)], r[min(k + 1, grid - 1)]
    res = optimize.minimize_scalar(
        lambda v: -sp_anonymous_expected_revenue(d, n, v),
        bounds=(left, right),
        method="bounded",
        options={"xatol": 1e-10},
    )
    if res.success and -res.fun > revenue[k]:
        return float(res.x)
    return float(r[k])


def _cdf_from_second_order(H: np.ndarray, n: int) -> np.ndarray:
    """Invert ``H = n F^(n-1) - (n-1) F^n`` for ``F`` in [0, 1]."""
    return bisect_increasing(
        lambda F: n * F ** (n - 1) - (n - 1) * F**n, np.clip(H, 0.0, 1.0), 0.0, 1.0, tol=1e-12
    )


def _revenue_from_band(grid: np.ndarray, H: np.ndarray, n: int) -> np.ndarray:
    F = _cdf_from_second_order(H, n)
    tail = integrate.cumulative_trapezoid((1.0 - H)[::-1], -grid[::-1], initial=0.0)[::-1]
    return grid * (1.0 - F**n) + tail


@dataclass
class ReserveLearningEpisode:
    reserves: np.ndarray
    revenues: np.ndarray
    epochs: List[Dict[str, float]]
    optimal_reserve: float
    optimal_revenue: float
    pseudo_regret: float

    @property
    def T(self) -> int:
        return int(self.reserves.size)

    @property
    def realized_regret(self) -> float:
        return self.optimal_revenue * self.T - float(self.revenues.sum())

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(
            {
                "t": np.arange(1, self.T + 1),
                "price": self.reserves,
                "reward": self.revenues,
                "cumulative_regret": np.cumsum(self.optimal_revenue - self.revenues),
            }
        )


def symmetric_reserve_learning(
    d: Distribution, n: int, T: int, seed: int = 0
) -> ReserveLearningEpisode:
    """
    Learn the anonymous reserve of a symmetric second-price auction over doubling epochs.

    The first epoch posts reserve 0 for ``max(32, ceil(sqrt(T)))`` rounds;
    each epoch doubles the previous one. At the end of an epoch the observed
    second-highest bids (censored below the reserves in force) give an
    empirical cdf ``H`` with a DKW band of width ``sqrt(log(2T) / (2m))``.
    Revenue curves under ``H + eps`` and ``H - eps`` bound the true curve, and
    the next reserve is the largest maximizer of the pessimistic curve, so a
    point mass is reached after one epoch. Reserves never decrease. Regret
    is pseudo-regret against posting the optimal reserve throughout.

    Raises:
        DegenerateCompetition: If ``n < 2``.
    """
    if n < 2:
        raise DegenerateCompetition("reserve learning needs at least two bidders")
    if T < 1:
        raise ConfigError("horizon must be positive")
    rng = stream(seed, "reserve-epochs")
    r_star = optimal_anonymous_reserve(d, n)
    best = sp_anonymous_expected_revenue(d, n, r_star)

    reserves = np.zeros(T)
    revenues = np.zeros(T)
    observed: List[np.ndarray] = []
    epochs: List[Dict[str, float]] = []
    reserve = 0.0
    start = 0
    length = max(MIN_FIRST_EPOCH, math.ceil(math.sqrt(T)))
    while start < T:
        stop = min(T, start + length)
        values = np.column_stack([d.sample(stop - start, rng) for _ in range(n)])
        part = np.sort(values, axis=1)
        x1, x2 = part[:, -1], part[:, -2]
        reserves[start:stop] = reserve
        revenues[start:stop] = np.where(x1 >= reserve, np.maximum(reserve, x2), 0.0)
        # Second bids below the reserve are only known to lie below it.
        observed.append(np.where(x2 >= reserve, x2, -np.inf))
        epochs.append({"start": float(start), "length": float(stop - start), "reserve": reserve})
        start, length = stop, 2 * length
        if start >= T:
            break

        sample = np.concatenate(observed)
        m = sample.size
        eps = math.sqrt(math.log(2.0 * T) / (2.0 * m))
        top = float(sample.max())
        if not np.isfinite(top) or top <= reserve:
            continue
        grid = np.linspace(reserve, top, RESERVE_BAND_GRID)
        ordered = np.sort(sample)
        H_left = np.searchsorted(ordered, grid, side="left") / m
        lower = _revenue_from_band(grid, np.clip(H_left + eps, 0.0, 1.0), n)
        upper = _revenue_from_band(grid, np.clip(H_left - eps, 0.0, 1.0), n)
        best_lower = float(lower.max())
        # Largest pessimistic maximizer, so a flat pessimistic curve is climbed to its end.
        ties = lower >= best_lower - 1e-12 * max(1.0, abs(best_lower))
        reserve = float(grid[np.flatnonzero(ties)[-1]])
        logger.debug(
            "Reserve epoch closed",
            extra={
                "observations": m,
                "band": eps,
                "revenue_gap": float(upper.max()) - best_lower,
                "next_reserve": reserve,
            },
        )

    expected = {
        r: sp_anonymous_expected_revenue(d, n, r) for r in {e["reserve"] for e in epochs}
    }
    pseudo = float(sum(e["length"] * (best - expected[e["reserve"]]) for e in epochs))
    logger.info(
        "Reserve learning finished",
        extra={"T": T, "epochs": len(epochs), "pseudo_regret": pseudo, "r_star": r_star},
    )
    return ReserveLearningEpisode(
        reserves=reserves,
        revenues=revenues,
        epochs=epochs,
        optimal_reserve=r_star,
        optimal_revenue=best,
        pseudo_regret=pseudo,
    )


__all__ = [
    "BanditState",
    "ucb_index",
    "ucb_step",
    "exp3_probabilities",
    "exp3_step",
    "exp3_update",
    "UCB",
    "EXP3",
    "make_bandit",
    "BanditEpisode",
    "run_bandit",
    "PricingEpisode",
    "best_fixed_price",
    "price_grid",
    "posted_price_bandit",
    "cautious_epochs",
    "cautious_search",
    "binary_search_pricing",
    "optimal_anonymous_reserve",
    "ReserveLearningEpisode",
    "symmetric_reserve_learning",
]
