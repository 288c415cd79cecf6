"""
Bidder-Side Learning Module

Learning to bid from the buyer's side: optimistic bidding with an unknown
click-through value, per-value EXP3 bidding against an unknown mechanism,
and budget pacing by online dual descent.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Any, Dict, Optional, Sequence

import numpy as np
import pandas as pd
from scipy import optimize

from auctionlab.core.exceptions import ConfigError, InconsistentArity, NonpositiveBudget
from auctionlab.core.rng import stream
from auctionlab.models.dist import Distribution, Uniform
from auctionlab.models.mech import Mechanism
from auctionlab.models.online import EXP3

logger = logging.getLogger(__name__)


@dataclass
class BidderEpisode:
    """
    Per-round transcript of a learning bidder.

    ``regret_steps`` are the per-round contributions to the stated benchmark's regret.
    """

    bids: np.ndarray
    wins: np.ndarray
    values: np.ndarray
    competition: np.ndarray
    payments: np.ndarray
    regret_steps: np.ndarray
    meta: Dict[str, Any] = field(default_factory=dict)

    @property
    def T(self) -> int:
        return int(self.bids.size)

    @property
    def utilities(self) -> np.ndarray:
        return np.where(self.wins, self.values - self.payments, 0.0)

    @property
    def utility(self) -> float:
        return float(self.utilities.sum())

    @property
    def regret(self) -> float:
        return float(self.regret_steps.sum())

    @property
    def spend(self) -> float:
        return float(self.payments.sum())

    def summary(self) -> Dict[str, Any]:
        return {
            "T": self.T,
            "regret": self.regret,
            "spend": self.spend,
            "wins": int(self.wins.sum()),
            "utility": self.utility,
            **self.meta,
        }

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(
            {
                "t": np.arange(1, self.T + 1),
                "bid": self.bids,
                "win": self.wins.astype(int),
                "utility": self.utilities,
                "cumulative_regret": np.cumsum(self.regret_steps),
            }
        )


def ucbid_index(mean: float, wins: int, T: int) -> float:
    """Optimistic bid ``min(1, mean + 2 sqrt(log T / wins))``; 1 before the first win."""
    if wins == 0:
        return 1.0
    return min(1.0, mean + 2.0 * math.sqrt(math.log(T) / wins))


def ucbid(x: float, competition: Sequence[float], seed: int = 0) -> BidderEpisode:
    """
    Bid the optimistic index in repeated second-price auctions with Bernoulli(``x``) clicks.

    A click is observed only on a win. The bidder wins when its bid strictly
    exceeds the competing bid and pays the competing bid. Regret is expected
    utility regret against bidding the true ``x``.
    """
    if not 0.0 <= x <= 1.0:
        raise ConfigError("click-through value must lie in [0, 1]")
    c = np.asarray(competition, dtype=float)
    T = c.size
    if T == 0:
        raise ConfigError("competition stream is empty")
    clicks = (stream(seed, "ucbid", "clicks").random(T) < x).astype(float)

    bids = np.zeros(T)
    wins = np.zeros(T, dtype=bool)
    total, count = 0.0, 0
    for t in range(T):
        bids[t] = ucbid_index(total / count if count else 0.0, count, T)
        if bids[t] > c[t]:
            wins[t] = True
            total += clicks[t]
            count += 1
    payments = np.where(wins, c, 0.0)
    regret_steps = np.maximum(x - c, 0.0) - np.where(wins, x - c, 0.0)
    return BidderEpisode(
        bids=bids,
        wins=wins,
        values=clicks,
        competition=c,
        payments=payments,
        regret_steps=regret_steps,
        meta={"algo": "ucbid", "x": x},
    )


def bucket_values(values: Sequence[float], edges: Sequence[float]) -> np.ndarray:
    """Index of the half-open bin ``[edges[k], edges[k+1])`` holding each value."""
    e = np.asarray(edges, dtype=float)
    return np.clip(np.searchsorted(e, np.asarray(values, dtype=float), side="right") - 1, 0, e.size - 1)


def contextual_bid_learner(
    value_support: Sequence[float],
    bid_grid: Sequence[float],
    mechanism: Mechanism,
    T: int,
    seed: int = 0,
    value_probs: Optional[Sequence[float]] = None,
    opponent: Optional[Distribution] = None,
) -> BidderEpisode:
    """
    One EXP3 instance per value in ``value_support`` choosing bids from ``bid_grid``.

    The learner is bidder 0 against one opponent bidding truthfully from
    ``opponent`` (uniform on [0, 1] by default). Utilities are shifted by
    the largest bid and scaled by ``1 / (max bid + max value)`` into [0, 1].
    Regret is against the best fixed grid bid for each value.
    """
    support = np.asarray(value_support, dtype=float)
    grid = np.asarray(bid_grid, dtype=float)
    if support.size == 0 or grid.size == 0:
        raise ConfigError("value support and bid grid must be non-empty")
    if np.any(grid < 0):
        raise ConfigError("bids must be non-negative")
    if mechanism.arity not in (None, 2):
        raise InconsistentArity("contextual learner plays two-bidder auctions")
    opponent = opponent or Uniform(0.0, 1.0)
    probs = None if value_probs is None else np.asarray(value_probs, dtype=float)

    env = stream(seed, "contextual", "environment")
    contexts = env.choice(support.size, size=T, p=probs)
    values = support[contexts]
    competition = opponent.sample(T, env)

    K = grid.size
    profiles = np.column_stack([np.repeat(grid[None, :], T, axis=0).ravel(), np.repeat(competition, K)])
    outcome = mechanism.allocate_and_pay(profiles)
    won = (outcome.winners == 0).reshape(T, K)
    paid = outcome.payments[:, 0].reshape(T, K)
    U = np.where(won, values[:, None], 0.0) - paid

    shift = float(grid.max())
    scale = shift + float(support.max())
    # Every context shares the full horizon; its own visit count is not known in advance.
    learners = {ell: EXP3(K, T) for ell in range(support.size)}
    rngs = {ell: stream(seed, "contextual", int(ell)) for ell in range(support.size)}
    arms = np.zeros(T, dtype=int)
    for t in range(T):
        ell = int(contexts[t])
        arm = learners[ell].select(rngs[ell])
        arms[t] = arm
        reward = (U[t, arm] + shift) / scale if scale > 0 else 0.0
        learners[ell].update(arm, min(max(reward, 0.0), 1.0))

    rows = np.arange(T)
    realized = U[rows, arms]
    regret_steps = np.zeros(T)
    for ell in range(support.size):
        mask = contexts == ell
        if mask.any():
            best = int(np.argmax(U[mask].sum(axis=0)))
            regret_steps[mask] = U[mask, best] - realized[mask]
    return BidderEpisode(
        bids=grid[arms],
        wins=won[rows, arms],
        values=values,
        competition=competition,
        payments=paid[rows, arms],
        regret_steps=regret_steps,
        meta={
            "algo": "contextual",
            "mechanism": mechanism.kind.value,
            "reward_scale": 1.0 / scale if scale > 0 else 0.0,
            "learning_rate": learners[0].state.eta,
        },
    )


@dataclass
class PacingState:
    """Budget ``B``, dual multiplier ``mu`` and stepsize ``gamma``."""

    B: float
    T: int
    gamma: float
    mu: float = 0.0
    spend: float = 0.0

    @property
    def per_round(self) -> float:
        return self.B / self.T

    @property
    def exhausted(self) -> bool:
        return self.spend >= self.B

    def bid(self, x: float) -> float:
        return x / (1.0 + self.mu)

    def update(self, x: float, g: float) -> None:
        """Projected subgradient step on ``(x - (1 + mu) g)_+ + mu B / T``."""
        subgradient = -g * float(x > (1.0 + self.mu) * g) + self.per_round
        self.mu = max(0.0, self.mu - self.gamma * subgradient)


def pacing_bidder(
    values: Sequence[float],
    competition: Sequence[float],
    B: float,
    gamma: Optional[float] = None,
    mu0: float = 0.0,
) -> BidderEpisode:
    """
    Bid ``x_t / (1 + mu_t)`` in second-price auctions under a total budget ``B``.

    Ties are won. Once the spend reaches ``B`` the bidder stops bidding but
    the multiplier keeps updating. The summary reports the final multiplier
    and its average over the last quarter of the horizon.

    Raises:
        NonpositiveBudget: If ``B <= 0``.
    """
    x = np.asarray(values, dtype=float)
    c = np.asarray(competition, dtype=float)
    if x.shape != c.shape or x.size == 0:
        raise InconsistentArity("values and competition must be equal-length non-empty streams")
    if B <= 0:
        raise NonpositiveBudget(f"budget must be positive, got {B}")
    T = x.size
    state = PacingState(B=float(B), T=T, gamma=1.0 / math.sqrt(T) if gamma is None else float(gamma), mu=mu0)

    bids = np.zeros(T)
    wins = np.zeros(T, dtype=bool)
    mus = np.zeros(T)
    exhausted_at = None
    for t in range(T):
        if not state.exhausted:
            bids[t] = state.bid(x[t])
            if bids[t] >= c[t]:
                wins[t] = True
                state.spend += c[t]
        elif exhausted_at is None:
            exhausted_at = t
            logger.warning("Budget exhausted", extra={"round": t, "spend": state.spend, "budget": B})
        mus[t] = state.mu
        state.update(x[t], c[t])

    payments = np.where(wins, c, 0.0)
    tail = mus[3 * T // 4 :] if T >= 4 else mus
    # Benchmark: never bidding, whose utility is zero.
    regret_steps = -np.where(wins, x - c, 0.0)
    return BidderEpisode(
        bids=bids,
        wins=wins,
        values=x,
        competition=c,
        payments=payments,
        regret_steps=regret_steps,
        meta={
            "algo": "pacing",
            "budget": float(B),
            "gamma": state.gamma,
            "mu_final": state.mu,
            "mu_avg": float(tail.mean()),
            "exhausted_at": exhausted_at,
        },
    )


def fluid_dual_multiplier(values: Sequence[float], competition: Sequence[float], B: float) -> float:
    """
    Minimizer over ``mu >= 0`` of the offline dual ``mean((x - (1 + mu) g)_+) + mu B / T``.

    Grid search on [0, 10] in steps of 0.01, refined on the neighbouring cells.
    """
    x = np.asarray(values, dtype=float)
    c = np.asarray(competition, dtype=float)
    if B <= 0:
        raise NonpositiveBudget(f"budget must be positive, got {B}")
    rho = B / x.size

    def dual(mu: float) -> float:
        return float(np.maximum(x - (1.0 + mu) * c, 0.0).mean() + mu * rho)

    grid = np.round(np.arange(0.0, 10.0 + 1e-9, 0.01), 10)
    scores = np.array([dual(m) for m in grid])
    k = int(np.argmin(scores))
    left, right = grid[max(k - 1, 0)], grid[min(k + 1, grid.size - 1)]
    if right > left:
        res = optimize.minimize_scalar(dual, bounds=(left, right), method="bounded", options={"xatol": 1e-8})
        if res.success and res.fun < scores[k]:
            return float(res.x)
    return float(grid[k])


__all__ = [
    "BidderEpisode",
    "ucbid_index",
    "ucbid",
    "bucket_values",
    "contextual_bid_learner",
    "PacingState",
    "pacing_bidder",
    "fluid_dual_multiplier",
]
