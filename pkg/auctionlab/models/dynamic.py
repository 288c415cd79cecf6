"""
Dynamic Mechanisms Module

Repeated seller-versus-buyer games: exploiting mean-based bidders,
full-surplus extraction with entry fees, and the explore-then-commit
posted-price mechanism against discounted buyers.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Any, Dict, Optional, Sequence, Union

import numpy as np
import pandas as pd

from auctionlab.core.exceptions import ConfigError, RequiresDiscrete
from auctionlab.core.rng import derive_seed, stream
from auctionlab.models.dist import Discrete, Distribution, monopoly_price, monopoly_revenue
from auctionlab.models.mech import Vickrey, draw_values, expected_metrics
from auctionlab.models.online import EXP3
from auctionlab.utils.numerics import first_argmax

logger = logging.getLogger(__name__)

BUYER_MODES = ("oracle", "exp3", "ex-post-ir")
POSTED_BUYER_MODES = ("myopic-truthful", "threshold-liar")


@dataclass
class DynamicTranscript:
    """
    Round-by-round record of a repeated single-buyer mechanism.

    Attributes:
        prices: Price (or posted reserve) in force each round.
        bids: Buyer's bid each round.
        allocations: Whether the buyer received the item.
        payments: Payment each round.
        values: Buyer's value each round.
    """

    prices: np.ndarray
    bids: np.ndarray
    allocations: np.ndarray
    payments: np.ndarray
    values: np.ndarray
    meta: Dict[str, Any] = field(default_factory=dict)

    @property
    def T(self) -> int:
        return int(self.prices.size)

    @property
    def revenue(self) -> float:
        return float(self.payments.sum())

    @property
    def utilities(self) -> np.ndarray:
        return np.where(self.allocations, self.values, 0.0) - self.payments

    def discounted_utility(self, gamma: float) -> float:
        """``sum_t gamma^t u_t`` with ``t`` starting at 1."""
        weights = gamma ** np.arange(1, self.T + 1, dtype=float)
        return float(np.dot(weights, self.utilities))

    def revenue_by_value(self) -> Dict[float, float]:
        return {float(v): float(self.payments[self.values == v].sum()) for v in np.unique(self.values)}

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(
            {
                "t": np.arange(1, self.T + 1),
                "price": self.prices,
                "bid": self.bids,
                "allocated": self.allocations.astype(int),
                "payment": self.payments,
                "value": self.values,
            }
        )


class MeanBasedBidder:
    """
    Per-value learner over the bid set ``{0, 1}``.

    ``oracle`` keeps full-information cumulative utilities per value and
    plays the argmax (ties to bid 0); ``exp3`` runs one EXP3 instance per
    value on rewards ``(u + 1) / 2``; ``ex-post-ir`` bids 1 only when the
    current price leaves it a non-negative utility.
    """

    bids = np.array([0.0, 1.0])

    def __init__(self, values: Sequence[float], mode: str, T: int, seed: int = 0):
        if mode not in BUYER_MODES:
            raise ConfigError(f"bidder mode must be one of {BUYER_MODES}, got {mode!r}")
        self.mode = mode
        self.support = [float(v) for v in values]
        self.ledgers = {v: np.zeros(2) for v in self.support}
        self.learners = {v: EXP3(2, T) for v in self.support} if mode == "exp3" else {}
        self.rngs = {v: stream(seed, "mean-based", v) for v in self.support}
        self._last: Optional[int] = None

    def choose(self, v: float, price: float) -> int:
        if self.mode == "oracle":
            self._last = first_argmax(self.ledgers[v], rtol=0.0)
        elif self.mode == "exp3":
            self._last = self.learners[v].select(self.rngs[v])
        else:
            self._last = int(v - price >= 0)
        return self._last

    def observe(self, v: float, price: float) -> None:
        """Record the round for the value class ``v`` at this round's price."""
        utility = np.array([0.0, v - price])
        for w in self.support:
            self.ledgers[w] += np.array([0.0, w - price])
        if self.mode == "exp3" and self._last is not None:
            reward = (utility[self._last] + 1.0) / 2.0
            self.learners[v].update(self._last, min(max(reward, 0.0), 1.0))


def exploit_mean_based(
    F: Distribution, T: int, bidder_mode: str = "oracle", seed: int = 0
) -> DynamicTranscript:
    """
    Exploit a mean-based buyer: price 0 for the first half, price 1 afterwards.

    The item is allocated only on bid 1. A mean-based buyer keeps bidding 1
    in the second half while its cumulative utility from bid 1 stays positive.

    Raises:
        RequiresDiscrete: If ``F`` is not a discrete law.
    """
    if not isinstance(F, Discrete):
        raise RequiresDiscrete("the exploitation game needs a discrete value law")
    if T < 2 or T % 2:
        raise ConfigError("horizon must be a positive even number")
    values = F.sample(T, stream(seed, "exploit", "values"))
    prices = np.where(np.arange(1, T + 1) <= T // 2, 0.0, 1.0)
    bidder = MeanBasedBidder(F.atoms, bidder_mode, T, seed)

    bids = np.zeros(T)
    for t in range(T):
        v = float(values[t])
        bids[t] = bidder.bids[bidder.choose(v, prices[t])]
        bidder.observe(v, prices[t])
    allocations = bids == 1.0
    payments = np.where(allocations, prices, 0.0)
    transcript = DynamicTranscript(
        prices=prices,
        bids=bids,
        allocations=allocations,
        payments=payments,
        values=values,
        meta={"scenario": "mean-based", "bidder_mode": bidder_mode},
    )
    logger.info(
        "Mean-based exploitation finished",
        extra={"T": T, "mode": bidder_mode, "revenue_per_round": transcript.revenue / T},
    )
    return transcript


@dataclass(frozen=True)
class FeeOutcome:
    fees: np.ndarray
    seller_revenue: float
    buyer_utilities: np.ndarray
    buyer_utilities_se: np.ndarray
    welfare: float
    losing_negative_share: float


def fee_mechanism(
    dists: Sequence[Distribution], n_draws: int = 1_000_000, seed: int = 0
) -> FeeOutcome:
    """
    Vickrey auction preceded by entry fees equal to each bidder's expected Vickrey utility.

    Fees are estimated on one stream and the mechanism is evaluated on an
    independent one. Buyers are ex-ante, not interim, individually rational.
    """
    dists = list(dists)
    fee_est = expected_metrics(Vickrey(), dists, None, n_draws, derive_seed(seed, "fee", "fees"))
    fees = fee_est.utilities.copy()
    evaluation = expected_metrics(Vickrey(), dists, None, n_draws, derive_seed(seed, "fee", "eval"))
    utilities = evaluation.utilities - fees

    sample = draw_values(dists, min(n_draws, 100_000), stream(seed, "fee", "interim"))
    outcome = Vickrey().allocate_and_pay(sample)
    net = outcome.utilities(sample) - fees[None, :]
    losers = ~outcome.allocation()
    share = float((net[losers] < 0).mean()) if losers.any() else 0.0
    return FeeOutcome(
        fees=fees,
        seller_revenue=float(evaluation.revenue + fees.sum()),
        buyer_utilities=utilities,
        buyer_utilities_se=evaluation.utilities_se,
        welfare=evaluation.welfare,
        losing_negative_share=share,
    )


def _demand_estimate(
    offered: np.ndarray, accepted: np.ndarray, candidates: np.ndarray, window: Optional[float]
) -> np.ndarray:
    """Accept rate at each candidate price: in ``[p, p + window)``, or over all offers ``>= p``."""
    order = np.argsort(offered)
    prices = offered[order]
    hits = np.concatenate([[0], np.cumsum(accepted[order])])
    start = np.searchsorted(prices, candidates, side="left")
    if window is None:
        stop = np.full(candidates.shape, prices.size)
    else:
        stop = np.searchsorted(prices, candidates + window, side="left")
    offers = stop - start
    return np.where(offers > 0, (hits[stop] - hits[start]) / np.maximum(offers, 1), 0.0)


def two_phase_posted_price(
    F: Distribution,
    gamma: float,
    T: int,
    alpha: float,
    buyer_mode: str = "myopic-truthful",
    tau: float = 0.0,
    seed: int = 0,
    window: Union[None, float, str] = None,
) -> DynamicTranscript:
    """
    Explore with uniform random prices for ``ceil(alpha T)`` rounds, then post
    the price maximizing ``p * D_hat(p)`` fitted on the exploration data.

    ``D_hat(p)`` is the accept rate of all offers ``>= p``. A numeric
    ``window`` restricts it to offers in ``[p, p + window)``; ``"auto"``
    uses ``window = n1^(-1/3)``.
    A ``threshold-liar`` buyer rejects every exploration price above ``tau``.
    """
    if not 0.0 < gamma <= 1.0:
        raise ConfigError("gamma must lie in (0, 1]")
    if not 0.0 < alpha <= 1.0:
        raise ConfigError("alpha must lie in (0, 1]")
    if buyer_mode not in POSTED_BUYER_MODES:
        raise ConfigError(f"buyer mode must be one of {POSTED_BUYER_MODES}, got {buyer_mode!r}")
    n1 = min(T, math.ceil(round(alpha * T, 9)))
    values = F.sample(T, stream(seed, "two-phase", "values"))
    prices = np.zeros(T)
    prices[:n1] = stream(seed, "two-phase", "prices").random(n1)

    accepts = values[:n1] >= prices[:n1]
    if buyer_mode == "threshold-liar":
        accepts &= prices[:n1] <= tau

    width = n1 ** (-1.0 / 3.0) if window == "auto" else window
    candidates = np.unique(np.concatenate([[0.0], prices[:n1]]))
    demand = _demand_estimate(prices[:n1], accepts.astype(float), candidates, width)
    posted = float(candidates[first_argmax(candidates * demand)])
    prices[n1:] = posted

    allocations = np.concatenate([accepts, values[n1:] >= posted])
    payments = np.where(allocations, prices, 0.0)
    return DynamicTranscript(
        prices=prices,
        bids=np.where(allocations, prices, 0.0),
        allocations=allocations,
        payments=payments,
        values=values,
        meta={
            "scenario": "two-phase",
            "gamma": gamma,
            "alpha": alpha,
            "n_explore": n1,
            "posted_price": posted,
            "demand_window": width,
            "buyer_mode": buyer_mode,
            "buyer_discounted_utility": float(
                np.dot(gamma ** np.arange(1, T + 1, dtype=float),
                       np.where(allocations, values, 0.0) - payments)
            ),
        },
    )


def dynamic_regret(transcript: DynamicTranscript, F: Distribution) -> float:
    """Realized regret ``T * Pi(p*) - revenue`` against posting the monopoly price."""
    best = float(monopoly_revenue(F, monopoly_price(F)))
    return transcript.T * best - transcript.revenue


def pseudo_regret(transcript: DynamicTranscript, F: Distribution) -> float:
    """Expected regret ``sum_t (Pi(p*) - Pi(p_t))`` of the posted price sequence."""
    best = float(monopoly_revenue(F, monopoly_price(F)))
    return float(np.sum(best - np.asarray(monopoly_revenue(F, transcript.prices), dtype=float)))


__all__ = [
    "DynamicTranscript",
    "MeanBasedBidder",
    "exploit_mean_based",
    "FeeOutcome",
    "fee_mechanism",
    "two_phase_posted_price",
    "dynamic_regret",
    "pseudo_regret",
]
