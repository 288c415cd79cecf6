import logging
import math

import numpy as np
import pytest

from auctionlab.core.exceptions import ConfigError, InconsistentArity, NonpositiveBudget
from auctionlab.core.rng import stream
from auctionlab.models.bidlearn import (
    bucket_values,
    contextual_bid_learner,
    fluid_dual_multiplier,
    pacing_bidder,
    ucbid,
    ucbid_index,
)
from auctionlab.models.mech import FirstPrice, SecondPriceLazy, Vickrey

# Fluid multiplier for uniform values and competition at per-round budget 1/60.
PACING_MU = math.sqrt(10.0) - 1.0


def test_ucbid_index():
    assert ucbid_index(0.3, 0, 100) == 1.0
    assert ucbid_index(0.3, 10_000, 100) == pytest.approx(0.3 + 2 * math.sqrt(math.log(100) / 10_000))
    assert ucbid_index(0.9, 1, 100) == 1.0


def test_ucbid_stops_winning_against_high_competition():
    """With click value 0.5, the optimistic bid eventually falls below 0.9."""
    episode = ucbid(0.5, np.full(2000, 0.9), seed=1)
    assert episode.wins[:10].all()
    assert not episode.wins[-100:].any()
    assert episode.regret > 0


def test_ucbid_loses_ties():
    episode = ucbid(0.5, np.ones(200), seed=2)
    assert episode.wins.sum() == 0
    assert episode.regret == 0.0


def test_ucbid_rejects_bad_value():
    with pytest.raises(ConfigError):
        ucbid(1.5, [0.1])


def test_bucket_values():
    np.testing.assert_array_equal(bucket_values([0.0, 0.3, 0.99, 1.5], [0.0, 0.5, 1.0]), [0, 0, 1, 2])


@pytest.mark.parametrize("mechanism", [Vickrey(), FirstPrice()])
def test_contextual_bid_learner(mechanism):
    support = [0.25, 0.75]
    grid = np.linspace(0.0, 1.0, 11)
    episode = contextual_bid_learner(support, grid, mechanism, T=2000, seed=3)
    assert episode.T == 2000
    assert set(np.round(episode.bids, 9)) <= set(np.round(grid, 9))
    assert set(episode.values) <= set(support)
    assert episode.meta["reward_scale"] == pytest.approx(0.5)
    assert episode.meta["mechanism"] == mechanism.kind.value
    assert np.isfinite(episode.regret)


def test_contextual_bid_learner_is_deterministic():
    kwargs = dict(value_support=[0.5], bid_grid=[0.1, 0.3, 0.5], mechanism=Vickrey(), T=300, seed=4)
    first = contextual_bid_learner(**kwargs)
    second = contextual_bid_learner(**kwargs)
    np.testing.assert_array_equal(first.bids, second.bids)


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_contextual_learning_rate_uses_full_horizon(seed):
    """The EXP3 rate depends on T and the grid only, never on how often a value was drawn."""
    grid = np.linspace(0.0, 1.0, 11)
    episode = contextual_bid_learner([0.25, 0.75], grid, Vickrey(), T=2000, seed=seed, value_probs=[0.9, 0.1])
    assert episode.meta["learning_rate"] == pytest.approx(math.sqrt(math.log(11) / (11 * 2000)))


def test_contextual_bid_learner_arity():
    with pytest.raises(InconsistentArity):
        contextual_bid_learner([0.5], [0.5], SecondPriceLazy([0.1, 0.1, 0.1]), T=10)


def test_pacing_converges_to_fluid_multiplier(uniform):
    T = 40_000
    values = uniform.sample(T, stream(5, "values"))
    competition = uniform.sample(T, stream(5, "competition"))
    B = T / 60.0
    episode = pacing_bidder(values, competition, B, gamma=0.05)
    assert abs(episode.meta["mu_avg"] - PACING_MU) < 0.3
    assert abs(fluid_dual_multiplier(values, competition, B) - PACING_MU) < 0.15
    assert episode.spend <= B + 1.0
    assert episode.to_frame().shape == (T, 5)


def test_pacing_logs_budget_exhaustion(uniform, caplog):
    values = uniform.sample(1000, stream(6, "values"))
    competition = uniform.sample(1000, stream(6, "competition"))
    caplog.set_level(logging.WARNING, logger="auctionlab.models.bidlearn")
    episode = pacing_bidder(values, competition, B=0.5, gamma=0.0)
    assert episode.meta["exhausted_at"] is not None
    assert episode.bids[episode.meta["exhausted_at"]:].sum() == 0.0
    assert "Budget exhausted" in [r.getMessage() for r in caplog.records]


@pytest.mark.parametrize("budget", [0.0, -1.0])
def test_pacing_rejects_nonpositive_budget(budget):
    with pytest.raises(NonpositiveBudget):
        pacing_bidder([0.5], [0.2], budget)


def test_pacing_stream_lengths_must_match():
    with pytest.raises(InconsistentArity):
        pacing_bidder([0.5, 0.4], [0.2], 1.0)
