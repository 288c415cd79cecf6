import numpy as np
import pytest

from auctionlab.core.exceptions import ConfigError, RequiresDiscrete
from auctionlab.core.rng import stream
from auctionlab.models.dynamic import (
    DynamicTranscript,
    dynamic_regret,
    exploit_mean_based,
    fee_mechanism,
    pseudo_regret,
    two_phase_posted_price,
)


def test_exploit_oracle_bidder(example_discrete):
    """The mean-based buyer keeps paying 1 long after it stops being worth it."""
    T = 6000
    transcript = exploit_mean_based(example_discrete, T, "oracle", seed=1)
    assert transcript.revenue / T == pytest.approx(1 / 3, abs=0.03)
    assert transcript.payments[: T // 2].sum() == 0.0
    by_value = transcript.revenue_by_value()
    assert by_value[1.0] > by_value[0.25] > 0.0


def test_exploit_ex_post_ir_bidder(example_discrete):
    """A buyer who never overpays leaves only the top value class to exploit."""
    T = 6000
    transcript = exploit_mean_based(example_discrete, T, "ex-post-ir", seed=1)
    assert transcript.revenue / T == pytest.approx(0.125, abs=0.02)
    assert np.all(transcript.utilities >= 0.0)


def test_exploit_exp3_bidder(example_discrete):
    transcript = exploit_mean_based(example_discrete, 400, "exp3", seed=2)
    assert transcript.T == 400
    assert set(np.unique(transcript.bids)) <= {0.0, 1.0}
    assert transcript.to_frame().shape == (400, 6)


def test_exploit_needs_discrete_law(uniform):
    with pytest.raises(RequiresDiscrete):
        exploit_mean_based(uniform, 100)


@pytest.mark.parametrize("T", [0, 7])
def test_exploit_needs_even_horizon(example_discrete, T):
    with pytest.raises(ConfigError):
        exploit_mean_based(example_discrete, T)


def test_exploit_rejects_unknown_mode(example_discrete):
    with pytest.raises(ConfigError):
        exploit_mean_based(example_discrete, 10, "greedy")


def test_fee_mechanism_extracts_full_surplus(uniform):
    """Entry fees take each bidder's expected Vickrey utility of 1/6."""
    outcome = fee_mechanism([uniform, uniform], n_draws=200_000, seed=3)
    np.testing.assert_allclose(outcome.fees, [1 / 6, 1 / 6], atol=0.005)
    assert outcome.seller_revenue == pytest.approx(2 / 3, abs=0.01)
    np.testing.assert_allclose(outcome.buyer_utilities, [0.0, 0.0], atol=0.005)
    assert outcome.welfare == pytest.approx(outcome.seller_revenue, abs=0.01)
    assert outcome.losing_negative_share == 1.0


def test_two_phase_posted_price(uniform):
    T = 20_000
    transcript = two_phase_posted_price(uniform, gamma=0.99, T=T, alpha=0.2, seed=4)
    assert transcript.meta["n_explore"] == 4000
    assert transcript.meta["demand_window"] is None
    assert 0.25 <= transcript.meta["posted_price"] <= 0.75
    assert np.all(transcript.prices[4000:] == transcript.meta["posted_price"])
    assert pseudo_regret(transcript, uniform) / T < 0.06


def test_two_phase_windowed_demand_estimate(uniform):
    """The local-window estimator still lands near the monopoly price."""
    transcript = two_phase_posted_price(uniform, gamma=0.99, T=5000, alpha=0.5, seed=5, window="auto")
    assert transcript.meta["demand_window"] == pytest.approx(2500 ** (-1 / 3))
    assert 0.2 <= transcript.meta["posted_price"] <= 0.8


def test_two_phase_threshold_liar(uniform):
    """A buyer rejecting every positive exploration price drives the posted price to 0."""
    transcript = two_phase_posted_price(
        uniform, gamma=0.9, T=1000, alpha=0.3, buyer_mode="threshold-liar", tau=0.0, seed=6
    )
    assert transcript.meta["posted_price"] == 0.0
    assert transcript.revenue == 0.0
    assert transcript.meta["buyer_discounted_utility"] > 0.0


@pytest.mark.parametrize("kwargs", [
    {"gamma": 0.0},
    {"gamma": 1.5},
    {"alpha": 0.0},
    {"buyer_mode": "strategic"},
])
def test_two_phase_rejects_bad_parameters(uniform, kwargs):
    params = {"gamma": 0.9, "T": 100, "alpha": 0.5, **kwargs}
    with pytest.raises(ConfigError):
        two_phase_posted_price(uniform, **params)


def test_regret_of_fixed_monopoly_price(uniform):
    """Posting p* every round has no pseudo-regret; realized regret is T Pi(p*) minus revenue."""
    values = uniform.sample(2000, stream(7, "buyers"))
    prices = np.full(2000, 0.5)
    sold = values >= prices
    transcript = DynamicTranscript(
        prices=prices, bids=values, allocations=sold, payments=np.where(sold, prices, 0.0), values=values
    )
    assert pseudo_regret(transcript, uniform) == pytest.approx(0.0, abs=1e-6)
    assert dynamic_regret(transcript, uniform) == pytest.approx(2000 * 0.25 - transcript.revenue, abs=1e-6)


def test_discounted_utility():
    transcript = DynamicTranscript(
        prices=np.zeros(2),
        bids=np.zeros(2),
        allocations=np.array([True, True]),
        payments=np.zeros(2),
        values=np.ones(2),
    )
    assert transcript.discounted_utility(0.5) == pytest.approx(0.75)
