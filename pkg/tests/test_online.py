import numpy as np
import pytest
from hypothesis import given
from hypothesis import settings as hyp_settings
from hypothesis import strategies as st

from auctionlab.core.exceptions import ConfigError, DegenerateCompetition, RewardOutOfRange
from auctionlab.core.rng import stream
from auctionlab.models.dist import PointMass
from auctionlab.models.online import (
    EXP3,
    UCB,
    best_fixed_price,
    binary_search_pricing,
    cautious_epochs,
    cautious_search,
    make_bandit,
    optimal_anonymous_reserve,
    posted_price_bandit,
    price_grid,
    run_bandit,
    symmetric_reserve_learning,
)


def bernoulli_table(means, T, seed=0):
    rng = stream(seed, "table")
    return (rng.random((T, len(means))) < np.asarray(means)).astype(float)


def test_ucb_pulls_every_arm_first():
    episode = run_bandit("ucb", bernoulli_table([0.2, 0.5, 0.8], 50))
    np.testing.assert_array_equal(episode.arms[:3], [0, 1, 2])


def test_ucb_stochastic_regret():
    T = 5000
    episode = run_bandit("ucb", bernoulli_table([0.2, 0.8], T), seed=1)
    assert episode.regret / T < 0.1
    assert np.mean(episode.arms[-1000:] == 1) > 0.9


def test_exp3_adversarial_regret():
    """The better arm switches halfway; regret stays well below T / 4."""
    T = 2000
    table = np.zeros((T, 2))
    table[: T // 2, 1] = 1.0
    table[T // 2 :, 0] = 1.0
    episode = run_bandit("exp3", table, seed=2)
    assert episode.regret < 500
    frame = episode.to_frame(table)
    assert list(frame.columns) == ["t", "action", "reward", "cumulative_regret"]


def test_exp3_probabilities_sum_to_one():
    learner = EXP3(4, 100)
    learner.update(learner.select(stream(0, "exp3")), 0.3)
    assert learner.probabilities().sum() == pytest.approx(1.0)


def test_exp3_needs_rng():
    with pytest.raises(ConfigError):
        EXP3(2, 10).select()


def test_reward_out_of_range():
    with pytest.raises(RewardOutOfRange):
        UCB(2, 10).update(0, 1.5)


def test_unknown_bandit():
    with pytest.raises(ConfigError):
        make_bandit("thompson", 2, 10)


def test_price_grid():
    np.testing.assert_allclose(price_grid(0.3), [0.0, 0.3, 0.6, 0.9])
    with pytest.raises(ConfigError):
        price_grid(0.0)


def test_best_fixed_price():
    price, revenue = best_fixed_price([0.2, 0.5, 0.9])
    assert price == 0.5
    assert revenue == pytest.approx(1 / 3)


def test_posted_price_bandit(uniform):
    T = 10_000
    values = uniform.sample(T, stream(3, "buyers"))
    episode = posted_price_bandit(values, eps=0.1, stochastic=True, seed=3)
    assert set(np.round(episode.prices, 9)) <= set(np.round(price_grid(0.1), 9))
    assert episode.grid_regret <= episode.regret
    assert episode.revenue / T > 0.1
    assert episode.meta["algo"] == "ucb"
    assert episode.to_frame().shape == (T, 4)


def test_adversarial_posted_price_uses_exp3(uniform):
    values = uniform.sample(500, stream(4, "buyers"))
    episode = posted_price_bandit(values, eps=0.25, stochastic=False, seed=4)
    assert episode.meta["algo"] == "exp3"
    assert episode.meta["arms"] == 4


@pytest.mark.parametrize("T,epochs", [(2, 1), (16, 3), (1000, 5), (2**16, 5)])
def test_cautious_epochs(T, epochs):
    assert cautious_epochs(T) == epochs


def test_cautious_search_regret():
    """Five rejected offers at value 0.5, then the value itself is posted."""
    episode = cautious_search(0.5, 1000)
    assert episode.meta["epochs"] == 5
    assert episode.regret == pytest.approx(2.5)
    assert episode.prices[-1] == 0.5


@hyp_settings(max_examples=50, deadline=None)
@given(st.floats(min_value=0.0, max_value=1.0), st.integers(min_value=1, max_value=5000))
def test_cautious_search_regret_is_small(x, T):
    episode = cautious_search(x, T)
    assert -1e-9 <= episode.regret <= 2 * episode.meta["epochs"] + 2


def test_binary_search_pricing():
    episode = binary_search_pricing(0.3, 1024)
    assert 0.0 <= episode.regret < 12
    assert episode.prices[-1] <= 0.3


def test_optimal_anonymous_reserve(uniform):
    assert optimal_anonymous_reserve(uniform, 2) == pytest.approx(0.5, abs=1e-3)


def test_reserve_learning_uniform(uniform):
    T = 5000
    episode = symmetric_reserve_learning(uniform, 2, T, seed=5)
    assert episode.T == T
    assert np.all(np.diff(episode.reserves) >= 0)
    assert episode.reserves[0] == 0.0
    assert episode.optimal_reserve == pytest.approx(0.5, abs=1e-3)
    assert episode.optimal_revenue == pytest.approx(5 / 12, abs=1e-6)
    assert 0.0 <= episode.pseudo_regret / T < 0.05
    assert sum(e["length"] for e in episode.epochs) == T


@pytest.mark.parametrize("n", [2, 3])
def test_reserve_learning_reaches_point_mass(n):
    """A common value is posted from the second epoch on."""
    episode = symmetric_reserve_learning(PointMass(0.7), n, 5000, seed=1)
    reserves = [e["reserve"] for e in episode.epochs]
    assert reserves[0] == 0.0
    assert len(reserves) > 2
    assert reserves[1:] == pytest.approx([0.7] * (len(reserves) - 1))
    assert episode.pseudo_regret == pytest.approx(0.0, abs=1e-9)


def test_reserve_learning_needs_competition(uniform):
    with pytest.raises(DegenerateCompetition):
        symmetric_reserve_learning(uniform, 1, 100)
