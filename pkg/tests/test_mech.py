import numpy as np
import pytest
from hypothesis import given
from hypothesis import settings as hyp_settings
from hypothesis import strategies as st

from auctionlab.core.exceptions import ConfigError, InconsistentArity
from auctionlab.core.rng import stream
from auctionlab.models.dist import Uniform
from auctionlab.models.mech import (
    BoostedSecondPrice,
    FirstPrice,
    LLevel,
    MechanismKind,
    Myerson,
    SecondPriceAnonymous,
    SecondPriceEager,
    SecondPriceLazy,
    Vickrey,
    _VirtualBidMechanism,
    expected_metrics,
    run,
    sp_anonymous_expected_revenue,
)
from auctionlab.models.strategy import Linear

N_DRAWS = 200_000


def test_vickrey_second_highest_payment():
    outcome = run(Vickrey(), [0.3, 0.7, 0.5])
    assert outcome.winner == 1
    np.testing.assert_allclose(outcome.payments, [0.0, 0.5, 0.0])
    assert outcome.revenue == pytest.approx(0.5)


def test_ties_go_to_lowest_index():
    outcome = run(Vickrey(), [0.5, 0.5])
    assert outcome.winner == 0
    assert outcome.payments[0] == pytest.approx(0.5)


@pytest.mark.parametrize("bids,winner,price", [
    ([0.3, 0.7], 1, 0.6),
    ([0.3, 0.5], None, 0.0),
    ([0.8, 0.7], 0, 0.7),
])
def test_anonymous_reserve(bids, winner, price):
    outcome = run(SecondPriceAnonymous(0.6), bids)
    assert outcome.winner == winner
    assert outcome.revenue == pytest.approx(price)


def test_lazy_and_eager_reserves_differ():
    """Lazy drops the sale when the top bidder misses its reserve; eager removes it first."""
    bids = [0.7, 0.5]
    reserves = [0.8, 0.1]
    lazy = run(SecondPriceLazy(reserves), bids)
    eager = run(SecondPriceEager(reserves), bids)
    assert lazy.winner is None and lazy.revenue == 0.0
    assert eager.winner == 1
    assert eager.revenue == pytest.approx(0.1)


def test_lazy_pays_max_of_reserve_and_second_bid():
    outcome = run(SecondPriceLazy([0.2, 0.2]), [0.7, 0.5])
    assert outcome.winner == 0
    assert outcome.revenue == pytest.approx(0.5)


def test_arity_mismatch():
    with pytest.raises(InconsistentArity):
        run(SecondPriceLazy([0.1, 0.2]), [0.5, 0.4, 0.3])


@pytest.mark.parametrize("bids", [[-0.1, 0.5], [np.nan, 0.5], [np.inf, 0.2]])
def test_invalid_bids(bids):
    with pytest.raises(ConfigError):
        run(Vickrey(), bids)


def test_first_price():
    assert run(FirstPrice(), [0.3, 0.7]).revenue == pytest.approx(0.7)
    assert run(FirstPrice(reserve=0.8), [0.3, 0.7]).winner is None


def test_boosted_second_price():
    """Virtual bids 2 * 0.3 beat 0.5; the winner pays the boost-adjusted threshold."""
    outcome = run(BoostedSecondPrice([1.0, 2.0], [0.0, 0.0]), [0.5, 0.3])
    assert outcome.winner == 1
    assert outcome.payments[1] == pytest.approx(0.25)


@pytest.mark.parametrize("bids,winner,price", [
    ([0.7, 0.4], 0, 0.4),
    ([0.7, 0.65], 0, 0.65),
    ([0.7, 0.1], 0, 0.2),
    ([0.1, 0.15], None, 0.0),
])
def test_llevel(bids, winner, price):
    m = LLevel([[0.2, 0.6], [0.2, 0.6]])
    outcome = run(m, bids)
    assert outcome.winner == winner
    assert outcome.revenue == pytest.approx(price)


def test_llevel_rejects_decreasing_floors():
    with pytest.raises(ConfigError):
        LLevel([[0.6, 0.2]])


def test_myerson_uniform(uniform):
    """Symmetric uniform priors: reserve 0.5, then second price."""
    m = Myerson([uniform, uniform])
    np.testing.assert_allclose(m.reserves(), [0.5, 0.5], atol=1e-6)
    outcome = run(m, [0.7, 0.4])
    assert outcome.winner == 0
    assert outcome.payments[0] == pytest.approx(0.5, abs=1e-6)
    outcome = run(m, [0.7, 0.6])
    assert outcome.payments[0] == pytest.approx(0.6, abs=1e-6)
    assert run(m, [0.45, 0.3]).winner is None


@hyp_settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(min_value=0.0, max_value=10.0), min_size=1, max_size=6))
def test_vickrey_properties(bids):
    """The highest bid wins and pays at most its bid."""
    outcome = run(Vickrey(), bids)
    assert bids[outcome.winner] == max(bids)
    assert 0.0 <= outcome.revenue <= max(bids)


@hyp_settings(max_examples=50, deadline=None)
@given(
    st.lists(st.floats(min_value=0.0, max_value=1.0), min_size=2, max_size=2),
    st.lists(st.floats(min_value=0.0, max_value=1.0), min_size=2, max_size=2),
)
def test_truthful_bidders_never_lose_money(values, reserves):
    for mechanism in (SecondPriceLazy(reserves), SecondPriceEager(reserves)):
        outcome = run(mechanism, values)
        assert np.all(outcome.utilities(values) >= -1e-12)


DSIC_PRIORS = (Uniform(0.0, 1.0), Uniform(0.0, 2.0), Uniform(0.5, 1.0))
DSIC_MECHANISMS = {
    "vickrey": lambda: Vickrey(),
    "lazy": lambda: SecondPriceLazy([0.3, 0.6, 0.7]),
    "eager": lambda: SecondPriceEager([0.3, 0.6, 0.7]),
    "llevel": lambda: LLevel([[0.2, 0.5], [0.4, 0.9], [0.6, 0.8]]),
    "myerson": lambda: Myerson(list(DSIC_PRIORS)),
    "boosted": lambda: BoostedSecondPrice([1.0, 0.5, 2.0], [0.1, 0.2, 0.9]),
}


def _value_profiles(n_profiles, *keys):
    rng = stream(0, "profiles", *keys)
    return np.column_stack([p.sample(n_profiles, rng) for p in DSIC_PRIORS])


@pytest.mark.parametrize("name", sorted(DSIC_MECHANISMS))
def test_truthful_bidding_is_dominant(name):
    """On 1000 value profiles no bidder gains from any of 100 unilateral deviations."""
    mechanism = DSIC_MECHANISMS[name]()
    values = _value_profiles(1000, name)
    truthful = mechanism.allocate_and_pay(values).utilities(values)
    deviations = np.linspace(0.0, 2.0, 100)
    tiled = np.tile(values, (deviations.size, 1))
    for i in range(values.shape[1]):
        bids = tiled.copy()
        bids[:, i] = np.repeat(deviations, values.shape[0])
        deviant = mechanism.allocate_and_pay(bids).utilities(tiled)[:, i].reshape(deviations.size, -1)
        gain = float(np.max(deviant - truthful[None, :, i]))
        assert gain <= 1e-12, f"bidder {i} gains {gain} by deviating"


def test_myerson_ignores_bids_below_support():
    """A bid under the prior's lowest value never wins, even against no competition."""
    m = Myerson(list(DSIC_PRIORS))
    outcome = run(m, [0.0, 0.0, 0.4])
    assert outcome.winner is None
    assert outcome.revenue == 0.0



def test_virtual_bid_mechanism_needs_inversion():
    class Unpriced(_VirtualBidMechanism):
        kind = MechanismKind.BOOSTED_SP

        def virtual_bids(self, bids):
            return bids

    with pytest.raises(TypeError):
        Unpriced()


@pytest.mark.parametrize("r", [0.0, 0.4, 0.8])
def test_lazy_equals_eager_with_common_reserve(r):
    values = _value_profiles(5000, "common", r)
    lazy = SecondPriceLazy([r, r, r]).allocate_and_pay(values)
    eager = SecondPriceEager([r, r, r]).allocate_and_pay(values)
    np.testing.assert_array_equal(lazy.winners, eager.winners)
    np.testing.assert_array_equal(lazy.payments, eager.payments)


def test_single_level_auction_is_eager():
    """One level with floors equal to the personalized reserves reproduces eager reserves."""
    reserves = [0.3, 0.6, 0.7]
    values = _value_profiles(5000, "one-level")
    llevel = LLevel([[r] for r in reserves]).allocate_and_pay(values)
    eager = SecondPriceEager(reserves).allocate_and_pay(values)
    np.testing.assert_array_equal(llevel.winners, eager.winners)
    np.testing.assert_array_equal(llevel.payments, eager.payments)


def test_vickrey_expected_metrics(uniform):
    """Two uniform bidders: revenue 1/3, utility 1/6 each, welfare 2/3."""
    metrics = expected_metrics(Vickrey(), [uniform, uniform], n_draws=N_DRAWS, seed=1)
    assert metrics.revenue == pytest.approx(1 / 3, abs=4 * metrics.revenue_se)
    assert metrics.welfare == pytest.approx(2 / 3, abs=4 * metrics.welfare_se)
    for u, se in zip(metrics.utilities, metrics.utilities_se):
        assert u == pytest.approx(1 / 6, abs=4 * se)
    assert metrics.sale_rate == 1.0


def test_reserve_expected_metrics(uniform):
    """Anonymous reserve 0.5: revenue 5/12, utility 1/12 each, welfare 7/12."""
    metrics = expected_metrics(SecondPriceAnonymous(0.5), [uniform, uniform], n_draws=N_DRAWS, seed=2)
    assert metrics.revenue == pytest.approx(5 / 12, abs=4 * metrics.revenue_se)
    assert metrics.welfare == pytest.approx(7 / 12, abs=4 * metrics.welfare_se)
    assert metrics.utilities[0] == pytest.approx(1 / 12, abs=4 * metrics.utilities_se[0])
    assert metrics.sale_rate == pytest.approx(0.75, abs=0.01)


def test_myerson_expected_revenue(uniform):
    metrics = expected_metrics(Myerson([uniform, uniform]), [uniform, uniform], n_draws=N_DRAWS, seed=3)
    assert metrics.revenue == pytest.approx(5 / 12, abs=4 * metrics.revenue_se + 1e-4)


def test_linear_shading_in_first_price(uniform):
    """Bidding x/2 is the first-price equilibrium: revenue matches Vickrey."""
    metrics = expected_metrics(
        FirstPrice(), [uniform, uniform], [Linear(0.5), Linear(0.5)], n_draws=N_DRAWS, seed=4
    )
    assert metrics.revenue == pytest.approx(1 / 3, abs=4 * metrics.revenue_se)


def test_expected_metrics_independent_of_workers(uniform):
    """Sharded draws give bit-identical estimates for any worker count."""
    kwargs = dict(n_draws=150_000, seed=9)
    serial = expected_metrics(Vickrey(), [uniform, uniform], n_jobs=1, **kwargs)
    parallel = expected_metrics(Vickrey(), [uniform, uniform], n_jobs=2, **kwargs)
    assert serial.revenue == parallel.revenue
    np.testing.assert_array_equal(serial.utilities, parallel.utilities)


def test_expected_metrics_as_dict(uniform):
    out = expected_metrics(Vickrey(), [uniform, uniform], n_draws=1000).as_dict()
    assert {"revenue", "welfare", "sale_rate", "utility_0", "utility_1_se"} <= set(out)


def test_expected_metrics_arity(uniform):
    with pytest.raises(InconsistentArity):
        expected_metrics(SecondPriceLazy([0.1, 0.1, 0.1]), [uniform, uniform], n_draws=10)
    with pytest.raises(InconsistentArity):
        expected_metrics(Vickrey(), [uniform, uniform], [Linear(0.5)], n_draws=10)


@pytest.mark.parametrize("r,expected", [(0.0, 1 / 3), (0.5, 5 / 12), (1.0, 0.0)])
def test_sp_anonymous_expected_revenue(r, expected):
    assert sp_anonymous_expected_revenue(Uniform(0.0, 1.0), 2, r) == pytest.approx(expected, abs=1e-8)
