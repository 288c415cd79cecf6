import numpy as np
import pytest

from auctionlab.core.exceptions import DegenerateCompetition, NotRegular
from auctionlab.core.rng import stream
from auctionlab.models.dist import Discrete, EmpiricalDistribution, PointMass, Uniform
from auctionlab.models.equil import (
    bulow_klemperer_check,
    competitive_ratio,
    estimate_values_from_fp_bids,
    fp_best_response,
    fp_revenue_via_virtual_value,
    fp_symmetric_equilibrium,
    induced_bid_law,
    inflated_vickrey,
    inflated_vickrey_revenue,
    revenue_equivalence_check,
)
from auctionlab.models.strategy import Linear, Truthful

N_DRAWS = 200_000


@pytest.mark.parametrize("n,x", [(2, 0.6), (3, 0.6), (5, 0.9)])
def test_fp_symmetric_equilibrium_uniform(uniform, n, x):
    """On U[0, 1] the equilibrium bid is (n - 1) x / n."""
    beta = fp_symmetric_equilibrium(uniform, n)
    assert beta.repr_tag == "fp-symmetric"
    assert beta(x) == pytest.approx((n - 1) * x / n, abs=1e-4)


def test_fp_equilibrium_point_mass_is_truthful():
    assert isinstance(fp_symmetric_equilibrium(PointMass(0.7), 3), Truthful)


def test_fp_equilibrium_needs_competition(uniform):
    with pytest.raises(DegenerateCompetition):
        fp_symmetric_equilibrium(uniform, 1)


def test_fp_best_response_continuous(uniform):
    """Against a uniform highest bid, (x - b) b peaks at x / 2."""
    assert fp_best_response(0.8, uniform) == pytest.approx(0.4, abs=1e-8)


def test_fp_best_response_atomic_ties_to_lowest_bid():
    G = Discrete([0.2, 0.5], [0.5, 0.5])
    # (0.8 - 0.2) * 0.5 == (0.8 - 0.5) * 1.0
    assert fp_best_response(0.8, G) == 0.2


def test_fp_best_response_without_competition():
    assert fp_best_response(0.3, Uniform(0.5, 1.0)) == 0.3


def test_revenue_equivalence(uniform):
    res = revenue_equivalence_check(uniform, 2, n_draws=N_DRAWS, seed=5)
    assert res.sp_revenue == pytest.approx(1 / 3, abs=4 * res.sp_se)
    assert abs(res.gap) <= 4 * res.combined_se + 1e-3


def test_bulow_klemperer(uniform):
    """One extra bidder in Vickrey beats the optimal auction."""
    res = bulow_klemperer_check(uniform, 1, n_draws=N_DRAWS, seed=6)
    assert res.vickrey_np1 == pytest.approx(1 / 3, abs=4 * res.vickrey_np1_se)
    assert res.myerson_n == pytest.approx(1 / 4, abs=4 * res.myerson_n_se + 1e-4)
    assert res.vickrey_n == 0.0
    assert res.vickrey_np1 >= res.myerson_n - 4 * res.myerson_n_se


def test_bulow_klemperer_requires_regularity(irregular_mixture):
    with pytest.raises(NotRegular):
        bulow_klemperer_check(irregular_mixture, 2, n_draws=100)


@pytest.mark.parametrize("kind,expected", [("vickrey", 0.8), ("lazy", 1.0), ("eager", 1.0)])
def test_competitive_ratio_uniform(uniform, kind, expected):
    ratio = competitive_ratio(uniform, 2, kind, n_draws=N_DRAWS, seed=7)
    assert ratio == pytest.approx(expected, abs=0.01)


def test_induced_bid_law(uniform):
    G = induced_bid_law(uniform, Truthful(), 2, seed=3)
    assert isinstance(G, EmpiricalDistribution)
    assert G.cdf(0.5) == pytest.approx(0.25, abs=0.01)


def test_estimate_values_from_fp_bids():
    """Against competitors bidding x / 2, a bid of 0.2 reveals value 0.4."""
    G = Uniform(0.0, 0.5)
    np.testing.assert_allclose(estimate_values_from_fp_bids([0.2, 0.1], G), [0.4, 0.2])


def test_fp_revenue_via_virtual_value(uniform):
    """Per-bidder payment E[G(beta(X)) psi(X)] is 1/6 for two uniform bidders."""
    estimate, se = fp_revenue_via_virtual_value(uniform, Linear(0.5), Uniform(0.0, 0.5), N_DRAWS, seed=8)
    assert estimate == pytest.approx(1 / 6, abs=4 * se)


@pytest.mark.parametrize("bids,sold,price", [
    ([1.0, 0.6], True, 0.9),
    ([0.8, 0.6], False, 0.0),
])
def test_inflated_vickrey(bids, sold, price):
    outcome = inflated_vickrey(bids, eps=1.0, delta=0.5, rng=stream(0, "test"))
    assert outcome.allocated is sold
    assert outcome.revenue == pytest.approx(price)


def test_inflated_vickrey_without_inflation_is_vickrey():
    outcome = inflated_vickrey([0.8, 0.6], eps=0.0, delta=0.5, rng=stream(0, "test"))
    assert outcome.winner == 0
    assert outcome.revenue == pytest.approx(0.6)


def test_inflated_vickrey_unit_factor_sells_on_ties():
    """With delta = 0 every round is a Vickrey round, tied profiles included."""
    outcome = inflated_vickrey([0.5, 0.5], eps=1.0, delta=0.0, rng=stream(0, "test"))
    assert outcome.winner == 0
    assert outcome.revenue == pytest.approx(0.5)


def test_inflated_vickrey_revenue(uniform):
    revenue, se = inflated_vickrey_revenue([uniform, uniform], 0.0, 0.5, n_draws=N_DRAWS, seed=1)
    assert revenue == pytest.approx(1 / 3, abs=4 * se)
