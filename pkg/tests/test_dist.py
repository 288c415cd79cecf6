import numpy as np
import pytest
from hypothesis import given
from hypothesis import settings as hyp_settings
from hypothesis import strategies as st

from auctionlab.core.exceptions import (
    AtomicDistribution,
    ConfigError,
    EmptySample,
    GridTooCoarse,
    OutOfSupport,
    Unbounded,
    ZeroDensity,
)
from auctionlab.core.rng import stream
from auctionlab.models.dist import (
    Discrete,
    EmpiricalDistribution,
    Exponential,
    GeneralizedPareto,
    HeavyTail,
    Mixture,
    Pareto,
    PointMass,
    PushforwardDistribution,
    Truncated,
    Uniform,
    iron,
    monopoly_price,
    monopoly_revenue,
    profit_curve,
    regularity_report,
    virtual_value,
)
from auctionlab.models.strategy import Linear


@pytest.mark.parametrize("x,expected", [(0.0, -1.0), (0.5, 0.0), (0.75, 0.5), (1.0, 1.0)])
def test_uniform_virtual_value(uniform, x, expected):
    """psi(x) = 2x - 1 on U[0, 1]."""
    assert virtual_value(uniform, x) == pytest.approx(expected)


def test_virtual_value_is_vectorized(uniform):
    out = virtual_value(uniform, np.array([0.25, 0.5]))
    np.testing.assert_allclose(out, [-0.5, 0.0])


def test_exponential_virtual_value():
    assert virtual_value(Exponential(2.0), 3.0) == pytest.approx(1.0)


def test_gpd_virtual_value_is_affine():
    """(1 - xi) x + xi mu - sigma."""
    d = GeneralizedPareto(mu=0.0, xi=-0.5, sigma=1.0)
    assert d.hi == pytest.approx(2.0)
    assert virtual_value(d, 1.0) == pytest.approx(0.5)


def test_virtual_value_outside_support(uniform):
    with pytest.raises(OutOfSupport):
        virtual_value(uniform, 1.5)


def test_virtual_value_zero_density():
    """Inside a gap of the support the virtual value is undefined."""
    gapped = Mixture((Uniform(0.0, 0.25), Uniform(0.75, 1.0)), (0.5, 0.5))
    with pytest.raises(ZeroDensity):
        virtual_value(gapped, 0.5)


def test_virtual_value_atomic(example_discrete):
    with pytest.raises(AtomicDistribution):
        virtual_value(example_discrete, 0.5)
    with pytest.raises(AtomicDistribution):
        virtual_value(PointMass(1.0), 1.0)


@pytest.mark.parametrize("d,price,revenue", [
    (Uniform(0.0, 1.0), 0.5, 0.25),
    (Exponential(1.0), 1.0, np.exp(-1.0)),
    (Uniform(2.0, 3.0), 2.0, 2.0),
])
def test_monopoly_price(d, price, revenue):
    p = monopoly_price(d)
    assert p == pytest.approx(price, abs=1e-4)
    assert monopoly_revenue(d, p) == pytest.approx(revenue, abs=1e-7)


def test_monopoly_price_ties_go_to_smallest(example_discrete):
    """Every atom of the example law earns 0.25; the smallest one is chosen."""
    assert monopoly_revenue(example_discrete, 0.25) == pytest.approx(0.25)
    assert monopoly_revenue(example_discrete, 1.0) == pytest.approx(0.25)
    assert monopoly_price(example_discrete) == 0.25


def test_monopoly_price_requires_finite_mean():
    d = HeavyTail()
    with pytest.raises(Unbounded):
        monopoly_price(d)
    price = monopoly_price(d, require_finite_mean=False)
    assert price == pytest.approx(1.0)
    assert monopoly_revenue(d, price) == pytest.approx(1.0)


@hyp_settings(max_examples=25, deadline=None)
@given(
    a=st.floats(min_value=0.0, max_value=5.0),
    width=st.floats(min_value=0.1, max_value=5.0),
)
def test_uniform_monopoly_price_property(a, width):
    """On U[a, b] the monopoly price is max(a, b / 2)."""
    b = a + width
    assert monopoly_price(Uniform(a, b)) == pytest.approx(max(a, b / 2.0), abs=1e-4 * b)


def test_discrete_cdf_and_quantile(example_discrete):
    assert example_discrete.cdf(0.5) == pytest.approx(0.75)
    assert example_discrete.cdf_left(0.5) == pytest.approx(0.5)
    assert example_discrete.acceptance(0.5) == pytest.approx(0.5)
    assert example_discrete.quantile(0.5) == 0.25
    assert example_discrete.quantile(0.6) == 0.5
    assert example_discrete.mean() == pytest.approx(0.5)


@pytest.mark.parametrize("atoms,probs", [
    ([], []),
    ([0.5, 1.0], [0.5, 0.6]),
    ([-1.0], [1.0]),
])
def test_discrete_rejects_bad_input(atoms, probs):
    with pytest.raises(ConfigError):
        Discrete(atoms, probs)


def test_empirical_distribution():
    d = EmpiricalDistribution([0.3, 0.1, 0.3, 0.9])
    assert d.size == 4
    assert d.cdf(0.3) == pytest.approx(0.75)
    with pytest.raises(EmptySample):
        EmpiricalDistribution([])


def test_uniform_rejects_bad_bounds():
    with pytest.raises(ConfigError):
        Uniform(1.0, 0.5)


def test_truncated_law_is_normalized():
    d = Truncated(Exponential(1.0), 0.0, 1.0)
    assert d.cdf(1.0) == pytest.approx(1.0)
    assert d.cdf(0.0) == pytest.approx(0.0)
    assert d.quantile(1.0) == pytest.approx(1.0)


def test_mixture_quantile_inverts_cdf(irregular_mixture):
    q = np.array([0.1, 0.5, 0.9])
    np.testing.assert_allclose(irregular_mixture.cdf(irregular_mixture.quantile(q)), q, atol=1e-9)


def test_mixture_sampling_matches_cdf(irregular_mixture):
    draws = irregular_mixture.sample(50_000, stream(0, "test"))
    assert np.mean(draws <= 0.5) == pytest.approx(0.75, abs=0.01)


def test_pushforward_law():
    d = PushforwardDistribution(Uniform(0.0, 1.0), Linear(0.5))
    assert d.hi == pytest.approx(0.5)
    assert d.cdf(0.25) == pytest.approx(0.5)
    assert d.quantile(0.5) == pytest.approx(0.25)


@pytest.mark.parametrize("d,regular,mhr", [
    (Uniform(0.0, 1.0), True, True),
    (Exponential(1.0), True, True),
    (Pareto(alpha=2.0, xm=1.0), True, False),
])
def test_regularity_report(d, regular, mhr):
    assert regularity_report(d) == (regular, mhr)


def test_regular_law_needs_no_ironing(uniform):
    table = iron(uniform)
    assert table.regular
    assert table.ironed_intervals() == []
    np.testing.assert_allclose(table.psi_ironed, 2.0 * table.grid - 1.0, atol=1e-6)


def test_ironing_flattens_irregular_law(irregular_mixture):
    """The ironed virtual value is non-decreasing even where psi drops."""
    table = iron(irregular_mixture)
    assert not table.regular
    assert np.any(np.diff(table.psi) < -0.1)
    assert np.all(np.diff(table.psi_ironed) >= -1e-12)
    intervals = table.ironed_intervals()
    assert len(intervals) >= 1
    lo, hi = intervals[0]
    assert lo < 0.5 < hi
    assert np.all(table.envelope >= table.profit - 1e-12)


def test_ironing_atomic_law(example_discrete):
    table = iron(example_discrete)
    np.testing.assert_array_equal(table.grid, [0.25, 0.5, 1.0])
    assert np.all(np.diff(table.psi_ironed) >= -1e-12)


def test_ironing_grid_too_coarse(uniform):
    with pytest.raises(GridTooCoarse):
        iron(uniform, grid_size=8)


def test_profit_curve(uniform):
    r, pi = profit_curve(uniform, 5)
    np.testing.assert_allclose(r, [0.0, 0.25, 0.5, 0.75, 1.0])
    np.testing.assert_allclose(pi, [0.0, 0.1875, 0.25, 0.1875, 0.0])
