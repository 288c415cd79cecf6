import numpy as np
import pytest
from hypothesis import given
from hypothesis import settings as hyp_settings
from hypothesis import strategies as st

from auctionlab.core.exceptions import (
    AllRemoved,
    ConfigError,
    DegenerateCompetition,
    EmptySample,
    InconsistentArity,
    SearchSpaceTooLarge,
)
from auctionlab.core.rng import stream
from auctionlab.models.batch import (
    ContextualReserve,
    SampleSet,
    anonymous_reserve_revenues,
    contextual_partition_reserve,
    dkw_epsilon,
    empirical_cdf,
    empirical_monopoly_price,
    empirical_revenue,
    erm_anonymous_reserve,
    guarded_empirical_monopoly_price,
    holdout_evaluation,
    lazy_reserves_from_samples,
    local_search_eager,
    sample_complexity_sweep,
    search_boosted,
    search_llevel,
)
from auctionlab.models.dist import Exponential, Uniform
from auctionlab.models.mech import BoostedSecondPrice, SecondPriceAnonymous, SecondPriceEager


@pytest.fixture
def uniform_samples(uniform):
    return SampleSet.draw([uniform, uniform], 2000, stream(11, "samples"))


def test_sample_set_validation():
    with pytest.raises(EmptySample):
        SampleSet(np.empty((0, 2)))
    with pytest.raises(ConfigError):
        SampleSet([[0.5, -0.1]])
    with pytest.raises(ConfigError):
        SampleSet([[0.5, np.nan]])
    with pytest.raises(InconsistentArity):
        SampleSet([[0.5, 0.4]], context=[[1.0], [2.0]])


def test_sample_set_shape():
    s = SampleSet([0.1, 0.2, 0.3])
    assert (s.T, s.n) == (3, 1)


def test_sample_set_csv(tmp_path):
    """Values and context features survive a CSV file."""
    s = SampleSet([[0.1, 0.7], [0.3, 0.2]], context=[[1.0], [2.0]])
    path = tmp_path / "samples.csv"
    s.to_csv(path)
    loaded = SampleSet.from_csv(path)
    np.testing.assert_array_equal(loaded.values, s.values)
    np.testing.assert_array_equal(loaded.context, s.context)


def test_sample_set_csv_needs_bidder_columns(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("a,b\n1,2\n")
    with pytest.raises(ConfigError):
        SampleSet.from_csv(path)


def test_empirical_cdf():
    F = empirical_cdf([0.2, 0.4, 0.4, 0.8])
    assert F.cdf(0.4) == pytest.approx(0.75)
    assert F.cdf(0.1) == 0.0
    with pytest.raises(EmptySample):
        empirical_cdf([])


def test_dkw_epsilon():
    assert dkw_epsilon(100, 0.05) == pytest.approx(0.13581, abs=1e-5)
    with pytest.raises(ConfigError):
        dkw_epsilon(0, 0.05)


@pytest.mark.parametrize("samples,price", [
    ([0.2, 0.5, 0.9], 0.5),
    ([1.0, 2.0], 1.0),
    ([3.0, 3.0, 1.0], 3.0),
])
def test_empirical_monopoly_price(samples, price):
    assert empirical_monopoly_price(samples) == price


@hyp_settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(min_value=0.0, max_value=100.0), min_size=1, max_size=30))
def test_empirical_monopoly_price_maximizes_revenue(samples):
    x = np.asarray(samples)
    revenue = [p * np.sum(x >= p) for p in x]
    price = empirical_monopoly_price(samples)
    assert price in x
    assert price * np.sum(x >= price) == pytest.approx(max(revenue))


def test_guarded_price_drops_largest_samples():
    assert guarded_empirical_monopoly_price([1.0, 2.0, 10.0], kappa=0.5) == 1.0
    assert guarded_empirical_monopoly_price([1.0, 2.0, 10.0], kappa=0.0) == 10.0


def test_guarded_price_all_removed():
    with pytest.raises(AllRemoved):
        guarded_empirical_monopoly_price([1.0, 2.0], kappa=0.99)


def test_anonymous_reserve_revenues_match_simulation(uniform_samples):
    """The prefix-sum formula agrees with running the auction row by row."""
    candidates = np.array([0.0, 0.25, 0.5, 0.77, uniform_samples.values[0, 0], 1.2])
    fast = anonymous_reserve_revenues(uniform_samples, candidates)
    slow = [empirical_revenue(SecondPriceAnonymous(r), uniform_samples) for r in candidates]
    np.testing.assert_allclose(fast, slow, atol=1e-12)


def test_anonymous_reserve_needs_two_bidders():
    with pytest.raises(DegenerateCompetition):
        anonymous_reserve_revenues(SampleSet([0.1, 0.2]), np.array([0.1]))


def test_erm_anonymous_reserve(uniform, uniform_samples):
    report = erm_anonymous_reserve(uniform_samples)
    assert isinstance(report.mechanism, SecondPriceAnonymous)
    assert report.mechanism.reserve == pytest.approx(0.5, abs=0.1)
    assert report.empirical_revenue >= empirical_revenue(SecondPriceAnonymous(0.0), uniform_samples)

    holdout = SampleSet.draw([uniform, uniform], 20_000, stream(12, "holdout"))
    report = holdout_evaluation(report, holdout, oracle_revenue=5 / 12)
    assert report.ratio_to_oracle == pytest.approx(1.0, abs=0.05)
    assert report.to_dict()["mechanism"]["kind"] == report.mechanism.kind.value


def test_lazy_reserves_from_samples():
    s = SampleSet([[0.2, 1.0], [0.5, 2.0], [0.9, 1.0]])
    np.testing.assert_allclose(lazy_reserves_from_samples(s), [0.5, 1.0])


def test_local_search_eager_improves_on_start(uniform_samples):
    start = [0.1, 0.1]
    report = local_search_eager(uniform_samples, init=start, grid_step=0.05)
    assert report.empirical_revenue >= empirical_revenue(SecondPriceEager(start), uniform_samples)
    assert report.evaluations > 1


def test_local_search_eager_arity(uniform_samples):
    with pytest.raises(InconsistentArity):
        local_search_eager(uniform_samples, init=[0.1])


def test_search_boosted(uniform_samples):
    monopoly = lazy_reserves_from_samples(uniform_samples)
    report = search_boosted(uniform_samples, boost_grid=[0.5, 1.0, 2.0])
    start = empirical_revenue(BoostedSecondPrice([1.0, 1.0], monopoly), uniform_samples)
    assert report.empirical_revenue >= start
    assert report.baseline_revenue == pytest.approx(
        empirical_revenue(SecondPriceEager(monopoly), uniform_samples)
    )


@pytest.mark.parametrize("seed", range(5))
def test_search_boosted_never_below_eager_baseline(seed):
    """Asymmetric bidders with few samples: the result never trails eager with monopoly reserves."""
    laws = [Uniform(0.0, 1.0), Uniform(0.0, 2.0), Uniform(0.2, 0.8), Uniform(0.0, 3.0)]
    samples = SampleSet.draw(laws, 40, stream(seed, "asymmetric"))
    report = search_boosted(samples, boost_grid=[1.0])
    assert report.empirical_revenue >= report.baseline_revenue
    assert report.empirical_revenue == pytest.approx(empirical_revenue(report.mechanism, samples))


def test_search_boosted_empty_grid(uniform_samples):
    with pytest.raises(ConfigError):
        search_boosted(uniform_samples, boost_grid=[])


def test_search_llevel(uniform_samples):
    report = search_llevel(uniform_samples, 1, [0.0, 0.5])
    assert report.evaluations == 4
    assert report.empirical_revenue >= empirical_revenue(SecondPriceAnonymous(0.0), uniform_samples)


def test_search_llevel_too_large(uniform_samples):
    with pytest.raises(SearchSpaceTooLarge):
        search_llevel(uniform_samples, 3, np.linspace(0.0, 1.0, 100))


def test_contextual_partition_reserve():
    """Two well-separated contexts get their own reserves."""
    values = np.array([[1.0, 0.5]] * 10 + [[10.0, 5.0]] * 10)
    context = np.array([0.0] * 10 + [1.0] * 10)
    s = SampleSet(values, context=context)

    def predictor(ctx):
        return ctx[:, 0]

    policy = contextual_partition_reserve(s, predictor, K=2)
    np.testing.assert_allclose(policy.thresholds, [0.5])
    np.testing.assert_allclose(policy.reserves, [1.0, 10.0])
    assert policy.evaluate(s, predictor) == pytest.approx(5.5)


def test_contextual_partition_needs_context(uniform_samples):
    with pytest.raises(ConfigError):
        contextual_partition_reserve(uniform_samples, lambda c: c, K=2)


def test_contextual_reserve_lookup():
    policy = ContextualReserve(thresholds=np.array([1.0, 2.0]), reserves=np.array([0.1, 0.2, 0.3]))
    np.testing.assert_allclose(policy.reserve_for([0.5, 1.0, 2.5]), [0.1, 0.2, 0.3])


def test_sample_complexity_sweep(uniform):
    report = sample_complexity_sweep(uniform, [50, 2000], seeds=20, master_seed=3)
    rows = {row["T"]: row for row in report.per_T}
    assert rows[2000]["mean_ratio"] >= 0.97
    assert all(row["mean_ratio"] <= 1.0 + 1e-6 for row in report.per_T)
    assert rows[2000]["p05_ratio"] <= rows[2000]["mean_ratio"]


def test_sample_complexity_sweep_independent_of_workers(uniform):
    serial = sample_complexity_sweep(uniform, [50, 200], seeds=6, master_seed=1, n_jobs=1)
    parallel = sample_complexity_sweep(uniform, [50, 200], seeds=6, master_seed=1, n_jobs=2)
    assert serial.per_T == parallel.per_T


def test_guarded_sweep_runs_on_heavy_tails():
    report = sample_complexity_sweep(Exponential(1.0), [100], seeds=5, learner="guarded", kappa=0.05)
    assert report.learner == "guarded"
    assert 0.0 < report.per_T[0]["mean_ratio"] <= 1.0 + 1e-6


def test_sweep_rejects_unknown_learner(uniform):
    with pytest.raises(ConfigError):
        sample_complexity_sweep(uniform, [10], seeds=2, learner="oracle")
