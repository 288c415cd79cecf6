"""
Experiment Service Module

Runs validated experiment configurations: dispatches the named scenario to
the model modules, fans replications out over a joblib worker pool with
derived seeds, aggregates the per-replication metrics and persists the
report.
"""

import logging
import math
import time
import uuid
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional

import numpy as np
from joblib import Parallel, delayed

import auctionlab
from auctionlab.core.config import settings
from auctionlab.core.exceptions import AuctionLabError, ConfigError
from auctionlab.core.logging import run_context
from auctionlab.core.rng import derive_seed, stream
from auctionlab.models import batch, bidlearn, dynamic, equil, online, strat
from auctionlab.models.dist import Distribution, monopoly_price, monopoly_revenue, profit_curve
from auctionlab.models.mech import (
    MechanismKind,
    Myerson,
    SecondPriceAnonymous,
    SecondPriceEager,
    SecondPriceLazy,
    Vickrey,
    expected_metrics,
)
from auctionlab.models.strategy import Linear, Truthful
from auctionlab.schemas.distribution import MechanismSpec
from auctionlab.schemas.experiment import Aggregate, ExperimentConfig, RunReport
from auctionlab.utils.file_handler import FileHandler

logger = logging.getLogger(__name__)

# Inner Monte Carlo runs single-threaded; the pool parallelizes replications.
_INNER_JOBS = 1


@dataclass
class ScenarioContext:
    """Everything a scenario needs for one replication."""

    cfg: ExperimentConfig
    params: Any
    dists: List[Distribution]
    seed: int
    replication: int

    @property
    def F(self) -> Distribution:
        return self.dists[0]

    @property
    def opponent(self) -> Distribution:
        return self.dists[1] if len(self.dists) > 1 else self.dists[0]

    def sub_seed(self, *keys: Any) -> int:
        return derive_seed(self.seed, *keys)


@dataclass
class ScenarioOutcome:
    metrics: Dict[str, float]
    series: Dict[str, List[Dict[str, Any]]] = field(default_factory=dict)


Scenario = Callable[[ScenarioContext], ScenarioOutcome]
SCENARIOS: Dict[str, Scenario] = {}


def scenario(name: str) -> Callable[[Scenario], Scenario]:
    def register(func: Scenario) -> Scenario:
        SCENARIOS[name] = func
        return func

    return register


def _floats(d: Dict[str, Any]) -> Dict[str, float]:
    return {k: float(v) for k, v in d.items() if v is not None}


# Mechanism-level scenarios


@scenario("revenue-example")
def _revenue_example(ctx: ScenarioContext) -> ScenarioOutcome:
    """Vickrey with and without an anonymous reserve, on common value draws."""
    n_draws = ctx.cfg.n_draws
    plain = expected_metrics(Vickrey(), ctx.dists, None, n_draws, ctx.seed, _INNER_JOBS)
    reserved = expected_metrics(
        SecondPriceAnonymous(ctx.params.reserve), ctx.dists, None, n_draws, ctx.seed, _INNER_JOBS
    )
    return ScenarioOutcome(
        {
            "revenue": plain.revenue,
            "utility": float(plain.utilities[0]),
            "welfare": plain.welfare,
            "revenue_reserve": reserved.revenue,
            "utility_reserve": float(reserved.utilities[0]),
            "welfare_reserve": reserved.welfare,
            "revenue_se": plain.revenue_se,
            "revenue_reserve_se": reserved.revenue_se,
        }
    )


@scenario("expected-metrics")
def _expected_metrics(ctx: ScenarioContext) -> ScenarioOutcome:
    spec = ctx.cfg.mechanism or MechanismSpec(kind=MechanismKind.VICKREY)
    mechanism = spec.build(ctx.dists)
    alpha = ctx.params.alpha
    strategies = [Linear(alpha) for _ in ctx.dists] if alpha else None
    result = expected_metrics(
        mechanism, ctx.dists, strategies, ctx.cfg.n_draws, ctx.seed, _INNER_JOBS
    )
    return ScenarioOutcome(_floats(result.as_dict()))


@scenario("revenue-equivalence")
def _revenue_equivalence(ctx: ScenarioContext) -> ScenarioOutcome:
    res = equil.revenue_equivalence_check(ctx.F, ctx.cfg.n, ctx.cfg.n_draws, ctx.seed, _INNER_JOBS)
    return ScenarioOutcome(
        {
            "fp_revenue": res.fp_revenue,
            "sp_revenue": res.sp_revenue,
            "fp_se": res.fp_se,
            "sp_se": res.sp_se,
            "gap": res.gap,
            "combined_se": res.combined_se,
        }
    )


@scenario("bulow-klemperer")
def _bulow_klemperer(ctx: ScenarioContext) -> ScenarioOutcome:
    metrics: Dict[str, float] = {}
    rows = []
    for n in ctx.params.ns:
        res = equil.bulow_klemperer_check(
            ctx.F, n, ctx.cfg.n_draws, ctx.sub_seed("bk", n), _INNER_JOBS
        )
        metrics[f"vickrey_np1_n{n}"] = res.vickrey_np1
        metrics[f"myerson_n{n}"] = res.myerson_n
        metrics[f"vickrey_n{n}"] = res.vickrey_n
        metrics[f"ratio_n{n}"] = res.ratio
        rows.append({"n": n, "vickrey_revenue": res.vickrey_n, "myerson_revenue": res.myerson_n})
    return ScenarioOutcome(metrics, {"bk-curve": rows})


def _monopoly_mechanism(kind: str, dists: List[Distribution]) -> Any:
    reserves = [monopoly_price(d) for d in dists]
    if kind == "vickrey":
        return Vickrey()
    if kind == "lazy":
        return SecondPriceLazy(reserves)
    return SecondPriceEager(reserves)


@scenario("competitive-ratio")
def _competitive_ratio(ctx: ScenarioContext) -> ScenarioOutcome:
    kind = ctx.params.reserve_kind
    if ctx.cfg.distributions is None:
        ratio = equil.competitive_ratio(
            ctx.F, ctx.cfg.n, kind, ctx.cfg.n_draws, ctx.seed, _INNER_JOBS
        )
        return ScenarioOutcome({"ratio": ratio})
    # Asymmetric bidders: per-bidder monopoly reserves against Myerson on the same draws.
    numer = expected_metrics(
        _monopoly_mechanism(kind, ctx.dists), ctx.dists, None, ctx.cfg.n_draws, ctx.seed, _INNER_JOBS
    )
    denom = expected_metrics(
        Myerson(ctx.dists), ctx.dists, None, ctx.cfg.n_draws, ctx.seed, _INNER_JOBS
    )
    ratio = numer.revenue / denom.revenue if denom.revenue > 0 else math.nan
    return ScenarioOutcome(
        {"ratio": ratio, "revenue": numer.revenue, "myerson_revenue": denom.revenue}
    )


@scenario("profit-curve")
def _profit_curve(ctx: ScenarioContext) -> ScenarioOutcome:
    metrics: Dict[str, float] = {}
    rows: List[Dict[str, Any]] = []
    seen: Dict[str, int] = {}
    for spec in ctx.params.families:
        d = spec.build()
        label = d.family
        if label in seen:
            seen[label] += 1
            label = f"{label}-{seen[label]}"
        else:
            seen[label] = 0
        r, pi = profit_curve(d, ctx.params.points)
        rows.extend({"family": label, "r": float(a), "Pi_r": float(b)} for a, b in zip(r, pi))
        price = monopoly_price(d, require_finite_mean=False)
        metrics[f"monopoly_price_{label}"] = price
        metrics[f"monopoly_revenue_{label}"] = float(monopoly_revenue(d, price))
    return ScenarioOutcome(metrics, {"profit-curve": rows})


# Learning from samples


@scenario("sample-complexity")
def _sample_complexity(ctx: ScenarioContext) -> ScenarioOutcome:
    p = ctx.params
    sweep = batch.sample_complexity_sweep(
        ctx.F, p.Ts, p.seeds, p.learner, p.kappa, master_seed=ctx.seed, n_jobs=_INNER_JOBS
    )
    metrics: Dict[str, float] = {}
    for row in sweep.per_T:
        metrics[f"mean_ratio_T{row['T']}"] = row["mean_ratio"]
        metrics[f"p05_ratio_T{row['T']}"] = row["p05_ratio"]
    return ScenarioOutcome(metrics, {"sample-complexity": sweep.per_T})


def _learn(learner: str, train: batch.SampleSet, p: Any) -> batch.LearnedMechanismReport:
    if learner == "erm-anonymous":
        return batch.erm_anonymous_reserve(train)
    if learner == "lazy":
        reserves = batch.lazy_reserves_from_samples(train)
        mechanism = SecondPriceLazy(reserves)
        return batch.LearnedMechanismReport(
            mechanism=mechanism,
            empirical_revenue=batch.empirical_revenue(mechanism, train),
            evaluations=train.n,
            params={"reserves": reserves.tolist()},
        )
    if learner == "eager":
        return batch.local_search_eager(train)
    if learner == "boosted":
        return batch.search_boosted(train)
    return batch.search_llevel(train, p.levels, p.grid)


@scenario("learn-reserves")
def _learn_reserves(ctx: ScenarioContext) -> ScenarioOutcome:
    p = ctx.params
    train = batch.SampleSet.draw(ctx.dists, ctx.cfg.T, stream(ctx.seed, "learn", "train"))
    holdout = batch.SampleSet.draw(ctx.dists, p.holdout, stream(ctx.seed, "learn", "holdout"))
    oracle = expected_metrics(
        Myerson(ctx.dists), ctx.dists, None, ctx.cfg.n_draws, ctx.sub_seed("oracle"), _INNER_JOBS
    ).revenue
    report = batch.holdout_evaluation(_learn(p.learner, train, p), holdout, oracle)
    return ScenarioOutcome(
        _floats(
            {
                "empirical_revenue": report.empirical_revenue,
                "holdout_revenue": report.holdout_revenue,
                "ratio_to_oracle": report.ratio_to_oracle,
                "oracle_revenue": oracle,
                "evaluations": report.evaluations,
            }
        )
    )


# Online learning


def bandit_table(means: List[float], T: int, adversary: str, seed: int) -> np.ndarray:
    """
    Reward table for a bandit run.

    ``bernoulli`` draws independent Bernoulli(mean) rewards; ``switching``
    pays 1 on the last arm for the first half and on arm 0 afterwards.
    """
    K = len(means)
    if adversary == "switching":
        table = np.zeros((T, K))
        table[: T // 2, K - 1] = 1.0
        table[T // 2 :, 0] = 1.0
        return table
    rng = stream(seed, "bandit-table")
    return (rng.random((T, K)) < np.asarray(means)[None, :]).astype(float)


@scenario("online-bandit")
def _online_bandit(ctx: ScenarioContext) -> ScenarioOutcome:
    p = ctx.params
    table = bandit_table(p.means, ctx.cfg.T, p.adversary, ctx.seed)
    episode = online.run_bandit(p.algo, table, ctx.seed)
    return ScenarioOutcome({"regret": episode.regret, "reward": float(episode.rewards.sum())})


@scenario("posted-price")
def _posted_price(ctx: ScenarioContext) -> ScenarioOutcome:
    values = ctx.F.sample(ctx.cfg.T, stream(ctx.seed, "posted-price", "values"))
    episode = online.posted_price_bandit(values, ctx.params.eps, ctx.params.stochastic, ctx.seed)
    return ScenarioOutcome(
        _floats(
            {
                "regret": episode.regret,
                "grid_regret": episode.grid_regret,
                "revenue": episode.revenue,
            }
        )
    )


@scenario("cautious-search")
def _cautious_search(ctx: ScenarioContext) -> ScenarioOutcome:
    p = ctx.params
    if p.algo == "cautious":
        episode = online.cautious_search(p.x, ctx.cfg.T)
    else:
        episode = online.binary_search_pricing(p.x, ctx.cfg.T)
    return ScenarioOutcome({"regret": episode.regret, "revenue": episode.revenue})


@scenario("reserve-epochs")
def _reserve_epochs(ctx: ScenarioContext) -> ScenarioOutcome:
    episode = online.symmetric_reserve_learning(ctx.F, ctx.cfg.n, ctx.cfg.T, ctx.seed)
    return ScenarioOutcome(
        {
            "pseudo_regret": episode.pseudo_regret,
            "realized_regret": episode.realized_regret,
            "optimal_reserve": episode.optimal_reserve,
            "final_reserve": float(episode.reserves[-1]),
            "epochs": float(len(episode.epochs)),
        }
    )


# Bidder-side learning


@scenario("ucbid")
def _ucbid(ctx: ScenarioContext) -> ScenarioOutcome:
    competition = ctx.opponent.sample(ctx.cfg.T, stream(ctx.seed, "ucbid", "competition"))
    episode = bidlearn.ucbid(ctx.params.x, competition, ctx.seed)
    return ScenarioOutcome(_floats({k: episode.summary()[k] for k in ("regret", "spend", "wins", "utility")}))


@scenario("contextual-bid")
def _contextual_bid(ctx: ScenarioContext) -> ScenarioOutcome:
    spec = ctx.cfg.mechanism or MechanismSpec(kind=MechanismKind.VICKREY)
    mechanism = spec.build([ctx.F, ctx.opponent])
    episode = bidlearn.contextual_bid_learner(
        ctx.params.value_support,
        ctx.params.bid_grid,
        mechanism,
        ctx.cfg.T,
        ctx.seed,
        opponent=ctx.opponent,
    )
    return ScenarioOutcome(_floats({k: episode.summary()[k] for k in ("regret", "spend", "wins", "utility")}))


@scenario("pacing")
def _pacing(ctx: ScenarioContext) -> ScenarioOutcome:
    T = ctx.cfg.T
    values = ctx.F.sample(T, stream(ctx.seed, "pacing", "values"))
    competition = ctx.opponent.sample(T, stream(ctx.seed, "pacing", "competition"))
    budget = ctx.params.budget_fraction * T
    episode = bidlearn.pacing_bidder(values, competition, budget, ctx.params.gamma)
    oracle = bidlearn.fluid_dual_multiplier(values, competition, budget)
    return ScenarioOutcome(
        {
            "mu_final": episode.meta["mu_final"],
            "mu_avg": episode.meta["mu_avg"],
            "mu_oracle": oracle,
            "spend": episode.spend,
            "budget": budget,
            "utility": episode.utility,
            "wins": float(episode.wins.sum()),
        }
    )


# Strategic bidding


def _competing_bid_law(ctx: ScenarioContext) -> Distribution:
    if ctx.cfg.n <= 2:
        return ctx.opponent
    return equil.induced_bid_law(ctx.F, Truthful(), ctx.cfg.n - 1, ctx.sub_seed("competition"))


@scenario("shade")
def _shade(ctx: ScenarioContext) -> ScenarioOutcome:
    """Truthful, thresholded and optimal linear shading against truthful competition."""
    F, G = ctx.F, _competing_bid_law(ctx)
    r = ctx.params.r if ctx.params.r is not None else monopoly_price(F)
    mc_seed = ctx.sub_seed("strategic")

    truthful = strat.ShadedStrategy.build(Truthful(), F)
    thresholded = strat.thresholded_strategy(F, Truthful(), r)
    linear = strat.optimal_linear_alpha(F, G)
    t_out = strat.strategic_utility(truthful, G, ctx.cfg.n_draws, mc_seed)
    s_out = strat.strategic_utility(thresholded, G, ctx.cfg.n_draws, mc_seed)
    metrics = {
        "truthful_utility": t_out.utility,
        "truthful_payment": t_out.payment,
        "thresholded_utility": s_out.utility,
        "thresholded_payment": s_out.payment,
        "thresholded_utility_se": s_out.utility_se,
        "reserve_bid": thresholded.reserve_bid,
        "linear_alpha": linear.alpha,
        "linear_utility": linear.utility,
    }
    if ctx.cfg.n == 2:
        # Direct lazy second-price run: the seller's reserves are the monopoly prices of the bid laws.
        mechanism = SecondPriceLazy([thresholded.reserve_bid, monopoly_price(ctx.opponent)])
        direct = expected_metrics(
            mechanism,
            [F, ctx.opponent],
            [thresholded.strategy, Truthful()],
            ctx.cfg.n_draws,
            mc_seed,
            _INNER_JOBS,
        )
        metrics.update(
            {"welfare": direct.welfare, "revenue": direct.revenue, "direct_utility": float(direct.utilities[0])}
        )

    grid = np.linspace(F.lo, F.cap(), ctx.params.points)
    bids = Linear(linear.alpha)(grid)
    shaded = thresholded(grid)
    rows = [
        {"value": float(x), "truthful_bid": float(x), "linear_bid": float(b), "thresholded_bid": float(s)}
        for x, b, s in zip(grid, bids, shaded)
    ]
    return ScenarioOutcome(metrics, {"payoff-one-strategic": rows})


@scenario("linear-shading")
def _linear_shading(ctx: ScenarioContext) -> ScenarioOutcome:
    res = strat.optimal_linear_alpha(ctx.F, _competing_bid_law(ctx))
    return ScenarioOutcome(
        {"alpha": res.alpha, "utility": res.utility, "used_fallback": float(res.used_fallback)}
    )


@scenario("thresholded-nash")
def _thresholded_nash(ctx: ScenarioContext) -> ScenarioOutcome:
    n = ctx.cfg.n
    r = strat.thresholded_nash_reserve(ctx.F, n)
    s = strat.thresholded_strategy(ctx.F, Truthful(), r)
    dists = [ctx.F] * n
    eq = expected_metrics(
        SecondPriceLazy([s.reserve_bid] * n),
        dists,
        [s.strategy] * n,
        ctx.cfg.n_draws,
        ctx.seed,
        _INNER_JOBS,
    )
    vickrey = expected_metrics(Vickrey(), dists, None, ctx.cfg.n_draws, ctx.seed, _INNER_JOBS)
    return ScenarioOutcome(
        {
            "reserve": r,
            "equilibrium_revenue": eq.revenue,
            "equilibrium_revenue_se": eq.revenue_se,
            "vickrey_revenue": vickrey.revenue,
            "vickrey_revenue_se": vickrey.revenue_se,
        }
    )


@scenario("myerson-shading")
def _myerson_shading(ctx: ScenarioContext) -> ScenarioOutcome:
    """Every bidder shades to the equilibrium against a seller running Myerson on the bid laws."""
    n, F = ctx.cfg.n, ctx.F
    beta = strat.myerson_shading(F, n, ctx.params.grid_size)
    priors = [strat.bid_law(F, beta)] * n
    shaded = expected_metrics(
        Myerson(priors), [F] * n, [beta] * n, ctx.cfg.n_draws, ctx.seed, _INNER_JOBS
    )
    metrics = {f"utility_{i}": float(u) for i, u in enumerate(shaded.utilities)}
    metrics.update(
        {
            "utility_se": float(shaded.utilities_se[0]),
            "revenue": shaded.revenue,
            "beta_lo": float(beta(F.lo)),
            "beta_hi": float(beta(F.cap())),
        }
    )
    return ScenarioOutcome(metrics)


# Repeated games


@scenario("exploit-mean-based")
def _exploit_mean_based(ctx: ScenarioContext) -> ScenarioOutcome:
    T = ctx.cfg.T
    transcript = dynamic.exploit_mean_based(ctx.F, T, ctx.params.bidder_mode, ctx.seed)
    metrics = {
        "revenue": transcript.revenue,
        "revenue_per_round": transcript.revenue / T,
        "monopoly_revenue_per_round": float(monopoly_revenue(ctx.F, monopoly_price(ctx.F))),
    }
    for v, paid in transcript.revenue_by_value().items():
        metrics[f"share_{v:g}"] = paid / T
    return ScenarioOutcome(metrics)


@scenario("fee")
def _fee(ctx: ScenarioContext) -> ScenarioOutcome:
    out = dynamic.fee_mechanism(ctx.dists, ctx.cfg.n_draws, ctx.seed)
    metrics = {
        "seller_revenue": out.seller_revenue,
        "welfare": out.welfare,
        "losing_negative_share": out.losing_negative_share,
    }
    for i, (fee, u) in enumerate(zip(out.fees, out.buyer_utilities)):
        metrics[f"fee_{i}"] = float(fee)
        metrics[f"utility_{i}"] = float(u)
    return ScenarioOutcome(metrics)


@scenario("two-phase")
def _two_phase(ctx: ScenarioContext) -> ScenarioOutcome:
    p, T = ctx.params, ctx.cfg.T
    alpha = p.alpha if p.alpha is not None else T ** (-1.0 / 3.0)
    transcript = dynamic.two_phase_posted_price(
        ctx.F, p.gamma, T, alpha, p.buyer_mode, p.tau, ctx.seed
    )
    regret = dynamic.dynamic_regret(transcript, ctx.F)
    return ScenarioOutcome(
        {
            "regret": regret,
            "regret_scaled": regret / T ** (2.0 / 3.0),
            "pseudo_regret": dynamic.pseudo_regret(transcript, ctx.F),
            "posted_price": transcript.meta["posted_price"],
            "n_explore": float(transcript.meta["n_explore"]),
            "buyer_discounted_utility": transcript.meta["buyer_discounted_utility"],
        }
    )


def replication_seed(master: int, k: int, scenario_name: str) -> int:
    return derive_seed(master, k, scenario_name)


def _run_replication(cfg: ExperimentConfig, k: int, run_id: str) -> ScenarioOutcome:
    ctx = ScenarioContext(
        cfg=cfg,
        params=cfg.scenario_params(),
        dists=[spec.build() for spec in cfg.value_specs()],
        seed=replication_seed(cfg.seed, k, cfg.scenario),
        replication=k,
    )
    start = time.perf_counter()
    try:
        outcome = SCENARIOS[cfg.scenario](ctx)
    except AuctionLabError as exc:
        raise exc.__class__(f"scenario {cfg.scenario!r}, replication {k}: {exc.message}") from exc
    logger.info(
        "Replication finished",
        extra={
            "run_id": run_id,
            "scenario": cfg.scenario,
            "replication": k,
            "seed": ctx.seed,
            "duration": round(time.perf_counter() - start, 3),
        },
    )
    return outcome


def aggregate(replications: List[Dict[str, float]]) -> Dict[str, Aggregate]:
    """Mean, standard deviation and 5th/95th percentiles of every metric."""
    keys = list(replications[0]) if replications else []
    out = {}
    for key in keys:
        values = np.asarray([r.get(key, math.nan) for r in replications], dtype=float)
        out[key] = Aggregate(
            mean=float(values.mean()),
            std=float(values.std(ddof=1)) if values.size > 1 else 0.0,
            p05=float(np.quantile(values, 0.05)),
            p95=float(np.quantile(values, 0.95)),
        )
    return out


class ExperimentService:
    """
    Service for running experiment configurations.

    Replication ``k`` of a run draws every random number from streams keyed
    by ``(seed, k, scenario)``, so per-replication metrics are the same for
    any worker count and execution order.
    """

    def __init__(self, file_handler: Optional[FileHandler] = None):
        self.scenarios = SCENARIOS
        self.file_handler = file_handler or FileHandler()

    def run(self, cfg: ExperimentConfig) -> RunReport:
        """
        Run all replications of ``cfg`` and build the report.

        The report is written to ``cfg.output`` when set. Series come from
        replication 0.

        Raises:
            AuctionLabError: Module errors, prefixed with scenario and replication.
        """
        if cfg.scenario not in self.scenarios:
            raise ConfigError(f"unknown scenario {cfg.scenario!r}")
        jobs = cfg.n_jobs or settings.N_JOBS
        run_id = uuid.uuid4().hex[:12]
        with run_context(run_id):
            logger.info(
                "Experiment started",
                extra={
                    "scenario": cfg.scenario,
                    "replications": cfg.replications,
                    "seed": cfg.seed,
                    "n_jobs": jobs,
                },
            )
            start = time.perf_counter()
            if jobs == 1 or cfg.replications == 1:
                outcomes = [_run_replication(cfg, k, run_id) for k in range(cfg.replications)]
            else:
                outcomes = Parallel(n_jobs=jobs)(
                    delayed(_run_replication)(cfg, k, run_id) for k in range(cfg.replications)
                )
            elapsed = time.perf_counter() - start

            metrics = [o.metrics for o in outcomes]
            report = RunReport(
                schema_version=settings.SCHEMA_VERSION,
                version=auctionlab.__version__,
                scenario=cfg.scenario,
                config=cfg.model_dump(mode="json"),
                master_seed=cfg.seed,
                replications=metrics,
                aggregate=aggregate(metrics),
                series=outcomes[0].series if outcomes else {},
                wall_clock_seconds=elapsed,
            )
            if cfg.output:
                self.file_handler.write_json(report.model_dump(mode="json"), cfg.output)
            logger.info(
                "Experiment finished",
                extra={"scenario": cfg.scenario, "duration": round(elapsed, 3)},
            )
        return report


def run_experiment(cfg: ExperimentConfig) -> RunReport:
    """Run ``cfg`` with the default service."""
    return ExperimentService().run(cfg)


__all__ = [
    "SCENARIOS",
    "ScenarioContext",
    "ScenarioOutcome",
    "ExperimentService",
    "aggregate",
    "bandit_table",
    "replication_seed",
    "run_experiment",
]
