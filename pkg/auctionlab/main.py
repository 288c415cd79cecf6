"""
Command-line entry point.

Every subcommand runs either a validated experiment configuration
(``--config``, producing a JSON run report) or, without one, the matching
model operation directly, producing a CSV series.
"""

import argparse
import logging
import sys
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Tuple

import numpy as np
import pandas as pd
from pydantic import ValidationError

from auctionlab import __version__
from auctionlab.core.exceptions import AuctionLabError, ConfigError, InvalidConfig
from auctionlab.core.logging import setup_logging
from auctionlab.core.rng import stream
from auctionlab.models import batch, bidlearn, dynamic, equil, online, strat
from auctionlab.models.dist import Distribution, iron, monopoly_price
from auctionlab.models.mech import MechanismKind, expected_metrics
from auctionlab.models.strategy import Linear, Truthful
from auctionlab.schemas.distribution import DiscreteSpec, MechanismSpec, default_distribution
from auctionlab.schemas.experiment import (
    ContextualBidParams,
    ExperimentConfig,
    PacingParams,
    SampleComplexityParams,
)
from auctionlab.services.experiment_service import ExperimentService, bandit_table
from auctionlab.services.report_service import PLOT_COLUMNS, emit_plot_data, load_report
from auctionlab.utils.file_handler import FileHandler

logger = logging.getLogger("auctionlab.cli")

SUBCOMMAND_SCENARIOS: Dict[str, Tuple[str, ...]] = {
    "dist": ("profit-curve",),
    "simulate": ("revenue-example", "expected-metrics"),
    "equilibrium": ("revenue-equivalence", "bulow-klemperer", "competitive-ratio"),
    "learn": ("sample-complexity", "learn-reserves"),
    "online": ("online-bandit", "posted-price", "cautious-search", "reserve-epochs"),
    "bid": ("ucbid", "contextual-bid", "pacing"),
    "shade": ("shade", "linear-shading", "thresholded-nash", "myerson-shading"),
    "exploit": ("exploit-mean-based", "fee", "two-phase"),
}

# Value law of the mean-based exploitation example.
EXAMPLE_DISCRETE = [[0.25, 0.5], [0.5, 0.25], [1.0, 0.25]]
DEFAULT_ARM_MEANS = [0.5, 0.6]
POSTED_PRICE_EPS = 0.05


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="auctionlab",
        description="Auction simulation, reserve learning and strategic bidding experiments",
    )
    parser.add_argument("--version", action="version", version=f"auctionlab {__version__}")
    subparsers = parser.add_subparsers(dest="command", help="Command to run")

    def add(name: str, help_text: str) -> argparse.ArgumentParser:
        sub = subparsers.add_parser(name, help=help_text)
        sub.add_argument("--config", type=Path, help="Experiment configuration (JSON)")
        sub.add_argument("--seed", type=int, help="Master seed (overrides the configuration)")
        sub.add_argument("--out", type=Path, help="Output path")
        sub.add_argument("--family", help="Value distribution family")
        sub.add_argument("--n", type=int, default=2, help="Number of bidders")
        sub.add_argument("--T", type=int, default=10_000, help="Horizon or sample size")
        sub.add_argument("--draws", type=int, default=1_000_000, help="Monte Carlo draws")
        return sub

    add("dist", "Virtual values, ironing and monopoly price of a value law")
    simulate = add("simulate", "Expected revenue, utilities and welfare of a mechanism")
    simulate.add_argument("--auction", default="vickrey", help="Mechanism kind")
    simulate.add_argument("--r", type=float, default=0.0, help="Reserve price")
    equilibrium = add("equilibrium", "Bid functions at equilibrium")
    equilibrium.add_argument("--auction", default="first-price", choices=["first-price", "second-price"])
    learn = add("learn", "Learn a posted price from samples")
    learn.add_argument("--algo", default="empirical", choices=["empirical", "guarded"])
    online_cmd = add("online", "Online learning of arms, prices and reserves")
    online_cmd.add_argument(
        "--algo", default="ucb", choices=["ucb", "exp3", "posted-ucb", "cautious", "reserve-epochs"]
    )
    online_cmd.add_argument("--r", type=float, help="Buyer value for cautious search")
    bid = add("bid", "Bidder-side learning")
    bid.add_argument("--algo", default="ucbid", choices=["ucbid", "contextual", "pacing"])
    bid.add_argument("--auction", default="vickrey", help="Mechanism faced by the contextual learner")
    bid.add_argument("--r", type=float, help="Click-through value for ucbid")
    shade = add("shade", "Strategic shading against a seller setting reserves")
    shade.add_argument("--scheme", default="threshold", choices=["threshold", "linear", "myerson-eq"])
    shade.add_argument("--r", type=float, help="Threshold; the monopoly price if omitted")
    exploit = add("exploit", "Repeated games against learning or discounting buyers")
    exploit.add_argument("--scenario", default="mean-based", choices=["mean-based", "fee", "two-phase"])
    exploit.add_argument("--gamma", type=float, default=0.8, help="Buyer discount factor")
    report = subparsers.add_parser("report", help="Extract plotting data from a run report")
    report.add_argument("--config", type=Path, required=True, help="Run report (JSON)")
    report.add_argument("--kind", required=True, choices=sorted(PLOT_COLUMNS))
    report.add_argument("--seed", type=int, help=argparse.SUPPRESS)
    report.add_argument("--out", type=Path, help="CSV destination")
    return parser


def _handler(args: argparse.Namespace) -> FileHandler:
    return FileHandler(Path.cwd() if args.out else None)


def _target(args: argparse.Namespace, default: str) -> Path:
    return args.out if args.out else Path(default)


def _value_law(args: argparse.Namespace) -> Distribution:
    return default_distribution(args.family or "uniform")


def _mechanism_spec(kind: str, n: int, reserve: float) -> MechanismSpec:
    try:
        kind_enum = MechanismKind(kind)
    except ValueError:
        raise ConfigError(
            f"unknown auction {kind!r}; expected one of {[k.value for k in MechanismKind]}"
        ) from None
    try:
        return MechanismSpec(
            kind=kind_enum,
            reserve=reserve,
            reserves=[reserve] * n,
            boosts=[1.0] * n,
        )
    except ValidationError as exc:
        raise InvalidConfig(
            f"{kind} cannot be built from flags; use --config",
            [{"loc": e["loc"], "msg": e["msg"]} for e in exc.errors()],
        ) from exc


def _write_series(args: argparse.Namespace, frame: pd.DataFrame, default: str) -> Path:
    return _handler(args).write_frame(frame, _target(args, default))


def _write_summary(args: argparse.Namespace, summary: Dict[str, Any], default: str) -> Path:
    return _handler(args).write_json(summary, _target(args, default).with_suffix(".json"))


# Configuration mode


def run_config(args: argparse.Namespace) -> int:
    data = FileHandler.read_json(args.config)
    if args.seed is not None:
        data["seed"] = args.seed
    if args.out is not None:
        data["output"] = str(args.out.resolve())
    cfg = ExperimentConfig.parse(data)
    allowed = SUBCOMMAND_SCENARIOS[args.command]
    if cfg.scenario not in allowed:
        raise ConfigError(
            f"scenario {cfg.scenario!r} does not belong to '{args.command}'; expected one of {allowed}"
        )
    if cfg.output is None:
        cfg = cfg.model_copy(update={"output": f"{cfg.scenario}-{cfg.seed}.json"})
    report = ExperimentService().run(cfg)
    logger.info(
        "Report written",
        extra={"scenario": report.scenario, "output": cfg.output, "replications": len(report.replications)},
    )
    return 0


# Direct mode, one function per subcommand


def cmd_dist(args: argparse.Namespace) -> int:
    d = _value_law(args)
    table = iron(d)
    frame = pd.DataFrame(
        {
            "quantile": table.quantiles,
            "value": table.grid,
            "virtual_value": table.psi,
            "ironed_virtual_value": table.psi_ironed,
            "profit": table.profit,
        }
    )
    _write_series(args, frame, "dist.csv")
    price = monopoly_price(d, require_finite_mean=False)
    _write_summary(
        args,
        {"family": d.family, "monopoly_price": price, "regular": table.regular, "mhr": table.mhr},
        "dist.csv",
    )
    return 0


def cmd_simulate(args: argparse.Namespace) -> int:
    d = _value_law(args)
    dists = [d] * args.n
    mechanism = _mechanism_spec(args.auction, args.n, args.r).build(dists)
    seed = args.seed or 0
    metrics = expected_metrics(mechanism, dists, None, args.draws, seed)
    _write_series(args, pd.DataFrame([metrics.as_dict()]), "simulate.csv")
    return 0


def cmd_equilibrium(args: argparse.Namespace) -> int:
    d = _value_law(args)
    beta = equil.fp_symmetric_equilibrium(d, args.n) if args.auction == "first-price" else Truthful()
    values = np.linspace(d.lo, d.cap(), 1001)
    _write_series(args, pd.DataFrame({"value": values, "bid": beta.tabulate(values)}), "strategy.csv")
    return 0


def cmd_learn(args: argparse.Namespace) -> int:
    d = _value_law(args)
    params = SampleComplexityParams(Ts=[args.T], learner=args.algo)
    sweep = batch.sample_complexity_sweep(
        d, params.Ts, params.seeds, params.learner, params.kappa, master_seed=args.seed or 0
    )
    _write_series(args, pd.DataFrame(sweep.per_T), "learn.csv")
    _write_summary(args, sweep.to_dict(), "learn.csv")
    return 0


def cmd_online(args: argparse.Namespace) -> int:
    seed, T = args.seed or 0, args.T
    if args.algo in ("ucb", "exp3"):
        adversary = "bernoulli" if args.algo == "ucb" else "switching"
        table = bandit_table(DEFAULT_ARM_MEANS, T, adversary, seed)
        episode = online.run_bandit(args.algo, table, seed)
        frame, regret = episode.to_frame(table), episode.regret
    elif args.algo == "posted-ucb":
        values = _value_law(args).sample(T, stream(seed, "posted-price", "values"))
        episode = online.posted_price_bandit(values, POSTED_PRICE_EPS, True, seed)
        frame, regret = episode.to_frame(), episode.regret
    elif args.algo == "cautious":
        episode = online.cautious_search(0.5 if args.r is None else args.r, T)
        frame, regret = episode.to_frame(), episode.regret
    else:
        episode = online.symmetric_reserve_learning(_value_law(args), args.n, T, seed)
        frame, regret = episode.to_frame(), episode.pseudo_regret
    _write_series(args, frame, "episode.csv")
    _write_summary(args, {"algo": args.algo, "T": T, "regret": regret}, "episode.csv")
    return 0


def cmd_bid(args: argparse.Namespace) -> int:
    seed, T = args.seed or 0, args.T
    d = _value_law(args)
    if args.algo == "ucbid":
        competition = d.sample(T, stream(seed, "ucbid", "competition"))
        episode = bidlearn.ucbid(0.5 if args.r is None else args.r, competition, seed)
    elif args.algo == "contextual":
        params = ContextualBidParams()
        mechanism = _mechanism_spec(args.auction, 2, 0.0).build([d, d])
        episode = bidlearn.contextual_bid_learner(
            params.value_support, params.bid_grid, mechanism, T, seed, opponent=d
        )
    else:
        values = d.sample(T, stream(seed, "pacing", "values"))
        competition = d.sample(T, stream(seed, "pacing", "competition"))
        episode = bidlearn.pacing_bidder(values, competition, PacingParams().budget_fraction * T)
    _write_series(args, episode.to_frame(), "bidder.csv")
    summary = episode.summary()
    _write_summary(args, {k: summary[k] for k in ("T", "regret", "spend", "wins")}, "bidder.csv")
    return 0


def cmd_shade(args: argparse.Namespace) -> int:
    F = _value_law(args)
    if args.scheme == "threshold":
        r = args.r if args.r is not None else monopoly_price(F)
        shaded = strat.thresholded_strategy(F, Truthful(), r)
    elif args.scheme == "linear":
        result = strat.optimal_linear_alpha(F, F)
        shaded = strat.ShadedStrategy.build(Linear(result.alpha), F)
    else:
        shaded = strat.ShadedStrategy.build(strat.myerson_shading(F, args.n), F)
    frame = pd.DataFrame(
        {"value": shaded.grid, "bid": np.asarray(shaded(shaded.grid), dtype=float), "h": shaded.h}
    )
    _write_series(args, frame, "strategy.csv")
    _write_summary(
        args,
        {**shaded.describe(), "reserve_bid": shaded.reserve_bid},
        "strategy.csv",
    )
    return 0


def cmd_exploit(args: argparse.Namespace) -> int:
    seed, T = args.seed or 0, args.T
    if args.scenario == "mean-based":
        F = _value_law(args) if args.family else DiscreteSpec(atoms=EXAMPLE_DISCRETE).build()
        transcript = dynamic.exploit_mean_based(F, T, "oracle", seed)
    elif args.scenario == "fee":
        out = dynamic.fee_mechanism([_value_law(args)] * args.n, args.draws, seed)
        frame = pd.DataFrame(
            {
                "bidder": np.arange(out.fees.size),
                "fee": out.fees,
                "utility": out.buyer_utilities,
                "utility_se": out.buyer_utilities_se,
            }
        )
        _write_series(args, frame, "transcript.csv")
        _write_summary(args, {"seller_revenue": out.seller_revenue, "welfare": out.welfare}, "transcript.csv")
        return 0
    else:
        F = _value_law(args)
        transcript = dynamic.two_phase_posted_price(F, args.gamma, T, T ** (-1.0 / 3.0), seed=seed)
    _write_series(args, transcript.to_frame(), "transcript.csv")
    _write_summary(args, {"T": transcript.T, "revenue": transcript.revenue, **transcript.meta}, "transcript.csv")
    return 0


def cmd_report(args: argparse.Namespace) -> int:
    report = load_report(args.config)
    target = _target(args, f"{report.scenario}-{args.kind}.csv")
    emit_plot_data(report, args.kind, target, _handler(args))
    return 0


COMMANDS: Dict[str, Callable[[argparse.Namespace], int]] = {
    "dist": cmd_dist,
    "simulate": cmd_simulate,
    "equilibrium": cmd_equilibrium,
    "learn": cmd_learn,
    "online": cmd_online,
    "bid": cmd_bid,
    "shade": cmd_shade,
    "exploit": cmd_exploit,
    "report": cmd_report,
}


def main(argv: Optional[List[str]] = None) -> int:
    """Main entry point for the auctionlab command line."""
    parser = build_parser()
    args = parser.parse_args(argv)
    if not args.command:
        parser.print_help()
        return 2

    setup_logging()
    try:
        if args.command != "report" and args.config is not None:
            return run_config(args)
        return COMMANDS[args.command](args)
    except AuctionLabError as exc:
        logger.error(
            exc.message,
            extra={"command": args.command, "error": type(exc).__name__, "exit_code": exc.exit_code},
        )
        return exc.exit_code
    except Exception:
        logger.exception("Unexpected error", extra={"command": args.command})
        return 1


if __name__ == "__main__":
    sys.exit(main())
