"""
Batch Learning Module

Learning mechanisms from i.i.d. value samples: empirical cdf, (guarded)
empirical monopoly prices, empirical revenue maximization over reserve
classes, L-level and boosted searches, contextual partition reserves and
sample-complexity sweeps.
"""

import itertools
import logging
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd
from joblib import Parallel, delayed

from auctionlab.core.config import settings
from auctionlab.core.exceptions import (
    AllRemoved,
    ConfigError,
    DegenerateCompetition,
    EmptySample,
    InconsistentArity,
    SearchSpaceTooLarge,
)
from auctionlab.core.rng import stream
from auctionlab.models.dist import (
    Distribution,
    EmpiricalDistribution,
    monopoly_price,
    monopoly_revenue,
)
from auctionlab.models.mech import (
    BoostedSecondPrice,
    LLevel,
    Mechanism,
    SecondPriceAnonymous,
    SecondPriceEager,
)
from auctionlab.utils.numerics import first_argmax

logger = logging.getLogger(__name__)

MAX_SEARCH_CANDIDATES = 1_000_000
MAX_PARTITION_BINS = 256
DEFAULT_BOOST_GRID = (0.5, 0.75, 1.0, 1.25, 1.5, 2.0)


@dataclass(frozen=True)
class SampleSet:
    """
    ``T`` i.i.d. value vectors (one column per bidder) with optional context features.

    Raises:
        EmptySample: If there are no rows.
        ConfigError: On negative or non-finite values.
    """

    values: np.ndarray
    context: Optional[np.ndarray] = None

    def __post_init__(self) -> None:
        values = np.asarray(self.values, dtype=float)
        if values.ndim == 1:
            values = values[:, None]
        if values.ndim != 2 or values.shape[0] == 0 or values.shape[1] == 0:
            raise EmptySample("sample set needs at least one row and one bidder")
        if not np.all(np.isfinite(values)) or np.any(values < 0):
            raise ConfigError("sample values must be finite and non-negative")
        object.__setattr__(self, "values", values)
        if self.context is not None:
            ctx = np.asarray(self.context, dtype=float)
            if ctx.ndim == 1:
                ctx = ctx[:, None]
            if ctx.shape[0] != values.shape[0]:
                raise InconsistentArity("context rows must match value rows")
            object.__setattr__(self, "context", ctx)

    @property
    def T(self) -> int:
        return int(self.values.shape[0])

    @property
    def n(self) -> int:
        return int(self.values.shape[1])

    @classmethod
    def from_csv(cls, path: Union[str, Path]) -> "SampleSet":
        """Read ``bidder_0,...,bidder_{n-1}[,ctx_0,...]`` rows."""
        frame = pd.read_csv(path)
        bidders = [c for c in frame.columns if c.startswith("bidder_")]
        contexts = [c for c in frame.columns if c.startswith("ctx_")]
        if not bidders:
            raise ConfigError(f"{path}: no bidder_* columns")
        bidders.sort(key=lambda c: int(c.split("_")[1]))
        contexts.sort(key=lambda c: int(c.split("_")[1]))
        return cls(
            values=frame[bidders].to_numpy(dtype=float),
            context=frame[contexts].to_numpy(dtype=float) if contexts else None,
        )

    def to_frame(self) -> pd.DataFrame:
        frame = pd.DataFrame(self.values, columns=[f"bidder_{i}" for i in range(self.n)])
        if self.context is not None:
            for j in range(self.context.shape[1]):
                frame[f"ctx_{j}"] = self.context[:, j]
        return frame

    def to_csv(self, path: Union[str, Path]) -> None:
        self.to_frame().to_csv(path, index=False, float_format="%.17g", lineterminator="\n")

    @classmethod
    def draw(
        cls, dists: Sequence[Distribution], T: int, rng: np.random.Generator
    ) -> "SampleSet":
        return cls(np.column_stack([d.sample(T, rng) for d in dists]))


@dataclass
class LearnedMechanismReport:
    """
    A learned mechanism and its revenue on the training sample.

    Attributes:
        mechanism: The fitted mechanism.
        empirical_revenue: Mean revenue on the training sample.
        holdout_revenue: Mean revenue on a disjoint sample, when evaluated.
        ratio_to_oracle: Holdout (or empirical) revenue over an oracle optimum.
        evaluations: Number of candidate mechanisms evaluated during the search.
        baseline_revenue: Empirical revenue of the reference mechanism, if any.
    """

    mechanism: Mechanism
    empirical_revenue: float
    holdout_revenue: Optional[float] = None
    ratio_to_oracle: Optional[float] = None
    evaluations: int = 0
    baseline_revenue: Optional[float] = None
    params: Dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "mechanism": self.mechanism.describe(),
            "empirical_revenue": self.empirical_revenue,
            "holdout_revenue": self.holdout_revenue,
            "ratio_to_oracle": self.ratio_to_oracle,
            "evaluations": self.evaluations,
            "baseline_revenue": self.baseline_revenue,
            "params": self.params,
        }


def _as_samples(samples: Any) -> np.ndarray:
    arr = np.asarray(samples, dtype=float).ravel()
    if arr.size == 0:
        raise EmptySample("no samples")
    return arr


def empirical_cdf(samples: Sequence[float]) -> EmpiricalDistribution:
    """Right-continuous empirical cdf; its quantiles are order statistics."""
    return EmpiricalDistribution(_as_samples(samples))


def dkw_epsilon(T: int, delta: float) -> float:
    """Sup-norm deviation bound ``sqrt(log(2 / delta) / (2 T))`` holding with prob ``1 - delta``."""
    if T < 1 or not 0 < delta < 1:
        raise ConfigError("dkw_epsilon needs T >= 1 and delta in (0, 1)")
    return math.sqrt(math.log(2.0 / delta) / (2.0 * T))


def empirical_monopoly_price(samples: Sequence[float]) -> float:
    """
    Sample point maximizing ``x * #{samples >= x}``.

    A sale at a price equal to a sample counts; ties go to the smallest maximizer.
    """
    x = _as_samples(samples)
    uniq, counts = np.unique(x, return_counts=True)
    at_least = x.size - np.concatenate([[0], np.cumsum(counts)[:-1]])
    return float(uniq[first_argmax(uniq * at_least)])


def guarded_empirical_monopoly_price(samples: Sequence[float], kappa: float) -> float:
    """
    Empirical monopoly price after dropping the ``ceil(kappa * T)`` largest samples.

    Raises:
        AllRemoved: If the guard removes every sample.
    """
    if not 0.0 <= kappa < 1.0:
        raise ConfigError("kappa must lie in [0, 1)")
    x = np.sort(_as_samples(samples))
    k = math.ceil(round(kappa * x.size, 9))
    if k >= x.size:
        raise AllRemoved(f"guard removes {k} of {x.size} samples")
    return empirical_monopoly_price(x[: x.size - k])


def empirical_revenue(mechanism: Mechanism, s: SampleSet) -> float:
    """Mean revenue of ``mechanism`` run truthfully on every row of ``s``."""
    return float(mechanism.allocate_and_pay(s.values).revenue.mean())


def _top_two_values(values: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    part = np.sort(values, axis=1)
    return part[:, -1], part[:, -2]


def anonymous_reserve_revenues(s: SampleSet, candidates: np.ndarray) -> np.ndarray:
    """
    Empirical second-price revenue for every anonymous reserve in ``candidates``.

    Uses ``R(r) = sum_{x1>=r} x2 + sum_{x2<r} (r - x2) - sum_{x1<r} (r - x2)``
    with sorted prefix sums.
    """
    if s.n < 2:
        raise DegenerateCompetition("anonymous reserve learning needs at least two bidders")
    x1, x2 = _top_two_values(s.values)
    order = np.argsort(x1, kind="stable")
    x1_sorted = x1[order]
    x2_by_x1 = np.concatenate([[0.0], np.cumsum(x2[order])])
    x2_sorted = np.sort(x2)
    x2_prefix = np.concatenate([[0.0], np.cumsum(x2_sorted)])

    r = np.asarray(candidates, dtype=float)
    i1 = np.searchsorted(x1_sorted, r, side="left")
    i2 = np.searchsorted(x2_sorted, r, side="left")
    above = x2_by_x1[-1] - x2_by_x1[i1]
    lifted = i2 * r - x2_prefix[i2]
    unsold = i1 * r - x2_by_x1[i1]
    return (above + lifted - unsold) / s.T


def erm_anonymous_reserve(s: SampleSet) -> LearnedMechanismReport:
    """Empirical revenue maximizer over second-price auctions with one anonymous reserve."""
    candidates = np.unique(np.concatenate([[0.0], s.values.ravel()]))
    revenue = anonymous_reserve_revenues(s, candidates)
    k = first_argmax(revenue)
    logger.info(
        "Anonymous reserve learned",
        extra={"reserve": float(candidates[k]), "revenue": float(revenue[k]), "T": s.T},
    )
    return LearnedMechanismReport(
        mechanism=SecondPriceAnonymous(float(candidates[k])),
        empirical_revenue=float(revenue[k]),
        evaluations=int(candidates.size),
    )


def lazy_reserves_from_samples(s: SampleSet) -> np.ndarray:
    """Per-bidder empirical monopoly prices."""
    return np.array([empirical_monopoly_price(s.values[:, i]) for i in range(s.n)])


def _reserve_grid(column: np.ndarray, extra: Sequence[float], step: Optional[float]) -> np.ndarray:
    parts = [np.quantile(column, np.linspace(0.1, 0.9, 9)), np.asarray(extra, dtype=float), [0.0]]
    if step:
        parts.append(np.arange(0.0, float(column.max()) + step, step))
    return np.unique(np.concatenate(parts))


def _coordinate_ascent(
    evaluate: Callable[[List[Any]], float],
    init: List[Any],
    grids: Sequence[Sequence[Any]],
    max_sweeps: int = 50,
) -> Tuple[List[Any], float, int]:
    """Coordinate ascent accepting strict improvements; returns (point, value, evaluations)."""
    current = list(init)
    best = evaluate(current)
    evaluations = 1
    for _ in range(max_sweeps):
        improved = False
        for i, grid in enumerate(grids):
            scores = []
            for c in grid:
                trial = list(current)
                trial[i] = c
                scores.append(evaluate(trial))
            evaluations += len(grid)
            k = first_argmax(np.asarray(scores))
            if scores[k] > best:
                best = scores[k]
                current[i] = grid[k]
                improved = True
        if not improved:
            break
    return current, best, evaluations


def local_search_eager(
    s: SampleSet,
    init: Optional[Sequence[float]] = None,
    grid_step: Optional[float] = None,
) -> LearnedMechanismReport:
    """
    Coordinate ascent over per-bidder eager reserves.

    Each bidder's grid is the deciles of its column, its empirical monopoly
    price, its initial reserve and optionally a regular grid of ``grid_step``.
    The result is a local optimum only.
    """
    monopoly = lazy_reserves_from_samples(s)
    start = monopoly if init is None else np.asarray(init, dtype=float)
    if start.size != s.n:
        raise InconsistentArity("init must provide one reserve per bidder")
    grids = [
        _reserve_grid(s.values[:, i], [monopoly[i], start[i]], grid_step).tolist()
        for i in range(s.n)
    ]

    def evaluate(r: List[float]) -> float:
        return empirical_revenue(SecondPriceEager(r), s)

    reserves, revenue, evaluations = _coordinate_ascent(evaluate, start.tolist(), grids)
    return LearnedMechanismReport(
        mechanism=SecondPriceEager(reserves),
        empirical_revenue=revenue,
        evaluations=evaluations,
        params={"init": start.tolist(), "grid_step": grid_step},
    )


def search_boosted(
    s: SampleSet,
    init_reserves: Optional[Sequence[float]] = None,
    boost_grid: Sequence[float] = DEFAULT_BOOST_GRID,
    reserve_grid: Optional[Sequence[float]] = None,
) -> LearnedMechanismReport:
    """
    Coordinate ascent over ``(boost_i, reserve_i)`` pairs of a boosted second-price auction.

    Starts from boosts of 1 and the given (default: monopoly) reserves. The
    eager second-price auction with monopoly reserves is reported as the
    baseline; with boosts of 1 the boosted auction ranks bidders by
    ``b_i - r_i``, which coincides with eager only for symmetric reserves.
    When the ascent ends below the baseline, the baseline mechanism is
    returned instead.
    """
    if len(boost_grid) == 0 or (reserve_grid is not None and len(reserve_grid) == 0):
        raise ConfigError("boost and reserve grids must be non-empty")
    monopoly = lazy_reserves_from_samples(s)
    start = monopoly if init_reserves is None else np.asarray(init_reserves, dtype=float)
    if start.size != s.n:
        raise InconsistentArity("init_reserves must provide one reserve per bidder")

    grids = []
    for i in range(s.n):
        if reserve_grid is None:
            reserves = _reserve_grid(s.values[:, i], [monopoly[i], start[i]], None)
        else:
            reserves = np.unique(np.concatenate([np.asarray(reserve_grid, dtype=float), [start[i]]]))
        boosts = np.unique(np.concatenate([np.asarray(boost_grid, dtype=float), [1.0]]))
        grids.append([(float(b), float(r)) for b in boosts for r in reserves])

    def evaluate(pairs: List[Tuple[float, float]]) -> float:
        boosts, reserves = zip(*pairs)
        return empirical_revenue(BoostedSecondPrice(boosts, reserves), s)

    init = [(1.0, float(r)) for r in start]
    pairs, revenue, evaluations = _coordinate_ascent(evaluate, init, grids)
    baseline = empirical_revenue(SecondPriceEager(monopoly), s)
    params = {"boost_grid": list(map(float, boost_grid))}
    if revenue < baseline:
        logger.warning(
            "Boosted search ended below the eager monopoly baseline; keeping the baseline",
            extra={"revenue": revenue, "baseline": baseline},
        )
        return LearnedMechanismReport(
            mechanism=SecondPriceEager(monopoly),
            empirical_revenue=baseline,
            evaluations=evaluations,
            baseline_revenue=baseline,
            params={**params, "fallback": "eager-monopoly"},
        )
    boosts, reserves = zip(*pairs)
    return LearnedMechanismReport(
        mechanism=BoostedSecondPrice(boosts, reserves),
        empirical_revenue=revenue,
        evaluations=evaluations,
        baseline_revenue=baseline,
        params=params,
    )


def search_llevel(s: SampleSet, L: int, grid: Sequence[float]) -> LearnedMechanismReport:
    """
    Exhaustive search of L-level floor matrices over ``grid``.

    Each bidder's floors are a sorted L-multiset of grid points.

    Raises:
        SearchSpaceTooLarge: Beyond one million candidate matrices.
    """
    if L < 1:
        raise ConfigError("L must be at least 1")
    points = np.unique(np.asarray(grid, dtype=float))
    if points.size == 0:
        raise ConfigError("grid must be non-empty")
    per_bidder = math.comb(points.size + L - 1, L)
    total = per_bidder**s.n
    if total > MAX_SEARCH_CANDIDATES:
        raise SearchSpaceTooLarge(f"{total} candidate floor matrices exceed {MAX_SEARCH_CANDIDATES}")

    rows = list(itertools.combinations_with_replacement(points.tolist(), L))
    best_floors, best_revenue = None, -np.inf
    for floors in itertools.product(rows, repeat=s.n):
        revenue = empirical_revenue(LLevel(floors), s)
        if revenue > best_revenue:
            best_floors, best_revenue = floors, revenue
    logger.info("L-level search finished", extra={"L": L, "candidates": total, "revenue": best_revenue})
    return LearnedMechanismReport(
        mechanism=LLevel(best_floors),
        empirical_revenue=float(best_revenue),
        evaluations=int(total),
        params={"L": L, "grid": points.tolist()},
    )


@dataclass(frozen=True)
class ContextualReserve:
    """Reserve ``r_k`` applied when the prediction falls in cell ``k``."""

    thresholds: np.ndarray
    reserves: np.ndarray

    def cells(self, predictions: Any) -> np.ndarray:
        return np.searchsorted(self.thresholds, np.asarray(predictions, dtype=float), side="right")

    def reserve_for(self, predictions: Any) -> np.ndarray:
        return self.reserves[self.cells(predictions)]

    def evaluate(self, s: SampleSet, predictor: Callable[[np.ndarray], np.ndarray]) -> float:
        """Mean second-price revenue with the per-row contextual reserve."""
        if s.context is None:
            raise ConfigError("contextual evaluation needs context features")
        r = self.reserve_for(predictor(s.context))
        if s.n == 1:
            x1, x2 = s.values[:, 0], np.zeros(s.T)
        else:
            x1, x2 = _top_two_values(s.values)
        return float(np.where(x1 >= r, np.maximum(r, x2), 0.0).mean())


def _variance_partition(predictions: np.ndarray, K: int) -> np.ndarray:
    """Thresholds splitting sorted predictions into at most K cells of minimal within-cell variance."""
    uniq, counts = np.unique(predictions, return_counts=True)
    if uniq.size > MAX_PARTITION_BINS:
        cum = np.cumsum(counts)
        cuts = np.searchsorted(cum, np.linspace(0, cum[-1], MAX_PARTITION_BINS + 1)[1:-1], side="left")
        edges = np.unique(np.concatenate([[0], cuts + 1, [uniq.size]]))
    else:
        edges = np.arange(uniq.size + 1)
    edges = edges[edges <= uniq.size]
    weight = np.add.reduceat(counts.astype(float), edges[:-1])
    s1 = np.add.reduceat(counts * uniq, edges[:-1])
    s2 = np.add.reduceat(counts * uniq**2, edges[:-1])
    B = weight.size
    K = min(K, B)

    cw = np.concatenate([[0.0], np.cumsum(weight)])
    c1 = np.concatenate([[0.0], np.cumsum(s1)])
    c2 = np.concatenate([[0.0], np.cumsum(s2)])

    def cost(i: np.ndarray, j: int) -> np.ndarray:
        w = cw[j] - cw[i]
        m1 = c1[j] - c1[i]
        return (c2[j] - c2[i]) - np.where(w > 0, m1**2 / np.where(w > 0, w, 1.0), 0.0)

    dp = np.full((K + 1, B + 1), np.inf)
    arg = np.zeros((K + 1, B + 1), dtype=int)
    dp[0, 0] = 0.0
    for k in range(1, K + 1):
        for j in range(k, B + 1):
            i = np.arange(k - 1, j)
            total = dp[k - 1, i] + cost(i, j)
            best = int(np.argmin(total))
            dp[k, j] = total[best]
            arg[k, j] = i[best]

    bounds = []
    j = B
    for k in range(K, 0, -1):
        j = arg[k, j]
        bounds.append(j)
    bin_starts = sorted(b for b in bounds if b > 0)
    first_uniq = edges[:-1]
    last_uniq = edges[1:] - 1
    return np.array([0.5 * (uniq[last_uniq[b - 1]] + uniq[first_uniq[b]]) for b in bin_starts])


def contextual_partition_reserve(
    s: SampleSet,
    predictor: Callable[[np.ndarray], np.ndarray],
    K: int,
) -> ContextualReserve:
    """
    Partition predicted values into ``K`` cells and learn a reserve per cell.

    Cells minimize within-cell variance of the predictions (dynamic program
    over at most 256 weighted bins); thresholds sit halfway between cells.
    Each cell's reserve is the empirical monopoly price of the highest
    values of its rows. Empty cells are merged into their right neighbour.
    """
    if s.context is None:
        raise ConfigError("contextual reserves need context features")
    if K < 1:
        raise ConfigError("K must be at least 1")
    pred = np.asarray(predictor(s.context), dtype=float).ravel()
    if pred.size != s.T:
        raise InconsistentArity("predictor must return one prediction per row")
    thresholds = _variance_partition(pred, K)
    top = s.values.max(axis=1)

    cells = np.searchsorted(thresholds, pred, side="right")
    right_edges = np.append(thresholds, np.inf)
    left_edges, reserves = [], []
    left = -np.inf
    for k in range(thresholds.size + 1):
        members = top[cells == k]
        if members.size == 0:
            continue
        left_edges.append(left)
        reserves.append(empirical_monopoly_price(members))
        left = right_edges[k]
    logger.debug("Contextual partition learned", extra={"K": K, "cells": len(reserves)})
    return ContextualReserve(
        thresholds=np.asarray(left_edges[1:], dtype=float), reserves=np.asarray(reserves)
    )


def holdout_evaluation(
    report: LearnedMechanismReport,
    holdout: SampleSet,
    oracle_revenue: Optional[float] = None,
) -> LearnedMechanismReport:
    """Attach holdout revenue (and the ratio to an oracle optimum) to ``report``."""
    revenue = empirical_revenue(report.mechanism, holdout)
    ratio = revenue / oracle_revenue if oracle_revenue else None
    return replace(report, holdout_revenue=revenue, ratio_to_oracle=ratio)


@dataclass
class SweepReport:
    """Per-``T`` ratios ``Pi(learned) / Pi(optimal)`` across seeds."""

    learner: str
    params: Dict[str, Any]
    per_T: List[Dict[str, float]]

    def to_dict(self) -> Dict[str, Any]:
        return {"learner": self.learner, "params": self.params, "per_T": self.per_T}


LEARNERS = ("empirical", "guarded")


def _sweep_cell(d: Distribution, T: int, seed: int, master: int, learner: str, kappa: float) -> float:
    samples = d.sample(T, stream(master, "sweep", T, seed))
    if learner == "guarded":
        return guarded_empirical_monopoly_price(samples, kappa)
    return empirical_monopoly_price(samples)


def sample_complexity_sweep(
    d: Distribution,
    Ts: Sequence[int],
    seeds: int,
    learner: str = "empirical",
    kappa: float = 0.05,
    master_seed: int = 0,
    n_jobs: Optional[int] = None,
) -> SweepReport:
    """
    Learn a posted price from ``T`` samples for every ``(T, seed)`` cell and
    report the mean and 5th-percentile revenue ratio per ``T``.
    """
    if learner not in LEARNERS:
        raise ConfigError(f"learner must be one of {LEARNERS}, got {learner!r}")
    if seeds < 1 or not Ts:
        raise ConfigError("sweep needs at least one T and one seed")
    optimum = float(monopoly_revenue(d, monopoly_price(d, require_finite_mean=False)))
    cells = [(int(T), k) for T in Ts for k in range(seeds)]
    jobs = n_jobs or settings.N_JOBS
    prices = Parallel(n_jobs=jobs)(
        delayed(_sweep_cell)(d, T, k, master_seed, learner, kappa) for T, k in cells
    )
    ratios = np.asarray(monopoly_revenue(d, np.asarray(prices)), dtype=float) / optimum
    ratios = ratios.reshape(len(Ts), seeds)
    per_T = [
        {
            "T": int(T),
            "mean_ratio": float(row.mean()),
            "p05_ratio": float(np.quantile(row, 0.05)),
            "std_error": float(row.std(ddof=1) / math.sqrt(seeds)) if seeds > 1 else 0.0,
        }
        for T, row in zip(Ts, ratios)
    ]
    logger.info("Sample complexity sweep finished", extra={"learner": learner, "cells": len(cells)})
    return SweepReport(
        learner=learner,
        params={"family": d.family, "Ts": [int(t) for t in Ts], "seeds": seeds, "kappa": kappa},
        per_T=per_T,
    )


__all__ = [
    "SampleSet",
    "LearnedMechanismReport",
    "ContextualReserve",
    "SweepReport",
    "empirical_cdf",
    "dkw_epsilon",
    "empirical_monopoly_price",
    "guarded_empirical_monopoly_price",
    "empirical_revenue",
    "anonymous_reserve_revenues",
    "erm_anonymous_reserve",
    "lazy_reserves_from_samples",
    "local_search_eager",
    "search_boosted",
    "search_llevel",
    "contextual_partition_reserve",
    "holdout_evaluation",
    "sample_complexity_sweep",
]
