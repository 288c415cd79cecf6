"""
Equilibrium Module

Best responses and the symmetric equilibrium of the first-price auction,
plus the classical cross-checks: revenue equivalence, Bulow-Klemperer,
the Vickrey/Myerson competitive ratio and the randomized inflated Vickrey
auction.
"""

import logging
from dataclasses import dataclass
from typing import Any, Optional, Sequence

import numpy as np
from scipy import integrate, optimize

from auctionlab.core.config import settings
from auctionlab.core.exceptions import (
    AtomicDistribution,
    ConfigError,
    DegenerateCompetition,
    NoDensity,
    NotRegular,
    OutOfSupport,
    ZeroDensity,
)
from auctionlab.core.rng import stream
from auctionlab.models.dist import (
    Distribution,
    EmpiricalDistribution,
    PointMass,
    monopoly_price,
    regularity_report,
)
from auctionlab.models.mech import (
    AuctionOutcome,
    BatchOutcome,
    FirstPrice,
    Myerson,
    SecondPriceEager,
    SecondPriceLazy,
    Vickrey,
    _as_profiles,
    _top_two,
    draw_values,
    expected_metrics,
)
from auctionlab.models.strategy import GridStrategy, Strategy, Truthful
from auctionlab.utils.numerics import first_argmax, mean_and_stderr

logger = logging.getLogger(__name__)

BEST_RESPONSE_BRACKETS = 512
INDUCED_LAW_SAMPLES = 100_000


def fp_best_response(x: float, G: Distribution, brackets: int = BEST_RESPONSE_BRACKETS) -> float:
    """
    First-price best response to a competing highest-bid law ``G``.

    Maximizes ``(x - b) G(b)`` over ``b in [0, x]``. For continuous ``G`` the
    stationary points of the utility are bracketed on a grid and refined with
    Brent's method; the global maximizer among them and the endpoints is
    returned. For atomic ``G`` every atom below ``x`` is a candidate.

    Args:
        x: The bidder's value.
        G: Law of the highest competing bid.
        brackets: Number of grid cells used to bracket stationary points.

    Returns:
        The best-response bid in ``[0, x]``.

    Raises:
        NoDensity: If ``G`` is neither atomic nor equipped with a density.
    """
    if x < 0:
        raise ConfigError("value must be non-negative")
    if float(G.cdf(x)) <= 0.0:
        return float(x)

    if G.is_atomic:
        atoms = np.asarray(G.atoms, dtype=float)
        atoms = atoms[(atoms >= 0) & (atoms <= x)]
        if atoms.size == 0:
            return float(x)
        utility = (x - atoms) * np.asarray(G.cdf(atoms), dtype=float)
        return float(atoms[first_argmax(utility)])

    lo = max(float(G.lo), 0.0)
    try:
        G.pdf(lo)
    except AtomicDistribution as exc:
        raise NoDensity(f"{G.family} law has no density") from exc

    def utility(b: Any) -> Any:
        return (x - b) * np.asarray(G.cdf(b), dtype=float)

    def slope(b: float) -> float:
        return float((x - b) * G.pdf(b) - G.cdf(b))

    grid = np.linspace(lo, x, brackets + 1)
    derivs = np.array([slope(b) for b in grid])
    candidates = [lo, float(x)]
    for k in np.flatnonzero(np.sign(derivs[:-1]) * np.sign(derivs[1:]) < 0):
        candidates.append(optimize.brentq(slope, grid[k], grid[k + 1], xtol=1e-13))
    candidates.extend(grid[np.flatnonzero(derivs == 0.0)].tolist())
    candidates = np.unique(np.asarray(candidates, dtype=float))
    return float(candidates[first_argmax(np.asarray(utility(candidates)))])


def fp_symmetric_equilibrium(
    d: Distribution, n: int, grid_size: Optional[int] = None
) -> Strategy:
    """
    Symmetric Bayes-Nash equilibrium of the first-price auction.

    ``beta(x) = E[Y | Y < x]`` where ``Y`` is the highest of ``n - 1`` other
    values, tabulated on a quantile grid with the integral taken by composite
    trapezoid in ``u = q^(n-1)``. A point mass yields truthful bidding.

    Raises:
        DegenerateCompetition: If ``n < 2``.
    """
    if n < 2:
        raise DegenerateCompetition("first-price equilibrium needs at least two bidders")
    if isinstance(d, PointMass):
        return Truthful()
    if d.is_atomic:
        raise ConfigError("first-price equilibrium is tabulated for continuous value laws only")

    g = grid_size or settings.STRATEGY_GRID
    q = np.linspace(0.0, 1.0, g)
    if not np.isfinite(d.hi):
        q[-1] = 1.0 - settings.QUANTILE_CAP
    x = np.asarray(d.quantile(q), dtype=float)
    u = q ** (n - 1)
    numer = integrate.cumulative_trapezoid(x, u, initial=0.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        beta = np.where(u > 0, numer / np.where(u > 0, u, 1.0), x[0])
    beta[0] = x[0]
    beta = np.minimum(np.maximum.accumulate(beta), x)
    return GridStrategy(x, beta, repr_tag="fp-symmetric")


def induced_bid_law(
    d: Distribution,
    beta: Strategy,
    n_competitors: int,
    seed: int = 0,
    n_samples: int = INDUCED_LAW_SAMPLES,
) -> EmpiricalDistribution:
    """Empirical law of the highest of ``n_competitors`` bids ``beta(X)``."""
    if n_competitors < 1:
        raise DegenerateCompetition("need at least one competitor")
    rng = stream(seed, "induced-bid-law")
    values = draw_values([d] * n_competitors, n_samples, rng)
    return EmpiricalDistribution(np.asarray(beta(values), dtype=float).max(axis=1))


@dataclass(frozen=True)
class EquivalenceResult:
    fp_revenue: float
    sp_revenue: float
    fp_se: float
    sp_se: float

    @property
    def gap(self) -> float:
        return self.fp_revenue - self.sp_revenue

    @property
    def combined_se(self) -> float:
        return float(np.hypot(self.fp_se, self.sp_se))


def revenue_equivalence_check(
    d: Distribution,
    n: int,
    n_draws: int = 1_000_000,
    seed: int = 0,
    n_jobs: Optional[int] = None,
) -> EquivalenceResult:
    """
    Simulate first price at the symmetric equilibrium and Vickrey with truthful bids.

    Both auctions are run on the same value draws.
    """
    beta = fp_symmetric_equilibrium(d, n)
    dists = [d] * n
    fp = expected_metrics(FirstPrice(), dists, [beta] * n, n_draws, seed, n_jobs)
    sp = expected_metrics(Vickrey(), dists, None, n_draws, seed, n_jobs)
    logger.info(
        "Revenue equivalence checked",
        extra={"family": d.family, "n": n, "fp_revenue": fp.revenue, "sp_revenue": sp.revenue},
    )
    return EquivalenceResult(fp.revenue, sp.revenue, fp.revenue_se, sp.revenue_se)


@dataclass(frozen=True)
class BulowKlempererResult:
    vickrey_np1: float
    myerson_n: float
    vickrey_n: float
    vickrey_np1_se: float
    myerson_n_se: float
    vickrey_n_se: float

    @property
    def ratio(self) -> float:
        """Competitive ratio ``Vickrey_n / Myerson_n``."""
        return self.vickrey_n / self.myerson_n if self.myerson_n > 0 else float("nan")


def bulow_klemperer_check(
    d: Distribution,
    n: int,
    n_draws: int = 1_000_000,
    seed: int = 0,
    n_jobs: Optional[int] = None,
) -> BulowKlempererResult:
    """
    Revenue of Vickrey with ``n + 1`` bidders against Myerson with ``n``.

    Raises:
        NotRegular: If ``d`` fails the regularity check.
    """
    if n < 1:
        raise DegenerateCompetition("need at least one bidder")
    regular, _ = regularity_report(d)
    if not regular:
        raise NotRegular(f"{d.family} law is not regular")
    v_np1 = expected_metrics(Vickrey(), [d] * (n + 1), None, n_draws, seed, n_jobs)
    mye = expected_metrics(Myerson([d] * n), [d] * n, None, n_draws, seed, n_jobs)
    v_n = expected_metrics(Vickrey(), [d] * n, None, n_draws, seed, n_jobs)
    return BulowKlempererResult(
        vickrey_np1=v_np1.revenue,
        myerson_n=mye.revenue,
        vickrey_n=v_n.revenue,
        vickrey_np1_se=v_np1.revenue_se,
        myerson_n_se=mye.revenue_se,
        vickrey_n_se=v_n.revenue_se,
    )


RATIO_KINDS = ("vickrey", "lazy", "eager")


def competitive_ratio(
    d: Distribution,
    n: int,
    reserve_kind: str = "vickrey",
    n_draws: int = 1_000_000,
    seed: int = 0,
    n_jobs: Optional[int] = None,
) -> float:
    """
    Revenue of a second-price variant over Myerson revenue with ``n`` symmetric bidders.

    ``reserve_kind`` selects plain Vickrey, or lazy / eager second price with
    monopoly reserves.
    """
    if reserve_kind not in RATIO_KINDS:
        raise ConfigError(f"reserve_kind must be one of {RATIO_KINDS}")
    dists = [d] * n
    if reserve_kind == "vickrey":
        mechanism = Vickrey()
    elif reserve_kind == "lazy":
        mechanism = SecondPriceLazy([monopoly_price(d)] * n)
    else:
        mechanism = SecondPriceEager([monopoly_price(d)] * n)
    numer = expected_metrics(mechanism, dists, None, n_draws, seed, n_jobs).revenue
    denom = expected_metrics(Myerson(dists), dists, None, n_draws, seed, n_jobs).revenue
    return numer / denom if denom > 0 else float("nan")


def fp_revenue_via_virtual_value(
    d: Distribution,
    beta: Strategy,
    G: Distribution,
    n_draws: int = 1_000_000,
    seed: int = 0,
) -> tuple:
    """
    Per-bidder expected payment ``E[G(beta(X)) psi(X)]``.

    Returns:
        ``(estimate, standard_error)``.

    Raises:
        AtomicDistribution: If ``d`` has atoms.
    """
    if d.is_atomic:
        raise AtomicDistribution("virtual-value revenue needs a continuous value law")
    x = d.sample(n_draws, stream(seed, "virtual-revenue"))
    win = np.asarray(G.cdf(np.asarray(beta(x), dtype=float)), dtype=float)
    return mean_and_stderr(win * np.asarray(d.virtual_value(x), dtype=float))


def estimate_values_from_fp_bids(bids: Sequence[float], G: Distribution) -> np.ndarray:
    """
    Invert first-price bids into values with ``x = b + G(b) / g(b)``.

    Raises:
        ZeroDensity: If ``g`` vanishes at any bid.
        OutOfSupport: If ``G(b) = 0`` at any bid.
    """
    b = np.asarray(bids, dtype=float)
    cdf = np.asarray(G.cdf(b), dtype=float)
    dens = np.asarray(G.pdf(b), dtype=float)
    if np.any(dens <= 0):
        raise ZeroDensity("competing-bid density vanishes at an observed bid")
    if np.any(cdf <= 0):
        raise OutOfSupport("observed bid at or below the competing-bid support")
    return b + cdf / dens


def inflated_vickrey_batch(
    bids: Any, eps: float, delta: float, rng: np.random.Generator
) -> BatchOutcome:
    """
    Randomized Vickrey: with probability ``eps`` the second bid is inflated by ``1 + delta``.

    In an inflated round the top bidder wins only if its bid reaches the
    inflated second bid, and then pays it. Ties follow the Vickrey rule.
    """
    if not 0.0 <= eps <= 1.0:
        raise ConfigError("eps must lie in [0, 1]")
    if delta < 0:
        raise ConfigError("delta must be non-negative")
    b = _as_profiles(bids)
    rows = np.arange(b.shape[0])
    winners, second = _top_two(b)
    inflate = rng.random(b.shape[0]) < eps
    price = np.where(inflate, (1.0 + delta) * second, second)
    # Reaching the inflated bid suffices: with delta = 0 a tied profile still sells,
    # as in Vickrey, which a strict comparison would break.
    sold = b[rows, winners] >= price
    payments = np.zeros_like(b)
    payments[rows, winners] = np.where(sold, price, 0.0)
    return BatchOutcome(winners=np.where(sold, winners, -1).astype(int), payments=payments)


def inflated_vickrey(
    bids: Sequence[float], eps: float, delta: float, rng: np.random.Generator
) -> AuctionOutcome:
    return inflated_vickrey_batch(np.asarray(bids, dtype=float)[None, :], eps, delta, rng).row(0)


def inflated_vickrey_revenue(
    dists: Sequence[Distribution],
    eps: float,
    delta: float,
    n_draws: int = 1_000_000,
    seed: int = 0,
) -> tuple:
    """Monte Carlo revenue of the inflated Vickrey auction with truthful bidders."""
    values = draw_values(list(dists), n_draws, stream(seed, "inflated", "values"))
    outcome = inflated_vickrey_batch(values, eps, delta, stream(seed, "inflated", "coins"))
    return mean_and_stderr(outcome.revenue)


__all__ = [
    "Strategy",
    "fp_best_response",
    "fp_symmetric_equilibrium",
    "induced_bid_law",
    "EquivalenceResult",
    "revenue_equivalence_check",
    "BulowKlempererResult",
    "bulow_klemperer_check",
    "RATIO_KINDS",
    "competitive_ratio",
    "fp_revenue_via_virtual_value",
    "estimate_values_from_fp_bids",
    "inflated_vickrey",
    "inflated_vickrey_batch",
    "inflated_vickrey_revenue",
]
