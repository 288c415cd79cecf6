"""
Experiment Schemas

Pydantic models for experiment configurations and run reports. A
configuration names a scenario, the scenario's parameter object, the value
laws and the replication plan; the report echoes the configuration next to
per-replication metrics and their aggregate.
"""

from datetime import datetime, timezone
from typing import Any, Dict, List, Literal, Optional, Type

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from auctionlab.core.config import settings
from auctionlab.core.exceptions import InvalidConfig
from auctionlab.schemas.distribution import DistributionSpec, MechanismSpec, UniformSpec


class _Params(BaseModel):
    model_config = ConfigDict(extra="forbid")


class RevenueExampleParams(_Params):
    reserve: float = Field(0.5, ge=0.0, description="Anonymous reserve compared against no reserve")


class ExpectedMetricsParams(_Params):
    alpha: Optional[float] = Field(
        None, gt=0.0, le=1.0, description="Linear shading factor for every bidder; truthful if omitted"
    )


class RevenueEquivalenceParams(_Params):
    pass


class BulowKlempererParams(_Params):
    ns: List[int] = Field(default_factory=lambda: [1, 2, 3, 4, 5], min_length=1)

    @field_validator("ns")
    @classmethod
    def _positive(cls, v: List[int]) -> List[int]:
        if any(n < 1 for n in v):
            raise ValueError("bidder counts must be positive")
        return v


class CompetitiveRatioParams(_Params):
    reserve_kind: Literal["vickrey", "lazy", "eager"] = "lazy"


class ProfitCurveParams(_Params):
    families: List[DistributionSpec] = Field(
        default_factory=lambda: [UniformSpec()], min_length=1
    )
    points: int = Field(256, ge=2)


class SampleComplexityParams(_Params):
    Ts: List[int] = Field(default_factory=lambda: [100, 1000, 10000], min_length=1)
    seeds: int = Field(200, ge=1)
    learner: Literal["empirical", "guarded"] = "empirical"
    kappa: float = Field(0.05, gt=0.0, lt=1.0)


class LearnReservesParams(_Params):
    learner: Literal["erm-anonymous", "lazy", "eager", "boosted", "l-level"] = "erm-anonymous"
    holdout: int = Field(10_000, ge=1)
    levels: int = Field(2, ge=1)
    grid: List[float] = Field(default_factory=lambda: [0.0, 0.25, 0.5, 0.75])


class OnlineBanditParams(_Params):
    algo: Literal["ucb", "exp3"] = "ucb"
    means: List[float] = Field(default_factory=lambda: [0.5, 0.6], min_length=2)
    adversary: Literal["bernoulli", "switching"] = "bernoulli"

    @field_validator("means")
    @classmethod
    def _unit(cls, v: List[float]) -> List[float]:
        if any(not 0.0 <= p <= 1.0 for p in v):
            raise ValueError("arm means must lie in [0, 1]")
        return v


class PostedPriceParams(_Params):
    eps: float = Field(0.05, gt=0.0, lt=1.0)
    stochastic: bool = True


class CautiousSearchParams(_Params):
    x: float = Field(0.5, ge=0.0, le=1.0)
    algo: Literal["cautious", "binary"] = "cautious"


class ReserveEpochsParams(_Params):
    pass


class UcbidParams(_Params):
    x: float = Field(0.5, ge=0.0, le=1.0, description="Click-through probability")


class ContextualBidParams(_Params):
    value_support: List[float] = Field(default_factory=lambda: [0.25, 0.5, 0.75, 1.0], min_length=1)
    bid_grid: List[float] = Field(
        default_factory=lambda: [k / 20 for k in range(21)], min_length=1
    )


class PacingParams(_Params):
    budget_fraction: float = Field(1.0 / 60.0, gt=0.0, description="Budget B as a fraction of T")
    gamma: Optional[float] = Field(None, gt=0.0)


class ShadeParams(_Params):
    r: Optional[float] = Field(None, ge=0.0, description="Threshold; the monopoly price if omitted")
    points: int = Field(101, ge=2)


class LinearShadingParams(_Params):
    pass


class ThresholdedNashParams(_Params):
    pass


class MyersonShadingParams(_Params):
    grid_size: Optional[int] = Field(None, ge=16)


class ExploitMeanBasedParams(_Params):
    bidder_mode: Literal["oracle", "exp3", "ex-post-ir"] = "oracle"


class FeeParams(_Params):
    pass


class TwoPhaseParams(_Params):
    gamma: float = Field(0.8, gt=0.0, le=1.0)
    alpha: Optional[float] = Field(None, gt=0.0, le=1.0, description="Defaults to T^(-1/3)")
    buyer_mode: Literal["myopic-truthful", "threshold-liar"] = "myopic-truthful"
    tau: float = Field(0.0, ge=0.0)


SCENARIO_PARAMS: Dict[str, Type[_Params]] = {
    "revenue-example": RevenueExampleParams,
    "expected-metrics": ExpectedMetricsParams,
    "revenue-equivalence": RevenueEquivalenceParams,
    "bulow-klemperer": BulowKlempererParams,
    "competitive-ratio": CompetitiveRatioParams,
    "profit-curve": ProfitCurveParams,
    "sample-complexity": SampleComplexityParams,
    "learn-reserves": LearnReservesParams,
    "online-bandit": OnlineBanditParams,
    "posted-price": PostedPriceParams,
    "cautious-search": CautiousSearchParams,
    "reserve-epochs": ReserveEpochsParams,
    "ucbid": UcbidParams,
    "contextual-bid": ContextualBidParams,
    "pacing": PacingParams,
    "shade": ShadeParams,
    "linear-shading": LinearShadingParams,
    "thresholded-nash": ThresholdedNashParams,
    "myerson-shading": MyersonShadingParams,
    "exploit-mean-based": ExploitMeanBasedParams,
    "fee": FeeParams,
    "two-phase": TwoPhaseParams,
}

Scenario = Literal[
    "revenue-example",
    "expected-metrics",
    "revenue-equivalence",
    "bulow-klemperer",
    "competitive-ratio",
    "profit-curve",
    "sample-complexity",
    "learn-reserves",
    "online-bandit",
    "posted-price",
    "cautious-search",
    "reserve-epochs",
    "ucbid",
    "contextual-bid",
    "pacing",
    "shade",
    "linear-shading",
    "thresholded-nash",
    "myerson-shading",
    "exploit-mean-based",
    "fee",
    "two-phase",
]


class ExperimentConfig(BaseModel):
    """
    A complete, validated experiment description.

    ``distribution`` is the common value law of ``n`` symmetric bidders;
    ``distributions`` overrides it with one law per bidder. ``params`` is
    validated against the scenario's own parameter model.
    """

    model_config = ConfigDict(extra="forbid")

    schema_version: int = Field(..., description="Must equal the library's schema version")
    scenario: Scenario
    params: Dict[str, Any] = Field(default_factory=dict)
    distribution: DistributionSpec = Field(default_factory=UniformSpec)
    distributions: Optional[List[DistributionSpec]] = Field(None, min_length=1)
    mechanism: Optional[MechanismSpec] = None
    n: int = Field(2, ge=1, description="Number of bidders")
    n_draws: int = Field(1_000_000, ge=1, description="Monte Carlo draws per replication")
    T: int = Field(10_000, ge=1, description="Horizon or sample size")
    seed: int = Field(0, ge=0, lt=2**64, description="Master seed")
    replications: int = Field(1, ge=1)
    n_jobs: Optional[int] = Field(None, description="Replication workers; settings.N_JOBS if omitted")
    output: Optional[str] = Field(None, description="Path of the JSON report")

    @field_validator("schema_version")
    @classmethod
    def _schema(cls, v: int) -> int:
        if v != settings.SCHEMA_VERSION:
            raise ValueError(
                f"schema version {v} is not supported (expected {settings.SCHEMA_VERSION})"
            )
        return v

    @model_validator(mode="after")
    def _scenario_params(self) -> "ExperimentConfig":
        model = SCENARIO_PARAMS[self.scenario]
        self.params = model.model_validate(self.params).model_dump(mode="json")
        if self.distributions is not None:
            self.n = len(self.distributions)
        return self

    def scenario_params(self) -> _Params:
        return SCENARIO_PARAMS[self.scenario].model_validate(self.params)

    def value_specs(self) -> List[Any]:
        return list(self.distributions) if self.distributions else [self.distribution] * self.n

    @classmethod
    def parse(cls, data: Dict[str, Any]) -> "ExperimentConfig":
        """
        Validate a raw configuration document.

        Raises:
            InvalidConfig: With the field path of every validation error.
        """
        try:
            return cls.model_validate(data)
        except ValidationError as exc:
            raise InvalidConfig(
                "invalid experiment configuration",
                [{"loc": e["loc"], "msg": e["msg"]} for e in exc.errors()],
            ) from exc


class Aggregate(BaseModel):
    mean: float
    std: float
    p05: float
    p95: float


class RunReport(BaseModel):
    """Result of one ``run_experiment`` call."""

    schema_version: int
    version: str
    scenario: str
    config: Dict[str, Any]
    master_seed: int
    replications: List[Dict[str, float]]
    aggregate: Dict[str, Aggregate]
    series: Dict[str, List[Dict[str, Any]]] = Field(default_factory=dict)
    wall_clock_seconds: float
    created_at: datetime = Field(default_factory=lambda: datetime.now(timezone.utc))


__all__ = [
    "SCENARIO_PARAMS",
    "Scenario",
    "ExperimentConfig",
    "Aggregate",
    "RunReport",
] + [model.__name__ for model in SCENARIO_PARAMS.values()]
