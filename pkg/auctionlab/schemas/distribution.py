"""
Distribution and Mechanism Schemas

Pydantic models for the distribution and mechanism specifications used in
experiment configurations. Each spec builds the corresponding domain object.
"""

from typing import Annotated, List, Literal, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, model_validator

from auctionlab.core.exceptions import ConfigError
from auctionlab.models import dist as d
from auctionlab.models import mech as m


class _Spec(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class UniformSpec(_Spec):
    family: Literal["uniform"] = "uniform"
    a: float = Field(0.0, ge=0.0)
    b: float = 1.0

    def build(self) -> d.Distribution:
        return d.Uniform(self.a, self.b)


class ExponentialSpec(_Spec):
    family: Literal["exponential"] = "exponential"
    scale: float = Field(1.0, gt=0.0, description="Mean of the law (scale parameterization)")

    def build(self) -> d.Distribution:
        return d.Exponential(self.scale)


class LogNormalSpec(_Spec):
    family: Literal["lognormal"] = "lognormal"
    mu: float = 0.0
    sigma: float = Field(1.0, gt=0.0)

    def build(self) -> d.Distribution:
        return d.LogNormal(self.mu, self.sigma)


class GPDSpec(_Spec):
    family: Literal["gpd"] = "gpd"
    mu: float = Field(0.0, ge=0.0)
    xi: float = Field(-0.5, lt=1.0)
    sigma: float = Field(1.0, gt=0.0)

    def build(self) -> d.Distribution:
        return d.GeneralizedPareto(self.mu, self.xi, self.sigma)


class KumaraswamySpec(_Spec):
    family: Literal["kumaraswamy"] = "kumaraswamy"
    a: float = Field(1.0, gt=0.0)
    b: float = Field(1.0, gt=0.0)

    def build(self) -> d.Distribution:
        return d.Kumaraswamy(self.a, self.b)


class ParetoSpec(_Spec):
    family: Literal["pareto"] = "pareto"
    alpha: float = Field(1.0, gt=0.0)
    xm: float = Field(1.0, gt=0.0)

    def build(self) -> d.Distribution:
        return d.Pareto(self.alpha, self.xm)


class HeavyTailSpec(_Spec):
    family: Literal["heavy-tail"] = "heavy-tail"

    def build(self) -> d.Distribution:
        return d.HeavyTail()


class PointSpec(_Spec):
    family: Literal["point"] = "point"
    value: float = Field(1.0, ge=0.0)

    def build(self) -> d.Distribution:
        return d.PointMass(self.value)


class DiscreteSpec(_Spec):
    """Atoms given as ``[[value, probability], ...]``."""

    family: Literal["discrete"] = "discrete"
    atoms: List[List[float]] = Field(..., min_length=1)

    @model_validator(mode="after")
    def _pairs(self) -> "DiscreteSpec":
        if any(len(pair) != 2 for pair in self.atoms):
            raise ValueError("each atom must be a [value, probability] pair")
        return self

    def build(self) -> d.Distribution:
        return d.Discrete([a for a, _ in self.atoms], [p for _, p in self.atoms])


class EmpiricalSpec(_Spec):
    family: Literal["empirical"] = "empirical"
    samples: List[float] = Field(..., min_length=1)

    def build(self) -> d.Distribution:
        return d.EmpiricalDistribution(self.samples)


class TruncatedSpec(_Spec):
    family: Literal["truncated"] = "truncated"
    base: "DistributionSpec"
    lower: float = Field(0.0, ge=0.0)
    upper: float

    def build(self) -> d.Distribution:
        return d.Truncated(self.base.build(), self.lower, self.upper)


class MixtureSpec(_Spec):
    family: Literal["mixture"] = "mixture"
    components: List["DistributionSpec"] = Field(..., min_length=1)
    weights: List[float] = Field(..., min_length=1)

    @model_validator(mode="after")
    def _lengths(self) -> "MixtureSpec":
        if len(self.components) != len(self.weights):
            raise ValueError("components and weights must have equal length")
        return self

    def build(self) -> d.Distribution:
        return d.Mixture(tuple(c.build() for c in self.components), tuple(self.weights))


DistributionSpec = Annotated[
    Union[
        UniformSpec,
        ExponentialSpec,
        LogNormalSpec,
        GPDSpec,
        KumaraswamySpec,
        ParetoSpec,
        HeavyTailSpec,
        PointSpec,
        DiscreteSpec,
        EmpiricalSpec,
        TruncatedSpec,
        MixtureSpec,
    ],
    Field(discriminator="family"),
]

TruncatedSpec.model_rebuild()
MixtureSpec.model_rebuild()

FAMILY_DEFAULTS = {
    "uniform": UniformSpec,
    "exponential": ExponentialSpec,
    "lognormal": LogNormalSpec,
    "gpd": GPDSpec,
    "kumaraswamy": KumaraswamySpec,
    "pareto": ParetoSpec,
    "heavy-tail": HeavyTailSpec,
    "point": PointSpec,
}


def default_distribution(family: str) -> d.Distribution:
    """Build the default member of a parametric family (e.g. uniform on [0, 1])."""
    try:
        return FAMILY_DEFAULTS[family]().build()
    except KeyError:
        raise ConfigError(
            f"family {family!r} has no defaults; use one of {sorted(FAMILY_DEFAULTS)}"
        ) from None


class MechanismSpec(_Spec):
    """
    Mechanism specification.

    ``reserve`` applies to ``sp-anonymous`` and ``first-price``; ``reserves``
    to lazy/eager/boosted; ``floors`` to ``l-level``. ``myerson`` uses the
    experiment's value laws as priors.
    """

    kind: m.MechanismKind
    reserve: float = Field(0.0, ge=0.0)
    reserves: Optional[List[float]] = None
    boosts: Optional[List[float]] = None
    floors: Optional[List[List[float]]] = None

    @model_validator(mode="after")
    def _required(self) -> "MechanismSpec":
        needs = {
            m.MechanismKind.SP_LAZY: ("reserves",),
            m.MechanismKind.SP_EAGER: ("reserves",),
            m.MechanismKind.BOOSTED_SP: ("reserves", "boosts"),
            m.MechanismKind.L_LEVEL: ("floors",),
        }
        missing = [f for f in needs.get(self.kind, ()) if getattr(self, f) is None]
        if missing:
            raise ValueError(f"{self.kind.value} requires {', '.join(missing)}")
        return self

    def build(self, priors: Optional[List[d.Distribution]] = None) -> m.Mechanism:
        kind = self.kind
        if kind == m.MechanismKind.VICKREY:
            return m.Vickrey()
        if kind == m.MechanismKind.SP_ANONYMOUS:
            return m.SecondPriceAnonymous(self.reserve)
        if kind == m.MechanismKind.SP_LAZY:
            return m.SecondPriceLazy(self.reserves)
        if kind == m.MechanismKind.SP_EAGER:
            return m.SecondPriceEager(self.reserves)
        if kind == m.MechanismKind.L_LEVEL:
            return m.LLevel(self.floors)
        if kind == m.MechanismKind.BOOSTED_SP:
            return m.BoostedSecondPrice(self.boosts, self.reserves)
        if kind == m.MechanismKind.FIRST_PRICE:
            return m.FirstPrice(self.reserve)
        if not priors:
            raise ConfigError("myerson needs the bidders' value laws as priors")
        return m.Myerson(priors)


__all__ = [
    "DistributionSpec",
    "UniformSpec",
    "ExponentialSpec",
    "LogNormalSpec",
    "GPDSpec",
    "KumaraswamySpec",
    "ParetoSpec",
    "HeavyTailSpec",
    "PointSpec",
    "DiscreteSpec",
    "EmpiricalSpec",
    "TruncatedSpec",
    "MixtureSpec",
    "FAMILY_DEFAULTS",
    "default_distribution",
    "MechanismSpec",
]
