"""
Error hierarchy for auctionlab.

Every error carries the process exit code the CLI reports for it: 2 for bad
input or configuration, 3 for numeric failures.
"""

from typing import Any, Dict, List, Optional


class AuctionLabError(Exception):
    """Base exception for all auctionlab errors."""

    exit_code: int = 1

    def __init__(self, message: str, exit_code: Optional[int] = None):
        self.message = message
        if exit_code is not None:
            self.exit_code = exit_code
        super().__init__(self.message)


class ConfigError(AuctionLabError, ValueError):
    """Invalid inputs, parameters or configuration."""

    exit_code = 2


class NumericError(AuctionLabError, ArithmeticError):
    """A numerical operation is undefined or failed to converge."""

    exit_code = 3


class InvalidConfig(ConfigError):
    """Experiment configuration failed schema validation."""

    def __init__(self, message: str, errors: Optional[List[Dict[str, Any]]] = None):
        self.errors = errors or []
        if self.errors:
            paths = "; ".join(
                f"{'.'.join(str(p) for p in e.get('loc', ()))}: {e.get('msg', '')}"
                for e in self.errors
            )
            message = f"{message} ({paths})"
        super().__init__(message)


class InconsistentArity(ConfigError):
    pass


class RewardOutOfRange(ConfigError):
    pass


class NonpositiveBudget(ConfigError):
    pass


class DegenerateCompetition(ConfigError):
    pass


class RequiresDiscrete(ConfigError):
    pass


class SearchSpaceTooLarge(ConfigError):
    pass


class GridTooCoarse(ConfigError):
    pass


class EmptySample(ConfigError):
    pass


class AllRemoved(ConfigError):
    pass


class MissingSeries(ConfigError):
    pass


class ZeroDensity(NumericError):
    pass


class OutOfSupport(NumericError):
    pass


class Unbounded(NumericError):
    pass


class NoDensity(NumericError):
    pass


class AtomicDistribution(NumericError):
    """Pointwise virtual values are undefined for laws with atoms."""


class NotRegular(NumericError):
    pass


class NotIncreasing(NumericError):
    pass


class NonMonotone(NumericError):
    pass


class NoRoot(NumericError):
    pass


__all__ = [
    "AuctionLabError",
    "ConfigError",
    "NumericError",
    "InvalidConfig",
    "InconsistentArity",
    "RewardOutOfRange",
    "NonpositiveBudget",
    "DegenerateCompetition",
    "RequiresDiscrete",
    "SearchSpaceTooLarge",
    "GridTooCoarse",
    "EmptySample",
    "AllRemoved",
    "MissingSeries",
    "ZeroDensity",
    "OutOfSupport",
    "Unbounded",
    "NoDensity",
    "AtomicDistribution",
    "NotRegular",
    "NotIncreasing",
    "NonMonotone",
    "NoRoot",
]
