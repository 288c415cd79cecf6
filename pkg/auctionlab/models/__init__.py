"""
Domain Models Package

Value distributions, mechanisms, bidding strategies and the learning and
equilibrium routines built on them.
"""

from .dist import Distribution, iron, monopoly_price, monopoly_revenue, virtual_value
from .mech import Mechanism, MechanismKind, expected_metrics, run
from .strategy import GridStrategy, Linear, Strategy, Truthful

__all__ = [
    "Distribution",
    "iron",
    "monopoly_price",
    "monopoly_revenue",
    "virtual_value",
    "Mechanism",
    "MechanismKind",
    "expected_metrics",
    "run",
    "Strategy",
    "Truthful",
    "Linear",
    "GridStrategy",
]
