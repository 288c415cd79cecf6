# Import all schemas here to make them easily importable
from .distribution import (
    DistributionSpec,
    MechanismSpec,
    default_distribution,
)
from .experiment import (
    SCENARIO_PARAMS,
    ExperimentConfig,
    RunReport,
)

__all__ = [
    "DistributionSpec",
    "MechanismSpec",
    "default_distribution",
    "SCENARIO_PARAMS",
    "ExperimentConfig",
    "RunReport",
]
