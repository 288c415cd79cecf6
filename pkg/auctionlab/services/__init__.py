"""
Services Package

Experiment orchestration and report handling.
"""

from .experiment_service import ExperimentService, run_experiment
from .report_service import emit_plot_data, load_report

__all__ = ["ExperimentService", "run_experiment", "emit_plot_data", "load_report"]
