"""Config-driven experiment runner and report emission."""

from .config import EXPERIMENTS, ConfigError, ExperimentConfig, build_model
from .experiments import ExperimentError, average_absolute_error, ratio_errors, run_experiment
from .report import ExperimentReport, Table, emit_report

__all__ = [
    "EXPERIMENTS",
    "ConfigError",
    "ExperimentConfig",
    "ExperimentError",
    "ExperimentReport",
    "Table",
    "average_absolute_error",
    "build_model",
    "emit_report",
    "ratio_errors",
    "run_experiment",
]
