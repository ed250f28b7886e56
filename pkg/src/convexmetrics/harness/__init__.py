"""Experiment harness: configs, the check suite, reports and the CLI."""

from .config import ExperimentConfig, config_from_dict, load_config, load_default_config
from .report import ReportRow, emit, rows_from_csv, rows_from_json
from .runner import fit_constant, fitted_constants, run_suite

__all__ = [
    "ExperimentConfig",
    "ReportRow",
    "config_from_dict",
    "emit",
    "fit_constant",
    "fitted_constants",
    "load_config",
    "load_default_config",
    "rows_from_csv",
    "rows_from_json",
    "run_suite",
]
