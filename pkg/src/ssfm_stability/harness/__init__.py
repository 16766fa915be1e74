"""Experiment configuration, orchestration and the command-line interface."""
from .config import PRESETS, BackgroundConfig, ConfigError, ExperimentConfig, config_from_dict, load_config
from .runner import ResultRow, RunOutcome, run_oracle, run_predict, run_scan, run_simulate

__all__ = [
    "PRESETS",
    "BackgroundConfig",
    "ConfigError",
    "ExperimentConfig",
    "config_from_dict",
    "load_config",
    "ResultRow",
    "RunOutcome",
    "run_oracle",
    "run_predict",
    "run_scan",
    "run_simulate",
]
