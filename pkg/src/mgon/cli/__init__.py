"""Command-line front end and experiment configs."""

from mgon.cli.config import ConfigError, RunRecord, load_config, run_config, validate_config
from mgon.cli.experiments import COLUMNS, DEFAULTS, run_trial

__all__ = ["COLUMNS", "ConfigError", "DEFAULTS", "RunRecord", "load_config", "run_config", "run_trial", "validate_config"]
