"""Experiment harness: configs, resumable ensembles, verification suites, comparisons, CLI."""
from .config import ConfigError, ExperimentConfig, load_config, parse_config
from .records import Summary
from .runner import RunResult, run_ensemble

__all__ = ["ConfigError", "ExperimentConfig", "RunResult", "Summary", "load_config", "parse_config", "run_ensemble"]
