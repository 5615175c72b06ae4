"""Experiment harness: JSON configs in, CSV tables and SVG boxplots out."""

from .config import EXPERIMENTS, ConfigError, ExperimentConfig, load_config, parse_config
from .experiments import ResultTable, expected_rows, run_experiment
from .output import read_csv, summarize, write_outputs
from .presets import PRESETS, preset


def run(config_path, output_dir=None, plots=True):
    """Run the experiment in ``config_path`` and write its outputs; returns the table."""
    cfg = load_config(config_path)
    table = run_experiment(cfg)
    write_outputs(table, cfg, output_dir or cfg.output_dir, plots=plots)
    return table


def validate(config_path):
    return load_config(config_path)


__all__ = [
    "EXPERIMENTS",
    "PRESETS",
    "ConfigError",
    "ExperimentConfig",
    "ResultTable",
    "expected_rows",
    "load_config",
    "parse_config",
    "preset",
    "read_csv",
    "run",
    "run_experiment",
    "summarize",
    "validate",
    "write_outputs",
]
