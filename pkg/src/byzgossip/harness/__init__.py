"""Experiment harness: JSON configs, parallel sweeps, CSV and SVG output, CLI."""

from byzgossip.harness.config import ConfigError, ExperimentConfig, load_config

__all__ = ["ConfigError", "ExperimentConfig", "load_config"]
