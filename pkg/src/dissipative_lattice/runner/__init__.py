"""Configuration, sweep execution, output and validation."""

from .config import ConfigError, RunConfig, SweepPoint, dump_config, normalize, parse_config
from .emit import emit
from .recipes import RECIPES, recipe, recipe_config
from .sweep import PointResult, RunPointError, SweepResult, TimeSeries, run_point, run_sweep
from .validate import run_oracles, validate

__all__ = [
    "ConfigError",
    "RunConfig",
    "SweepPoint",
    "dump_config",
    "normalize",
    "parse_config",
    "emit",
    "RECIPES",
    "recipe",
    "recipe_config",
    "PointResult",
    "RunPointError",
    "SweepResult",
    "TimeSeries",
    "run_point",
    "run_sweep",
    "run_oracles",
    "validate",
]
