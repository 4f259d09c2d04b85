"""Experiment harness: JSON configs, canned suites, byte-stable CSV output."""

from .cli import main
from .config import (
    ConfigError,
    echo_config,
    fmt_cell,
    load_config,
    resolve,
    target_from,
    validate,
    write_csv,
)

__all__ = [
    "ConfigError", "echo_config", "fmt_cell", "load_config", "main",
    "resolve", "target_from", "validate", "write_csv",
]
