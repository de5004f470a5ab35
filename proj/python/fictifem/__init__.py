"""Adaptive fictitious-domain finite elements for elliptic interface problems."""

from ._core import (
    ConfigError,
    Error,
    SolverError,
    assemble_preset,
    coarsen_mark,
    doerfler_mark,
    eoc,
    parse_config,
    preset_names,
    run_checks,
    run_study,
    solve_preset,
)

__all__ = [
    "ConfigError",
    "Error",
    "SolverError",
    "assemble_preset",
    "coarsen_mark",
    "doerfler_mark",
    "eoc",
    "parse_config",
    "preset_names",
    "run_checks",
    "run_study",
    "solve_preset",
]
