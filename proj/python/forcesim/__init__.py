"""Force-aware admittance simulation: episodes, suites, stability checks, demo datasets.

Config arguments take the INI text the `forcesim` CLI reads; use
`load_text(path)` for files.
"""

from pathlib import Path

from ._forcesim import (
    ConfigError,
    Error,
    default_grid,
    generate_demos,
    read_dataset,
    run_episode,
    run_suite,
    trace_csv,
    verify,
)


def load_text(path):
    return Path(path).read_text()


__all__ = [
    "ConfigError",
    "Error",
    "default_grid",
    "generate_demos",
    "load_text",
    "read_dataset",
    "run_episode",
    "run_suite",
    "trace_csv",
    "verify",
]
