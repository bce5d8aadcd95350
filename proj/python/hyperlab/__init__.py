"""Counting and boundary experiments on hyperbolic groups."""

import json

from ._hyperlab import (
    Automaton,
    HyperlabError,
    analyze,
    builtin_groups,
    run_command,
    sample_sphere,
    sphere_sizes,
)

__all__ = [
    "Automaton",
    "HyperlabError",
    "analyze",
    "builtin_groups",
    "run",
    "run_command",
    "sample_sphere",
    "sphere_sizes",
]


def run(command, **config):
    """Runs a CLI subcommand in process; keyword arguments use config file keys."""
    return run_command(command, json.dumps(config) if config else "")
