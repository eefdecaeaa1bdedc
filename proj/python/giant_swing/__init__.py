"""Acrobot virtual nonholonomic constraint numerics (C++ core)."""

import json as _json

from ._core import *  # noqa: F401,F403
from ._core import run_command as _run_command


def run(command, config, out=None, seed=None, threads=0):
    """Runs a giant-swing subcommand and returns the parsed summary."""
    return _json.loads(_run_command(command, str(config), out, seed, threads))
