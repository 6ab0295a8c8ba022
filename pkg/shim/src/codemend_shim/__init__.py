"""Sandbox shim: one-shot assert runner speaking a JSON-lines pipe protocol."""

from .runner import main, parse_request, run_shim

__version__ = "0.1.0"

__all__ = ["main", "parse_request", "run_shim"]
