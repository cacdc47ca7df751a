"""Shared-control quadrotor simulator with a fuzzy-adaptive PID stack.

Submodule imports are lazy so light tooling paths (table dumps, config
validation) never pay the JIT backend's import cost.
"""
from __future__ import annotations

import importlib
from typing import Any

__version__ = "0.1.0"

_SUBMODULES = {
    "arbitration",
    "bci",
    "cli",
    "config",
    "control",
    "errors",
    "experiment",
    "fuzzy",
    "kernels",
    "plant",
    "service",
    "tables",
    "track",
}


def __getattr__(name: str) -> Any:
    if name in _SUBMODULES:
        return importlib.import_module(f".{name}", __name__)
    raise AttributeError(f"module {__name__!r} has no attribute {name!r}")


def __dir__() -> list[str]:
    return sorted(set(globals()) | _SUBMODULES)
