"""Python access to the walk-on-interfaces solver."""

import json
from pathlib import Path

from . import _core
from ._core import (
    ConfigError,
    WoiError,
    benchmark_names,
    estimate,
    green,
    green_gradient,
    poincare_kernel,
    truth,
)

__all__ = [
    "ConfigError",
    "WoiError",
    "benchmark_names",
    "estimate",
    "green",
    "green_gradient",
    "poincare_kernel",
    "run",
    "truth",
]


def run(config, base_dir="."):
    """Run a config (dict, JSON path) and return the report document."""
    if isinstance(config, (str, Path)) and Path(config).is_file():
        path = Path(config)
        return json.loads(_core.run_json(path.read_text(), str(path.parent)))
    return json.loads(_core.run_json(json.dumps(config), str(base_dir)))

