"""Shared fixtures.

Preset experiments are integrated once per session and reused by the
analysis-level and acceptance tests; wall time per preset is recorded so
budget assertions don't force a re-run.
"""

import time
from types import SimpleNamespace

import pytest

from pgflow.cli import execute
from pgflow.config import list_presets, load_config


@pytest.fixture(scope="session")
def preset_runs():
    """Map preset name -> namespace(config, result, seconds)."""
    runs = {}
    for name in list_presets():
        cfg = load_config(name)
        start = time.perf_counter()
        res = execute(cfg)
        runs[name] = SimpleNamespace(
            config=cfg, result=res, seconds=time.perf_counter() - start
        )
    return runs
