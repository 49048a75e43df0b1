import json
from pathlib import Path

import pytest

from holism_lab.common.config import LabSettings


class _RecordingCli:
    """Cliasi stand-in that keeps every message, grouped by kind."""

    _KINDS = {
        "fail": "failed",
        "warn": "warned",
        "info": "informed",
        "success": "succeeded",
        "log": "logged",
        "animate_message_blocking": "logged",
    }

    def __init__(self) -> None:
        for bucket in set(self._KINDS.values()):
            setattr(self, bucket, [])

    def __getattr__(self, name: str):
        bucket = self._KINDS.get(name)
        if bucket is None:
            raise AttributeError(name)
        return lambda msg="", *args, **kwargs: getattr(self, bucket).append(msg)


@pytest.fixture
def mock_cli(monkeypatch):
    """Replace every module-level ``cli`` with one recording dummy.

    Operations rebind their module ``cli`` on entry, so ``Cliasi`` is patched
    as well to hand the same dummy back.
    """
    from holism_lab import cli as cli_mod
    from holism_lab import holism, verify
    from holism_lab.common import config, failure
    from holism_lab.probspace import moments
    from holism_lab.quantum import measurement, state

    dummy = _RecordingCli()
    for module in (cli_mod, holism, verify, moments, measurement, state):
        monkeypatch.setattr(module, "cli", dummy)
        monkeypatch.setattr(module, "Cliasi", lambda *a, **kw: dummy)
    for module in (config, failure):
        monkeypatch.setattr(module, "cli", dummy)
    return dummy


def write_config(directory: Path, **sections) -> Path:
    """Write a version-1 config whose data dir is ``directory``."""
    raw = {
        "file": {"version": 1},
        "paths": {"data": str(directory)},
    }
    raw.update(sections)
    path = directory / "config.json"
    path.write_text(json.dumps(raw))
    return path


@pytest.fixture
def config_path(tmp_path, mock_cli) -> Path:
    """A small, fast configuration in a temporary data directory."""
    return write_config(
        tmp_path,
        sampling={"seed": 7, "trials": 2000, "workers": 1, "qubits": 3},
        statistics={"alpha": 0.01, "epsilon": 0.1},
    )


@pytest.fixture
def fast_settings() -> LabSettings:
    return LabSettings(trials=5000, seed=11, qubits=3)
