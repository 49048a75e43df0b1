"""
Configuration for holism_lab.

The settings live in one JSON file, ``data/config.json`` unless
``--config-path`` or ``HOLISM_LAB_CONFIG`` says otherwise. A missing file is
created from the bundled defaults. A file that cannot be used (bad JSON, no
integer ``file.version``, an unknown version or no ``paths.data``) is replaced
by the defaults after a short, cancellable countdown.

:func:`config` hands out the raw JSON and :func:`settings` the validated
:class:`LabSettings` that the solvers and samplers read their caps from.

Example::
    >>> from holism_lab.common.config import init_config, settings
    >>> init_config("data/config.json")
    >>> settings().dense_cap
    24

See Also:
    - ``holism_lab/defaults/config.default.json`` for every key
    - :mod:`holism_lab.common.arguments`, which calls :func:`init_config`
"""

import logging
import os
from dataclasses import dataclass
from importlib.resources import files
from pathlib import Path
from typing import Any, Literal

from cliasi import Cliasi
from singlejson import JSONDeserializationError, JSONFile, load

from .errors import ConfigError

cli = Cliasi("config")

# Overrides DEFAULT_CONFIG_PATH when --config-path is not given
CONFIG_PATH_ENV = "HOLISM_LAB_CONFIG"
DEFAULT_CONFIG_PATH = "data/config.json"

# Set by init_config()
_config: JSONFile | None = None
_data_dir: Path | None = None

# Bump together with a new case in _schema_problem()
CURRENT_CONFIG_VERSION: int = 1

# Random streams are Philox generators keyed by the seed
SEED_LIMIT: int = 1 << 128

OutputFormat = Literal["json", "csv"]


@dataclass(frozen=True)
class LabSettings:
    """Validated, immutable view of the configuration file."""

    dense_cap: int = 24
    solver_cap: int = 10
    seed: int = 20011
    trials: int = 100_000
    workers: int = 1
    qubits: int = 4
    alpha: float = 0.01
    epsilon: float = 0.1
    exhaustive_cap: int = 20
    include_singletons: bool = True
    output_format: OutputFormat = "json"

    def __post_init__(self) -> None:
        for name in ("dense_cap", "solver_cap", "exhaustive_cap", "workers"):
            if getattr(self, name) < 1:
                raise ConfigError(name, "must be a positive integer")
        if self.trials < 1:
            raise ConfigError("trials", "must be at least 1")
        if self.qubits < 2:
            raise ConfigError("qubits", "must be at least 2")
        if not 0 <= self.seed < SEED_LIMIT:
            raise ConfigError("seed", "must lie in 0..2**128-1")
        if not 0 < self.alpha < 1:
            raise ConfigError("alpha", "must lie strictly between 0 and 1")
        if not self.epsilon > 0:
            raise ConfigError("epsilon", "must be positive")
        if self.output_format not in ("json", "csv"):
            raise ConfigError("output_format", "must be 'json' or 'csv'")

    @classmethod
    def from_json(cls, raw: dict[str, Any]) -> "LabSettings":
        """
        Build settings from the config JSON layout.

        Missing sections fall back to the dataclass defaults.

        :raises ConfigError: When a value has the wrong type or violates an invariant.
        """
        engine = raw.get("engine", {})
        solver = raw.get("solver", {})
        sampling = raw.get("sampling", {})
        statistics = raw.get("statistics", {})
        holism = raw.get("holism", {})
        output = raw.get("output", {})
        defaults = cls()
        try:
            return cls(
                dense_cap=int(engine.get("dense_cap", defaults.dense_cap)),
                solver_cap=int(solver.get("solver_cap", defaults.solver_cap)),
                seed=int(sampling.get("seed", defaults.seed)),
                trials=int(sampling.get("trials", defaults.trials)),
                workers=int(sampling.get("workers", defaults.workers)),
                qubits=int(sampling.get("qubits", defaults.qubits)),
                alpha=float(statistics.get("alpha", defaults.alpha)),
                epsilon=float(statistics.get("epsilon", defaults.epsilon)),
                exhaustive_cap=int(
                    holism.get("exhaustive_cap", defaults.exhaustive_cap)
                ),
                include_singletons=bool(
                    holism.get("include_singletons", defaults.include_singletons)
                ),
                output_format=output.get("format", defaults.output_format),
            )
        except (TypeError, ValueError, AttributeError) as e:
            raise ConfigError("file", f"malformed value ({e})") from e

    def as_dict(self) -> dict[str, Any]:
        """Flat mapping of every field, used in report metadata."""
        return {
            "dense_cap": self.dense_cap,
            "solver_cap": self.solver_cap,
            "seed": self.seed,
            "trials": self.trials,
            "workers": self.workers,
            "qubits": self.qubits,
            "alpha": self.alpha,
            "epsilon": self.epsilon,
            "exhaustive_cap": self.exhaustive_cap,
            "include_singletons": self.include_singletons,
            "output_format": self.output_format,
        }


# ---------------------------------------------------------------------------
# Public API
# ---------------------------------------------------------------------------


def default_config_path() -> str:
    """Return the config path from ``HOLISM_LAB_CONFIG`` or the bundled default."""
    return os.environ.get(CONFIG_PATH_ENV) or DEFAULT_CONFIG_PATH


def config() -> Any:
    """Raw config JSON. Raises :class:`RuntimeError` before :func:`init_config`."""
    if _config is None or _config.json is None:
        raise RuntimeError("init_config must be called before config()")
    return _config.json


def settings() -> LabSettings:
    """
    Return the validated settings derived from :func:`config`.

    :raises RuntimeError: When ``init_config()`` was not called.
    :raises ConfigError: When a configured value is invalid.
    """
    return LabSettings.from_json(config())


def data_dir() -> Path:
    """
    Absolute directory holding ``errors.json``.

    :raises RuntimeError: When ``init_config()`` was not called.
    """
    if _data_dir is None:
        raise RuntimeError("init_config must be called before data_dir()")
    return _data_dir


def init_config(config_path: str) -> None:
    """
    Load ``config_path`` and resolve the data directory.

    Must run before :func:`config`, :func:`settings` or :func:`data_dir`.
    """
    global _config, _data_dir

    _config = load(
        path=config_path,
        default_data=(files("holism_lab.defaults") / "config.default.json").read_text(),
        strict=True,
        load_file=False,
        preserve=True,
    )

    try:
        _config.reload(strict=True)
    except JSONDeserializationError:
        _reset(f"{config_path} is malformed JSON.")
    else:
        problem = _schema_problem(_config.json)
        if problem is not None:
            _reset(f"{config_path}: {problem}")

    _data_dir = Path(config()["paths"]["data"]).expanduser().resolve()
    _data_dir.mkdir(parents=True, exist_ok=True)
    cli.success(f"Data directory: {_data_dir}", verbosity=logging.DEBUG)


# ---------------------------------------------------------------------------
# File checks
# ---------------------------------------------------------------------------


def _schema_problem(raw: Any) -> str | None:
    """Why ``raw`` cannot serve as a config file, or ``None``."""
    try:
        version = raw["file"]["version"]
    except (KeyError, TypeError):
        return "no 'file.version' key."
    try:
        version = int(version)
    except (TypeError, ValueError):
        return f"version {version!r} is not an integer."
    match version:
        # Migrations from older versions go here as their own cases
        case _ if version == CURRENT_CONFIG_VERSION:
            pass
        case _:
            return f"version {version} is unknown. Maybe too new?"
    paths = raw.get("paths")
    if not isinstance(paths, dict) or not isinstance(paths.get("data"), str):
        return "no 'paths.data' directory."
    return None


def _reset(reason: str) -> None:
    assert _config is not None
    cli.fail(f"{reason}\nThe default config will replace it.")
    cli.animate_message_blocking(
        "Writing default config to disk...",
        5,
        message_right="[CTRL-C to cancel]",
    )
    _config.restore_default()
    cli.warn("Config reverted to default.")
