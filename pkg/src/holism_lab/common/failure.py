"""
Persistent error log for holism_lab.

Library code raises :class:`~holism_lab.common.errors.LabError` subclasses and
the command line turns them into exit codes. Each rejected input and each
crashed verification check is also appended to ``errors.json`` in the data
directory, so a long batch of runs can be audited afterwards.

An entry looks like::

    {
      "timestamp": 1767225600,
      "exception_type": "InvalidInputError",
      "exception_message": "constraints[0].value: not a rational number: 'x'",
      "field": "constraints[0].value",
      "context": "solve:input:invalid",
      "fatal": true
    }

``field`` is ``null`` for errors that do not point at a single input. Only
the newest :data:`MAX_ENTRIES` entries are kept.

Usage:
    >>> from holism_lab.common.failure import init_errors_db, log_error
    >>> init_errors_db()  # once, after init_config()
    >>> try:
    ...     read_constraints(path)
    ... except InvalidInputError as e:
    ...     log_error(e, "solve:input:invalid", fatal=True)

Note:
    :func:`holism_lab.common.arguments.parse_args` calls
    :func:`init_errors_db` for every command.
"""

import logging
from importlib.resources import files
from time import time
from typing import Any

from cliasi import Cliasi
from singlejson import JSONDeserializationError, JSONFile, load

from . import config

# Error messages are never folded into one line
cli = Cliasi("ERROR", messages_stay_in_one_line=False)

_errors: JSONFile | None = None

CURRENT_ERRORS_VERSION: int = 1
MAX_ENTRIES: int = 1000


# ---------------------------------------------------------------------------
# Initialization
# ---------------------------------------------------------------------------


def init_errors_db() -> None:
    """
    Open ``errors.json`` in the data directory, creating it when missing.

    A file that is not JSON, has no usable ``file.version`` or no ``errors``
    list is replaced by the bundled empty log.
    """
    global _errors

    path = config.data_dir() / "errors.json"
    _errors = load(
        path,
        default_data=(files("holism_lab.defaults") / "errors.default.json").read_text(),
        strict=True,
        load_file=False,
        preserve=True,
    )

    try:
        _errors.reload(strict=True)
    except JSONDeserializationError:
        _reset(f"errors.json at {path} is malformed JSON.")
        return

    problem = _schema_problem(_errors.json)
    if problem is not None:
        _reset(problem)
        return
    cli.success(
        f"Error log holds {len(_errors.json['errors'])} entries.",
        verbosity=logging.DEBUG,
    )


# ---------------------------------------------------------------------------
# Internal Helpers
# ---------------------------------------------------------------------------


def _schema_problem(raw: Any) -> str | None:
    """Why ``raw`` is not a usable error log, or ``None`` when it is."""
    try:
        version = raw["file"]["version"]
    except (KeyError, TypeError):
        return "errors.json is missing the 'file.version' key."
    try:
        version = int(version)
    except (TypeError, ValueError):
        return f"errors.json version is not an integer (got {version!r})."
    match version:
        # Add migrations from older versions here as new cases
        case _ if version == CURRENT_ERRORS_VERSION:
            pass
        case _:
            return f"errors.json version {version} is unknown. Maybe too new?"
    if not isinstance(raw.get("errors"), list):
        return "errors.json has no 'errors' list."
    return None


def _reset(reason: str) -> None:
    assert _errors is not None
    cli.fail(f"{reason}\nWill revert to an empty error log.")
    cli.animate_message_blocking(
        "Writing empty error log to disk...",
        3,
        message_right="[CTRL-C to cancel]",
    )
    _errors.restore_default()
    cli.warn("Error log reverted to default.")


def _entry(exception: Exception, context: str, fatal: bool) -> dict[str, Any]:
    field = getattr(exception, "field", None)
    return {
        "timestamp": int(time()),
        "exception_type": type(exception).__name__,
        "exception_message": str(exception),
        "field": field if isinstance(field, str) else None,
        "context": context,
        "fatal": fatal,
    }


# ---------------------------------------------------------------------------
# Public API
# ---------------------------------------------------------------------------


def log_error(exception: Exception, context: str, fatal: bool) -> None:
    """
    Append ``exception`` to the error log and save it.

    :param context: ``command:area:reason``, e.g. ``"range:input:invalid"``
        or ``"verify:prop4:error"``.
    :param fatal: Whether the error ended the command.

    Before :func:`init_errors_db` has run the error is only echoed.
    """
    if _errors is None:
        cli.log(f"{context}: {type(exception).__name__}: {exception}")
        return

    entries = _errors.json["errors"]
    entries.append(_entry(exception, context, fatal))
    if len(entries) > MAX_ENTRIES:
        del entries[: len(entries) - MAX_ENTRIES]
    _errors.save()
