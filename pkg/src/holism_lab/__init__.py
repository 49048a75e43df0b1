"""
holism_lab: GHZ correlations, exact moment systems and strict holism checks.

The most used entry points are re-exported here::

    >>> from holism_lab import ghz_expectation, parse
    >>> ghz_expectation(3, parse("XXX"))
    1.0

Everything else lives in :mod:`holism_lab.quantum`, :mod:`holism_lab.probspace`,
:mod:`holism_lab.holism` and :mod:`holism_lab.verify`.
"""

__version__: str
"""Version written by setuptools_scm, the installed metadata or '0+unknown'."""

try:
    from .__about__ import __version__
except ImportError:
    from importlib.metadata import PackageNotFoundError
    from importlib.metadata import version as _installed_version

    try:
        __version__ = _installed_version("holism_lab")
    except PackageNotFoundError:
        __version__ = "0+unknown"

from .holism import check_strict_holism
from .probspace.moments import moment_range, solve_moments
from .quantum.pauli import parse
from .quantum.state import ghz_expectation
from .verify import verify_all

__all__ = [
    "__version__",
    "check_strict_holism",
    "ghz_expectation",
    "moment_range",
    "parse",
    "solve_moments",
    "verify_all",
]
