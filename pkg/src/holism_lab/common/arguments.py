"""
Command-line argument parsing for the ``holism-lab`` entry point.

Every subcommand shares the options ``--verbose``, ``--warn-only``,
``--config-path``, ``--format`` and ``--out``. After parsing, the
configuration and the error log are initialised and console verbosity is
set, so handlers can rely on :func:`holism_lab.common.config.settings`.

Example::
    >>> from holism_lab.common.arguments import parse_args
    >>> args = parse_args(["range", "--n", "4", "--subset", "1,2"])
    >>> args.subset
    (1, 2)
"""

import argparse
import logging

from cliasi import cli

from .config import default_config_path

COMMANDS = (
    "expect",
    "sample",
    "bernoulli-test",
    "entropy",
    "solve",
    "range",
    "holism",
    "verify",
)

PROPERTY_KINDS = (
    "product-entropy-zero",
    "product-entropy-one",
    "product-expectation-magnitude-one",
    "numeric-threshold",
)


def subset_type(raw: str) -> tuple[int, ...]:
    """Parse ``"1,2,3"`` into a sorted tuple of distinct 1-based indices."""
    try:
        tokens = [token for token in raw.split(",") if token.strip()]
        values = tuple(sorted({int(token) for token in tokens}))
    except ValueError as e:
        raise argparse.ArgumentTypeError(
            f"expected comma-separated integers, got {raw!r}"
        ) from e
    if not values or values[0] < 1:
        raise argparse.ArgumentTypeError(f"expected 1-based indices, got {raw!r}")
    return values


def _positive(raw: str) -> int:
    try:
        value = int(raw)
    except ValueError as e:
        raise argparse.ArgumentTypeError(f"expected an integer, got {raw!r}") from e
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {value}")
    return value


# ---------------------------------------------------------------------------
# Common Argument Handling
# ---------------------------------------------------------------------------


def _common_parser() -> argparse.ArgumentParser:
    """Shared options, attached to every subcommand as a parent parser."""
    parser = argparse.ArgumentParser(add_help=False)
    parser.add_argument(
        "--verbose",
        dest="verbose",
        action="store_true",
        default=False,
        help="Enable verbose mode for this run.",
    )
    parser.add_argument(
        "--warn-only",
        dest="warn_only",
        action="store_true",
        default=False,
        help="Only display warnings and errors (overrides --verbose).",
    )
    parser.add_argument(
        "--config-path",
        dest="config_path",
        action="store",
        default=default_config_path(),
        help="Path to main config file "
        "(default: $HOLISM_LAB_CONFIG or data/config.json)",
    )
    parser.add_argument(
        "--format",
        dest="format",
        choices=("json", "csv"),
        default=None,
        help="Output format (default: output.format from the config)",
    )
    parser.add_argument(
        "--out",
        dest="out",
        type=str,
        default=None,
        help="Write the machine-readable output to this file instead of stdout",
    )
    return parser


def _add_sampling(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--trials", dest="trials", type=_positive, default=None)
    parser.add_argument("--seed", dest="seed", type=int, default=None)
    parser.add_argument("--workers", dest="workers", type=_positive, default=None)


def build_parser() -> argparse.ArgumentParser:
    """The full ``holism-lab`` parser with one subparser per command."""
    common = _common_parser()
    parser = argparse.ArgumentParser(
        prog="holism-lab",
        description="Exact and sampled checks of strict holism for GHZ spin families",
    )
    commands = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    expect = commands.add_parser(
        "expect", parents=[common], help="Expectation of a Pauli string on GHZ_n"
    )
    expect.add_argument("--n", dest="n", type=_positive, required=True)
    expect.add_argument(
        "--pauli", dest="pauli", required=True, help="Pauli string, e.g. XXYY or -iXYZ"
    )
    expect.add_argument(
        "--engine",
        dest="engine",
        choices=("dense", "closed-form", "both"),
        default="both",
    )

    sample = commands.add_parser(
        "sample", parents=[common], help="Simulate joint σ_x measurements of GHZ_n"
    )
    sample.add_argument("--n", dest="n", type=_positive, required=True)
    _add_sampling(sample)

    bernoulli = commands.add_parser(
        "bernoulli-test",
        parents=[common],
        help="Frequency and runs tests for one subset-product series of a record",
    )
    bernoulli.add_argument("--record", dest="record", required=True)
    bernoulli.add_argument("--subset", dest="subset", type=subset_type, required=True)
    bernoulli.add_argument("--alpha", dest="alpha", type=float, default=None)

    entropy = commands.add_parser(
        "entropy", parents=[common], help="Entropy of a subset-product variable"
    )
    entropy_source = entropy.add_mutually_exclusive_group(required=True)
    entropy_source.add_argument("--record", dest="record", default=None)
    entropy_source.add_argument(
        "--n", dest="n", type=_positive, default=None, help="Analytic GHZ_n source"
    )
    entropy.add_argument("--subset", dest="subset", type=subset_type, required=True)

    solve = commands.add_parser(
        "solve", parents=[common], help="Feasibility and uniqueness of a moment system"
    )
    solve.add_argument("--n", dest="n", type=_positive, required=True)
    solve.add_argument("--constraints", dest="constraints", required=True)

    bounds = commands.add_parser(
        "range", parents=[common], help="Attainable interval of one subset expectation"
    )
    bounds.add_argument("--n", dest="n", type=_positive, required=True)
    bounds.add_argument("--constraints", dest="constraints", default=None)
    bounds.add_argument("--subset", dest="subset", type=subset_type, required=True)

    holism = commands.add_parser(
        "holism", parents=[common], help="Check strict Π-holism of a family"
    )
    holism_source = holism.add_mutually_exclusive_group(required=True)
    holism_source.add_argument("--record", dest="record", default=None)
    holism_source.add_argument(
        "--n", dest="n", type=_positive, default=None, help="Size of an analytic family"
    )
    holism.add_argument(
        "--family",
        dest="family",
        choices=("ghz", "independent", "constant-first"),
        default="ghz",
        help="Analytic family used with --n (default: ghz)",
    )
    holism.add_argument(
        "--property", dest="property", choices=PROPERTY_KINDS, default=PROPERTY_KINDS[0]
    )
    holism.add_argument("--epsilon", dest="epsilon", type=float, default=None)
    holism.add_argument(
        "--functional",
        dest="functional",
        choices=("entropy", "abs-expectation"),
        default="entropy",
        help="Functional for --property numeric-threshold",
    )
    holism.add_argument(
        "--target",
        dest="target",
        type=float,
        default=0.0,
        help="Threshold for --property numeric-threshold",
    )
    holism.add_argument(
        "--comparison",
        dest="comparison",
        choices=("at-most", "at-least"),
        default="at-most",
    )
    holism.add_argument(
        "--sample",
        dest="sample",
        type=_positive,
        default=None,
        help="Evaluate this many random subfamilies (non-exhaustive)",
    )
    holism.add_argument(
        "--no-singletons",
        dest="include_singletons",
        action="store_false",
        default=None,
        help="Exclude one-member subfamilies",
    )
    holism.add_argument("--seed", dest="seed", type=int, default=None)

    verify = commands.add_parser(
        "verify", parents=[common], help="Run the verification suite"
    )
    verify.add_argument(
        "--prop",
        dest="prop",
        action="append",
        default=None,
        help="Run only this check (repeatable)",
    )
    verify.add_argument("--n", dest="n", type=_positive, default=None)
    verify.add_argument(
        "--list",
        dest="list",
        action="store_true",
        default=False,
        help="List the registered checks and exit",
    )
    verify.add_argument("--alpha", dest="alpha", type=float, default=None)
    verify.add_argument("--epsilon", dest="epsilon", type=float, default=None)
    _add_sampling(verify)
    return parser


def parse_args(argv: list[str] | None = None) -> argparse.Namespace:
    """
    Parse ``argv``, initialise config and error tracking, and set verbosity.

    :raises SystemExit: With status 2 on a usage error (argparse behaviour).
    """
    args = build_parser().parse_args(argv)

    # Initialize configuration system with the specified config file
    from .config import init_config

    init_config(args.config_path)

    # Initialize error tracking database
    from .failure import init_errors_db

    init_errors_db()

    # Configure CLI output verbosity
    cli.messages_stay_in_one_line = not args.verbose
    cli.min_verbose_level = (
        logging.WARNING
        if args.warn_only
        else logging.DEBUG
        if args.verbose
        else logging.INFO
    )

    return args
