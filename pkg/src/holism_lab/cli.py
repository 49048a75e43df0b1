"""
``holism-lab`` entry point.

Dispatches each subcommand to its module and writes one machine-readable
document (JSON by default, CSV with ``--format csv``) to stdout or to
``--out``. Console messages go through cliasi; use ``--out`` to keep the
document separate from them.

Exit codes:
    0: success, or a verification that passed
    1: a verification that failed (``verify``, ``holism``)
    2: usage error or malformed input; the diagnostic names the field

Example::
    $ holism-lab expect --n 3 --pauli XXX
    $ holism-lab sample --n 3 --trials 1000 --seed 7 --out record.csv
    $ holism-lab range --n 4 --constraints ghz4.json --subset 1,2
    $ holism-lab verify --prop 1 --n 5
"""

import dataclasses
import json
import sys
from argparse import Namespace
from collections.abc import Callable
from pathlib import Path
from typing import Any

import pandas as pd
from cliasi import Cliasi

from .common.arguments import parse_args
from .common.config import LabSettings, settings
from .common.errors import InvalidInputError, LabError
from .common.failure import log_error
from .holism import (
    FamilySource,
    PropertySpec,
    check_strict_holism,
    constant_first_family,
    entropy_estimate,
    ghz_family,
    independent_coins_family,
)
from .probspace.distribution import read_constraints
from .probspace.moments import Infeasible, moment_range, outcome_to_json, solve_moments
from .quantum.measurement import (
    bernoulli_test,
    read_record,
    record_frame,
    sample_joint_x,
    subset_product_series,
)
from .quantum.pauli import format_pauli, parse
from .quantum.state import ghz_expectation
from .verify import PROPOSITIONS, verify_all

cli: Cliasi = Cliasi("uninitialized")

Payload = dict[str, Any] | pd.DataFrame
Handler = Callable[[Namespace, LabSettings], tuple[Payload | None, int]]


# ---------------------------------------------------------------------------
# Settings and output
# ---------------------------------------------------------------------------


def _settings(args: Namespace) -> LabSettings:
    """Config file values with any command-line overrides applied."""
    overrides = {
        name: getattr(args, name)
        for name in ("trials", "seed", "workers", "alpha", "epsilon")
        if getattr(args, name, None) is not None
    }
    if getattr(args, "include_singletons", None) is not None:
        overrides["include_singletons"] = args.include_singletons
    if args.format is not None:
        overrides["output_format"] = args.format
    return dataclasses.replace(settings(), **overrides)


def render(payload: Payload, output_format: str) -> str:
    """Serialise a payload deterministically."""
    if isinstance(payload, pd.DataFrame):
        return str(payload.to_csv(index=False, lineterminator="\n"))
    if output_format == "csv":
        return str(pd.json_normalize(payload).to_csv(index=False, lineterminator="\n"))
    return json.dumps(payload, sort_keys=True, indent=2) + "\n"


def _emit(payload: Payload, output_format: str, out: str | None) -> None:
    text = render(payload, output_format)
    if out is None:
        sys.stdout.write(text)
        return
    Path(out).write_text(text, encoding="utf-8")
    cli.success(f"Wrote {out}")


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------


def _expect(args: Namespace, lab: LabSettings) -> tuple[Payload, int]:
    p = parse(args.pauli)
    if p.n != args.n:
        raise InvalidInputError("pauli", f"string has {p.n} sites but --n is {args.n}")
    value = ghz_expectation(args.n, p, args.engine, lab.dense_cap)
    return {
        "n": args.n,
        "string": format_pauli(p),
        "engine": args.engine,
        "value": value,
    }, 0


def _sample(args: Namespace, lab: LabSettings) -> tuple[Payload, int]:
    record = sample_joint_x(args.n, lab.trials, lab.seed, lab.workers)
    cli.info(f"Sampled {record.trials} trials of GHZ_{record.n} (seed {record.seed})")
    return record_frame(record), 0


def _bernoulli(args: Namespace, lab: LabSettings) -> tuple[Payload, int]:
    record = read_record(args.record)
    series = subset_product_series(record, args.subset)
    return bernoulli_test(series, lab.alpha, args.subset).to_json(), 0


def _entropy(args: Namespace, lab: LabSettings) -> tuple[Payload, int]:
    if args.record is not None:
        source = FamilySource.empirical(read_record(args.record), label=args.record)
    else:
        source = ghz_family(args.n)
    return entropy_estimate(source, args.subset).to_json(), 0


def _solve(args: Namespace, lab: LabSettings) -> tuple[Payload, int]:
    constraints = read_constraints(args.constraints)
    outcome = solve_moments(args.n, constraints, lab.solver_cap)
    cli.info(f"Moment system on {args.n} variables is {outcome.kind}")
    return outcome_to_json(outcome), 0


def _range(args: Namespace, lab: LabSettings) -> tuple[Payload, int]:
    constraints = read_constraints(args.constraints) if args.constraints else []
    result = moment_range(args.n, constraints, args.subset, lab.solver_cap)
    if isinstance(result, Infeasible):
        cli.warn("Constraints are infeasible, no interval exists")
        return {"outcome": "infeasible", "lo": None, "hi": None}, 0
    return result.to_json(), 0


_FAMILIES: dict[str, Callable[[int], FamilySource]] = {
    "ghz": ghz_family,
    "independent": independent_coins_family,
    "constant-first": constant_first_family,
}


def _holism(args: Namespace, lab: LabSettings) -> tuple[Payload, int]:
    if args.record is not None:
        source = FamilySource.empirical(read_record(args.record), label=args.record)
    else:
        source = _FAMILIES[args.family](args.n)
    prop = PropertySpec(
        args.property,
        epsilon=lab.epsilon,
        functional=args.functional,
        target=args.target,
        comparison=args.comparison,
    )
    report = check_strict_holism(
        source,
        prop,
        exhaustive_cap=lab.exhaustive_cap,
        include_singletons=lab.include_singletons,
        sample=args.sample,
        seed=lab.seed,
    )
    return report.to_json(), 0 if report.verdict else 1


def _verify(args: Namespace, lab: LabSettings) -> tuple[Payload | None, int]:
    if args.list:
        text = "Registered checks:"
        for key, check in PROPOSITIONS.items():
            text += f"\n- {key}: {check['title']}"
        cli.info(text)
        return None, 0
    only = None
    if args.prop:
        only = [k.strip() for raw in args.prop for k in raw.split(",") if k.strip()]
        unknown = [k for k in only if k not in PROPOSITIONS]
        if unknown:
            raise InvalidInputError("prop", f"unknown check(s) {', '.join(unknown)}")
    report = verify_all(lab, only, args.n)
    return report.to_json(), 0 if report.passed else 1


COMMANDS: dict[str, Handler] = {
    "expect": _expect,
    "sample": _sample,
    "bernoulli-test": _bernoulli,
    "entropy": _entropy,
    "solve": _solve,
    "range": _range,
    "holism": _holism,
    "verify": _verify,
}


# ---------------------------------------------------------------------------
# Main Entry Point
# ---------------------------------------------------------------------------


def main(argv: list[str] | None = None) -> int:
    """
    Entry point for the ``holism-lab`` command.

    :returns: Exit code (0 success, 1 failed verification, 2 usage or input error).
    """
    global cli
    try:
        args = parse_args(argv)
    except SystemExit as e:
        return e.code if isinstance(e.code, int) else 2
    cli = Cliasi("holism-lab")

    try:
        lab = _settings(args)
        payload, status = COMMANDS[args.command](args, lab)
    except LabError as e:
        cli.fail(f"{args.command}: {e}", messages_stay_in_one_line=False)
        log_error(e, f"{args.command}:input:invalid", True)
        return 2

    if payload is not None:
        _emit(payload, lab.output_format, args.out)
    return status


if __name__ == "__main__":
    raise SystemExit(main())
