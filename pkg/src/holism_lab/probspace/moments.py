"""
Moment-constraint systems over the atom simplex.

A system fixes ``E(prod_S X)`` for some subsets ``S``. Together with
normalisation it is a set of linear equalities in the atom probabilities,
solved here exactly:

* constraints with target ±1 force every atom of the opposite sign to zero
  before any linear algebra happens;
* a system that prescribes every subset is inverted directly with a
  Walsh-Hadamard transform;
* anything else goes through the rational simplex, probing the minimum and
  maximum of each surviving atom until two differ.
"""

from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from math import lcm
from typing import Any, Literal

from cliasi import Cliasi

from ..common.errors import CapExceededError, InfeasibleSystemError, InvalidInputError
from .distribution import (
    AtomDistribution,
    MomentConstraint,
    character,
    expectation_of_subset,
    format_rational,
    fwht,
    parse_rational,
    subset_mask,
)
from .simplex import SimplexTableau, feasible_tableau

cli: Cliasi = Cliasi("uninitialized")

DEFAULT_SOLVER_CAP = 10


# ---------------------------------------------------------------------------
# Outcomes
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Infeasible:
    """No distribution satisfies the constraints."""

    kind: Literal["infeasible"] = "infeasible"


@dataclass(frozen=True)
class Unique:
    distribution: AtomDistribution
    kind: Literal["unique"] = "unique"


@dataclass(frozen=True)
class Underdetermined:
    """Two feasible distributions that differ in at least one atom."""

    first: AtomDistribution
    second: AtomDistribution
    kind: Literal["underdetermined"] = "underdetermined"

    def __post_init__(self) -> None:
        if self.first == self.second:
            raise ValueError("underdetermined witnesses must differ")


SolveOutcome = Infeasible | Unique | Underdetermined


def outcome_to_json(outcome: SolveOutcome) -> dict[str, Any]:
    match outcome:
        case Unique(distribution=dist):
            return {
                "outcome": "unique",
                "distribution": dist.to_json(),
                "witnesses": [],
            }
        case Underdetermined(first=first, second=second):
            return {
                "outcome": "underdetermined",
                "distribution": None,
                "witnesses": [first.to_json(), second.to_json()],
            }
        case _:
            return {"outcome": "infeasible", "distribution": None, "witnesses": []}


def outcome_from_json(raw: dict[str, Any]) -> SolveOutcome:
    match raw.get("outcome"):
        case "unique":
            return Unique(AtomDistribution.from_json(raw["distribution"]))
        case "underdetermined":
            first, second = raw["witnesses"]
            return Underdetermined(
                AtomDistribution.from_json(first), AtomDistribution.from_json(second)
            )
        case "infeasible":
            return Infeasible()
        case other:
            raise InvalidInputError("outcome", f"unknown outcome {other!r}")


@dataclass(frozen=True)
class MomentRange:
    """Exact attainable interval of one subset expectation."""

    lo: Fraction
    hi: Fraction

    def to_json(self) -> dict[str, str]:
        return {"lo": format_rational(self.lo), "hi": format_rational(self.hi)}

    @classmethod
    def from_json(cls, raw: dict[str, Any]) -> "MomentRange":
        return cls(parse_rational(raw["lo"], "lo"), parse_rational(raw["hi"], "hi"))

    @property
    def is_point(self) -> bool:
        return self.lo == self.hi


# ---------------------------------------------------------------------------
# System preparation
# ---------------------------------------------------------------------------


@dataclass
class _System:
    n: int
    masks: dict[int, Fraction]
    survivors: list[int]
    tableau: SimplexTableau | None = None
    point: AtomDistribution | None = None


def _merge(n: int, constraints: Iterable[MomentConstraint]) -> dict[int, Fraction]:
    masks: dict[int, Fraction] = {}
    for c in constraints:
        mask = subset_mask(n, c.subset)
        if mask in masks and masks[mask] != c.target:
            raise InvalidInputError(
                "constraints",
                f"subset {sorted(c.subset)} is given both {masks[mask]} and {c.target}",
            )
        masks[mask] = c.target
    return masks


def _check_cap(n: int, solver_cap: int) -> None:
    if n < 1:
        raise InvalidInputError("n", "variable count must be at least 1")
    if n > solver_cap:
        raise CapExceededError(
            f"n={n} exceeds the solver cap of {solver_cap}; raise solver.solver_cap "
            "in the config to allow larger systems"
        )


def _prepare(
    n: int, constraints: Iterable[MomentConstraint], solver_cap: int
) -> _System | None:
    """Validate, presolve and find a feasible point; ``None`` when infeasible."""
    _check_cap(n, solver_cap)
    masks = _merge(n, constraints)
    if masks.setdefault(0, Fraction(1)) != 1:
        return None

    survivors = [
        a
        for a in range(1 << n)
        if all(t not in (1, -1) or character(a, mask) == t for mask, t in masks.items())
    ]
    if not survivors:
        return None
    system = _System(n, masks, survivors)

    if len(masks) == 1 << n:
        denominator = lcm(*(t.denominator for t in masks.values()))
        scaled = [
            masks[s].numerator * (denominator // masks[s].denominator)
            for s in range(1 << n)
        ]
        probabilities = tuple(
            Fraction(v, denominator << n) for v in fwht(scaled)
        )
        if any(p < 0 for p in probabilities):
            return None
        system.point = AtomDistribution(n, probabilities)
        return system

    order = sorted(masks)
    matrix = [[Fraction(character(a, mask)) for a in survivors] for mask in order]
    tableau = feasible_tableau(matrix, [masks[mask] for mask in order])
    if tableau is None:
        return None
    system.tableau = tableau
    if tableau.rank == len(survivors):
        system.point = _distribution(system, tableau.solution())
    return system


def _distribution(system: _System, values: Sequence[Fraction]) -> AtomDistribution:
    probabilities = [Fraction(0)] * (1 << system.n)
    for atom, value in zip(system.survivors, values, strict=True):
        probabilities[atom] = value
    return AtomDistribution(system.n, tuple(probabilities))


def _unit(size: int, position: int) -> list[Fraction]:
    return [Fraction(1) if i == position else Fraction(0) for i in range(size)]


# ---------------------------------------------------------------------------
# Public operations
# ---------------------------------------------------------------------------


def solve_moments(
    n: int,
    constraints: Sequence[MomentConstraint],
    solver_cap: int = DEFAULT_SOLVER_CAP,
) -> SolveOutcome:
    """
    Decide whether the constraints pin down a single distribution.

    Uniqueness is certified by minimising and maximising every atom
    probability; the first atom whose two optima differ yields the two
    witnesses of :class:`Underdetermined`. When the equalities alone already
    have a single solution no probing is needed.

    :raises CapExceededError: When ``n`` exceeds ``solver_cap``.
    :raises InvalidInputError: For out-of-range indices or a subset given two targets.
    """
    global cli
    cli = Cliasi("solver")
    system = _prepare(n, constraints, solver_cap)
    if system is None:
        cli.log(f"n={n}: {len(constraints)} constraint(s) are infeasible")
        return Infeasible()
    if system.point is not None:
        cli.log(f"n={n}: equalities determine a single point")
        return Unique(system.point)

    tableau = system.tableau
    assert tableau is not None
    width = len(system.survivors)
    cli.log(f"n={n}: probing {width} atoms over a rank-{tableau.rank} system")
    for position in range(width):
        cost = _unit(width, position)
        low = tableau.copy()
        lo = low.minimize(cost)
        high = tableau.copy()
        hi = high.maximize(cost)
        if lo != hi:
            return Underdetermined(
                _distribution(system, low.solution()),
                _distribution(system, high.solution()),
            )
    return Unique(_distribution(system, tableau.solution()))


def moment_range(
    n: int,
    constraints: Sequence[MomentConstraint],
    target_subset: Iterable[int],
    solver_cap: int = DEFAULT_SOLVER_CAP,
) -> MomentRange | Infeasible:
    """
    Exact minimum and maximum of ``E(prod_{target_subset} X)`` over every
    distribution satisfying ``constraints``. Both bounds are attained.

    :returns: The interval, or :class:`Infeasible` for an empty system.
    """
    global cli
    cli = Cliasi("range")
    _check_cap(n, solver_cap)
    indices = tuple(target_subset)
    target_mask = subset_mask(n, indices, "target_subset")
    system = _prepare(n, constraints, solver_cap)
    if system is None:
        return Infeasible()
    if system.point is not None:
        value = expectation_of_subset(system.point, indices)
        return MomentRange(value, value)

    assert system.tableau is not None
    cost = [Fraction(character(a, target_mask)) for a in system.survivors]
    lo = system.tableau.copy().minimize(cost)
    hi = system.tableau.copy().maximize(cost)
    cli.log(f"n={n}: range of {sorted(indices)} is [{lo}, {hi}]")
    return MomentRange(lo, hi)


def require_range(
    n: int,
    constraints: Sequence[MomentConstraint],
    target_subset: Iterable[int],
    solver_cap: int = DEFAULT_SOLVER_CAP,
) -> MomentRange:
    """:func:`moment_range` for callers that need an interval.

    :raises InfeasibleSystemError: When the constraints are infeasible.
    """
    result = moment_range(n, constraints, target_subset, solver_cap)
    if isinstance(result, Infeasible):
        raise InfeasibleSystemError(
            f"n={n}: constraints admit no distribution, range is undefined"
        )
    return result


def range_to_json(result: MomentRange | Infeasible) -> dict[str, Any]:
    if isinstance(result, MomentRange):
        return result.to_json()
    return {"outcome": result.kind}


# ---------------------------------------------------------------------------
# Standard systems
# ---------------------------------------------------------------------------


def ghz_constraints(n: int, sign: int = 1) -> list[MomentConstraint]:
    """``E(X_1...X_n) = sign`` and ``E(X_i) = 0`` for every ``i``."""
    if sign not in (1, -1):
        raise InvalidInputError("sign", "must be +1 or -1")
    constraints = [MomentConstraint.of(range(1, n + 1), sign)]
    if n > 1:
        constraints += [MomentConstraint.of((i,), 0) for i in range(1, n + 1)]
    return constraints


def all_zero_constraints(n: int) -> list[MomentConstraint]:
    """``E(prod_S X) = 0`` for every nonempty ``S``."""
    return [
        MomentConstraint.of(subset, 0)
        for size in range(1, n + 1)
        for subset in combinations(range(1, n + 1), size)
    ]


@dataclass
class Prop4Report:
    """All-subset-zero systems have the uniform distribution as unique solution."""

    n: int
    outcome: SolveOutcome
    passed: bool

    def to_json(self) -> dict[str, Any]:
        return {"n": self.n, "passed": self.passed, **outcome_to_json(self.outcome)}


def verify_prop4(n: int, solver_cap: int = DEFAULT_SOLVER_CAP) -> Prop4Report:
    """Solve the all-zero system and check every atom is exactly ``1/2**n``."""
    outcome = solve_moments(n, all_zero_constraints(n), solver_cap)
    uniform = Fraction(1, 1 << n)
    passed = isinstance(outcome, Unique) and all(
        p == uniform for p in outcome.distribution.probabilities
    )
    return Prop4Report(n, outcome, passed)


@dataclass
class Prop5Report:
    """Every ``(n-1)``-subset correlation of a perfectly correlated family is zero."""

    n: int
    sign: int
    ranges: dict[tuple[int, ...], MomentRange | Infeasible] = field(
        default_factory=dict
    )

    @property
    def passed(self) -> bool:
        return bool(self.ranges) and all(
            isinstance(r, MomentRange) and r.lo == 0 and r.hi == 0
            for r in self.ranges.values()
        )

    def to_json(self) -> dict[str, Any]:
        return {
            "n": self.n,
            "sign": self.sign,
            "passed": self.passed,
            "ranges": [
                {"subset": list(subset), **range_to_json(r)}
                for subset, r in self.ranges.items()
            ],
        }


def verify_prop5(
    n: int, sign: int, solver_cap: int = DEFAULT_SOLVER_CAP
) -> Prop5Report:
    """Range of every ``(n-1)``-subset product under :func:`ghz_constraints`."""
    if n < 2:
        raise InvalidInputError("n", "needs at least two variables")
    constraints = ghz_constraints(n, sign)
    report = Prop5Report(n, sign)
    for subset in combinations(range(1, n + 1), n - 1):
        report.ranges[subset] = moment_range(n, constraints, subset, solver_cap)
    return report


@dataclass
class ExtraMeasurementsReport:
    """Which correlation order must be fixed before the distribution is determined."""

    n: int
    sign: int
    steps: list[tuple[int, str]] = field(default_factory=list)
    determined_at: int | None = None
    outcome: SolveOutcome = field(default_factory=Infeasible)

    def to_json(self) -> dict[str, Any]:
        return {
            "n": self.n,
            "sign": self.sign,
            "steps": [{"order": order, "outcome": kind} for order, kind in self.steps],
            "determined_at": self.determined_at,
            **outcome_to_json(self.outcome),
        }


def extra_measurements(
    n: int, sign: int = 1, solver_cap: int = DEFAULT_SOLVER_CAP
) -> ExtraMeasurementsReport:
    """
    Start from :func:`ghz_constraints` and add zero constraints for all pairs,
    then all triples and so on, stopping at the first order whose system is
    unique. ``determined_at`` is that order (1 when the base system already is).
    """
    if n < 2:
        raise InvalidInputError("n", "needs at least two variables")
    constraints = ghz_constraints(n, sign)
    report = ExtraMeasurementsReport(n, sign)
    for order in range(1, n):
        if order > 1:
            constraints += [
                MomentConstraint.of(subset, 0)
                for subset in combinations(range(1, n + 1), order)
            ]
        outcome = solve_moments(n, constraints, solver_cap)
        report.steps.append((order, outcome.kind))
        report.outcome = outcome
        if isinstance(outcome, Unique):
            report.determined_at = order
            break
    return report


@dataclass(frozen=True)
class DependenceWitness:
    """
    Two correlations that each range over an interval but cannot be chosen
    independently: fixing one pins the other.
    """

    fixed_subset: tuple[int, ...]
    fixed_value: Fraction
    target_subset: tuple[int, ...]
    individual: MomentRange
    conditional: MomentRange

    @property
    def dependent(self) -> bool:
        return self.conditional != self.individual

    def to_json(self) -> dict[str, Any]:
        return {
            "fixed_subset": list(self.fixed_subset),
            "fixed_value": format_rational(self.fixed_value),
            "target_subset": list(self.target_subset),
            "individual": self.individual.to_json(),
            "conditional": self.conditional.to_json(),
            "dependent": self.dependent,
        }


def dependence_witness(
    n: int = 4,
    sign: int = 1,
    fixed_subset: Sequence[int] = (1, 2),
    fixed_value: Fraction | int = 1,
    target_subset: Sequence[int] = (3, 4),
    solver_cap: int = DEFAULT_SOLVER_CAP,
) -> DependenceWitness:
    """
    Range of ``target_subset`` under :func:`ghz_constraints`, before and after
    also fixing ``E(prod_{fixed_subset} X) = fixed_value``.

    :raises InfeasibleSystemError: When the extra constraint leaves no
        feasible distribution.
    """
    base = ghz_constraints(n, sign)
    extra = [*base, MomentConstraint.of(fixed_subset, fixed_value)]
    return DependenceWitness(
        tuple(sorted(fixed_subset)),
        Fraction(fixed_value),
        tuple(sorted(target_subset)),
        require_range(n, base, target_subset, solver_cap),
        require_range(n, extra, target_subset, solver_cap),
    )
