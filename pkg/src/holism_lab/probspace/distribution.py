"""
Exact distributions over the sign patterns of ``n`` ±1 variables.

Atom ``a`` is the pattern in which variable ``k`` (1-based) is -1 exactly
when bit ``n-k`` of ``a`` is set, the same order measurement records use.
A subset of variables is encoded the same way as a mask, so the product of
the variables in ``S`` evaluated on atom ``a`` is
``(-1) ** popcount(a & mask(S))``.

Everything here is rational. Floats never enter a distribution.
"""

import json
from collections.abc import Iterable, Sequence
from dataclasses import dataclass
from fractions import Fraction
from math import lcm
from pathlib import Path
from typing import Any

import numpy as np

from ..common.errors import InvalidInputError
from ..quantum.measurement import MeasurementRecord, pattern_indices


# ---------------------------------------------------------------------------
# Encoding helpers
# ---------------------------------------------------------------------------


def parse_rational(raw: Any, field: str = "value") -> Fraction:
    """
    Read a rational from ``"p/q"``, a decimal string or an integer.

    :raises InvalidInputError: For floats, booleans and unparsable text.
    """
    if isinstance(raw, bool) or not isinstance(raw, (int, str)):
        raise InvalidInputError(
            field, f"expected a rational string like '1/2', got {raw!r}"
        )
    try:
        return Fraction(raw)
    except (ValueError, ZeroDivisionError) as e:
        raise InvalidInputError(field, f"not a rational number: {raw!r}") from e


def format_rational(value: Fraction) -> str:
    """Canonical text form: reduced, positive denominator, integers without ``/1``."""
    return str(value)


def subset_mask(n: int, subset: Iterable[int], field: str = "subset") -> int:
    """
    Bit mask of a 1-based variable subset.

    :raises InvalidInputError: When an index lies outside ``1..n``.
    """
    mask = 0
    for k in subset:
        if not 1 <= k <= n:
            raise InvalidInputError(field, f"index {k} out of range 1..{n}")
        mask |= 1 << (n - k)
    return mask


def mask_subset(n: int, mask: int) -> tuple[int, ...]:
    return tuple(k for k in range(1, n + 1) if mask >> (n - k) & 1)


def character(atom: int, mask: int) -> int:
    """Value of the subset product on an atom: +1 or -1."""
    return -1 if (atom & mask).bit_count() & 1 else 1


def atom_label(n: int, atom: int) -> str:
    """``"+-+"`` style label, variable 1 first."""
    return "".join("-" if atom >> (n - k) & 1 else "+" for k in range(1, n + 1))


def fwht(values: list[int]) -> list[int]:
    """Unnormalised Walsh-Hadamard transform over integers (length a power of two)."""
    out = list(values)
    h = 1
    while h < len(out):
        for start in range(0, len(out), 2 * h):
            for i in range(start, start + h):
                x, y = out[i], out[i + h]
                out[i], out[i + h] = x + y, x - y
        h *= 2
    return out


# ---------------------------------------------------------------------------
# Types
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class AtomDistribution:
    """Exact probability per sign pattern, indexed by atom."""

    n: int
    probabilities: tuple[Fraction, ...]

    def __post_init__(self) -> None:
        if self.n < 0:
            raise InvalidInputError("n", "variable count must be non-negative")
        if len(self.probabilities) != 1 << self.n:
            raise InvalidInputError(
                "probabilities",
                f"expected {1 << self.n} atoms, got {len(self.probabilities)}",
            )
        if any(p < 0 for p in self.probabilities):
            raise InvalidInputError("probabilities", "must be non-negative")
        if sum(self.probabilities, Fraction(0)) != 1:
            raise InvalidInputError("probabilities", "must sum to exactly 1")

    def probability(self, atom: int) -> Fraction:
        return self.probabilities[atom]

    def support(self) -> tuple[int, ...]:
        return tuple(a for a, p in enumerate(self.probabilities) if p)

    def to_json(self) -> dict[str, Any]:
        return {
            "n": self.n,
            "probabilities": [format_rational(p) for p in self.probabilities],
            "support": {
                atom_label(self.n, a): format_rational(self.probabilities[a])
                for a in self.support()
            },
        }

    @classmethod
    def from_json(cls, raw: dict[str, Any]) -> "AtomDistribution":
        try:
            n = int(raw["n"])
            values = raw["probabilities"]
        except (KeyError, TypeError, ValueError) as e:
            raise InvalidInputError(
                "distribution", f"malformed distribution ({e})"
            ) from e
        return cls(
            n,
            tuple(
                parse_rational(v, f"probabilities[{i}]") for i, v in enumerate(values)
            ),
        )


@dataclass(frozen=True)
class MomentConstraint:
    """Prescribed expectation of the product of the variables in ``subset``."""

    subset: frozenset[int]
    target: Fraction

    def __post_init__(self) -> None:
        if abs(self.target) > 1:
            raise InvalidInputError(
                "value", f"target {self.target} lies outside [-1, 1]"
            )
        if any(k < 1 for k in self.subset):
            raise InvalidInputError("subset", "indices are 1-based")

    @classmethod
    def of(
        cls, subset: Iterable[int], target: Fraction | int | str
    ) -> "MomentConstraint":
        return cls(frozenset(subset), Fraction(target))

    def mask(self, n: int) -> int:
        return subset_mask(n, self.subset)

    def to_json(self) -> dict[str, Any]:
        return {"subset": sorted(self.subset), "value": format_rational(self.target)}

    @classmethod
    def from_json(cls, raw: Any, position: int = 0) -> "MomentConstraint":
        where = f"constraints[{position}]"
        if not isinstance(raw, dict):
            raise InvalidInputError(
                where, "expected an object with 'subset' and 'value'"
            )
        if "subset" not in raw or not isinstance(raw["subset"], list):
            raise InvalidInputError(f"{where}.subset", "expected a list of indices")
        if "value" not in raw:
            raise InvalidInputError(f"{where}.value", "missing")
        subset = raw["subset"]
        if any(isinstance(k, bool) or not isinstance(k, int) for k in subset):
            raise InvalidInputError(f"{where}.subset", "indices must be integers")
        target = parse_rational(raw["value"], f"{where}.value")
        if abs(target) > 1:
            raise InvalidInputError(f"{where}.value", f"{target} lies outside [-1, 1]")
        if any(k < 1 for k in subset):
            raise InvalidInputError(f"{where}.subset", "indices are 1-based")
        return cls(frozenset(subset), target)


def constraints_to_json(
    constraints: Sequence[MomentConstraint],
) -> list[dict[str, Any]]:
    return [c.to_json() for c in constraints]


def constraints_from_json(raw: Any) -> list[MomentConstraint]:
    if not isinstance(raw, list):
        raise InvalidInputError("constraints", "expected a JSON array")
    return [MomentConstraint.from_json(item, i) for i, item in enumerate(raw)]


def read_constraints(path: str | Path) -> list[MomentConstraint]:
    """
    Load a constraint file: a JSON array of ``{"subset": [...], "value": "p/q"}``.

    :raises InvalidInputError: When the file is missing or not JSON,
        or when an entry is malformed.
    """
    try:
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
    except FileNotFoundError as e:
        raise InvalidInputError("constraints", f"file not found: {path}") from e
    except json.JSONDecodeError as e:
        raise InvalidInputError("constraints", f"malformed JSON ({e.msg})") from e
    return constraints_from_json(raw)


def write_constraints(
    constraints: Sequence[MomentConstraint], path: str | Path
) -> None:
    Path(path).write_text(
        json.dumps(constraints_to_json(constraints), indent=2) + "\n", encoding="utf-8"
    )


# ---------------------------------------------------------------------------
# Operations
# ---------------------------------------------------------------------------


def expectation_of_subset(dist: AtomDistribution, subset: Iterable[int]) -> Fraction:
    """
    ``E(prod_{k in subset} X_k)`` under ``dist``; the empty subset gives 1.

    :raises InvalidInputError: When an index lies outside ``1..n``.
    """
    mask = subset_mask(dist.n, subset)
    return sum(
        (p * character(a, mask) for a, p in enumerate(dist.probabilities) if p),
        Fraction(0),
    )


def walsh_moments(dist: AtomDistribution) -> tuple[Fraction, ...]:
    """All ``2**n`` subset expectations at once, indexed by subset mask."""
    denominator = lcm(*(p.denominator for p in dist.probabilities))
    scaled = [p.numerator * (denominator // p.denominator) for p in dist.probabilities]
    return tuple(Fraction(v, denominator) for v in fwht(scaled))


def marginal(dist: AtomDistribution, subset: Iterable[int]) -> AtomDistribution:
    """
    Joint law of the variables in ``subset``, renumbered ``1..len(subset)``
    in increasing index order.
    """
    indices = sorted(set(subset))
    subset_mask(dist.n, indices)
    m = len(indices)
    out = [Fraction(0)] * (1 << m)
    for a, p in enumerate(dist.probabilities):
        if not p:
            continue
        b = 0
        for position, k in enumerate(indices, start=1):
            if a >> (dist.n - k) & 1:
                b |= 1 << (m - position)
        out[b] += p
    return AtomDistribution(m, tuple(out))


def distribution_from_record(record: MeasurementRecord) -> AtomDistribution:
    """
    Empirical atom frequencies of a record as exact fractions.

    :raises InvalidInputError: When the record has no trials.
    """
    if record.trials == 0:
        raise InvalidInputError("record", "record has no trials")
    counts = np.bincount(pattern_indices(record), minlength=1 << record.n)
    return AtomDistribution(
        record.n, tuple(Fraction(int(c), record.trials) for c in counts)
    )


def ghz_distribution(n: int, sign: int = 1) -> AtomDistribution:
    """
    Uniform distribution on the atoms whose full product equals ``sign``:
    the joint σ_x law of GHZ_n for ``sign = +1``.
    """
    if sign not in (1, -1):
        raise InvalidInputError("sign", "must be +1 or -1")
    if n < 1:
        raise InvalidInputError("n", "variable count must be at least 1")
    full = (1 << n) - 1
    weight = Fraction(1, 1 << (n - 1)) if n > 1 else Fraction(1)
    return AtomDistribution(
        n,
        tuple(
            weight if character(a, full) == sign else Fraction(0)
            for a in range(1 << n)
        ),
    )


def uniform_distribution(n: int) -> AtomDistribution:
    return AtomDistribution(n, (Fraction(1, 1 << n),) * (1 << n))


def point_mass(n: int, atom: int) -> AtomDistribution:
    return AtomDistribution(
        n, tuple(Fraction(1) if a == atom else Fraction(0) for a in range(1 << n))
    )
