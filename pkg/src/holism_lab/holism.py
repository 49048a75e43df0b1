"""
Strict Π-holism checks for families of ±1 random variables.

A family ``F = {X_1, ..., X_N}`` is strictly Π-holistic when

  (i)   the whole family has Π,
  (ii)  no nonempty proper subfamily has Π, and
  (iii) no nonempty proper subfamily comes within ``epsilon`` of Π.

Π is always a property of a subset-product variable ``prod_{k in S} X_k``:
a threshold on either its binary entropy or its absolute expectation.
Named kinds are shorthands for the common thresholds.

Sources are either analytic (an exact :class:`AtomDistribution`, or a
:class:`ParityLaw` for the built-in families at any size) or empirical (a
:class:`MeasurementRecord`). Analytic sources are judged exactly. For
empirical sources "has Π" means the threshold is reachable somewhere in a
5σ band around the plug-in probability of +1, so a finite record can
still certify a whole family as deterministic.

Subfamilies are visited exhaustively up to the configured cap. Above the
cap the check refuses unless an explicit sample size is given, and a
sampled report is labelled non-exhaustive.
"""

import math
from collections.abc import Iterable, Iterator
from dataclasses import dataclass, field
from functools import cached_property
from fractions import Fraction
from itertools import combinations
from typing import Any, Literal

import numpy as np
import numpy.typing as npt
from cliasi import Cliasi

from .common.errors import CapExceededError, InsufficientDataError, InvalidInputError
from .probspace.distribution import (
    AtomDistribution,
    expectation_of_subset,
    subset_mask,
    walsh_moments,
)
from .quantum.measurement import (
    MIN_SERIES_LENGTH,
    MeasurementRecord,
    pattern_indices,
    philox,
    subset_product_series,
)

cli: Cliasi = Cliasi("uninitialized")

DEFAULT_EPSILON = 0.1
DEFAULT_EXHAUSTIVE_CAP = 20
BAND_SIGMAS = 5

PropertyKind = Literal[
    "product-entropy-zero",
    "product-entropy-one",
    "product-expectation-magnitude-one",
    "numeric-threshold",
]
Functional = Literal["entropy", "abs-expectation"]
Comparison = Literal["at-most", "at-least"]

_NAMED_KINDS: dict[str, tuple[Functional, float, Comparison]] = {
    "product-entropy-zero": ("entropy", 0.0, "at-most"),
    "product-entropy-one": ("entropy", 1.0, "at-least"),
    "product-expectation-magnitude-one": ("abs-expectation", 1.0, "at-least"),
}

HOLISTIC = "strictly-Π-holistic"
NOT_HOLISTIC = "not-Π-holistic"


# ---------------------------------------------------------------------------
# Sources and properties
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ParityLaw:
    """
    Uniform law on the sign patterns where each product in ``generators``
    (subset masks) equals +1.

    A subset product is then surely +1 when its mask lies in the XOR span of
    the generators and a fair coin otherwise. Nothing of size ``2**n`` is
    built, so analytic families stay cheap at any size.
    """

    n: int
    generators: tuple[int, ...] = ()

    def __post_init__(self) -> None:
        if self.n < 1:
            raise InvalidInputError("n", "variable count must be at least 1")
        full = (1 << self.n) - 1
        for mask in self.generators:
            if not 0 < mask <= full:
                raise InvalidInputError("generators", f"mask {mask} out of range")

    @cached_property
    def deterministic(self) -> frozenset[int]:
        """Masks whose subset product is +1 with probability one."""
        span = {0}
        for mask in self.generators:
            span |= {s ^ mask for s in span}
        return frozenset(span)

    def moment(self, mask: int) -> Fraction:
        return Fraction(1) if mask in self.deterministic else Fraction(0)

    def probabilities(self) -> npt.NDArray[np.float64]:
        """``P(prod_S X = +1)`` for every mask ``S``."""
        out = np.full(1 << self.n, 0.5)
        out[sorted(self.deterministic)] = 1.0
        return out


@dataclass(frozen=True)
class FamilySource:
    """The family ``{X_1..X_size}``: exact (distribution or parity law) or sampled."""

    size: int
    distribution: AtomDistribution | None = None
    record: MeasurementRecord | None = None
    label: str = ""
    law: ParityLaw | None = None

    def __post_init__(self) -> None:
        sources: tuple[AtomDistribution | ParityLaw | MeasurementRecord | None, ...] = (
            self.distribution,
            self.law,
            self.record,
        )
        given = [s for s in sources if s is not None]
        if len(given) != 1:
            raise InvalidInputError(
                "source", "give exactly one of distribution, law or record"
            )
        n = given[0].n
        if n != self.size:
            raise InvalidInputError(
                "source", f"family size {self.size} but source has {n} variables"
            )

    @classmethod
    def analytic(
        cls, distribution: AtomDistribution, label: str = ""
    ) -> "FamilySource":
        return cls(distribution.n, distribution=distribution, label=label)

    @classmethod
    def parity(cls, law: ParityLaw, label: str = "") -> "FamilySource":
        return cls(law.n, law=law, label=label)

    @classmethod
    def empirical(cls, record: MeasurementRecord, label: str = "") -> "FamilySource":
        return cls(record.n, record=record, label=label)

    @property
    def is_empirical(self) -> bool:
        return self.record is not None

    def describe(self) -> dict[str, Any]:
        out: dict[str, Any] = {
            "size": self.size,
            "kind": "empirical" if self.is_empirical else "analytic",
            "label": self.label,
        }
        if self.record is not None:
            out["record"] = self.record.metadata()
        return out


@dataclass(frozen=True)
class PropertySpec:
    """Π: ``functional(prod_S X)`` compared against ``target``."""

    kind: PropertyKind = "product-entropy-zero"
    epsilon: float = DEFAULT_EPSILON
    functional: Functional = "entropy"
    target: float = 0.0
    comparison: Comparison = "at-most"

    def __post_init__(self) -> None:
        if not self.epsilon > 0:
            raise InvalidInputError("epsilon", "must be positive")
        if self.kind in _NAMED_KINDS:
            functional, target, comparison = _NAMED_KINDS[self.kind]
            object.__setattr__(self, "functional", functional)
            object.__setattr__(self, "target", target)
            object.__setattr__(self, "comparison", comparison)
        elif self.kind != "numeric-threshold":
            raise InvalidInputError("property", f"unknown property kind {self.kind!r}")
        if self.functional not in ("entropy", "abs-expectation"):
            raise InvalidInputError(
                "functional", f"unknown functional {self.functional!r}"
            )
        if self.comparison not in ("at-most", "at-least"):
            raise InvalidInputError(
                "comparison", f"unknown comparison {self.comparison!r}"
            )
        if not 0.0 <= self.target <= 1.0:
            raise InvalidInputError("target", "functionals take values in [0, 1]")

    def to_json(self) -> dict[str, Any]:
        return {
            "kind": self.kind,
            "epsilon": self.epsilon,
            "functional": self.functional,
            "target": self.target,
            "comparison": self.comparison,
        }

    @classmethod
    def from_json(cls, raw: dict[str, Any]) -> "PropertySpec":
        return cls(
            kind=raw["kind"],
            epsilon=float(raw["epsilon"]),
            functional=raw.get("functional", "entropy"),
            target=float(raw.get("target", 0.0)),
            comparison=raw.get("comparison", "at-most"),
        )


# ---------------------------------------------------------------------------
# Functionals
# ---------------------------------------------------------------------------


def safe_log2(x: float) -> float:
    if x == 0:
        return 0
    return math.log2(x)


def binary_entropy(p: float | Fraction) -> float:
    """Entropy in bits of a ±1 variable with ``P(+1) = p``; ``0·log 0 = 0``."""
    p = float(p)
    h = -p * safe_log2(p) - (1 - p) * safe_log2(1 - p)
    return min(1.0, max(0.0, h))


def _entropy_array(p: npt.NDArray[np.float64]) -> npt.NDArray[np.float64]:
    q = 1 - p
    with np.errstate(divide="ignore", invalid="ignore"):
        h = -np.where(p > 0, p * np.log2(p), 0.0)
        h -= np.where(q > 0, q * np.log2(q), 0.0)
    return np.clip(h, 0.0, 1.0)


def _functional(
    prop: PropertySpec, p: npt.NDArray[np.float64]
) -> npt.NDArray[np.float64]:
    if prop.functional == "entropy":
        return _entropy_array(p)
    return np.abs(2 * p - 1)


def _has_property(
    prop: PropertySpec, lo: npt.NDArray[np.float64], hi: npt.NDArray[np.float64]
) -> npt.NDArray[np.bool_]:
    """Whether the threshold is met for some ``p`` in ``[lo, hi]``."""
    at_lo, at_hi = _functional(prop, lo), _functional(prop, hi)
    contains_half = (lo <= 0.5) & (hi >= 0.5)
    if prop.functional == "entropy":
        smallest = np.minimum(at_lo, at_hi)
        largest = np.where(contains_half, 1.0, np.maximum(at_lo, at_hi))
    else:
        smallest = np.where(contains_half, 0.0, np.minimum(at_lo, at_hi))
        largest = np.maximum(at_lo, at_hi)
    if prop.comparison == "at-most":
        return smallest <= prop.target
    return largest >= prop.target


def _gap(prop: PropertySpec, value: npt.NDArray[np.float64]) -> npt.NDArray[np.float64]:
    if prop.comparison == "at-most":
        return value - prop.target
    return prop.target - value


def _band(source: FamilySource) -> float:
    if source.record is None:
        return 0.0
    return BAND_SIGMAS / (2 * math.sqrt(source.record.trials))


def _check_subset(source: FamilySource, subset: Iterable[int]) -> tuple[int, ...]:
    indices = tuple(sorted(set(subset)))
    if not indices:
        raise InvalidInputError("subset", "subset must be nonempty")
    subset_mask(source.size, indices)
    return indices


def product_probability(source: FamilySource, subset: Iterable[int]) -> Fraction:
    """``P(prod_subset X = +1)``, exact or as the plug-in frequency of a record."""
    indices = _check_subset(source, subset)
    if source.law is not None:
        return (1 + source.law.moment(subset_mask(source.size, indices))) / 2
    if source.distribution is not None:
        return (1 + expectation_of_subset(source.distribution, indices)) / 2
    assert source.record is not None
    series = subset_product_series(source.record, indices)
    return Fraction(int(np.count_nonzero(series == 1)), source.record.trials)


def product_entropy(source: FamilySource, subset: Iterable[int]) -> float:
    """
    Binary entropy in bits of the product of the variables in ``subset``.

    :raises InvalidInputError: When ``subset`` is empty or out of range.
    """
    return binary_entropy(product_probability(source, subset))


@dataclass(frozen=True)
class EntropyEstimate:
    subset: tuple[int, ...]
    probability: float
    entropy: float
    standard_error: float
    sample_size: int | None

    def to_json(self) -> dict[str, Any]:
        return {
            "subset": list(self.subset),
            "probability": self.probability,
            "entropy": self.entropy,
            "standard_error": self.standard_error,
            "sample_size": self.sample_size,
        }

    @classmethod
    def from_json(cls, raw: dict[str, Any]) -> "EntropyEstimate":
        size = raw["sample_size"]
        return cls(
            tuple(raw["subset"]),
            float(raw["probability"]),
            float(raw["entropy"]),
            float(raw["standard_error"]),
            None if size is None else int(size),
        )


def entropy_estimate(source: FamilySource, subset: Iterable[int]) -> EntropyEstimate:
    """
    :func:`product_entropy` with its delta-method standard error.

    Analytic sources have zero error. The error also vanishes at ``p`` in
    ``{0, 1/2, 1}`` where the entropy is flat or degenerate to first order.
    """
    indices = _check_subset(source, subset)
    p = product_probability(source, indices)
    h = binary_entropy(p)
    if source.record is None or p in (0, 1):
        sample_size = None if source.record is None else source.record.trials
        return EntropyEstimate(indices, float(p), h, 0.0, sample_size)
    m = source.record.trials
    pf = float(p)
    error = abs(math.log2((1 - pf) / pf)) * math.sqrt(pf * (1 - pf) / m)
    return EntropyEstimate(indices, pf, h, error, m)


# ---------------------------------------------------------------------------
# Bulk evaluation
# ---------------------------------------------------------------------------


def walsh_counts(counts: npt.NDArray[np.int64]) -> npt.NDArray[np.int64]:
    """Walsh-Hadamard transform of pattern counts.

    Entry ``S`` of the result is ``sum_t prod_{k in S} s_k(t)``.
    """
    out = counts.astype(np.int64, copy=True)
    h = 1
    while h < out.size:
        view = out.reshape(-1, 2, h)
        low = view[:, 0, :].copy()
        high = view[:, 1, :]
        view[:, 0, :] = low + high
        view[:, 1, :] = low - high
        h *= 2
    return out


def _all_probabilities(source: FamilySource) -> npt.NDArray[np.float64]:
    """``P(prod_S X = +1)`` for every subset mask ``S``."""
    if source.law is not None:
        return source.law.probabilities()
    if source.distribution is not None:
        moments = walsh_moments(source.distribution)
        return np.array([float((1 + m) / 2) for m in moments], dtype=np.float64)
    assert source.record is not None
    counts = np.bincount(pattern_indices(source.record), minlength=1 << source.size)
    sums = walsh_counts(counts)
    return (source.record.trials + sums) / (2 * source.record.trials)


def _canonical_subfamilies(
    size: int, include_singletons: bool
) -> Iterator[tuple[int, ...]]:
    for k in range(1 if include_singletons else 2, size):
        yield from combinations(range(1, size + 1), k)


def _sampled_subfamilies(
    size: int, count: int, include_singletons: bool, seed: int
) -> list[tuple[int, ...]]:
    available = (1 << size) - 2 - (0 if include_singletons else size)
    count = min(count, available)
    rng = philox(seed)
    chosen: set[tuple[int, ...]] = set()
    while len(chosen) < count:
        bits = rng.integers(0, 2, size=size)
        subset = tuple(int(k) + 1 for k in np.flatnonzero(bits))
        if 0 < len(subset) < size and (include_singletons or len(subset) > 1):
            chosen.add(subset)
    return sorted(chosen, key=lambda s: (len(s), s))


# ---------------------------------------------------------------------------
# Report
# ---------------------------------------------------------------------------


@dataclass
class HolismReport:
    """Outcome of the three clauses. ``verdict`` holds iff all three do."""

    source: dict[str, Any]
    prop: PropertySpec
    whole_value: float
    clause_i: bool
    clause_ii: list[tuple[int, ...]] = field(default_factory=list)
    clause_iii: list[tuple[int, ...]] = field(default_factory=list)
    clause_iii_min_gap: float | None = None
    exhaustive: bool = True
    evaluated: int = 0
    notes: dict[str, str] = field(default_factory=dict)

    @property
    def verdict(self) -> bool:
        return self.clause_i and not self.clause_ii and not self.clause_iii

    @property
    def failing_clauses(self) -> tuple[str, ...]:
        failing = []
        if not self.clause_i:
            failing.append("i")
        if self.clause_ii:
            failing.append("ii")
        if self.clause_iii:
            failing.append("iii")
        return tuple(failing)

    def to_json(self) -> dict[str, Any]:
        return {
            "source": self.source,
            "property": self.prop.to_json(),
            "clause_i": {"holds": self.clause_i, "value": self.whole_value},
            "clause_ii": {"violators": [list(s) for s in self.clause_ii]},
            "clause_iii": {
                "min_gap": self.clause_iii_min_gap,
                "violators": [list(s) for s in self.clause_iii],
            },
            "verdict": HOLISTIC if self.verdict else NOT_HOLISTIC,
            "failing_clauses": list(self.failing_clauses),
            "exhaustive": self.exhaustive,
            "subfamilies_evaluated": self.evaluated,
            "notes": self.notes,
        }

    @classmethod
    def from_json(cls, raw: dict[str, Any]) -> "HolismReport":
        return cls(
            source=raw["source"],
            prop=PropertySpec.from_json(raw["property"]),
            whole_value=float(raw["clause_i"]["value"]),
            clause_i=bool(raw["clause_i"]["holds"]),
            clause_ii=[tuple(s) for s in raw["clause_ii"]["violators"]],
            clause_iii=[tuple(s) for s in raw["clause_iii"]["violators"]],
            clause_iii_min_gap=raw["clause_iii"]["min_gap"],
            exhaustive=bool(raw["exhaustive"]),
            evaluated=int(raw["subfamilies_evaluated"]),
            notes=dict(raw["notes"]),
        )


def check_strict_holism(
    source: FamilySource,
    prop: PropertySpec,
    *,
    exhaustive_cap: int = DEFAULT_EXHAUSTIVE_CAP,
    include_singletons: bool = True,
    sample: int | None = None,
    seed: int = 0,
) -> HolismReport:
    """
    Evaluate Π on the whole family and on its nonempty proper subfamilies.

    :param sample: Evaluate this many random subfamilies instead of all of
        them. Required when ``source.size`` exceeds ``exhaustive_cap``.
    :raises InvalidInputError: When the family has fewer than two members.
    :raises InsufficientDataError: When a record has fewer than 100 trials.
    :raises CapExceededError: When the family is over the cap and ``sample`` is None.
    """
    global cli
    cli = Cliasi("holism")
    size = source.size
    if size < 2:
        raise InvalidInputError(
            "size", "a family needs at least two members to have subfamilies"
        )
    if source.record is not None and source.record.trials < MIN_SERIES_LENGTH:
        raise InsufficientDataError(
            f"record has {source.record.trials} trials, "
            f"at least {MIN_SERIES_LENGTH} are required"
        )
    exhaustive = size <= exhaustive_cap and sample is None
    if size > exhaustive_cap and sample is None:
        raise CapExceededError(
            f"family of {size} exceeds the exhaustive cap of {exhaustive_cap}; "
            "request sampling mode with an explicit sample size "
            "(results are non-exhaustive)"
        )

    if exhaustive:
        subsets = list(_canonical_subfamilies(size, include_singletons))
        probabilities = _all_probabilities(source)
        p = probabilities[[subset_mask(size, s) for s in subsets]]
        whole = probabilities[(1 << size) - 1 : (1 << size)]
    else:
        assert sample is not None
        subsets = _sampled_subfamilies(size, sample, include_singletons, seed)
        p = np.array([float(product_probability(source, s)) for s in subsets])
        whole = np.array([float(product_probability(source, range(1, size + 1)))])
    cli.log(f"Evaluating {len(subsets)} subfamilies of a family of {size}")

    band = _band(source)
    whole_value = float(_functional(prop, whole)[0])
    clause_i = bool(
        _has_property(prop, np.clip(whole - band, 0, 1), np.clip(whole + band, 0, 1))[0]
    )
    values = _functional(prop, p)
    has = _has_property(prop, np.clip(p - band, 0, 1), np.clip(p + band, 0, 1))
    gaps = _gap(prop, values)
    near = ~has & (gaps < prop.epsilon)

    report = HolismReport(
        source=source.describe(),
        prop=prop,
        whole_value=whole_value,
        clause_i=clause_i,
        clause_ii=[s for s, h in zip(subsets, has, strict=True) if h],
        clause_iii=[s for s, v in zip(subsets, near, strict=True) if v],
        clause_iii_min_gap=float(gaps[~has].min()) if (~has).any() else None,
        exhaustive=exhaustive,
        evaluated=len(subsets),
        notes=_notes(source, include_singletons, exhaustive, band),
    )
    if report.verdict:
        cli.success(f"Family of {size} is {HOLISTIC} for {prop.kind}")
    else:
        failing = ", ".join(report.failing_clauses)
        cli.info(f"Family of {size} fails clause(s) {failing}")
    return report


def _notes(
    source: FamilySource, include_singletons: bool, exhaustive: bool, band: float
) -> dict[str, str]:
    notes = {
        "subfamilies": "nonempty proper subfamilies, empty subfamily excluded, "
        + ("singletons included" if include_singletons else "singletons excluded"),
        "epsilon": "fixed across subfamily sizes",
        "enumeration": (
            "exhaustive"
            if exhaustive
            else "sampled, not a certificate for clauses ii and iii"
        ),
    }
    if source.record is not None:
        notes["has_property"] = (
            f"threshold reachable within ±{band:.6g} of the plug-in P(+1)"
        )
        notes["semantics"] = source.record.semantics
    else:
        notes["has_property"] = "exact"
    return notes


# ---------------------------------------------------------------------------
# Families
# ---------------------------------------------------------------------------


def ghz_family(size: int) -> FamilySource:
    """Joint σ_x law of GHZ_size: uniform on the patterns with product +1."""
    law = ParityLaw(size, ((1 << size) - 1,))
    return FamilySource.parity(law, label=f"ghz-{size}")


def independent_coins_family(size: int) -> FamilySource:
    return FamilySource.parity(ParityLaw(size), label=f"independent-coins-{size}")


def constant_first_family(size: int) -> FamilySource:
    """``X_1 = +1`` always, the remaining members independent fair coins."""
    first = subset_mask(size, (1,))
    return FamilySource.parity(
        ParityLaw(size, (first,)), label=f"constant-first-{size}"
    )


def alekseev_analog_family(trials: int, seed: int, size: int = 3) -> FamilySource:
    """
    Negative control: ``size`` independent fair signs, sampled ``trials``
    times. The whole family and every subfamily are maximally random, so
    being random is not a holistic property here.

    :raises InsufficientDataError: When ``trials < 100``.
    """
    if trials < MIN_SERIES_LENGTH:
        raise InsufficientDataError(
            f"{trials} trials requested, at least {MIN_SERIES_LENGTH} are required"
        )
    if size < 2:
        raise InvalidInputError("size", "a family needs at least two members")
    rng = philox(seed)
    bits = rng.integers(0, 2, size=(trials, size), dtype=np.int8)
    outcomes = (1 - 2 * bits).astype(np.int8)
    record = MeasurementRecord(size, outcomes, seed, semantics="independent-signs")
    return FamilySource.empirical(record, label=f"random-signs-{size}")
