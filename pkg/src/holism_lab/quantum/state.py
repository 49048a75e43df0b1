"""
GHZ states and exact expectation values of Pauli strings.

Two engines compute ``<ψ|P|ψ>``:

- the dense engine stores the ``2**n`` amplitudes and pairs each basis index
  ``b`` with its flipped partner ``b XOR flip_mask(P)``; no operator matrix
  is ever built. It is limited by the configured dense cap.
- the closed form evaluates the GHZ expectation from the letter counts
  alone and works for any ``n``.

The dense engine is the reference: where the closed form and the textbook
statement of the vanishing-correlation result disagree (products of Z's),
the dense value wins and the mismatch is reported, see :func:`verify_prop1`.
"""

import math
from collections.abc import Iterable
from dataclasses import dataclass, field
from itertools import combinations
from typing import Any, Literal

import numpy as np
import numpy.typing as npt
from cliasi import Cliasi

from ..common.errors import (
    CapExceededError,
    DimensionMismatchError,
    InvalidInputError,
    NonHermitianError,
)
from .pauli import (
    BasisState,
    PauliString,
    all_strings,
    all_x,
    even_y_observable,
    even_y_observables,
    flip_mask,
    flip_support,
    proof_family,
    sign_mask,
    weight,
    x_product,
    y_count,
)

cli: Cliasi = Cliasi("uninitialized")

DEFAULT_DENSE_CAP = 24
TOLERANCE = 1e-12
# Largest n for which the verification sweeps every one of the 4**n strings
EXHAUSTIVE_SWEEP_MAX = 6
# Largest n for which every proper subset and every even-Y set is enumerated;
# above it only singletons, co-singletons and Y pairs are checked
SUBSET_ENUMERATION_MAX = 12
# Amplitudes processed per vectorised block in the dense engine
_CHUNK = 1 << 20

Engine = Literal["dense", "closed-form", "both"]


@dataclass(frozen=True)
class StateVector:
    """Dense, normalised amplitude vector over ``n`` qubits (read-only)."""

    n: int
    amplitudes: npt.NDArray[np.complex128] = field(repr=False)

    def __post_init__(self) -> None:
        if self.amplitudes.shape != (1 << self.n,):
            raise DimensionMismatchError(
                f"{self.n} qubits need {1 << self.n} amplitudes, "
                f"got {self.amplitudes.shape}"
            )
        if abs(norm(self) - 1.0) > TOLERANCE:
            raise InvalidInputError("amplitudes", "state vector is not normalised")
        self.amplitudes.setflags(write=False)

    def amplitude(self, bits: BasisState) -> complex:
        if bits.n != self.n:
            raise DimensionMismatchError(f"state has {self.n} qubits, got {bits.n}")
        return complex(self.amplitudes[bits.index])


def norm(state: StateVector) -> float:
    """Squared-magnitude sum of the amplitudes."""
    return float(np.sum(np.abs(state.amplitudes) ** 2))


def _check_cap(n: int, dense_cap: int) -> None:
    if n < 1:
        raise InvalidInputError("n", "qubit count must be at least 1")
    if n > dense_cap:
        raise CapExceededError(
            f"n={n} exceeds the dense cap of {dense_cap} qubits; "
            f"use the closed-form engine for large n"
        )


def make_ghz(n: int, dense_cap: int = DEFAULT_DENSE_CAP) -> StateVector:
    """
    ``(|++...+> + |--...->)/√2`` as a dense vector.

    :raises CapExceededError: When ``n`` exceeds ``dense_cap``.
    """
    _check_cap(n, dense_cap)
    amplitudes = np.zeros(1 << n, dtype=np.complex128)
    amplitudes[0] = amplitudes[-1] = 1 / math.sqrt(2)
    return StateVector(n, amplitudes)


def _require_hermitian(p: PauliString) -> None:
    if not p.is_hermitian:
        raise NonHermitianError(
            f"'{p}' has phase ±i, its expectation is not a real observable"
        )


def expectation(state: StateVector, p: PauliString) -> float:
    """
    ``<ψ|p|ψ>`` for a Hermitian Pauli string, by pairing flipped basis indices.

    :raises NonHermitianError: When the phase of ``p`` is ±i.
    :raises DimensionMismatchError: When ``p.n != state.n``.
    """
    _require_hermitian(p)
    if p.n != state.n:
        raise DimensionMismatchError(f"state has {state.n} qubits, string has {p.n}")
    flips = flip_mask(p)
    signs = sign_mask(p)
    # i**(#Y) from the Y letters, the (-1) from Y/Z on |-> comes from the parity
    global_phase = p.phase.to_complex() * (1j ** y_count(p))
    psi = state.amplitudes
    total = 0j
    dim = 1 << state.n
    for start in range(0, dim, _CHUNK):
        index = np.arange(start, min(start + _CHUNK, dim), dtype=np.int64)
        parity = np.bitwise_count(index & signs) & 1
        phases = 1 - 2 * parity.astype(np.int8)
        total += np.sum(np.conj(psi[index ^ flips]) * phases * psi[index])
    value = global_phase * total
    if abs(value.imag) > TOLERANCE:  # pragma: no cover - impossible for Hermitian p
        raise ArithmeticError(f"expectation of '{p}' has imaginary part {value.imag}")
    return float(value.real)


def ghz_expectation_closed_form(n: int, p: PauliString) -> float:
    """
    GHZ expectation from letter counts, for any ``n``.

    With ``F`` the flip support, ``k`` the number of Y's and ``m`` the number
    of Z's:

    - ``F`` a nonempty proper subset: 0
    - ``F`` empty: 1 if ``m`` is even, else 0
    - ``F`` everything: 0 if ``k`` is odd, else ``(-1)**(k/2)``

    all multiplied by the sign of the string's phase.
    """
    _require_hermitian(p)
    if p.n != n:
        raise DimensionMismatchError(f"n={n} but the string acts on {p.n} qubits")
    support = len(flip_support(p))
    if 0 < support < n:
        value = 0
    elif support == 0:
        value = 1 if p.letters.count("Z") % 2 == 0 else 0
    else:
        k = y_count(p)
        value = 0 if k % 2 else (-1) ** (k // 2)
    return float(p.phase.sign * value)


def ghz_expectation(
    n: int,
    p: PauliString,
    engine: Engine = "both",
    dense_cap: int = DEFAULT_DENSE_CAP,
) -> float:
    """
    GHZ expectation with engine selection.

    ``"both"`` computes dense and closed form and raises when they differ by
    more than :data:`TOLERANCE`; above the dense cap it silently falls back
    to the closed form only.
    """
    if engine == "closed-form" or (engine == "both" and n > dense_cap):
        return ghz_expectation_closed_form(n, p)
    dense = expectation(make_ghz(n, dense_cap), p)
    if engine == "dense":
        return dense
    closed = ghz_expectation_closed_form(n, p)
    if abs(dense - closed) > TOLERANCE:
        raise ArithmeticError(
            f"engines disagree on '{p}': dense {dense}, closed form {closed}"
        )
    return closed


# ---------------------------------------------------------------------------
# Verification of the vanishing-correlation statement
# ---------------------------------------------------------------------------


@dataclass
class Prop1Report:
    """Evidence that partial spin products vanish on GHZ_n while the whole is 1."""

    n: int
    engines: list[str]
    full_product: float
    proper_subsets_checked: int
    proper_subset_failures: list[str]
    proof_family_checked: int
    proof_family_failures: list[str]
    even_y_signs: dict[str, int]
    even_y_failures: list[str]
    exhaustive: bool
    strings_checked: int = 0
    engine_mismatches: list[str] = field(default_factory=list)
    flip_support_failures: list[str] = field(default_factory=list)
    z_parity_exceptions: list[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return (
            abs(self.full_product - 1) <= TOLERANCE
            and not self.proper_subset_failures
            and not self.proof_family_failures
            and not self.even_y_failures
            and not self.engine_mismatches
            and not self.flip_support_failures
        )

    def to_json(self) -> dict[str, Any]:
        return {
            "n": self.n,
            "engines": self.engines,
            "full_product": self.full_product,
            "proper_subsets_checked": self.proper_subsets_checked,
            "proper_subset_failures": self.proper_subset_failures,
            "proof_family_checked": self.proof_family_checked,
            "proof_family_failures": self.proof_family_failures,
            "even_y_signs": self.even_y_signs,
            "even_y_failures": self.even_y_failures,
            "exhaustive": self.exhaustive,
            "strings_checked": self.strings_checked,
            "engine_mismatches": self.engine_mismatches,
            "flip_support_failures": self.flip_support_failures,
            "z_parity_exceptions": self.z_parity_exceptions,
            "passed": self.passed,
        }


def _values(
    n: int, p: PauliString, state: StateVector | None
) -> tuple[float, float | None]:
    closed = ghz_expectation_closed_form(n, p)
    dense = expectation(state, p) if state is not None else None
    return closed, dense


def _is_zero(value: float | None) -> bool:
    return value is None or abs(value) <= TOLERANCE


def _proper_subsets(n: int) -> Iterable[tuple[int, ...]]:
    sizes = range(1, n) if n <= SUBSET_ENUMERATION_MAX else (1, n - 1)
    for size in sizes:
        yield from combinations(range(1, n + 1), size)


def _even_y_sets(n: int) -> Iterable[tuple[frozenset[int], PauliString]]:
    if n <= SUBSET_ENUMERATION_MAX:
        yield from even_y_observables(n)
        return
    for ys in combinations(range(1, n + 1), 2):
        yield frozenset(ys), even_y_observable(n, ys)


def verify_prop1(n: int, dense_cap: int = DEFAULT_DENSE_CAP) -> Prop1Report:
    """
    Check the vanishing of partial spin products on GHZ_n.

    Always checked: every proper-subset X product is 0, the all-X product is 1,
    the parametrised proof family is 0, and every even-Y observable has
    magnitude 1 (sign recorded). Above ``n = 12`` the subset and even-Y
    checks are limited to singletons, co-singletons and Y pairs.

    For ``n <= 6`` every one of the 4**n strings is swept; Z-only products
    with fewer than ``n`` factors and a nonzero value are listed as
    exceptions to the literal statement.
    """
    global cli
    cli = Cliasi("state")
    state = make_ghz(n, dense_cap) if n <= dense_cap else None
    engines = ["closed-form"] + (["dense"] if state is not None else [])
    cli.log(f"Checking GHZ_{n} with engines {', '.join(engines)}")

    closed, dense = _values(n, all_x(n), state)
    full = dense if dense is not None else closed

    proper_failures: list[str] = []
    subsets_checked = 0
    for subset in _proper_subsets(n):
        p = x_product(n, subset)
        closed, dense = _values(n, p, state)
        subsets_checked += 1
        if not (_is_zero(closed) and _is_zero(dense)):
            proper_failures.append(str(p))

    family_failures: list[str] = []
    family_checked = 0
    for p in proof_family(n):
        closed, dense = _values(n, p, state)
        family_checked += 1
        if not (_is_zero(closed) and _is_zero(dense)):
            family_failures.append(str(p))

    even_y_signs: dict[str, int] = {}
    even_y_failures: list[str] = []
    for _, p in _even_y_sets(n):
        closed, dense = _values(n, p, state)
        value = dense if dense is not None else closed
        if abs(abs(value) - 1) > TOLERANCE:
            even_y_failures.append(str(p))
        else:
            even_y_signs[str(p)] = round(value)

    report = Prop1Report(
        n=n,
        engines=engines,
        full_product=full,
        proper_subsets_checked=subsets_checked,
        proper_subset_failures=proper_failures,
        proof_family_checked=family_checked,
        proof_family_failures=family_failures,
        even_y_signs=even_y_signs,
        even_y_failures=even_y_failures,
        exhaustive=n <= EXHAUSTIVE_SWEEP_MAX and state is not None,
    )
    if report.exhaustive:
        _sweep(n, state, report)
    if report.z_parity_exceptions:
        cli.warn(
            f"{len(report.z_parity_exceptions)} Z-parity string(s) with fewer than "
            f"{n} factors have nonzero expectation on GHZ_{n}"
        )
    return report


def _sweep(n: int, state: StateVector | None, report: Prop1Report) -> None:
    assert state is not None
    for p in all_strings(n):
        closed = ghz_expectation_closed_form(n, p)
        dense = expectation(state, p)
        report.strings_checked += 1
        if abs(closed - dense) > TOLERANCE:
            report.engine_mismatches.append(str(p))
        support = len(flip_support(p))
        if 0 < support < n and not (_is_zero(dense) and _is_zero(closed)):
            report.flip_support_failures.append(str(p))
        if 0 < weight(p) < n and not _is_zero(dense):
            report.z_parity_exceptions.append(str(p))
