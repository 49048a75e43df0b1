"""
Pauli strings with exact phase tracking.

A :class:`PauliString` is a tensor product of single-qubit spin operators
(``I``, ``X``, ``Y``, ``Z``) times a global phase from the cyclic group
{+1, +i, -1, -i}. Phases are stored as exponents of ``i`` modulo 4 and are
never converted to floating point inside this module.

Qubits are numbered from 1. In a basis pattern, qubit ``k`` of ``n`` is bit
``n - k`` of the integer index, so the text form ``"XYY"`` and the binary
spelling of an index read in the same order. Bit value 0 is ``|+>`` (the
``σ_z = +1`` eigenvector), bit value 1 is ``|->``.

Text form: optional phase prefix (``+``, ``-``, ``+i``, ``-i``) followed by
the letters, e.g. ``"XYY"`` or ``"-iZZI"``::

    >>> from holism_lab.quantum.pauli import parse, compose
    >>> str(compose(parse("X"), parse("Y")))
    '+iZ'
"""

import re
from collections.abc import Iterable, Iterator
from dataclasses import dataclass
from enum import IntEnum
from itertools import combinations
from typing import Literal

import numpy as np
import numpy.typing as npt

from ..common.errors import DimensionMismatchError, InvalidInputError

Letter = Literal["I", "X", "Y", "Z"]
LETTERS: str = "IXYZ"


class Phase(IntEnum):
    """Global phase ``i**value``."""

    PLUS = 0
    PLUS_I = 1
    MINUS = 2
    MINUS_I = 3

    def __mul__(self, other: object) -> "Phase":
        if not isinstance(other, Phase):
            return NotImplemented
        return Phase((self.value + other.value) % 4)

    @property
    def is_real(self) -> bool:
        return self in (Phase.PLUS, Phase.MINUS)

    @property
    def sign(self) -> int:
        """Real sign of a Hermitian phase (+1 or -1)."""
        if not self.is_real:
            raise ValueError(f"phase {self.prefix or '+'} is not real")
        return 1 if self is Phase.PLUS else -1

    @property
    def prefix(self) -> str:
        return _PREFIXES[self]

    def to_complex(self) -> complex:
        return (1, 1j, -1, -1j)[self.value]


_PREFIXES: dict[Phase, str] = {
    Phase.PLUS: "",
    Phase.PLUS_I: "+i",
    Phase.MINUS: "-",
    Phase.MINUS_I: "-i",
}

# Single-site products a·b = i**exponent · letter
_SITE_PRODUCT: dict[tuple[str, str], tuple[str, int]] = {
    ("X", "Y"): ("Z", 1),
    ("Y", "X"): ("Z", 3),
    ("Y", "Z"): ("X", 1),
    ("Z", "Y"): ("X", 3),
    ("Z", "X"): ("Y", 1),
    ("X", "Z"): ("Y", 3),
}

_TEXT_FORM = re.compile(r"^(?P<phase>\+i|-i|\+|-)?(?P<letters>[IXYZ]+)$")

# 2x2 matrices, used only by the explicit-matrix oracle
_MATRICES: dict[str, npt.NDArray[np.complex128]] = {
    "I": np.eye(2, dtype=np.complex128),
    "X": np.array([[0, 1], [1, 0]], dtype=np.complex128),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=np.complex128),
    "Z": np.array([[1, 0], [0, -1]], dtype=np.complex128),
}


@dataclass(frozen=True)
class PauliString:
    """Immutable tensor product of single-qubit Pauli letters with a global phase."""

    letters: str
    phase: Phase = Phase.PLUS

    def __post_init__(self) -> None:
        if not self.letters:
            raise InvalidInputError("pauli", "a Pauli string needs at least one qubit")
        bad = set(self.letters) - set(LETTERS)
        if bad:
            raise InvalidInputError(
                "pauli", f"letters must be drawn from {LETTERS}, got {sorted(bad)}"
            )
        object.__setattr__(self, "phase", Phase(self.phase))

    @property
    def n(self) -> int:
        return len(self.letters)

    @property
    def is_hermitian(self) -> bool:
        return self.phase.is_real

    def letter(self, k: int) -> str:
        """Letter acting on qubit ``k`` (1-based)."""
        return self.letters[k - 1]

    def __mul__(self, other: "PauliString") -> "PauliString":
        return compose(self, other)

    def __str__(self) -> str:
        return format_pauli(self)


@dataclass(frozen=True)
class BasisState:
    """Computational basis pattern; bit ``k`` is 0 for ``|+>_k`` and 1 for ``|->_k``."""

    bits: tuple[int, ...]

    def __post_init__(self) -> None:
        if not self.bits:
            raise InvalidInputError("bits", "a basis state needs at least one qubit")
        if any(b not in (0, 1) for b in self.bits):
            raise InvalidInputError("bits", f"bits must be 0 or 1, got {self.bits}")

    @property
    def n(self) -> int:
        return len(self.bits)

    @property
    def index(self) -> int:
        """Integer index of the pattern in a dense amplitude vector."""
        value = 0
        for b in self.bits:
            value = (value << 1) | b
        return value

    @classmethod
    def from_index(cls, n: int, index: int) -> "BasisState":
        if not 0 <= index < 1 << n:
            raise InvalidInputError("index", f"{index} out of range for {n} qubits")
        return cls(tuple((index >> (n - k)) & 1 for k in range(1, n + 1)))

    @classmethod
    def from_text(cls, text: str) -> "BasisState":
        return cls(tuple(int(c) for c in text))

    def __str__(self) -> str:
        return "".join(str(b) for b in self.bits)


# ---------------------------------------------------------------------------
# Text form
# ---------------------------------------------------------------------------


def parse(text: str) -> PauliString:
    """
    Parse the text form of a Pauli string.

    :raises InvalidInputError: When ``text`` is not a phase prefix followed by letters.
    """
    match = _TEXT_FORM.match(text.strip())
    if match is None:
        raise InvalidInputError(
            "pauli", f"'{text}' is not of the form [+|-|+i|-i]<IXYZ letters>"
        )
    prefix = match.group("phase") or ""
    phase = {
        "": Phase.PLUS,
        "+": Phase.PLUS,
        "-": Phase.MINUS,
        "+i": Phase.PLUS_I,
        "-i": Phase.MINUS_I,
    }
    return PauliString(match.group("letters"), phase[prefix])


def format_pauli(p: PauliString) -> str:
    """Canonical text form; a +1 phase is printed without prefix."""
    return f"{p.phase.prefix}{p.letters}"


# ---------------------------------------------------------------------------
# Constructors
# ---------------------------------------------------------------------------


def identity(n: int) -> PauliString:
    return PauliString("I" * n)


def all_x(n: int) -> PauliString:
    """The all-qubit product of σ_x, the deterministic whole-system observable."""
    return PauliString("X" * n)


def from_sites(n: int, sites: dict[int, str], phase: Phase = Phase.PLUS) -> PauliString:
    """Put the given letters on the given 1-based sites, ``I`` elsewhere."""
    letters = ["I"] * n
    for k, letter in sites.items():
        if not 1 <= k <= n:
            raise InvalidInputError("site", f"qubit {k} out of range 1..{n}")
        letters[k - 1] = letter
    return PauliString("".join(letters), phase)


def single(n: int, k: int, letter: Letter) -> PauliString:
    """σ_letter on qubit ``k`` and identity elsewhere."""
    return from_sites(n, {k: letter})


def x_product(n: int, subset: Iterable[int]) -> PauliString:
    """Product of σ_x over ``subset``, identity elsewhere."""
    return from_sites(n, {k: "X" for k in subset})


def even_y_observable(n: int, y_set: Iterable[int]) -> PauliString:
    """
    Y on ``y_set`` and X on its complement.

    These are the mixed observables for which GHZ states are eigenstates;
    ``y_set`` must have even cardinality.
    """
    ys = set(y_set)
    if len(ys) % 2:
        raise InvalidInputError("y_set", f"needs even cardinality, got {sorted(ys)}")
    return from_sites(n, {k: ("Y" if k in ys else "X") for k in range(1, n + 1)})


def even_y_observables(n: int) -> Iterator[tuple[frozenset[int], PauliString]]:
    """Every even-cardinality Y set with its observable, smallest sets first."""
    for size in range(0, n + 1, 2):
        for ys in combinations(range(1, n + 1), size):
            yield frozenset(ys), even_y_observable(n, ys)


def proof_family(n: int) -> Iterator[PauliString]:
    """
    Strings X on 1..a, Y on a+1..b, Z on b+1..c, I on c+1..n with 0 < a < b < c < n.

    This is the parametrised family the vanishing-correlation argument is
    written for. Empty for n < 4.
    """
    for a in range(1, n):
        for b in range(a + 1, n):
            for c in range(b + 1, n):
                letters = "X" * a + "Y" * (b - a) + "Z" * (c - b) + "I" * (n - c)
                yield PauliString(letters)


def all_strings(n: int) -> Iterator[PauliString]:
    """All 4**n letter sequences with phase +1."""
    if n == 1:
        yield from (PauliString(letter) for letter in LETTERS)
        return
    for head in LETTERS:
        for tail in all_strings(n - 1):
            yield PauliString(head + tail.letters)


# ---------------------------------------------------------------------------
# Algebra
# ---------------------------------------------------------------------------


def _check_dims(n: int, m: int) -> None:
    if n != m:
        raise DimensionMismatchError(f"operands act on {n} and {m} qubits")


def compose(p: PauliString, q: PauliString) -> PauliString:
    """
    Operator product ``p·q`` with the accumulated phase.

    :raises DimensionMismatchError: When ``p.n != q.n``.
    """
    _check_dims(p.n, q.n)
    exponent = p.phase.value + q.phase.value
    letters = []
    for a, b in zip(p.letters, q.letters, strict=True):
        if a == "I":
            letters.append(b)
        elif b == "I":
            letters.append(a)
        elif a == b:
            letters.append("I")
        else:
            letter, e = _SITE_PRODUCT[(a, b)]
            letters.append(letter)
            exponent += e
    return PauliString("".join(letters), Phase(exponent % 4))


def commutes(p: PauliString, q: PauliString) -> bool:
    """
    Whether ``p·q == q·p``; true iff an even number of sites anticommute.

    :raises DimensionMismatchError: When ``p.n != q.n``.
    """
    _check_dims(p.n, q.n)
    anticommuting = sum(
        1
        for a, b in zip(p.letters, q.letters, strict=True)
        if a != "I" and b != "I" and a != b
    )
    return anticommuting % 2 == 0


def flip_support(p: PauliString) -> frozenset[int]:
    """1-based qubits on which ``p`` acts with X or Y (the bits it flips)."""
    return frozenset(k for k, a in enumerate(p.letters, start=1) if a in "XY")


def weight(p: PauliString) -> int:
    """Number of non-identity letters."""
    return sum(1 for a in p.letters if a != "I")


def _mask(p: PauliString, letters: str) -> int:
    mask = 0
    for k, a in enumerate(p.letters, start=1):
        if a in letters:
            mask |= 1 << (p.n - k)
    return mask


def flip_mask(p: PauliString) -> int:
    """Index bitmask of :func:`flip_support`."""
    return _mask(p, "XY")


def sign_mask(p: PauliString) -> int:
    """Index bitmask of the sites whose letter picks up a -1 on ``|->`` (Y and Z)."""
    return _mask(p, "YZ")


def y_count(p: PauliString) -> int:
    return p.letters.count("Y")


def basis_action(p: PauliString, b: BasisState) -> tuple[BasisState, Phase]:
    """
    Act with ``p`` on ``|b>``: returns ``(b', φ)`` with ``p|b> = φ|b'>``.

    ``b'`` is ``b`` with every X/Y site flipped. Y contributes ``+i`` on ``|+>``
    and ``-i`` on ``|->``; Z contributes ``-1`` on ``|->``.

    :raises DimensionMismatchError: When ``p.n != b.n``.
    """
    _check_dims(p.n, b.n)
    exponent = p.phase.value
    bits = []
    for a, bit in zip(p.letters, b.bits, strict=True):
        if a == "X":
            bits.append(bit ^ 1)
        elif a == "Y":
            bits.append(bit ^ 1)
            exponent += 3 if bit else 1
        elif a == "Z":
            bits.append(bit)
            exponent += 2 if bit else 0
        else:
            bits.append(bit)
    return BasisState(tuple(bits)), Phase(exponent % 4)


def to_matrix(p: PauliString) -> npt.NDArray[np.complex128]:
    """Explicit ``2**n x 2**n`` matrix. Only meant as a small-n reference."""
    m: npt.NDArray[np.complex128] = np.array([[1]], dtype=np.complex128)
    for a in p.letters:
        m = np.kron(m, _MATRICES[a])
    return p.phase.to_complex() * m
