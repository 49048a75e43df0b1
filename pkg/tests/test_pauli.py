import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from holism_lab.common.errors import DimensionMismatchError, InvalidInputError
from holism_lab.quantum import pauli
from holism_lab.quantum.pauli import BasisState, PauliString, Phase

# ----------------------
# TEXT FORM
# ----------------------


@pytest.mark.parametrize(
    ("text", "letters", "phase"),
    [
        ("XYY", "XYY", Phase.PLUS),
        ("+XYY", "XYY", Phase.PLUS),
        ("-ZZ", "ZZ", Phase.MINUS),
        ("+iXZ", "XZ", Phase.PLUS_I),
        ("-iI", "I", Phase.MINUS_I),
    ],
)
def test_parse(text, letters, phase):
    """Parse letters and the optional phase prefix."""
    p = pauli.parse(text)
    assert p.letters == letters
    assert p.phase is phase


@pytest.mark.parametrize("text", ["", "XQ", "iX", "--X", "x"])
def test_parse_rejects(text):
    """Malformed strings are rejected."""
    with pytest.raises(InvalidInputError) as excinfo:
        pauli.parse(text)
    assert excinfo.value.field == "pauli"


def test_format_is_canonical():
    """A +1 phase is omitted when formatting."""
    assert pauli.format_pauli(pauli.parse("+XX")) == "XX"
    assert str(pauli.parse("-iYZ")) == "-iYZ"


# ----------------------
# ALGEBRA
# ----------------------


@pytest.mark.parametrize(
    ("a", "b", "expected"),
    [
        ("X", "Y", "+iZ"),
        ("Y", "X", "-iZ"),
        ("Y", "Z", "+iX"),
        ("Z", "X", "+iY"),
        ("X", "X", "I"),
        ("XY", "YX", "ZZ"),
        ("-X", "-iX", "+iI"),
    ],
)
def test_compose(a, b, expected):
    """Products of small strings, phase included."""
    assert str(pauli.compose(pauli.parse(a), pauli.parse(b))) == expected


def test_compose_matches_matrices():
    """Composition agrees with matrix multiplication on two qubits."""
    for p in pauli.all_strings(2):
        for q in pauli.all_strings(2):
            product = pauli.to_matrix(p * q)
            assert np.allclose(product, pauli.to_matrix(p) @ pauli.to_matrix(q))


def test_compose_dimension_mismatch():
    """Strings of different lengths do not compose."""
    with pytest.raises(DimensionMismatchError):
        pauli.compose(pauli.parse("XX"), pauli.parse("X"))


def test_commutes():
    """Commutation follows the parity of anticommuting sites."""
    assert pauli.commutes(pauli.parse("XX"), pauli.parse("YY"))
    assert not pauli.commutes(pauli.parse("XI"), pauli.parse("ZI"))
    assert pauli.commutes(pauli.parse("XXX"), pauli.parse("XYY"))


def test_masks_follow_qubit_order():
    """Qubit 1 maps to the most significant mask bit."""
    p = pauli.parse("XIYZ")
    assert pauli.flip_support(p) == frozenset({1, 3})
    assert pauli.flip_mask(p) == 0b1010
    assert pauli.sign_mask(p) == 0b0011
    assert pauli.weight(p) == 3
    assert pauli.y_count(p) == 1


def test_basis_action_y_phases():
    """Y and Z contribute their phases on basis states."""
    state, phase = pauli.basis_action(pauli.parse("Y"), BasisState((0,)))
    assert state.bits == (1,)
    assert phase is Phase.PLUS_I
    state, phase = pauli.basis_action(pauli.parse("YZ"), BasisState((1, 1)))
    assert state.bits == (0, 1)
    assert phase is Phase.PLUS_I  # -i from Y, -1 from Z


def test_basis_state_index_round_trip():
    """Basis states convert to and from indices."""
    b = BasisState.from_text("101")
    assert b.index == 5
    assert BasisState.from_index(3, 5) == b
    with pytest.raises(InvalidInputError):
        BasisState.from_index(2, 4)


# ----------------------
# CONSTRUCTORS
# ----------------------


def test_constructors():
    """Helper constructors place letters on the right qubits."""
    assert str(pauli.all_x(3)) == "XXX"
    assert str(pauli.x_product(4, (1, 3))) == "XIXI"
    assert str(pauli.single(3, 2, "Z")) == "IZI"
    assert str(pauli.even_y_observable(4, {2, 4})) == "XYXY"
    with pytest.raises(InvalidInputError):
        pauli.even_y_observable(3, {1})
    with pytest.raises(InvalidInputError):
        pauli.from_sites(2, {3: "X"})


def test_even_y_observables_count():
    """There are 2^(n-1) even-Y observables."""
    assert len(list(pauli.even_y_observables(5))) == 2**4


def test_proof_family():
    """The proof family is empty below four qubits."""
    assert list(pauli.proof_family(3)) == []
    assert [str(p) for p in pauli.proof_family(4)] == ["XYZI"]
    assert len(list(pauli.proof_family(6))) == 10


def test_pauli_string_validation():
    """Strings must be nonempty and use valid letters."""
    with pytest.raises(InvalidInputError):
        PauliString("")
    with pytest.raises(InvalidInputError):
        PauliString("XA")
    assert not PauliString("X", Phase.PLUS_I).is_hermitian
    with pytest.raises(ValueError):
        _ = Phase.MINUS_I.sign


# ----------------------
# ALGEBRA INVARIANTS
# ----------------------


@st.composite
def pauli_strings(draw, n):
    letters = draw(st.text(alphabet=pauli.LETTERS, min_size=n, max_size=n))
    return PauliString(letters, draw(st.sampled_from(Phase)))


@st.composite
def triples(draw):
    n = draw(st.integers(min_value=1, max_value=6))
    return draw(pauli_strings(n)), draw(pauli_strings(n)), draw(pauli_strings(n))


@given(triples())
@settings(max_examples=300)
def test_compose_is_associative(operands):
    """(p·q)·r equals p·(q·r), phase included."""
    p, q, r = operands
    assert pauli.compose(pauli.compose(p, q), r) == pauli.compose(p, pauli.compose(q, r))


@given(st.integers(min_value=1, max_value=6).flatmap(pauli_strings))
def test_compose_with_itself_is_identity(p):
    """p·p has identity letters; the phase is +1 exactly when p is Hermitian."""
    square = pauli.compose(p, p)
    assert square.letters == "I" * p.n
    assert (square.phase is Phase.PLUS) == p.is_hermitian
    if not p.is_hermitian:
        assert square.phase is Phase.MINUS


@pytest.mark.parametrize("n", [1, 2, 3])
def test_basis_action_matches_matrices(n):
    """Every string on every basis state agrees with its explicit matrix column."""
    for p in pauli.all_strings(n):
        for phase in Phase:
            q = PauliString(p.letters, phase)
            matrix = pauli.to_matrix(q)
            for index in range(1 << n):
                state, factor = pauli.basis_action(q, BasisState.from_index(n, index))
                column = np.zeros(1 << n, dtype=np.complex128)
                column[state.index] = factor.to_complex()
                assert np.allclose(matrix[:, index], column)


def test_basis_action_xyy_on_zeros():
    """X⊗Y⊗Y|000> = -|111>."""
    state, phase = pauli.basis_action(pauli.parse("XYY"), BasisState.from_text("000"))
    assert state == BasisState.from_text("111")
    assert phase is Phase.MINUS


@pytest.mark.parametrize("n", [1, 2])
def test_commutes_matches_commutator(n):
    """commutes() is true exactly when the matrix commutator vanishes."""
    strings = list(pauli.all_strings(n))
    for p in strings:
        for q in strings:
            a, b = pauli.to_matrix(p), pauli.to_matrix(q)
            assert pauli.commutes(p, q) == np.allclose(a @ b, b @ a)
