import pytest

from holism_lab.common.errors import (
    CapExceededError,
    DimensionMismatchError,
    NonHermitianError,
)
from holism_lab.quantum import pauli, state
from holism_lab.quantum.pauli import BasisState


def test_make_ghz_amplitudes():
    """GHZ_3 puts 1/sqrt(2) on |000> and |111> and its amplitudes are read-only."""
    ghz = state.make_ghz(3)
    assert state.norm(ghz) == pytest.approx(1.0)
    assert ghz.amplitude(BasisState.from_text("000")) == pytest.approx(2**-0.5)
    assert ghz.amplitude(BasisState.from_text("111")) == pytest.approx(2**-0.5)
    assert ghz.amplitude(BasisState.from_text("010")) == 0
    assert not ghz.amplitudes.flags.writeable


def test_make_ghz_cap():
    """The dense engine refuses sizes above its cap."""
    with pytest.raises(CapExceededError):
        state.make_ghz(5, dense_cap=4)


@pytest.mark.parametrize(
    ("text", "expected"),
    [
        ("XXX", 1.0),
        ("XXI", 0.0),
        ("XIX", 0.0),
        ("XYY", -1.0),
        ("YYX", -1.0),
        ("ZZI", 1.0),
        ("ZII", 0.0),
        ("-XXX", -1.0),
        ("XYZ", 0.0),
    ],
)
def test_ghz3_expectations(text, expected):
    """Dense, closed-form and selected engines agree on GHZ_3 expectations."""
    p = pauli.parse(text)
    assert state.expectation(state.make_ghz(3), p) == pytest.approx(expected)
    assert state.ghz_expectation_closed_form(3, p) == expected
    assert state.ghz_expectation(3, p) == expected


def test_even_y_sign_at_n4():
    """Mixed X/Y strings carry the sign (-1)**(k/2)."""
    # (-1)**(k/2): two Y's give -1, four give +1
    assert state.ghz_expectation(4, pauli.parse("YYXX")) == -1.0
    assert state.ghz_expectation(4, pauli.parse("YYYY")) == 1.0


def test_non_hermitian_rejected():
    """A phase of ±i has no real expectation."""
    with pytest.raises(NonHermitianError):
        state.expectation(state.make_ghz(2), pauli.parse("+iXX"))
    with pytest.raises(NonHermitianError):
        state.ghz_expectation_closed_form(2, pauli.parse("-iXX"))


def test_dimension_mismatch():
    """The string and the state must act on the same number of qubits."""
    with pytest.raises(DimensionMismatchError):
        state.expectation(state.make_ghz(3), pauli.parse("XX"))


def test_closed_form_above_dense_cap():
    """Above the dense cap only the closed form answers."""
    assert state.ghz_expectation(40, pauli.all_x(40), dense_cap=24) == 1.0
    assert state.ghz_expectation(40, pauli.x_product(40, range(1, 40))) == 0.0
    with pytest.raises(CapExceededError):
        state.ghz_expectation(40, pauli.all_x(40), engine="dense")


def test_engines_agree_on_every_string():
    """Both engines agree on all 64 strings at n=3."""
    ghz = state.make_ghz(3)
    for p in pauli.all_strings(3):
        assert state.expectation(ghz, p) == pytest.approx(
            state.ghz_expectation_closed_form(3, p), abs=1e-12
        )


@pytest.mark.parametrize("n", [2, 3, 4, 5])
def test_verify_prop1_small(mock_cli, n):
    """Every proper X-subset product vanishes and the full product is 1."""
    report = state.verify_prop1(n)
    assert report.passed
    assert report.full_product == pytest.approx(1.0)
    assert report.proper_subsets_checked == 2**n - 2
    assert report.exhaustive
    assert report.strings_checked == 4**n
    assert not report.engine_mismatches
    assert len(report.even_y_signs) == 2 ** (n - 1)


def test_verify_prop1_lists_z_parity_exceptions(mock_cli):
    """Even Z-only strings are reported as exceptions with a warning."""
    report = state.verify_prop1(3)
    assert "ZZI" in report.z_parity_exceptions
    assert "ZII" not in report.z_parity_exceptions
    assert report.passed
    assert mock_cli.warned


def test_verify_prop1_closed_form_only_above_cap(mock_cli):
    """Above the dense cap the check uses only the closed form."""
    report = state.verify_prop1(6, dense_cap=4)
    assert report.engines == ["closed-form"]
    assert not report.exhaustive
    assert report.passed


def test_prop1_report_json(mock_cli):
    """The report serialises its counts and the even-Y signs."""
    raw = state.verify_prop1(4).to_json()
    assert raw["passed"] is True
    assert raw["proof_family_checked"] == 1
    assert raw["even_y_signs"]["YYXX"] == -1
