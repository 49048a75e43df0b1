import dataclasses

import pytest

from holism_lab import verify
from holism_lab.common.config import LabSettings
from holism_lab.common.errors import CapExceededError
from holism_lab.verify import SuiteReport, SuiteRun


def test_registry_lists_six_checks():
    """The registry holds six titled checks in order."""
    assert list(verify.PROPOSITIONS) == ["1", "2", "3", "4", "5", "6"]
    assert all(entry["title"] for entry in verify.PROPOSITIONS.values())


def test_sizes(fast_settings):
    """Size lists respect the cap and note what was dropped."""
    run = SuiteRun(fast_settings)
    assert run.sizes(2, 8, 10) == (list(range(2, 9)), [])
    sizes, notes = run.sizes(1, 8, 5)
    assert sizes == [1, 2, 3, 4, 5]
    assert "n=5" in notes[0]
    single = SuiteRun(fast_settings, n=12)
    sizes, notes = single.sizes(1, 8, 10)
    assert sizes == []
    assert notes


def test_records_are_cached(mock_cli, fast_settings):
    """A suite run samples each size only once."""
    run = SuiteRun(fast_settings)
    assert run.record(3) is run.record(3)


def test_prop1_single_n(mock_cli, fast_settings):
    """Parity check passes at n=5 and notes the odd Z exception."""
    report = verify.verify_all(fast_settings, ["1"], n=5)
    assert report.passed
    result = report.results["1"]
    assert result.status == "passed"
    assert "5" in report.z_parity_exceptions
    assert result.notes


def test_prop2_and_3(mock_cli, fast_settings):
    """Sampling checks pass with re-preparation semantics."""
    report = verify.verify_all(fast_settings, ["2", "3"])
    assert report.results["2"].status == "passed"
    assert report.results["3"].status == "passed"
    details = report.results["2"].details
    assert details["semantics"] == "re-preparation"
    assert details["full_product"]["verdict"] == "deterministic"
    assert details["off_support_rows"] == 0
    assert "uniformity" in details
    assert len(details["subsets"]) == 6
    assert report.results["3"].details["whole_entropy"] == 0


def test_sampling_checks_skip_short_runs(mock_cli):
    """Too few trials skip the sampling checks instead of failing."""
    short = LabSettings(trials=50, qubits=3)
    report = verify.verify_all(short, ["2", "3"])
    assert report.results["2"].status == "skipped"
    assert report.results["3"].status == "skipped"
    assert report.passed


def test_prop4_single_n(mock_cli, fast_settings):
    """Uniform-law uniqueness at n=3 reports the uniform atoms."""
    report = verify.verify_all(fast_settings, ["4"], n=3)
    assert report.passed
    entry = report.results["4"].details["reports"][0]
    assert entry["distribution"]["probabilities"] == ["1/8"] * 8


def test_prop4_above_solver_cap_is_skipped(mock_cli, fast_settings):
    """Sizes beyond the solver cap are skipped."""
    report = verify.verify_all(fast_settings, ["4"], n=12)
    assert report.results["4"].status == "skipped"


def test_prop5_single_n(mock_cli, fast_settings):
    """The (n-1)-subset check reports both signs at n=4."""
    report = verify.verify_all(fast_settings, ["5"], n=4)
    assert report.passed
    assert len(report.results["5"].details["reports"]) == 2


def test_prop5_derivations(mock_cli):
    """Three- and four-variable derivations are included in the details."""
    lab = LabSettings(solver_cap=4)
    result = verify.run_check("5", SuiteRun(lab))
    assert result.status == "passed"
    three = result.details["three_variables"]
    assert three["passed"]
    assert three["marginals"]["x1"]["plus"] == "1/2"
    four = result.details["four_variables"]
    assert four["pair_range_1_2"] == {"lo": "-1", "hi": "1"}
    assert four["dependence_witness"]["dependent"] is True
    assert four["extra_measurements"]["determined_at"] == 2
    assert any("cap 4" in note for note in result.notes)


def test_prop6_controls(mock_cli, fast_settings):
    """Controls fail the right clauses and sampling agrees with the exact verdict."""
    lab = dataclasses.replace(fast_settings, exhaustive_cap=5)
    result = verify.run_check("6", SuiteRun(lab))
    assert result.status == "passed"
    controls = result.details["controls"]
    assert set(controls) == {"independent_coins", "constant_first", "random_signs"}
    assert "i" in controls["independent_coins"]["failing_clauses"]
    agreement = result.details["empirical_agreement"]
    assert agreement["empirical_verdict"] == agreement["analytic_verdict"]


def test_library_errors_become_failures(mock_cli, fast_settings, monkeypatch):
    """A library error inside a check marks it failed."""
    def boom(run):
        raise CapExceededError("too big")

    monkeypatch.setitem(verify.PROPOSITIONS, "4", {"title": "boom", "run": boom})
    monkeypatch.setattr(verify, "log_error", lambda *a, **kw: None)
    report = verify.verify_all(fast_settings, ["4"])
    assert not report.passed
    assert report.results["4"].details == {"error": "too big"}
    assert mock_cli.failed


def test_suite_report_json_round_trip(mock_cli, fast_settings):
    """A suite report survives serialisation."""
    report = verify.verify_all(fast_settings, ["1", "4"], n=3)
    raw = report.to_json()
    assert raw["passed"] is True
    assert raw["settings"]["trials"] == 5000
    assert SuiteReport.from_json(raw).to_json() == raw


@pytest.mark.slow
def test_full_suite(mock_cli, fast_settings):
    """Every check passes with the fast settings."""
    report = verify.verify_all(fast_settings)
    assert report.passed, {k: r.status for k, r in report.results.items()}
    assert set(report.results) == set(verify.PROPOSITIONS)


@pytest.mark.slow
def test_sampling_checks_at_reference_size(mock_cli):
    """Four qubits, 10^5 trials: every part looks like a fair coin, the whole is fixed."""
    lab = LabSettings(qubits=4, trials=100_000)
    report = verify.verify_all(lab, ["2", "3"])
    assert report.results["2"].status == "passed"
    assert report.results["3"].status == "passed"
    subsets = report.results["2"].details["subsets"]
    assert len(subsets) == 14
    assert all(s["verdict"] == "consistent-with-Bernoulli(1/2)" for s in subsets)
    assert report.results["2"].details["full_product"]["verdict"] == "deterministic"
    entropy = report.results["3"].details
    assert entropy["whole_entropy"] == 0
    assert entropy["entropy_tolerance"] == pytest.approx(0.01)
    assert entropy["max_deviation_from_one"] <= 0.01
    assert len(entropy["subset_entropies"]) == 14
