import numpy as np
import pytest

from holism_lab.common.errors import InsufficientDataError, InvalidInputError
from holism_lab.quantum import measurement
from holism_lab.quantum.measurement import MeasurementRecord, RandomnessReport

# ----------------------
# SAMPLING
# ----------------------


def test_sample_shape_and_support(mock_cli):
    """Samples are +-1 rows whose product is always +1."""
    record = measurement.sample_joint_x(4, 1000, seed=3)
    assert record.outcomes.shape == (1000, 4)
    assert set(np.unique(record.outcomes)) <= {-1, 1}
    assert (record.products == 1).all()
    assert record.semantics == "re-preparation"
    assert record.metadata()["block_trials"] == measurement.BLOCK_TRIALS


def test_sample_is_deterministic_in_seed(mock_cli):
    """Equal seeds give equal records and different seeds differ."""
    a = measurement.sample_joint_x(3, 500, seed=42)
    b = measurement.sample_joint_x(3, 500, seed=42)
    c = measurement.sample_joint_x(3, 500, seed=43)
    assert np.array_equal(a.outcomes, b.outcomes)
    assert not np.array_equal(a.outcomes, c.outcomes)


def test_sample_independent_of_worker_count(mock_cli):
    """The worker count does not change the record."""
    trials = 3 * measurement.BLOCK_TRIALS + 17
    serial = measurement.sample_joint_x(5, trials, seed=9, workers=1)
    parallel = measurement.sample_joint_x(5, trials, seed=9, workers=4)
    assert np.array_equal(serial.outcomes, parallel.outcomes)


def test_sample_prefix_is_stable(mock_cli):
    """A shorter run is a prefix of a longer one."""
    short = measurement.sample_joint_x(3, 100, seed=1)
    long = measurement.sample_joint_x(3, 5000, seed=1)
    assert np.array_equal(short.outcomes, long.outcomes[:100])


def test_single_qubit_always_plus(mock_cli):
    """One qubit always reads +1."""
    record = measurement.sample_joint_x(1, 50, seed=0)
    assert (record.outcomes == 1).all()


@pytest.mark.parametrize(
    ("n", "trials", "seed", "field"),
    [
        (0, 10, 0, "n"),
        (2, 0, 0, "trials"),
        (2, 10, -1, "seed"),
        (3, 10, 2**130, "seed"),
        (3, 10, 2**128, "seed"),
    ],
)
def test_sample_rejects(mock_cli, n, trials, seed, field):
    """Bad arguments name the offending field."""
    with pytest.raises(InvalidInputError) as excinfo:
        measurement.sample_joint_x(n, trials, seed)
    assert excinfo.value.field == field


def test_largest_seed_is_accepted(mock_cli):
    """The top of the Philox key range still samples."""
    record = measurement.sample_joint_x(3, 10, seed=2**128 - 1)
    assert record.seed == 2**128 - 1
    assert (record.products == 1).all()


def test_record_is_read_only():
    """Records are immutable and hold only +-1 values."""
    record = MeasurementRecord(2, np.array([[1, -1], [-1, -1]], dtype=np.int8))
    with pytest.raises(ValueError):
        record.outcomes[0, 0] = -1
    with pytest.raises(InvalidInputError):
        MeasurementRecord(2, np.array([[1, 0]], dtype=np.int8))
    with pytest.raises(InvalidInputError):
        MeasurementRecord(3, np.array([[1, 1]], dtype=np.int8))


def test_subset_product_series_and_patterns():
    """Subset products and pattern indices follow the bit order."""
    outcomes = np.array([[1, -1, -1], [-1, 1, -1], [1, 1, 1]], dtype=np.int8)
    record = MeasurementRecord(3, outcomes)
    assert list(measurement.subset_product_series(record, (1, 2))) == [-1, -1, 1]
    assert list(measurement.subset_product_series(record, {3})) == [-1, -1, 1]
    # qubit k reading -1 sets bit n-k
    assert list(measurement.pattern_indices(record)) == [0b011, 0b101, 0b000]
    assert measurement.subset_mean([1, -1, 1, 1]) == 0.5
    with pytest.raises(InvalidInputError):
        measurement.subset_product_series(record, ())
    with pytest.raises(InvalidInputError):
        measurement.subset_product_series(record, (4,))
    with pytest.raises(InsufficientDataError):
        measurement.subset_mean([])


def test_rows():
    """Rows carry the trial index, the outcomes and their product."""
    record = MeasurementRecord(2, np.array([[1, -1], [-1, -1]], dtype=np.int8))
    assert list(record.rows()) == [(0, (1, -1), -1), (1, (-1, -1), 1)]


# ----------------------
# RANDOMNESS TESTS
# ----------------------


def test_bernoulli_constant_series_is_deterministic():
    """A constant series is deterministic with no p-values."""
    report = measurement.bernoulli_test(np.ones(200, dtype=np.int8))
    assert report.verdict == "deterministic"
    assert report.frequency_p_value is None
    assert report.runs_p_value is None
    assert report.to_json()["frequency_test"] == "degenerate"


def test_bernoulli_alternating_series_rejected():
    """A balanced but alternating series fails the runs test."""
    series = np.tile(np.array([1, -1], dtype=np.int8), 100)
    report = measurement.bernoulli_test(series)
    assert report.runs == 200
    assert report.frequency_p_value == pytest.approx(1.0)
    assert report.runs_p_value < 0.01
    assert report.verdict == "rejected"


def test_bernoulli_biased_series_rejected():
    """A biased series fails the frequency test."""
    series = np.array([1] * 180 + [-1] * 20, dtype=np.int8)
    np.random.default_rng(0).shuffle(series)
    report = measurement.bernoulli_test(series)
    assert report.frequency_p_value < 1e-6
    assert report.verdict == "rejected"


def test_bernoulli_subset_series_consistent(mock_cli):
    """Pair products of GHZ_3 look like a fair coin."""
    record = measurement.sample_joint_x(3, 20_000, seed=5)
    series = measurement.subset_product_series(record, (1, 2))
    report = measurement.bernoulli_test(series, alpha=0.001, subset=(2, 1))
    assert report.verdict == "consistent-with-Bernoulli(1/2)"
    assert report.subset == (1, 2)
    assert abs(report.mean) < 0.05


def test_bernoulli_needs_100_entries():
    """Fewer than 100 entries are refused."""
    with pytest.raises(InsufficientDataError):
        measurement.bernoulli_test(np.ones(99, dtype=np.int8))


def test_bernoulli_rejects_bad_values():
    """Zero entries and an invalid alpha are rejected."""
    with pytest.raises(InvalidInputError):
        measurement.bernoulli_test(np.zeros(100, dtype=np.int8))
    with pytest.raises(InvalidInputError):
        measurement.bernoulli_test(np.ones(100, dtype=np.int8), alpha=1.5)


def test_randomness_report_json_round_trip(mock_cli):
    """A randomness report survives serialisation."""
    record = measurement.sample_joint_x(2, 400, seed=2)
    report = measurement.bernoulli_test(record.outcomes[:, 0], subset=(1,))
    assert RandomnessReport.from_json(report.to_json()) == report


def test_uniformity(mock_cli):
    """GHZ_4 samples spread evenly over the even-parity patterns."""
    record = measurement.sample_joint_x(4, 16_000, seed=8)
    report = measurement.uniformity_test(record, alpha=0.001)
    assert report.admissible == 8
    assert report.off_support == 0
    assert report.passed


def test_uniformity_flags_off_support_rows():
    """Odd-parity rows are counted and fail the check."""
    outcomes = np.tile(np.array([[1, -1], [1, 1]], dtype=np.int8), (50, 1))
    report = measurement.uniformity_test(MeasurementRecord(2, outcomes))
    assert report.off_support == 50
    assert not report.passed


# ----------------------
# CSV EXCHANGE
# ----------------------


def test_csv_round_trip(mock_cli, tmp_path):
    """A record written to CSV reads back unchanged."""
    record = measurement.sample_joint_x(3, 250, seed=4)
    path = tmp_path / "record.csv"
    measurement.write_record(record, path)
    assert path.read_text().splitlines()[0] == "t,s1,s2,s3,product"
    loaded = measurement.read_record(path)
    assert loaded.n == 3
    assert np.array_equal(loaded.outcomes, record.outcomes)


@pytest.mark.parametrize(
    ("content", "field"),
    [
        ("t,a,b,product\n0,1,1,1\n", "header"),
        ("t,s1,s2,product\n0,1,1,1\n2,1,1,1\n", "t"),
        ("t,s1,s2,product\n0,1,2,2\n", "s2"),
        ("t,s1,s2,product\n0,1,-1,1\n", "product"),
        ("t,s1,s2,product\n0,1,0.5,1\n", "s2"),
        ("t,s1,s2,product\n", "record"),
    ],
)
def test_read_record_names_the_field(tmp_path, content, field):
    """Malformed CSV files name the offending field."""
    path = tmp_path / "bad.csv"
    path.write_text(content)
    with pytest.raises(InvalidInputError) as excinfo:
        measurement.read_record(path)
    assert excinfo.value.field == field


def test_read_record_missing_file(tmp_path):
    """A missing record file names the record."""
    with pytest.raises(InvalidInputError) as excinfo:
        measurement.read_record(tmp_path / "missing.csv")
    assert excinfo.value.field == "record"
