"""
Repeated joint σ_x measurements on freshly prepared GHZ states.

Each trial prepares GHZ_n again and reads all ``n`` commuting σ_x
observables at once, so every row of a record is an independent draw from
the same distribution: uniform over the ``2**(n-1)`` sign strings whose
product is +1. The trial index stands in for the time column; nothing
evolves between preparations.

Randomness is counter based. Trials are cut into blocks of
:data:`BLOCK_TRIALS`; block ``b`` is generated by a Philox stream keyed by
the seed with its counter starting at ``b << 192``, so the outcomes of
trial ``t`` depend only on ``(seed, t)`` and a record is bit-identical no
matter how many workers produced it.

Records are exchanged as CSV with the header ``t,s1,...,sN,product``.
"""

import math
from collections.abc import Iterable
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Literal

import numpy as np
import numpy.typing as npt
import pandas as pd
from cliasi import Cliasi
from scipy import stats

from ..common.config import SEED_LIMIT
from ..common.errors import InsufficientDataError, InvalidInputError

cli: Cliasi = Cliasi("uninitialized")

BLOCK_TRIALS = 4096
MIN_SERIES_LENGTH = 100
SEMANTICS = "re-preparation"
"""Every trial re-prepares the state before the joint readout."""

Verdict = Literal["deterministic", "consistent-with-Bernoulli(1/2)", "rejected"]
Outcomes = npt.NDArray[np.int8]


@dataclass(frozen=True)
class MeasurementRecord:
    """One row of ±1 outcomes per trial, qubit ``k`` in column ``k-1``."""

    n: int
    outcomes: Outcomes = field(repr=False)
    seed: int | None = None
    semantics: str = SEMANTICS

    def __post_init__(self) -> None:
        if self.outcomes.ndim != 2 or self.outcomes.shape[1] != self.n:
            raise InvalidInputError(
                "outcomes",
                f"expected shape (trials, {self.n}), got {self.outcomes.shape}",
            )
        if not np.isin(self.outcomes, (-1, 1)).all():
            raise InvalidInputError("outcomes", "values must be -1 or 1")
        self.outcomes.setflags(write=False)

    @property
    def trials(self) -> int:
        return int(self.outcomes.shape[0])

    @property
    def products(self) -> Outcomes:
        """The full product column."""
        return np.prod(self.outcomes, axis=1, dtype=np.int8)

    def rows(self) -> Iterable[tuple[int, tuple[int, ...], int]]:
        """``(t, outcomes, product)`` per trial, in trial order."""
        pairs = zip(self.outcomes, self.products, strict=True)
        for t, (row, product) in enumerate(pairs):
            yield t, tuple(int(s) for s in row), int(product)

    def metadata(self) -> dict[str, Any]:
        return {
            "n": self.n,
            "trials": self.trials,
            "seed": self.seed,
            "semantics": self.semantics,
            "block_trials": BLOCK_TRIALS,
        }


# ---------------------------------------------------------------------------
# Sampling
# ---------------------------------------------------------------------------


def check_seed(seed: int) -> int:
    """
    :raises InvalidInputError: When ``seed`` is not a valid Philox key.
    """
    if not 0 <= seed < SEED_LIMIT:
        raise InvalidInputError("seed", f"seed must lie in 0..2**128-1, got {seed}")
    return seed


def philox(seed: int, counter: int = 0) -> np.random.Generator:
    """Counter-based generator keyed by ``seed``."""
    return np.random.Generator(np.random.Philox(key=check_seed(seed), counter=counter))


def _block(seed: int, n: int, block: int, count: int) -> Outcomes:
    rng = philox(seed, block << 192)
    signs = np.empty((count, n), dtype=np.int8)
    if n > 1:
        bits = rng.integers(0, 2, size=(count, n - 1), dtype=np.int8)
        signs[:, :-1] = 1 - 2 * bits
        signs[:, -1] = np.prod(signs[:, :-1], axis=1, dtype=np.int8)
    else:
        signs[:, 0] = 1
    return signs


def sample_joint_x(
    n: int, trials: int, seed: int, workers: int = 1
) -> MeasurementRecord:
    """
    Simulate ``trials`` independent joint σ_x readouts of GHZ_n.

    The first ``n-1`` signs are fair coins and the last one makes the product
    +1, which is exactly the Born distribution of the state.

    :raises InvalidInputError: When ``n < 1``, ``trials < 1`` or ``seed`` is
        outside ``0..2**128-1``.
    """
    global cli
    cli = Cliasi("sample")
    if n < 1:
        raise InvalidInputError("n", "qubit count must be at least 1")
    if trials < 1:
        raise InvalidInputError("trials", "at least one trial is required")
    check_seed(seed)

    blocks = [
        (b, min(BLOCK_TRIALS, trials - b * BLOCK_TRIALS))
        for b in range(math.ceil(trials / BLOCK_TRIALS))
    ]
    cli.log(f"Sampling {trials} trials of GHZ_{n} in {len(blocks)} block(s)")
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(lambda bc: _block(seed, n, *bc), blocks))
    else:
        parts = [_block(seed, n, b, count) for b, count in blocks]
    return MeasurementRecord(n, np.concatenate(parts), seed)


def subset_product_series(record: MeasurementRecord, subset: Iterable[int]) -> Outcomes:
    """
    Per-trial product of the outcomes on ``subset`` (1-based qubits).

    :raises InvalidInputError: When ``subset`` is empty or out of range.
    """
    indices = sorted(set(subset))
    if not indices:
        raise InvalidInputError("subset", "subset must be nonempty")
    if indices[0] < 1 or indices[-1] > record.n:
        raise InvalidInputError(
            "subset", f"indices {indices} out of range 1..{record.n}"
        )
    columns = [k - 1 for k in indices]
    return np.prod(record.outcomes[:, columns], axis=1, dtype=np.int8)


def subset_mean(series: npt.ArrayLike) -> float:
    """Empirical mean of a ±1 series, the sample estimate of its expectation."""
    values = np.asarray(series)
    if values.size == 0:
        raise InsufficientDataError("cannot average an empty series")
    return float(values.mean(dtype=np.float64))


def pattern_indices(record: MeasurementRecord) -> npt.NDArray[np.int64]:
    """Atom index of each trial: bit ``n-k`` is set when qubit ``k`` read -1."""
    weights = 1 << np.arange(record.n - 1, -1, -1, dtype=np.int64)
    return (record.outcomes == -1).astype(np.int64) @ weights


# ---------------------------------------------------------------------------
# Randomness tests
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RandomnessReport:
    """Frequency and runs test results for one ±1 series."""

    subset: tuple[int, ...] | None
    sample_size: int
    ones: int
    mean: float
    frequency_statistic: float | None
    frequency_p_value: float | None
    runs: int
    runs_statistic: float | None
    runs_p_value: float | None
    alpha: float
    verdict: Verdict

    def to_json(self) -> dict[str, Any]:
        return {
            "subset": list(self.subset) if self.subset is not None else None,
            "sample_size": self.sample_size,
            "ones": self.ones,
            "mean": self.mean,
            "frequency_test": "degenerate"
            if self.frequency_p_value is None
            else "binomial",
            "frequency_statistic": self.frequency_statistic,
            "frequency_p_value": self.frequency_p_value,
            "runs": self.runs,
            "runs_statistic": self.runs_statistic,
            "runs_p_value": self.runs_p_value,
            "alpha": self.alpha,
            "verdict": self.verdict,
        }

    @classmethod
    def from_json(cls, raw: dict[str, Any]) -> "RandomnessReport":
        subset = raw.get("subset")
        return cls(
            subset=tuple(subset) if subset is not None else None,
            sample_size=int(raw["sample_size"]),
            ones=int(raw["ones"]),
            mean=float(raw["mean"]),
            frequency_statistic=raw["frequency_statistic"],
            frequency_p_value=raw["frequency_p_value"],
            runs=int(raw["runs"]),
            runs_statistic=raw["runs_statistic"],
            runs_p_value=raw["runs_p_value"],
            alpha=float(raw["alpha"]),
            verdict=raw["verdict"],
        )


def bernoulli_test(
    series: npt.ArrayLike,
    alpha: float = 0.01,
    subset: Iterable[int] | None = None,
) -> RandomnessReport:
    """
    Test a ±1 series for being Bernoulli(1/2).

    Frequency: exact two-sided binomial test of P(+1) = 1/2.
    Independence: Wald-Wolfowitz runs test with the normal approximation.
    A constant series is reported as ``"deterministic"`` without p-values.

    :raises InsufficientDataError: When the series has fewer than 100 entries.
    """
    values = np.asarray(series)
    size = int(values.size)
    if size < MIN_SERIES_LENGTH:
        raise InsufficientDataError(
            f"series has {size} entries, at least {MIN_SERIES_LENGTH} are required"
        )
    if not 0 < alpha < 1:
        raise InvalidInputError("alpha", "must lie strictly between 0 and 1")
    if not np.isin(values, (-1, 1)).all():
        raise InvalidInputError("series", "values must be -1 or 1")

    ones = int(np.count_nonzero(values == 1))
    minus = size - ones
    runs = 1 + int(np.count_nonzero(np.diff(values)))
    mean = float(values.mean())
    subset_key = tuple(sorted(subset)) if subset is not None else None

    if ones == 0 or minus == 0:
        return RandomnessReport(
            subset_key, size, ones, mean, None, None, runs, None, None, alpha,
            "deterministic",
        )

    frequency_statistic = (ones - size / 2) / math.sqrt(size / 4)
    frequency_p = float(stats.binomtest(ones, size, 0.5).pvalue)

    expected_runs = 2 * ones * minus / size + 1
    variance = (expected_runs - 1) * (expected_runs - 2) / (size - 1)
    runs_statistic = (runs - expected_runs) / math.sqrt(variance)
    runs_p = float(min(1.0, 2 * stats.norm.sf(abs(runs_statistic))))

    verdict: Verdict = (
        "consistent-with-Bernoulli(1/2)"
        if frequency_p >= alpha and runs_p >= alpha
        else "rejected"
    )
    return RandomnessReport(
        subset_key,
        size,
        ones,
        mean,
        float(frequency_statistic),
        min(1.0, frequency_p),
        runs,
        float(runs_statistic),
        runs_p,
        alpha,
        verdict,
    )


@dataclass(frozen=True)
class UniformityReport:
    """Chi-square test of the outcome strings against the uniform GHZ support."""

    n: int
    sample_size: int
    admissible: int
    off_support: int
    statistic: float
    p_value: float
    alpha: float

    @property
    def passed(self) -> bool:
        return self.off_support == 0 and self.p_value >= self.alpha

    def to_json(self) -> dict[str, Any]:
        return {
            "n": self.n,
            "sample_size": self.sample_size,
            "admissible": self.admissible,
            "off_support": self.off_support,
            "statistic": self.statistic,
            "p_value": self.p_value,
            "alpha": self.alpha,
            "passed": self.passed,
        }


def uniformity_test(record: MeasurementRecord, alpha: float = 0.01) -> UniformityReport:
    """
    Compare the empirical outcome strings with the uniform distribution on
    the ``2**(n-1)`` strings of product +1.

    Any row with product -1 is counted in ``off_support`` and fails the test.
    """
    patterns = pattern_indices(record)
    counts = np.bincount(patterns, minlength=1 << record.n)
    even = np.bitwise_count(np.arange(1 << record.n, dtype=np.int64)) % 2 == 0
    admissible = counts[even]
    off_support = int(counts[~even].sum())
    if admissible.size == 1:
        statistic, p_value = 0.0, 1.0
    else:
        result = stats.chisquare(admissible)
        statistic, p_value = float(result.statistic), float(result.pvalue)
    return UniformityReport(
        record.n,
        record.trials,
        int(admissible.size),
        off_support,
        statistic,
        p_value,
        alpha,
    )


# ---------------------------------------------------------------------------
# CSV exchange
# ---------------------------------------------------------------------------


def _columns(n: int) -> list[str]:
    return ["t", *(f"s{k}" for k in range(1, n + 1)), "product"]


def record_frame(record: MeasurementRecord) -> pd.DataFrame:
    """The record as a table with columns ``t, s1..sN, product``."""
    frame = pd.DataFrame(
        record.outcomes.astype(np.int64),
        columns=[f"s{k}" for k in range(1, record.n + 1)],
    )
    frame.insert(0, "t", np.arange(record.trials, dtype=np.int64))
    frame["product"] = record.products.astype(np.int64)
    return frame


def write_record(record: MeasurementRecord, path: str | Path) -> None:
    record_frame(record).to_csv(path, index=False, lineterminator="\n")


def read_record(path: str | Path) -> MeasurementRecord:
    """
    Parse a record CSV.

    :raises InvalidInputError: Naming the offending column when the header,
        the time column, a value or the product column is wrong.
    """
    try:
        frame = pd.read_csv(path)
    except FileNotFoundError as e:
        raise InvalidInputError("record", f"file not found: {path}") from e
    except (pd.errors.ParserError, pd.errors.EmptyDataError, UnicodeDecodeError) as e:
        raise InvalidInputError("record", f"unreadable CSV ({e})") from e
    header = list(frame.columns)
    if len(header) < 3 or header != _columns(len(header) - 2):
        raise InvalidInputError("header", f"expected t,s1,...,sN,product, got {header}")
    if frame.empty:
        raise InvalidInputError("record", "record has no trials")
    n = len(header) - 2
    for column in header:
        if not pd.api.types.is_integer_dtype(frame[column]):
            raise InvalidInputError(column, "values must be integers")
    if not (frame["t"].to_numpy() == np.arange(len(frame))).all():
        raise InvalidInputError("t", "trial index must run 0, 1, 2, ...")
    outcomes = frame[[f"s{k}" for k in range(1, n + 1)]].to_numpy()
    for k in range(n):
        if not np.isin(outcomes[:, k], (-1, 1)).all():
            raise InvalidInputError(f"s{k + 1}", "values must be -1 or 1")
    if not (np.prod(outcomes, axis=1) == frame["product"].to_numpy()).all():
        raise InvalidInputError("product", "product column does not match the outcomes")
    return MeasurementRecord(n, outcomes.astype(np.int8))
