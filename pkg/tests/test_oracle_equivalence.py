from fractions import Fraction

import pytest
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from holism_lab.common.errors import CapExceededError
from holism_lab.probspace import moments, oracle
from holism_lab.probspace.distribution import (
    AtomDistribution,
    MomentConstraint,
    expectation_of_subset,
    mask_subset,
)
from holism_lab.probspace.moments import Infeasible, Underdetermined, Unique

# Small denominators keep feasible, degenerate systems common.
TARGETS = st.sampled_from(
    [Fraction(v) for v in ("-1", "-1/2", "-1/3", "0", "1/3", "1/2", "1")]
)


@st.composite
def systems(draw, max_n=oracle.ORACLE_MAX_N):
    n = draw(st.integers(min_value=1, max_value=max_n))
    most = 3 if n == 4 else (1 << n) - 1
    masks = draw(
        st.lists(
            st.integers(min_value=1, max_value=(1 << n) - 1),
            unique=True,
            max_size=most,
        )
    )
    constraints = [MomentConstraint.of(mask_subset(n, m), draw(TARGETS)) for m in masks]
    return n, constraints


@st.composite
def realisable_systems(draw):
    """Constraints read off an actual distribution, so they are always feasible."""
    n = draw(st.integers(min_value=1, max_value=3))
    weights = draw(
        st.lists(st.integers(0, 3), min_size=1 << n, max_size=1 << n).filter(any)
    )
    total = sum(weights)
    dist = AtomDistribution(n, tuple(Fraction(w, total) for w in weights))
    masks = draw(
        st.lists(st.integers(1, (1 << n) - 1), unique=True, max_size=(1 << n) - 1)
    )
    constraints = [
        MomentConstraint.of(mask_subset(n, m), expectation_of_subset(dist, mask_subset(n, m)))
        for m in masks
    ]
    return n, constraints, dist


def _satisfies(dist, constraints):
    return all(expectation_of_subset(dist, c.subset) == c.target for c in constraints)


@settings(max_examples=50, deadline=None, suppress_health_check=[HealthCheck.too_slow])
@given(systems())
def test_solve_agrees_with_vertex_enumeration(system):
    """The exact solver classifies random systems like vertex enumeration does."""
    n, constraints = system
    expected = oracle.brute_force_solve(n, constraints)
    actual = moments.solve_moments(n, constraints)
    assert actual.kind == expected.kind
    if isinstance(actual, Unique):
        assert actual == expected
    if isinstance(actual, Underdetermined):
        assert _satisfies(actual.first, constraints)
        assert _satisfies(actual.second, constraints)


@settings(max_examples=50, deadline=None, suppress_health_check=[HealthCheck.too_slow])
@given(systems(), st.data())
def test_range_agrees_with_vertex_enumeration(system, data):
    """Attainable intervals match the extremes over all polytope vertices."""
    n, constraints = system
    target = mask_subset(n, data.draw(st.integers(1, (1 << n) - 1)))
    assert moments.moment_range(n, constraints, target) == oracle.brute_force_range(
        n, constraints, target
    )


@settings(max_examples=50, deadline=None, suppress_health_check=[HealthCheck.too_slow])
@given(realisable_systems())
def test_realisable_systems_are_feasible(system):
    """Constraints read off a real distribution are never infeasible."""
    n, constraints, dist = system
    outcome = moments.solve_moments(n, constraints)
    assert not isinstance(outcome, Infeasible)
    if isinstance(outcome, Unique):
        assert outcome.distribution == dist


def test_oracle_cap():
    """Vertex enumeration refuses more than four variables."""
    with pytest.raises(CapExceededError):
        oracle.vertices(5, [])


def test_oracle_known_cases():
    """The oracle reproduces the three- and four-variable GHZ outcomes."""
    assert oracle.brute_force_solve(3, moments.ghz_constraints(3)).kind == "unique"
    assert oracle.brute_force_solve(4, moments.ghz_constraints(4)).kind == "underdetermined"
    assert len(oracle.vertices(1, [])) == 2
