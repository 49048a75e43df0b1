from fractions import Fraction as F

import pytest

from holism_lab.probspace.simplex import UnboundedError, feasible_tableau


def _rows(*rows):
    return [[F(v) for v in row] for row in rows]


def test_feasible_tableau_and_optima():
    """Phase one finds a basis; phase two reaches both optima exactly."""
    # x + y + z = 1, x - y = 0
    tableau = feasible_tableau(_rows((1, 1, 1), (1, -1, 0)), [F(1), F(0)])
    assert tableau is not None
    assert tableau.rank == 2
    low, high = tableau.copy(), tableau.copy()
    assert low.minimize([F(0), F(0), F(1)]) == 0
    assert low.solution() == [F(1, 2), F(1, 2), F(0)]
    assert high.maximize([F(0), F(0), F(1)]) == 1
    assert high.solution() == [F(0), F(0), F(1)]


def test_redundant_rows_are_dropped():
    """Linearly dependent equality rows do not count toward the rank."""
    tableau = feasible_tableau(
        _rows((1, 1, 0), (0, 0, 1), (1, 1, 1)), [F(1, 2), F(1, 2), F(1)]
    )
    assert tableau is not None
    assert tableau.rank == 2
    assert tableau.width == 3


def test_infeasible_system():
    """Inconsistent or sign-violating systems have no feasible tableau."""
    assert feasible_tableau(_rows((1, 1), (1, 1)), [F(1), F(2)]) is None
    assert feasible_tableau(_rows((1, 1),), [F(-1)]) is None


def test_negative_right_hand_side_is_flipped():
    """Rows with a negative right-hand side are negated before phase one."""
    tableau = feasible_tableau(_rows((1, 1), (1, -1)), [F(1), F(-1, 2)])
    assert tableau is not None
    assert tableau.solution() == [F(1, 4), F(3, 4)]


def test_unbounded_objective():
    """An unbounded direction raises only in the direction that is unbounded."""
    tableau = feasible_tableau(_rows((1, -1),), [F(0)])
    assert tableau is not None
    with pytest.raises(UnboundedError):
        tableau.copy().maximize([F(1), F(0)])
    assert tableau.copy().minimize([F(1), F(0)]) == 0


def test_degenerate_problem_terminates():
    """Bland's rule does not cycle on a degenerate problem."""
    # A classic cycling example for the largest-coefficient rule.
    matrix = _rows(
        (F(1, 4), -8, -1, 9, 1, 0, 0),
        (F(1, 2), -12, F(-1, 2), 3, 0, 1, 0),
        (0, 0, 1, 0, 0, 0, 1),
    )
    tableau = feasible_tableau(matrix, [F(0), F(0), F(1)])
    assert tableau is not None
    value = tableau.minimize([F(-3, 4), 20, F(-1, 2), 6, 0, 0, 0])
    assert value == F(-5, 4)
