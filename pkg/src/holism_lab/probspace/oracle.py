"""
Brute-force vertex enumeration of a moment system, for cross-checking
:mod:`holism_lab.probspace.moments` on small ``n``.

Shares nothing with the simplex path beyond the constraint types: every
basic solution over every column subset of size ``rank`` is computed by
Gaussian elimination and the non-negative ones are kept. The feasible set
is a polytope, so it is a single point exactly when it has one vertex.
"""

from collections.abc import Iterable, Sequence
from fractions import Fraction
from itertools import combinations

from ..common.errors import CapExceededError, InvalidInputError
from .distribution import AtomDistribution, MomentConstraint, character, subset_mask
from .moments import Infeasible, MomentRange, SolveOutcome, Underdetermined, Unique

ORACLE_MAX_N = 4

Matrix = list[list[Fraction]]


def _system(
    n: int, constraints: Iterable[MomentConstraint]
) -> tuple[Matrix, list[Fraction]]:
    targets: dict[int, Fraction] = {0: Fraction(1)}
    for c in constraints:
        mask = subset_mask(n, c.subset)
        if targets.get(mask, c.target) != c.target:
            raise InvalidInputError(
                "constraints", f"subset {sorted(c.subset)} given twice"
            )
        targets[mask] = c.target
    masks = sorted(targets)
    matrix = [[Fraction(character(a, m)) for a in range(1 << n)] for m in masks]
    return matrix, [targets[m] for m in masks]


def _row_reduce(
    matrix: Matrix, rhs: list[Fraction]
) -> tuple[Matrix, list[Fraction]] | None:
    """Independent rows of the augmented system, or ``None`` when inconsistent."""
    rows = [list(r) + [b] for r, b in zip(matrix, rhs, strict=True)]
    width = len(matrix[0])
    rank = 0
    for col in range(width):
        pivot = next((r for r in range(rank, len(rows)) if rows[r][col]), None)
        if pivot is None:
            continue
        rows[rank], rows[pivot] = rows[pivot], rows[rank]
        for r in range(len(rows)):
            if r != rank and rows[r][col]:
                f = rows[r][col] / rows[rank][col]
                rows[r] = [x - f * y for x, y in zip(rows[r], rows[rank], strict=True)]
        rank += 1
    if any(row[-1] for row in rows[rank:]):
        return None
    return [row[:-1] for row in rows[:rank]], [row[-1] for row in rows[:rank]]


def _solve_square(matrix: Matrix, rhs: list[Fraction]) -> list[Fraction] | None:
    size = len(matrix)
    rows = [list(r) + [b] for r, b in zip(matrix, rhs, strict=True)]
    for col in range(size):
        pivot = next((r for r in range(col, size) if rows[r][col]), None)
        if pivot is None:
            return None
        rows[col], rows[pivot] = rows[pivot], rows[col]
        for r in range(size):
            if r != col and rows[r][col]:
                f = rows[r][col] / rows[col][col]
                rows[r] = [x - f * y for x, y in zip(rows[r], rows[col], strict=True)]
    return [rows[i][-1] / rows[i][i] for i in range(size)]


def vertices(n: int, constraints: Sequence[MomentConstraint]) -> list[AtomDistribution]:
    """
    Every vertex of the feasible set, sorted by probability vector.

    :raises CapExceededError: When ``n`` exceeds :data:`ORACLE_MAX_N`.
    """
    if not 1 <= n <= ORACLE_MAX_N:
        raise CapExceededError(f"brute force is limited to 1 <= n <= {ORACLE_MAX_N}")
    reduced = _row_reduce(*_system(n, constraints))
    if reduced is None:
        return []
    matrix, rhs = reduced
    found: set[tuple[Fraction, ...]] = set()
    for columns in combinations(range(1 << n), len(matrix)):
        square = [[row[c] for c in columns] for row in matrix]
        values = _solve_square(square, rhs)
        if values is None or any(v < 0 for v in values):
            continue
        point = [Fraction(0)] * (1 << n)
        for c, v in zip(columns, values, strict=True):
            point[c] = v
        found.add(tuple(point))
    return [AtomDistribution(n, point) for point in sorted(found)]


def brute_force_solve(n: int, constraints: Sequence[MomentConstraint]) -> SolveOutcome:
    points = vertices(n, constraints)
    if not points:
        return Infeasible()
    if len(points) == 1:
        return Unique(points[0])
    return Underdetermined(points[0], points[1])


def brute_force_range(
    n: int, constraints: Sequence[MomentConstraint], target_subset: Iterable[int]
) -> MomentRange | Infeasible:
    """Extremes of a linear objective over a polytope sit on its vertices."""
    mask = subset_mask(n, target_subset)
    points = vertices(n, constraints)
    if not points:
        return Infeasible()
    values = [
        sum(
            (p * character(a, mask) for a, p in enumerate(d.probabilities)),
            Fraction(0),
        )
        for d in points
    ]
    return MomentRange(min(values), max(values))
