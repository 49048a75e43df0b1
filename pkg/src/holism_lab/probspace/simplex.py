"""
Dense simplex tableau over :class:`fractions.Fraction`.

Solves ``min c·x`` subject to ``A x = b, x >= 0`` exactly. Entering and
leaving variables follow Bland's rule (lowest index), which rules out
cycling, so every call terminates without tolerances.

Phase one adds one artificial per row and minimises their sum. The
artificials are then pivoted out; rows where that is impossible are linear
combinations of the others and are dropped, so the feasible tableau has
exactly ``rank(A)`` rows. Phase two runs on copies of that tableau, one per
objective.
"""

from collections.abc import Sequence
from fractions import Fraction

ZERO = Fraction(0)
ONE = Fraction(1)


class UnboundedError(ArithmeticError):
    """Raised when an objective decreases without bound."""


class SimplexTableau:
    """Rows of ``A`` already in canonical form for the current basis."""

    def __init__(
        self, rows: list[list[Fraction]], rhs: list[Fraction], basis: list[int]
    ) -> None:
        self.rows = rows
        self.rhs = rhs
        self.basis = basis

    @property
    def width(self) -> int:
        return len(self.rows[0]) if self.rows else 0

    @property
    def rank(self) -> int:
        return len(self.rows)

    def copy(self) -> "SimplexTableau":
        return SimplexTableau(
            [list(row) for row in self.rows], list(self.rhs), list(self.basis)
        )

    def pivot(self, i: int, j: int, reduced: list[Fraction] | None = None) -> None:
        """Make column ``j`` basic in row ``i``."""
        row = self.rows[i]
        piv = row[j]
        if piv != ONE:
            row[:] = [v / piv for v in row]
            self.rhs[i] /= piv
        nonzero = [l for l, v in enumerate(row) if v]
        for k, other in enumerate(self.rows):
            if k == i:
                continue
            f = other[j]
            if f:
                for l in nonzero:
                    other[l] -= f * row[l]
                self.rhs[k] -= f * self.rhs[i]
        if reduced is not None:
            f = reduced[j]
            if f:
                for l in nonzero:
                    reduced[l] -= f * row[l]
        self.basis[i] = j

    def solution(self, width: int | None = None) -> list[Fraction]:
        """Current basic solution, padded with zeros to ``width`` columns."""
        x = [ZERO] * (self.width if width is None else width)
        for i, b in enumerate(self.basis):
            if b < len(x):
                x[b] = self.rhs[i]
        return x

    def minimize(self, cost: Sequence[Fraction]) -> Fraction:
        """
        Pivot to an optimal basis for ``min cost·x`` and return the optimum.

        :raises UnboundedError: When no leaving row exists for an improving column.
        """
        reduced = list(cost)
        for i, b in enumerate(self.basis):
            cb = cost[b]
            if cb:
                for l, v in enumerate(self.rows[i]):
                    if v:
                        reduced[l] -= cb * v
        while True:
            entering = next((j for j, d in enumerate(reduced) if d < 0), None)
            if entering is None:
                break
            candidates = [
                (self.rhs[i] / row[entering], self.basis[i], i)
                for i, row in enumerate(self.rows)
                if row[entering] > 0
            ]
            if not candidates:
                raise UnboundedError(f"objective unbounded along column {entering}")
            _, _, leaving = min(candidates)
            self.pivot(leaving, entering, reduced)
        return sum((cost[b] * self.rhs[i] for i, b in enumerate(self.basis)), ZERO)

    def maximize(self, cost: Sequence[Fraction]) -> Fraction:
        return -self.minimize([-c for c in cost])

    def drop_row(self, i: int) -> None:
        del self.rows[i]
        del self.rhs[i]
        del self.basis[i]

    def truncate(self, width: int) -> None:
        """Forget every column from ``width`` on."""
        for row in self.rows:
            del row[width:]


def feasible_tableau(
    matrix: Sequence[Sequence[Fraction]], rhs: Sequence[Fraction]
) -> SimplexTableau | None:
    """
    Phase one: a feasible basis for ``matrix @ x = rhs, x >= 0``.

    :returns: A tableau with redundant rows removed, or ``None`` when the
        system has no non-negative solution.
    """
    m = len(matrix)
    width = len(matrix[0]) if m else 0
    rows: list[list[Fraction]] = []
    right: list[Fraction] = []
    for i, (row, b) in enumerate(zip(matrix, rhs, strict=True)):
        flip = -1 if b < 0 else 1
        rows.append(
            [Fraction(flip * v) for v in row]
            + [ONE if k == i else ZERO for k in range(m)]
        )
        right.append(Fraction(flip * b))
    tableau = SimplexTableau(rows, right, list(range(width, width + m)))
    if tableau.minimize([ZERO] * width + [ONE] * m) != 0:
        return None

    for i in reversed(range(tableau.rank)):
        if tableau.basis[i] < width:
            continue
        j = next((j for j in range(width) if tableau.rows[i][j]), None)
        if j is None:
            tableau.drop_row(i)
        else:
            tableau.pivot(i, j)
    tableau.truncate(width)
    return tableau
