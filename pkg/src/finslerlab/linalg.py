"""Partial-pivot elimination for the tiny dense systems this package needs.

One generic implementation serves two element types: plain floats and jets
(anything supporting + - * / and neg).  Pivots are compared by a magnitude
functional -- abs for floats, abs of the value coefficient for jets -- and a
pivot falling below ``floor`` times its row scale raises SingularMetric.
"""

from __future__ import annotations

from .errors import SingularMetric
from .jets import Jet

PIVOT_FLOOR = 1e-12


def _magnitude(element):
    if isinstance(element, Jet):
        return abs(element.value)
    return abs(element)


def solve(matrix, rhs_columns, floor=PIVOT_FLOOR):
    """Solve A X = B for X, with B given as a list of columns.

    ``matrix`` is a list of rows; entries may be floats or jets (mixed is
    fine as long as the arithmetic accepts it).  Returns the solution as a
    list of columns matching ``rhs_columns``.
    """
    n = len(matrix)
    a = [list(row) for row in matrix]
    cols = [list(col) for col in rhs_columns]
    scales = [max(_magnitude(e) for e in row) for row in a]
    if min(scales) == 0.0:
        raise SingularMetric("matrix has a zero row")
    perm = list(range(n))
    for k in range(n):
        pivot_row = max(range(k, n),
                        key=lambda r: _magnitude(a[r][k]) / scales[perm[r]])
        if _magnitude(a[pivot_row][k]) < floor * scales[perm[pivot_row]]:
            raise SingularMetric(
                f"pivot {k} below {floor} of row scale during elimination")
        if pivot_row != k:
            a[k], a[pivot_row] = a[pivot_row], a[k]
            perm[k], perm[pivot_row] = perm[pivot_row], perm[k]
            for col in cols:
                col[k], col[pivot_row] = col[pivot_row], col[k]
        pivot = a[k][k]
        for r in range(k + 1, n):
            factor = a[r][k] / pivot
            for c in range(k + 1, n):
                a[r][c] = a[r][c] - factor * a[k][c]
            a[r][k] = 0.0
            for col in cols:
                col[r] = col[r] - factor * col[k]
    solutions = []
    for col in cols:
        x = [None] * n
        for i in range(n - 1, -1, -1):
            acc = col[i]
            for j in range(i + 1, n):
                acc = acc - a[i][j] * x[j]
            x[i] = acc / a[i][i]
        solutions.append(x)
    return solutions


def invert(matrix, floor=PIVOT_FLOOR):
    """Inverse as a list of rows; elements may be floats or jets."""
    n = len(matrix)
    identity_cols = [[1.0 if r == c else 0.0 for r in range(n)]
                     for c in range(n)]
    cols = solve(matrix, identity_cols, floor=floor)
    return [[cols[c][r] for c in range(n)] for r in range(n)]


def det(matrix):
    """Determinant by elimination; float entries only."""
    n = len(matrix)
    a = [[float(e) for e in row] for row in matrix]
    sign = 1.0
    result = 1.0
    for k in range(n):
        pivot_row = max(range(k, n), key=lambda r: abs(a[r][k]))
        if a[pivot_row][k] == 0.0:
            return 0.0
        if pivot_row != k:
            a[k], a[pivot_row] = a[pivot_row], a[k]
            sign = -sign
        pivot = a[k][k]
        result *= pivot
        for r in range(k + 1, n):
            factor = a[r][k] / pivot
            for c in range(k + 1, n):
                a[r][c] -= factor * a[k][c]
    return sign * result


def is_positive_definite(matrix, floor=PIVOT_FLOOR):
    """Sylvester test on a symmetric float matrix, with a relative floor."""
    n = len(matrix)
    scale = max(abs(matrix[i][j]) for i in range(n) for j in range(n))
    if scale == 0.0:
        return False
    for k in range(1, n + 1):
        minor = [[matrix[i][j] for j in range(k)] for i in range(k)]
        if det(minor) <= (floor * scale) ** k:
            return False
    return True
