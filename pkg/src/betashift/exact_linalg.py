"""Gaussian elimination over exact scalars (Fractions or field elements)."""

from __future__ import annotations

from fractions import Fraction
from typing import Sequence


def _is_zero(x) -> bool:
    return x == 0


def _inv(x):
    if isinstance(x, int):
        return Fraction(1, x)
    return 1 / x


def rref(matrix: Sequence[Sequence], zero=0):
    """Reduced row echelon form; returns (rows, pivot_columns)."""
    rows = [list(r) for r in matrix]
    if not rows:
        return rows, []
    ncols = len(rows[0])
    pivots = []
    r = 0
    for c in range(ncols):
        pivot = next((i for i in range(r, len(rows)) if not _is_zero(rows[i][c])), None)
        if pivot is None:
            continue
        rows[r], rows[pivot] = rows[pivot], rows[r]
        inv = _inv(rows[r][c])
        rows[r] = [x * inv for x in rows[r]]
        for i in range(len(rows)):
            if i != r and not _is_zero(rows[i][c]):
                f = rows[i][c]
                rows[i] = [a - f * b for a, b in zip(rows[i], rows[r])]
        pivots.append(c)
        r += 1
        if r == len(rows):
            break
    return rows, pivots


def nullspace(matrix: Sequence[Sequence], zero=0, one=1) -> list[list]:
    """Basis of {x : matrix x = 0}."""
    ncols = len(matrix[0])
    rows, pivots = rref(matrix, zero)
    free = [c for c in range(ncols) if c not in pivots]
    basis = []
    for f in free:
        v = [zero] * ncols
        v[f] = one
        for i, p in enumerate(pivots):
            v[p] = -rows[i][f]
        basis.append(v)
    return basis


def solve_stationary(p: Sequence[Sequence], zero=0, one=1) -> list | None:
    """Unique row vector pi with pi p = pi and sum(pi) = 1, or None if not unique."""
    n = len(p)
    # unknowns pi_0..pi_{n-1}; equations (p^T - I) pi = 0 and sum pi = 1
    aug = []
    for j in range(n):
        aug.append([p[i][j] - (one if i == j else zero) for i in range(n)] + [zero])
    aug.append([one] * n + [one])
    rows, pivots = rref(aug, zero)
    if n in pivots:
        return None  # inconsistent
    if len(pivots) != n:
        return None  # not unique
    pi = [zero] * n
    for i, c in enumerate(pivots):
        pi[c] = rows[i][n]
    return pi
