"""Determinant and inverse of small dense matrices."""
from __future__ import annotations

from typing import List, Sequence

from ..errors import EvaluationError

SINGULAR_TOL = 1e-12


def _copy(matrix: Sequence[Sequence[float]]) -> List[List[float]]:
    rows = [[float(x) for x in row] for row in matrix]
    n = len(rows)
    if any(len(r) != n for r in rows):
        raise EvaluationError("matrix operation needs a square matrix")
    return rows


def det(matrix: Sequence[Sequence[float]]) -> float:
    """LU decomposition with partial pivoting."""
    a = _copy(matrix)
    n = len(a)
    sign = 1.0
    result = 1.0
    for k in range(n):
        p = max(range(k, n), key=lambda i: abs(a[i][k]))
        if a[p][k] == 0.0:
            return 0.0
        if p != k:
            a[k], a[p] = a[p], a[k]
            sign = -sign
        pivot = a[k][k]
        result *= pivot
        for i in range(k + 1, n):
            f = a[i][k] / pivot
            if f != 0.0:
                row_i, row_k = a[i], a[k]
                for j in range(k + 1, n):
                    row_i[j] -= f * row_k[j]
    return sign * result


def inverse(matrix: Sequence[Sequence[float]]) -> List[List[float]]:
    """Gauss-Jordan elimination with partial pivoting."""
    a = _copy(matrix)
    n = len(a)
    if abs(det(a)) <= SINGULAR_TOL:
        raise EvaluationError("matrix is singular and cannot be inverted")
    inv = [[1.0 if i == j else 0.0 for j in range(n)] for i in range(n)]
    for k in range(n):
        p = max(range(k, n), key=lambda i: abs(a[i][k]))
        a[k], a[p] = a[p], a[k]
        inv[k], inv[p] = inv[p], inv[k]
        pivot = a[k][k]
        a[k] = [x / pivot for x in a[k]]
        inv[k] = [x / pivot for x in inv[k]]
        for i in range(n):
            if i != k:
                f = a[i][k]
                if f != 0.0:
                    a[i] = [x - f * y for x, y in zip(a[i], a[k])]
                    inv[i] = [x - f * y for x, y in zip(inv[i], inv[k])]
    return inv
