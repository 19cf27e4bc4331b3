"""Exact rational linear algebra on top of sympy matrices."""

import math
from fractions import Fraction
from typing import Sequence

import sympy

Vector = tuple[Fraction, ...]


def _to_sympy(value: Fraction) -> sympy.Rational:
    return sympy.Rational(value.numerator, value.denominator)


def _from_sympy(value: sympy.Expr) -> Fraction:
    value = sympy.Rational(value)
    return Fraction(int(value.p), int(value.q))


def matrix(rows: Sequence[Sequence[Fraction]], cols: int) -> sympy.Matrix:
    if not rows:
        return sympy.zeros(0, cols)
    return sympy.Matrix([[_to_sympy(Fraction(v)) for v in row] for row in rows])


def rank(rows: Sequence[Sequence[Fraction]], cols: int) -> int:
    if not rows:
        return 0
    return matrix(rows, cols).rank()


def nullspace(rows: Sequence[Sequence[Fraction]], cols: int) -> list[Vector]:
    """Rational basis of ``{x : row . x = 0 for every row}``."""
    if not rows:
        return [tuple(Fraction(int(i == j)) for j in range(cols)) for i in range(cols)]
    return [tuple(_from_sympy(v) for v in vec) for vec in matrix(rows, cols).nullspace()]


def solve(rows: Sequence[Sequence[Fraction]], rhs: Sequence[Fraction]) -> Vector | None:
    """Unique solution of a square system, or None when it is singular."""
    n = len(rows)
    if n == 0:
        return ()
    m = matrix(rows, n)
    if m.rank() < n:
        return None
    b = sympy.Matrix([_to_sympy(Fraction(v)) for v in rhs])
    return tuple(_from_sympy(v) for v in m.LUsolve(b))


def independent_rows(rows: Sequence[Sequence[Fraction]], cols: int) -> list[int]:
    """Indices of a maximal linearly independent subset, chosen greedily in order."""
    if not rows:
        return []
    _, pivots = matrix(rows, cols).T.rref()
    return list(pivots)


def right_inverse(rows: Sequence[Sequence[Fraction]], cols: int) -> list[Vector]:
    """``B^T (B B^T)^-1`` for a full-row-rank ``B``, returned row by row (``cols`` rows)."""
    b = matrix(rows, cols)
    inv = b.T * (b * b.T).inv()
    return [tuple(_from_sympy(inv[i, j]) for j in range(inv.cols)) for i in range(inv.rows)]


def mat_vec(rows: Sequence[Sequence[Fraction]], vec: Sequence[Fraction]) -> Vector:
    return tuple(sum((a * b for a, b in zip(row, vec)), Fraction(0)) for row in rows)


def dot(a: Sequence[Fraction], b: Sequence[Fraction]) -> Fraction:
    return sum((x * y for x, y in zip(a, b)), Fraction(0))


def primitive_vector(vec: Sequence[Fraction]) -> Vector:
    """Positive multiple of ``vec`` with coprime integer entries."""
    den = 1
    for v in vec:
        den = math.lcm(den, Fraction(v).denominator)
    ints = [int(Fraction(v) * den) for v in vec]
    g = 0
    for v in ints:
        g = math.gcd(g, v)
    if g == 0:
        return tuple(Fraction(0) for _ in vec)
    return tuple(Fraction(v // g) for v in ints)
