"""Exact 2x2 algebra over the rationals.

Scalars are :class:`fractions.Fraction`; nothing in this module rounds.
Matrices are stored row-major, ``Mat2(a, b, c, d)`` meaning ``(a b; c d)``.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from fractions import Fraction
from math import gcd, lcm
from typing import Iterable, Sequence

Scalar = Fraction


def to_scalar(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, float):
        raise TypeError("floats are not exact scalars; pass int, Fraction or 'p/q'")
    return Fraction(x)


@dataclass(frozen=True, slots=True)
class Mat2:
    a: Fraction
    b: Fraction
    c: Fraction
    d: Fraction

    def __post_init__(self):
        for name in ("a", "b", "c", "d"):
            v = to_scalar(getattr(self, name))
            if v < 0:
                raise ValueError(f"matrix entry {name}={v} is negative")
            object.__setattr__(self, name, v)

    @classmethod
    def of(cls, rows: Sequence[Sequence]) -> "Mat2":
        (a, b), (c, d) = rows
        return cls(a, b, c, d)

    @property
    def entries(self) -> tuple[Fraction, Fraction, Fraction, Fraction]:
        return (self.a, self.b, self.c, self.d)

    def rows(self) -> list[list[Fraction]]:
        return [[self.a, self.b], [self.c, self.d]]

    def __mul__(self, other: "Mat2") -> "Mat2":
        return mul(self, other)

    def scaled(self, s) -> "Mat2":
        s = to_scalar(s)
        if s <= 0:
            raise ValueError("scale factor must be positive")
        return Mat2(s * self.a, s * self.b, s * self.c, s * self.d)

    def __str__(self):
        return f"({self.a} {self.b}; {self.c} {self.d})"


@dataclass(frozen=True, slots=True)
class Vec2:
    v1: Fraction
    v2: Fraction

    def __post_init__(self):
        v1, v2 = to_scalar(self.v1), to_scalar(self.v2)
        if v1 < 0 or v2 < 0:
            raise ValueError("vector entries must be nonnegative")
        if v1 == 0 and v2 == 0:
            raise ValueError("vector must be nonzero")
        object.__setattr__(self, "v1", v1)
        object.__setattr__(self, "v2", v2)

    @property
    def positive(self) -> bool:
        return self.v1 > 0 and self.v2 > 0

    def swapped(self) -> "Vec2":
        return Vec2(self.v2, self.v1)

    def scaled(self, s) -> "Vec2":
        s = to_scalar(s)
        if s <= 0:
            raise ValueError("scale factor must be positive")
        return Vec2(s * self.v1, s * self.v2)

    def __str__(self):
        return f"({self.v1}, {self.v2})"


@dataclass(frozen=True)
class MatrixSystem:
    """The finite matrix family together with the starting vector."""

    matrices: tuple[Mat2, ...]
    V: Vec2

    def __post_init__(self):
        mats = tuple(self.matrices)
        if not mats:
            raise ValueError("a system needs at least one matrix")
        if not all(isinstance(m, Mat2) for m in mats):
            raise TypeError("matrices must be Mat2 instances")
        if not isinstance(self.V, Vec2):
            raise TypeError("V must be a Vec2")
        object.__setattr__(self, "matrices", mats)

    @property
    def d(self) -> int:
        return len(self.matrices)

    def mirrored(self) -> "MatrixSystem":
        """The system conjugated by the swap matrix, with V swapped too."""
        return MatrixSystem(tuple(conjugate_by_delta(m) for m in self.matrices), self.V.swapped())


class ShapeTag(enum.Enum):
    ZERO = "Zero"
    DIAGONAL = "Diagonal"
    ANTIDIAGONAL = "AntiDiagonal"
    LOWER = "LowerTriangular"
    UPPER = "UpperTriangular"
    POSITIVE = "Positive"
    GENERAL = "General"


@dataclass(frozen=True, slots=True)
class Shape:
    tag: ShapeTag
    invertible: bool


IDENTITY = Mat2(1, 0, 0, 1)
DELTA = Mat2(0, 1, 1, 0)


def det(M: Mat2) -> Fraction:
    return M.a * M.d - M.b * M.c


def mul(M: Mat2, N: Mat2) -> Mat2:
    return Mat2(
        M.a * N.a + M.b * N.c,
        M.a * N.b + M.b * N.d,
        M.c * N.a + M.d * N.c,
        M.c * N.b + M.d * N.d,
    )


def apply(M: Mat2, V) -> tuple[Fraction, Fraction]:
    """``M @ V``; the result may be the zero vector."""
    v1, v2 = (V.v1, V.v2) if isinstance(V, Vec2) else (to_scalar(V[0]), to_scalar(V[1]))
    return (M.a * v1 + M.b * v2, M.c * v1 + M.d * v2)


def delta() -> Mat2:
    return DELTA


def conjugate_by_delta(M: Mat2) -> Mat2:
    return Mat2(M.d, M.c, M.b, M.a)


def delta_variant(M: Mat2, left: int, right: int) -> Mat2:
    """``Delta**left @ M @ Delta**right`` without multiplying."""
    a, b, c, d = M.entries
    if left:
        a, b, c, d = c, d, a, b
    if right:
        a, b, c, d = b, a, d, c
    return Mat2(a, b, c, d)


def classify(M: Mat2) -> Shape:
    a, b, c, d = (x != 0 for x in M.entries)
    inv = det(M) != 0
    if not (a or b or c or d):
        tag = ShapeTag.ZERO
    elif not b and not c:
        tag = ShapeTag.DIAGONAL
    elif not a and not d:
        tag = ShapeTag.ANTIDIAGONAL
    elif c and not b:
        tag = ShapeTag.LOWER
    elif b and not c:
        tag = ShapeTag.UPPER
    elif a and b and c and d:
        tag = ShapeTag.POSITIVE
    else:
        tag = ShapeTag.GENERAL
    return Shape(tag, inv)


def mplus(system: MatrixSystem) -> frozenset[Mat2]:
    out = set()
    for M in system.matrices:
        for i in (0, 1):
            for j in (0, 1):
                X = delta_variant(M, i, j)
                if det(X) > 0:
                    out.add(X)
    return frozenset(out)


def primitive_ints(values: Iterable[Fraction]) -> tuple[int, ...]:
    """Smallest positive integer multiple of a nonnegative rational tuple.

    Two tuples that differ by a positive factor map to the same result,
    which is what makes the integer engine scale-blind.
    """
    values = [to_scalar(v) for v in values]
    den = lcm(*(v.denominator for v in values))
    ints = [int(v * den) for v in values]
    g = gcd(*ints)
    if g == 0:
        return tuple(ints)
    return tuple(x // g for x in ints)
