"""Closed intervals and boxes with exact rational endpoints.

Used by certified verification and cushion certification: every enclosure computed here contains the true
range, so a sign read off an enclosure is a proof.
"""

import enum
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Sequence

from polyrep.poly import SparsePoly


class Sign(enum.Enum):
    POSITIVE = "positive"
    NONNEGATIVE = "nonnegative"
    ZERO = "zero"
    NONPOSITIVE = "nonpositive"
    NEGATIVE = "negative"
    MIXED = "mixed"


@dataclass(frozen=True)
class Interval:
    lo: Fraction
    hi: Fraction

    def __post_init__(self) -> None:
        object.__setattr__(self, "lo", Fraction(self.lo))
        object.__setattr__(self, "hi", Fraction(self.hi))
        if self.lo > self.hi:
            raise ValueError(f"Empty interval [{self.lo}, {self.hi}]")

    @classmethod
    def point(cls, value: Fraction | int) -> "Interval":
        return cls(Fraction(value), Fraction(value))

    @property
    def width(self) -> Fraction:
        return self.hi - self.lo

    @property
    def mid(self) -> Fraction:
        return (self.lo + self.hi) / 2

    def contains(self, value: Fraction) -> bool:
        return self.lo <= value <= self.hi

    def __add__(self, other: "Interval | Fraction | int") -> "Interval":
        other = _as_interval(other)
        return Interval(self.lo + other.lo, self.hi + other.hi)

    __radd__ = __add__

    def __neg__(self) -> "Interval":
        return Interval(-self.hi, -self.lo)

    def __sub__(self, other: "Interval | Fraction | int") -> "Interval":
        return self + (-_as_interval(other))

    def __rsub__(self, other: "Interval | Fraction | int") -> "Interval":
        return _as_interval(other) - self

    def __mul__(self, other: "Interval | Fraction | int") -> "Interval":
        other = _as_interval(other)
        products = (self.lo * other.lo, self.lo * other.hi, self.hi * other.lo, self.hi * other.hi)
        return Interval(min(products), max(products))

    __rmul__ = __mul__

    def __pow__(self, exponent: int) -> "Interval":
        if exponent < 0:
            raise ValueError("Negative interval powers are not supported")
        if exponent == 0:
            return Interval.point(1)
        lo_p, hi_p = self.lo**exponent, self.hi**exponent
        if exponent % 2 == 1:
            return Interval(lo_p, hi_p)
        if self.lo >= 0:
            return Interval(lo_p, hi_p)
        if self.hi <= 0:
            return Interval(hi_p, lo_p)
        return Interval(Fraction(0), max(lo_p, hi_p))

    def intersect(self, other: "Interval") -> "Interval":
        lo, hi = max(self.lo, other.lo), min(self.hi, other.hi)
        if lo > hi:
            # Two valid enclosures of the same range always overlap; keep the tighter one.
            return self if self.width <= other.width else other
        return Interval(lo, hi)

    def hull(self, other: "Interval") -> "Interval":
        return Interval(min(self.lo, other.lo), max(self.hi, other.hi))

    def sign(self) -> Sign:
        if self.lo > 0:
            return Sign.POSITIVE
        if self.hi < 0:
            return Sign.NEGATIVE
        if self.lo == 0 and self.hi == 0:
            return Sign.ZERO
        if self.lo == 0:
            return Sign.NONNEGATIVE
        if self.hi == 0:
            return Sign.NONPOSITIVE
        return Sign.MIXED

    def bisect(self) -> tuple["Interval", "Interval"]:
        m = self.mid
        return Interval(self.lo, m), Interval(m, self.hi)

    def __str__(self) -> str:
        return f"[{self.lo}, {self.hi}]"


def _as_interval(value: "Interval | Fraction | int") -> Interval:
    return value if isinstance(value, Interval) else Interval.point(value)


@dataclass(frozen=True)
class Box:
    """Axis-aligned product of intervals."""

    sides: tuple[Interval, ...]

    @classmethod
    def from_bounds(cls, lower: Sequence[Fraction], upper: Sequence[Fraction]) -> "Box":
        return cls(tuple(Interval(lo, hi) for lo, hi in zip(lower, upper)))

    @classmethod
    def cube(cls, dim: int, radius: Fraction, center: Sequence[Fraction] | None = None) -> "Box":
        center = center if center is not None else (Fraction(0),) * dim
        return cls(tuple(Interval(c - radius, c + radius) for c in center))

    @property
    def dim(self) -> int:
        return len(self.sides)

    @property
    def center(self) -> tuple[Fraction, ...]:
        return tuple(s.mid for s in self.sides)

    @property
    def max_width(self) -> Fraction:
        return max((s.width for s in self.sides), default=Fraction(0))

    def contains(self, point: Sequence[Fraction]) -> bool:
        return all(s.contains(Fraction(x)) for s, x in zip(self.sides, point))

    def dilate(self, factor: Fraction, margin: Fraction = Fraction(0)) -> "Box":
        """Scale about the center by ``factor`` and pad every side by ``margin``."""
        out = []
        for s in self.sides:
            half = s.width * factor / 2 + margin
            out.append(Interval(s.mid - half, s.mid + half))
        return Box(tuple(out))

    def split(self) -> tuple["Box", "Box"]:
        """Bisect along the widest side."""
        axis = max(range(self.dim), key=lambda i: self.sides[i].width)
        left, right = self.sides[axis].bisect()
        return (
            Box(self.sides[:axis] + (left,) + self.sides[axis + 1 :]),
            Box(self.sides[:axis] + (right,) + self.sides[axis + 1 :]),
        )

    def corners(self) -> Iterator[tuple[Fraction, ...]]:
        def rec(i: int, prefix: tuple[Fraction, ...]) -> Iterator[tuple[Fraction, ...]]:
            if i == self.dim:
                yield prefix
                return
            yield from rec(i + 1, prefix + (self.sides[i].lo,))
            if self.sides[i].width:
                yield from rec(i + 1, prefix + (self.sides[i].hi,))

        yield from rec(0, ())

    def to_json(self) -> list[list[str]]:
        return [[f"{s.lo.numerator}/{s.lo.denominator}", f"{s.hi.numerator}/{s.hi.denominator}"] for s in self.sides]


def natural_enclosure(poly: SparsePoly, box: Box) -> Interval:
    """Term-by-term interval extension."""
    total = Interval.point(0)
    for mono, coeff in poly.terms.items():
        term = Interval.point(coeff)
        for side, e in zip(box.sides, mono):
            if e:
                term = term * (side**e)
        total = total + term
    return total


def enclose(poly: SparsePoly, box: Box) -> Interval:
    """Range enclosure of a polynomial over a box.

    Intersects the natural extension with the mean-value form ``p(c) + sum_i dp/dx_i(box) * (x_i - c_i)``,
    which is the tighter of the two on small boxes.
    """
    if poly.dim != box.dim:
        raise ValueError(f"Box dimension {box.dim} does not match polynomial dimension {poly.dim}")
    natural = natural_enclosure(poly, box)
    if poly.degree <= 1:
        return natural
    center = box.center
    mean_value = Interval.point(poly.evaluate(center))
    for i, side in enumerate(box.sides):
        if not side.width:
            continue
        grad = natural_enclosure(poly.derivative(i), box)
        mean_value = mean_value + grad * (side - center[i])
    return natural.intersect(mean_value)


def univariate_enclosure(coefficients: Sequence[Fraction], arg: Interval) -> Interval:
    """Enclose a univariate polynomial through its Taylor expansion at the midpoint of ``arg``."""
    if not coefficients:
        return Interval.point(0)
    mid = arg.mid
    radius = arg.width / 2
    shifted = taylor_shift(coefficients, mid)
    bound = Fraction(0)
    rpow = Fraction(1)
    for a in shifted[1:]:
        rpow *= radius
        bound += abs(a) * rpow
    return Interval(shifted[0] - bound, shifted[0] + bound)


def taylor_shift(coefficients: Sequence[Fraction], center: Fraction) -> list[Fraction]:
    """Coefficients of ``p(center + t)`` from those of ``p(t)``."""
    coeffs = list(coefficients)
    n = len(coeffs)
    for i in range(n):
        for j in range(n - 2, i - 1, -1):
            coeffs[j] += center * coeffs[j + 1]
    return coeffs


def sqrt_lower(value: Fraction, bits: int = 32) -> Fraction:
    """Rational lower bound of ``sqrt(value)`` with relative accuracy about ``2^-bits``."""
    if value < 0:
        raise ValueError("Square root of a negative number")
    if value == 0:
        return Fraction(0)
    scale = 1 << bits
    num = value.numerator * scale * scale
    return Fraction(math.isqrt(num // value.denominator), scale)


def sqrt_upper(value: Fraction, bits: int = 32) -> Fraction:
    lower = sqrt_lower(value, bits)
    if lower * lower == value:
        return lower
    return lower + Fraction(1, 1 << bits)
