"""Lazily expanded polynomial expressions.

The separators built by this package are products, powers and compositions of moderate polynomials whose full
expansion can run to hundreds of thousands of terms. `Expr` keeps that structure: exact evaluation, interval
enclosure and restriction to a line all work node by node, and `expand` materializes a `SparsePoly` only when the
term budget allows it.
"""

import abc
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Any, Mapping, Sequence

import numpy as np

from polyrep.errors import BudgetExhausted, ParseError
from polyrep.interval import Box, Interval, enclose, univariate_enclosure
from polyrep.poly import Point, SparsePoly, compose_univariate, format_rational, parse_rational

# Leaf-with-leaf operations below this size are expanded eagerly.
EAGER_TERM_LIMIT = 256


class Expr(abc.ABC):
    """A polynomial in ``dim`` variables given as an expression tree."""

    dim: int

    @abc.abstractmethod
    def evaluate(self, point: Point) -> Fraction: ...

    @abc.abstractmethod
    def evaluate_float(self, points: np.ndarray) -> np.ndarray: ...

    @abc.abstractmethod
    def enclose(self, box: Box) -> Interval: ...

    @property
    @abc.abstractmethod
    def degree(self) -> int:
        """Upper bound for the total degree."""

    @abc.abstractmethod
    def _expand(self, max_terms: int | None) -> SparsePoly: ...

    @abc.abstractmethod
    def restrict_to_line(self, origin: Point, direction: Point) -> SparsePoly: ...

    @abc.abstractmethod
    def pullback(self, images: Sequence[SparsePoly]) -> "Expr":
        """Substitute polynomials (typically affine maps) for the variables."""

    @abc.abstractmethod
    def to_json(self) -> dict: ...

    def __call__(self, point: Point) -> Fraction:
        return self.evaluate(point)

    def expand(self, max_terms: int | None = None) -> SparsePoly:
        """Materialize the polynomial.

        Raises:
            BudgetExhausted: If an intermediate or final result exceeds ``max_terms`` terms.
        """
        cache = self.__dict__.setdefault("_expansions", {})
        if max_terms not in cache:
            if None in cache:
                result = cache[None]
                _check_terms(result, max_terms)
            else:
                result = self._expand(max_terms)
            cache[max_terms] = result
        return cache[max_terms]

    def try_expand(self, max_terms: int) -> SparsePoly | None:
        try:
            return self.expand(max_terms)
        except BudgetExhausted:
            return None

    # Arithmetic

    def __add__(self, other: Any) -> "Expr":
        other = as_expr(other, self.dim)
        return _sum(self, other)

    def __radd__(self, other: Any) -> "Expr":
        return as_expr(other, self.dim) + self

    def __neg__(self) -> "Expr":
        return self.scale(-1)

    def __sub__(self, other: Any) -> "Expr":
        return self + (-as_expr(other, self.dim))

    def __rsub__(self, other: Any) -> "Expr":
        return as_expr(other, self.dim) - self

    def __mul__(self, other: Any) -> "Expr":
        if isinstance(other, (int, Fraction)):
            return self.scale(other)
        return _product(self, as_expr(other, self.dim))

    def __rmul__(self, other: Any) -> "Expr":
        if isinstance(other, (int, Fraction)):
            return self.scale(other)
        return as_expr(other, self.dim) * self

    def __pow__(self, exponent: int) -> "Expr":
        if not isinstance(exponent, int) or exponent < 0:
            raise ValueError(f"Exponent must be a non-negative integer, got {exponent!r}")
        if exponent == 0:
            return Leaf(SparsePoly.constant(self.dim, 1))
        if exponent == 1:
            return self
        if isinstance(self, Leaf) and len(self.poly.terms) <= 1:
            return Leaf(self.poly**exponent)
        if isinstance(self, Power):
            return Power(self.base, self.exponent * exponent)
        return Power(self, exponent)

    def scale(self, factor: int | Fraction) -> "Expr":
        factor = Fraction(factor)
        if factor == 1:
            return self
        if isinstance(self, Leaf):
            return Leaf(self.poly.scale(factor))
        if isinstance(self, Scaled):
            return Scaled(self.arg, self.factor * factor)
        return Scaled(self, factor)

    def compose(self, outer: SparsePoly) -> "Expr":
        """``outer(self)`` for a univariate ``outer``."""
        if outer.dim != 1:
            raise ValueError("Outer polynomial must be univariate")
        if isinstance(self, Leaf) and len(self.poly.terms) * max(outer.degree, 1) <= EAGER_TERM_LIMIT // 4:
            return Leaf(compose_univariate(outer, self.poly))
        return Composed(outer, self)


def _check_terms(poly: SparsePoly, max_terms: int | None) -> SparsePoly:
    if max_terms is not None and len(poly.terms) > max_terms:
        raise BudgetExhausted(
            f"Expansion exceeds the term budget ({len(poly.terms)} > {max_terms})",
            searched="max_terms",
        )
    return poly


def as_expr(value: Any, dim: int) -> Expr:
    if isinstance(value, Expr):
        if value.dim != dim:
            raise ValueError(f"Dimension mismatch: {dim} vs {value.dim}")
        return value
    if isinstance(value, SparsePoly):
        if value.dim != dim:
            raise ValueError(f"Dimension mismatch: {dim} vs {value.dim}")
        return Leaf(value)
    if isinstance(value, (int, Fraction)):
        return Leaf(SparsePoly.constant(dim, value))
    raise TypeError(f"Cannot use {type(value).__name__} as a polynomial expression")


def _sum(a: Expr, b: Expr) -> Expr:
    if isinstance(a, Leaf) and isinstance(b, Leaf) and len(a.poly.terms) + len(b.poly.terms) <= EAGER_TERM_LIMIT:
        return Leaf(a.poly + b.poly)
    if isinstance(a, Leaf) and a.poly.is_zero:
        return b
    if isinstance(b, Leaf) and b.poly.is_zero:
        return a
    left = a.args if isinstance(a, Sum) else (a,)
    right = b.args if isinstance(b, Sum) else (b,)
    return Sum(left + right)


def _product(a: Expr, b: Expr) -> Expr:
    if isinstance(a, Leaf) and isinstance(b, Leaf) and len(a.poly.terms) * len(b.poly.terms) <= EAGER_TERM_LIMIT:
        return Leaf(a.poly * b.poly)
    for x, y in ((a, b), (b, a)):
        if isinstance(x, Leaf) and x.poly.is_constant:
            return y.scale(x.poly.constant_term) if not x.poly.is_zero else x
    left = a.args if isinstance(a, Product) else (a,)
    right = b.args if isinstance(b, Product) else (b,)
    return Product(left + right)


@dataclass(frozen=True)
class Leaf(Expr):
    poly: SparsePoly

    @property
    def dim(self) -> int:  # type: ignore[override]
        return self.poly.dim

    def evaluate(self, point: Point) -> Fraction:
        return self.poly.evaluate(point)

    def evaluate_float(self, points: np.ndarray) -> np.ndarray:
        return self.poly.evaluate_float(points)

    def enclose(self, box: Box) -> Interval:
        return enclose(self.poly, box)

    @property
    def degree(self) -> int:
        return max(self.poly.degree, 0)

    def _expand(self, max_terms: int | None) -> SparsePoly:
        return _check_terms(self.poly, max_terms)

    def restrict_to_line(self, origin: Point, direction: Point) -> SparsePoly:
        return self.poly.restrict_to_line(origin, direction)

    def pullback(self, images: Sequence[SparsePoly]) -> Expr:
        return Leaf(self.poly.substitute(images))

    def to_json(self) -> dict:
        return {"op": "poly", "poly": self.poly.to_json()}


@dataclass(frozen=True)
class Sum(Expr):
    args: tuple[Expr, ...]

    @property
    def dim(self) -> int:  # type: ignore[override]
        return self.args[0].dim

    def evaluate(self, point: Point) -> Fraction:
        return sum((a.evaluate(point) for a in self.args), Fraction(0))

    def evaluate_float(self, points: np.ndarray) -> np.ndarray:
        return sum(a.evaluate_float(points) for a in self.args)

    def enclose(self, box: Box) -> Interval:
        total = Interval.point(0)
        for a in self.args:
            total = total + a.enclose(box)
        return total

    @property
    def degree(self) -> int:
        return max(a.degree for a in self.args)

    def _expand(self, max_terms: int | None) -> SparsePoly:
        total = SparsePoly.zero(self.dim)
        for a in self.args:
            total = _check_terms(total + a.expand(max_terms), max_terms)
        return total

    def restrict_to_line(self, origin: Point, direction: Point) -> SparsePoly:
        total = SparsePoly.zero(1)
        for a in self.args:
            total = total + a.restrict_to_line(origin, direction)
        return total

    def pullback(self, images: Sequence[SparsePoly]) -> Expr:
        result = self.args[0].pullback(images)
        for a in self.args[1:]:
            result = result + a.pullback(images)
        return result

    def to_json(self) -> dict:
        return {"op": "sum", "args": [a.to_json() for a in self.args]}


@dataclass(frozen=True)
class Product(Expr):
    args: tuple[Expr, ...]

    @property
    def dim(self) -> int:  # type: ignore[override]
        return self.args[0].dim

    def evaluate(self, point: Point) -> Fraction:
        result = Fraction(1)
        for a in self.args:
            result *= a.evaluate(point)
            if not result:
                break
        return result

    def evaluate_float(self, points: np.ndarray) -> np.ndarray:
        result = np.ones(np.atleast_2d(points).shape[0])
        for a in self.args:
            result = result * a.evaluate_float(points)
        return result

    def enclose(self, box: Box) -> Interval:
        result = Interval.point(1)
        for a in self.args:
            result = result * a.enclose(box)
        return result

    @property
    def degree(self) -> int:
        return sum(a.degree for a in self.args)

    def _expand(self, max_terms: int | None) -> SparsePoly:
        result = SparsePoly.constant(self.dim, 1)
        for a in self.args:
            result = _check_terms(result * a.expand(max_terms), max_terms)
        return result

    def restrict_to_line(self, origin: Point, direction: Point) -> SparsePoly:
        result = SparsePoly.constant(1, 1)
        for a in self.args:
            result = result * a.restrict_to_line(origin, direction)
        return result

    def pullback(self, images: Sequence[SparsePoly]) -> Expr:
        result = self.args[0].pullback(images)
        for a in self.args[1:]:
            result = result * a.pullback(images)
        return result

    def to_json(self) -> dict:
        return {"op": "product", "args": [a.to_json() for a in self.args]}


@dataclass(frozen=True)
class Power(Expr):
    base: Expr
    exponent: int

    @property
    def dim(self) -> int:  # type: ignore[override]
        return self.base.dim

    def evaluate(self, point: Point) -> Fraction:
        return self.base.evaluate(point) ** self.exponent

    def evaluate_float(self, points: np.ndarray) -> np.ndarray:
        with np.errstate(over="ignore", invalid="ignore"):
            return self.base.evaluate_float(points) ** self.exponent

    def enclose(self, box: Box) -> Interval:
        return self.base.enclose(box) ** self.exponent

    @property
    def degree(self) -> int:
        return self.base.degree * self.exponent

    def _expand(self, max_terms: int | None) -> SparsePoly:
        base = self.base.expand(max_terms)
        result = SparsePoly.constant(self.dim, 1)
        for _ in range(self.exponent):
            result = _check_terms(result * base, max_terms)
        return result

    def restrict_to_line(self, origin: Point, direction: Point) -> SparsePoly:
        return self.base.restrict_to_line(origin, direction) ** self.exponent

    def pullback(self, images: Sequence[SparsePoly]) -> Expr:
        return self.base.pullback(images) ** self.exponent

    def to_json(self) -> dict:
        return {"op": "power", "base": self.base.to_json(), "exponent": self.exponent}


@dataclass(frozen=True)
class Scaled(Expr):
    arg: Expr
    factor: Fraction

    @property
    def dim(self) -> int:  # type: ignore[override]
        return self.arg.dim

    def evaluate(self, point: Point) -> Fraction:
        return self.factor * self.arg.evaluate(point)

    def evaluate_float(self, points: np.ndarray) -> np.ndarray:
        return float(self.factor) * self.arg.evaluate_float(points)

    def enclose(self, box: Box) -> Interval:
        return self.arg.enclose(box) * self.factor

    @property
    def degree(self) -> int:
        return self.arg.degree

    def _expand(self, max_terms: int | None) -> SparsePoly:
        return self.arg.expand(max_terms).scale(self.factor)

    def restrict_to_line(self, origin: Point, direction: Point) -> SparsePoly:
        return self.arg.restrict_to_line(origin, direction).scale(self.factor)

    def pullback(self, images: Sequence[SparsePoly]) -> Expr:
        return self.arg.pullback(images).scale(self.factor)

    def to_json(self) -> dict:
        return {"op": "scale", "factor": format_rational(self.factor), "arg": self.arg.to_json()}


@dataclass(frozen=True)
class Composed(Expr):
    """``outer(inner(X))`` with a univariate ``outer``."""

    outer: SparsePoly
    inner: Expr

    @property
    def dim(self) -> int:  # type: ignore[override]
        return self.inner.dim

    @cached_property
    def _coefficients(self) -> list[Fraction]:
        return self.outer.coefficients()

    def evaluate(self, point: Point) -> Fraction:
        return self.outer.evaluate((self.inner.evaluate(point),))

    def evaluate_float(self, points: np.ndarray) -> np.ndarray:
        inner = self.inner.evaluate_float(points)
        with np.errstate(over="ignore", invalid="ignore"):
            return np.polynomial.polynomial.polyval(inner, [float(c) for c in self._coefficients])

    def enclose(self, box: Box) -> Interval:
        return univariate_enclosure(self._coefficients, self.inner.enclose(box))

    @property
    def degree(self) -> int:
        return max(self.outer.degree, 0) * self.inner.degree

    def _expand(self, max_terms: int | None) -> SparsePoly:
        inner = self.inner.expand(max_terms)
        result = SparsePoly.zero(self.dim)
        for c in reversed(self._coefficients):
            result = _check_terms(result * inner + c, max_terms)
        return result

    def restrict_to_line(self, origin: Point, direction: Point) -> SparsePoly:
        return compose_univariate(self.outer, self.inner.restrict_to_line(origin, direction))

    def pullback(self, images: Sequence[SparsePoly]) -> Expr:
        return self.inner.pullback(images).compose(self.outer)

    def to_json(self) -> dict:
        return {"op": "compose", "outer": self.outer.to_json(), "inner": self.inner.to_json()}


def homogenized_pullback(expr: Expr, degree: int, images: Sequence[SparsePoly], weight: SparsePoly) -> Expr:
    """``weight^degree * expr(images / weight)`` as a polynomial, built node by node without expanding.

    ``degree`` must be at least ``expr.degree``. Linear ``images`` and ``weight`` give a homogenization of
    ``expr``; affine ones give that homogenization restricted to an affine hyperplane.
    """
    if degree < expr.degree:
        raise ValueError(f"Degree {degree} is below the expression degree {expr.degree}")
    w = Leaf(weight)

    def pad(result: Expr, used: int) -> Expr:
        return result * w ** (degree - used) if degree > used else result

    if isinstance(expr, Leaf):
        poly = expr.poly
        lifted = SparsePoly(poly.dim + 1, {mono + (degree - sum(mono),): c for mono, c in poly.terms.items()})
        return Leaf(lifted.substitute(list(images) + [weight]))
    if isinstance(expr, Sum):
        total = homogenized_pullback(expr.args[0], degree, images, weight)
        for a in expr.args[1:]:
            total = total + homogenized_pullback(a, degree, images, weight)
        return total
    if isinstance(expr, Product):
        result: Expr = as_expr(1, weight.dim)
        for a in expr.args:
            result = result * homogenized_pullback(a, a.degree, images, weight)
        return pad(result, expr.degree)
    if isinstance(expr, Power):
        base = homogenized_pullback(expr.base, expr.base.degree, images, weight)
        return pad(base**expr.exponent, expr.degree)
    if isinstance(expr, Scaled):
        return homogenized_pullback(expr.arg, degree, images, weight).scale(expr.factor)
    if isinstance(expr, Composed):
        inner_degree = expr.inner.degree
        inner = homogenized_pullback(expr.inner, inner_degree, images, weight)
        top = len(expr._coefficients) - 1
        total = as_expr(0, weight.dim)
        for j, c in enumerate(expr._coefficients):
            if c:
                total = total + inner**j * w ** (inner_degree * (top - j)) * c
        return pad(total, inner_degree * top)
    raise TypeError(f"Unknown expression node {type(expr).__name__}")


def expr_from_json(data: Mapping[str, Any]) -> Expr:
    """Rebuild an expression tree from its JSON form."""
    try:
        op = data["op"]
        if op == "poly":
            return Leaf(SparsePoly.from_json(data["poly"]))
        if op == "sum":
            return Sum(tuple(expr_from_json(a) for a in data["args"]))
        if op == "product":
            return Product(tuple(expr_from_json(a) for a in data["args"]))
        if op == "power":
            return Power(expr_from_json(data["base"]), int(data["exponent"]))
        if op == "scale":
            return Scaled(expr_from_json(data["arg"]), parse_rational(data["factor"]))
        if op == "compose":
            return Composed(SparsePoly.from_json(data["outer"]), expr_from_json(data["inner"]))
    except (KeyError, TypeError, ValueError) as e:
        raise ParseError(f"Malformed expression JSON: {e}") from e
    raise ParseError(f"Unknown expression node {data.get('op')!r}")
