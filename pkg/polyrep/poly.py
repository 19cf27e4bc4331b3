"""Exact sparse multivariate polynomials over the rationals.

`SparsePoly` is the value type every construction in the package produces or consumes. Coefficients are
`fractions.Fraction`; evaluation at rational points is exact and runs on integers internally. Float evaluation
exists for plotting and sampling heuristics only and carries no accuracy guarantee.
"""

import logging
import math
import re
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Any, Mapping, Sequence, TypeVar

import numpy as np

from polyrep.errors import ParseError, PreconditionError

logger = logging.getLogger(__name__)

Monomial = tuple[int, ...]
Point = Sequence[Fraction]
Scalar = int | Fraction

_RATIONAL_RE = re.compile(r"^\s*([+-]?\d+)\s*(?:/\s*(\d+))?\s*$")
_DECIMAL_RE = re.compile(r"^\s*[+-]?(\d+\.?\d*|\.\d+)([eE][+-]?\d+)?\s*$")

T = TypeVar("T")


def parse_rational(value: Any, allow_decimal: bool = False) -> Fraction:
    """Parse an exact rational from a JSON or text token.

    Accepts integers and ``"num/den"`` strings. Decimal notation such as ``"0.25"`` is rejected unless
    ``allow_decimal`` is set, in which case it is converted exactly (``0.25 -> 1/4``).

    Raises:
        ParseError: If the token is not an exact rational under the active rules.
    """
    if isinstance(value, bool):
        raise ParseError(f"Expected a rational number, got boolean {value!r}")
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, float):
        if not allow_decimal:
            raise ParseError(f"Float {value!r} is not exact; pass it as 'num/den' or enable --allow-decimal")
        return Fraction(repr(value))
    if not isinstance(value, str):
        raise ParseError(f"Expected a rational number, got {type(value).__name__}")
    match = _RATIONAL_RE.match(value)
    if match:
        num, den = match.groups()
        if den is not None and int(den) == 0:
            raise ParseError(f"Zero denominator in {value!r}")
        return Fraction(int(num), int(den) if den is not None else 1)
    if _DECIMAL_RE.match(value):
        if not allow_decimal:
            raise ParseError(f"Decimal {value!r} rejected; use 'num/den' or enable --allow-decimal")
        return Fraction(value.strip())
    raise ParseError(f"Cannot parse {value!r} as a rational number")


def format_rational(value: Fraction) -> str:
    """Canonical ``num/den`` rendering used in every JSON document."""
    return f"{value.numerator}/{value.denominator}"


def variable_names(dim: int) -> list[str]:
    if dim <= 4:
        return ["x", "y", "z", "w"][:dim]
    return [f"x{i + 1}" for i in range(dim)]


class SparsePoly:
    """Polynomial in ``dim`` variables with exact rational coefficients.

    Only nonzero coefficients are stored, so two polynomials are equal exactly when their term maps are.
    Instances are treated as immutable values.

    Args:
        dim: Number of variables.
        terms: Mapping from exponent tuples to coefficients.
    """

    def __init__(self, dim: int, terms: Mapping[Monomial, Scalar] | None = None):
        if dim < 0:
            raise ValueError(f"Polynomial dimension must be non-negative, got {dim}")
        self.dim = dim
        clean: dict[Monomial, Fraction] = {}
        for mono, coeff in (terms or {}).items():
            if len(mono) != dim:
                raise ValueError(f"Monomial {mono} does not match dimension {dim}")
            if any(e < 0 for e in mono):
                raise ValueError(f"Negative exponent in monomial {mono}")
            c = Fraction(coeff)
            if c:
                clean[tuple(mono)] = c
        self.terms = clean

    # Constructors

    @classmethod
    def zero(cls, dim: int) -> "SparsePoly":
        return cls(dim)

    @classmethod
    def constant(cls, dim: int, value: Scalar) -> "SparsePoly":
        return cls(dim, {(0,) * dim: value})

    @classmethod
    def variable(cls, dim: int, index: int) -> "SparsePoly":
        if not 0 <= index < dim:
            raise ValueError(f"Variable index {index} out of range for dimension {dim}")
        mono = tuple(1 if i == index else 0 for i in range(dim))
        return cls(dim, {mono: 1})

    @classmethod
    def univariate(cls, coefficients: Sequence[Scalar]) -> "SparsePoly":
        """Build a polynomial in one variable from ascending coefficients."""
        return cls(1, {(i,): c for i, c in enumerate(coefficients)})

    @classmethod
    def squared_distance(cls, center: Point) -> "SparsePoly":
        """Return ``||X - center||^2``."""
        dim = len(center)
        result = cls.zero(dim)
        for i, c in enumerate(center):
            diff = cls.variable(dim, i) - Fraction(c)
            result = result + diff * diff
        return result

    # Structure

    @property
    def degree(self) -> int:
        """Total degree; the zero polynomial has degree -1."""
        if not self.terms:
            return -1
        return max(sum(m) for m in self.terms)

    @property
    def is_zero(self) -> bool:
        return not self.terms

    @property
    def is_constant(self) -> bool:
        return all(sum(m) == 0 for m in self.terms)

    @property
    def constant_term(self) -> Fraction:
        return self.terms.get((0,) * self.dim, Fraction(0))

    def homogeneous_part(self, degree: int) -> "SparsePoly":
        return SparsePoly(self.dim, {m: c for m, c in self.terms.items() if sum(m) == degree})

    def coefficients(self) -> list[Fraction]:
        """Ascending coefficient list of a univariate polynomial."""
        if self.dim != 1:
            raise ValueError("coefficients() is only defined for univariate polynomials")
        if not self.terms:
            return []
        coeffs = [Fraction(0)] * (self.degree + 1)
        for (e,), c in self.terms.items():
            coeffs[e] = c
        return coeffs

    # Arithmetic

    def _coerce(self, other: Any) -> "SparsePoly":
        if isinstance(other, SparsePoly):
            if other.dim != self.dim:
                raise ValueError(f"Dimension mismatch: {self.dim} vs {other.dim}")
            return other
        if isinstance(other, (int, Fraction)):
            return SparsePoly.constant(self.dim, other)
        return NotImplemented

    def __add__(self, other: Any) -> "SparsePoly":
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        terms = dict(self.terms)
        for m, c in other.terms.items():
            terms[m] = terms.get(m, Fraction(0)) + c
        return SparsePoly(self.dim, terms)

    __radd__ = __add__

    def __neg__(self) -> "SparsePoly":
        return SparsePoly(self.dim, {m: -c for m, c in self.terms.items()})

    def __sub__(self, other: Any) -> "SparsePoly":
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other: Any) -> "SparsePoly":
        return (-self) + other

    def __mul__(self, other: Any) -> "SparsePoly":
        if isinstance(other, (int, Fraction)):
            return self.scale(other)
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        terms: dict[Monomial, Fraction] = {}
        for m1, c1 in self.terms.items():
            for m2, c2 in other.terms.items():
                m = tuple(a + b for a, b in zip(m1, m2))
                terms[m] = terms.get(m, Fraction(0)) + c1 * c2
        return SparsePoly(self.dim, terms)

    __rmul__ = __mul__

    def __pow__(self, exponent: int) -> "SparsePoly":
        if not isinstance(exponent, int) or exponent < 0:
            raise ValueError(f"Exponent must be a non-negative integer, got {exponent!r}")
        result = SparsePoly.constant(self.dim, 1)
        base = self
        while exponent:
            if exponent & 1:
                result = result * base
            exponent >>= 1
            if exponent:
                base = base * base
        return result

    def scale(self, factor: Scalar) -> "SparsePoly":
        factor = Fraction(factor)
        return SparsePoly(self.dim, {m: c * factor for m, c in self.terms.items()})

    def __eq__(self, other: object) -> bool:
        if isinstance(other, (int, Fraction)):
            return self == SparsePoly.constant(self.dim, other)
        if not isinstance(other, SparsePoly):
            return NotImplemented
        return self.dim == other.dim and self.terms == other.terms

    def __hash__(self) -> int:
        return hash((self.dim, frozenset(self.terms.items())))

    # Evaluation

    @cached_property
    def _integer_form(self) -> tuple[int, list[tuple[Monomial, int, int]]]:
        """Common coefficient denominator and integer coefficients, with each monomial's degree."""
        den = 1
        for c in self.terms.values():
            den = math.lcm(den, c.denominator)
        rows = [(m, c.numerator * (den // c.denominator), sum(m)) for m, c in self.terms.items()]
        return den, rows

    def evaluate(self, point: Point) -> Fraction:
        """Exact value at a rational point."""
        if len(point) != self.dim:
            raise ValueError(f"Point of length {len(point)} does not match dimension {self.dim}")
        if not self.terms:
            return Fraction(0)
        xs = [Fraction(v) for v in point]
        common = 1
        for x in xs:
            common = math.lcm(common, x.denominator)
        nums = [x.numerator * (common // x.denominator) for x in xs]
        coeff_den, rows = self._integer_form
        top = self.degree
        max_exp = [0] * self.dim
        for m in self.terms:
            for i, e in enumerate(m):
                if e > max_exp[i]:
                    max_exp[i] = e
        powers = []
        for i, n in enumerate(nums):
            table = [1]
            for _ in range(max_exp[i]):
                table.append(table[-1] * n)
            powers.append(table)
        den_powers = [1]
        for _ in range(top):
            den_powers.append(den_powers[-1] * common)
        total = 0
        for mono, coeff, deg in rows:
            value = coeff * den_powers[top - deg]
            for i, e in enumerate(mono):
                if e:
                    value *= powers[i][e]
            total += value
        return Fraction(total, coeff_den * den_powers[top])

    __call__ = evaluate

    @cached_property
    def _float_arrays(self) -> tuple[np.ndarray, np.ndarray]:
        if not self.terms:
            return np.zeros((0, self.dim), dtype=np.int64), np.zeros(0)
        monos = sorted(self.terms)
        exps = np.array(monos, dtype=np.int64).reshape(len(monos), self.dim)
        coeffs = np.array([float(self.terms[m]) for m in monos])
        return exps, coeffs

    def evaluate_float(self, points: np.ndarray) -> np.ndarray:
        """Float values at an ``(n, dim)`` array of points; no accuracy guarantee."""
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        if pts.shape[1] != self.dim:
            raise ValueError(f"Points of width {pts.shape[1]} do not match dimension {self.dim}")
        exps, coeffs = self._float_arrays
        if not len(coeffs):
            return np.zeros(pts.shape[0])
        with np.errstate(over="ignore", invalid="ignore"):
            monomials = np.prod(pts[:, None, :] ** exps[None, :, :], axis=2)
            return monomials @ coeffs

    # Transformations

    def derivative(self, index: int) -> "SparsePoly":
        terms: dict[Monomial, Fraction] = {}
        for m, c in self.terms.items():
            if m[index]:
                reduced = m[:index] + (m[index] - 1,) + m[index + 1 :]
                terms[reduced] = c * m[index]
        return SparsePoly(self.dim, terms)

    def substitute(self, images: Sequence["SparsePoly"]) -> "SparsePoly":
        """Replace variable ``i`` by ``images[i]``; all images share one target dimension."""
        if len(images) != self.dim:
            raise ValueError(f"Need {self.dim} images, got {len(images)}")
        target = images[0].dim if images else 0
        cache: dict[tuple[int, int], SparsePoly] = {}

        def power(i: int, e: int) -> SparsePoly:
            key = (i, e)
            if key not in cache:
                cache[key] = images[i] ** e
            return cache[key]

        result = SparsePoly.zero(target)
        for mono, c in self.terms.items():
            term = SparsePoly.constant(target, c)
            for i, e in enumerate(mono):
                if e:
                    term = term * power(i, e)
            result = result + term
        return result

    def shift(self, center: Point) -> "SparsePoly":
        """Return ``p(center + X)``."""
        return self.substitute([SparsePoly.variable(self.dim, i) + Fraction(c) for i, c in enumerate(center)])

    def restrict_to_line(self, origin: Point, direction: Point) -> "SparsePoly":
        """Univariate ``t -> p(origin + t * direction)``."""
        images = [SparsePoly.univariate([Fraction(o), Fraction(v)]) for o, v in zip(origin, direction)]
        if self.dim == 0:
            return SparsePoly.constant(1, self.constant_term)
        return self.substitute(images)

    # Serialization

    def to_json(self) -> dict:
        return {
            "dim": self.dim,
            "terms": [
                {"exps": list(m), "coeff": format_rational(self.terms[m])} for m in sorted(self.terms, reverse=True)
            ],
        }

    @classmethod
    def from_json(cls, data: Mapping[str, Any], allow_decimal: bool = False) -> "SparsePoly":
        try:
            dim = int(data["dim"])
            terms: dict[Monomial, Fraction] = {}
            for term in data["terms"]:
                mono = tuple(int(e) for e in term["exps"])
                terms[mono] = terms.get(mono, Fraction(0)) + parse_rational(term["coeff"], allow_decimal)
        except (KeyError, TypeError) as e:
            raise ParseError(f"Malformed polynomial JSON: {e}") from e
        try:
            return cls(dim, terms)
        except ValueError as e:
            raise ParseError(str(e)) from e

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        names = variable_names(self.dim)
        parts = []
        for mono in sorted(self.terms, key=lambda m: (-sum(m), tuple(-e for e in m))):
            c = self.terms[mono]
            factors = [n if e == 1 else f"{n}^{e}" for n, e in zip(names, mono) if e]
            if not factors:
                body = str(abs(c))
            elif abs(c) == 1:
                body = "*".join(factors)
            else:
                body = f"{abs(c)}*" + "*".join(factors)
            sign = "-" if c < 0 else "+"
            parts.append((sign, body))
        first_sign, first_body = parts[0]
        text = ("-" if first_sign == "-" else "") + first_body
        for sign, body in parts[1:]:
            text += f" {sign} {body}"
        return text

    def __repr__(self) -> str:
        return f"SparsePoly(dim={self.dim}, {self})"


@dataclass(frozen=True)
class LinearForm:
    """Affine function ``coeffs . x + const``; as an inequality it means ``>= 0``."""

    coeffs: tuple[Fraction, ...]
    const: Fraction = Fraction(0)

    def __post_init__(self) -> None:
        object.__setattr__(self, "coeffs", tuple(Fraction(c) for c in self.coeffs))
        object.__setattr__(self, "const", Fraction(self.const))

    @property
    def dim(self) -> int:
        return len(self.coeffs)

    def evaluate(self, point: Point) -> Fraction:
        if len(point) != self.dim:
            raise ValueError(f"Point of length {len(point)} does not match dimension {self.dim}")
        return sum((a * Fraction(x) for a, x in zip(self.coeffs, point)), self.const)

    __call__ = evaluate

    def direction_value(self, vector: Point) -> Fraction:
        """Linear part applied to a direction."""
        return sum((a * Fraction(x) for a, x in zip(self.coeffs, vector)), Fraction(0))

    def to_poly(self) -> SparsePoly:
        terms: dict[Monomial, Fraction] = {(0,) * self.dim: self.const}
        for i, a in enumerate(self.coeffs):
            terms[tuple(1 if j == i else 0 for j in range(self.dim))] = a
        return SparsePoly(self.dim, terms)

    def normal_norm_squared(self) -> Fraction:
        return sum((a * a for a in self.coeffs), Fraction(0))

    def is_constant(self) -> bool:
        return not any(self.coeffs)

    def primitive(self) -> "LinearForm":
        """Positive multiple with coprime integer coefficients."""
        values = list(self.coeffs) + [self.const]
        den = 1
        for v in values:
            den = math.lcm(den, v.denominator)
        ints = [int(v * den) for v in values]
        g = 0
        for v in ints:
            g = math.gcd(g, v)
        if g == 0:
            return self
        return LinearForm(tuple(Fraction(v, g) for v in ints[:-1]), Fraction(ints[-1], g))

    def scale(self, factor: Scalar) -> "LinearForm":
        factor = Fraction(factor)
        return LinearForm(tuple(a * factor for a in self.coeffs), self.const * factor)

    def __add__(self, other: "LinearForm") -> "LinearForm":
        if self.dim != other.dim:
            raise ValueError(f"Dimension mismatch: {self.dim} vs {other.dim}")
        return LinearForm(tuple(a + b for a, b in zip(self.coeffs, other.coeffs)), self.const + other.const)

    def __neg__(self) -> "LinearForm":
        return self.scale(-1)

    def homogenize(self) -> "LinearForm":
        """Form on ``R^(d+1)`` vanishing at the origin: ``a . x + c * x_(d+1)``."""
        return LinearForm(self.coeffs + (self.const,), Fraction(0))

    def to_json(self) -> dict:
        return {"coeffs": [format_rational(a) for a in self.coeffs], "const": format_rational(self.const)}

    @classmethod
    def from_json(cls, data: Mapping[str, Any], allow_decimal: bool = False) -> "LinearForm":
        try:
            coeffs = tuple(parse_rational(a, allow_decimal) for a in data["coeffs"])
            const = parse_rational(data.get("const", 0), allow_decimal)
        except (KeyError, TypeError) as e:
            raise ParseError(f"Malformed inequality JSON: {e}") from e
        return cls(coeffs, const)

    def __str__(self) -> str:
        return str(self.to_poly())


def elementary_symmetric_all(qs: Sequence[T], upto: int | None = None) -> list[T]:
    """Return ``[sigma_1, ..., sigma_upto]`` of ``qs``.

    Works for anything closed under ``+`` and ``*`` (polynomials, expression trees, rationals). The values are
    the t-coefficients of ``prod_j (t + q_j)``, maintained incrementally and truncated at ``upto``, so no
    ``C(k, i)`` enumeration takes place.
    """
    k = len(qs)
    upto = k if upto is None else upto
    if not 0 <= upto <= k:
        raise ValueError(f"Symmetric function index {upto} out of range 0..{k}")
    sigma: list[T | None] = [None] * (upto + 1)
    for count, q in enumerate(qs, start=1):
        for j in range(min(count, upto), 0, -1):
            lower = q if j == 1 else (None if sigma[j - 1] is None else sigma[j - 1] * q)
            if lower is None:
                continue
            sigma[j] = lower if sigma[j] is None else sigma[j] + lower
    return [s for s in sigma[1:]]  # type: ignore[misc]


def elementary_symmetric(qs: Sequence[T], i: int) -> T:
    """The ``i``-th elementary symmetric function of ``qs``, ``1 <= i <= len(qs)``."""
    if not 1 <= i <= len(qs):
        raise ValueError(f"Symmetric function index {i} out of range 1..{len(qs)}")
    return elementary_symmetric_all(qs, i)[i - 1]


def compose_univariate(outer: SparsePoly, inner: SparsePoly) -> SparsePoly:
    """Exact ``outer(inner(X))`` by Horner's scheme."""
    if outer.dim != 1:
        raise ValueError(f"Outer polynomial must be univariate, got dimension {outer.dim}")
    coeffs = outer.coefficients()
    result = SparsePoly.zero(inner.dim)
    for c in reversed(coeffs):
        result = result * inner + c
    return result


def cone_extend(
    p: SparsePoly,
    form: LinearForm,
    center: Point,
    eps: Scalar,
    degree: int | None = None,
    rng: np.random.Generator | None = None,
    rays: int = 8,
) -> SparsePoly:
    """Homogenize ``p`` about ``center`` through the section ``{form = eps}``.

    Returns ``q(x) = form(x)^D * p(center + eps * (x - center) / form(x))`` with denominators cleared, which is
    homogeneous of degree ``D`` in ``x - center`` and agrees with ``eps^D * p`` on the section. ``degree``
    may raise ``D`` above ``deg p``.

    Raises:
        PreconditionError: If ``form(center) != 0``, ``eps <= 0`` or the ray sign check fails.
    """
    eps = Fraction(eps)
    center = tuple(Fraction(c) for c in center)
    if p.dim != form.dim or len(center) != p.dim:
        raise ValueError("Polynomial, form and center must share one dimension")
    if form.evaluate(center) != 0:
        raise PreconditionError("The section form must vanish at the center", witness=center)
    if eps <= 0:
        raise PreconditionError(f"Section level must be positive, got {eps}")
    top = max(p.degree, 0) if degree is None else degree
    if top < p.degree:
        raise ValueError(f"Requested degree {top} is below deg p = {p.degree}")

    shifted = p.shift(center)
    back = [SparsePoly.variable(p.dim, i) - c for i, c in enumerate(center)]
    linear = form.to_poly()
    result = SparsePoly.zero(p.dim)
    for j in range(max(shifted.degree, 0) + 1):
        part = shifted.homogeneous_part(j)
        if part.is_zero:
            continue
        result = result + part.substitute(back) * (linear ** (top - j)) * (eps**j)

    _check_ray_signs(p, result, form, center, eps, top, rng if rng is not None else np.random.default_rng(0), rays)
    return result


def _check_ray_signs(
    p: SparsePoly,
    q: SparsePoly,
    form: LinearForm,
    center: tuple[Fraction, ...],
    eps: Fraction,
    degree: int,
    rng: np.random.Generator,
    rays: int,
) -> None:
    dim = p.dim
    for _ in range(rays):
        direction = [Fraction(int(rng.integers(-8, 9)), 4) for _ in range(dim)]
        level = form.direction_value(direction)
        if level <= 0:
            continue
        on_section = [c + eps * u / level for c, u in zip(center, direction)]
        lam = Fraction(int(rng.integers(1, 17)), int(rng.integers(1, 17)))
        along = [c + lam * (v - c) for c, v in zip(center, on_section)]
        expected = (lam * eps) ** degree * p.evaluate(on_section)
        if q.evaluate(along) != expected:
            raise PreconditionError("Homogenized polynomial disagrees with p along a ray", witness=on_section)
