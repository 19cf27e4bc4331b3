"""Closed sets handed to the separation constructions.

A side is a membership oracle plus enough geometry to sample it: a window box (containing the side when it is
bounded, a region of interest otherwise), anchor points near which boundary behaviour matters, and recession
directions for far-field points. All sample points are dyadic rationals, so every sign check downstream is
exact.
"""

import abc
import logging
from fractions import Fraction
from typing import Any, Callable, Iterable, Mapping, Sequence

import numpy as np

from polyrep.errors import ParseError
from polyrep.expr import Expr, as_expr, expr_from_json
from polyrep.geometry import Face, HPolyhedron
from polyrep.interval import Box
from polyrep.linalg import Vector
from polyrep.poly import LinearForm, Point, SparsePoly, parse_rational

logger = logging.getLogger(__name__)

SAMPLE_BITS = 16
ANCHOR_DEPTH = 20
FAR_RADII = (Fraction(1000), Fraction(1_000_000))


def dyadic(value: float, bits: int = SAMPLE_BITS) -> Fraction:
    return Fraction(round(value * (1 << bits)), 1 << bits)


def random_direction(rng: np.random.Generator, dim: int) -> Vector:
    """Dyadic direction with max-norm 1."""
    while True:
        raw = rng.normal(size=dim)
        top = float(np.max(np.abs(raw)))
        if top > 1e-6:
            return tuple(dyadic(v / top) for v in raw)


def random_point(rng: np.random.Generator, box: Box) -> Vector:
    return tuple(s.lo + dyadic(float(rng.random())) * s.width for s in box.sides)


def along(origin: Point, direction: Point, scale: Fraction) -> Vector:
    return tuple(Fraction(o) + scale * Fraction(u) for o, u in zip(origin, direction))


def project_to_hyperplane(point: Point, form: LinearForm) -> Vector:
    """Orthogonal projection onto ``{form = 0}``, exact."""
    norm = form.normal_norm_squared()
    shift = form.evaluate(point) / norm
    return tuple(Fraction(x) - shift * a for x, a in zip(point, form.coeffs))


def overlaps(a: Box, b: Box) -> bool:
    return all(s.lo <= t.hi and t.lo <= s.hi for s, t in zip(a.sides, b.sides))


class Side(abc.ABC):
    """A closed subset of ``R^dim`` given by membership."""

    dim: int
    label: str = "side"
    bounded: bool = False
    window: Box
    anchors: tuple[Vector, ...] = ()
    directions: tuple[Vector, ...] = ()

    @abc.abstractmethod
    def contains(self, point: Point) -> bool: ...

    @property
    def is_empty(self) -> bool:
        return False

    def surface_candidates(self, rng: np.random.Generator, points: Sequence[Vector]) -> list[Vector]:
        """Points on the boundary hypersurfaces of the side, when the side knows them."""
        return []

    def interior_candidates(self, rng: np.random.Generator, count: int) -> list[Vector]:
        """Points the side can produce directly (for example convex combinations of generators)."""
        return []

    def candidates(
        self, rng: np.random.Generator, count: int, far_radii: Sequence[Fraction] = FAR_RADII
    ) -> list[Vector]:
        box = self.window.dilate(Fraction(5, 4), Fraction(1, 8))
        out = list(self.anchors)
        out.extend(self.interior_candidates(rng, count))
        out.extend(random_point(rng, box) for _ in range(count))
        for anchor in self.anchors:
            for j in range(ANCHOR_DEPTH):
                radius = Fraction(1, 1 << j)
                out.append(along(anchor, random_direction(rng, self.dim), radius))
        out.extend(self.surface_candidates(rng, out[: max(count, len(self.anchors))]))
        if not self.bounded:
            center = self.window.center
            directions = list(self.directions) + [random_direction(rng, self.dim) for _ in range(4)]
            for radius in far_radii:
                for u in directions:
                    out.append(along(center, u, radius))
                    wobble = random_direction(rng, self.dim)
                    out.append(along(along(center, u, radius), wobble, Fraction(1)))
        return out

    def sample(
        self,
        count: int,
        rng: np.random.Generator | int = 0,
        far_radii: Sequence[Fraction] = FAR_RADII,
        rounds: int = 4,
    ) -> list[Vector]:
        """Up to ``count`` distinct points of the side plus every contained anchor, deterministic per seed."""
        if self.is_empty:
            return []
        rng = np.random.default_rng(rng) if isinstance(rng, int) else rng
        seen: dict[Vector, None] = {}
        for _ in range(rounds):
            for point in self.candidates(rng, count, far_radii):
                if point not in seen and self.contains(point):
                    seen[point] = None
            if len(seen) >= count:
                break
        if not seen:
            logger.debug("No sample points found for %s", self.label)
        return list(seen)

    def upper_bound(self, poly: Expr) -> Fraction:
        """An upper bound of ``poly`` on a bounded side."""
        return poly.enclose(self.window).hi

    def may_meet(self, box: Box) -> bool:
        """False only when ``box`` certainly misses the side."""
        return not self.bounded or overlaps(self.window, box)

    def restrict(self, *constraints: Expr | SparsePoly, label: str | None = None) -> "Side":
        """``self ∩ {c >= 0 for every constraint}``."""
        return RestrictedSide(self, tuple(as_expr(c, self.dim) for c in constraints), label)

    def __or__(self, other: "Side") -> "Side":
        return UnionSide((self, other))


class BasicClosedSide(Side):
    """``{p_1 >= 0, ..., p_k >= 0}`` inside ``window``.

    ``bounded=True`` asserts that the set lies in the window; the separation constructions rely on it.
    """

    def __init__(
        self,
        polys: Iterable[Expr | SparsePoly],
        window: Box,
        anchors: Iterable[Point] = (),
        bounded: bool = True,
        label: str = "basic-closed",
    ):
        self.window = window
        self.dim = window.dim
        self.polys = tuple(as_expr(p, self.dim) for p in polys)
        self.anchors = tuple(tuple(Fraction(c) for c in a) for a in anchors)
        self.bounded = bounded
        self.label = label

    def contains(self, point: Point) -> bool:
        window_ok = not self.bounded or self.window.contains(point)
        return window_ok and all(p.evaluate(point) >= 0 for p in self.polys)

    def may_meet(self, box: Box) -> bool:
        return super().may_meet(box) and all(p.enclose(box).hi >= 0 for p in self.polys)

    def surface_candidates(self, rng: np.random.Generator, points: Sequence[Vector]) -> list[Vector]:
        out = []
        for p in self.polys:
            if p.degree != 1:
                continue
            form = affine_form(p.expand())
            if form.normal_norm_squared():
                out.extend(project_to_hyperplane(x, form) for x in points[: 4 * len(self.anchors) + 8])
        return out


def affine_form(poly: SparsePoly) -> LinearForm:
    """The linear form of a polynomial of degree at most one."""
    if poly.degree > 1:
        raise ValueError(f"Polynomial of degree {poly.degree} is not affine")
    units = [tuple(int(i == j) for j in range(poly.dim)) for i in range(poly.dim)]
    return LinearForm(tuple(poly.terms.get(u, Fraction(0)) for u in units), poly.constant_term)


class PolyhedralSide(Side):
    """A polyhedron used as a side; sampled through its generators as well as the window."""

    def __init__(self, polyhedron: HPolyhedron, window: Box | None = None, label: str = "polyhedron"):
        self.polyhedron = polyhedron
        self.dim = polyhedron.dim
        self.bounded = polyhedron.is_bounded
        self.window = window if window is not None else _generator_window(polyhedron)
        self.anchors = polyhedron.vertices
        self.directions = polyhedron.rays + polyhedron.lines + tuple(tuple(-c for c in u) for u in polyhedron.lines)
        self.label = label

    @property
    def polys(self) -> tuple[Expr, ...]:
        return tuple(as_expr(f.to_poly(), self.dim) for f in self.polyhedron.forms)

    def contains(self, point: Point) -> bool:
        return self.polyhedron.contains(point)

    def upper_bound(self, poly: Expr) -> Fraction:
        if self.bounded and poly.degree <= 1:
            return max(poly.evaluate(v) for v in self.polyhedron.vertices)
        return super().upper_bound(poly)

    def may_meet(self, box: Box) -> bool:
        return super().may_meet(box) and self.polyhedron.may_meet(box)

    def interior_candidates(self, rng: np.random.Generator, count: int) -> list[Vector]:
        g = self.polyhedron.generators
        if not g.vertices:
            return []
        out = []
        for _ in range(count):
            weights = [dyadic(float(w)) for w in rng.dirichlet(np.ones(len(g.vertices)))]
            total = sum(weights, Fraction(0)) or Fraction(1)
            point = [Fraction(0)] * self.dim
            for w, v in zip(weights, g.vertices):
                for i in range(self.dim):
                    point[i] += w / total * v[i]
            scale = Fraction(1 << int(rng.integers(0, 4)))
            for r in g.rays:
                coef = dyadic(float(rng.random())) * scale
                point = [x + coef * c for x, c in zip(point, r)]
            for line in g.lines:
                coef = dyadic(float(rng.normal())) * scale
                point = [x + coef * c for x, c in zip(point, line)]
            out.append(tuple(point))
        return out

    def surface_candidates(self, rng: np.random.Generator, points: Sequence[Vector]) -> list[Vector]:
        return [project_to_hyperplane(x, f) for f in self.polyhedron.forms for x in points[: 4 * len(self.anchors) + 8]]


def _generator_window(polyhedron: HPolyhedron) -> Box:
    points = list(polyhedron.vertices) or [(Fraction(0),) * polyhedron.dim]
    lower = [min(p[i] for p in points) for i in range(polyhedron.dim)]
    upper = [max(p[i] for p in points) for i in range(polyhedron.dim)]
    box = Box.from_bounds(lower, upper)
    if polyhedron.is_bounded:
        return box
    return box.dilate(Fraction(1), Fraction(2))


class ComplementInteriorSide(Side):
    """``R^d minus {l_1 > 0, ..., l_r > 0}``, i.e. some form is ``<= 0``."""

    def __init__(self, forms: Sequence[LinearForm], window: Box, anchors: Iterable[Point] = (), label: str = "outside"):
        self.forms = tuple(forms)
        self.dim = window.dim
        self.window = window
        self.anchors = tuple(tuple(Fraction(c) for c in a) for a in anchors)
        self.directions = tuple(tuple(-c for c in f.coeffs) for f in self.forms)
        self.label = label

    def contains(self, point: Point) -> bool:
        return any(f.evaluate(point) <= 0 for f in self.forms)

    def may_meet(self, box: Box) -> bool:
        return any(f.evaluate(c) <= 0 for f in self.forms for c in box.corners())

    def surface_candidates(self, rng: np.random.Generator, points: Sequence[Vector]) -> list[Vector]:
        return [project_to_hyperplane(x, f) for f in self.forms for x in points[: 4 * len(self.anchors) + 8]]


class OracleSide(Side):
    """A closed set known only through a membership predicate."""

    def __init__(
        self,
        predicate: Callable[[Point], bool],
        window: Box,
        bounded: bool,
        anchors: Iterable[Point] = (),
        directions: Iterable[Point] = (),
        label: str = "oracle",
        surfaces: Sequence[LinearForm] = (),
        meets: Callable[[Box], bool] | None = None,
    ):
        self.predicate = predicate
        self.meets = meets
        self.window = window
        self.dim = window.dim
        self.bounded = bounded
        self.anchors = tuple(tuple(Fraction(c) for c in a) for a in anchors)
        self.directions = tuple(tuple(Fraction(c) for c in u) for u in directions)
        self.label = label
        self.surfaces = tuple(surfaces)

    def contains(self, point: Point) -> bool:
        if self.bounded and not self.window.contains(point):
            return False
        return self.predicate(point)

    def may_meet(self, box: Box) -> bool:
        return super().may_meet(box) and (self.meets is None or self.meets(box))

    def surface_candidates(self, rng: np.random.Generator, points: Sequence[Vector]) -> list[Vector]:
        return [project_to_hyperplane(x, f) for f in self.surfaces for x in points[: 4 * len(self.anchors) + 8]]


class RestrictedSide(Side):
    """A side intersected with finitely many polynomial inequalities."""

    def __init__(self, base: Side, constraints: tuple[Expr, ...], label: str | None = None):
        self.base = base
        self.constraints = constraints
        self.dim = base.dim
        self.window = base.window
        self.bounded = base.bounded
        self.anchors = base.anchors
        self.directions = base.directions
        self.label = label or f"{base.label}|restricted"

    @property
    def polys(self) -> tuple[Expr, ...]:
        base = getattr(self.base, "polys", None)
        if base is None:
            raise AttributeError(f"{self.base.label} is not a basic closed side")
        return tuple(base) + self.constraints

    def contains(self, point: Point) -> bool:
        return self.base.contains(point) and all(c.evaluate(point) >= 0 for c in self.constraints)

    def upper_bound(self, poly: Expr) -> Fraction:
        return self.base.upper_bound(poly)

    def may_meet(self, box: Box) -> bool:
        return self.base.may_meet(box) and all(c.enclose(box).hi >= 0 for c in self.constraints)

    def candidates(
        self, rng: np.random.Generator, count: int, far_radii: Sequence[Fraction] = FAR_RADII
    ) -> list[Vector]:
        return self.base.candidates(rng, count, far_radii)


class UnionSide(Side):
    def __init__(self, parts: Iterable[Side], label: str | None = None):
        self.parts = tuple(p for p in parts if not p.is_empty)
        if not self.parts:
            raise ValueError("A union side needs at least one nonempty part")
        self.dim = self.parts[0].dim
        self.bounded = all(p.bounded for p in self.parts)
        lower = [min(p.window.sides[i].lo for p in self.parts) for i in range(self.dim)]
        upper = [max(p.window.sides[i].hi for p in self.parts) for i in range(self.dim)]
        self.window = Box.from_bounds(lower, upper)
        self.anchors = tuple(a for p in self.parts for a in p.anchors)
        self.directions = tuple(u for p in self.parts for u in p.directions)
        self.label = label or " | ".join(p.label for p in self.parts)

    def contains(self, point: Point) -> bool:
        return any(p.contains(point) for p in self.parts)

    def may_meet(self, box: Box) -> bool:
        return any(p.may_meet(box) for p in self.parts)

    def candidates(
        self, rng: np.random.Generator, count: int, far_radii: Sequence[Fraction] = FAR_RADII
    ) -> list[Vector]:
        share = max(1, count // len(self.parts))
        return [x for p in self.parts for x in p.candidates(rng, share, far_radii)]


class EmptySide(Side):
    def __init__(self, dim: int, label: str = "empty"):
        self.dim = dim
        self.window = Box.cube(dim, Fraction(1)) if dim else Box(())
        self.bounded = True
        self.label = label

    @property
    def is_empty(self) -> bool:
        return True

    def contains(self, point: Point) -> bool:
        return False

    def may_meet(self, box: Box) -> bool:
        return False


def union(parts: Iterable[Side], dim: int) -> Side:
    """Union of sides, collapsing empty parts."""
    parts = [p for p in parts if not p.is_empty]
    if not parts:
        return EmptySide(dim)
    return parts[0] if len(parts) == 1 else UnionSide(parts)


def face_points(polyhedron: HPolyhedron, face: Face, rng: np.random.Generator, count: int) -> list[Vector]:
    """The face witness plus ``count`` random points of its relative interior (not checked)."""
    vertices = [polyhedron.vertices[i] for i in sorted(face.vertices)]
    rays = [polyhedron.rays[i] for i in sorted(face.rays)]
    points = [face.witness]
    for _ in range(count):
        weights = [dyadic(float(w)) + Fraction(1, 1 << SAMPLE_BITS) for w in rng.dirichlet(np.ones(len(vertices)))]
        total = sum(weights, Fraction(0))
        point = [sum((w / total * v[c] for w, v in zip(weights, vertices)), Fraction(0)) for c in range(polyhedron.dim)]
        for ray in rays:
            coef = dyadic(float(rng.random())) + Fraction(1, 1 << SAMPLE_BITS)
            point = [x + coef * u for x, u in zip(point, ray)]
        for line in polyhedron.lines:
            coef = dyadic(float(rng.normal()))
            point = [x + coef * u for x, u in zip(point, line)]
        points.append(tuple(point))
    return points


# JSON side descriptions


def box_from_json(data: Any, allow_decimal: bool = False) -> Box:
    try:
        return Box.from_bounds(
            [parse_rational(lo, allow_decimal) for lo, _ in data],
            [parse_rational(hi, allow_decimal) for _, hi in data],
        )
    except (TypeError, ValueError) as e:
        raise ParseError(f"Malformed window: {e}") from e


def _poly_from_json(data: Mapping[str, Any], allow_decimal: bool) -> Expr:
    if "op" in data:
        return expr_from_json(data)
    return as_expr(SparsePoly.from_json(data, allow_decimal), int(data["dim"]))


def side_from_json(data: Mapping[str, Any], allow_decimal: bool = False, label: str | None = None) -> Side:
    """Build a side from ``{"kind": "polyhedron" | "basic-closed" | "complement", ...}``.

    ``polyhedron`` takes ``dim`` and ``ineqs`` like an H-representation; ``basic-closed`` takes ``polys``, a
    ``window`` and ``bounded`` (default true); ``complement`` takes ``forms`` and a ``window`` and means the
    closure of the complement of ``{forms > 0}``.

    Raises:
        ParseError: If the description is malformed.
    """
    kind = data.get("kind", "polyhedron")
    window = box_from_json(data["window"], allow_decimal) if "window" in data else None
    try:
        if kind == "polyhedron":
            return PolyhedralSide(HPolyhedron.from_json(data, allow_decimal), window, label or "polyhedron")
        if kind == "basic-closed":
            if window is None:
                raise ParseError("A basic closed side needs a window")
            polys = [_poly_from_json(p, allow_decimal) for p in data["polys"]]
            anchors = [[parse_rational(c, allow_decimal) for c in a] for a in data.get("anchors", [])]
            return BasicClosedSide(polys, window, anchors, bool(data.get("bounded", True)), label or "basic-closed")
        if kind == "complement":
            if window is None:
                raise ParseError("A complement side needs a window")
            forms = [LinearForm.from_json(f, allow_decimal) for f in data["forms"]]
            return ComplementInteriorSide(forms, window, label=label or "complement")
    except (KeyError, TypeError) as e:
        raise ParseError(f"Malformed side description: {e}") from e
    raise ParseError(f"Unknown side kind {kind!r}")
