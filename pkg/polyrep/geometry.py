"""Polyhedron combinatorics over the rationals.

Everything here is exact: vertices and rays come from active-set enumeration with sympy rank checks, and
every predicate (containment, face membership, cover certificates) is decided in `Fraction` arithmetic.
"""

import itertools
import json
import logging
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from pathlib import Path
from typing import Any, Iterable, Mapping, Sequence

from polyrep import linalg
from polyrep.errors import BudgetExhausted, ParseError, PreconditionError
from polyrep.interval import Box
from polyrep.linalg import Vector
from polyrep.poly import LinearForm, Point, SparsePoly, format_rational, parse_rational

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Generators:
    """Vertices, extreme rays and a lineality basis of ``{forms >= 0, equalities = 0}``.

    Vertices live in the orthogonal complement of the lineality space, so every nonempty face owns at least
    one of them.
    """

    vertices: tuple[Vector, ...]
    rays: tuple[Vector, ...]
    lines: tuple[Vector, ...]

    @property
    def is_empty(self) -> bool:
        return not self.vertices

    def span_rank(self, dim: int, vertices: Iterable[int] | None = None, rays: Iterable[int] | None = None) -> int:
        """Dimension of the affine hull of the chosen generators (all by default)."""
        vs = [self.vertices[i] for i in (range(len(self.vertices)) if vertices is None else vertices)]
        rs = [self.rays[i] for i in (range(len(self.rays)) if rays is None else rays)]
        if not vs:
            return -1
        base = vs[0]
        rows = [tuple(a - b for a, b in zip(v, base)) for v in vs[1:]] + rs + list(self.lines)
        return linalg.rank(rows, dim)


def enumerate_generators(
    dim: int, forms: Sequence[LinearForm], equalities: Sequence[LinearForm] = ()
) -> Generators:
    """Exhaustive active-set enumeration of the generators of a polyhedron."""
    normals = [f.coeffs for f in forms] + [e.coeffs for e in equalities]
    lines = tuple(linalg.primitive_vector(v) for v in linalg.nullspace(normals, dim)) if normals else tuple(
        tuple(Fraction(int(i == j)) for j in range(dim)) for i in range(dim)
    )

    eq_rows = [e.coeffs for e in equalities] + list(lines)
    eq_rhs = [-e.const for e in equalities] + [Fraction(0)] * len(lines)
    keep = linalg.independent_rows(eq_rows, dim)
    eq_rows = [eq_rows[i] for i in keep]
    eq_rhs = [eq_rhs[i] for i in keep]
    need = dim - len(eq_rows)

    def feasible(point: Vector) -> bool:
        return all(f.evaluate(point) >= 0 for f in forms) and all(e.evaluate(point) == 0 for e in equalities)

    vertices: dict[Vector, None] = {}
    for subset in itertools.combinations(range(len(forms)), need):
        rows = eq_rows + [forms[j].coeffs for j in subset]
        rhs = eq_rhs + [-forms[j].const for j in subset]
        point = linalg.solve(rows, rhs)
        if point is not None and feasible(point):
            vertices.setdefault(point)

    rays: dict[Vector, None] = {}
    if vertices and need >= 1:
        for subset in itertools.combinations(range(len(forms)), need - 1):
            rows = eq_rows + [forms[j].coeffs for j in subset]
            if linalg.rank(rows, dim) != dim - 1:
                continue
            (direction,) = linalg.nullspace(rows, dim)
            values = [f.direction_value(direction) for f in forms]
            if any(v < 0 for v in values) and any(v > 0 for v in values):
                continue
            if all(v <= 0 for v in values):
                direction = tuple(-v for v in direction)
            rays.setdefault(linalg.primitive_vector(direction))

    return Generators(tuple(vertices), tuple(rays), lines)


@dataclass(frozen=True)
class Face:
    """A nonempty face, identified by the generators it contains.

    ``active`` lists the stored inequalities that vanish on the whole face; ``witness`` is a rational point of
    the relative interior where exactly those vanish.
    """

    index: int
    dim: int
    active: frozenset[int]
    vertices: frozenset[int]
    rays: frozenset[int]
    witness: Vector
    hull_forms: tuple[LinearForm, ...]

    def to_json(self) -> dict:
        return {
            "dim": self.dim,
            "active": sorted(self.active),
            "vertices": sorted(self.vertices),
            "rays": sorted(self.rays),
            "witness": [format_rational(v) for v in self.witness],
        }


@dataclass(frozen=True)
class LinealitySplit:
    """``S = S_0 x R^k``: ``S_0`` lives in the coordinates ``y = B x``."""

    ambient_dim: int
    base: "HPolyhedron"
    projection: tuple[Vector, ...]
    lineality: tuple[Vector, ...]

    @property
    def k(self) -> int:
        return len(self.lineality)

    def pullback(self, poly: SparsePoly) -> SparsePoly:
        """Express a polynomial in ``y`` as one in the ambient coordinates."""
        if not self.projection:
            return SparsePoly.constant(self.ambient_dim, poly.constant_term)
        return poly.substitute([LinearForm(row, 0).to_poly() for row in self.projection])


class HPolyhedron:
    """``{x in R^d : l_i(x) >= 0}`` for finitely many affine forms.

    Forms are made primitive and deduplicated, constant forms are dropped, and (for full-dimensional input)
    redundant forms are removed, so the stored forms are exactly the facet forms.

    Raises:
        PreconditionError: If the inequalities are infeasible.
    """

    def __init__(self, dim: int, forms: Iterable[LinearForm]):
        self.dim = dim
        cleaned: dict[LinearForm, None] = {}
        for form in forms:
            if form.dim != dim:
                raise ValueError(f"Inequality of dimension {form.dim} in a polyhedron of dimension {dim}")
            if form.is_constant():
                if form.const < 0:
                    raise PreconditionError(f"Infeasible constant inequality {form.const} >= 0")
                continue
            cleaned.setdefault(form.primitive())
        candidates = tuple(cleaned)
        self.generators = enumerate_generators(dim, candidates)
        if self.generators.is_empty:
            raise PreconditionError("The inequalities are infeasible")
        self.degenerate = self.generators.span_rank(dim) < dim
        if self.degenerate:
            logger.warning("Polyhedron in dimension %d is not full-dimensional", dim)
            self.forms = candidates
        else:
            self.forms = tuple(f for f in candidates if self._facet_dim(f) == dim - 1)
        logger.debug(
            "Polyhedron d=%d: %d facets, %d vertices, %d rays, lineality %d",
            dim,
            len(self.forms),
            len(self.vertices),
            len(self.rays),
            len(self.lines),
        )

    def _facet_dim(self, form: LinearForm) -> int:
        g = self.generators
        vs = [i for i, v in enumerate(g.vertices) if form.evaluate(v) == 0]
        rs = [i for i, r in enumerate(g.rays) if form.direction_value(r) == 0]
        return g.span_rank(self.dim, vs, rs)

    # Constructors

    @classmethod
    def box(cls, lower: Sequence[Fraction | int], upper: Sequence[Fraction | int]) -> "HPolyhedron":
        dim = len(lower)
        forms = []
        for i, (lo, hi) in enumerate(zip(lower, upper)):
            unit = tuple(Fraction(int(i == j)) for j in range(dim))
            forms.append(LinearForm(unit, -Fraction(lo)))
            forms.append(LinearForm(tuple(-u for u in unit), Fraction(hi)))
        return cls(dim, forms)

    @classmethod
    def polygon(cls, vertices: Sequence[Sequence[Fraction | int]]) -> "HPolyhedron":
        """Convex polygon from its vertices listed in boundary order (either orientation)."""
        pts = [tuple(Fraction(c) for c in v) for v in vertices]
        if len(pts) < 3:
            raise PreconditionError("A polygon needs at least three vertices")
        area = sum(
            (p[0] * q[1] - q[0] * p[1] for p, q in zip(pts, pts[1:] + pts[:1])),
            Fraction(0),
        )
        if area == 0:
            raise PreconditionError("Polygon vertices are collinear")
        if area < 0:
            pts.reverse()
        forms = []
        for p, q in zip(pts, pts[1:] + pts[:1]):
            normal = (p[1] - q[1], q[0] - p[0])
            forms.append(LinearForm(normal, -(normal[0] * p[0] + normal[1] * p[1])))
        poly = cls(2, forms)
        if set(poly.vertices) != set(pts):
            raise PreconditionError("Polygon vertices are not in convex position")
        return poly

    # Structure

    @property
    def vertices(self) -> tuple[Vector, ...]:
        return self.generators.vertices

    @property
    def rays(self) -> tuple[Vector, ...]:
        return self.generators.rays

    @property
    def lines(self) -> tuple[Vector, ...]:
        return self.generators.lines

    @property
    def is_bounded(self) -> bool:
        return not self.rays and not self.lines

    @property
    def lineality_dim(self) -> int:
        return len(self.lines)

    def require_full_dimensional(self) -> None:
        if self.degenerate:
            raise PreconditionError(f"Polyhedron is not full-dimensional in R^{self.dim}")

    def contains(self, point: Point) -> bool:
        return all(f.evaluate(point) >= 0 for f in self.forms)

    def interior_contains(self, point: Point) -> bool:
        return all(f.evaluate(point) > 0 for f in self.forms)

    def may_meet(self, box: Box) -> bool:
        """False when some facet form is negative on all of ``box``."""
        return all(-_form_min(-f, box) >= 0 for f in self.forms)

    def active_set(self, point: Point) -> frozenset[int]:
        return frozenset(j for j, f in enumerate(self.forms) if f.evaluate(point) == 0)

    @cached_property
    def face_lattice(self) -> "FaceLattice":
        self.require_full_dimensional()
        return FaceLattice.build(self)

    @property
    def is_simple(self) -> bool:
        """Every vertex lies on exactly ``d - k`` facets (``k`` the lineality dimension)."""
        expected = self.dim - self.lineality_dim
        return all(len(self.active_set(v)) == expected for v in self.vertices)

    @cached_property
    def lineality_split(self) -> LinealitySplit:
        """Write ``S = S_0 x R^k`` with ``S_0`` pointed in ``R^(d-k)``."""
        normals = [f.coeffs for f in self.forms]
        keep = linalg.independent_rows(normals, self.dim)
        basis = [normals[i] for i in keep]
        if not basis:
            return LinealitySplit(self.dim, HPolyhedron(0, ()), (), self.lines)
        inverse = linalg.right_inverse(basis, self.dim)
        base_forms = []
        for f in self.forms:
            lam = tuple(linalg.dot(f.coeffs, [row[j] for row in inverse]) for j in range(len(basis)))
            base_forms.append(LinearForm(lam, f.const))
        return LinealitySplit(self.dim, HPolyhedron(len(basis), base_forms), tuple(basis), self.lines)

    def bounding_box(self) -> Box:
        if not self.is_bounded:
            raise PreconditionError("Unbounded polyhedron has no bounding box")
        lower = [min(v[i] for v in self.vertices) for i in range(self.dim)]
        upper = [max(v[i] for v in self.vertices) for i in range(self.dim)]
        return Box.from_bounds(lower, upper)

    def simplicity(self) -> int:
        """Largest number of facet forms vanishing at one point of the polyhedron."""
        return max((len(self.active_set(v)) for v in self.vertices), default=0)

    def vertex_cone(self, index: int) -> "VertexCone":
        x = self.vertices[index]
        closed = tuple(f for f in self.forms if f.evaluate(x) == 0)
        strict = tuple(f for f in self.forms if f.evaluate(x) > 0)
        return VertexCone(x, closed, strict)

    # Serialization

    def to_json(self) -> dict:
        return {"dim": self.dim, "ineqs": [f.to_json() for f in self.forms]}

    @classmethod
    def from_json(cls, data: Mapping[str, Any], allow_decimal: bool = False) -> "HPolyhedron":
        try:
            dim = int(data["dim"])
            forms = [LinearForm.from_json(item, allow_decimal) for item in data.get("ineqs", [])]
        except (KeyError, TypeError, ValueError) as e:
            raise ParseError(f"Malformed H-representation: {e}") from e
        if any(f.dim != dim for f in forms):
            raise ParseError(f"Inequality length does not match dim={dim}")
        return cls(dim, forms)

    def __repr__(self) -> str:
        return f"HPolyhedron(dim={self.dim}, facets={len(self.forms)})"


def parse_hrep_text(text: str, allow_decimal: bool = False) -> HPolyhedron:
    """Parse the line format ``a1 ... ad c`` (meaning ``a . x + c >= 0``).

    Blank lines and ``#`` comments are skipped; an optional ``dim N`` line fixes the dimension, which is
    otherwise inferred from the first inequality.
    """
    dim: int | None = None
    forms: list[LinearForm] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tokens = line.split()
        if tokens[0].lower() == "dim":
            if len(tokens) != 2 or not tokens[1].isdigit():
                raise ParseError(f"Line {lineno}: expected 'dim N'")
            dim = int(tokens[1])
            continue
        values = [parse_rational(t, allow_decimal) for t in tokens]
        if len(values) < 2:
            raise ParseError(f"Line {lineno}: an inequality needs at least one coefficient and a constant")
        if dim is None:
            dim = len(values) - 1
        if len(values) != dim + 1:
            raise ParseError(f"Line {lineno}: expected {dim + 1} numbers, got {len(values)}")
        forms.append(LinearForm(tuple(values[:-1]), values[-1]))
    if dim is None:
        raise ParseError("No inequalities and no 'dim' line found")
    return HPolyhedron(dim, forms)


def parse_hrep(text: str, allow_decimal: bool = False) -> HPolyhedron:
    """Parse JSON when the document starts with ``{``, the line format otherwise."""
    if text.lstrip().startswith("{"):
        try:
            data = json.loads(text)
        except json.JSONDecodeError as e:
            raise ParseError(f"Invalid JSON: {e}") from e
        return HPolyhedron.from_json(data, allow_decimal)
    return parse_hrep_text(text, allow_decimal)


def load_hrep(path: Path, allow_decimal: bool = False) -> HPolyhedron:
    try:
        text = Path(path).read_text()
    except OSError as e:
        raise ParseError(f"Cannot read {path}: {e}") from e
    return parse_hrep(text, allow_decimal)


@dataclass(frozen=True)
class FaceLattice:
    """All nonempty faces of a full-dimensional polyhedron, the polyhedron itself included."""

    polyhedron: HPolyhedron
    faces: tuple[Face, ...]

    @classmethod
    def build(cls, poly: HPolyhedron) -> "FaceLattice":
        g = poly.generators
        all_key = (frozenset(range(len(g.vertices))), frozenset(range(len(g.rays))))
        facet_keys = []
        for f in poly.forms:
            vs = frozenset(i for i, v in enumerate(g.vertices) if f.evaluate(v) == 0)
            rs = frozenset(i for i, r in enumerate(g.rays) if f.direction_value(r) == 0)
            facet_keys.append((vs, rs))

        seen = {all_key: None}
        frontier = [all_key]
        while frontier:
            nxt = []
            for vs, rs in frontier:
                for fvs, frs in facet_keys:
                    key = (vs & fvs, rs & frs)
                    if key[0] and key not in seen:
                        seen[key] = None
                        nxt.append(key)
            frontier = nxt

        raw = []
        for vs, rs in seen:
            active = frozenset(j for j, (fvs, frs) in enumerate(facet_keys) if vs <= fvs and rs <= frs)
            normals = [poly.forms[j].coeffs for j in sorted(active)]
            dim = poly.dim - linalg.rank(normals, poly.dim)
            witness = tuple(
                sum((g.vertices[i][c] for i in vs), Fraction(0)) / len(vs)
                + sum((g.rays[i][c] for i in rs), Fraction(0))
                for c in range(poly.dim)
            )
            hull = tuple(poly.forms[sorted(active)[i]] for i in linalg.independent_rows(normals, poly.dim))
            raw.append((dim, tuple(sorted(vs)), tuple(sorted(rs)), active, witness, hull))
        raw.sort(key=lambda item: (item[0], item[1], item[2]))
        faces = tuple(
            Face(i, dim, active, frozenset(vs), frozenset(rs), witness, hull)
            for i, (dim, vs, rs, active, witness, hull) in enumerate(raw)
        )
        logger.debug("Face lattice: f-vector %s", [sum(1 for f in faces if f.dim == k) for k in range(poly.dim + 1)])
        return cls(poly, faces)

    def by_dim(self, k: int) -> tuple[Face, ...]:
        return tuple(f for f in self.faces if f.dim == k)

    @property
    def f_vector(self) -> list[int]:
        """Face counts for dimensions ``0..d-1``."""
        return [len(self.by_dim(k)) for k in range(self.polyhedron.dim)]

    @property
    def min_face_dim(self) -> int:
        return min(f.dim for f in self.faces)

    def euler_characteristic(self) -> int:
        return sum((-1) ** f.dim for f in self.faces if f.dim < self.polyhedron.dim)

    def face_of_point(self, point: Point) -> Face:
        """The face whose relative interior contains ``point``."""
        if not self.polyhedron.contains(point):
            raise PreconditionError("Point does not lie on the polyhedron", witness=tuple(point))
        active = self.polyhedron.active_set(point)
        for face in self.faces:
            if face.active == active:
                return face
        raise PreconditionError("Point does not lie on the polyhedron", witness=tuple(point))

    def vertex_face(self, vertex_index: int) -> Face:
        for face in self.by_dim(self.min_face_dim):
            if face.vertices == frozenset({vertex_index}):
                return face
        raise KeyError(vertex_index)


@dataclass(frozen=True)
class VertexCone:
    """Closed cone of the facets through a vertex and the open set cut by the facets avoiding it."""

    vertex: Vector
    closed_forms: tuple[LinearForm, ...]
    open_forms: tuple[LinearForm, ...]

    def contains_closed(self, point: Point) -> bool:
        return all(f.evaluate(point) >= 0 for f in self.closed_forms)

    def contains_open(self, point: Point) -> bool:
        return all(f.evaluate(point) > 0 for f in self.open_forms)


def _form_min(form: LinearForm, box: Box) -> Fraction:
    return form.const + sum(
        (a * (s.lo if a > 0 else s.hi) for a, s in zip(form.coeffs, box.sides)),
        Fraction(0),
    )


def _min_or_none(values: Iterable[Fraction]) -> Fraction | None:
    return min(values, default=None)


@dataclass(frozen=True)
class SupportLevel:
    """``D_k = {l_F >= 0 for every k-face F}``; ``region`` is None for ``D_-1 = R^d``."""

    k: int
    faces: tuple[int, ...]
    face_forms: tuple[LinearForm, ...]
    region: HPolyhedron | None

    @property
    def facets(self) -> tuple[LinearForm, ...]:
        return self.region.forms if self.region is not None else ()

    def contains(self, point: Point) -> bool:
        return self.region is None or self.region.contains(point)

    def interior_contains(self, point: Point) -> bool:
        return self.region is None or self.region.interior_contains(point)

    def avoiding(self, vertex: Point) -> tuple[LinearForm, ...]:
        """Facets of ``D_k`` not passing through ``vertex``."""
        return tuple(g for g in self.facets if g.evaluate(vertex) > 0)

    def cover_value(self, point: Point, vertices: Sequence[Vector]) -> Fraction | None:
        """``max_x min_{G not through x} l_G(point)``; None stands for an unconstrained vertex."""
        best: Fraction | None = Fraction(-1)
        for x in vertices:
            value = _min_or_none(g.evaluate(point) for g in self.avoiding(x))
            if value is None:
                return None
            best = max(best, value)
        return best


@dataclass(frozen=True)
class Collar:
    """Box ``R_k`` with ``S`` in its interior, covered by the sets ``{l_G >= delta : G not through x}``."""

    k: int
    box: Box
    delta: Fraction

    def contains(self, point: Point) -> bool:
        return self.box.contains(point)


class SupportChain:
    """Nested supports ``R^d = D_-1 ⊇ D_0 ⊇ ... ⊇ D_(d-1) = S`` of a polytope.

    The form of a face defaults to the primitive sum of the facet forms through it; ``overrides`` maps face
    indices to other forms (used for sections, whose supports are traced from the parent polytope).

    Raises:
        PreconditionError: If the polytope is unbounded or the chain condition fails.
    """

    def __init__(self, polytope: HPolyhedron, overrides: Mapping[int, LinearForm] | None = None, verify: bool = True):
        polytope.require_full_dimensional()
        if not polytope.is_bounded:
            raise PreconditionError("Support chains need a bounded polytope")
        self.polytope = polytope
        self.lattice = polytope.face_lattice
        overrides = dict(overrides or {})
        self._forms: dict[int, LinearForm] = {}
        for face in self.lattice.faces:
            if face.dim == polytope.dim:
                continue
            if face.index in overrides:
                self._forms[face.index] = overrides[face.index]
            else:
                total = LinearForm((Fraction(0),) * polytope.dim, Fraction(0))
                for j in face.active:
                    total = total + polytope.forms[j]
                self._forms[face.index] = total.primitive()
        self.levels: dict[int, SupportLevel] = {-1: SupportLevel(-1, (), (), None)}
        for k in range(polytope.dim):
            faces = self.lattice.by_dim(k)
            forms = tuple(self._forms[f.index] for f in faces)
            self.levels[k] = SupportLevel(k, tuple(f.index for f in faces), forms, HPolyhedron(polytope.dim, forms))
        self._collars: dict[int, Collar] = {}
        if verify:
            self.verify()

    @property
    def dim(self) -> int:
        return self.polytope.dim

    def form_of(self, face_index: int) -> LinearForm:
        return self._forms[face_index]

    def vertex_form(self, vertex_index: int) -> LinearForm:
        return self._forms[self.lattice.vertex_face(vertex_index).index]

    def verify(self) -> None:
        """Check ``D_k ⊆ D_(k-1)`` and that ``D_k`` meets the boundary of ``D_(k-1)`` only on ``(k-1)``-faces."""
        for k in range(1, self.dim):
            inner, outer = self.levels[k], self.levels[k - 1]
            g = inner.region.generators
            for form in outer.facets:
                bad = _generator_violation(form, g)
                if bad is not None:
                    raise PreconditionError(f"Support D_{k} is not contained in D_{k - 1}", witness=bad)
            for face_index, lower in zip(outer.faces, outer.face_forms):
                trace = enumerate_generators(self.dim, inner.facets, equalities=(lower,))
                if trace.is_empty:
                    continue
                for form in self.polytope.forms:
                    bad = _generator_violation(form, trace)
                    if bad is not None:
                        raise PreconditionError(
                            f"Support D_{k} touches the boundary of D_{k - 1} outside face {face_index}",
                            witness=bad,
                        )
        logger.debug("Support chain verified for d=%d", self.dim)

    def in_transition(self, k: int, point: Point) -> bool:
        """Membership in ``Q_(k-1) = R_k ∩ (D_(k-1) minus int D_k)``."""
        return (
            self.collar(k).contains(point)
            and self.levels[k - 1].contains(point)
            and not self.levels[k].interior_contains(point)
        )

    def collar(self, k: int, attempts: int = 12, max_depth: int | None = None) -> Collar:
        """Certified collar ``R_k`` and cover margin ``delta`` for level ``k``.

        Raises:
            BudgetExhausted: If no box/margin pair certifies within ``attempts`` halvings.
        """
        if k in self._collars:
            return self._collars[k]
        level = self.levels[k]
        vertices = self.polytope.vertices
        depth = max_depth if max_depth is not None else 6 * self.dim
        samples = [f.witness for f in self.lattice.faces] + list(vertices)
        values = [level.cover_value(p, vertices) for p in samples]
        finite = [v for v in values if v is not None]
        delta = min(finite, default=Fraction(1)) / 2
        if delta <= 0:
            raise PreconditionError(f"Level {k} supports do not cover the polytope")
        bbox = self.polytope.bounding_box()
        margin = bbox.max_width / 2
        for attempt in range(attempts):
            box = bbox.dilate(Fraction(1), margin)
            if _certify_cover(box, level, vertices, delta, depth):
                collar = Collar(k, box, delta)
                self._collars[k] = collar
                logger.debug("Collar for level %d: margin %s, delta %s (attempt %d)", k, margin, delta, attempt + 1)
                return collar
            margin /= 2
            delta /= 2
        raise BudgetExhausted(f"Could not certify a collar for level {k}", searched="collar")


def _generator_violation(form: LinearForm, g: Generators) -> Vector | None:
    for v in g.vertices:
        if form.evaluate(v) < 0:
            return v
    for r in g.rays:
        if form.direction_value(r) < 0:
            return r
    for line in g.lines:
        if form.direction_value(line) != 0:
            return line
    return None


def _certify_cover(box: Box, level: SupportLevel, vertices: Sequence[Vector], delta: Fraction, depth: int) -> bool:
    avoiding = [level.avoiding(x) for x in vertices]
    stack = [(box, 0)]
    while stack:
        cell, d = stack.pop()
        if any(all(_form_min(g, cell) >= delta for g in forms) for forms in avoiding):
            continue
        if d >= depth:
            return False
        stack.extend((half, d + 1) for half in cell.split())
    return True


@dataclass(frozen=True)
class HyperplaneChart:
    """Affine coordinates ``u`` on ``{form = level}``: ``x = origin + sum_j u_j basis_j``."""

    origin: Vector
    basis: tuple[Vector, ...]
    back: tuple[Vector, ...]

    @classmethod
    def for_level(cls, form: LinearForm, level: Fraction) -> "HyperplaneChart":
        norm = form.normal_norm_squared()
        if norm == 0:
            raise PreconditionError("A constant form does not define a hyperplane")
        scale = (Fraction(level) - form.const) / norm
        origin = tuple(a * scale for a in form.coeffs)
        basis = tuple(linalg.nullspace([form.coeffs], form.dim))
        inverse = linalg.right_inverse(basis, form.dim) if basis else []
        back = tuple(tuple(row[j] for row in inverse) for j in range(len(basis)))
        return cls(origin, basis, back)

    @property
    def dim(self) -> int:
        return len(self.basis)

    @property
    def ambient_dim(self) -> int:
        return len(self.origin)

    def to_ambient(self, u: Point) -> Vector:
        return tuple(
            o + sum((Fraction(c) * b[i] for c, b in zip(u, self.basis)), Fraction(0)) for i, o in enumerate(self.origin)
        )

    def to_chart(self, x: Point) -> Vector:
        shifted = [Fraction(a) - o for a, o in zip(x, self.origin)]
        return linalg.mat_vec(self.back, shifted)

    def pull_form(self, form: LinearForm) -> LinearForm:
        return LinearForm(tuple(form.direction_value(b) for b in self.basis), form.evaluate(self.origin))

    def pull_poly(self, poly: SparsePoly) -> SparsePoly:
        """Restrict an ambient polynomial to the hyperplane, in chart coordinates."""
        images = []
        for i, o in enumerate(self.origin):
            coeffs = tuple(b[i] for b in self.basis)
            images.append(LinearForm(coeffs, o).to_poly())
        return poly.substitute(images)

    def push_poly(self, poly: SparsePoly) -> SparsePoly:
        """Extend a chart polynomial to the ambient space through the orthogonal projection."""
        images = []
        for row in self.back:
            const = -linalg.dot(row, self.origin)
            images.append(LinearForm(row, const).to_poly())
        return poly.substitute(images)


@dataclass(frozen=True)
class VertexSection:
    """``{l_x = eps} ∩ S`` near a vertex ``x``, as a polytope in chart coordinates."""

    vertex_index: int
    vertex: Vector
    form: LinearForm
    level: Fraction
    chart: HyperplaneChart
    polytope: HPolyhedron

    def traced_forms(self, chain: SupportChain) -> dict[int, LinearForm]:
        """Support forms for the section: the parent's forms of the faces through the vertex, restricted."""
        out: dict[int, LinearForm] = {}
        parent = chain.lattice
        for face in self.polytope.face_lattice.faces:
            if face.dim == self.polytope.dim:
                continue
            host = parent.face_of_point(self.chart.to_ambient(face.witness))
            if host.dim != face.dim + 1:
                raise PreconditionError(f"Section face {face.index} does not come from a face through the vertex")
            out[face.index] = self.chart.pull_form(chain.form_of(host.index))
        return out


def vertex_section(
    poly: HPolyhedron, vertex_index: int, eps: Fraction | None = None, chain: SupportChain | None = None
) -> VertexSection:
    """Cut ``poly`` near a vertex with ``{l_x = eps}``.

    Raises:
        PreconditionError: If ``eps`` is not below ``l_x`` at every other vertex.
    """
    x = poly.vertices[vertex_index]
    if chain is not None:
        form = chain.vertex_form(vertex_index)
    else:
        total = LinearForm((Fraction(0),) * poly.dim, Fraction(0))
        for f in poly.forms:
            if f.evaluate(x) == 0:
                total = total + f
        form = total.primitive()
    bound = _min_or_none(form.evaluate(v) for j, v in enumerate(poly.vertices) if j != vertex_index)
    if bound is None or bound <= 0:
        raise PreconditionError("Vertex form does not separate the vertex from the others", witness=x)
    eps = bound / 2 if eps is None else Fraction(eps)
    if not 0 < eps < bound:
        raise PreconditionError(f"Section level {eps} must lie strictly between 0 and {bound}", witness=x)
    chart = HyperplaneChart.for_level(form, eps)
    forms = [chart.pull_form(f) for f in poly.forms if f.evaluate(x) == 0]
    section = HPolyhedron(poly.dim - 1, forms)
    if not section.is_bounded or section.degenerate:
        raise PreconditionError("Vertex section is not a full-dimensional polytope", witness=x)
    return VertexSection(vertex_index, x, form, eps, chart, section)


@dataclass(frozen=True)
class ConeLift:
    """Closed cone over a pointed polyhedron, with a bounded section ``{level_form = 1}``."""

    base: HPolyhedron
    forms: tuple[LinearForm, ...]
    level_form: LinearForm
    chart: HyperplaneChart
    section: HPolyhedron
    rays: tuple[Vector, ...]
    ray_quadratics: tuple[SparsePoly, ...] = field(repr=False)

    @property
    def dim(self) -> int:
        return self.base.dim + 1

    def contains(self, point: Point) -> bool:
        return all(f.evaluate(point) >= 0 for f in self.forms)


def cone_over(poly: HPolyhedron) -> ConeLift:
    """Homogenize a pointed polyhedron into a cone in ``R^(d+1)``.

    Raises:
        PreconditionError: If the polyhedron contains a line.
    """
    if poly.lineality_dim:
        raise PreconditionError("The cone construction needs a polyhedron without lines")
    d = poly.dim
    t = LinearForm(tuple(Fraction(int(i == d)) for i in range(d + 1)), Fraction(0))
    forms = tuple(f.homogenize() for f in poly.forms) + (t,)
    if poly.is_bounded:
        level = t
    else:
        level = t
        for f in poly.forms:
            level = level + f.homogenize()
    rays = tuple(v + (Fraction(1),) for v in poly.vertices) + tuple(r + (Fraction(0),) for r in poly.rays)
    chart = HyperplaneChart.for_level(level, Fraction(1))
    section = HPolyhedron(d, [chart.pull_form(f) for f in forms])
    if not section.is_bounded or len(section.vertices) != len(rays):
        raise PreconditionError("Cone section is not a polytope with one vertex per extremal ray")
    quadratics = []
    for g in rays:
        total = SparsePoly.zero(d + 1)
        for normal in linalg.nullspace([g], d + 1):
            lin = LinearForm(normal, 0).to_poly()
            total = total + lin * lin
        quadratics.append(total)
    return ConeLift(poly, forms, level, chart, section, rays, tuple(quadratics))
