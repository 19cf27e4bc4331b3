"""Level polynomials of a polytope.

For a polytope ``S`` with support chain ``R^d = D_-1 ⊇ D_0 ⊇ ... ⊇ D_(d-1) = S`` the level-``k`` polynomial
``p_k`` is nonnegative on ``S``, nonpositive on ``D_(k-1) minus int D_k`` and vanishes there only on ``S``.
Together the ``d`` level polynomials cut out ``S``.

* level 0 separates ``S`` from the outside of ``D_0``, which it meets exactly in the vertices;
* level ``d - 1`` is the product of the facet forms;
* an intermediate level homogenizes the level ``k - 1`` polynomials of the vertex sections about their
  vertices, switches each on near its own vertex with cushion factors, sums them, and finally pushes the sum
  below zero outside the collar.
"""

import logging
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from polyrep.cushion import CushionParams, kappa_poly
from polyrep.cushion_cache import CushionCache
from polyrep.errors import PreconditionError, VerificationFailure
from polyrep.expr import Expr, Leaf, as_expr
from polyrep.geometry import Collar, HPolyhedron, SupportChain, SupportLevel, VertexSection, vertex_section
from polyrep.interval import Box
from polyrep.linalg import Vector
from polyrep.models import BudgetConfig, Counterexample, FoundConstant, VerificationReport
from polyrep.poly import LinearForm, Point, SparsePoly, cone_extend, format_rational
from polyrep.separation import (
    adjust_with_cushion,
    find_exponent,
    growth_template,
    local_vertex_separator,
    separate_finite_intersection,
)
from polyrep.sides import ComplementInteriorSide, OracleSide, PolyhedralSide, Side

logger = logging.getLogger(__name__)


@dataclass
class LevelResult:
    k: int
    poly: Expr
    construction: str
    constants: list[FoundConstant] = field(default_factory=list)
    note: str | None = None


@dataclass
class RecursionState:
    """Everything built for one intermediate level."""

    k: int
    level: SupportLevel
    collar: Collar
    sections: list[VertexSection]
    homogenized: list[SparsePoly]
    kappa: SparsePoly
    exponent: FoundConstant
    rho: Fraction


def _strictly_inside(box: Box, point: Point) -> bool:
    return all(s.lo < Fraction(c) < s.hi for s, c in zip(box.sides, point))


def _box_strictly_inside(outer: Box, box: Box) -> bool:
    return all(o.lo < s.lo and s.hi < o.hi for o, s in zip(outer.sides, box.sides))


def _form_bound(form: LinearForm, box: Box) -> Fraction:
    """``max |form|`` on ``box``, attained at a corner."""
    return max(abs(form.evaluate(c)) for c in box.corners())


def _power_of_two_above(value: Fraction) -> Fraction:
    result = Fraction(1)
    while result <= value:
        result *= 2
    return result


def region_side(level: SupportLevel, window: Box, label: str) -> Side:
    """``D_k`` as a side; ``R^d`` for the bottom level."""
    if level.region is None:
        return OracleSide(lambda x: True, window, bounded=False, label=label)
    return PolyhedralSide(level.region, window=None if level.region.is_bounded else window, label=label)


class PolytopeRecursion:
    """Build the level polynomials of a polytope from its support chain.

    Sections of the polytope at its vertices get their own recursion, with the support forms traced from the
    parent chain.
    """

    def __init__(
        self, chain: SupportChain, budget: BudgetConfig, cache: CushionCache | None = None, check: bool = True
    ):
        self.chain = chain
        self.budget = budget
        self.cache = cache
        self.check = check
        self.states: dict[int, RecursionState] = {}
        self.polytope: HPolyhedron = chain.polytope
        self.side = PolyhedralSide(self.polytope, label="S")
        box = self.polytope.bounding_box()
        self.window = box.dilate(Fraction(2), Fraction(1))

    @property
    def dim(self) -> int:
        return self.polytope.dim

    def run(self) -> list[LevelResult]:
        return [self.level(k) for k in range(self.dim)]

    def level(self, k: int) -> LevelResult:
        if not 0 <= k < self.dim:
            raise ValueError(f"Level {k} out of range for a {self.dim}-polytope")
        if k == self.dim - 1:
            result = self._facet_product()
        elif k == 0:
            result = self._vertex_level()
        else:
            if self.dim > 3:
                logger.warning("Intermediate levels of a %d-polytope: the searches may not finish in budget", self.dim)
            result = self._intermediate(k)
        logger.info("Level %d of %d-polytope: %s, degree <= %d", k, self.dim, result.construction, result.poly.degree)
        if self.check:
            self.check_level(k, result.poly)
        return result

    # Levels

    def _facet_product(self) -> LevelResult:
        forms = self.chain.levels[self.dim - 1].face_forms
        product = SparsePoly.constant(self.dim, 1)
        for form in forms:
            product = product * form.to_poly()
        return LevelResult(self.dim - 1, Leaf(product), "facet-product")

    def _vertex_level(self) -> LevelResult:
        level = self.chain.levels[0]
        vertices = self.polytope.vertices
        outside = ComplementInteriorSide(level.face_forms, self.window, anchors=vertices, label="outside support 0")
        locals_, radii = [], []
        for idx, vertex_form in enumerate(self.chain.vertex_form(i) for i in range(len(vertices))):
            others = [f for f in level.face_forms if f != vertex_form]
            poly, radius = local_vertex_separator(self.polytope, idx, vertex_form, keep_positive=others)
            locals_.append(poly)
            radii.append(radius)
        sep = separate_finite_intersection(self.side, outside, vertices, locals_, min(radii), self.budget)
        return LevelResult(0, sep.poly, "vertex-separator", sep.constants)

    def _intermediate(self, k: int) -> LevelResult:
        chain, budget = self.chain, self.budget
        level, below = chain.levels[k], chain.levels[k - 1]
        collar = chain.collar(k, attempts=budget.collar_attempts)
        vertices = self.polytope.vertices
        m = len(vertices)

        sections, homogenized = [], []
        rng = np.random.default_rng(budget.seed)
        for idx in range(m):
            section = vertex_section(self.polytope, idx, chain=chain)
            sub_chain = SupportChain(section.polytope, section.traced_forms(chain))
            sub = PolytopeRecursion(sub_chain, budget, self.cache, check=self.check).level(k - 1)
            local = sub.poly.expand(budget.max_terms)
            ambient = section.chart.push_poly(local)
            homogenized.append(cone_extend(ambient, section.form, section.vertex, section.level, rng=rng))
            sections.append(section)
            logger.debug("Vertex %d: section level %d polynomial of degree %d", idx, k - 1, local.degree)

        avoiding = [level.avoiding(x) for x in vertices]
        bound = max((_form_bound(g, collar.box) for g in level.facets), default=Fraction(0))
        rho = _power_of_two_above(max(bound, collar.delta))
        kappa = kappa_poly(CushionParams(collar.delta, rho, m), budget.max_degree, self.cache)

        transition = OracleSide(
            lambda x: chain.in_transition(k, x),
            collar.box,
            bounded=True,
            anchors=list(vertices) + [f.witness for f in chain.lattice.faces if f.dim <= k],
            label=f"transition {k - 1}",
            surfaces=level.facets,
        )
        samples: dict[int, list] = {}
        kappa_values: dict[Fraction, Fraction] = {}

        def rows(seed: int):
            if seed not in samples:
                gen = np.random.default_rng(seed)
                points = self.side.sample(budget.samples, gen) + transition.sample(budget.samples, gen)
                table = []
                for x in dict.fromkeys(points):
                    in_s, in_q = self.polytope.contains(x), transition.contains(x)
                    values = [[g.evaluate(x) for g in forms] for forms in avoiding]
                    weights = []
                    for vals in values:
                        w = Fraction(1)
                        for v in vals:
                            if v not in kappa_values:
                                kappa_values[v] = kappa.evaluate((v,))
                            w *= kappa_values[v]
                        weights.append(w)
                    zero = [i for i, vals in enumerate(values) if all(v >= collar.delta for v in vals)]
                    outside_cone = [i for i, vals in enumerate(values) if any(v <= 0 for v in vals)]
                    table.append((x, in_s, in_q, [q.evaluate(x) for q in homogenized], weights, zero, outside_cone))
                samples[seed] = table
            return samples[seed]

        def check(n: int, seed: int) -> Point | None:
            for x, in_s, in_q, qv, weights, zero, outside_cone in rows(seed):
                r = [q * w**n for q, w in zip(qv, weights)]
                total = sum(r, Fraction(0))
                if in_s and total < 0:
                    return x
                if not in_q:
                    continue
                if total > 0 or (total == 0 and not in_s):
                    return x
                for i in zero:
                    for beta in outside_cone:
                        if beta != i and 2 * m * abs(r[beta]) > abs(r[i]):
                            return x
            return None

        exponent = find_exponent(check, budget, "n", step=f"level {k} cushion products")
        n = exponent.as_int()
        total: Expr = as_expr(0, self.dim)
        for q, forms in zip(homogenized, avoiding):
            term: Expr = Leaf(q)
            for g in forms:
                term = term * Leaf(g.to_poly()).compose(kappa) ** n
            total = total + term

        h = self.skeleton_polynomial(k, below)
        bounded_below = below.region is not None and below.region.is_bounded

        def far_meets(box: Box) -> bool:
            return not _box_strictly_inside(collar.box, box) and (below.region is None or below.region.may_meet(box))

        far = OracleSide(
            lambda x: below.contains(x) and not _strictly_inside(collar.box, x),
            below.region.bounding_box() if bounded_below else self.window,
            bounded=bounded_below,
            anchors=below.region.vertices if below.region is not None else (),
            directions=self._directions(below),
            label=f"support {k - 1} outside collar {k}",
            meets=far_meets,
        )
        adjusted = adjust_with_cushion(self.side, transition, far, h, total, budget)
        self.states[k] = RecursionState(k, level, collar, sections, homogenized, kappa, exponent, rho)
        constants = [
            FoundConstant.of("delta", collar.delta, "certified", f"level {k} collar"),
            FoundConstant.of("rho", rho, "certified", f"level {k} collar"),
            exponent,
        ] + adjusted.constants
        return LevelResult(k, adjusted.poly, "cushion-sum", constants, note=f"kappa degree {kappa.degree}")

    # Helpers

    @staticmethod
    def _directions(level: SupportLevel) -> list[Vector]:
        if level.region is None:
            return []
        region = level.region
        return list(region.rays) + list(region.lines) + [tuple(-c for c in u) for u in region.lines]

    def skeleton_polynomial(self, k: int, below: SupportLevel | None = None) -> Expr:
        """``prod_F sum_j l_(F,j)^2`` over the ``k``-faces, times ``1 + ||X||^2`` if it does not grow outward.

        The factors stay unexpanded, which keeps interval enclosures of the product tight.
        """
        h: Expr = as_expr(1, self.dim)
        for face in self.chain.lattice.by_dim(k):
            squares = [Leaf(form.to_poly()) ** 2 for form in face.hull_forms]
            square_sum = squares[0]
            for square in squares[1:]:
                square_sum = square_sum + square
            h = h * square_sum
        directions = self._directions(below) if below is not None else []
        center = self.polytope.bounding_box().center
        for u in directions:
            line = h.restrict_to_line(center, u)
            coeffs = line.coefficients()
            if line.degree < 1 or coeffs[-1] <= 0:
                logger.debug("Skeleton polynomial of level %d does not grow along %s", k, u)
                return h * growth_template(self.dim, 1)
        return h

    def check_level(self, k: int, poly: Expr) -> None:
        """Sampled check of the three level conditions; fails fast before the next level is built.

        Raises:
            VerificationFailure: With the first violating sample.
        """
        chain = self.chain
        if k == 0:
            below = OracleSide(lambda x: True, self.window, bounded=False, label="R^d")
        else:
            below = region_side(chain.levels[k - 1], self.window, f"support {k - 1}")
        gen = np.random.default_rng(self.budget.seed + 7)
        points = self.side.sample(self.budget.samples, gen) + below.sample(self.budget.samples, gen)
        for x in dict.fromkeys(points):
            in_s = self.polytope.contains(x)
            in_ring = below.contains(x) and not chain.levels[k].interior_contains(x)
            if not (in_s or in_ring):
                continue
            value = poly.evaluate(x)
            if (in_s and value < 0) or (in_ring and value > 0) or (in_ring and value == 0 and not in_s):
                detail = f"level {k} polynomial has value {format_rational(value)}"
                report = VerificationReport(
                    mode="sampled",
                    passed=False,
                    counterexamples=[
                        Counterexample(
                            point=[format_rational(c) for c in x],
                            stratum=f"level {k}",
                            values=[format_rational(value)],
                            detail=detail,
                        )
                    ],
                )
                raise VerificationFailure(f"Level {k} conditions fail at {x}: {detail}", report)


def polytope_levels(
    polytope: HPolyhedron, budget: BudgetConfig, cache: CushionCache | None = None, check: bool = True
) -> list[LevelResult]:
    """The ``d`` level polynomials of a full-dimensional polytope.

    Raises:
        PreconditionError: If the polytope is unbounded or lower-dimensional.
    """
    polytope.require_full_dimensional()
    if not polytope.is_bounded:
        raise PreconditionError("Level polynomials need a bounded polytope")
    chain = SupportChain(polytope)
    return PolytopeRecursion(chain, budget, cache, check).run()
