"""Polynomial-inequality representations.

Pipelines:

* ``t1a``: ``s + 1`` polynomials for a compact basic closed set where at most ``s`` of its defining
  polynomials vanish at any point: the top ``s`` elementary symmetric functions plus a separator of the
  residual set.
* ``t1b``: ``s`` polynomials when exactly ``s`` vanish only at finitely many points.
* ``polytope``: the ``d`` level polynomials of a polytope.
* ``polyhedron``: ``d - k`` polynomials for a polyhedron with ``k``-dimensional lineality space, through the
  cone over the pointed part when it is unbounded.
"""

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Literal, Sequence

import numpy as np

from polyrep.cushion_cache import CushionCache
from polyrep.errors import BudgetExhausted, ParseError, PolyRepError, PreconditionError, VerificationFailure
from polyrep.expr import Expr, Leaf, as_expr, expr_from_json, homogenized_pullback
from polyrep.geometry import HPolyhedron, cone_over
from polyrep.interval import sqrt_lower
from polyrep.linalg import Vector, dot
from polyrep.models import (
    BudgetConfig,
    Counterexample,
    FaceAudit,
    FoundConstant,
    ProvenanceEntry,
    RepresentationDocument,
    VanishingAudit,
    VerificationReport,
)
from polyrep.poly import LinearForm, Point, SparsePoly, elementary_symmetric_all, format_rational
from polyrep.recursion import polytope_levels
from polyrep.separation import (
    Separator,
    find_exponent,
    find_local_radius,
    separate_disjoint,
    separate_finite_intersection,
)
from polyrep.sides import BasicClosedSide, OracleSide, PolyhedralSide, Side, dyadic, face_points

logger = logging.getLogger(__name__)

Pipeline = Literal["auto", "t1a", "t1b", "polytope", "polyhedron"]
PIPELINES: tuple[str, ...] = ("auto", "t1a", "t1b", "polytope", "polyhedron")
Target = HPolyhedron | BasicClosedSide


@dataclass(frozen=True)
class SimplicityProfile:
    """``s`` and the points where exactly ``s`` defining polynomials vanish.

    ``points`` is None when that set is not known to be finite; ``exact`` is False for sampled profiles.
    """

    s: int
    points: tuple[Vector, ...] | None
    exact: bool = True


@dataclass
class Representation:
    """``target = {p >= 0 for p in polynomials}`` together with how each polynomial was built."""

    polynomials: list[Expr]
    pipeline: str
    target: Target
    provenance: list[ProvenanceEntry] = field(default_factory=list)
    faithful: bool = False

    @property
    def dim(self) -> int:
        return self.target.dim

    def __len__(self) -> int:
        return len(self.polynomials)

    def contains(self, point: Point) -> bool:
        return all(p.evaluate(point) >= 0 for p in self.polynomials)

    def to_document(
        self, max_terms: int, report: VerificationReport | None = None, seconds: float | None = None
    ) -> RepresentationDocument:
        return RepresentationDocument(
            dim=self.dim,
            pipeline=self.pipeline,
            target=_target_json(self.target),
            polynomials=[polynomial_json(p, max_terms) for p in self.polynomials],
            provenance=self.provenance,
            faithful=self.faithful,
            report=report,
            seconds=seconds,
        )

    @classmethod
    def from_document(cls, doc: RepresentationDocument) -> "Representation":
        """Rebuild a representation from its JSON document.

        Raises:
            ParseError: If the target is not a polyhedron or a polynomial entry is malformed.
        """
        if doc.target.get("kind", "polyhedron") != "polyhedron":
            raise ParseError("Only polyhedral targets can be reloaded")
        target = HPolyhedron.from_json(doc.target)
        return cls(
            [polynomial_from_json(p, doc.dim) for p in doc.polynomials],
            doc.pipeline,
            target,
            list(doc.provenance),
            doc.faithful,
        )


def polynomial_json(p: Expr, max_terms: int) -> dict[str, Any]:
    """Expanded form when it fits ``max_terms``, expression tree otherwise."""
    expanded = p.try_expand(max_terms)
    if expanded is not None:
        return {"form": "expanded", "poly": expanded.to_json()}
    return {"form": "structure", "expr": p.to_json()}


def polynomial_from_json(data: dict[str, Any], dim: int) -> Expr:
    form = data.get("form")
    if form == "expanded":
        return as_expr(SparsePoly.from_json(data["poly"]), dim)
    if form == "structure":
        return as_expr(expr_from_json(data["expr"]), dim)
    raise ParseError(f"Unknown polynomial form {form!r}")


def _target_json(target: Target) -> dict[str, Any]:
    if isinstance(target, HPolyhedron):
        return {"kind": "polyhedron", **target.to_json()}
    return {
        "kind": "basic-closed",
        "dim": target.dim,
        "polys": [p.to_json() for p in target.polys],
        "window": target.window.to_json(),
    }


def _entry(
    index: int, poly: Expr, construction: str, constants: Sequence[FoundConstant] = (), note: str | None = None
) -> ProvenanceEntry:
    return ProvenanceEntry(
        index=index, construction=construction, degree=poly.degree, constants=list(constants), note=note
    )


def _require_size(rep: Representation, expected: int) -> Representation:
    if len(rep) != expected:
        raise PolyRepError(f"{rep.pipeline} produced {len(rep)} polynomials, expected {expected}")
    return rep


def _side_of(target: Target) -> Side:
    if isinstance(target, HPolyhedron):
        return PolyhedralSide(target, label="S")
    return target


# Simplicity


def simplicity_profile(target: Target, budget: BudgetConfig | None = None) -> SimplicityProfile:
    """Largest number ``s`` of defining polynomials vanishing at one point, and where exactly ``s`` vanish.

    Exact for polyhedra (from the face lattice); for polynomial input it is a sampled lower bound.

    Raises:
        PreconditionError: If the set is empty.
    """
    if isinstance(target, HPolyhedron):
        lattice = target.face_lattice
        s = max(len(face.active) for face in lattice.faces)
        top = [face for face in lattice.faces if len(face.active) == s]
        points = tuple(face.witness for face in top) if all(face.dim == 0 for face in top) else None
        return SimplicityProfile(s, points)

    budget = budget or BudgetConfig()
    samples = target.sample(budget.samples, budget.seed)
    if not samples:
        raise PreconditionError(f"No point of {target.label} was found; the set looks empty")
    counts = {x: sum(1 for p in target.polys if p.evaluate(x) == 0) for x in samples}
    s = max(counts.values())
    points = tuple(x for x, c in counts.items() if c == s and x in target.anchors)
    logger.warning("s = %d is a sampled lower bound for %s; it is treated as asserted", s, target.label)
    return SimplicityProfile(s, points or None, exact=False)


def symmetric_reduction_epsilon(
    k: int, s: int, rho: Fraction = Fraction(1), trials: int = 2000, seed: int = 0, max_halvings: int = 40
) -> Fraction:
    """Largest ``2^-j`` for which the top ``s`` symmetric functions decide the signs on random tuples.

    Tuples have ``|a_1|, ..., |a_s| <= eps`` and ``a_(s+1), ..., a_k >= rho``; the test is
    ``all a_i >= 0`` against ``sigma_(k-s+1), ..., sigma_k >= 0``.

    Raises:
        BudgetExhausted: If no ``eps`` down to ``2^-max_halvings`` works.
    """
    if not 1 <= s <= k:
        raise ValueError(f"Need 1 <= s <= k, got s={s}, k={k}")
    rho = Fraction(rho)
    rng = np.random.default_rng(seed)
    eps = Fraction(1)
    last: tuple[Fraction, ...] | None = None
    for _ in range(max_halvings):
        bad = None
        for _ in range(trials):
            small = [eps * dyadic(float(rng.uniform(-1, 1))) if rng.random() > 0.1 else Fraction(0) for _ in range(s)]
            large = [rho + rho * dyadic(float(rng.exponential(2.0))) for _ in range(k - s)]
            values = small + large
            sigmas = elementary_symmetric_all(values)
            if all(v >= 0 for v in values) != all(x >= 0 for x in sigmas[k - s :]):
                bad = tuple(values)
                break
        if bad is None:
            logger.debug("Symmetric reduction k=%d s=%d rho=%s: eps = %s", k, s, rho, eps)
            return eps
        last = bad
        eps /= 2
    raise BudgetExhausted(f"No eps for k={k}, s={s}", last_counterexample=last, searched="eps")


# Compact basic closed sets


def _symmetric_parts(side: Side, profile: SimplicityProfile) -> tuple[list[Expr], list[Expr]]:
    qs = list(getattr(side, "polys", ()))
    k, s = len(qs), profile.s
    if not qs:
        raise PreconditionError("The set needs at least one defining polynomial")
    if not 1 <= s <= k:
        raise PreconditionError(f"s = {s} must lie between 1 and the number of polynomials {k}")
    return qs, elementary_symmetric_all(qs)


def _sign_values(qs: Sequence[Expr], point: Point) -> tuple[list[Fraction], list[Fraction]]:
    values = [q.evaluate(point) for q in qs]
    return values, elementary_symmetric_all(values)


def theorem1a_representation(
    target: Target, budget: BudgetConfig, profile: SimplicityProfile | None = None
) -> Representation:
    """``sigma_(k-s+1), ..., sigma_k`` of the defining polynomials plus a separator of the residual set."""
    side = _side_of(target)
    if not side.bounded:
        raise PreconditionError("Symmetric-function representations need a compact set")
    profile = profile or simplicity_profile(target, budget)
    qs, sigmas = _symmetric_parts(side, profile)
    k, s = len(qs), profile.s
    kept = sigmas[k - s :]

    def in_residual(x: Point) -> bool:
        values, sig = _sign_values(qs, x)
        return all(v >= 0 for v in sig[k - s :]) and any(v < 0 for v in values)

    residual = OracleSide(
        in_residual, side.window.dilate(Fraction(4), Fraction(1)), bounded=False, anchors=side.anchors, label="residual"
    )
    if residual.sample(budget.samples, budget.seed):
        sep = separate_disjoint(side, residual, budget)
        note = None
    else:
        sep = Separator(as_expr(1, side.dim), "constant", [], "sampled")
        note = "residual set has no sample points"
        logger.info("Residual set of %s looks empty; using the constant 1", side.label)
    polys = kept + [sep.poly]
    provenance = [_entry(i, p, f"sigma_{k - s + 1 + i}") for i, p in enumerate(kept)]
    provenance.append(_entry(s, sep.poly, f"residual {sep.construction}", sep.constants, note))
    return _require_size(Representation(polys, "t1a", target, provenance), s + 1)


def _separates(p: Expr, s: Side, t: Side, zero_set: Sequence[Point], budget: BudgetConfig) -> bool:
    zeros = {tuple(Fraction(c) for c in z) for z in zero_set}
    for seed in (budget.seed, budget.seed + 1):
        for x in s.sample(budget.samples, seed):
            v = p.evaluate(x)
            if v < 0 or (v == 0 and t.contains(x) and x not in zeros):
                return False
        for x in t.sample(budget.samples, seed):
            v = p.evaluate(x)
            if v > 0 or (v == 0 and x not in zeros):
                return False
    return True


def theorem1b_representation(
    target: Target, budget: BudgetConfig, profile: SimplicityProfile | None = None
) -> Representation:
    """``s`` polynomials when exactly ``s`` defining polynomials vanish only at finitely many points.

    Keeps ``sigma_(k-s+2), ..., sigma_k`` and separates the set from ``R = ({kept >= 0} minus S) ∪ points``,
    starting from ``sigma_(k-s+1)``, which already separates the two near every such point.
    """
    side = _side_of(target)
    if not side.bounded:
        raise PreconditionError("Symmetric-function representations need a compact set")
    profile = profile or simplicity_profile(target, budget)
    if profile.points is None:
        raise PreconditionError("The t1b pipeline needs finitely many points where exactly s polynomials vanish")
    qs, sigmas = _symmetric_parts(side, profile)
    k, s = len(qs), profile.s
    points = [tuple(Fraction(c) for c in x) for x in profile.points]
    local = sigmas[k - s]
    kept = sigmas[k - s + 1 :]
    point_set = set(points)

    def in_rest(x: Point) -> bool:
        if tuple(x) in point_set:
            return True
        values, sig = _sign_values(qs, x)
        return all(v >= 0 for v in sig[k - s + 1 :]) and any(v < 0 for v in values)

    rest = OracleSide(
        in_rest, side.window.dilate(Fraction(4), Fraction(1)), bounded=False, anchors=points, label="remainder"
    )
    if _separates(local, side, rest, points, budget):
        logger.info("sigma_%d already separates %s from R", k - s + 1, side.label)
        sep = Separator(local, "local-is-global", [], "sampled", tuple(points))
    else:
        if len(points) > 1:
            closest = min(
                sum((a - b) ** 2 for a, b in zip(x, y)) for i, x in enumerate(points) for y in points[i + 1 :]
            )
            start = sqrt_lower(closest) / 4
        else:
            start = Fraction(1, 2)
        radii = [find_local_radius(local, side, rest, x, start, budget) for x in points]
        radius = min(r.fraction for r in radii)
        sep = separate_finite_intersection(side, rest, points, [local] * len(points), radius, budget)
        sep.constants = radii + sep.constants
    polys = [sep.poly] + kept
    provenance = [_entry(0, sep.poly, f"separator {sep.construction}", sep.constants)]
    provenance += [_entry(i + 1, p, f"sigma_{k - s + 2 + i}") for i, p in enumerate(kept)]
    return _require_size(Representation(polys, "t1b", target, provenance), s)


# Polytopes and polyhedra


def polytope_representation(
    polytope: HPolyhedron, budget: BudgetConfig, cache: CushionCache | None = None
) -> Representation:
    """``d`` level polynomials of a full-dimensional polytope."""
    levels = polytope_levels(polytope, budget, cache)
    polys = [level.poly for level in levels]
    provenance = [_entry(level.k, level.poly, level.construction, level.constants, level.note) for level in levels]
    return _require_size(Representation(polys, "polytope", polytope, provenance), polytope.dim)


def _bounded_representation(polytope: HPolyhedron, budget: BudgetConfig, cache: CushionCache | None) -> Representation:
    if polytope.dim >= 3 and polytope.is_simple:
        return theorem1b_representation(polytope, budget)
    return polytope_representation(polytope, budget, cache)


def polyhedron_representation(
    polyhedron: HPolyhedron, budget: BudgetConfig, cache: CushionCache | None = None
) -> Representation:
    """``d - k`` polynomials for a full-dimensional polyhedron with ``k``-dimensional lineality space."""
    polyhedron.require_full_dimensional()
    split = polyhedron.lineality_split
    expected = polyhedron.dim - split.k
    if expected == 0:
        return Representation([], "polyhedron", polyhedron, [])
    base = split.base
    if len(base.forms) == base.dim:
        polys = [as_expr(f.to_poly(), base.dim) for f in base.forms]
        provenance = [_entry(i, p, "facet form") for i, p in enumerate(polys)]
    elif base.is_bounded:
        inner = _bounded_representation(base, budget, cache)
        polys, provenance = inner.polynomials, inner.provenance
    else:
        polys, provenance = _cone_lift(base, budget, cache)
    if split.k:
        images = [LinearForm(row, 0).to_poly() for row in split.projection]
        polys = [p.pullback(images) for p in polys]
        note = f"extended along {split.k} lineality directions"
        provenance = [entry.model_copy(update={"note": note}) for entry in provenance]
    return _require_size(Representation(list(polys), "polyhedron", polyhedron, list(provenance)), expected)


def _even(n: int) -> int:
    return n + (n % 2)


def _cone_lift(pointed: HPolyhedron, budget: BudgetConfig, cache: CushionCache | None):
    """Represent the section of the cone over ``pointed``, homogenize, fix the first polynomial, dehomogenize.

    The section polynomials are homogenized through the chart of the section and restricted to ``{t = 1}`` in
    one pass over their expression trees, so nothing is expanded.
    """
    n = pointed.dim
    lift = cone_over(pointed)
    section = _bounded_representation(lift.section, budget, cache)
    chart = lift.chart
    on_plane = [SparsePoly.variable(n, i) for i in range(n)] + [SparsePoly.constant(n, 1)]
    level = lift.level_form.to_poly()
    weight = level.substitute(on_plane)
    # Chart coordinates of z / level(z), times level(z).
    images = [
        (LinearForm(row, 0).to_poly() - level.scale(dot(row, chart.origin))).substitute(on_plane)
        for row in chart.back
    ]
    degrees = [_even(q.degree) for q in section.polynomials]
    homogenized = [homogenized_pullback(q, d, images, weight) for q, d in zip(section.polynomials, degrees)]

    q0, d0 = section.polynomials[0], degrees[0]
    rays = len(lift.ray_quadratics)
    r = SparsePoly.constant(n + 1, 1)
    for quad in lift.ray_quadratics:
        r = r * quad
    on_section = PolyhedralSide(lift.section, label="section")
    cached: dict[int, list[tuple[Vector, Fraction, Fraction]]] = {}

    def rows(seed: int):
        if seed not in cached:
            table = []
            for u in on_section.sample(budget.samples, seed):
                z = chart.to_ambient(u)
                value = q0.evaluate(u)
                if value < 0:
                    raise PreconditionError("First section polynomial is negative on the section", witness=z)
                table.append((z, value, r.evaluate(z)))
            cached[seed] = table
        return cached[seed]

    scales: dict[int, Fraction] = {}

    def scale_for(exponent: int) -> Fraction:
        if exponent not in scales:
            ratios = [value / rv**exponent for _, value, rv in rows(budget.seed) if rv > 0]
            bound = min(ratios, default=Fraction(4)) / 4
            c = Fraction(1)
            while c > bound:
                c /= 2
            scales[exponent] = c
        return scales[exponent]

    def check(exponent: int, seed: int) -> Point | None:
        c = scale_for(exponent)
        if c == 0:
            return chart.origin
        for z, value, rv in rows(seed):
            if value - c * rv**exponent < 0:
                return z
        return None

    found = find_exponent(check, budget, "N", step="cone lift", start=d0 // (2 * rays) + 1)
    big_n = found.as_int()
    c = scale_for(big_n)
    lifted = homogenized[0] * Leaf(weight) ** (2 * rays * big_n - d0) - (Leaf(r.substitute(on_plane)) ** big_n).scale(c)
    polys = [lifted] + homogenized[1:]
    constants = [FoundConstant.of("c", c, "sampled", "cone lift"), found]
    provenance = [_entry(0, polys[0], "cone-lift", constants, note=f"section via {section.pipeline}")]
    provenance += [
        _entry(i, p, "cone-lift homogenized", note=f"section via {section.pipeline}")
        for i, p in enumerate(polys[1:], 1)
    ]
    return polys, provenance


def choose_pipeline(polyhedron: HPolyhedron) -> str:
    """Route a polyhedron to the pipeline that fits it."""
    if not polyhedron.is_bounded or polyhedron.lineality_dim:
        return "polyhedron"
    if polyhedron.dim <= 2:
        return "polytope"
    if polyhedron.is_simple:
        return "t1b"
    return "polytope"


def represent(
    polyhedron: HPolyhedron,
    pipeline: str = "auto",
    budget: BudgetConfig | None = None,
    cache: CushionCache | None = None,
) -> Representation:
    """Run ``pipeline`` (``auto`` picks one with `choose_pipeline`) on a polyhedron."""
    budget = budget or BudgetConfig()
    if pipeline == "auto":
        pipeline = choose_pipeline(polyhedron)
        logger.info("Pipeline auto -> %s", pipeline)
    if pipeline == "t1a":
        return theorem1a_representation(polyhedron, budget)
    if pipeline == "t1b":
        return theorem1b_representation(polyhedron, budget)
    if pipeline == "polytope":
        return polytope_representation(polyhedron, budget, cache)
    if pipeline == "polyhedron":
        return polyhedron_representation(polyhedron, budget, cache)
    raise ValueError(f"Unknown pipeline {pipeline!r}; expected one of {', '.join(PIPELINES)}")


# Faces


def audit_vanishing_counts(
    rep: Representation, polyhedron: HPolyhedron, seed: int = 0, points: int = 4
) -> VanishingAudit:
    """Count, for every proper face, the polynomials vanishing on it; a representation needs ``d - dim F``."""
    lattice = polyhedron.face_lattice
    rng = np.random.default_rng(seed)
    faces = []
    for face in lattice.faces:
        if face.dim == polyhedron.dim:
            continue
        tests = face_points(polyhedron, face, rng, points)
        vanishing = [i for i, p in enumerate(rep.polynomials) if all(p.evaluate(x) == 0 for x in tests)]
        required = polyhedron.dim - face.dim
        faces.append(
            FaceAudit(
                face=face.index,
                dim=face.dim,
                witness=[format_rational(c) for c in face.witness],
                vanishing=vanishing,
                required=required,
                ok=len(vanishing) >= required,
            )
        )
    lower = polyhedron.dim - lattice.min_face_dim
    passed = all(f.ok for f in faces) and len(rep) >= lower
    if not passed:
        logger.warning("Vanishing audit failed for %s representation", rep.pipeline)
    return VanishingAudit(faces=faces, size=len(rep), lower_bound=lower, passed=passed)


def faithful_normal_form(rep: Representation) -> Representation:
    """Replace ``q_0, ..., q_(d-1)`` by ``p_i = sigma_(i+1)(q_0, ..., q_(d-1))``.

    Then ``p_i`` vanishes on the polyhedron only on faces of dimension at most ``i``; this is audited at the
    face witnesses.

    Raises:
        PreconditionError: If the representation does not have ``d`` polynomials of a polyhedron.
        VerificationFailure: If some ``p_i`` vanishes at the witness of a face of dimension above ``i``.
    """
    target = rep.target
    if not isinstance(target, HPolyhedron):
        raise PreconditionError("The faithful normal form is defined for polyhedra")
    d = target.dim
    if len(rep) != d:
        raise PreconditionError(f"The faithful normal form needs {d} polynomials, got {len(rep)}")
    sigmas = elementary_symmetric_all(rep.polynomials)
    counterexamples = []
    for face in target.face_lattice.faces:
        for i, p in enumerate(sigmas):
            if face.dim > i and p.evaluate(face.witness) == 0:
                counterexamples.append(
                    Counterexample(
                        point=[format_rational(c) for c in face.witness],
                        stratum=f"face {face.index} (dim {face.dim})",
                        values=["0"],
                        detail=f"p_{i} vanishes on a face of dimension {face.dim}",
                    )
                )
    if counterexamples:
        report = VerificationReport(mode="sampled", passed=False, counterexamples=counterexamples)
        raise VerificationFailure(f"Faithfulness audit failed at {len(counterexamples)} face witnesses", report)
    provenance = [_entry(i, p, f"sigma_{i + 1} of {rep.pipeline}") for i, p in enumerate(sigmas)]
    return Representation(sigmas, rep.pipeline, target, provenance, faithful=True)


def size_lower_bound(polyhedron: HPolyhedron) -> int:
    """No representation has fewer than ``d - k`` polynomials, ``k`` the lineality dimension."""
    return polyhedron.dim - polyhedron.lineality_dim

