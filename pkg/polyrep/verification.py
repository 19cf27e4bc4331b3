"""Independent checks of representations and separations.

Membership in a polyhedron is decided from its linear forms only, membership in a representation from its
polynomials only. Sampled checks evaluate both at stratified dyadic points; certified checks subdivide a box
region and decide each box by interval enclosure.
"""

import logging
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Literal, Sequence

import numpy as np

from polyrep.errors import PreconditionError
from polyrep.expr import Expr, as_expr
from polyrep.geometry import Face, HPolyhedron
from polyrep.interval import Box, Interval
from polyrep.linalg import Vector
from polyrep.models import Counterexample, VerificationConfig, VerificationReport
from polyrep.poly import LinearForm, Point, SparsePoly, format_rational
from polyrep.representations import Representation
from polyrep.separation import Separator
from polyrep.sides import (
    BasicClosedSide,
    PolyhedralSide,
    Side,
    along,
    face_points,
    random_direction,
    random_point,
)

logger = logging.getLogger(__name__)

Mode = Literal["sampled", "certified"]

MAX_COUNTEREXAMPLES = 20
RECESSION_MAX_DEGREE = 4096
RANDOM_DIRECTIONS = 16
EXTERIOR_STEPS = (4, 10, 20)


@dataclass(frozen=True)
class LabeledPoint:
    point: Vector
    stratum: str


@dataclass
class StratifiedSample:
    points: list[LabeledPoint]
    empty_strata: list[str] = field(default_factory=list)

    def counts(self) -> dict[str, int]:
        out: dict[str, int] = {}
        for lp in self.points:
            out[lp.stratum] = out.get(lp.stratum, 0) + 1
        return out

    def stratum(self, name: str) -> list[Vector]:
        return [lp.point for lp in self.points if lp.stratum == name]


def face_stratum(face: Face) -> str:
    return f"face {face.index} (dim {face.dim})"


def _fmt(point: Point) -> list[str]:
    return [format_rational(Fraction(c)) for c in point]


def stratified_sample(
    polyhedron: HPolyhedron,
    n: int = 2000,
    seed: int = 0,
    far_radii: Sequence[Fraction | int] = (1000, 1_000_000),
) -> StratifiedSample:
    """Points labeled ``interior``, ``face i (dim k)``, ``exterior`` and ``far``.

    Face points lie in the relative interior of their face (their active set is exactly the face's), exterior
    points in a dilate of the generator window minus the polyhedron, far points at the given radii along
    rays, lines and random directions. Empty strata are reported, not raised.
    """
    rng = np.random.default_rng(seed)
    side = PolyhedralSide(polyhedron)
    lattice = polyhedron.face_lattice
    proper = [f for f in lattice.faces if f.dim < polyhedron.dim]
    strata: dict[str, list[Vector]] = {}

    strata["interior"] = [
        x for x in side.interior_candidates(rng, max(1, n // 4)) if polyhedron.interior_contains(x)
    ]

    per_face = max(1, n // (4 * max(1, len(proper))))
    for face in proper:
        strata[face_stratum(face)] = [
            x for x in face_points(polyhedron, face, rng, per_face) if polyhedron.active_set(x) == face.active
        ]

    exterior: list[Vector] = []
    box = side.window.dilate(Fraction(3, 2), Fraction(1))
    for _ in range(4 * max(1, n // 4)):
        if len(exterior) >= max(1, n // 4):
            break
        x = random_point(rng, box)
        if not polyhedron.contains(x):
            exterior.append(x)
    for face in lattice.faces:
        if face.dim != polyhedron.dim - 1:
            continue
        (j,) = face.active
        normal = polyhedron.forms[j].coeffs
        for step in EXTERIOR_STEPS:
            exterior.append(along(face.witness, normal, -Fraction(1, 1 << step)))
    strata["exterior"] = exterior

    center = side.window.center
    directions = list(side.directions) + [random_direction(rng, polyhedron.dim) for _ in range(RANDOM_DIRECTIONS)]
    far = []
    for radius in far_radii:
        for u in directions:
            x = along(center, u, Fraction(radius))
            far.append(x)
            far.append(along(x, random_direction(rng, polyhedron.dim), Fraction(1)))
    strata["far"] = far

    seen: set[Vector] = set()
    points = []
    for name, xs in strata.items():
        for x in xs:
            if x not in seen:
                seen.add(x)
                points.append(LabeledPoint(x, name))
    empty = [name for name, xs in strata.items() if not xs]
    for name in empty:
        logger.warning("Stratum %s is empty", name)
    return StratifiedSample(points, empty)


# Representations


def _recession_checks(
    rep: Representation, polyhedron: HPolyhedron, rng: np.random.Generator
) -> tuple[int, list[Counterexample]]:
    """Compare eventual membership along directions from a vertex.

    The polyhedron keeps ``x0 + t u`` for all large ``t`` iff every facet normal has ``n . u >= 0``; the
    representation does iff every restricted polynomial is zero or has a positive leading coefficient.
    """
    if polyhedron.dim == 0 or any(p.degree > RECESSION_MAX_DEGREE for p in rep.polynomials):
        if polyhedron.dim:
            logger.warning("Skipping recession checks: degree above %d", RECESSION_MAX_DEGREE)
        return 0, []
    origin = polyhedron.vertices[0]
    lines = polyhedron.lines
    directions = list(polyhedron.rays) + list(lines) + [tuple(-c for c in u) for u in lines]
    directions += [random_direction(rng, polyhedron.dim) for _ in range(RANDOM_DIRECTIONS)]
    counterexamples = []
    for u in directions:
        expected = all(f.direction_value(u) >= 0 for f in polyhedron.forms)
        leading = []
        for p in rep.polynomials:
            coeffs = p.restrict_to_line(origin, u).coefficients()
            nonzero = [c for c in coeffs if c]
            leading.append(nonzero[-1] if nonzero else Fraction(0))
        observed = all(c >= 0 for c in leading)
        if expected != observed:
            counterexamples.append(
                Counterexample(
                    point=_fmt(u),
                    stratum="recession",
                    expected=expected,
                    observed=observed,
                    values=[format_rational(c) for c in leading],
                    detail="direction from the first vertex; values are leading coefficients",
                )
            )
    return len(directions), counterexamples


def _form_range(form: LinearForm, box: Box) -> Interval:
    total = Interval.point(form.const)
    for a, side in zip(form.coeffs, box.sides):
        total = total + side * a
    return total


def _polyhedron_status(polyhedron: HPolyhedron, box: Box) -> bool | None:
    """True if the box lies in the polyhedron, False if it misses it, None if undecided."""
    ranges = [_form_range(f, box) for f in polyhedron.forms]
    if all(r.lo >= 0 for r in ranges):
        return True
    if any(r.hi < 0 for r in ranges):
        return False
    return None


def _polys_status(polys: Sequence[Expr], box: Box) -> bool | None:
    enclosures = [p.enclose(box) for p in polys]
    if all(e.lo >= 0 for e in enclosures):
        return True
    if any(e.hi < 0 for e in enclosures):
        return False
    return None


@dataclass
class _BoxTally:
    certified: int = 0
    gap: int = 0
    unresolved: int = 0
    counterexamples: list[Counterexample] = field(default_factory=list)

    def add(self, counterexample: Counterexample) -> None:
        if len(self.counterexamples) < MAX_COUNTEREXAMPLES:
            self.counterexamples.append(counterexample)


def _require_certifiable(dim: int) -> None:
    if dim > 3:
        raise PreconditionError(f"Certified checks support dimension at most 3, got {dim}")
    if dim == 3:
        logger.warning("Certified check in dimension 3 is bounded by verification.max_boxes")


def _subdivide(region: Box, config: VerificationConfig, decide: Callable[[Box, bool], bool], tally: _BoxTally):
    """Run ``decide(box, at_limit)`` over an adaptive subdivision; it returns True when the box is settled."""
    resolution = config.resolution_value
    stack = [region]
    boxes = 0
    while stack:
        box = stack.pop()
        boxes += 1
        if boxes > config.max_boxes:
            tally.unresolved += len(stack) + 1
            logger.warning("Certified check stopped after %d boxes", config.max_boxes)
            return
        at_limit = box.max_width <= resolution
        if decide(box, at_limit) or at_limit:
            continue
        stack.extend(box.split())


def _certification_region(polyhedron: HPolyhedron) -> Box:
    if polyhedron.is_bounded:
        return polyhedron.bounding_box().dilate(Fraction(3, 2), Fraction(1))
    return PolyhedralSide(polyhedron).window.dilate(Fraction(3, 2), Fraction(1))


def _certify_representation(rep: Representation, polyhedron: HPolyhedron, config: VerificationConfig) -> _BoxTally:
    _require_certifiable(polyhedron.dim)
    tally = _BoxTally()

    def decide(box: Box, at_limit: bool) -> bool:
        target = _polyhedron_status(polyhedron, box)
        observed = _polys_status(rep.polynomials, box)
        if target is not None and observed == target:
            tally.certified += 1
            return True
        if target is not None and observed is not None:
            tally.add(Counterexample(point=_fmt(box.center), stratum="certified", expected=target, observed=observed))
            return True
        if not at_limit:
            return False
        center = box.center
        expected, inside = polyhedron.contains(center), rep.contains(center)
        if expected != inside:
            tally.add(Counterexample(point=_fmt(center), stratum="certified", expected=expected, observed=inside))
        elif target is None or _polyhedron_status(polyhedron, box.dilate(Fraction(3))) is None:
            tally.gap += 1
        else:
            tally.unresolved += 1
        return True

    if polyhedron.dim:
        _subdivide(_certification_region(polyhedron), config, decide, tally)
    return tally


def check_representation(
    rep: Representation,
    polyhedron: HPolyhedron,
    mode: Mode = "sampled",
    config: VerificationConfig | None = None,
    seed: int = 0,
) -> VerificationReport:
    """Compare ``{p >= 0}`` with the polyhedron at stratified samples, and on a box subdivision if certified.

    A certified pass has no counterexample and no unresolved box; boxes left undecided at the resolution
    limit next to the boundary form the reported gap.

    Raises:
        PreconditionError: On a dimension mismatch, or certified mode above dimension 3.
    """
    config = config or VerificationConfig()
    if rep.dim != polyhedron.dim:
        raise PreconditionError(f"Representation in R^{rep.dim} checked against a polyhedron in R^{polyhedron.dim}")
    start = time.perf_counter()
    sample = stratified_sample(polyhedron, config.samples, seed, config.far_radii)
    counterexamples: list[Counterexample] = []
    for lp in sample.points:
        expected = polyhedron.contains(lp.point)
        values = [p.evaluate(lp.point) for p in rep.polynomials]
        observed = all(v >= 0 for v in values)
        if expected != observed and len(counterexamples) < MAX_COUNTEREXAMPLES:
            counterexamples.append(
                Counterexample(
                    point=_fmt(lp.point),
                    stratum=lp.stratum,
                    expected=expected,
                    observed=observed,
                    values=[format_rational(v) for v in values],
                )
            )
    recession, recession_failures = _recession_checks(rep, polyhedron, np.random.default_rng(seed + 1))
    counterexamples.extend(recession_failures)

    report = VerificationReport(
        mode=mode,
        passed=not counterexamples,
        strata=sample.counts(),
        empty_strata=sample.empty_strata,
        recession_checks=recession,
        counterexamples=counterexamples,
    )
    if mode == "certified":
        tally = _certify_representation(rep, polyhedron, config)
        report = report.model_copy(
            update={
                "certified_boxes": tally.certified,
                "gap_boxes": tally.gap,
                "unresolved_boxes": tally.unresolved,
                "resolution": config.resolution,
                "counterexamples": counterexamples + tally.counterexamples,
                "passed": not counterexamples and not tally.counterexamples and not tally.unresolved,
            }
        )
    report.seconds = time.perf_counter() - start
    log = logger.info if report.passed else logger.warning
    log(
        "%s check of %d polynomials: %s (%d samples, %d counterexamples)",
        mode,
        len(rep),
        "passed" if report.passed else "failed",
        len(sample.points),
        len(report.counterexamples),
    )
    return report


# Separations


@dataclass
class SeparationContract:
    """``p >= 0`` on ``s``, ``p <= 0`` on ``t``, and ``p`` vanishes on ``s ∪ t`` only inside the zero set.

    The zero set is a finite point list, a membership predicate, or both.
    """

    s: Side
    t: Side
    p: Expr
    zero_set: tuple[Vector, ...] = ()
    zero_oracle: Callable[[Point], bool] | None = None

    def __post_init__(self) -> None:
        if isinstance(self.p, SparsePoly):
            self.p = as_expr(self.p, self.s.dim)
        if self.s.dim != self.t.dim or self.p.dim != self.s.dim:
            raise PreconditionError("Separation contract sides and polynomial must share a dimension")
        self.zero_set = tuple(tuple(Fraction(c) for c in z) for z in self.zero_set)

    @classmethod
    def for_separator(cls, s: Side, t: Side, separator: Separator) -> "SeparationContract":
        return cls(s, t, separator.poly, separator.zero_set)

    def allows_zero(self, point: Point) -> bool:
        point = tuple(Fraction(c) for c in point)
        if point in self.zero_set:
            return True
        return self.zero_oracle is not None and self.zero_oracle(point)


def _side_polys(side: Side) -> tuple[Expr, ...]:
    polys = getattr(side, "polys", None)
    if polys is None:
        raise PreconditionError(f"Certified separation checks need {side.label} given by polynomials")
    return tuple(polys)


def _side_status(side: Side, polys: Sequence[Expr], box: Box) -> bool | None:
    if side.is_empty:
        return False
    status = _polys_status(polys, box)
    if isinstance(side, BasicClosedSide) and side.bounded and status is not False:
        window = side.window
        if any(b.hi < w.lo or b.lo > w.hi for b, w in zip(box.sides, window.sides)):
            return False
        if status and not all(w.lo <= b.lo and b.hi <= w.hi for b, w in zip(box.sides, window.sides)):
            return None
    return status


def _certify_separation(contract: SeparationContract, config: VerificationConfig) -> _BoxTally:
    dim = contract.s.dim
    _require_certifiable(dim)
    s_polys = () if contract.s.is_empty else _side_polys(contract.s)
    t_polys = () if contract.t.is_empty else _side_polys(contract.t)
    windows = [side.window for side in (contract.s, contract.t) if not side.is_empty]
    lower = [min(w.sides[i].lo for w in windows) for i in range(dim)]
    upper = [max(w.sides[i].hi for w in windows) for i in range(dim)]
    region = Box.from_bounds(lower, upper).dilate(Fraction(1), Fraction(1, 8))
    tally = _BoxTally()

    def near_zero_set(box: Box) -> bool:
        grown = box.dilate(Fraction(3))
        return any(grown.contains(z) for z in contract.zero_set)

    def decide(box: Box, at_limit: bool) -> bool:
        in_s = _side_status(contract.s, s_polys, box)
        in_t = _side_status(contract.t, t_polys, box)
        value = contract.p.enclose(box)
        if (in_s and value.hi < 0) or (in_t and value.lo > 0):
            tally.add(Counterexample(point=_fmt(box.center), stratum="certified", values=[str(value)]))
            return True
        if (in_s is False or value.lo > 0) and (in_t is False or value.hi < 0):
            tally.certified += 1
            return True
        if not at_limit:
            return False
        center = box.center
        v = contract.p.evaluate(center)
        on_s, on_t = contract.s.contains(center), contract.t.contains(center)
        bad = (on_s and v < 0) or (on_t and v > 0) or (v == 0 and (on_s or on_t) and not contract.allows_zero(center))
        if bad:
            tally.add(Counterexample(point=_fmt(center), stratum="certified", values=[format_rational(v)]))
            return True
        grown = box.dilate(Fraction(3))
        mixed = (
            _side_status(contract.s, s_polys, grown) is None
            or _side_status(contract.t, t_polys, grown) is None
            or near_zero_set(box)
        )
        if mixed:
            tally.gap += 1
        else:
            tally.unresolved += 1
        return True

    _subdivide(region, config, decide, tally)
    return tally


def check_separation(
    contract: SeparationContract,
    mode: Mode = "sampled",
    config: VerificationConfig | None = None,
    seed: int = 0,
) -> VerificationReport:
    """Check the sign and zero-set conditions of a separation.

    Sampled mode draws from both sides (far shells included for unbounded sides); a sample with ``p`` exactly
    zero outside the zero set is a counterexample. Certified mode additionally needs both sides given by
    polynomials.
    """
    config = config or VerificationConfig()
    start = time.perf_counter()
    far_radii = [Fraction(r) for r in config.far_radii]
    counterexamples: list[Counterexample] = []
    strata: dict[str, int] = {}
    empty: list[str] = []

    def flag(point: Vector, stratum: str, value: Fraction, detail: str) -> None:
        if len(counterexamples) < MAX_COUNTEREXAMPLES:
            counterexamples.append(
                Counterexample(point=_fmt(point), stratum=stratum, values=[format_rational(value)], detail=detail)
            )

    for name, side, sign, offset in (("S", contract.s, 1, 0), ("T", contract.t, -1, 1)):
        points = side.sample(config.samples, seed + offset, far_radii)
        strata[name] = len(points)
        if not points:
            empty.append(name)
        for x in points:
            v = contract.p.evaluate(x)
            if sign * v < 0:
                flag(x, name, v, f"p has the wrong sign on {side.label}")
            elif v == 0 and not contract.allows_zero(x):
                flag(x, f"{name} zero set", v, "p vanishes outside the declared zero set")

    report = VerificationReport(
        mode=mode, passed=not counterexamples, strata=strata, empty_strata=empty, counterexamples=counterexamples
    )
    if mode == "certified":
        tally = _certify_separation(contract, config)
        report = report.model_copy(
            update={
                "certified_boxes": tally.certified,
                "gap_boxes": tally.gap,
                "unresolved_boxes": tally.unresolved,
                "resolution": config.resolution,
                "counterexamples": counterexamples + tally.counterexamples,
                "passed": not counterexamples and not tally.counterexamples and not tally.unresolved,
            }
        )
    report.seconds = time.perf_counter() - start
    logger.info("Separation %s check: %s", mode, "passed" if report.passed else "failed")
    return report
