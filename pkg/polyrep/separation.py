"""Separating polynomials.

``p`` separates ``S`` from ``T`` when ``p >= 0`` on ``S``, ``p <= 0`` on ``T`` and ``p`` vanishes on ``S ∪ T`` only
on the Zariski closure of ``S ∩ T``. The constructions below build such polynomials for disjoint sides, glue
local separators around finitely many contact points and repair the sign of a candidate with a cushion.

Every "large enough" exponent is found by `find_exponent`: doubling, bisection, then re-validation on a fresh
sample. The evidence for such constants is therefore ``"sampled"``.
"""

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

from polyrep.cushion import mu_poly
from polyrep.errors import BudgetExhausted, PreconditionError
from polyrep.expr import Expr, Leaf, as_expr
from polyrep.geometry import HPolyhedron
from polyrep.interval import Box, sqrt_lower, sqrt_upper
from polyrep.linalg import Vector
from polyrep.models import BudgetConfig, Evidence, FoundConstant
from polyrep.poly import LinearForm, Point, SparsePoly
from polyrep.sides import OracleSide, Side, union

logger = logging.getLogger(__name__)

SearchBudget = BudgetConfig
Check = Callable[[int, int], Point | None]


@dataclass
class Separator:
    """A separating polynomial together with the constants chosen while building it."""

    poly: Expr
    construction: str
    constants: list[FoundConstant] = field(default_factory=list)
    evidence: Evidence = "sampled"
    zero_set: tuple[Vector, ...] = ()

    @property
    def dim(self) -> int:
        return self.poly.dim

    def evaluate(self, point: Point) -> Fraction:
        return self.poly.evaluate(point)


# Exponent search


def find_exponent(
    check: Check, budget: SearchBudget, name: str, step: str | None = None, start: int = 1
) -> FoundConstant:
    """Find an exponent passing ``check`` by doubling, then bisection.

    ``check(n, seed)`` returns a counterexample point, or None when ``n`` passes on the samples drawn with
    ``seed``. Doubling stops at ``budget.max_exponent``, which is always tried itself. The accepted value is
    re-checked with a fresh seed, both at ``n`` and ``n + 1``; a failure there resumes the doubling above it.

    Raises:
        BudgetExhausted: If nothing up to ``budget.max_exponent`` survives re-validation.
    """
    seed = budget.seed
    cap = budget.max_exponent
    n = max(1, start)
    last_bad: Point | None = None
    while n <= cap:
        low: int | None = None
        candidate = n
        while True:
            bad = check(candidate, seed)
            logger.debug("%s: trying %d -> %s", name, candidate, "pass" if bad is None else "counterexample")
            if bad is None:
                break
            low, last_bad = candidate, bad
            if candidate >= cap:
                raise BudgetExhausted(f"No {name} up to {cap} passes", last_counterexample=last_bad, searched=name)
            candidate = min(2 * candidate, cap)
        if budget.refine and low is not None:
            high = candidate
            while high - low > 1:
                mid = (low + high) // 2
                if check(mid, seed) is None:
                    high = mid
                else:
                    low = mid
            candidate = high
        fresh = check(candidate, seed + 1)
        if fresh is None:
            fresh = check(candidate + 1, seed + 1)
        if fresh is None:
            logger.info("Found %s = %d%s", name, candidate, f" ({step})" if step else "")
            return FoundConstant.of(name, candidate, "sampled", step)
        logger.debug("%s = %d fails re-validation at %s", name, candidate, fresh)
        last_bad = fresh
        if candidate >= cap:
            break
        n = min(2 * candidate, cap)
    raise BudgetExhausted(f"No {name} up to {cap} passes", last_counterexample=last_bad, searched=name)


class _Samples:
    """Side samples memoized per seed, so every candidate exponent sees the same points."""

    def __init__(self, budget: SearchBudget):
        self.budget = budget
        self._cache: dict[tuple[int, int], list[Vector]] = {}

    def __call__(self, side: Side, seed: int) -> list[Vector]:
        key = (id(side), seed)
        if key not in self._cache:
            self._cache[key] = side.sample(self.budget.samples, np.random.default_rng(seed))
        return self._cache[key]


def ball_side(center: Point, radius: Fraction, label: str = "ball") -> OracleSide:
    center = tuple(Fraction(c) for c in center)
    r2 = radius * radius
    dist = SparsePoly.squared_distance(center)
    return OracleSide(
        lambda y: dist.evaluate(y) <= r2,
        Box.cube(len(center), radius, center),
        bounded=True,
        anchors=(center,),
        label=label,
    )


def _squared_distance(a: Point, b: Point) -> Fraction:
    return sum(((Fraction(x) - Fraction(y)) ** 2 for x, y in zip(a, b)), Fraction(0))


def _power_of_two_at_least(value: Fraction) -> Fraction:
    if value <= 0:
        raise ValueError(f"Expected a positive value, got {value}")
    result = Fraction(1)
    while result < value:
        result *= 2
    while result / 2 >= value:
        result /= 2
    return result


def _power_of_two_at_most(value: Fraction) -> Fraction:
    result = _power_of_two_at_least(value)
    return result if result == value else result / 2


def _bit_log2(value: Fraction) -> int:
    """``log2(value)`` up to one, for ``value > 0``."""
    return value.numerator.bit_length() - value.denominator.bit_length()


def basic_polys(side: Side) -> tuple[Expr, ...]:
    polys = getattr(side, "polys", None)
    if not polys:
        raise PreconditionError(f"{side.label} is not described by polynomial inequalities")
    return tuple(polys)


def check_disjoint(s: Side, t: Side, samples: _Samples, seed: int) -> None:
    """Sampled disjointness check.

    Raises:
        PreconditionError: With a common point as witness.
    """
    for x in samples(s, seed):
        if t.contains(x):
            raise PreconditionError(f"{s.label} and {t.label} intersect", witness=x)
    for x in samples(t, seed):
        if s.contains(x):
            raise PreconditionError(f"{s.label} and {t.label} intersect", witness=x)


# Constructions


def separate_disjoint(s: Side, t: Side, budget: SearchBudget) -> Separator:
    """Separate a compact basic closed ``S`` from a disjoint closed ``T``.

    Each defining polynomial is scaled by a power of two ``rho_i`` with ``f_i(S) ⊆ [0, 2 rho_i]``, certified by
    ``S.upper_bound``. With ``y_i = f_i / rho_i`` the result is ``k + 1/m - sum_i (y_i - 1)^(2m)``, which is at
    least ``1/m`` on ``S``; ``m`` is raised until it is negative on every sample of ``T``.

    Raises:
        PreconditionError: If ``S`` is not compact and basic closed, or a sample lies in both sides.
        BudgetExhausted: If no ``m`` works within the budget.
    """
    if not s.bounded:
        raise PreconditionError(f"{s.label} must be compact")
    polys = basic_polys(s)
    dim = s.dim
    if t.is_empty:
        return Separator(as_expr(1, dim), "disjoint", [], "exact")
    samples = _Samples(budget)
    check_disjoint(s, t, samples, budget.seed)

    scales = []
    for p in polys:
        hi = s.upper_bound(p)
        scales.append(_power_of_two_at_least(hi / 2) if hi > 0 else Fraction(1))
    k = len(polys)
    values: dict[int, list[tuple[Vector, list[Fraction]]]] = {}

    def t_values(seed: int) -> list[tuple[Vector, list[Fraction]]]:
        if seed not in values:
            pts = samples(t, seed)
            for x in pts:
                if s.contains(x):
                    raise PreconditionError(f"{s.label} and {t.label} intersect", witness=x)
            values[seed] = [(x, [p.evaluate(x) / c - 1 for p, c in zip(polys, scales)]) for x in pts]
        return values[seed]

    def check(m: int, seed: int) -> Point | None:
        bound = k + Fraction(1, m)
        for x, shifted in t_values(seed):
            if sum(v ** (2 * m) for v in shifted) <= bound:
                return x
        return None

    found = find_exponent(check, budget, "m", step="separate_disjoint")
    m = found.as_int()
    total = as_expr(k + Fraction(1, m), dim)
    for p, c in zip(polys, scales):
        total = total - (p.scale(1 / c) - 1) ** (2 * m)
    constants = [FoundConstant.of(f"rho_{i}", c, "certified", "separate_disjoint") for i, c in enumerate(scales)]
    return Separator(total, "disjoint", constants + [found])


def merge_local_separators(
    points: Sequence[Point],
    local_separators: Sequence[Expr | SparsePoly],
    rho: Fraction,
    delta: Fraction,
    s: Side,
    t: Side,
    budget: SearchBudget,
) -> Separator:
    """Glue separators valid on ``B(x_i, rho)`` into ``prod_i (p_i + (r_i / delta^2)^N)``.

    ``r_i = ||X - x_i||^2``. ``N`` makes each added term at most ``|p_i| / 2`` on ``(S ∪ T) ∩ B(x_i, rho)`` and
    keeps every factor positive on the other balls.

    Raises:
        PreconditionError: Unless ``rho < delta < ||x_i - x_j|| - rho`` for all ``i != j``.
        BudgetExhausted: If no ``N`` works within the budget.
    """
    pts = [tuple(Fraction(c) for c in x) for x in points]
    if len(pts) != len(local_separators):
        raise ValueError("One local separator per point is required")
    if not pts:
        raise ValueError("merge_local_separators needs at least one point")
    rho, delta = Fraction(rho), Fraction(delta)
    if not 0 < rho < delta:
        raise PreconditionError(f"Need 0 < rho < delta, got rho={rho}, delta={delta}")
    for i, a in enumerate(pts):
        for b in pts[i + 1 :]:
            if (delta + rho) ** 2 >= _squared_distance(a, b):
                raise PreconditionError(f"Points {a} and {b} are closer than delta + rho", witness=a)
    dim = len(pts[0])
    seps = [as_expr(p, dim) for p in local_separators]
    weights = [SparsePoly.squared_distance(x).scale(1 / delta**2) for x in pts]
    balls = [ball_side(x, rho, f"ball {i}") for i, x in enumerate(pts)]
    samples = _Samples(budget)
    cache: dict[int, list[tuple[list[tuple[Vector, Fraction, Fraction]], list[tuple[Vector, Fraction, Fraction]]]]] = {}

    def prepared(seed: int):
        if seed not in cache:
            per_point = []
            for i, (sep, w) in enumerate(zip(seps, weights)):
                near = [
                    x for x in samples(balls[i], seed) + samples(s, seed) + samples(t, seed)
                    if balls[i].contains(x) and (s.contains(x) or t.contains(x))
                ]
                others = [x for j, ball in enumerate(balls) if j != i for x in samples(ball, seed)]
                per_point.append((
                    [(x, sep.evaluate(x), w.evaluate(x)) for x in dict.fromkeys(near)],
                    [(x, sep.evaluate(x), w.evaluate(x)) for x in others],
                ))
            cache[seed] = per_point
        return cache[seed]

    def check(n: int, seed: int) -> Point | None:
        for near, others in prepared(seed):
            for x, p, w in near:
                if 2 * w**n > abs(p):
                    return x
            for x, p, w in others:
                if p + w**n <= 0:
                    return x
        return None

    found = find_exponent(check, budget, "N", step="merge_local_separators")
    n = found.as_int()
    product = as_expr(1, dim)
    for sep, w in zip(seps, weights):
        product = product * (sep + Leaf(w) ** n)
    constants = [
        FoundConstant.of("rho", rho, "exact", "merge_local_separators"),
        FoundConstant.of("delta", delta, "exact", "merge_local_separators"),
        found,
    ]
    return Separator(product, "merged", constants, zero_set=tuple(pts))


def globalize_local_separator(
    s: Side,
    t: Side,
    r: Expr | SparsePoly,
    f: Expr | SparsePoly,
    eps: Fraction,
    budget: SearchBudget,
    focus: Sequence[Point] = (),
    focus_radius: Fraction = Fraction(1, 2),
) -> Separator:
    """Extend a separator ``f`` valid on ``{r <= eps}`` to ``f + (2r / eps)^N g``.

    ``r >= 0`` must vanish on ``S ∪ T`` exactly on ``S ∩ T``. ``g`` separates the parts of ``S`` and ``T`` with
    ``r >= eps / 4``; ``N`` makes ``f`` dominate near the zero set of ``r`` and the second term dominate
    from ``r = eps`` on. Only ``r / eps`` enters, so any ``eps > 0`` works. ``focus`` points get dense
    sampling on balls of ``focus_radius``.

    Raises:
        PreconditionError: If ``eps <= 0``, a sample shows ``r < 0``, or ``f`` has the wrong sign on a sample
            of ``S`` or ``T`` with ``r <= eps``.
        BudgetExhausted: If no ``N`` works within the budget.
    """
    dim = s.dim
    eps = Fraction(eps)
    if eps <= 0:
        raise PreconditionError(f"Need eps > 0, got {eps}")
    r_expr, f_expr = as_expr(r, dim), as_expr(f, dim)
    quarter = eps / 4
    g = separate_disjoint(
        s.restrict(r_expr - quarter, label=f"{s.label}|far"),
        t.restrict(r_expr - quarter, label=f"{t.label}|far"),
        budget,
    )
    samples = _Samples(budget)
    focus_balls = [ball_side(x, Fraction(focus_radius)) for x in focus]
    cache: dict[int, list[tuple[Vector, Fraction, Fraction, Fraction, Fraction, bool, bool]]] = {}

    def prepared(seed: int):
        if seed not in cache:
            pts = samples(s, seed) + samples(t, seed) + [x for b in focus_balls for x in samples(b, seed)]
            rows = []
            for x in dict.fromkeys(pts):
                in_s, in_t = s.contains(x), t.contains(x)
                if not (in_s or in_t):
                    continue
                rx = r_expr.evaluate(x)
                if rx < 0:
                    raise PreconditionError("r is negative on a sample", witness=x)
                fx = f_expr.evaluate(x)
                if rx <= eps and ((in_s and fx < 0) or (in_t and fx > 0)):
                    raise PreconditionError("f does not separate S from T where r <= eps", witness=x)
                rows.append((x, fx, g.evaluate(x), 2 * rx / eps, rx, in_s, in_t))
            cache[seed] = rows
        return cache[seed]

    def check(n: int, seed: int) -> Point | None:
        for x, fx, gx, wx, rx, in_s, in_t in prepared(seed):
            term = wx**n * gx
            if rx <= quarter and 2 * abs(term) > abs(fx):
                return x
            if rx >= eps and 2 * abs(fx) > abs(term):
                return x
            value = fx + term
            if (in_s and value < 0) or (in_t and value > 0):
                return x
        return None

    found = find_exponent(check, budget, "N", step="globalize_local_separator")
    n = found.as_int()
    poly = f_expr + (r_expr * (2 / eps)) ** n * g.poly
    constants = [FoundConstant.of("eps", eps, "exact", "globalize_local_separator"), found] + g.constants
    return Separator(poly, "globalized", constants)


def _local_eps(
    s: Side, t: Side, points: Sequence[Vector], r: SparsePoly, rho: Fraction, delta: Fraction, budget: SearchBudget
) -> Fraction:
    """A power of two ``eps`` with ``{r <= eps}`` inside the balls ``B(x_i, rho)`` on every sample.

    Starts from half the lower bound ``rho^2 prod_j (||x_i - x_j|| - rho)^2`` of ``r`` on the spheres around
    the points and lowers it below ``r / 2`` at the samples of ``S`` and ``T`` outside the balls.
    """
    r2 = rho * rho
    eps: Fraction | None = None
    for i, a in enumerate(points):
        bound = r2
        for j, b in enumerate(points):
            if j != i:
                bound *= (sqrt_lower(_squared_distance(a, b)) - rho) ** 2
        eps = bound if eps is None else min(eps, bound)
    eps = eps / 2
    samples = _Samples(budget)
    focus = [ball_side(x, delta) for x in points]
    for seed in (budget.seed, budget.seed + 1):
        pts = samples(s, seed) + samples(t, seed) + [x for b in focus for x in samples(b, seed)]
        for x in dict.fromkeys(pts):
            if all(_squared_distance(x, c) > r2 for c in points) and (s.contains(x) or t.contains(x)):
                eps = min(eps, r.evaluate(x) / 2)
    return _power_of_two_at_most(eps)


def _merged_scale(
    points: Sequence[Vector], local_separators: Sequence[Expr], delta: Fraction, exponent: int
) -> Fraction:
    """Power of two that brings the merged product to order one next to the points.

    Next to ``x_i`` the product behaves like ``p_i`` times the other factors at ``x_i``; the scale sits between
    the smallest and the largest of these cofactors.
    """
    logs = []
    for i, a in enumerate(points):
        value = Fraction(1)
        for j, (b, sep) in enumerate(zip(points, local_separators)):
            if j != i:
                value *= sep.evaluate(a) + (_squared_distance(a, b) / delta**2) ** exponent
        if value > 0:
            logs.append(_bit_log2(value))
    if not logs:
        return Fraction(1)
    e = (min(logs) + max(logs)) // 2
    return Fraction(1, 2**e) if e >= 0 else Fraction(2 ** (-e))


def separate_finite_intersection(
    s: Side,
    t: Side,
    points: Sequence[Point],
    local_separators: Sequence[Expr | SparsePoly],
    local_radius: Fraction,
    budget: SearchBudget,
) -> Separator:
    """Separate ``S`` from ``T`` when they meet in the finite set ``points``.

    ``local_separators[i]`` must separate ``S`` from ``T`` on ``B(points[i], local_radius)``. The local pieces
    are merged and scaled by a power of two, then globalized with ``r = prod_i ||X - x_i||^2`` and an ``eps``
    that keeps ``{r <= eps}`` inside the merge balls.
    """
    if not points:
        return separate_disjoint(s, t, budget)
    pts = [tuple(Fraction(c) for c in x) for x in points]
    local_radius = Fraction(local_radius)
    if len(pts) > 1:
        closest = min(_squared_distance(a, b) for i, a in enumerate(pts) for b in pts[i + 1 :])
        delta = sqrt_lower(closest) / 2
    else:
        delta = 2 * local_radius
    rho = min(local_radius, 3 * delta / 4)
    merged = merge_local_separators(pts, local_separators, rho, delta, s, t, budget)
    exponent = next(c for c in merged.constants if c.name == "N").as_int()
    seps = [as_expr(p, s.dim) for p in local_separators]
    scale = _merged_scale(pts, seps, delta, exponent)
    r = SparsePoly.constant(s.dim, 1)
    for x in pts:
        r = r * SparsePoly.squared_distance(x)
    eps = _local_eps(s, t, pts, r, rho, delta, budget)
    glob = globalize_local_separator(s, t, r, merged.poly.scale(scale), eps, budget, focus=pts, focus_radius=delta)
    constants = (
        merged.constants
        + [
            FoundConstant.of("scale", scale, "exact", "separate_finite_intersection"),
            FoundConstant.of("eps", eps, "sampled", "separate_finite_intersection"),
        ]
        + [c for c in glob.constants if c.name != "eps"]
    )
    return Separator(glob.poly, "finite-intersection", constants, zero_set=tuple(pts))


def certified_minimum(
    h: Expr | SparsePoly, side: Side, floor: Fraction = Fraction(0), max_boxes: int = 20_000
) -> Fraction | None:
    """Lower bound of ``h`` on the part of ``side`` inside its window, by interval subdivision.

    Boxes the side certainly misses are dropped. A box is split while its enclosure of ``h`` is not positive or
    stays below ``floor``; past ``max_boxes`` boxes, positive enclosures are accepted as they are. Returns None
    when no box can meet the side.

    Raises:
        BudgetExhausted: If a box that may meet the side keeps a nonpositive enclosure.
    """
    h_expr = as_expr(h, side.dim)
    best: Fraction | None = None
    stack = [side.window]
    seen = 0
    while stack:
        box = stack.pop()
        if not side.may_meet(box):
            continue
        seen += 1
        low = h_expr.enclose(box).lo
        if low > 0 and (low >= floor or seen > max_boxes):
            best = low if best is None else min(best, low)
            continue
        if seen > max_boxes:
            raise BudgetExhausted(
                f"No positive lower bound on {side.label} within {max_boxes} boxes",
                last_counterexample=box.center,
                searched="alpha",
            )
        stack.extend(box.split())
    return best


def _cushion_alpha(h: Expr, t2: Side, sampled: Fraction | None) -> tuple[Fraction | None, Evidence]:
    """Lower bound of ``h`` on ``T2``: certified when ``T2`` is bounded, else also through its far samples."""
    if t2.is_empty:
        return None, "exact"
    floor = sampled / 2 if sampled is not None else Fraction(0)
    if t2.bounded:
        return certified_minimum(h, t2, floor), "certified"
    try:
        window = certified_minimum(h, t2, floor)
    except BudgetExhausted as exc:
        logger.warning("Interval bound of h on %s failed: %s", t2.label, exc)
        window = None
    found = [v for v in (window, sampled) if v is not None]
    return (min(found) if found else None), "sampled"


def adjust_with_cushion(
    s: Side,
    t1: Side,
    t2: Side,
    h: Expr | SparsePoly,
    f: Expr | SparsePoly,
    budget: SearchBudget,
) -> Separator:
    """Push ``f`` below zero on ``T2`` without changing its sign pattern on ``S`` and ``T1``.

    Returns ``p = f + q h^l [mu(h - delta)]^(l + m)`` with ``q`` separating ``S`` from
    ``(T1 ∩ {h >= delta}) ∪ T2`` and ``delta`` a quarter of a lower bound ``alpha`` of ``h`` on ``T2``. Then
    ``p >= f`` on ``S``, ``sign p <= sign f`` on ``T1`` and ``p < 0`` on ``T2``. ``l`` is searched on ``T1``
    first, then ``m`` on ``T2``. When ``T2`` is empty ``f`` itself is returned.

    Raises:
        PreconditionError: If a sample contradicts the hypotheses (``S`` meets ``T2``, ``h <= 0`` on ``T2``,
            or ``f`` vanishes on ``T1`` outside ``S``).
        BudgetExhausted: If ``alpha`` or an exponent cannot be found within the budget.
    """
    dim = s.dim
    h_expr, f_expr = as_expr(h, dim), as_expr(f, dim)
    samples = _Samples(budget)
    seed = budget.seed

    t2_points = [] if t2.is_empty else samples(t2, seed)
    sampled: Fraction | None = None
    for x in t2_points:
        hx = h_expr.evaluate(x)
        if hx <= 0:
            raise PreconditionError("h is not positive on T2", witness=x)
        sampled = hx if sampled is None else min(sampled, hx)
    for x in samples(s, seed):
        if t2.contains(x):
            raise PreconditionError("S meets T2", witness=x)
    for x in samples(t1, seed):
        if f_expr.evaluate(x) == 0 and not s.contains(x):
            raise PreconditionError("f vanishes on T1 outside S", witness=x)

    alpha, evidence = _cushion_alpha(h_expr, t2, sampled)
    if alpha is None:
        if t2_points:
            raise BudgetExhausted(f"No lower bound of h on {t2.label}", searched="alpha")
        logger.info("%s is empty, keeping f", t2.label)
        return Separator(f_expr, "cushion-adjusted", [], "exact")

    delta = alpha / 4
    mu = mu_poly(delta, 2 * delta)
    cushion = (h_expr - delta).compose(mu)
    t0 = t1.restrict(h_expr - delta, label="T0")
    q = separate_disjoint(s, union([t0, t2], dim), budget)

    cache: dict[int, list[tuple[Vector, Fraction, Fraction, Fraction, Fraction, bool]]] = {}

    def prepared(seed: int):
        if seed not in cache:
            rows = []
            for side, far in ((t1, False), (t2, True)):
                if side.is_empty:
                    continue
                for x in samples(side, seed):
                    rows.append((x, f_expr.evaluate(x), q.evaluate(x), h_expr.evaluate(x), cushion.evaluate(x), far))
            cache[seed] = rows
        return cache[seed]

    def keeps_sign(fx: Fraction, value: Fraction) -> bool:
        return not ((fx < 0 and value >= 0) or (fx == 0 and value > 0))

    def check_l(l: int, seed: int) -> Point | None:
        for x, fx, qx, hx, cx, far in prepared(seed):
            if not far and not keeps_sign(fx, fx + qx * (hx * cx) ** l):
                return x
        return None

    found_l = find_exponent(check_l, budget, "l", step="adjust_with_cushion")
    l = found_l.as_int()

    def check_m(m: int, seed: int) -> Point | None:
        for x, fx, qx, hx, cx, far in prepared(seed):
            value = fx + qx * hx**l * cx ** (l + m)
            if (far and value >= 0) or (not far and not keeps_sign(fx, value)):
                return x
        return None

    found_m = find_exponent(check_m, budget, "m", step="adjust_with_cushion")
    m = found_m.as_int()
    poly = f_expr + q.poly * h_expr**l * cushion ** (l + m)
    constants = [
        FoundConstant.of("alpha", alpha, evidence, "adjust_with_cushion"),
        FoundConstant.of("delta", delta, "exact", "adjust_with_cushion"),
        found_l,
        found_m,
    ] + q.constants
    return Separator(poly, "cushion-adjusted", constants)


# Local separators


def local_vertex_separator(
    polytope: HPolyhedron, vertex_index: int, form: LinearForm, keep_positive: Sequence[LinearForm] = ()
) -> tuple[SparsePoly, Fraction]:
    """``l_x - ||X - x||^2`` and a radius on which it separates the polytope from ``{l_x <= 0}``.

    ``form`` vanishes at the vertex and is positive at every other vertex. The radius keeps the ball inside
    ``{l_x >= a ||X - x||}`` on the polytope (``a`` from the edges at ``x``) and away from the facets not
    through ``x`` and from every form in ``keep_positive``.
    """
    x = polytope.vertices[vertex_index]
    if form.evaluate(x) != 0:
        raise PreconditionError("The vertex form must vanish at the vertex", witness=x)
    lattice = polytope.face_lattice
    slopes = []
    for edge in lattice.by_dim(1):
        if vertex_index not in edge.vertices:
            continue
        (other,) = edge.vertices - {vertex_index}
        w = polytope.vertices[other]
        value = form.evaluate(w)
        if value <= 0:
            raise PreconditionError("The vertex form is not positive along an edge", witness=w)
        slopes.append(value / sqrt_upper(_squared_distance(x, w)))
    gaps = [
        g.evaluate(x) / sqrt_upper(g.normal_norm_squared())
        for g in list(polytope.forms) + list(keep_positive)
        if g.evaluate(x) > 0
    ]
    radius = min(slopes + gaps) / 2
    return form.to_poly() - SparsePoly.squared_distance(x), radius


def find_local_radius(
    p: Expr | SparsePoly,
    s: Side,
    t: Side,
    center: Point,
    start: Fraction,
    budget: SearchBudget,
) -> FoundConstant:
    """Largest ``start / 2^j`` for which ``p`` separates ``S`` from ``T`` on the ball around ``center``."""
    center = tuple(Fraction(c) for c in center)
    p_expr = as_expr(p, len(center))
    radius = Fraction(start)
    for _ in range(2 * budget.collar_attempts):
        ball = ball_side(center, radius)
        bad = None
        for x in ball.sample(budget.samples, budget.seed):
            in_s, in_t = s.contains(x), t.contains(x)
            if not (in_s or in_t):
                continue
            value = p_expr.evaluate(x)
            if (in_s and value < 0) or (in_t and value > 0) or (value == 0 and x != center):
                bad = x
                break
        if bad is None:
            logger.debug("Local radius %s at %s", radius, center)
            return FoundConstant.of("local_radius", radius, "sampled", "find_local_radius")
        radius /= 2
    raise BudgetExhausted(f"No separating ball around {center}", last_counterexample=center, searched="local_radius")


def growth_template(dim: int, exponent: int) -> SparsePoly:
    """``(1 + ||X||^2)^exponent``."""
    return (SparsePoly.squared_distance((Fraction(0),) * dim) + 1) ** exponent
