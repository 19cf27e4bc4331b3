"""Cushion polynomials.

``kappa`` is tiny on ``[-rho, 0]``, vanishes only at ``0`` and stays between 2 and 3 on ``[delta, rho]``; ``mu``
is below 1/2 on ``[-rho, 0]`` and above 2 from ``delta`` on. Both are used to switch factors on and off across
the hyperplanes of a support.

``kappa`` is obtained by Chebyshev interpolation of a smooth step profile, rounded to dyadic coefficients, and
accepted only after an exact certification on a dyadic subdivision of ``[-rho, rho]``.
"""

import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

from polyrep.cushion_cache import CushionCache, cache_key
from polyrep.errors import BudgetExhausted, PreconditionError
from polyrep.interval import Interval, taylor_shift
from polyrep.poly import SparsePoly

logger = logging.getLogger(__name__)

KAPPA_START_DEGREE = 16
COEFF_BITS = 48
CERTIFY_DEPTH = 28
PRECHECK_POINTS = 4001


@dataclass(frozen=True)
class CushionParams:
    """Parameters ``0 < delta < rho`` and ``m >= 1`` of a cushion polynomial."""

    delta: Fraction
    rho: Fraction
    m: int = 1

    def __post_init__(self) -> None:
        object.__setattr__(self, "delta", Fraction(self.delta))
        object.__setattr__(self, "rho", Fraction(self.rho))
        if not 0 < self.delta < self.rho:
            raise PreconditionError(f"Cushion parameters need 0 < delta < rho, got {self.delta}, {self.rho}")
        if self.m < 1:
            raise PreconditionError(f"Cushion parameter m must be at least 1, got {self.m}")

    @property
    def small(self) -> Fraction:
        """Upper bound of kappa on ``[-rho, 0]``."""
        return Fraction(1, 4**self.m)


@dataclass(frozen=True)
class KappaCertificate:
    ok: bool
    boxes: int
    constraint: str | None = None
    location: Fraction | None = None


# kappa


def _profile(params: CushionParams):
    delta, rho = float(params.delta), float(params.rho)
    floor = 4.0**-params.m / (4 * rho * rho)
    width = delta / (3 + params.m)
    eta = delta * delta / 10

    def pi_target(x: np.ndarray) -> np.ndarray:
        t = rho * x
        step = 0.5 * (1 + np.tanh((t - delta / 2) / width))
        return floor + step * 2.5 / (t * t + eta)

    return pi_target


def _float_precheck(cheb: np.ndarray, params: CushionParams) -> bool:
    x = np.linspace(-1.0, 1.0, PRECHECK_POINTS)
    pi = np.polynomial.chebyshev.chebval(x, cheb)
    t = float(params.rho) * x
    kappa = t * t * pi
    right = t >= float(params.delta)
    return bool(
        np.all(pi > 0)
        and np.all(kappa[x <= 0] < float(params.small))
        and np.all(kappa[right] > 2)
        and np.all(kappa[x >= 0] < 3)
    )


def _chebyshev_to_monomial(coeffs: list[int]) -> list[int]:
    """Integer monomial coefficients of ``sum c_k T_k(x)`` for integer ``c_k``."""
    result = [0] * len(coeffs)
    prev, cur = [1], [0, 1]
    for k, c in enumerate(coeffs):
        basis = prev if k == 0 else cur
        for i, b in enumerate(basis):
            result[i] += c * b
        if k >= 1:
            nxt = [0] + [2 * b for b in cur]
            for i, b in enumerate(prev):
                nxt[i] -= b
            prev, cur = cur, nxt
    return result


def _interpolate(params: CushionParams, degree: int) -> SparsePoly | None:
    cheb = np.polynomial.chebyshev.chebinterpolate(_profile(params), degree)
    if not _float_precheck(cheb, params):
        return None
    ints = [round(float(c) * (1 << COEFF_BITS)) for c in cheb]
    mono = _chebyshev_to_monomial(ints)
    scale = Fraction(1, 1 << COEFF_BITS)
    # kappa(t) = t^2 * sum_i a_i (t / rho)^i
    terms = {(i + 2,): Fraction(a) * scale / params.rho**i for i, a in enumerate(mono) if a}
    return SparsePoly(1, terms)


def kappa_poly(params: CushionParams, max_degree: int = 1024, cache: CushionCache | None = None) -> SparsePoly:
    """Certified cushion polynomial ``kappa`` for ``params``.

    Raises:
        BudgetExhausted: If no interpolation degree up to ``max_degree`` certifies; the message names the
            last violated constraint and its location.
    """
    key = cache_key(params.delta, params.rho, params.m, max_degree)
    if cache is not None:
        cached = cache.get(key)
        if cached is not None:
            logger.debug("Using cached kappa for %s", key)
            return cached
    kappa = _kappa_search(params, max_degree)
    if cache is not None:
        cache.put(key, kappa)
    return kappa


@lru_cache(maxsize=32)
def _kappa_search(params: CushionParams, max_degree: int) -> SparsePoly:
    failure: KappaCertificate | None = None
    degree = KAPPA_START_DEGREE
    while degree <= max_degree:
        candidate = _interpolate(params, degree)
        if candidate is None:
            logger.debug("kappa %s: degree %d fails the float precheck", params, degree)
        else:
            cert = certify_kappa(candidate, params)
            if cert.ok:
                logger.info("kappa %s certified at degree %d with %d boxes", params, degree, cert.boxes)
                return candidate
            failure = cert
            logger.debug("kappa %s: degree %d fails %s near t=%s", params, degree, cert.constraint, cert.location)
        degree *= 2
    where = f": {failure.constraint} fails near t={failure.location}" if failure is not None else ""
    raise BudgetExhausted(
        f"No certified kappa for delta={params.delta}, rho={params.rho}, m={params.m} up to degree {max_degree}{where}",
        last_counterexample=(failure.location,) if failure is not None and failure.location is not None else None,
        searched="kappa degree",
    )


def _reduced(kappa: SparsePoly, rho: Fraction) -> tuple[list[int], Fraction] | None:
    """Integer ``P`` and ``scale > 0`` with ``kappa(rho x) = rho^2 x^2 scale P(x)``; None if ``t^2`` does not divide."""
    coeffs = kappa.coefficients()
    if len(coeffs) < 3 or coeffs[0] or coeffs[1]:
        return None
    scaled = [c * rho ** (i - 2) for i, c in enumerate(coeffs[2:], start=2)]
    den = 1
    for c in scaled:
        den = math.lcm(den, c.denominator)
    return [int(c * den) for c in scaled], Fraction(1, den)


def _enclose_int(p: list[int], a: int, b: int) -> tuple[Fraction, Fraction]:
    """Enclosure of ``P`` on ``[a / 2^b, (a + 1) / 2^b]``."""
    n = len(p) - 1
    e = b + 1
    # x = (2a + 1 + v) / 2^e with v in [-1, 1]
    lifted = [c << (e * (n - i)) for i, c in enumerate(p)]
    shifted = taylor_shift(lifted, 2 * a + 1)
    radius = sum(abs(c) for c in shifted[1:])
    den = 1 << (e * n)
    return Fraction(shifted[0] - radius, den), Fraction(shifted[0] + radius, den)


def _eval_int(p: list[int], x: Fraction) -> Fraction:
    value = Fraction(0)
    for c in reversed(p):
        value = value * x + c
    return value


def certify_kappa(kappa: SparsePoly, params: CushionParams, max_depth: int = CERTIFY_DEPTH) -> KappaCertificate:
    """Exact check of the four cushion properties on ``[-rho, rho]`` by dyadic subdivision."""
    reduced = _reduced(kappa, params.rho)
    if reduced is None:
        return KappaCertificate(False, 0, "divisible by t^2", Fraction(0))
    p, scale = reduced
    rho2 = params.rho**2
    cut = params.delta / params.rho
    boxes = 0
    stack = [(a, 1) for a in (-2, -1, 0, 1)]
    while stack:
        a, b = stack.pop()
        boxes += 1
        lo_x, hi_x = Fraction(a, 1 << b), Fraction(a + 1, 1 << b)
        lo, hi = _enclose_int(p, a, b)
        pi = Interval(lo * scale, hi * scale)
        square = Interval(min(lo_x * lo_x, hi_x * hi_x), max(lo_x * lo_x, hi_x * hi_x))
        kappa_box = square * pi * rho2

        pending: list[str] = []
        if pi.lo <= 0:
            pending.append("positive")
        if hi_x <= 0 and kappa_box.hi > params.small:
            pending.append("small on [-rho, 0]")
        if lo_x >= 0 and kappa_box.hi > 3:
            pending.append("at most 3 on [0, rho]")
        if hi_x >= cut and kappa_box.lo < 2:
            pending.append("at least 2 on [delta, rho]")
        if not pending:
            continue

        midpoint = max((lo_x + hi_x) / 2, cut) if pending == ["at least 2 on [delta, rho]"] else (lo_x + hi_x) / 2
        pi_value = _eval_int(p, midpoint) * scale
        kappa_value = rho2 * midpoint * midpoint * pi_value
        violated = (
            ("positive" in pending and pi_value <= 0)
            or ("small on [-rho, 0]" in pending and kappa_value > params.small)
            or ("at most 3 on [0, rho]" in pending and kappa_value > 3)
            or ("at least 2 on [delta, rho]" in pending and kappa_value < 2)
        )
        if violated or b >= max_depth:
            return KappaCertificate(False, boxes, pending[0], midpoint * params.rho)
        stack.extend([(2 * a, b + 1), (2 * a + 1, b + 1)])
    return KappaCertificate(True, boxes)


# mu


def mu_exponent(delta: Fraction, rho: Fraction) -> int:
    """Smallest ``k >= 1`` with ``base(0)^(2k) < 1/2`` and ``base(delta)^(2k) > 2``."""
    delta, rho = Fraction(delta), Fraction(rho)
    if not 0 < delta < rho:
        raise PreconditionError(f"mu needs 0 < delta < rho, got {delta}, {rho}")
    at_zero = (2 * rho - delta / 2) / (2 * rho)
    at_delta = (delta + 2 * rho - delta / 2) / (2 * rho)
    k = 1
    while not (at_zero ** (2 * k) < Fraction(1, 2) and at_delta ** (2 * k) > 2):
        k += 1
    return k


def mu_poly(delta: Fraction, rho: Fraction) -> SparsePoly:
    """``((t + 2 rho - delta / 2) / (2 rho))^(2k)`` with the smallest admissible ``k``.

    The base is increasing and positive on ``[-rho, oo)``, so the two endpoint checks of `mu_exponent` give the
    bounds on the whole half-lines.
    """
    delta, rho = Fraction(delta), Fraction(rho)
    k = mu_exponent(delta, rho)
    base = SparsePoly.univariate([(2 * rho - delta / 2) / (2 * rho), 1 / (2 * rho)])
    return base ** (2 * k)
