"""
Tests for exact sparse polynomial arithmetic.
"""

import itertools
import math
import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from polyrep.errors import ParseError, PreconditionError
from polyrep.poly import (
    LinearForm,
    SparsePoly,
    compose_univariate,
    cone_extend,
    elementary_symmetric,
    elementary_symmetric_all,
    parse_rational,
)

X = SparsePoly.variable(2, 0)
Y = SparsePoly.variable(2, 1)

rationals = st.fractions(min_value=-5, max_value=5, max_denominator=6)


@st.composite
def polys(draw, dim=2, max_terms=4, max_exp=2):
    monos = draw(
        st.lists(st.tuples(*[st.integers(0, max_exp)] * dim), min_size=0, max_size=max_terms, unique=True)
    )
    return SparsePoly(dim, {m: draw(rationals) for m in monos})


points = st.tuples(rationals, rationals)


class TestArithmetic:
    """Ring operations and canonical form."""

    @pytest.mark.unit
    def test_difference_of_squares(self):
        assert (X + Y) * (X - Y) == X**2 - Y**2

    @pytest.mark.unit
    def test_additive_identity(self):
        p = X**2 + Y * Fraction(1, 3)
        assert p + 0 == p
        assert p + SparsePoly.zero(2) == p

    @pytest.mark.unit
    def test_binomial_cube(self):
        x = SparsePoly.variable(1, 0)
        assert (x + 1) ** 3 == SparsePoly.univariate([1, 3, 3, 1])

    @pytest.mark.unit
    def test_no_zero_terms_stored(self):
        p = (X + Y) - Y
        assert p.terms == {(1, 0): Fraction(1)}
        assert (X - X).is_zero
        assert (X - X).degree == -1

    @pytest.mark.unit
    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            X + SparsePoly.variable(3, 0)

    @pytest.mark.unit
    @settings(max_examples=40, deadline=None)
    @given(polys(), polys(), polys())
    def test_ring_axioms(self, p, q, r):
        assert (p + q) + r == p + (q + r)
        assert (p * q) * r == p * (q * r)
        assert p * (q + r) == p * q + p * r
        assert p * q == q * p


class TestEvaluation:
    """Exact and float evaluation."""

    @pytest.mark.unit
    def test_exact_value(self):
        assert (X**2 + Y).evaluate((Fraction(1, 2), Fraction(1, 3))) == Fraction(7, 12)

    @pytest.mark.unit
    def test_constant(self):
        c = SparsePoly.constant(2, Fraction(-3, 7))
        assert c.evaluate((Fraction(5), Fraction(-11, 3))) == Fraction(-3, 7)

    @pytest.mark.unit
    def test_sigma3_outside_square(self):
        qs = [X, 1 - X, Y, 1 - Y]
        assert elementary_symmetric(qs, 3).evaluate((2, 2)) == -4

    @pytest.mark.unit
    @settings(max_examples=40, deadline=None)
    @given(polys(), points)
    def test_integer_path_matches_naive_sum(self, p, point):
        naive = sum(
            (c * math.prod(Fraction(x) ** e for x, e in zip(point, m)) for m, c in p.terms.items()),
            Fraction(0),
        )
        assert p.evaluate(point) == naive

    @pytest.mark.unit
    def test_float_evaluation_close(self):
        p = X**2 - Y * 3 + Fraction(1, 2)
        values = p.evaluate_float([[1.0, 2.0], [0.5, 0.0]])
        assert values[0] == pytest.approx(-4.5)
        assert values[1] == pytest.approx(0.75)

    @pytest.mark.unit
    def test_wrong_point_length(self):
        with pytest.raises(ValueError):
            X.evaluate((1,))


class TestElementarySymmetric:
    """Incremental symmetric functions against brute force."""

    @pytest.mark.unit
    def test_constants(self):
        qs = [SparsePoly.constant(1, v) for v in (1, 2, 3)]
        assert [s.constant_term for s in elementary_symmetric_all(qs)] == [6, 11, 6]

    @pytest.mark.unit
    def test_top_function_is_product(self):
        qs = [X, 1 - X, Y, 1 - Y]
        assert elementary_symmetric(qs, 4) == X * (1 - X) * Y * (1 - Y)

    @pytest.mark.unit
    def test_sigma2_pairs_at_center(self):
        qs = [X, 1 - X, Y, 1 - Y]
        point = (Fraction(1, 2), Fraction(1, 2))
        brute = sum(a.evaluate(point) * b.evaluate(point) for a, b in itertools.combinations(qs, 2))
        assert elementary_symmetric(qs, 2).evaluate(point) == brute == Fraction(3, 2)

    @pytest.mark.unit
    def test_index_out_of_range(self):
        with pytest.raises(ValueError):
            elementary_symmetric([X, Y], 3)
        with pytest.raises(ValueError):
            elementary_symmetric([X, Y], 0)

    @pytest.mark.unit
    def test_matches_naive_sum(self):
        rng = random.Random(11)
        for k in range(1, 7):
            qs = [
                SparsePoly(2, {(rng.randint(0, 2), rng.randint(0, 2)): Fraction(rng.randint(-4, 4), rng.randint(1, 3))})
                + rng.randint(-2, 2)
                for _ in range(k)
            ]
            for i in range(1, k + 1):
                naive = SparsePoly.zero(2)
                for combo in itertools.combinations(qs, i):
                    term = SparsePoly.constant(2, 1)
                    for q in combo:
                        term = term * q
                    naive = naive + term
                assert elementary_symmetric(qs, i) == naive

    @pytest.mark.unit
    @settings(max_examples=60, deadline=None)
    @given(st.lists(rationals, min_size=2, max_size=6))
    def test_newton_identity(self, values):
        sigma = elementary_symmetric_all(values)
        assert sigma[0] ** 2 - 2 * sigma[1] == sum(v * v for v in values)


class TestComposition:
    """Univariate composition."""

    @pytest.mark.unit
    def test_square_of_sum(self):
        t = SparsePoly.variable(1, 0)
        assert compose_univariate(t**2, X + Y) == (X + Y) ** 2

    @pytest.mark.unit
    def test_identity_outer(self):
        t = SparsePoly.variable(1, 0)
        p = X * Y - 3
        assert compose_univariate(t, p) == p

    @pytest.mark.unit
    def test_rejects_multivariate_outer(self):
        with pytest.raises(ValueError):
            compose_univariate(X, Y)


class TestConeExtend:
    """Homogenization about a center through a section."""

    @pytest.mark.unit
    def test_circle_section_becomes_cone(self):
        form = LinearForm((1, 0), 0)
        q = cone_extend(1 - Y**2, form, (0, 0), 1)
        assert q == X**2 - Y**2

    @pytest.mark.unit
    def test_constant(self):
        form = LinearForm((1, 1), 0)
        assert cone_extend(SparsePoly.constant(2, 5), form, (0, 0), Fraction(1, 2)) == SparsePoly.constant(2, 5)

    @pytest.mark.unit
    def test_requires_form_vanishing_at_center(self):
        with pytest.raises(PreconditionError):
            cone_extend(X, LinearForm((1, 0), 1), (0, 0), 1)

    @pytest.mark.unit
    def test_requires_positive_level(self):
        with pytest.raises(PreconditionError):
            cone_extend(X, LinearForm((1, 0), 0), (0, 0), 0)

    @pytest.mark.unit
    def test_signs_agree_along_rays(self):
        rng = random.Random(3)
        center = (Fraction(1), Fraction(-1))
        form = LinearForm((1, 2), 1)
        eps = Fraction(1, 3)
        p = X**2 * Y - X + Fraction(1, 5)
        q = cone_extend(p, form, center, eps)
        for _ in range(100):
            u = (Fraction(rng.randint(-9, 9), 3), Fraction(rng.randint(-9, 9), 3))
            level = form.direction_value(u)
            if level <= 0:
                continue
            v = tuple(c + eps * ui / level for c, ui in zip(center, u))
            lam = Fraction(rng.randint(1, 20), rng.randint(1, 20))
            ray = tuple(c + lam * (vi - c) for c, vi in zip(center, v))
            assert (q.evaluate(ray) > 0) == (p.evaluate(v) > 0)
            assert (q.evaluate(ray) == 0) == (p.evaluate(v) == 0)

    @pytest.mark.unit
    @settings(max_examples=30, deadline=None)
    @given(polys(), st.fractions(min_value=Fraction(1, 4), max_value=4, max_denominator=5), points)
    def test_homogeneous_in_shifted_coordinates(self, p, lam, u):
        center = (Fraction(1, 2), Fraction(0))
        form = LinearForm((0, 1), 0)
        q = cone_extend(p, form, center, Fraction(1, 2))
        top = max(p.degree, 0)
        scaled = tuple(c + lam * x for c, x in zip(center, u))
        plain = tuple(c + x for c, x in zip(center, u))
        assert q.evaluate(scaled) == lam**top * q.evaluate(plain)


class TestSerialization:
    """JSON form and rational parsing."""

    @pytest.mark.unit
    def test_json_round_trip(self):
        p = X**3 * Fraction(-7, 3) + Y * Fraction(1, 9) - 2
        data = p.to_json()
        assert data["dim"] == 2
        assert {"exps": [0, 0], "coeff": "-2/1"} in data["terms"]
        assert SparsePoly.from_json(data) == p

    @pytest.mark.unit
    def test_parse_rational_forms(self):
        assert parse_rational("3/6") == Fraction(1, 2)
        assert parse_rational(" -4 ") == -4
        assert parse_rational(7) == 7

    @pytest.mark.unit
    def test_decimal_requires_opt_in(self):
        with pytest.raises(ParseError):
            parse_rational("0.25")
        assert parse_rational("0.25", allow_decimal=True) == Fraction(1, 4)

    @pytest.mark.unit
    def test_rejects_garbage(self):
        with pytest.raises(ParseError):
            parse_rational("abc")
        with pytest.raises(ParseError):
            parse_rational("1/0")

    @pytest.mark.unit
    def test_linear_form_primitive(self):
        form = LinearForm((Fraction(1, 2), Fraction(3, 2)), Fraction(-1))
        assert form.primitive() == LinearForm((1, 3), -2)
