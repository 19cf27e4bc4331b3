"""
Tests for lazily expanded polynomial expressions.
"""

from fractions import Fraction

import numpy as np
import pytest

from polyrep.errors import BudgetExhausted, ParseError
from polyrep.expr import Composed, Leaf, Power, Product, as_expr, expr_from_json, homogenized_pullback
from polyrep.interval import Box
from polyrep.poly import SparsePoly

F = Fraction
X = SparsePoly.variable(2, 0)
Y = SparsePoly.variable(2, 1)
T = SparsePoly.variable(1, 0)


def big_expr():
    """A tree whose expansion has many terms: (1 + x + y)^12 * (x - y)^3 composed with t^2 + t."""
    base = Leaf(1 + X + Y) ** 12
    other = Leaf(X - Y) ** 3
    return (base * other).compose(T**2 + T)


class TestConstruction:
    """Operators build trees or fold small leaves."""

    @pytest.mark.unit
    def test_small_leaves_fold(self):
        e = Leaf(X) + Leaf(Y) * 2
        assert isinstance(e, Leaf)
        assert e.poly == X + 2 * Y

    @pytest.mark.unit
    def test_power_of_power_flattens(self):
        e = (Leaf(X + Y + 1) ** 3) ** 2
        assert isinstance(e, Power)
        assert e.exponent == 6

    @pytest.mark.unit
    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            as_expr(SparsePoly.variable(3, 0), 2)

    @pytest.mark.unit
    def test_compose_requires_univariate(self):
        with pytest.raises(ValueError):
            Leaf(X).compose(X)

    @pytest.mark.unit
    def test_degree_bound(self):
        e = big_expr()
        assert isinstance(e, Composed)
        assert e.degree == 2 * (12 + 3)


class TestEvaluation:
    """Exact, float and interval evaluation agree with the expansion."""

    @pytest.mark.unit
    def test_exact_matches_expansion(self):
        e = (Leaf(1 + X + Y) ** 4) * Leaf(X - Y) - 3
        p = e.expand()
        for point in [(F(1, 2), F(-1, 3)), (F(2), F(5)), (F(0), F(0))]:
            assert e.evaluate(point) == p.evaluate(point)

    @pytest.mark.unit
    def test_float_close_to_exact(self):
        e = (Leaf(X * Y + 1) ** 5).compose(T**3 - T)
        pts = np.array([[0.5, -0.25], [1.0, 0.125]])
        values = e.evaluate_float(pts)
        for row, value in zip(pts, values):
            exact = e.evaluate(tuple(F(v) for v in row))
            assert value == pytest.approx(float(exact), rel=1e-9)

    @pytest.mark.unit
    def test_enclosure_contains_values(self):
        e = (Leaf(X - Y) ** 2) * Leaf(X + 1) - Leaf(Y)
        box = Box.from_bounds([F(-1, 2), F(0)], [F(1, 2), F(1)])
        encl = e.enclose(box)
        for i in range(5):
            for j in range(5):
                point = (F(-1, 2) + F(i, 4), F(j, 4))
                assert encl.contains(e.evaluate(point))

    @pytest.mark.unit
    def test_restrict_to_line(self):
        e = Leaf(X * Y) ** 2 + 1
        line = e.restrict_to_line((F(1), F(0)), (F(0), F(1)))
        # (1 * t)^2 + 1
        assert line == SparsePoly.univariate([1, 0, 1])


class TestExpansion:
    """Term budgets."""

    @pytest.mark.unit
    def test_budget_exhausted(self):
        with pytest.raises(BudgetExhausted):
            big_expr().expand(max_terms=20)

    @pytest.mark.unit
    def test_try_expand(self):
        assert big_expr().try_expand(20) is None
        assert Leaf(X + 1).try_expand(20) == X + 1

    @pytest.mark.unit
    def test_pullback_by_affine_map(self):
        e = Product((Leaf(X + 1), Leaf(Y - 1)))
        swapped = e.pullback([Y, X])
        assert swapped.expand() == (Y + 1) * (X - 1)


class TestHomogenizedPullback:
    """``w^D e(images / w)`` built on the tree."""

    U = SparsePoly.variable(3, 0)
    V = SparsePoly.variable(3, 1)
    W = SparsePoly.variable(3, 2)

    @staticmethod
    def mixed_expr():
        product = Product((Leaf(X + 1), Leaf(Y - 1)))
        return Composed(T**2 - 3 * T, product) + Power(Leaf(X + Y), 3).scale(F(1, 2)) + Leaf(X)

    @pytest.mark.unit
    @pytest.mark.parametrize("extra", [0, 2])
    def test_matches_definition(self, extra):
        e = self.mixed_expr()
        degree = e.degree + extra
        lifted = homogenized_pullback(e, degree, [self.U, self.V], self.W)
        assert lifted.dim == 3
        for point in [(F(1, 2), F(-1, 3), F(2)), (F(3), F(1), F(-1, 4)), (F(0), F(5), F(1))]:
            u, v, w = point
            assert lifted.evaluate(point) == w**degree * e.evaluate((u / w, v / w))

    @pytest.mark.unit
    def test_affine_section(self):
        e = self.mixed_expr()
        section = homogenized_pullback(e, e.degree, [X, Y], SparsePoly.constant(2, 1))
        point = (F(2, 3), F(-5, 7))
        assert section.evaluate(point) == e.evaluate(point)

    @pytest.mark.unit
    def test_degree_too_small(self):
        with pytest.raises(ValueError):
            homogenized_pullback(Leaf(X**2), 1, [self.U, self.V], self.W)


class TestJson:
    """JSON trees rebuild the same function."""

    @pytest.mark.unit
    def test_round_trip_values(self):
        e = big_expr()
        back = expr_from_json(e.to_json())
        point = (F(1, 3), F(-2, 5))
        assert back.evaluate(point) == e.evaluate(point)
        assert back.degree == e.degree

    @pytest.mark.unit
    def test_unknown_node(self):
        with pytest.raises(ParseError):
            expr_from_json({"op": "divide"})
