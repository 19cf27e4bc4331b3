"""
Tests for sampled sides.
"""

from fractions import Fraction

import numpy as np
import pytest

from polyrep.catalog import load_entry
from polyrep.errors import ParseError
from polyrep.expr import as_expr
from polyrep.interval import Box
from polyrep.poly import LinearForm, SparsePoly
from polyrep.sides import (
    BasicClosedSide,
    ComplementInteriorSide,
    EmptySide,
    OracleSide,
    PolyhedralSide,
    face_points,
    side_from_json,
    union,
)

F = Fraction
X = SparsePoly.variable(2, 0)
Y = SparsePoly.variable(2, 1)


def disk():
    return BasicClosedSide([1 - X**2 - Y**2], Box.cube(2, F(1)), label="disk")


class TestSampling:
    """Samples are dyadic, contained and deterministic."""

    @pytest.mark.unit
    def test_samples_lie_in_side(self):
        side = disk()
        points = side.sample(50, 3)
        assert points
        assert all(side.contains(x) for x in points)
        assert all(isinstance(c, Fraction) for x in points for c in x)

    @pytest.mark.unit
    def test_deterministic_per_seed(self):
        assert disk().sample(40, 7) == disk().sample(40, 7)

    @pytest.mark.unit
    def test_polyhedral_side_hits_vertices(self):
        side = PolyhedralSide(load_entry("square"))
        points = side.sample(40, 0)
        for v in load_entry("square").vertices:
            assert v in points

    @pytest.mark.unit
    def test_unbounded_side_has_far_points(self):
        side = PolyhedralSide(load_entry("quadrant"))
        points = side.sample(60, 0)
        assert any(max(abs(c) for c in x) >= 1000 for x in points)
        assert all(x[0] >= 0 and x[1] >= 0 for x in points)

    @pytest.mark.unit
    def test_empty_side(self):
        assert EmptySide(2).sample(10, 0) == []


class TestComposition:
    """Restrictions and unions keep membership exact."""

    @pytest.mark.unit
    def test_restrict(self):
        upper = disk().restrict(Y, label="upper half disk")
        assert upper.contains((F(0), F(1, 2)))
        assert not upper.contains((F(0), F(-1, 2)))
        assert len(upper.polys) == 2

    @pytest.mark.unit
    def test_union_collapses_empty_parts(self):
        side = disk()
        assert union([EmptySide(2), side], 2) is side
        assert union([EmptySide(2)], 2).is_empty

    @pytest.mark.unit
    def test_union_membership(self):
        right = OracleSide(lambda x: x[0] >= 2, Box.from_bounds([2, -1], [3, 1]), bounded=False, label="right")
        both = disk() | right
        assert both.contains((F(0), F(0)))
        assert both.contains((F(5), F(0)))
        assert not both.contains((F(3, 2), F(0)))

    @pytest.mark.unit
    def test_complement_interior(self):
        forms = [LinearForm((F(1), F(0)), F(0)), LinearForm((F(0), F(1)), F(0))]
        outside = ComplementInteriorSide(forms, Box.cube(2, F(2)))
        assert outside.contains((F(0), F(1)))
        assert outside.contains((F(-1), F(1)))
        assert not outside.contains((F(1), F(1)))


class TestBoxQueries:
    """Bounds and box screening used by interval searches."""

    @pytest.mark.unit
    def test_basic_closed_may_meet(self):
        side = disk()
        assert side.may_meet(Box.cube(2, F(1, 4)))
        assert not side.may_meet(Box.from_bounds([2, 2], [3, 3]))
        assert not side.may_meet(Box.from_bounds([F(4, 5), F(4, 5)], [1, 1]))

    @pytest.mark.unit
    def test_polyhedral_bounds(self):
        square = PolyhedralSide(load_entry("square"))
        assert square.upper_bound(as_expr(X + Y, 2)) == 2
        assert not square.may_meet(Box.from_bounds([2, 2], [3, 3]))
        quadrant = PolyhedralSide(load_entry("quadrant"))
        assert quadrant.may_meet(Box.from_bounds([5, 5], [6, 6]))
        assert not quadrant.may_meet(Box.from_bounds([-3, 0], [-2, 1]))

    @pytest.mark.unit
    def test_complement_interior_may_meet(self):
        forms = [LinearForm((F(1), F(0)), F(0)), LinearForm((F(0), F(1)), F(0))]
        outside = ComplementInteriorSide(forms, Box.cube(2, F(2)))
        assert outside.may_meet(Box.cube(2, F(1)))
        assert not outside.may_meet(Box.from_bounds([1, 1], [2, 2]))

    @pytest.mark.unit
    def test_oracle_meets_hook(self):
        window = Box.cube(2, F(1))
        side = OracleSide(lambda x: True, window, bounded=True, meets=lambda box: box.sides[0].lo >= 0)
        assert side.may_meet(Box.from_bounds([0, 0], [1, 1]))
        assert not side.may_meet(Box.from_bounds([-1, 0], [1, 1]))
        assert not side.may_meet(Box.from_bounds([3, 3], [4, 4]))

    @pytest.mark.unit
    def test_restricted_and_empty(self):
        upper = disk().restrict(Y)
        assert upper.upper_bound(as_expr(X, 2)) == 1
        assert not upper.may_meet(Box.from_bounds([F(-1, 2), -1], [F(1, 2), F(-1, 2)]))
        assert upper.may_meet(Box.from_bounds([F(-1, 2), 0], [F(1, 2), F(1, 2)]))
        assert not EmptySide(2).may_meet(Box.cube(2, F(1)))


class TestFacePoints:
    """Random points of a face keep exactly its active set."""

    @pytest.mark.unit
    @pytest.mark.parametrize("name", ["cube", "square-pyramid", "quadrant", "slab"])
    def test_relative_interior(self, name):
        poly = load_entry(name)
        rng = np.random.default_rng(0)
        for face in poly.face_lattice.faces:
            for x in face_points(poly, face, rng, 3):
                assert poly.active_set(x) == face.active


class TestJson:
    """Side descriptions."""

    @pytest.mark.unit
    def test_polyhedron(self):
        side = side_from_json({"kind": "polyhedron", "dim": 2, "ineqs": [{"coeffs": ["1", "0"], "const": "0"}]})
        assert isinstance(side, PolyhedralSide)
        assert side.contains((F(1), F(-7)))

    @pytest.mark.unit
    def test_basic_closed(self):
        data = {"kind": "basic-closed", "polys": [(1 - X**2 - Y**2).to_json()], "window": [["-1", "1"], ["-1", "1"]]}
        side = side_from_json(data)
        assert side.contains((F(0), F(1)))
        assert not side.contains((F(1), F(1)))

    @pytest.mark.unit
    def test_basic_closed_needs_window(self):
        with pytest.raises(ParseError):
            side_from_json({"kind": "basic-closed", "polys": []})

    @pytest.mark.unit
    def test_unknown_kind(self):
        with pytest.raises(ParseError):
            side_from_json({"kind": "sphere"})
