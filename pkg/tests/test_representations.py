"""
Tests for the representation pipelines.
"""

from fractions import Fraction

import numpy as np
import pytest

from polyrep.catalog import CATALOG, load_entry
from polyrep.errors import PreconditionError
from polyrep.models import VerificationConfig
from polyrep.poly import SparsePoly, elementary_symmetric_all
from polyrep.representations import (
    Representation,
    SimplicityProfile,
    audit_vanishing_counts,
    choose_pipeline,
    faithful_normal_form,
    polyhedron_representation,
    represent,
    simplicity_profile,
    size_lower_bound,
    symmetric_reduction_epsilon,
    theorem1a_representation,
    theorem1b_representation,
)
from polyrep.verification import check_representation

from .conftest import frac_point

F = Fraction
X = SparsePoly.variable(2, 0)
Y = SparsePoly.variable(2, 1)


def sign_disagreement(k, s, rho, eps, trials, seed):
    """A tuple on which ``all a_i >= 0`` and the top ``s`` symmetric functions disagree, if any."""
    rng = np.random.default_rng(seed)
    for _ in range(trials):
        small = [eps * F(int(rng.integers(-1023, 1024)), 1024) for _ in range(s)]
        large = [rho * (1 + F(int(rng.integers(1, 4097)), 256)) for _ in range(k - s)]
        values = small + large
        sigmas = elementary_symmetric_all(values)
        if all(v >= 0 for v in values) != all(x >= 0 for x in sigmas[k - s :]):
            return values
    return None


class TestRouting:
    """Automatic pipeline choice and size bounds."""

    @pytest.mark.unit
    @pytest.mark.parametrize(
        "name,pipeline",
        [
            ("square", "polytope"),
            ("hexagon", "polytope"),
            ("cube", "t1b"),
            ("simplex-3", "t1b"),
            ("octahedron", "polytope"),
            ("square-pyramid", "polytope"),
            ("quadrant", "polyhedron"),
            ("slab", "polyhedron"),
        ],
    )
    def test_choose_pipeline(self, name, pipeline):
        assert choose_pipeline(load_entry(name)) == pipeline

    @pytest.mark.unit
    def test_unknown_pipeline(self, square, budget):
        with pytest.raises(ValueError):
            represent(square, "nonexistent", budget)

    @pytest.mark.unit
    @pytest.mark.parametrize(
        "name,bound",
        [
            ("square", 2),
            ("slab", 1),
            ("slab-3", 1),
            ("whole-plane", 0),
            ("whole-space-3", 0),
            ("corner-cut", 2),
            ("cube", 3),
        ],
    )
    def test_size_lower_bound(self, name, bound):
        assert size_lower_bound(load_entry(name)) == bound


class TestSimplicity:
    """Largest number of facets through one point."""

    @pytest.mark.unit
    def test_square(self, square):
        profile = simplicity_profile(square)
        assert profile.s == 2
        assert profile.exact
        assert set(profile.points) == set(square.vertices)

    @pytest.mark.unit
    def test_octahedron(self):
        profile = simplicity_profile(load_entry("octahedron"))
        assert profile.s == 4
        assert len(profile.points) == 6

    @pytest.mark.unit
    def test_symmetric_epsilon(self):
        eps = symmetric_reduction_epsilon(4, 2, trials=200)
        assert 0 < eps <= 1
        assert eps.numerator == 1 and eps.denominator & (eps.denominator - 1) == 0

    @pytest.mark.unit
    def test_symmetric_epsilon_rejects_bad_s(self):
        with pytest.raises(ValueError):
            symmetric_reduction_epsilon(3, 0)

    @pytest.mark.slow
    @pytest.mark.parametrize("rho", [F(1), F(1, 2)])
    @pytest.mark.parametrize("k,s", [(k, s) for k in range(1, 6) for s in range(1, k + 1)])
    def test_symmetric_epsilon_brute_force(self, k, s, rho):
        eps = symmetric_reduction_epsilon(k, s, rho, trials=10_000)
        assert sign_disagreement(k, s, rho, eps, trials=10_000, seed=1) is None


class TestPolyhedra:
    """Cheap polyhedral cases that need no search."""

    @pytest.mark.unit
    def test_half_plane_is_its_facet(self, budget):
        rep = polyhedron_representation(load_entry("half-plane"), budget)
        assert len(rep) == 1
        assert rep.provenance[0].construction == "facet form"

    @pytest.mark.unit
    def test_quadrant_facets(self, budget):
        quadrant = load_entry("quadrant")
        rep = represent(quadrant, "auto", budget)
        assert len(rep) == 2
        assert rep.contains(frac_point(3, 0))
        assert not rep.contains(frac_point(-1, 2))

    @pytest.mark.unit
    def test_whole_plane_needs_nothing(self, budget):
        rep = represent(load_entry("whole-plane"), "auto", budget)
        assert len(rep) == 0
        assert rep.contains(frac_point(-5, 7))

    @pytest.mark.unit
    def test_audit_passes_for_facets(self, budget):
        quadrant = load_entry("quadrant")
        audit = audit_vanishing_counts(represent(quadrant, "auto", budget), quadrant)
        assert audit.passed
        assert audit.lower_bound == 2
        assert {f.dim for f in audit.faces} == {0, 1}

    @pytest.mark.unit
    def test_audit_flags_missing_vanishing(self):
        quadrant = load_entry("quadrant")
        rep = Representation([X * X + Y * Y + 1], "polyhedron", quadrant)
        audit = audit_vanishing_counts(rep, quadrant)
        assert not audit.passed

    @pytest.mark.unit
    def test_document_round_trip(self, budget):
        rep = represent(load_entry("quadrant"), "auto", budget)
        back = Representation.from_document(rep.to_document(budget.max_terms))
        point = frac_point(F(1, 3), 2)
        assert [p.evaluate(point) for p in back.polynomials] == [p.evaluate(point) for p in rep.polynomials]
        assert back.pipeline == "polyhedron"


class TestFaithful:
    """Symmetric normal form."""

    @pytest.mark.unit
    def test_quadrant(self, budget):
        rep = faithful_normal_form(represent(load_entry("quadrant"), "auto", budget))
        assert rep.faithful
        assert [p.expand() for p in rep.polynomials] == [X + Y, X * Y]

    @pytest.mark.unit
    def test_needs_d_polynomials(self, budget):
        rep = represent(load_entry("half-plane"), "auto", budget)
        with pytest.raises(PreconditionError):
            faithful_normal_form(rep)


class TestSymmetricPipelines:
    """Symmetric-function pipelines on compact sets."""

    @pytest.mark.unit
    def test_unbounded_rejected(self, budget):
        with pytest.raises(PreconditionError):
            theorem1a_representation(load_entry("quadrant"), budget)

    @pytest.mark.unit
    def test_t1b_needs_finite_points(self, square, budget):
        with pytest.raises(PreconditionError):
            theorem1b_representation(square, budget, SimplicityProfile(2, None))

    @pytest.mark.slow
    def test_t1a_square(self, square, budget):
        rep = theorem1a_representation(square, budget)
        assert len(rep) == 3
        assert rep.pipeline == "t1a"
        for v in square.vertices:
            assert rep.contains(v)
        assert not rep.contains(frac_point(2, 2))
        assert not rep.contains(frac_point(-1, F(1, 2)))

    @pytest.mark.slow
    def test_t1b_triangle(self, triangle, budget):
        rep = theorem1b_representation(triangle, budget)
        assert len(rep) == 2
        assert rep.contains(frac_point(F(1, 4), F(1, 4)))
        assert not rep.contains(frac_point(1, 1))
        assert not rep.contains(frac_point(F(-1, 4), F(1, 4)))


class TestCatalogSizes:
    """Every catalog entry gets its expected number of polynomials."""

    @pytest.mark.slow
    @pytest.mark.parametrize("name", sorted(CATALOG))
    def test_expected_size(self, name, budget):
        entry = CATALOG[name]
        polyhedron = load_entry(name)
        rep = represent(polyhedron, "auto", budget)
        assert len(rep) == entry.expected_size
        for v in polyhedron.vertices:
            assert rep.contains(v)

    @pytest.mark.slow
    @pytest.mark.parametrize("name", sorted(CATALOG))
    def test_matches_polyhedron_at_scale(self, name, budget):
        polyhedron = load_entry(name)
        rep = represent(polyhedron, "auto", budget)
        report = check_representation(rep, polyhedron, config=VerificationConfig(samples=10_000))
        assert report.passed, report.counterexamples


class TestConeLift:
    """Unbounded pointed polyhedra through the compact section of their cone."""

    @pytest.mark.slow
    def test_corner_cut(self, budget):
        corner_cut = load_entry("corner-cut")
        rep = represent(corner_cut, "auto", budget)
        assert rep.pipeline == "polyhedron"
        assert len(rep) == 2
        for v in corner_cut.vertices:
            assert rep.contains(v)
        for inside in (frac_point(F(1, 2), F(1, 2)), frac_point(5, 0), frac_point(1000, 1000), frac_point(0, 10**6)):
            assert rep.contains(inside)
        for outside in (frac_point(F(1, 4), F(1, 4)), frac_point(-1, 5), frac_point(10**6, -1)):
            assert not rep.contains(outside)
        report = check_representation(rep, corner_cut, config=VerificationConfig(samples=2000))
        assert report.passed, report.counterexamples
        assert report.strata.get("far", 0) > 0
