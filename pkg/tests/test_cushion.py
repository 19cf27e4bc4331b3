"""
Tests for the cushion polynomials kappa and mu.
"""

from fractions import Fraction

import pytest

from polyrep.cushion import CushionParams, certify_kappa, kappa_poly, mu_exponent, mu_poly
from polyrep.cushion_cache import CushionCache, cache_key
from polyrep.errors import PreconditionError
from polyrep.poly import SparsePoly

F = Fraction
T = SparsePoly.variable(1, 0)

PARAMETERS = [(F(1, 4), F(1)), (F(1, 2), F(1)), (F(1, 2), F(2))]


def grid(lo, hi, steps=64):
    return [lo + (hi - lo) * F(i, steps) for i in range(steps + 1)]


class TestParams:
    """Parameter validation."""

    @pytest.mark.unit
    @pytest.mark.parametrize("delta,rho", [(0, 1), (1, 1), (2, 1), (F(-1, 2), 1)])
    def test_rejects_bad_interval(self, delta, rho):
        with pytest.raises(PreconditionError):
            CushionParams(delta, rho)

    @pytest.mark.unit
    def test_rejects_bad_m(self):
        with pytest.raises(PreconditionError):
            CushionParams(F(1, 4), 1, 0)

    @pytest.mark.unit
    def test_small_bound(self):
        assert CushionParams(F(1, 4), 1, 3).small == F(1, 64)


class TestKappa:
    """The certified kappa satisfies its four properties."""

    @pytest.mark.unit
    def test_example_values(self):
        params = CushionParams(F(1, 4), F(1), 2)
        kappa = kappa_poly(params)
        assert kappa.evaluate((F(-1, 2),)) <= F(1, 16)
        assert kappa.evaluate((F(1, 2),)) >= 2

    @pytest.mark.unit
    def test_properties_on_grid(self):
        params = CushionParams(F(1, 2), F(1), 1)
        kappa = kappa_poly(params)
        assert kappa.evaluate((F(0),)) == 0
        for t in grid(F(-1), F(0)):
            value = kappa.evaluate((t,))
            assert 0 <= value <= F(1, 4)
            if t:
                assert value > 0
        for t in grid(F(0), F(1)):
            assert kappa.evaluate((t,)) <= 3
        for t in grid(F(1, 2), F(1)):
            assert kappa.evaluate((t,)) >= 2

    @pytest.mark.unit
    def test_divisible_by_t_squared(self):
        kappa = kappa_poly(CushionParams(F(1, 2), F(1), 1))
        coeffs = kappa.coefficients()
        assert coeffs[0] == 0 and coeffs[1] == 0

    @pytest.mark.slow
    @pytest.mark.parametrize("delta,rho", PARAMETERS)
    @pytest.mark.parametrize("m", [1, 2, 3])
    def test_parameter_grid_certifies(self, delta, rho, m):
        params = CushionParams(delta, rho, m)
        kappa = kappa_poly(params)
        assert certify_kappa(kappa, params).ok

    @pytest.mark.unit
    def test_certificate_rejects_plain_square(self):
        cert = certify_kappa(T**2, CushionParams(F(1, 4), F(1), 1))
        assert not cert.ok
        assert cert.constraint is not None
        assert cert.location is not None

    @pytest.mark.unit
    def test_certificate_rejects_missing_double_root(self):
        cert = certify_kappa(T + T**2, CushionParams(F(1, 4), F(1), 1))
        assert not cert.ok
        assert cert.constraint == "divisible by t^2"

    @pytest.mark.unit
    def test_cached_result_reused(self, tmp_path):
        cache = CushionCache(tmp_path / "kappa.json")
        params = CushionParams(F(1, 2), F(1), 1)
        first = kappa_poly(params, cache=cache)
        assert cache.get(cache_key(params.delta, params.rho, params.m, 1024)) == first
        assert kappa_poly(params, cache=cache) == first


class TestMu:
    """mu only needs its endpoint checks."""

    @pytest.mark.unit
    def test_smallest_exponent(self):
        assert mu_exponent(F(1, 4), F(1)) == 6

    @pytest.mark.unit
    @pytest.mark.parametrize("delta,rho", PARAMETERS)
    def test_bounds(self, delta, rho):
        mu = mu_poly(delta, rho)
        for t in grid(-rho, F(0)):
            value = mu.evaluate((t,))
            assert 0 < value < F(1, 2)
        for t in grid(delta, 4 * rho):
            assert mu.evaluate((t,)) > 2

    @pytest.mark.unit
    def test_rejects_bad_parameters(self):
        with pytest.raises(PreconditionError):
            mu_poly(F(1), F(1, 2))
