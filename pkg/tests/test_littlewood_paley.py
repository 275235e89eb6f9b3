import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from bsq2d.littlewood_paley import (
    Band,
    CutoffProfile,
    band_weights,
    commutator_probe,
    paraproduct_T,
    phi,
    phi_ge,
    phi_interval,
    phi_k,
    phi_le,
    project,
    remainder_R,
)
from bsq2d.random_fields import random_field
from bsq2d.spectral import GridSpec, SpectralScalar, SpectralVector2, l2_norm, product

from conftest import brute_bilinear as _brute_bilinear
from conftest import sparse_low_field as _sparse_low


class TestCutoff:
    def test_plateau_and_tail(self):
        x = np.linspace(-1.25, 1.25, 1001)
        assert np.all(phi(x) == 1.0)
        assert np.all(phi(np.linspace(1.5, 40, 1001)) == 0.0)
        assert np.all(phi(-np.linspace(1.5, 40, 1001)) == 0.0)

    def test_monotone_and_bounded(self):
        x = np.linspace(1.25, 1.5, 20001)
        y = phi(x)
        assert np.all(np.diff(y) <= 0) and y.min() >= 0 and y.max() <= 1

    def test_smooth_at_endpoints(self):
        # every derivative vanishes at the joins, so the transition is flat there
        h = 1e-3
        assert 1.0 - phi(1.25 + h) < 1e-100
        assert phi(1.5 - h) < 1e-100

    def test_midpoint_symmetry(self):
        # h(1-t)/(h(1-t)+h(t)) is symmetric about t = 1/2
        t = np.linspace(0.01, 0.99, 99)
        x1 = 1.25 + 0.25 * t
        x2 = 1.25 + 0.25 * (1 - t)
        assert np.allclose(phi(x1) + phi(x2), 1.0, atol=1e-15)

    def test_custom_profile(self):
        p = CutoffProfile(1.0, 2.0)
        assert p(0.5) == 1.0 and p(2.5) == 0.0 and 0 < p(1.5) < 1

    @pytest.mark.parametrize("k", [-3, 0, 4, 9])
    def test_shell_support(self, k):
        x = np.linspace(0, 4 * 2.0**k, 40001)
        y = phi_k(x, k)
        inside = (x > 0.625 * 2.0**k) & (x < 1.5 * 2.0**k)
        assert np.all(y[~inside] == 0.0)
        assert np.all(y >= 0.0)
        assert np.all(y[(x >= 0.63 * 2.0**k) & (x <= 1.49 * 2.0**k)] > 0)

    @given(st.floats(0, 1e4), st.integers(-5, 5), st.integers(0, 8))
    def test_interval_telescopes(self, x, a, width):
        b = a + width
        total = sum(phi_k(x, k) for k in range(a, b + 1))
        assert float(phi_interval(x, a, b)) == pytest.approx(float(total), abs=1e-12)

    @given(st.floats(0, 1e4), st.integers(-5, 10))
    def test_le_ge_complement(self, x, k):
        assert float(phi_le(x, k - 1) + phi_ge(x, k)) == pytest.approx(1.0, abs=1e-15)

    def test_empty_interval(self):
        assert np.all(phi_interval(np.array([1.0, 2.0]), 3, 2) == 0.0)


class TestBands:
    def test_partition_of_unity_on_grid(self, grid128):
        kmin, kmax = grid128.dyadic_range
        total = sum(band_weights(grid128, Band.shell(j)) for j in range(kmin, kmax + 1))
        nz = grid128.kabs > 0
        assert np.abs(total[nz] - 1).max() < 1e-14
        assert total[0, 0] == 0.0

    @pytest.mark.parametrize(
        "band, ref",
        [
            (Band.shell(3), lambda r: phi_k(r, 3)),
            (Band.at_most(2), lambda r: phi_le(r, 2)),
            (Band.at_least(4), lambda r: phi_ge(r, 4)),
            (Band.interval(1, 3), lambda r: phi_interval(r, 1, 3)),
        ],
    )
    def test_band_kinds(self, grid64, band, ref):
        assert np.array_equal(band_weights(grid64, band), ref(grid64.kabs))

    def test_bad_kind(self):
        with pytest.raises(ValueError):
            Band("bogus", 0).weights(1.0)

    def test_weights_read_only(self, grid64):
        w = band_weights(grid64, Band.shell(2))
        with pytest.raises(ValueError):
            w[0, 0] = 1.0

    def test_project_scaled(self, grid64, rng):
        f = random_field(grid64, rng)
        p = project(f, Band.at_most(1), scale=0.5)
        assert np.array_equal(p.coeffs, phi_le(0.5 * grid64.kabs, 1) * f.coeffs)


class TestParaproducts:
    def test_completeness_random(self, grid128, rng):
        for _ in range(5):
            f = random_field(grid128, rng, k_hi=40)
            g = random_field(grid128, rng, k_hi=40)
            fg = product(f, g)
            rec = paraproduct_T(f, g) + paraproduct_T(g, f) + remainder_R(f, g)
            assert l2_norm(fg - rec) <= 1e-11 * l2_norm(fg)

    def test_paraproduct_matches_direct_sum(self, rng):
        grid = GridSpec(384, 2 * np.pi)
        f = _sparse_low(grid, rng, 1.2)
        g = random_field(grid, rng, k_lo=100, k_hi=125)
        kmin, kmax = grid.dyadic_range

        def sym(rp, rq):
            return sum(phi_le(rp, j - 7) * phi_k(rq, j) for j in range(kmin, kmax + 1))

        ref = _brute_bilinear(f, g, sym)
        got = paraproduct_T(f, g).coeffs
        assert np.abs(got).max() > 0
        assert np.abs(got - ref).max() <= 1e-10 * np.abs(ref).max()

    def test_remainder_matches_direct_sum(self, rng):
        grid = GridSpec(64, 2 * np.pi)
        f = _sparse_low(grid, rng, 15.0, count=6)
        g = random_field(grid, rng, k_hi=20)
        kmin, kmax = grid.dyadic_range

        def sym(rp, rq):
            return sum(phi_k(rp, j) * phi_interval(rq, j - 6, j + 6) for j in range(kmin, kmax + 1))

        ref = _brute_bilinear(f, g, sym)
        assert np.abs(remainder_R(f, g).coeffs - ref).max() <= 1e-10 * np.abs(ref).max()

    def test_small_grid_has_no_paraproduct(self, grid64, rng):
        # the low factor sits 7 shells below the high one, which a 64^2 lattice cannot hold
        f, g = random_field(grid64, rng), random_field(grid64, rng)
        assert np.abs(paraproduct_T(f, g).coeffs).max() == 0.0
        assert l2_norm(remainder_R(f, g) - product(f, g)) <= 1e-12 * l2_norm(product(f, g))

    def test_vector_componentwise(self, grid128, rng):
        a = random_field(grid128, rng)
        v = SpectralVector2(random_field(grid128, rng), random_field(grid128, rng))
        tv = paraproduct_T(a, v)
        assert np.array_equal(tv.x.coeffs, paraproduct_T(a, v.x).coeffs)
        rv = remainder_R(a, v)
        assert np.array_equal(rv.y.coeffs, remainder_R(a, v.y).coeffs)

    def test_output_real(self, grid128, rng):
        f, g = random_field(grid128, rng), random_field(grid128, rng)
        assert remainder_R(f, g).hermitian_defect() < 1e-12


class TestCommutator:
    def test_constant_symbol_vanishes(self, grid64, rng):
        a = SpectralScalar.zeros(grid64)
        b = random_field(grid64, rng)
        assert commutator_probe(a, b, 1.0) == 0.0

    def test_scale_invariant_and_finite(self, rng):
        grid = GridSpec(512, 2 * np.pi)
        a = random_field(grid, rng, k_hi=1.2)
        b = random_field(grid, rng, k_lo=100, k_hi=160)
        r1 = commutator_probe(a, b, 1.0)
        r2 = commutator_probe(3.0 * a, 0.25 * b, 1.0)
        assert np.isfinite(r1) and r1 > 0
        assert r2 == pytest.approx(r1, rel=1e-12)
