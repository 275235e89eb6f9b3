import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from bsq2d.random_fields import random_field, random_potential_velocity
from bsq2d.spectral import (
    GridSpec,
    Multiplier,
    SpectralScalar,
    SpectralVector2,
    abs_d,
    apply_multiplier,
    bracket,
    curl,
    curl_free_project,
    dealias,
    div,
    forward_transform,
    grad,
    inv_abs_d,
    inverse_transform,
    l2_norm,
    laplacian,
    linf_norm,
    product,
    sobolev_norm,
)

from conftest import brute_dft


class TestGridSpec:
    @pytest.mark.parametrize("n", [7, 9, 4, 0, -8])
    def test_rejects_bad_sizes(self, n):
        with pytest.raises(ValueError):
            GridSpec(n)

    @pytest.mark.parametrize("length", [0.0, -1.0, np.inf, np.nan])
    def test_rejects_bad_length(self, length):
        with pytest.raises(ValueError):
            GridSpec(16, length)

    def test_wavenumbers(self):
        g = GridSpec(8, 4 * np.pi)
        assert g.dk == pytest.approx(0.5)
        assert sorted(set(g.index[0][:, 0])) == [-4, -3, -2, -1, 0, 1, 2, 3]
        assert g.kx[3, 0] == pytest.approx(1.5)

    def test_masks(self):
        g = GridSpec(12)
        assert not g.matched_mask[6, :].any() and not g.matched_mask[:, 6].any()
        assert g.matched_mask.sum() == 11 * 11
        ix, _ = g.index
        # 2/3 rule keeps |i| < 4 on n = 12
        assert set(np.abs(ix[g.dealias_mask])) == {0, 1, 2, 3}

    def test_reflect_is_negation(self, grid64):
        arr = grid64.kx + 3.0 * grid64.ky
        refl = grid64.reflect(arr)
        m = grid64.matched_mask
        assert np.array_equal(refl[m], -arr[m])


class TestTransforms:
    def test_forward_matches_direct_sum(self, rng):
        g = GridSpec(16, 2 * np.pi)
        vals = rng.standard_normal((16, 16))
        ref = brute_dft(vals)
        ref[~g.matched_mask] = 0.0
        assert np.allclose(forward_transform(g, vals).coeffs, ref, atol=1e-11)

    def test_roundtrip_band_limited(self, grid64, rng):
        f = random_field(grid64, rng, k_hi=20)
        back = forward_transform(grid64, inverse_transform(f).real)
        assert np.abs(back.coeffs - f.coeffs).max() <= 1e-12 * np.abs(f.coeffs).max()

    def test_nyquist_dropped(self):
        g = GridSpec(8)
        x, _ = g.coords
        # cos(4 x) on n = 8 lives entirely on the Nyquist row
        f = forward_transform(g, np.cos(4 * g.dk * x))
        assert np.abs(f.coeffs).max() == 0.0

    def test_shape_checks(self, grid64):
        with pytest.raises(ValueError):
            forward_transform(grid64, np.zeros((32, 32)))
        with pytest.raises(ValueError):
            SpectralScalar(grid64, np.zeros((8, 8)))

    def test_parseval_equals_quadrature(self, rng):
        g = GridSpec(32, 3.0)
        f = random_field(g, rng)
        vals = inverse_transform(f)
        quad = np.sqrt(np.sum(np.abs(vals) ** 2) * (g.length / g.n) ** 2)
        assert l2_norm(f) == pytest.approx(quad, rel=1e-13)

    def test_hermitian_parts(self, grid64, rng):
        a = random_field(grid64, rng)
        b = random_field(grid64, rng)
        c = a + 1j * b
        assert np.allclose(c.real_part().coeffs, a.coeffs, atol=1e-9)
        assert np.allclose(c.imag_part().coeffs, b.coeffs, atol=1e-9)
        assert a.hermitian_defect() < 1e-14
        assert c.hermitian_defect() > 0.1


class TestOperators:
    def test_derivatives_analytic(self, grid64):
        x, y = grid64.coords
        u = forward_transform(grid64, np.sin(3 * x) * np.cos(2 * y))
        gu = grad(u)
        assert np.allclose(gu.x.values().real, 3 * np.cos(3 * x) * np.cos(2 * y), atol=1e-12)
        assert np.allclose(gu.y.values().real, -2 * np.sin(3 * x) * np.sin(2 * y), atol=1e-12)
        assert np.allclose(laplacian(u).values().real, -13 * np.sin(3 * x) * np.cos(2 * y), atol=1e-11)

    def test_div_and_curl_analytic(self, grid64):
        x, y = grid64.coords
        v = SpectralVector2(forward_transform(grid64, np.cos(y)), forward_transform(grid64, np.sin(2 * x)))
        assert np.allclose(div(v).values().real, 0.0, atol=1e-12)
        assert np.allclose(curl(v).values().real, 2 * np.cos(2 * x) + np.sin(y), atol=1e-12)

    def test_projection(self, grid64, rng):
        pot = random_potential_velocity(grid64, rng, k_hi=20)
        psi = random_field(grid64, rng, k_hi=20)
        rot = SpectralVector2(psi.with_coeffs(1j * grid64.ky * psi.coeffs), psi.with_coeffs(-1j * grid64.kx * psi.coeffs))
        p = curl_free_project(pot + rot)
        assert l2_norm(p - pot) <= 1e-13 * l2_norm(pot)
        assert l2_norm(curl(p)) <= 1e-13 * l2_norm(p)

    def test_multiplier_composition(self, grid64, rng):
        f = random_field(grid64, rng)
        comp = apply_multiplier(abs_d() * inv_abs_d(), f)
        assert np.abs(comp.coeffs - f.coeffs).max() <= 1e-13 * np.abs(f.coeffs).max()

    def test_inverse_abs_zero_at_origin(self, grid64):
        assert inv_abs_d().evaluate(grid64)[0, 0] == 0.0

    def test_multiplier_support_and_finiteness(self, grid64):
        m = Multiplier(lambda kx, ky: np.ones_like(kx), support=lambda kx, ky: kx > 0)
        vals = m.evaluate(grid64)
        assert np.all(vals[grid64.kx <= 0] == 0) and np.all(vals[grid64.kx > 0] == 1)
        with np.errstate(divide="ignore"):
            bad = Multiplier(lambda kx, ky: 1.0 / kx, name="bad")
            with pytest.raises(ValueError):
                bad.evaluate(grid64)

    def test_product_of_modes_exact(self, grid64):
        x, y = grid64.coords
        f = forward_transform(grid64, np.cos(3 * x))
        g = forward_transform(grid64, np.sin(5 * y))
        # both factors and their product sit well inside the 2/3 band
        assert np.allclose(product(f, g).values().real, np.cos(3 * x) * np.sin(5 * y), atol=1e-13)

    def test_product_drops_aliased_modes(self):
        g = GridSpec(12, 2 * np.pi)
        x, _ = g.coords
        f = forward_transform(g, np.cos(3 * x))
        # cos^2(3x) = (1 + cos 6x)/2 and |6| >= n/3, so only the mean survives
        assert np.allclose(product(f, f).values().real, 0.5, atol=1e-14)

    def test_dealias_idempotent(self, grid64, rng):
        f = dealias(random_field(grid64, rng))
        assert np.array_equal(dealias(f).coeffs, f.coeffs)


class TestNorms:
    @pytest.mark.parametrize("s", [0.0, 1.0, 2.5, -1.0])
    def test_single_mode_sobolev(self, s):
        g = GridSpec(32, 2 * np.pi)
        x, y = g.coords
        f = forward_transform(g, np.cos(3 * x + 4 * y))
        # ||cos||_L2^2 = L^2 / 2 and <xi>^2 = 1 + 25
        expected = np.sqrt(g.length**2 / 2) * 26.0 ** (s / 2)
        assert sobolev_norm(f, s) == pytest.approx(expected, rel=1e-12)

    def test_vector_norm_sums_components(self, grid64, rng):
        a, b = random_field(grid64, rng), random_field(grid64, rng)
        v = SpectralVector2(a, b)
        assert sobolev_norm(v, 2) ** 2 == pytest.approx(sobolev_norm(a, 2) ** 2 + sobolev_norm(b, 2) ** 2)

    def test_linf(self, grid64):
        x, y = grid64.coords
        assert linf_norm(forward_transform(grid64, 2.0 * np.sin(x) * np.sin(y))) == pytest.approx(2.0, abs=1e-3)
        v = SpectralVector2(forward_transform(grid64, np.sin(x)), forward_transform(grid64, np.cos(x)))
        assert linf_norm(v) == pytest.approx(1.0, rel=1e-12)

    @given(st.floats(-3, 3), st.floats(0.1, 5.0))
    def test_bracket_monotone_in_s(self, s, ds):
        g = GridSpec(16, 2 * np.pi)
        f = forward_transform(g, np.cos(g.coords[0]) + np.sin(3 * g.coords[1]))
        assert sobolev_norm(f, s + ds) >= sobolev_norm(f, s)
        b = bracket(s).evaluate(g)
        assert np.allclose(b.real, (1 + g.ksq) ** (s / 2))

    @given(st.integers(0, 2**31 - 1), st.floats(-2, 2), st.floats(-2, 2))
    def test_transform_linear(self, seed, a, b):
        g = GridSpec(16, 2 * np.pi)
        r = np.random.default_rng(seed)
        u, w = r.standard_normal((16, 16)), r.standard_normal((16, 16))
        lhs = forward_transform(g, a * u + b * w).coeffs
        rhs = a * forward_transform(g, u).coeffs + b * forward_transform(g, w).coeffs
        assert np.allclose(lhs, rhs, atol=1e-10)
