import numpy as np
import pytest

from bsq2d.littlewood_paley import phi_k
from bsq2d.probes import (
    GainFit,
    ProbeGeometry,
    ProbeResult,
    _maximize,
    angular_bilinear_probe,
    b_smoothing_scan,
    bilinear_ratio,
    fit_gain,
    smoothing_grid,
)


def _brute_apply(n, k, k1, k2, l, F_full, G):
    """Direct lattice sum ``sum_p F(p) G(xi-p) phi_k(|xi|) phi_l(angle(xi, xi-p))`` with explicit loops."""
    idx = np.fft.fftfreq(n, d=1.0 / n).astype(int)
    out = np.zeros((n, n), dtype=complex)
    fpts = [(i, j) for i in range(n) for j in range(n) if phi_k(np.hypot(idx[i], idx[j]), k1) > 0]
    for a in range(n):
        for b in range(n):
            x = np.array([idx[a], idx[b]], float)
            wk = phi_k(np.hypot(*x), k)
            if wk == 0:
                continue
            acc = 0j
            for i, j in fpts:
                p = np.array([idx[i], idx[j]], float)
                q = x - p
                if phi_k(np.hypot(*q), k2) == 0:
                    continue
                th = np.arctan2(abs(x[0] * q[1] - x[1] * q[0]), x @ q)
                acc += F_full[i, j] * G[int(q[0]) % n, int(q[1]) % n] * phi_k(th, l)
            out[a, b] = wk * acc
    return out


class TestGeometry:
    def test_required_n(self):
        assert ProbeGeometry.required_n(7, 1, 7) == 512
        assert ProbeGeometry.required_n(3, 0, 3) == 32
        with pytest.raises(ValueError, match="need n >= 512"):
            ProbeGeometry.build(256, 7, 1, 7, -5)

    def test_no_low_shell(self):
        with pytest.raises(ValueError):
            ProbeGeometry.build(64, 4, -3, 4, -3)

    def test_apply_matches_brute_force(self, rng):
        n, k, k1, k2, l = 32, 3, 1, 3, -2
        geom = ProbeGeometry.build(n, k, k1, k2, l)
        assert not geom.empty
        F = rng.standard_normal(len(geom.offsets)) + 1j * rng.standard_normal(len(geom.offsets))
        G = np.where(geom.g_support, rng.standard_normal((n, n)), 0.0)
        F_full = np.zeros((n, n), dtype=complex)
        for f, (p1, p2) in zip(F, geom.offsets):
            F_full[p1 % n, p2 % n] = f
        ref = _brute_apply(n, k, k1, k2, l, F_full, G)
        assert np.allclose(geom.apply(F, G), ref, atol=1e-12)

    def test_adjoint(self, rng):
        geom = ProbeGeometry.build(64, 4, 1, 4, -3)
        m = len(geom.offsets)
        F = rng.standard_normal(m) + 1j * rng.standard_normal(m)
        G = np.where(geom.g_support, rng.standard_normal((64, 64)) + 1j * rng.standard_normal((64, 64)), 0)
        H = rng.standard_normal((64, 64)) + 1j * rng.standard_normal((64, 64))
        lhs = np.vdot(H, geom.apply(F, G))
        rhs = np.vdot(geom.adjoint_g(F, H), G)
        assert lhs == pytest.approx(rhs, rel=1e-12)

    def test_columns(self, rng):
        geom = ProbeGeometry.build(32, 3, 0, 3, -2)
        m = len(geom.offsets)
        F = rng.standard_normal(m)
        G = np.where(geom.g_support, rng.standard_normal((32, 32)), 0)
        assert np.allclose(geom.columns(G) @ F, geom.apply(F, G).ravel())


class TestProbe:
    def test_validation(self):
        with pytest.raises(ValueError):
            angular_bilinear_probe(7, 1, 3, -4, n=512)
        with pytest.raises(ValueError):
            angular_bilinear_probe(7, 1, 7, -1, n=512)

    def test_empty_sector(self):
        # |p| <= 1.5 and |xi| >= 10 keep every angle below 0.15, outside the l = -2 shell
        r = angular_bilinear_probe(4, 0, 4, -2, trials=1, n=64)
        assert r.empty and r.ratio == 0.0

    def test_maximizer_beats_random_inputs(self, rng):
        geom = ProbeGeometry.build(64, 4, 1, 4, -3)
        best = _maximize(geom, np.random.default_rng(0), sweeps=4, power_steps=3)
        m = len(geom.offsets)
        for _ in range(5):
            F = rng.standard_normal(m)
            G = np.where(geom.g_support, rng.standard_normal((64, 64)), 0)
            assert bilinear_ratio(geom, F, G) <= best * (1 + 1e-12)

    def test_ratio_zero_inputs(self):
        geom = ProbeGeometry.build(32, 3, 0, 3, -2)
        assert bilinear_ratio(geom, np.zeros(len(geom.offsets)), np.ones((32, 32))) == 0.0

    def test_deterministic(self):
        a = angular_bilinear_probe(4, 1, 4, -3, trials=2, n=64, seed=3)
        b = angular_bilinear_probe(4, 1, 4, -3, trials=2, n=64, seed=3)
        assert a.trial_ratios == b.trial_ratios and not a.empty


class TestFit:
    def test_recovers_synthetic_slope(self):
        res = [ProbeResult(l, 2.0 ** (0.5 * l + 1.0), [], False) for l in range(-3, -9, -1)]
        fit = fit_gain(res)
        assert fit.exponent == pytest.approx(0.5) and fit.intercept == pytest.approx(1.0)
        assert fit.used_l == [-3, -4, -5, -6, -7, -8] and fit.empty_l == []

    def test_skips_empty(self):
        res = [ProbeResult(-3, 0.0, [0.0], True)] + [ProbeResult(l, 2.0**l, [], False) for l in (-4, -5)]
        fit = fit_gain(res)
        assert fit.empty_l == [-3] and fit.exponent == pytest.approx(1.0)
        assert fit.to_dict()["ratios"]["-3"] == 0.0

    def test_too_few_points(self):
        fit = fit_gain([ProbeResult(-3, 1.0, [], False)])
        assert isinstance(fit, GainFit) and fit.exponent is None and fit.max_ratio == 1.0


class TestSmoothing:
    def test_grid_holds_band(self):
        g = smoothing_grid([0.04, 0.01], (48, 56), dk=2)
        assert g.n % 2 == 0 and g.dk == pytest.approx(2.0)
        top = 56 / np.sqrt(0.01)
        assert 3 * (np.ceil(top / 2) + 2) < g.n + 1

    def test_rejects_band_inside_paraproduct_gap(self):
        with pytest.raises(ValueError, match="too close"):
            b_smoothing_scan([0.16, 0.04])

    def test_small_scan(self):
        scan = b_smoothing_scan([0.04, 0.01], ks=(0, 1), band=(48, 56))
        assert scan.exponents[0] == pytest.approx(0.0, abs=0.15)
        assert scan.exponents[1] == pytest.approx(-0.5, abs=0.15)
        d = scan.to_dict()
        assert d["n"] == scan.n and set(d["exponents"]) == {"0", "1"}
