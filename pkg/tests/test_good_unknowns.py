import numpy as np
import pytest

from bsq2d.experiment import symmetrize_consistency
from bsq2d.good_unknowns import (
    TERM_GROUPS,
    ReconstructionError,
    b_eps,
    b_multiplier,
    estimate_b_constant,
    linearized_rhs,
    profile_of,
    reconstruct,
    symmetrized_rhs,
    to_good_unknowns,
)
from bsq2d.littlewood_paley import phi_ge, phi_k, phi_le
from bsq2d.model import State, lambda_eps
from bsq2d.random_fields import random_field, random_potential_velocity, random_state
from bsq2d.spectral import GridSpec, SpectralVector2, curl_free_project, l2_norm, sobolev_norm

from conftest import brute_bilinear, sparse_low_field

EPS = 0.16  # puts the B support sqrt(eps)|xi| >= 40 at |xi| >= 100, inside a 384^2 lattice


@pytest.fixture(scope="module")
def active():
    """State whose low elevation and high velocity make every B-dependent term nonzero."""
    g = GridSpec(384, 2 * np.pi)
    rng = np.random.default_rng(0)
    z = random_field(g, rng, k_hi=1.2, amplitude=0.5) + random_field(g, rng, k_lo=100, k_hi=125, amplitude=0.2)
    v = random_potential_velocity(g, rng, k_lo=100, k_hi=125, amplitude=0.3) + random_potential_velocity(
        g, rng, k_hi=1.2, amplitude=0.3
    )
    return State(z, v)


class TestBOperator:
    def test_multiplier_formula(self):
        g = GridSpec(384, 2 * np.pi)
        M = b_multiplier(g, EPS)
        k = g.kabs
        ref = phi_ge(np.sqrt(EPS) * k, 6) / (1 - EPS * k**2)
        sup = np.sqrt(EPS) * k > 40
        assert not np.any(M[~sup])
        assert np.count_nonzero(M) > 0
        assert np.allclose(M[sup], ref[sup], rtol=1e-14)

    def test_matches_direct_sum(self, rng):
        g = GridSpec(384, 2 * np.pi)
        f = sparse_low_field(g, rng, 1.2)
        w = random_potential_velocity(g, rng, k_lo=100, k_hi=125)
        kmin, kmax = g.dyadic_range

        def sym_for(q_weight):
            def sym(rp, rq):
                t = sum(phi_le(rp, j - 7) * phi_k(rq, j) for j in range(kmin, kmax + 1))
                return 0.5 * t * q_weight(rq)

            return sym

        def m_of(rq):
            out = np.zeros_like(rq)
            s = np.sqrt(EPS) * rq > 40
            out[s] = phi_ge(np.sqrt(EPS) * rq[s], 6) / (1 - EPS * rq[s] ** 2)
            return out

        got = b_eps(f, w, EPS)
        ref = brute_bilinear(f, w.x, sym_for(m_of))
        assert np.abs(got.x.coeffs).max() > 0
        assert np.abs(got.x.coeffs - ref).max() <= 1e-10 * np.abs(ref).max()

    def test_vanishes_below_cutoff(self, rng):
        g = GridSpec(384, 2 * np.pi)
        f = random_field(g, rng, k_hi=1.2)
        low = random_potential_velocity(g, rng, k_hi=39.9 / np.sqrt(EPS))
        assert l2_norm(b_eps(f, low, EPS)) == 0.0

    def test_real_and_bilinear(self, active):
        B = b_eps(active.zeta, active.v, EPS)
        assert max(B.x.hermitian_defect(), B.y.hermitian_defect()) < 1e-12
        B2 = b_eps(2.0 * active.zeta, 3.0 * active.v, EPS)
        assert l2_norm(B2 - 6.0 * B) <= 1e-13 * l2_norm(B2)

    def test_constant_estimate(self, active):
        c = estimate_b_constant([active.zeta], [active.v], EPS, 1.0)
        assert np.isfinite(c) and c > 0
        assert estimate_b_constant([active.zeta * 0.0], [active.v], EPS, 1.0) == 0.0


class TestGoodUnknowns:
    def test_V_structure(self, active):
        gs = to_good_unknowns(active, EPS)
        # Re V = zeta and Im V = |D|^-1 div u
        assert np.allclose(gs.V.real_part().coeffs, active.zeta.coeffs, atol=1e-9 * np.abs(active.zeta.coeffs).max())
        u = active.v + EPS * b_eps(active.zeta, active.v, EPS)
        assert l2_norm(gs.u - u) == 0.0

    def test_reconstruct_roundtrip(self, active):
        gs = to_good_unknowns(active, EPS)
        back = reconstruct(gs, EPS)
        assert l2_norm(back.zeta - active.zeta) <= 1e-13 * l2_norm(active.zeta)
        assert l2_norm(back.v - active.v) <= 1e-13 * l2_norm(active.v)
        # dropping the correction would be a visible error, so B is really in play
        naive = gs.u
        assert l2_norm(curl_free_project(naive) - active.v) > 1e4 * l2_norm(back.v - active.v)

    def test_reconstruct_reports_failure(self, active):
        gs = to_good_unknowns(active, EPS)
        with pytest.raises(ReconstructionError) as info:
            reconstruct(gs, EPS, tol=0.0, max_iter=1)
        assert info.value.iterations == 1 and info.value.residual > 0

    def test_profile_isometry(self, grid64, rng):
        s = random_state(grid64, rng)
        gs = to_good_unknowns(s, 0.01)
        gs = type(gs)(gs.u, gs.V, 3.7)
        p = profile_of(gs, 0.01, 5)
        assert sobolev_norm(p.f, 0) == pytest.approx(sobolev_norm(gs.V, 0), rel=1e-14)
        assert l2_norm(p.g) == pytest.approx(sobolev_norm(gs.V, 5), rel=1e-13)
        ph = np.exp(-1j * 3.7 * lambda_eps(grid64.kabs, 0.01))
        assert np.allclose(p.f.coeffs, ph * gs.V.coeffs)


class TestSymmetrizedEquation:
    def test_terms_and_ledger(self, active):
        gs = to_good_unknowns(active, EPS)
        rhs = symmetrized_rhs(gs, active, EPS)
        names = [t for g in TERM_GROUPS.values() for t in g]
        assert list(rhs.terms) == names
        led = rhs.ledger(5)
        assert set(TERM_GROUPS) <= set(led)
        assert all(np.isfinite(x) for x in led.values())
        for key in ("N_low_B", "Nz_B", "Nu_B_div", "Nu_transport_B", "Nu_B_kinetic"):
            assert led[key] > 0, key
        total = sum((rhs.group(g).coeffs for g in TERM_GROUPS), np.zeros_like(gs.V.coeffs))
        assert np.allclose(rhs.total().coeffs, total)

    def test_forms_agree(self, active):
        gs = to_good_unknowns(active, EPS)
        a = symmetrized_rhs(gs, active, EPS).total().coeffs
        b = linearized_rhs(gs, active, EPS).coeffs
        assert np.abs(a - b).max() <= 1e-10 * np.abs(a).max()

    def test_finite_difference_order(self, active):
        # steps kept above the round-off floor of this stiff lattice
        h = [8 * 2.1579332635448995e-08 / 2**i for i in range(5)]
        rep = symmetrize_consistency(active, EPS, dts=h)
        assert rep.passed(), rep.to_dict()

    def test_zero_state(self, grid64):
        rep = symmetrize_consistency(State.zeros(grid64), 0.01)
        assert rep.scale == 0.0 and rep.form_gap == 0.0
        assert max(rep.err_symmetrized + rep.drift_err_linearized) == 0.0
        assert rep.passed()
