"""Invariant suites with a machine-readable report.

Each suite is a list of small checks that return a measured value and a
threshold. The suites are fast enough to run on every build; the heavier
experiments live in :mod:`bsq2d.experiment` and the acceptance tests.
"""

from __future__ import annotations

import time
from dataclasses import asdict, dataclass, field
from typing import Callable

import numpy as np

__all__ = ["Check", "SuiteReport", "SUITES", "run_suite", "verify"]


@dataclass
class Check:
    name: str
    passed: bool
    value: float
    threshold: float
    detail: str = ""


@dataclass
class SuiteReport:
    suite: str
    checks: list[Check] = field(default_factory=list)
    elapsed_s: float = 0.0

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def to_dict(self) -> dict:
        return {"suite": self.suite, "passed": self.passed, "elapsed_s": self.elapsed_s, "checks": [asdict(c) for c in self.checks]}


def _le(name: str, value: float, threshold: float, detail: str = "") -> Check:
    return Check(name, bool(value <= threshold), float(value), float(threshold), detail)


def _ge(name: str, value: float, threshold: float, detail: str = "") -> Check:
    return Check(name, bool(value >= threshold), float(value), float(threshold), detail)


# suites -----------------------------------------------------------------------------


def _spectral() -> list[Check]:
    from .random_fields import random_field, random_potential_velocity
    from .spectral import (
        GridSpec,
        Multiplier,
        abs_d,
        apply_multiplier,
        curl,
        curl_free_project,
        dealias,
        div,
        forward_transform,
        grad,
        inverse_transform,
        inv_abs_d,
        laplacian,
        l2_norm,
    )

    rng = np.random.default_rng(0)
    grid = GridSpec(64, 2 * np.pi)
    f = random_field(grid, rng, k_hi=20)
    vals = inverse_transform(f)
    back = forward_transform(grid, vals.real)
    out = [_le("roundtrip", np.abs(back.coeffs - f.coeffs).max() / np.abs(f.coeffs).max(), 1e-12)]
    quad = np.sqrt(np.sum(np.abs(vals) ** 2) * (grid.length / grid.n) ** 2)
    out.append(_le("parseval", abs(quad - l2_norm(f)) / quad, 1e-12))
    x, y = grid.coords
    u = np.sin(3 * x) * np.cos(2 * y)
    fu = forward_transform(grid, u)
    g = grad(fu)
    ex = 3 * np.cos(3 * x) * np.cos(2 * y)
    out.append(_le("grad_analytic", np.abs(g.x.values().real - ex).max(), 1e-12))
    out.append(_le("laplacian_analytic", np.abs(laplacian(fu).values().real + 13 * u).max(), 1e-11))
    out.append(_le("div_grad_is_laplacian", np.abs(div(g).coeffs - laplacian(fu).coeffs).max(), 1e-9))
    comp = apply_multiplier(abs_d() * inv_abs_d(), f)
    out.append(_le("multiplier_composition", np.abs(comp.coeffs - f.coeffs).max() / np.abs(f.coeffs).max(), 1e-13))
    v = random_potential_velocity(grid, rng, k_hi=20)
    mixed = v + _rotational_field(grid, rng)
    p = curl_free_project(mixed)
    out.append(_le("projection_curl_free", l2_norm(curl(p)) / l2_norm(p), 1e-13))
    pp = curl_free_project(p)
    out.append(_le("projection_idempotent", l2_norm(pp - p) / l2_norm(p), 1e-13))
    d = dealias(f)
    out.append(_le("dealias_idempotent", np.abs(dealias(d).coeffs - d.coeffs).max(), 0.0))
    one = Multiplier(lambda kx, ky: np.ones_like(kx), name="one")
    out.append(_le("identity_multiplier", np.abs(apply_multiplier(one, f).coeffs - f.coeffs).max(), 0.0))
    return out


def _rotational_field(grid, rng):
    """Divergence-free field ``(d2 psi, -d1 psi)`` for a random stream function."""
    from .random_fields import random_field
    from .spectral import SpectralVector2

    psi = random_field(grid, rng, k_hi=20)
    return SpectralVector2(psi.with_coeffs(1j * grid.ky * psi.coeffs), psi.with_coeffs(-1j * grid.kx * psi.coeffs))


def _lp() -> list[Check]:
    from .littlewood_paley import Band, band_weights, commutator_probe, paraproduct_T, phi_k, remainder_R
    from .random_fields import random_field
    from .spectral import GridSpec, l2_norm, product

    grid = GridSpec(128, 2 * np.pi)
    kmin, kmax = grid.dyadic_range
    total = sum(band_weights(grid, Band.shell(j)) for j in range(kmin, kmax + 1))
    nz = grid.kabs > 0
    out = [_le("partition_of_unity", np.abs(total[nz] - 1.0).max(), 1e-14)]
    xs = np.linspace(0, 100, 20001)
    out.append(_ge("shell_nonnegative", float(min(phi_k(xs, k).min() for k in range(-2, 8))), 0.0))
    rng = np.random.default_rng(1)
    worst = 0.0
    for _ in range(5):
        f = random_field(grid, rng, k_hi=40)
        g = random_field(grid, rng, k_hi=40)
        fg = product(f, g)
        rec = paraproduct_T(f, g) + paraproduct_T(g, f) + remainder_R(f, g)
        worst = max(worst, l2_norm(fg - rec) / l2_norm(fg))
    out.append(_le("paraproduct_completeness", worst, 1e-11))
    big = GridSpec(512, 2 * np.pi)
    a = random_field(big, rng, k_hi=1.2)
    b = random_field(big, rng, k_lo=100, k_hi=160)
    ratio = commutator_probe(a, b, 1.0)
    ok = bool(np.isfinite(ratio) and ratio > 0)
    out.append(Check("commutator_ratio_finite", ok, float(ratio), float("inf"), "empirical constant, must be finite and nonzero"))
    return out


def _model() -> list[Check]:
    import warnings

    from .integrators import IntegratorConfig, Stepper, from_characteristic, to_characteristic
    from .model import (
        AbcdParams,
        State,
        WellPosedness,
        dispersion_eigenvalues,
        lambda_eps,
        linear_wellposedness,
        rhs_abcd,
        rhs_special,
    )
    from .random_fields import random_state
    from .spectral import GridSpec, SpectralScalar, SpectralVector2

    out = []
    p = AbcdParams.special(0.01)
    out.append(Check("special_is_exceptional", linear_wellposedness(p) is WellPosedness.EXCEPTIONAL, 1.0, 1.0))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        bad = AbcdParams(1.0, 0.0, -1.0, 0.0, 0.01)
    out.append(Check("mixed_signs_ill_posed", linear_wellposedness(bad) is WellPosedness.ILL_POSED, 1.0, 1.0))
    r = np.linspace(0, 30, 301)
    lp, lm = dispersion_eigenvalues(p, r)
    target = 1j * lambda_eps(r, 0.01)
    # the pair is {+i Lambda, -i Lambda}; the principal root may swap the labels
    gap = np.minimum(np.abs(lp - target), np.abs(lm - target)).max()
    out.append(_le("eigenvalues_match_lambda", gap, 1e-12))
    grid = GridSpec(64, 2 * np.pi)
    s = random_state(grid, np.random.default_rng(2), k_hi=20, amp_zeta=0.3, amp_v=0.3)
    a, b = rhs_abcd(p, s), rhs_special(0.01, s)
    gap = max(np.abs(a.zeta.coeffs - b.zeta.coeffs).max(), np.abs(a.v.x.coeffs - b.v.x.coeffs).max())
    out.append(_le("abcd_matches_special", gap, 1e-12))
    # single-mode linear oscillation
    z = np.zeros((grid.n, grid.n), dtype=complex)
    z[3, 1] = z[-3, -1] = grid.n**2
    zeta = SpectralScalar(grid, z)
    s0 = State(zeta, SpectralVector2.zeros(grid))
    cfg = IntegratorConfig(dt=0.1, nonlinear=False)
    st = Stepper(grid, 0.01, cfg)
    cs = to_characteristic(s0)
    for _ in range(10):
        cs = st.advance(cs)
    s1 = from_characteristic(cs)
    om = lambda_eps(np.hypot(3.0, 1.0), 0.01)
    x, y = grid.coords
    exact = 2 * np.cos(3 * x + y) * np.cos(om * 1.0)
    out.append(_le("linear_mode_exact", np.abs(s1.zeta.values().real - exact).max(), 1e-12))
    return out


def _good_unknowns() -> list[Check]:
    from .experiment import symmetrize_consistency
    from .good_unknowns import b_eps, reconstruct, to_good_unknowns
    from .model import State
    from .random_fields import random_field, random_potential_velocity, random_state
    from .spectral import GridSpec, l2_norm

    out = []
    rng = np.random.default_rng(3)
    # sqrt(eps)|xi| >= 40 lands at |xi| >= 100 and the low factor sits 7 shells below,
    # which needs a 384^2 lattice for B to be nonzero
    grid = GridSpec(384, 2 * np.pi)
    eps = 0.16
    zeta = random_field(grid, rng, k_hi=1.2, amplitude=0.5) + random_field(grid, rng, k_lo=100, k_hi=125, amplitude=0.2)
    v = random_potential_velocity(grid, rng, k_lo=100, k_hi=125, amplitude=0.3)
    s = State(zeta, v)
    B = b_eps(zeta, v, eps)
    out.append(_ge("B_active", l2_norm(B), 1e-300, "B must be nonzero for the roundtrip to be meaningful"))
    back = reconstruct(to_good_unknowns(s, eps), eps)
    err = max(l2_norm(back.zeta - s.zeta) / l2_norm(s.zeta), l2_norm(back.v - s.v) / l2_norm(s.v))
    out.append(_le("reconstruct_roundtrip", err, 1e-12))
    g_low = random_potential_velocity(grid, rng, k_hi=39.9 / np.sqrt(eps))
    f = random_field(grid, rng, k_hi=1.2)
    out.append(_le("B_vanishes_below_cutoff", l2_norm(b_eps(f, g_low, eps)), 0.0))
    out.append(_le("B_real", max(B.x.hermitian_defect(), B.y.hermitian_defect()), 1e-12))
    eps = 0.01
    g2 = GridSpec(64, 2 * np.pi)
    s2 = random_state(g2, rng, k_lo=1, k_hi=20, amp_zeta=0.5, amp_v=0.5)
    rep = symmetrize_consistency(s2, eps)
    out.append(_ge("consistency_order_symmetrized", rep.drift_order_symmetrized or 0.0, 1.9))
    out.append(_ge("consistency_order_linearized", rep.drift_order_linearized or 0.0, 1.9))
    out.append(_le("linearized_vs_symmetrized", rep.form_gap, 1e-10))
    return out


def _phases() -> list[Check]:
    from .littlewood_paley import phi_le
    from .phases import (
        jacobian_check,
        paraproduct_cutoff,
        phase_direct,
        phase_explicit,
        phase_factored,
        sample_regime,
        symbol_q,
        symbol_s,
    )

    rng = np.random.default_rng(4)
    out = []
    n = 100_000
    eps = rng.uniform(1e-3, 1.0, n)
    xi = rng.normal(size=(n, 2)) * rng.uniform(0.1, 50, (n, 1))
    eta = rng.normal(size=(n, 2)) * rng.uniform(0.1, 50, (n, 1))
    worst_e, worst_f = 0.0, 0.0
    for mu in (1, -1):
        for nu in (1, -1):
            d = phase_direct(xi, eta, mu, nu, eps)
            e = phase_explicit(xi, eta, mu, nu, eps)
            worst_e = max(worst_e, float(np.max(np.abs(d - e) / (1.0 + np.abs(d)))))
            if nu == -1:
                fct = phase_factored(xi, eta, mu, nu, eps)
                worst_f = max(worst_f, float(np.max(np.abs(d - fct) / (1.0 + np.abs(d)))))
    out.append(_le("phase_explicit_residual", worst_e, 1e-10))
    out.append(_le("factorization_residual", worst_f, 1e-9))
    e0 = 0.01
    x2, y2, _ = sample_regime(rng, n, e0, (0.25, 64.0), (2.0**-9, 2.0**-3))
    viol = 0
    for mu in (1, -1):
        for nu in (1, -1):
            q = symbol_q(x2, y2, mu, nu, e0)
            inside = (paraproduct_cutoff(x2, y2) != 0) & (phi_le(np.sqrt(e0) * np.hypot(y2[:, 0], y2[:, 1]), 5) != 0)
            viol += int(np.count_nonzero(q[~inside]))
    out.append(_le("q_support_violations", viol, 0))
    s = symbol_s(x2, y2, 1, e0)
    out.append(_le("s_antisymmetry", float(np.abs(np.conj(s) + s).max()), 0.0))
    x3, y3, _ = sample_regime(rng, 10_000, e0, (0.25, 64.0), (2.0**-8, 2.0**-5))
    gaps = [jacobian_check(x3, y3, mu, e0)[1].max() for mu in (1, -1)]
    out.append(_le("jacobian_fd_gap", max(gaps), 1e-6))
    return out


SUITES: dict[str, Callable[[], list[Check]]] = {
    "spectral": _spectral,
    "lp": _lp,
    "model": _model,
    "good_unknowns": _good_unknowns,
    "phases": _phases,
}


def run_suite(name: str) -> SuiteReport:
    if name not in SUITES:
        raise ValueError(f"unknown suite {name!r}; choose from {sorted(SUITES)} or 'all'")
    t = time.perf_counter()
    try:
        checks = SUITES[name]()
    except Exception as exc:  # a crashing suite is reported as a failed check
        checks = [Check("suite_error", False, float("nan"), float("nan"), f"{type(exc).__name__}: {exc}")]
    return SuiteReport(name, checks, time.perf_counter() - t)


def verify(suite: str = "all") -> dict:
    """Run one suite or all of them; returns a JSON-ready report."""
    names = list(SUITES) if suite == "all" else [suite]
    reports = [run_suite(n) for n in names]
    return {"suite": suite, "passed": all(r.passed for r in reports), "suites": [r.to_dict() for r in reports]}
