"""Seeded random fields and states used by tests, probes and experiments."""

from __future__ import annotations

import numpy as np

from .model import State
from .spectral import GridSpec, SpectralScalar, SpectralVector2, sobolev_norm

__all__ = [
    "random_field",
    "random_potential_velocity",
    "random_state",
    "annulus_initial_state",
    "energy",
]


def _hermitian(grid: GridSpec, coeffs: np.ndarray) -> np.ndarray:
    out = 0.5 * (coeffs + np.conj(grid.reflect(coeffs)))
    out[0, 0] = 0.0
    out[~grid.matched_mask] = 0.0
    return out


def random_field(
    grid: GridSpec,
    rng: np.random.Generator,
    k_lo: float = 0.0,
    k_hi: float | None = None,
    slope: float = 0.0,
    amplitude: float = 1.0,
) -> SpectralScalar:
    """Real zero-mean field with Gaussian coefficients on ``k_lo <= |xi| <= k_hi``.

    Coefficients are weighted by ``|xi|^slope``, restricted to the
    dealiased band, and the field is scaled to unit grid maximum times
    ``amplitude``.
    """
    k = grid.kabs
    mask = grid.dealias_mask & (k >= k_lo) & (k > 0)
    if k_hi is not None:
        mask &= k <= k_hi
    if not mask.any():
        raise ValueError("requested band contains no lattice modes")
    c = rng.standard_normal((grid.n, grid.n)) + 1j * rng.standard_normal((grid.n, grid.n))
    c = np.where(mask, c * np.where(k > 0, k, 1.0) ** slope, 0.0)
    c = _hermitian(grid, c)
    f = SpectralScalar(grid, c)
    peak = np.abs(f.values()).max()
    return f * (amplitude / peak) if peak > 0 else f


def random_potential_velocity(grid: GridSpec, rng: np.random.Generator, **kw) -> SpectralVector2:
    """Curl-free velocity ``-|D|^-1 grad w`` for a random ``w`` (same kwargs as :func:`random_field`)."""
    amplitude = kw.pop("amplitude", 1.0)
    w = random_field(grid, rng, **kw)
    inv = np.where(grid.kabs > 0, 1.0 / np.where(grid.kabs > 0, grid.kabs, 1.0), 0.0)
    v = SpectralVector2(w.with_coeffs(-1j * grid.kx * inv * w.coeffs), w.with_coeffs(-1j * grid.ky * inv * w.coeffs))
    peak = np.sqrt(np.abs(v.x.values()) ** 2 + np.abs(v.y.values()) ** 2).max()
    return v * (amplitude / peak) if peak > 0 else v


def random_state(
    grid: GridSpec,
    rng: np.random.Generator,
    k_lo: float = 0.0,
    k_hi: float | None = None,
    slope: float = -1.0,
    amp_zeta: float = 1.0,
    amp_v: float = 1.0,
) -> State:
    """Random zero-mean state with curl-free velocity."""
    zeta = random_field(grid, rng, k_lo=k_lo, k_hi=k_hi, slope=slope, amplitude=amp_zeta)
    v = random_potential_velocity(grid, rng, k_lo=k_lo, k_hi=k_hi, slope=slope, amplitude=amp_v)
    return State(zeta, v, 0.0)


def energy(s: State, N0: int) -> float:
    """``||zeta||_{H^N0}^2 + ||v||_{H^N0}^2``."""
    return sobolev_norm(s.zeta, N0) ** 2 + sobolev_norm(s.v, N0) ** 2


def annulus_initial_state(
    grid: GridSpec,
    seed: int,
    r_lo: float = 1.0,
    r_hi: float = 4.0,
    N0: int = 5,
    energy0: float = 1.0,
) -> State:
    """Random-phase data on ``r_lo <= |xi| <= r_hi`` normalized to ``E_N0 = energy0``.

    Modes are enumerated in a canonical order of integer wavevectors that
    does not depend on ``n``, so grids of different size sharing ``L``
    receive the same trigonometric polynomial.
    """
    dk = grid.dk
    m = int(np.ceil(r_hi / dk))
    if 3 * m >= grid.n:
        raise ValueError(f"annulus |xi| <= {r_hi} exceeds the dealiased band of n={grid.n}")
    rng = np.random.default_rng(seed)
    zc = np.zeros((grid.n, grid.n), dtype=np.complex128)
    wc = np.zeros_like(zc)
    n2 = float(grid.n) ** 2
    for p in range(-m, m + 1):
        for q in range(0, m + 1):
            if q == 0 and p <= 0:
                continue
            r = dk * np.hypot(p, q)
            if not (r_lo <= r <= r_hi):
                continue
            ph_z, ph_w = rng.uniform(0.0, 2.0 * np.pi, size=2)
            zc[p % grid.n, q % grid.n] = n2 * np.exp(1j * ph_z)
            zc[-p % grid.n, -q % grid.n] = n2 * np.exp(-1j * ph_z)
            wc[p % grid.n, q % grid.n] = n2 * np.exp(1j * ph_w)
            wc[-p % grid.n, -q % grid.n] = n2 * np.exp(-1j * ph_w)
    inv = np.where(grid.kabs > 0, 1.0 / np.where(grid.kabs > 0, grid.kabs, 1.0), 0.0)
    zeta = SpectralScalar(grid, zc)
    v = SpectralVector2(zeta.with_coeffs(-1j * grid.kx * inv * wc), zeta.with_coeffs(-1j * grid.ky * inv * wc))
    s = State(zeta, v, 0.0)
    scale = np.sqrt(energy0 / energy(s, N0))
    return State(zeta * scale, v * scale, 0.0)
