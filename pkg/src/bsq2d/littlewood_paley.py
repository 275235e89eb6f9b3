"""Dyadic cutoffs, Littlewood-Paley projections and paraproducts.

The base cutoff ``phi`` equals 1 on ``|x| <= 5/4`` and 0 on ``|x| >= 3/2``.
On the transition band it is the C-infinity smoothstep

    phi(x) = expit(1/t - 1/(1 - t)),   t = (|x| - 5/4) / (1/4),

which is the ratio ``h(1-t) / (h(1-t) + h(t))`` with ``h(t) = exp(-1/t)``
written in an overflow-free form. Shells are
``phi_k(x) = phi(x / 2^k) - phi(x / 2^(k-1))`` and

    T_f g  = sum_j P_{<=j-7} f  P_j g,
    R(f,g) = sum_j P_j f  P_{[j-6, j+6]} g,

so that ``f g = T_f g + T_g f + R(f, g)`` for zero-mean inputs. On a grid the
j-sums run over the dyadic range of the lattice; shells outside that range
vanish on every nonzero lattice frequency, so the truncation is exact.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np
from scipy import fft as sfft
from scipy.special import expit

from .spectral import (
    GridSpec,
    SpectralScalar,
    SpectralVector2,
    div,
    inv_abs_d,
    apply_multiplier,
    sobolev_norm,
)

__all__ = [
    "CutoffProfile",
    "PHI",
    "phi",
    "phi_k",
    "phi_le",
    "phi_ge",
    "phi_interval",
    "Band",
    "band_weights",
    "project",
    "paraproduct_T",
    "remainder_R",
    "commutator_probe",
]


@dataclass(frozen=True)
class CutoffProfile:
    """Even smooth bump: 1 on ``|x| <= inner``, 0 on ``|x| >= outer``."""

    inner: float = 1.25
    outer: float = 1.5

    def __call__(self, x: np.ndarray | float) -> np.ndarray:
        t = (np.abs(np.asarray(x, dtype=np.float64)) - self.inner) / (self.outer - self.inner)
        out = np.where(t <= 0.0, 1.0, 0.0)
        mid = (t > 0.0) & (t < 1.0)
        if np.any(mid):
            tm = t[mid]
            out[mid] = expit(1.0 / tm - 1.0 / (1.0 - tm))
        return out


PHI = CutoffProfile()


def phi(x: np.ndarray | float) -> np.ndarray:
    return PHI(x)


def phi_le(x: np.ndarray | float, k: int) -> np.ndarray:
    """``phi_{<=k}(x) = phi(x / 2^k)``."""
    return PHI(np.ldexp(np.asarray(x, dtype=np.float64), -k))


def phi_k(x: np.ndarray | float, k: int) -> np.ndarray:
    """Dyadic shell ``phi(x / 2^k) - phi(x / 2^(k-1))``, supported in ``[5/8, 3/2] 2^k``."""
    return phi_le(x, k) - phi_le(x, k - 1)


def phi_ge(x: np.ndarray | float, k: int) -> np.ndarray:
    """``phi_{>=k} = 1 - phi_{<=k-1}``."""
    return 1.0 - phi_le(x, k - 1)


def phi_interval(x: np.ndarray | float, a: int, b: int) -> np.ndarray:
    """``sum_{k=a}^{b} phi_k(x)``, telescoped to ``phi_{<=b} - phi_{<=a-1}``."""
    if b < a:
        return np.zeros_like(np.asarray(x, dtype=np.float64))
    return phi_le(x, b) - phi_le(x, a - 1)


@dataclass(frozen=True)
class Band:
    """Frequency selector: a shell, a half-line or an interval of shells.

    ``kind`` is one of ``"shell"``, ``"le"``, ``"ge"``, ``"interval"``.
    """

    kind: str
    a: int
    b: int = 0

    @classmethod
    def shell(cls, k: int) -> "Band":
        return cls("shell", k)

    @classmethod
    def at_most(cls, k: int) -> "Band":
        return cls("le", k)

    @classmethod
    def at_least(cls, k: int) -> "Band":
        return cls("ge", k)

    @classmethod
    def interval(cls, a: int, b: int) -> "Band":
        return cls("interval", a, b)

    def weights(self, x: np.ndarray | float) -> np.ndarray:
        if self.kind == "shell":
            return phi_k(x, self.a)
        if self.kind == "le":
            return phi_le(x, self.a)
        if self.kind == "ge":
            return phi_ge(x, self.a)
        if self.kind == "interval":
            return phi_interval(x, self.a, self.b)
        raise ValueError(f"unknown band kind {self.kind!r}")


_WEIGHT_CACHE: dict[tuple[GridSpec, Band, float], np.ndarray] = {}


def band_weights(grid: GridSpec, band: Band, scale: float = 1.0) -> np.ndarray:
    """Lattice values of ``phi_band(scale * |xi|)`` (cached, read-only)."""
    key = (grid, band, float(scale))
    out = _WEIGHT_CACHE.get(key)
    if out is None:
        out = band.weights(scale * grid.kabs)
        out.setflags(write=False)
        if len(_WEIGHT_CACHE) > 4096:
            _WEIGHT_CACHE.clear()
        _WEIGHT_CACHE[key] = out
    return out


def project(f: SpectralScalar, band: Band, scale: float = 1.0) -> SpectralScalar:
    """``P_band f`` with cutoff evaluated at ``scale * |xi|``."""
    return f.with_coeffs(band_weights(f.grid, band, scale) * f.coeffs)


Field = Union[SpectralScalar, SpectralVector2]


def _finish(grid: GridSpec, acc: np.ndarray | None) -> SpectralScalar:
    if acc is None:
        return SpectralScalar.zeros(grid)
    out = sfft.fft2(acc)
    out[~grid.dealias_mask] = 0.0
    return SpectralScalar(grid, out)


def _paraproduct_scalar(f: SpectralScalar, g: SpectralScalar) -> SpectralScalar:
    grid = f.grid
    kmin, kmax = grid.dyadic_range
    acc = None
    for j in range(kmin, kmax + 1):
        low = band_weights(grid, Band.at_most(j - 7)) * f.coeffs
        if not low.any():
            continue
        high = band_weights(grid, Band.shell(j)) * g.coeffs
        if not high.any():
            continue
        term = sfft.ifft2(low) * sfft.ifft2(high)
        acc = term if acc is None else acc + term
    return _finish(grid, acc)


def _remainder_scalar(f: SpectralScalar, g: SpectralScalar) -> SpectralScalar:
    grid = f.grid
    kmin, kmax = grid.dyadic_range
    acc = None
    for j in range(kmin, kmax + 1):
        fj = band_weights(grid, Band.shell(j)) * f.coeffs
        if not fj.any():
            continue
        gj = band_weights(grid, Band.interval(j - 6, j + 6)) * g.coeffs
        if not gj.any():
            continue
        term = sfft.ifft2(fj) * sfft.ifft2(gj)
        acc = term if acc is None else acc + term
    return _finish(grid, acc)


def paraproduct_T(f: SpectralScalar, g: Field) -> Field:
    """``T_f g``; a vector ``g`` is handled componentwise."""
    if isinstance(g, SpectralVector2):
        return g.map(lambda c: _paraproduct_scalar(f, c))
    return _paraproduct_scalar(f, g)


def remainder_R(f: SpectralScalar, g: Field) -> Field:
    """``R(f, g)``; a vector ``g`` is handled componentwise."""
    if isinstance(g, SpectralVector2):
        return g.map(lambda c: _remainder_scalar(f, c))
    return _remainder_scalar(f, g)


def commutator_probe(a: SpectralScalar, b: SpectralScalar, s: float, guard: float = 1e-14) -> float:
    """Normalized size of ``[|D|^-1 div, T_a]`` acting on ``w = |D|^-1 grad b``.

    Returns ``||comm||_{H^s} / (||grad a||_inf ||b||_{H^{s-1}})``. If either
    factor of the denominator is below ``guard`` the commutator vanishes
    identically (``a`` constant or ``b`` zero) and 0 is returned.
    """
    grid = a.grid
    ga = np.sqrt(
        np.abs(sfft.ifft2(1j * grid.kx * a.coeffs)) ** 2 + np.abs(sfft.ifft2(1j * grid.ky * a.coeffs)) ** 2
    ).max()
    nb = sobolev_norm(b, s - 1.0)
    if ga < guard or nb < guard:
        return 0.0
    rinv = inv_abs_d()
    w = SpectralVector2(
        b.with_coeffs(rinv.evaluate(grid) * 1j * grid.kx * b.coeffs),
        b.with_coeffs(rinv.evaluate(grid) * 1j * grid.ky * b.coeffs),
    )
    lhs = apply_multiplier(rinv, div(paraproduct_T(a, w)))
    rhs = paraproduct_T(a, apply_multiplier(rinv, div(w)))
    return sobolev_norm(lhs - rhs, s) / (ga * nb)
