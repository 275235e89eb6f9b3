"""Periodic grid, discrete Fourier transforms, multipliers and Sobolev norms.

The plane is approximated by the torus ``[0, L)^2`` sampled on ``n x n``
points. Array axis 0 is ``x`` and axis 1 is ``y``. Continuum statements
are only meaningful in the band of frequencies well inside the lattice,
and every test in this package is phrased in that band.

Conventions fixed project-wide:

* The forward transform carries no factor and the inverse carries
  ``1/n^2`` (numpy/scipy convention).
* The Sobolev weight is ``w = L^2 / n^4`` so that ``H^0`` agrees with the
  quadrature L2 norm ``(sum |f(x)|^2 (L/n)^2)^(1/2)``.
* The unmatched Nyquist row and column are always zero.
* Singular multipliers such as ``|xi|^-1`` are defined to be 0 at ``xi = 0``.
* Quadratic products are dealiased with the 2/3 rule: a mode survives
  iff ``|index| < n/3`` in both directions.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Callable, Optional

import numpy as np
from scipy import fft as sfft

__all__ = [
    "GridSpec",
    "SpectralScalar",
    "SpectralVector2",
    "Multiplier",
    "forward_transform",
    "inverse_transform",
    "apply_multiplier",
    "grad",
    "div",
    "laplacian",
    "curl",
    "curl_free_project",
    "dealias",
    "product",
    "sobolev_norm",
    "l2_norm",
    "linf_norm",
    "abs_d",
    "inv_abs_d",
    "bracket",
]

SymbolFn = Callable[[np.ndarray, np.ndarray], np.ndarray]


@dataclass(frozen=True)
class GridSpec:
    """Square periodic grid with ``n`` points per axis and period ``length``.

    Derived lattice arrays are computed lazily and cached on the instance.
    """

    n: int
    length: float = 32.0 * np.pi

    def __post_init__(self) -> None:
        if int(self.n) != self.n or self.n < 8 or self.n % 2:
            raise ValueError(f"n must be an even integer >= 8, got {self.n!r}")
        if not (np.isfinite(self.length) and self.length > 0):
            raise ValueError(f"domain length must be positive, got {self.length!r}")

    @property
    def dk(self) -> float:
        """Lattice spacing ``2 pi / L`` in frequency space."""
        return 2.0 * np.pi / self.length

    @property
    def weight(self) -> float:
        """Coefficient-space quadrature weight making Parseval exact."""
        return self.length**2 / float(self.n) ** 4

    @cached_property
    def index(self) -> tuple[np.ndarray, np.ndarray]:
        """Integer lattice indices (fft ordering) as two ``(n, n)`` arrays."""
        m = np.rint(sfft.fftfreq(self.n) * self.n).astype(np.int64)
        return np.meshgrid(m, m, indexing="ij")

    @cached_property
    def kx(self) -> np.ndarray:
        return self.dk * self.index[0]

    @cached_property
    def ky(self) -> np.ndarray:
        return self.dk * self.index[1]

    @cached_property
    def ksq(self) -> np.ndarray:
        return self.kx**2 + self.ky**2

    @cached_property
    def kabs(self) -> np.ndarray:
        return np.sqrt(self.ksq)

    @cached_property
    def matched_mask(self) -> np.ndarray:
        """True on every mode except the Nyquist row and column."""
        half = self.n // 2
        ix, iy = self.index
        return (ix != -half) & (iy != -half)

    @cached_property
    def dealias_mask(self) -> np.ndarray:
        """True on modes kept by the 2/3 rule."""
        ix, iy = self.index
        return (3 * np.abs(ix) < self.n) & (3 * np.abs(iy) < self.n)

    @cached_property
    def coords(self) -> tuple[np.ndarray, np.ndarray]:
        x = np.arange(self.n) * (self.length / self.n)
        return np.meshgrid(x, x, indexing="ij")

    @cached_property
    def dyadic_range(self) -> tuple[int, int]:
        """``(k_min, k_max)`` with ``2^k_min <= dk`` and ``2^k_max >= max|xi|``."""
        kmin = int(np.floor(np.log2(self.dk)))
        kmax = int(np.ceil(np.log2(self.kabs.max())))
        return kmin, kmax

    def reflect(self, arr: np.ndarray) -> np.ndarray:
        """Return ``arr(-xi)`` on the lattice (indices taken mod ``n``)."""
        return np.roll(arr[::-1, ::-1], 1, axis=(0, 1))

    def band_limit_mask(self, fraction: float) -> np.ndarray:
        """Modes with ``|index| < fraction * n / 2`` in both directions."""
        ix, iy = self.index
        lim = fraction * self.n / 2
        return (np.abs(ix) < lim) & (np.abs(iy) < lim)


def _check_coeffs(grid: GridSpec, coeffs: np.ndarray) -> np.ndarray:
    arr = np.asarray(coeffs, dtype=np.complex128)
    if arr.shape != (grid.n, grid.n):
        raise ValueError(f"coefficient array has shape {arr.shape}, grid expects {(grid.n, grid.n)}")
    return arr


@dataclass(frozen=True, eq=False)
class SpectralScalar:
    """A scalar field stored by its Fourier coefficients.

    Real fields carry Hermitian-symmetric coefficients. Complex fields such
    as the symmetrized unknown ``V`` use the same container without that
    symmetry.
    """

    grid: GridSpec
    coeffs: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(self, "coeffs", _check_coeffs(self.grid, self.coeffs))

    @classmethod
    def zeros(cls, grid: GridSpec) -> "SpectralScalar":
        return cls(grid, np.zeros((grid.n, grid.n), dtype=np.complex128))

    def with_coeffs(self, coeffs: np.ndarray) -> "SpectralScalar":
        return SpectralScalar(self.grid, coeffs)

    def values(self) -> np.ndarray:
        """Complex grid values."""
        return inverse_transform(self)

    def real_values(self) -> np.ndarray:
        return inverse_transform(self).real

    def reflect_conj(self) -> "SpectralScalar":
        """Transform of the complex conjugate field: ``xi -> conj(c(-xi))``."""
        return self.with_coeffs(np.conj(self.grid.reflect(self.coeffs)))

    def real_part(self) -> "SpectralScalar":
        """Transform of ``Re f``."""
        return self.with_coeffs(0.5 * (self.coeffs + self.reflect_conj().coeffs))

    def imag_part(self) -> "SpectralScalar":
        """Transform of ``Im f``."""
        return self.with_coeffs((self.coeffs - self.reflect_conj().coeffs) / 2j)

    def hermitian_defect(self) -> float:
        """Relative violation of ``c(-xi) = conj(c(xi))``."""
        scale = np.abs(self.coeffs).max()
        if scale == 0.0:
            return 0.0
        return float(np.abs(self.coeffs - self.reflect_conj().coeffs).max() / scale)

    def __add__(self, other: "SpectralScalar") -> "SpectralScalar":
        return self.with_coeffs(self.coeffs + other.coeffs)

    def __sub__(self, other: "SpectralScalar") -> "SpectralScalar":
        return self.with_coeffs(self.coeffs - other.coeffs)

    def __neg__(self) -> "SpectralScalar":
        return self.with_coeffs(-self.coeffs)

    def __mul__(self, scalar: complex) -> "SpectralScalar":
        return self.with_coeffs(self.coeffs * scalar)

    __rmul__ = __mul__

    def __truediv__(self, scalar: complex) -> "SpectralScalar":
        return self.with_coeffs(self.coeffs / scalar)


@dataclass(frozen=True, eq=False)
class SpectralVector2:
    """Pair of scalar fields on a shared grid."""

    x: SpectralScalar
    y: SpectralScalar

    def __post_init__(self) -> None:
        if self.x.grid != self.y.grid:
            raise ValueError("vector components live on different grids")

    @property
    def grid(self) -> GridSpec:
        return self.x.grid

    @property
    def components(self) -> tuple[SpectralScalar, SpectralScalar]:
        return (self.x, self.y)

    @classmethod
    def zeros(cls, grid: GridSpec) -> "SpectralVector2":
        return cls(SpectralScalar.zeros(grid), SpectralScalar.zeros(grid))

    def map(self, fn: Callable[[SpectralScalar], SpectralScalar]) -> "SpectralVector2":
        return SpectralVector2(fn(self.x), fn(self.y))

    def __add__(self, other: "SpectralVector2") -> "SpectralVector2":
        return SpectralVector2(self.x + other.x, self.y + other.y)

    def __sub__(self, other: "SpectralVector2") -> "SpectralVector2":
        return SpectralVector2(self.x - other.x, self.y - other.y)

    def __neg__(self) -> "SpectralVector2":
        return SpectralVector2(-self.x, -self.y)

    def __mul__(self, scalar: complex) -> "SpectralVector2":
        return SpectralVector2(self.x * scalar, self.y * scalar)

    __rmul__ = __mul__

    def __truediv__(self, scalar: complex) -> "SpectralVector2":
        return SpectralVector2(self.x / scalar, self.y / scalar)


class Multiplier:
    """Fourier multiplier given by a symbol ``(kx, ky) -> complex array``.

    Parameters
    ----------
    symbol:
        Vectorized function of the two frequency components. It must be
        finite on every lattice point.
    support:
        Optional predicate with the same signature, returning a boolean
        mask outside of which the symbol is declared to vanish.
    name:
        Label used in reprs and diagnostics.
    """

    def __init__(self, symbol: SymbolFn, support: Optional[SymbolFn] = None, name: str = "") -> None:
        self.symbol = symbol
        self.support = support
        self.name = name or getattr(symbol, "__name__", "multiplier")
        self._cache: dict[GridSpec, np.ndarray] = {}

    def __repr__(self) -> str:
        return f"Multiplier({self.name})"

    def evaluate(self, grid: GridSpec) -> np.ndarray:
        """Symbol values on the lattice of ``grid`` (cached)."""
        out = self._cache.get(grid)
        if out is None:
            out = np.asarray(self.symbol(grid.kx, grid.ky), dtype=np.complex128)
            out = np.broadcast_to(out, (grid.n, grid.n)).copy()
            if not np.all(np.isfinite(out)):
                raise ValueError(f"{self.name} symbol is not finite on the lattice")
            if self.support is not None:
                out[~self.support(grid.kx, grid.ky)] = 0.0
            out.setflags(write=False)
            self._cache[grid] = out
        return out

    def __mul__(self, other: "Multiplier") -> "Multiplier":
        a, b = self, other
        return Multiplier(lambda kx, ky: a.symbol(kx, ky) * b.symbol(kx, ky), name=f"{a.name}*{b.name}")

    @classmethod
    def radial(cls, fn: Callable[[np.ndarray], np.ndarray], name: str = "") -> "Multiplier":
        """Multiplier whose symbol depends on ``|xi|`` only."""
        return cls(lambda kx, ky: fn(np.hypot(kx, ky)), name=name or getattr(fn, "__name__", "radial"))


def _safe_inverse(x: np.ndarray) -> np.ndarray:
    out = np.zeros_like(x, dtype=np.float64)
    nz = x != 0
    out[nz] = 1.0 / x[nz]
    return out


def abs_d() -> Multiplier:
    """``|D|``: symbol ``|xi|``."""
    return Multiplier.radial(lambda r: r, name="|D|")


def inv_abs_d() -> Multiplier:
    """``|D|^-1`` with value 0 at the origin."""
    return Multiplier.radial(_safe_inverse, name="|D|^-1")


def bracket(s: float) -> Multiplier:
    """``<D>^s``: symbol ``(1 + |xi|^2)^(s/2)``."""
    return Multiplier.radial(lambda r: (1.0 + r * r) ** (0.5 * s), name=f"<D>^{s}")


# transforms -----------------------------------------------------------------


def forward_transform(grid: GridSpec, values: np.ndarray) -> SpectralScalar:
    """Transform grid values to coefficients; the Nyquist row/column is dropped."""
    values = np.asarray(values)
    if values.shape != (grid.n, grid.n):
        raise ValueError(f"field has shape {values.shape}, grid expects {(grid.n, grid.n)}")
    coeffs = sfft.fft2(values)
    coeffs[~grid.matched_mask] = 0.0
    return SpectralScalar(grid, coeffs)


def inverse_transform(f: SpectralScalar) -> np.ndarray:
    """Complex grid values of ``f``."""
    return sfft.ifft2(f.coeffs)


def apply_multiplier(m: Multiplier, f: SpectralScalar) -> SpectralScalar:
    return f.with_coeffs(m.evaluate(f.grid) * f.coeffs)


# differential operators -------------------------------------------------------


def grad(f: SpectralScalar) -> SpectralVector2:
    g = f.grid
    return SpectralVector2(f.with_coeffs(1j * g.kx * f.coeffs), f.with_coeffs(1j * g.ky * f.coeffs))


def div(v: SpectralVector2) -> SpectralScalar:
    g = v.grid
    return v.x.with_coeffs(1j * g.kx * v.x.coeffs + 1j * g.ky * v.y.coeffs)


def laplacian(f: SpectralScalar) -> SpectralScalar:
    return f.with_coeffs(-f.grid.ksq * f.coeffs)


def curl(v: SpectralVector2) -> SpectralScalar:
    """Scalar curl ``d1 v2 - d2 v1``."""
    g = v.grid
    return v.x.with_coeffs(1j * g.kx * v.y.coeffs - 1j * g.ky * v.x.coeffs)


def curl_free_project(v: SpectralVector2) -> SpectralVector2:
    """Gradient part ``grad inv_lap div v``.

    Written as ``xi (xi . v) / |xi|^2`` so the lattice curl of the output
    vanishes identically.
    """
    g = v.grid
    w = _safe_inverse(g.ksq) * (g.kx * v.x.coeffs + g.ky * v.y.coeffs)
    return SpectralVector2(v.x.with_coeffs(g.kx * w), v.y.with_coeffs(g.ky * w))


def dealias(f: SpectralScalar) -> SpectralScalar:
    return f.with_coeffs(np.where(f.grid.dealias_mask, f.coeffs, 0.0))


def product(f: SpectralScalar, g: SpectralScalar) -> SpectralScalar:
    """Dealiased pseudospectral product ``f g``."""
    grid = f.grid
    out = sfft.fft2(sfft.ifft2(f.coeffs) * sfft.ifft2(g.coeffs))
    out[~grid.dealias_mask] = 0.0
    return SpectralScalar(grid, out)


# norms ------------------------------------------------------------------------


def sobolev_norm(f: SpectralScalar | SpectralVector2, s: float) -> float:
    """``H^s`` norm ``(w sum <xi>^{2s} |c(xi)|^2)^(1/2)``; vectors sum components."""
    comps = f.components if isinstance(f, SpectralVector2) else (f,)
    grid = comps[0].grid
    weight = (1.0 + grid.ksq) ** s if s != 0 else 1.0
    total = 0.0
    for c in comps:
        total += float(np.sum(weight * (c.coeffs.real**2 + c.coeffs.imag**2)))
    return float(np.sqrt(grid.weight * total))


def l2_norm(f: SpectralScalar | SpectralVector2) -> float:
    return sobolev_norm(f, 0.0)


def linf_norm(f: SpectralScalar | SpectralVector2) -> float:
    """Max over grid points of ``|f|`` (Euclidean length for vectors)."""
    if isinstance(f, SpectralVector2):
        return float(np.sqrt(np.abs(f.x.values()) ** 2 + np.abs(f.y.values()) ** 2).max())
    return float(np.abs(f.values()).max())
