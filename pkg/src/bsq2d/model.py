"""The abcd Boussinesq family and its strongly dispersive member.

The family reads

    d_t zeta + div v + eps div(zeta v) + eps (a div lap v - b lap d_t zeta) = 0,
    d_t v + grad zeta + (eps/2) grad|v|^2 + eps (c grad lap zeta - d lap d_t v) = 0,

and the strongly dispersive case ``a = c = 1, b = d = 0`` becomes

    d_t zeta + (1 + eps lap) div v + eps div(zeta v) = 0,
    d_t v + (1 + eps lap) grad zeta + (eps/2) grad|v|^2 = 0,

whose linear part has the radial dispersion ``Lambda(r) = r - eps r^3``.
"""

from __future__ import annotations

import enum
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import fft as sfft

from .spectral import GridSpec, Multiplier, SpectralScalar, SpectralVector2, curl, l2_norm

__all__ = [
    "AbcdParams",
    "ConstraintWarning",
    "State",
    "WellPosedness",
    "linear_wellposedness",
    "dispersion_eigenvalues",
    "lambda_eps",
    "lambda_multiplier",
    "rhs_abcd",
    "rhs_special",
    "nonlinear_special",
]


class ConstraintWarning(UserWarning):
    """Raised when ``a + b + c + d = 1/3 - tau`` with ``tau >= 0`` fails."""


class WellPosedness(enum.Enum):
    GENERIC = "WellPosedGeneric"
    EXCEPTIONAL = "WellPosedExceptional"
    ILL_POSED = "IllPosed"


@dataclass(frozen=True)
class AbcdParams:
    """Coefficients of the abcd family together with ``eps`` and ``tau``.

    If ``tau`` is omitted it is inferred from ``a + b + c + d = 1/3 - tau``.
    A negative or inconsistent ``tau`` only triggers a
    :class:`ConstraintWarning`, since the strongly dispersive case itself
    violates the constraint.
    """

    a: float
    b: float
    c: float
    d: float
    epsilon: float
    tau: float | None = None
    waive_constraint: bool = field(default=False, compare=False)

    def __post_init__(self) -> None:
        if not (0.0 < self.epsilon <= 1.0):
            raise ValueError(f"epsilon must lie in (0, 1], got {self.epsilon!r}")
        total = self.a + self.b + self.c + self.d
        if self.tau is None:
            object.__setattr__(self, "tau", 1.0 / 3.0 - total)
        if self.waive_constraint:
            return
        if self.tau < 0.0:
            warnings.warn(f"tau = {self.tau:.6g} is negative", ConstraintWarning, stacklevel=3)
        elif abs(total - (1.0 / 3.0 - self.tau)) > 1e-12:
            warnings.warn("a + b + c + d differs from 1/3 - tau", ConstraintWarning, stacklevel=3)

    @classmethod
    def special(cls, epsilon: float) -> "AbcdParams":
        """``a = c = 1, b = d = 0``; the sum constraint is waived."""
        return cls(1.0, 0.0, 1.0, 0.0, epsilon, waive_constraint=True)


def linear_wellposedness(p: AbcdParams) -> WellPosedness:
    a, b, c, d = p.a, p.b, p.c, p.d
    if b >= 0 and d >= 0 and a == c and a > 0:
        if b == 0 and d == 0:
            return WellPosedness.EXCEPTIONAL
        return WellPosedness.GENERIC
    if a <= 0 and c <= 0 and b >= 0 and d >= 0:
        return WellPosedness.GENERIC
    return WellPosedness.ILL_POSED


def _magnitude(xi: np.ndarray | float) -> np.ndarray:
    xi = np.asarray(xi, dtype=np.float64)
    if xi.ndim >= 1 and xi.shape[-1] == 2:
        return np.hypot(xi[..., 0], xi[..., 1])
    return np.abs(xi)


def dispersion_eigenvalues(p: AbcdParams, xi: np.ndarray | float) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues ``lambda_pm`` of the linearized abcd system at ``xi``.

    ``xi`` is either a 2-vector (last axis) or a magnitude.
    """
    r = _magnitude(xi)
    e = p.epsilon
    r2 = r * r
    rad = (1 - e * p.a * r2) * (1 - e * p.c * r2) / ((1 + e * p.d * r2) * (1 + e * p.b * r2))
    root = np.sqrt(rad.astype(np.complex128))
    lam = 1j * r * root
    return lam, -lam


def lambda_eps(r: np.ndarray | float, epsilon: float) -> np.ndarray:
    """``Lambda(r) = (1 - eps r^2) r`` for ``r = |xi|``."""
    r = np.asarray(r, dtype=np.float64)
    return (1.0 - epsilon * r * r) * r


def lambda_multiplier(epsilon: float) -> Multiplier:
    return Multiplier.radial(lambda r: lambda_eps(r, epsilon), name=f"Lambda[{epsilon}]")


@dataclass(frozen=True, eq=False)
class State:
    """Elevation ``zeta`` and velocity ``v`` at time ``time``.

    Also used to hold time derivatives returned by the right-hand sides.
    """

    zeta: SpectralScalar
    v: SpectralVector2
    time: float = 0.0

    def __post_init__(self) -> None:
        if self.zeta.grid != self.v.grid:
            raise ValueError("zeta and v live on different grids")

    @property
    def grid(self) -> GridSpec:
        return self.zeta.grid

    @classmethod
    def zeros(cls, grid: GridSpec, time: float = 0.0) -> "State":
        return cls(SpectralScalar.zeros(grid), SpectralVector2.zeros(grid), time)

    def mean_residual(self) -> float:
        """Largest modulus among the zero modes of ``zeta, v1, v2``."""
        return float(max(abs(self.zeta.coeffs[0, 0]), abs(self.v.x.coeffs[0, 0]), abs(self.v.y.coeffs[0, 0])))

    def curl_residual(self) -> float:
        """``||curl v|| / ||v||`` (0 for ``v = 0``)."""
        nv = l2_norm(self.v)
        return 0.0 if nv == 0.0 else l2_norm(curl(self.v)) / nv

    def check_invariants(self, curl_tol: float = 1e-8) -> None:
        if self.mean_residual() != 0.0:
            raise ValueError(f"state has nonzero mean ({self.mean_residual():.3e})")
        if self.curl_residual() > curl_tol:
            raise ValueError(f"velocity is not curl free (residual {self.curl_residual():.3e})")


def _fluxes(
    epsilon: float, zeta: SpectralScalar, v: SpectralVector2, dealias: bool = True
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Nonlinear terms ``-eps div(zeta v)`` and ``-(eps/2) grad|v|^2`` as coefficients.

    Products are truncated to the two-thirds band unless ``dealias`` is off,
    in which case only the Nyquist modes are removed.
    """
    grid = zeta.grid
    z = sfft.ifft2(zeta.coeffs).real
    vx = sfft.ifft2(v.x.coeffs).real
    vy = sfft.ifft2(v.y.coeffs).real
    mask = grid.dealias_mask if dealias else grid.matched_mask
    fx = np.where(mask, sfft.fft2(z * vx), 0.0)
    fy = np.where(mask, sfft.fft2(z * vy), 0.0)
    ke = np.where(mask, sfft.fft2(0.5 * (vx * vx + vy * vy)), 0.0)
    nz = -epsilon * 1j * (grid.kx * fx + grid.ky * fy)
    return nz, -epsilon * 1j * grid.kx * ke, -epsilon * 1j * grid.ky * ke


def nonlinear_special(epsilon: float, s: State, dealias: bool = True) -> State:
    """Quadratic part of the strongly dispersive right-hand side."""
    nz, nx, ny = _fluxes(epsilon, s.zeta, s.v, dealias)
    return State(s.zeta.with_coeffs(nz), SpectralVector2(s.v.x.with_coeffs(nx), s.v.y.with_coeffs(ny)), s.time)


def rhs_special(epsilon: float, s: State, nonlinear: bool = True) -> State:
    """Time derivative ``(d_t zeta, d_t v)`` of the strongly dispersive system."""
    grid = s.grid
    lin = 1.0 - epsilon * grid.ksq
    zc, vx, vy = s.zeta.coeffs, s.v.x.coeffs, s.v.y.coeffs
    dz = -lin * 1j * (grid.kx * vx + grid.ky * vy)
    dvx = -lin * 1j * grid.kx * zc
    dvy = -lin * 1j * grid.ky * zc
    if nonlinear:
        nz, nx, ny = _fluxes(epsilon, s.zeta, s.v)
        dz, dvx, dvy = dz + nz, dvx + nx, dvy + ny
    return State(s.zeta.with_coeffs(dz), SpectralVector2(s.v.x.with_coeffs(dvx), s.v.y.with_coeffs(dvy)), s.time)


def rhs_abcd(p: AbcdParams, s: State, nonlinear: bool = True) -> State:
    """Time derivative for general ``(a, b, c, d)``.

    The implicit ``b`` and ``d`` terms are inverted spectrally: the mass
    equation is divided by ``1 + eps b |xi|^2`` and the momentum equation
    by ``1 + eps d |xi|^2``.
    """
    if p.b < 0 or p.d < 0:
        raise ValueError("b and d must be nonnegative for the implicit operators to be invertible")
    grid = s.grid
    e = p.epsilon
    k2 = grid.ksq
    mass = 1.0 + e * p.b * k2
    mom = 1.0 + e * p.d * k2
    zc, vx, vy = s.zeta.coeffs, s.v.x.coeffs, s.v.y.coeffs
    dz = -(1.0 - e * p.a * k2) * 1j * (grid.kx * vx + grid.ky * vy)
    dvx = -(1.0 - e * p.c * k2) * 1j * grid.kx * zc
    dvy = -(1.0 - e * p.c * k2) * 1j * grid.ky * zc
    if nonlinear:
        nz, nx, ny = _fluxes(e, s.zeta, s.v)
        dz, dvx, dvy = dz + nz, dvx + nx, dvy + ny
    return State(
        s.zeta.with_coeffs(dz / mass),
        SpectralVector2(s.v.x.with_coeffs(dvx / mom), s.v.y.with_coeffs(dvy / mom)),
        s.time,
    )
