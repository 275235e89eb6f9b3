"""Time stepping for the strongly dispersive system in characteristic variables.

For a curl-free velocity write ``w = |D|^-1 div v``. Then
``Z = zeta + i w`` obeys ``Z_t = i Lambda Z + N(Z)``, where ``N`` collects
the quadratic fluxes. ``zeta`` and ``w`` are recovered as the Hermitian and
anti-Hermitian parts of ``Z`` and ``v = -|D|^-1 grad w``. The solenoidal
part of ``v`` is constant in time under the flow, so it is carried along
unchanged and added back when building physical fields.

Two exponential integrators are provided: integrating-factor RK4 (Lawson)
and ETDRK4 with contour-integral coefficients. Both are exact on the
linear flow.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .model import State, _fluxes, lambda_eps
from .spectral import GridSpec, SpectralScalar, SpectralVector2, curl_free_project

__all__ = [
    "Scheme",
    "IntegratorConfig",
    "BlowupError",
    "CharacteristicState",
    "to_characteristic",
    "from_characteristic",
    "Stepper",
    "step",
    "cfl_number",
    "nonlinear_term",
]


class Scheme(str, enum.Enum):
    IFRK4 = "IFRK4"
    ETDRK4 = "ETDRK4"


@dataclass(frozen=True)
class IntegratorConfig:
    """Step size, scheme, horizon and guards.

    ``cfl_guard`` bounds ``dt * max|Lambda|``; both schemes propagate the
    linear part exactly, so the bound is advisory and only recorded.
    ``blowup_norm`` is the l2 size of the coefficient array beyond which a
    step is treated as a blowup.
    """

    dt: float
    scheme: Scheme = Scheme.IFRK4
    t_end: float = 1.0
    dealias: bool = True
    cfl_guard: float = 50.0
    nonlinear: bool = True
    blowup_norm: float = 1e12

    def __post_init__(self) -> None:
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        object.__setattr__(self, "scheme", Scheme(self.scheme))


class BlowupError(RuntimeError):
    """Non-finite or runaway state; ``last_state`` is the last finite one."""

    def __init__(self, message: str, last_state: State, time: float) -> None:
        super().__init__(message)
        self.last_state = last_state
        self.time = time


def cfl_number(grid: GridSpec, epsilon: float, dt: float) -> float:
    """``dt * max |Lambda(xi)|`` over the dealiased lattice."""
    lam = np.abs(lambda_eps(grid.kabs, epsilon))
    return float(dt * lam[grid.dealias_mask].max())


# characteristic variables --------------------------------------------------------


def _reflect(arr: np.ndarray) -> np.ndarray:
    return np.roll(arr[::-1, ::-1], 1, axis=(0, 1))


def _inv_abs(grid: GridSpec) -> np.ndarray:
    k = grid.kabs
    return np.where(k > 0, 1.0 / np.where(k > 0, k, 1.0), 0.0)


@dataclass(frozen=True, eq=False)
class CharacteristicState:
    """Coefficients of ``Z = zeta + i |D|^-1 div v`` plus the frozen solenoidal velocity."""

    grid: GridSpec
    Z: np.ndarray
    v_rot: SpectralVector2
    time: float


def to_characteristic(s: State) -> CharacteristicState:
    grid = s.grid
    inv = _inv_abs(grid)
    w = inv * 1j * (grid.kx * s.v.x.coeffs + grid.ky * s.v.y.coeffs)
    v_rot = s.v - curl_free_project(s.v)
    return CharacteristicState(grid, s.zeta.coeffs + 1j * w, v_rot, s.time)


def _split(grid: GridSpec, Z: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Hermitian parts ``(zeta, w)`` of ``Z = zeta + i w``."""
    zr = np.conj(_reflect(Z))
    return 0.5 * (Z + zr), -0.5j * (Z - zr)


def _velocity(grid: GridSpec, w: np.ndarray, v_rot: SpectralVector2) -> tuple[np.ndarray, np.ndarray]:
    inv = _inv_abs(grid)
    return -1j * grid.kx * inv * w + v_rot.x.coeffs, -1j * grid.ky * inv * w + v_rot.y.coeffs


def from_characteristic(cs: CharacteristicState) -> State:
    grid = cs.grid
    z, w = _split(grid, cs.Z)
    vx, vy = _velocity(grid, w, cs.v_rot)
    zeta = SpectralScalar(grid, z)
    return State(zeta, SpectralVector2(zeta.with_coeffs(vx), zeta.with_coeffs(vy)), cs.time)


def nonlinear_term(
    grid: GridSpec, epsilon: float, Z: np.ndarray, v_rot: SpectralVector2, dealias: bool = True
) -> np.ndarray:
    """``N(Z)``: the quadratic fluxes mapped to characteristic form."""
    z, w = _split(grid, Z)
    vx, vy = _velocity(grid, w, v_rot)
    zeta = SpectralScalar(grid, z)
    v = SpectralVector2(zeta.with_coeffs(vx), zeta.with_coeffs(vy))
    nz, nx, ny = _fluxes(epsilon, zeta, v, dealias)
    return nz + 1j * (_inv_abs(grid) * 1j * (grid.kx * nx + grid.ky * ny))


# schemes -----------------------------------------------------------------------------


@lru_cache(maxsize=32)
def _etd_coefficients(grid: GridSpec, epsilon: float, dt: float, contour_points: int = 32):
    """ETDRK4 weights by averaging over a circle around each ``i Lambda dt``."""
    L = 1j * lambda_eps(grid.kabs, epsilon)
    hL = dt * L
    r = np.exp(2j * np.pi * (np.arange(1, contour_points + 1) - 0.5) / contour_points)
    LR = hL[..., None] + r
    Q = dt * np.mean((np.exp(LR / 2.0) - 1.0) / LR, axis=-1)
    e = np.exp(LR)
    LR3 = LR**3
    f1 = dt * np.mean((-4.0 - LR + e * (4.0 - 3.0 * LR + LR * LR)) / LR3, axis=-1)
    f2 = dt * np.mean((2.0 + LR + e * (LR - 2.0)) / LR3, axis=-1)
    f3 = dt * np.mean((-4.0 - 3.0 * LR - LR * LR + e * (4.0 - LR)) / LR3, axis=-1)
    return Q, f1, f2, f3


class Stepper:
    """Advance :class:`CharacteristicState` objects with a fixed step and scheme."""

    def __init__(self, grid: GridSpec, epsilon: float, cfg: IntegratorConfig) -> None:
        self.grid = grid
        self.epsilon = float(epsilon)
        self.cfg = cfg
        lam = lambda_eps(grid.kabs, epsilon)
        self.E = np.exp(1j * cfg.dt * lam)
        self.E2 = np.exp(0.5j * cfg.dt * lam)
        if cfg.scheme is Scheme.ETDRK4:
            self.Q, self.f1, self.f2, self.f3 = _etd_coefficients(grid, self.epsilon, cfg.dt)

    def _N(self, Z: np.ndarray, v_rot: SpectralVector2) -> np.ndarray:
        if not self.cfg.nonlinear:
            return np.zeros_like(Z)
        return nonlinear_term(self.grid, self.epsilon, Z, v_rot, self.cfg.dealias)

    def _ifrk4(self, Z: np.ndarray, v_rot: SpectralVector2) -> np.ndarray:
        h, E, E2 = self.cfg.dt, self.E, self.E2
        if not self.cfg.nonlinear:
            return E * Z
        k1 = self._N(Z, v_rot)
        k2 = self._N(E2 * (Z + 0.5 * h * k1), v_rot)
        k3 = self._N(E2 * Z + 0.5 * h * k2, v_rot)
        k4 = self._N(E * Z + h * E2 * k3, v_rot)
        return E * Z + (h / 6.0) * (E * k1 + 2.0 * E2 * (k2 + k3) + k4)

    def _etdrk4(self, Z: np.ndarray, v_rot: SpectralVector2) -> np.ndarray:
        E, E2 = self.E, self.E2
        if not self.cfg.nonlinear:
            return E * Z
        Nz = self._N(Z, v_rot)
        a = E2 * Z + self.Q * Nz
        Na = self._N(a, v_rot)
        b = E2 * Z + self.Q * Na
        Nb = self._N(b, v_rot)
        c = E2 * a + self.Q * (2.0 * Nb - Nz)
        Nc = self._N(c, v_rot)
        return E * Z + Nz * self.f1 + 2.0 * (Na + Nb) * self.f2 + Nc * self.f3

    def advance(self, cs: CharacteristicState) -> CharacteristicState:
        """One step; raises :class:`BlowupError` if the result is not finite or runs away."""
        if self.cfg.scheme is Scheme.IFRK4:
            Z = self._ifrk4(cs.Z, cs.v_rot)
        else:
            Z = self._etdrk4(cs.Z, cs.v_rot)
        t = cs.time + self.cfg.dt
        if not np.all(np.isfinite(Z)):
            raise BlowupError(f"non-finite coefficients at t={t:.6g}", from_characteristic(cs), cs.time)
        if np.linalg.norm(Z) > self.cfg.blowup_norm:
            raise BlowupError(f"coefficient norm above {self.cfg.blowup_norm:.3g} at t={t:.6g}", from_characteristic(cs), cs.time)
        return CharacteristicState(cs.grid, Z, cs.v_rot, t)


def step(s: State, cfg: IntegratorConfig, epsilon: float) -> State:
    """Advance a primitive state by one step of ``cfg.dt``."""
    return from_characteristic(Stepper(s.grid, epsilon, cfg).advance(to_characteristic(s)))
