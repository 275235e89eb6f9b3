"""Good unknowns for the strongly dispersive system and the symmetrized equation.

With ``M = (1 + eps lap)^-1 phi_{>=6}(sqrt(eps)|D|)`` the modified velocity is

    u = v + eps B(zeta, v),   B(f, g) = 1/2 T_f (M g),

and the complex unknown ``V = zeta + i |D|^-1 div u`` satisfies

    d_t V - i Lambda V = S + Q + C + N,

where ``S`` and ``Q`` are quadratic paraproduct terms, ``C`` is cubic and
``N`` collects commutators, remainders and the high-frequency pieces.
Every addend is exported separately so that a failing identity can be
traced to a single term. ``V^-`` is the conjugate field, stored as
``xi -> conj(V(-xi))``.
"""

from __future__ import annotations

from collections import OrderedDict
from dataclasses import dataclass

import numpy as np

from .littlewood_paley import Band, band_weights, paraproduct_T, remainder_R
from .model import State, lambda_eps, rhs_special
from .spectral import (
    GridSpec,
    SpectralScalar,
    SpectralVector2,
    curl_free_project,
    div,
    grad,
    l2_norm,
    linf_norm,
    product,
    sobolev_norm,
)

__all__ = [
    "GoodState",
    "Profile",
    "ReconstructionError",
    "SymmetrizedRHS",
    "b_eps",
    "b_multiplier",
    "to_good_unknowns",
    "reconstruct",
    "symmetrized_rhs",
    "linearized_rhs",
    "profile_of",
    "estimate_b_constant",
    "TERM_GROUPS",
]


class ReconstructionError(RuntimeError):
    """Fixed-point iteration for ``v`` did not contract."""

    def __init__(self, message: str, residual: float, iterations: int) -> None:
        super().__init__(message)
        self.residual = residual
        self.iterations = iterations


@dataclass(frozen=True, eq=False)
class GoodState:
    """``u`` and the complex field ``V`` (no Hermitian symmetry)."""

    u: SpectralVector2
    V: SpectralScalar
    time: float = 0.0


@dataclass(frozen=True, eq=False)
class Profile:
    """``f = exp(-i t Lambda) V`` and ``g = <D>^N0 f``."""

    f: SpectralScalar
    g: SpectralScalar
    time: float
    N0: int


# multipliers -------------------------------------------------------------------

_M_CACHE: dict[tuple[GridSpec, float], np.ndarray] = {}


def b_multiplier(grid: GridSpec, epsilon: float) -> np.ndarray:
    """Lattice values of ``phi_{>=6}(sqrt(eps)|xi|) / (1 - eps |xi|^2)``.

    The cutoff vanishes for ``sqrt(eps)|xi| <= 40``, where the denominator
    could be small, so the quotient is only formed on its support.
    """
    key = (grid, float(epsilon))
    out = _M_CACHE.get(key)
    if out is None:
        hi = band_weights(grid, Band.at_least(6), np.sqrt(epsilon))
        sup = hi != 0.0
        out = np.zeros_like(hi)
        out[sup] = hi[sup] / (1.0 - epsilon * grid.ksq[sup])
        out.setflags(write=False)
        _M_CACHE[key] = out
    return out


def _inv_abs(grid: GridSpec) -> np.ndarray:
    k = grid.kabs
    return np.where(k > 0, 1.0 / np.where(k > 0, k, 1.0), 0.0)


def _mul(f: SpectralScalar | SpectralVector2, arr: np.ndarray):
    if isinstance(f, SpectralVector2):
        return f.map(lambda c: c.with_coeffs(arr * c.coeffs))
    return f.with_coeffs(arr * f.coeffs)


def _abs_d(f):
    return _mul(f, f.grid.kabs)


def _inv_abs_d(f):
    return _mul(f, _inv_abs(f.grid))


def _riesz_div(u: SpectralVector2) -> SpectralScalar:
    """``|D|^-1 div u``."""
    return _inv_abs_d(div(u))


def _riesz_grad(w: SpectralScalar) -> SpectralVector2:
    """``|D|^-1 grad w``."""
    return _inv_abs_d(grad(w))


def _lap(f):
    return _mul(f, -f.grid.ksq)


def _helmholtz(f, epsilon: float):
    """``(1 + eps lap)``."""
    return _mul(f, 1.0 - epsilon * f.grid.ksq)


def _T_vec(a: SpectralVector2, b: SpectralScalar) -> SpectralVector2:
    """``(T_{a_1} b, T_{a_2} b)``."""
    return SpectralVector2(paraproduct_T(a.x, b), paraproduct_T(a.y, b))


def _T_dot_grad(v: SpectralVector2, w):
    """``T_v . grad w = sum_j T_{v_j} d_j w`` (componentwise for vector ``w``)."""
    if isinstance(w, SpectralVector2):
        return w.map(lambda c: _T_dot_grad(v, c))
    gw = grad(w)
    return paraproduct_T(v.x, gw.x) + paraproduct_T(v.y, gw.y)


def _T_grad_dot(v: SpectralVector2) -> SpectralVector2:
    """``(T_{grad v} . v)_i = sum_j T_{d_j v_i} v_j``."""
    gx, gy = grad(v.x), grad(v.y)
    return SpectralVector2(
        paraproduct_T(gx.x, v.x) + paraproduct_T(gx.y, v.y),
        paraproduct_T(gy.x, v.x) + paraproduct_T(gy.y, v.y),
    )


def _R_dot_grad(v: SpectralVector2) -> SpectralVector2:
    """``R(v ., grad v)_i = sum_j R(v_j, d_j v_i)``."""
    gx, gy = grad(v.x), grad(v.y)
    return SpectralVector2(
        remainder_R(v.x, gx.x) + remainder_R(v.y, gx.y),
        remainder_R(v.x, gy.x) + remainder_R(v.y, gy.y),
    )


def _product_vec(f: SpectralScalar, v: SpectralVector2) -> SpectralVector2:
    return SpectralVector2(product(f, v.x), product(f, v.y))


# operators ---------------------------------------------------------------------


def b_eps(f: SpectralScalar, g: SpectralScalar | SpectralVector2, epsilon: float):
    """``B(f, g) = 1/2 T_f (M g)``; vector ``g`` is handled componentwise."""
    return 0.5 * paraproduct_T(f, _mul(g, b_multiplier(f.grid, epsilon)))


def to_good_unknowns(s: State, epsilon: float, N0: int = 5) -> GoodState:
    """Map ``(zeta, v)`` to ``(u, V)``. ``N0`` is accepted for interface symmetry."""
    u = s.v + epsilon * b_eps(s.zeta, s.v, epsilon)
    V = s.zeta + 1j * _riesz_div(u)
    return GoodState(u, V, s.time)


def _zeta_and_vtilde(V: SpectralScalar) -> tuple[SpectralScalar, SpectralVector2]:
    zeta = V.real_part()
    vt = -1.0 * _riesz_grad(V.imag_part())
    return zeta, vt


def reconstruct(gs: GoodState, epsilon: float, tol: float = 1e-12, max_iter: int = 50) -> State:
    """Recover ``(zeta, v)`` from ``V`` by fixed-point iteration.

    Solves ``v = vt - eps P B(zeta, v)`` with ``vt`` the gradient part
    encoded by ``Im V`` and ``P`` the projection onto gradients.

    Raises
    ------
    ReconstructionError
        If the relative update does not fall below ``tol`` within
        ``max_iter`` iterations.
    """
    zeta, vt = _zeta_and_vtilde(gs.V)
    scale = max(l2_norm(vt), np.finfo(float).tiny)
    v = vt
    res = np.inf
    for it in range(1, max_iter + 1):
        nxt = vt - epsilon * curl_free_project(b_eps(zeta, v, epsilon))
        res = l2_norm(nxt - v) / scale
        v = nxt
        if res <= tol:
            return State(zeta, v, gs.time)
    raise ReconstructionError(f"no convergence after {max_iter} iterations (residual {res:.3e})", res, max_iter)


TERM_GROUPS: "OrderedDict[str, tuple[str, ...]]" = OrderedDict(
    S=("S_transport", "S_dispersive"),
    Q=("Q_velocity", "Q_elevation"),
    C=("C_cubic",),
    N=(
        "N_low_B",
        "N_comm_v",
        "N_div_v",
        "N_comm_zeta",
        "Nz_remainder",
        "Nz_commutator",
        "Nz_B",
        "Nu_grad_zeta",
        "Nu_grad_v",
        "Nu_remainder",
        "Nu_B_div",
        "Nu_transport_B",
        "Nu_B_flux",
        "Nu_B_kinetic",
    ),
)


@dataclass(frozen=True, eq=False)
class SymmetrizedRHS:
    """Individual addends of ``d_t V - i Lambda V``."""

    terms: "OrderedDict[str, SpectralScalar]"

    def group(self, name: str) -> SpectralScalar:
        names = TERM_GROUPS[name]
        out = self.terms[names[0]]
        for n in names[1:]:
            out = out + self.terms[n]
        return out

    def total(self) -> SpectralScalar:
        out = None
        for g in TERM_GROUPS:
            x = self.group(g)
            out = x if out is None else out + x
        return out

    def ledger(self, N0: int) -> "OrderedDict[str, float]":
        """Term name to ``H^N0`` norm, followed by the four group norms."""
        out: OrderedDict[str, float] = OrderedDict((k, sobolev_norm(t, N0)) for k, t in self.terms.items())
        for g in TERM_GROUPS:
            out[g] = sobolev_norm(self.group(g), N0)
        return out


def symmetrized_rhs(gs: GoodState, s: State, epsilon: float, N0: int = 5) -> SymmetrizedRHS:
    """Assemble ``S + Q + C + N`` term by term for a consistent pair ``(gs, s)``."""
    e = epsilon
    grid = s.grid
    zeta, v, u, V = s.zeta, s.v, gs.u, gs.V
    _, vt = _zeta_and_vtilde(V)
    lo = band_weights(grid, Band.at_most(5), np.sqrt(e))
    hi = band_weights(grid, Band.at_least(6), np.sqrt(e))
    M = b_multiplier(grid, e)
    B = b_eps(zeta, v, e)
    PB = curl_free_project(B)
    W = _riesz_div(u)
    T = paraproduct_T

    def riesz_div_of(vec: SpectralVector2) -> SpectralScalar:
        return 1j * _riesz_div(vec)

    terms: OrderedDict[str, SpectralScalar] = OrderedDict()
    terms["S_transport"] = -e * div(_T_vec(vt, V))
    terms["S_dispersive"] = (0.5j * e) * _abs_d(T(zeta, V))
    terms["Q_velocity"] = (-0.5 * e) * div(T(zeta, _mul(vt, lo)))
    terms["Q_elevation"] = (-0.5j * e) * _abs_d(T(zeta, _mul(zeta, lo)))
    terms["C_cubic"] = e * e * div(_T_vec(PB, V))
    terms["N_low_B"] = (0.5 * e * e) * div(T(zeta, _mul(PB, lo)))
    # commutators with |D|^-1 div
    terms["N_comm_v"] = (-1j * e) * (_riesz_div(_T_dot_grad(v, u)) - _T_dot_grad(v, W))
    terms["N_div_v"] = (1j * e) * T(div(v), W)
    terms["N_comm_zeta"] = (-0.5 * e) * _abs_d(_riesz_div(T(zeta, u)) - T(zeta, W))
    # N_zeta
    Mv = _mul(v, M)
    terms["Nz_remainder"] = -e * div(remainder_R(zeta, v))
    terms["Nz_commutator"] = (0.5 * e * e) * div(_lap(T(zeta, Mv)) - T(zeta, _lap(Mv)))
    terms["Nz_B"] = (0.5 * e * e) * div(T(zeta, B))
    # i |D|^-1 div N_u
    hz = _mul(zeta, hi)
    terms["Nu_grad_zeta"] = riesz_div_of((0.5 * e) * _T_vec(grad(zeta), hz))
    terms["Nu_grad_v"] = riesz_div_of(-e * _T_grad_dot(v))
    terms["Nu_remainder"] = riesz_div_of(-e * _R_dot_grad(v))
    terms["Nu_B_div"] = riesz_div_of(-e * b_eps(_helmholtz(div(v), e), v, e))
    terms["Nu_transport_B"] = riesz_div_of(e * e * _T_dot_grad(v, B))
    terms["Nu_B_flux"] = riesz_div_of(-e * e * b_eps(div(_product_vec(zeta, v)), v, e))
    ke = product(v.x, v.x) + product(v.y, v.y)
    terms["Nu_B_kinetic"] = riesz_div_of((-0.5 * e * e) * b_eps(zeta, grad(ke), e))
    return SymmetrizedRHS(terms)


def linearized_rhs(gs: GoodState, s: State, epsilon: float) -> SpectralScalar:
    """``d_t V - i Lambda V`` in the form obtained before paralinearization.

    Uses ``d_t zeta`` and ``d_t v`` from the primitive right-hand side.
    """
    e = epsilon
    zeta, v = s.zeta, s.v
    dt = rhs_special(e, s)
    B = b_eps(zeta, v, e)
    ke = product(v.x, v.x) + product(v.y, v.y)
    inner = (-0.5) * grad(ke) + b_eps(dt.zeta, v, e) + b_eps(zeta, dt.v, e)
    return -e * div(_product_vec(zeta, v)) + e * div(_helmholtz(B, e)) + (1j * e) * _riesz_div(inner)


def profile_of(gs: GoodState, epsilon: float, N0: int = 5) -> Profile:
    grid = gs.V.grid
    phase = np.exp(-1j * gs.time * lambda_eps(grid.kabs, epsilon))
    f = gs.V.with_coeffs(phase * gs.V.coeffs)
    g = f.with_coeffs((1.0 + grid.ksq) ** (0.5 * N0) * f.coeffs)
    return Profile(f, g, gs.time, N0)


def estimate_b_constant(
    f_list: list[SpectralScalar], g_list: list[SpectralVector2], epsilon: float, s: float
) -> float:
    """Largest ``||B(f,g)||_{H^s} / (||f||_inf ||g||_{H^s})`` over the given pairs."""
    best = 0.0
    for f, g in zip(f_list, g_list):
        den = linf_norm(f) * sobolev_norm(g, s)
        if den > 0:
            best = max(best, sobolev_norm(b_eps(f, g, epsilon), s) / den)
    return best
