"""Angle-localized bilinear operator and its empirical gain in the angle scale.

On the integer lattice ``Z^2`` (spacing 1) with inputs ``F`` supported on
the open support of ``phi_{k1}`` and ``G`` on that of ``phi_{k2}``, the probe
operator is

    T(F, G)(xi) = sum_p F(p) G(xi - p) phi_k(|xi|) phi_l(angle(xi, xi - p)),

a lattice Riemann sum of the continuous bilinear form with unit symbol.
The measured quantity is ``||T(F, G)|| / (2^k1 ||F|| ||G||)`` with l2 norms
(area element 1), maximized over inputs by alternating between an exact
small SVD in ``F`` and power iteration in ``G``. A Schur-test argument
predicts that the maximum scales like ``2^(l/2)`` once the angular sector
is thinner than the low-frequency ball.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .littlewood_paley import phi_k

__all__ = [
    "ProbeGeometry",
    "ProbeResult",
    "GainFit",
    "bilinear_ratio",
    "angular_bilinear_probe",
    "fit_gain",
    "SmoothingScan",
    "smoothing_grid",
    "b_smoothing_scan",
]


def _angle_weight(theta: np.ndarray, l: int) -> np.ndarray:
    return phi_k(theta, l)


@dataclass(frozen=True)
class ProbeGeometry:
    """Lattice data for the operator at fixed ``(k, k1, k2, l)`` on an ``n x n`` torus.

    ``offsets`` lists the lattice vectors ``p`` in the open support of
    ``phi_{k1}`` and ``weights[i]`` is the array ``phi_k(|xi|) phi_l(angle)``
    multiplying ``F(p_i) G(xi - p_i)``. ``g_support`` is the open support of
    ``phi_{k2}`` on the lattice.
    """

    n: int
    k: int
    k1: int
    k2: int
    l: int
    offsets: np.ndarray
    weights: np.ndarray
    g_support: np.ndarray

    @staticmethod
    def required_n(k: int, k1: int, k2: int) -> int:
        """Smallest power of two whose lattice holds every shell without wrap-around."""
        reach = 1.5 * 2.0 ** max(k, k2) + 1.5 * 2.0**k1
        n = 8
        while n // 2 <= reach:
            n *= 2
        return n

    @classmethod
    def build(cls, n: int, k: int, k1: int, k2: int, l: int) -> "ProbeGeometry":
        need = cls.required_n(k, k1, k2)
        if n < need:
            raise ValueError(f"n={n} cannot resolve shells k={k}, k1={k1}, k2={k2}; need n >= {need}")
        idx = np.fft.fftfreq(n, d=1.0 / n)
        kx, ky = np.meshgrid(idx, idx, indexing="ij")
        kabs = np.hypot(kx, ky)
        f_w = phi_k(kabs, k1)
        sel = f_w > 0
        if not sel.any():
            raise ValueError(f"shell k1={k1} holds no lattice point; use k1 >= 0")
        offsets = np.stack([kx[sel], ky[sel]], axis=-1).astype(np.int64)
        g_support = phi_k(kabs, k2) > 0
        out_w = phi_k(kabs, k)
        weights = np.empty((offsets.shape[0], n, n))
        for i, (p1, p2) in enumerate(offsets):
            ex, ey = kx - p1, ky - p2
            cross = kx * ey - ky * ex
            dot = kx * ex + ky * ey
            theta = np.arctan2(np.abs(cross), dot)
            # G(xi - p) is read from the rolled array, so its support mask is rolled too
            g_ok = np.roll(g_support, shift=(p1, p2), axis=(0, 1))
            weights[i] = np.where(g_ok, out_w * _angle_weight(theta, l), 0.0)
        return cls(n, k, k1, k2, l, offsets, weights, g_support)

    @property
    def empty(self) -> bool:
        return not np.any(self.weights)

    def apply(self, F: np.ndarray, G: np.ndarray) -> np.ndarray:
        out = np.zeros((self.n, self.n), dtype=np.complex128)
        for fp, (p1, p2), w in zip(F, self.offsets, self.weights):
            if fp != 0:
                out += fp * w * np.roll(G, shift=(p1, p2), axis=(0, 1))
        return out

    def adjoint_g(self, F: np.ndarray, H: np.ndarray) -> np.ndarray:
        """Adjoint of ``G -> T(F, G)`` applied to ``H``."""
        out = np.zeros((self.n, self.n), dtype=np.complex128)
        for fp, (p1, p2), w in zip(F, self.offsets, self.weights):
            if fp != 0:
                out += np.conj(fp) * np.roll(w * H, shift=(-p1, -p2), axis=(0, 1))
        return np.where(self.g_support, out, 0.0)

    def columns(self, G: np.ndarray) -> np.ndarray:
        """Matrix whose ``i``-th column is ``T(e_i, G)`` flattened."""
        return np.stack(
            [(w * np.roll(G, shift=(p1, p2), axis=(0, 1))).ravel() for (p1, p2), w in zip(self.offsets, self.weights)],
            axis=1,
        )


def bilinear_ratio(geom: ProbeGeometry, F: np.ndarray, G: np.ndarray) -> float:
    """``||T(F, G)|| / (2^k1 ||F|| ||G||)``; 0 when either input vanishes."""
    nf, ng = np.linalg.norm(F), np.linalg.norm(G)
    if nf == 0.0 or ng == 0.0:
        return 0.0
    return float(np.linalg.norm(geom.apply(F, G)) / (2.0**geom.k1 * nf * ng))


def _maximize(geom: ProbeGeometry, rng: np.random.Generator, sweeps: int, power_steps: int) -> float:
    n = geom.n
    G = np.where(geom.g_support, rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n)), 0.0)
    G /= np.linalg.norm(G)
    best = 0.0
    for _ in range(sweeps):
        M = geom.columns(G)
        _, sv, vh = np.linalg.svd(M, full_matrices=False)
        F = np.conj(vh[0])
        best = max(best, float(sv[0]))
        for _ in range(power_steps):
            G = geom.adjoint_g(F, geom.apply(F, G))
            nrm = np.linalg.norm(G)
            if nrm == 0.0:
                return best
            G /= nrm
        best = max(best, float(np.linalg.norm(geom.apply(F, G))))
    return best / 2.0**geom.k1


@dataclass
class ProbeResult:
    """Maximal measured ratio at one angular scale ``l``."""

    l: int
    ratio: float
    trial_ratios: list[float]
    empty: bool


@dataclass
class GainFit:
    """Least-squares slope of ``log2 ratio`` against ``l`` over nonempty scales."""

    exponent: float | None
    intercept: float | None
    results: list[ProbeResult]
    used_l: list[int] = field(default_factory=list)
    empty_l: list[int] = field(default_factory=list)

    @property
    def max_ratio(self) -> float:
        return max((r.ratio for r in self.results), default=0.0)

    def to_dict(self) -> dict:
        return {
            "exponent": self.exponent,
            "intercept": self.intercept,
            "used_l": self.used_l,
            "empty_l": self.empty_l,
            "ratios": {str(r.l): r.ratio for r in self.results},
            "max_ratio": self.max_ratio,
        }


def angular_bilinear_probe(
    k: int,
    k1: int,
    k2: int,
    l: int,
    trials: int = 3,
    n: int = 512,
    seed: int = 0,
    sweeps: int = 6,
    power_steps: int = 4,
) -> ProbeResult:
    """Largest ratio found over ``trials`` random starts at angular scale ``l``.

    Raises ``ValueError`` if the estimate hypotheses ``|k - k2| <= 2``, ``l <= -2``
    fail or the grid is too small. A sector that no lattice triple can
    occupy gives ``empty=True`` and ratio 0.
    """
    if abs(k - k2) > 2:
        raise ValueError("need |k - k2| <= 2")
    if l > -2:
        raise ValueError("need l <= -2")
    geom = ProbeGeometry.build(n, k, k1, k2, l)
    if geom.empty:
        return ProbeResult(l, 0.0, [0.0] * trials, True)
    rng = np.random.default_rng(seed)
    vals = [_maximize(geom, rng, sweeps, power_steps) for _ in range(trials)]
    return ProbeResult(l, max(vals), vals, False)


def fit_gain(results: list[ProbeResult]) -> GainFit:
    """Fit ``log2 ratio = exponent * l + intercept`` over nonempty results."""
    used = [r for r in results if not r.empty and r.ratio > 0]
    empty = [r.l for r in results if r.empty or r.ratio <= 0]
    if len(used) < 2:
        return GainFit(None, None, results, [r.l for r in used], empty)
    x = np.array([r.l for r in used], dtype=float)
    y = np.log2([r.ratio for r in used])
    slope, icpt = np.polyfit(x, y, 1)
    return GainFit(float(slope), float(icpt), results, [r.l for r in used], empty)


# smoothing of the good-unknown correction ------------------------------------------


@dataclass
class SmoothingScan:
    """Measured ``||B(f,g)||_{H^{s+k}} / (||f||_inf ||g||_{H^s})`` per ``eps`` and ``k``."""

    epsilons: list[float]
    ks: list[int]
    s: float
    ratios: dict[int, list[float]]
    exponents: dict[int, float]
    n: int
    length: float

    def to_dict(self) -> dict:
        return {
            "epsilons": self.epsilons,
            "ks": self.ks,
            "s": self.s,
            "ratios": {str(k): v for k, v in self.ratios.items()},
            "exponents": {str(k): v for k, v in self.exponents.items()},
            "n": self.n,
            "length": self.length,
        }


def smoothing_grid(epsilons: list[float], band: tuple[float, float], dk: float = 2.0):
    """Smallest FFT-friendly grid with spacing ``dk`` keeping every scaled band unaliased."""
    from scipy import fft as sfft

    from .spectral import GridSpec

    top = band[1] / np.sqrt(min(epsilons))
    m = int(np.ceil(top / dk)) + 2
    n = sfft.next_fast_len(3 * m + 1)
    n += n % 2
    return GridSpec(n, 2.0 * np.pi / dk)


def b_smoothing_scan(
    epsilons: list[float],
    ks: tuple[int, ...] = (0, 1, 2),
    s: float = 0.0,
    band: tuple[float, float] = (48.0, 56.0),
    seed: int = 0,
    dk: float = 2.0,
) -> SmoothingScan:
    """Measure the smoothing of ``B`` on one lattice shared by every ``eps``.

    ``f = cos(dk x)`` is a single lowest mode with ``||f||_inf = 1`` and ``g``
    is a random curl-free vector field on ``band[0] <= sqrt(eps)|eta| <= band[1]``,
    where the cutoff of ``B`` equals 1. For each ``k`` the exponent is the
    least-squares slope of ``log ratio`` against ``log eps``.

    Raises ``ValueError`` when the band is too close to ``dk`` for the
    paraproduct to see the low mode, which would make ``B`` vanish.
    """
    from .good_unknowns import b_eps
    from .random_fields import random_potential_velocity
    from .spectral import forward_transform, linf_norm, sobolev_norm

    # the low mode dk must sit fully inside phi_{<=j-7} for every shell j touching the band
    lo = band[0] / np.sqrt(max(epsilons))
    j_min = int(np.floor(np.log2(lo / 1.5))) + 1
    if dk > 1.25 * 2.0 ** (j_min - 7):
        raise ValueError(
            f"band starts at |eta| = {lo:.4g}, too close to the test mode dk = {dk:g} for the paraproduct; "
            "use smaller epsilon values or a smaller dk"
        )
    grid = smoothing_grid(epsilons, band, dk)
    x, _ = grid.coords
    f = forward_transform(grid, np.cos(dk * x))
    if abs(linf_norm(f) - 1.0) > 1e-12:
        raise RuntimeError("test function lost its unit sup norm")
    ratios: dict[int, list[float]] = {k: [] for k in ks}
    for i, e in enumerate(epsilons):
        rng = np.random.default_rng(seed + i)
        lo, hi = band[0] / np.sqrt(e), band[1] / np.sqrt(e)
        g = random_potential_velocity(grid, rng, k_lo=lo, k_hi=hi)
        B = b_eps(f, g, e)
        den = sobolev_norm(g, s)
        for k in ks:
            ratios[k].append(sobolev_norm(B, s + k) / den)
    le = np.log(np.asarray(epsilons, dtype=float))
    exps = {k: float(np.polyfit(le, np.log(ratios[k]), 1)[0]) for k in ks}
    return SmoothingScan(list(epsilons), list(ks), s, ratios, exps, grid.n, grid.length)
