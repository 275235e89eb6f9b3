"""Quadratic phases, paraproduct symbols, resonance sampling and Jacobians.

All functions are vectorized: ``xi`` and ``eta`` are arrays whose last axis
has length 2, signs ``mu, nu`` are ``+1`` or ``-1``. The phase is

    Phi_{mu,nu}(xi, eta) = -Lambda(xi) + mu Lambda(xi - eta) + nu Lambda(eta)

with ``Lambda(r) = r - eps r^3``. For ``(mu, nu) = (+,-)`` and ``(-,-)`` it
factors as a positive prefactor times a reduced phase ``phi`` whose zero
set near ``sqrt(eps)|eta| ~ 1`` is the resonant set. Bilinear symbols follow
the convention ``F(Q(f,g))(xi) = (2pi)^-2 int q(xi,eta) f^(xi-eta) g^(eta) d eta``.
The cutoff profile is the one used by the grid paraproducts, so pointwise
symbols and grid operators agree exactly.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .littlewood_paley import phi_k, phi_le
from .model import lambda_eps

__all__ = [
    "PhasePoint",
    "AnalysisCutoffs",
    "angle",
    "phase_direct",
    "phase_explicit",
    "phase_signed_output",
    "reduced_phi",
    "phase_factored",
    "paraproduct_cutoff",
    "symbol_s",
    "symbol_q",
    "tilde_q",
    "s_bound_ratio",
    "q_bound_ratios",
    "ResonanceResult",
    "resonance_sample",
    "jacobian_closed_form",
    "jacobian_fd",
    "jacobian_check",
    "sample_regime",
    "symbol_bound_maxima",
]


@dataclass(frozen=True)
class PhasePoint:
    """Frequencies ``xi, eta`` (arrays with trailing axis 2), signs and ``eps``."""

    xi: np.ndarray
    eta: np.ndarray
    mu: int
    nu: int
    epsilon: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "xi", np.asarray(self.xi, dtype=np.float64))
        object.__setattr__(self, "eta", np.asarray(self.eta, dtype=np.float64))
        if self.mu not in (1, -1) or self.nu not in (1, -1):
            raise ValueError("signs must be +1 or -1")

    def direct(self) -> np.ndarray:
        return phase_direct(self.xi, self.eta, self.mu, self.nu, self.epsilon)

    def factored(self) -> np.ndarray:
        return phase_factored(self.xi, self.eta, self.mu, self.nu, self.epsilon)


@dataclass(frozen=True)
class AnalysisCutoffs:
    """Modulation cutoff ``D`` and frequency-ratio cutoff ``K``."""

    D: int
    K: int

    def __post_init__(self) -> None:
        if self.D < 1 or self.K < 1:
            raise ValueError("D and K must be positive integers")


def _norm(x: np.ndarray) -> np.ndarray:
    return np.hypot(x[..., 0], x[..., 1])


def angle(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Angle in ``[0, pi]`` between 2-vectors via ``atan2(|a x b|, a . b)``."""
    cross = a[..., 0] * b[..., 1] - a[..., 1] * b[..., 0]
    dot = a[..., 0] * b[..., 0] + a[..., 1] * b[..., 1]
    return np.arctan2(np.abs(cross), dot)


def _cos_half_sq(xi: np.ndarray, eta: np.ndarray) -> np.ndarray:
    """``cos^2(angle(xi, eta) / 2)`` from the triangle with sides ``|xi|, |eta|, |xi-eta|``.

    The half-angle form ``(a+c+b)(a+c-b) / (4ac)`` shares the rounding of
    ``b = |xi-eta|`` with the direct phase, which keeps the factored
    ``(-,-)`` form well conditioned near antiparallel configurations.
    """
    a, c, b = _norm(xi), _norm(eta), _norm(xi - eta)
    with np.errstate(invalid="ignore", divide="ignore"):
        out = (a + c + b) * (a + c - b) / (4.0 * a * c)
    return np.clip(out, 0.0, 1.0)


def phase_direct(xi, eta, mu: int, nu: int, epsilon: float) -> np.ndarray:
    xi, eta = np.asarray(xi, float), np.asarray(eta, float)
    return (
        -lambda_eps(_norm(xi), epsilon)
        + mu * lambda_eps(_norm(xi - eta), epsilon)
        + nu * lambda_eps(_norm(eta), epsilon)
    )


def phase_signed_output(xi, eta, lam: int, mu: int, nu: int, epsilon: float) -> np.ndarray:
    """``-lam Lambda(xi) + mu Lambda(xi-eta) + nu Lambda(eta)``; odd in ``(lam, mu, nu)``."""
    xi, eta = np.asarray(xi, float), np.asarray(eta, float)
    return (
        -lam * lambda_eps(_norm(xi), epsilon)
        + mu * lambda_eps(_norm(xi - eta), epsilon)
        + nu * lambda_eps(_norm(eta), epsilon)
    )


def phase_explicit(xi, eta, mu: int, nu: int, epsilon: float) -> np.ndarray:
    """Expanded cubic form of the phase."""
    xi, eta = np.asarray(xi, float), np.asarray(eta, float)
    a = _norm(xi)
    b = _norm(xi - eta)
    c = _norm(eta)
    quad = a * a + b * b + c * c - mu * nu * b * c + mu * a * b + nu * a * c
    return (a - mu * b - nu * c) * (epsilon * quad - 1.0) + 3.0 * mu * nu * epsilon * a * b * c


def _check_factored(xi: np.ndarray, eta: np.ndarray, mu: int, nu: int) -> None:
    if (mu, nu) not in ((1, -1), (-1, -1)):
        raise ValueError(f"factored form covers (+,-) and (-,-) only, got {(mu, nu)}")
    a, c, b = _norm(xi), _norm(eta), _norm(xi - eta)
    if np.any(a == 0) or np.any(c == 0) or np.any(b == 0):
        raise ValueError("factored form needs xi != 0, eta != 0 and xi != eta")
    if np.any(_cos_half_sq(xi, eta) <= 0.0):
        raise ValueError("factored form needs angle(xi, eta) != pi")


def reduced_phi(xi, eta, mu: int, nu: int, epsilon: float) -> np.ndarray:
    """Reduced phase ``phi_{mu,nu}`` of the factorization."""
    xi, eta = np.asarray(xi, float), np.asarray(eta, float)
    _check_factored(xi, eta, mu, nu)
    a, b, c = _norm(xi), _norm(xi - eta), _norm(eta)
    ch = _cos_half_sq(xi, eta)
    base = epsilon * (a * a + c * c - a * c) - 1.0
    if mu == 1:
        return 4.0 * ch * base + epsilon * (4.0 * ch - 3.0) * b * (a + b + c)
    # 3/(4 cos^2) * (a - b + c) == 3ac / (a + b + c), free of cancellation
    return base + epsilon * b * (3.0 * a * c / (a + b + c) - (a - b + c))


def phase_factored(xi, eta, mu: int, nu: int, epsilon: float) -> np.ndarray:
    """Prefactor times :func:`reduced_phi`."""
    xi, eta = np.asarray(xi, float), np.asarray(eta, float)
    red = reduced_phi(xi, eta, mu, nu, epsilon)
    a, b, c = _norm(xi), _norm(xi - eta), _norm(eta)
    if mu == 1:
        return a * c / (a + b + c) * red
    return (a + b + c) * red


# symbols -----------------------------------------------------------------------


def paraproduct_cutoff(xi, eta) -> np.ndarray:
    """``sum_j phi_{<=j-7}(|xi-eta|) phi_j(|eta|)`` over the (at most two) live shells."""
    xi, eta = np.asarray(xi, float), np.asarray(eta, float)
    r = _norm(eta)
    rho = _norm(xi - eta)
    out = np.zeros_like(r)
    pos = r > 0
    if not np.any(pos):
        return out
    j0 = np.zeros(r.shape, dtype=np.int64)
    j0[pos] = np.floor(np.log2(r[pos])).astype(np.int64)
    for dj in (-1, 0, 1, 2):
        j = j0 + dj
        term = phi_le(rho, j - 7) * phi_k(r, j)
        out = out + np.where(pos, term, 0.0)
    return out


def _unit(x: np.ndarray) -> np.ndarray:
    n = _norm(x)
    safe = np.where(n > 0, n, 1.0)
    return np.where((n > 0)[..., None], x / safe[..., None], 0.0)


def symbol_s(xi, eta, mu: int, epsilon: float) -> np.ndarray:
    """``s_{mu,+}``; the unit vector along ``xi - eta`` is taken as 0 when ``xi = eta``."""
    xi, eta = np.asarray(xi, float), np.asarray(eta, float)
    e = _unit(xi - eta)
    amp = mu * 0.5 * (xi[..., 0] * e[..., 0] + xi[..., 1] * e[..., 1]) + 0.25 * _norm(xi)
    return 1j * (epsilon * amp * paraproduct_cutoff(xi, eta))


def symbol_q(xi, eta, mu: int, nu: int, epsilon: float) -> np.ndarray:
    """``q_{mu,nu}``; depends on ``mu`` only through the slot it multiplies."""
    xi, eta = np.asarray(xi, float), np.asarray(eta, float)
    de = nu * _unit(eta) - _unit(xi)
    amp = xi[..., 0] * de[..., 0] + xi[..., 1] * de[..., 1]
    low = phi_le(np.sqrt(epsilon) * _norm(eta), 5)
    return 1j * (epsilon / 8.0 * amp * low * paraproduct_cutoff(xi, eta))


def tilde_q(xi, eta, mu: int, nu: int, epsilon: float, N0: int = 5) -> np.ndarray:
    xi, eta = np.asarray(xi, float), np.asarray(eta, float)
    w = np.sqrt((1.0 + _norm(xi) ** 2) / (1.0 + _norm(eta) ** 2)) ** N0
    return w * symbol_q(xi, eta, mu, nu, epsilon)


def s_bound_ratio(xi, eta, mu: int, epsilon: float, N0: int = 5) -> np.ndarray:
    """Symmetrized difference of ``s`` divided by ``eps |xi - eta|``."""
    xi, eta = np.asarray(xi, float), np.asarray(eta, float)
    w = np.sqrt((1.0 + _norm(xi) ** 2) / (1.0 + _norm(eta) ** 2)) ** N0
    diff = w * symbol_s(xi, eta, mu, epsilon) - symbol_s(eta, xi, -mu, epsilon) / w
    return np.abs(diff) / (epsilon * _norm(xi - eta))


def q_bound_ratios(xi, eta, mu: int, epsilon: float) -> tuple[np.ndarray, np.ndarray]:
    """``|q_{mu,-}| / (eps|xi|)`` and ``|q_{mu,+}| / (eps|xi-eta|)``."""
    xi, eta = np.asarray(xi, float), np.asarray(eta, float)
    r1 = np.abs(symbol_q(xi, eta, mu, -1, epsilon)) / (epsilon * _norm(xi))
    r2 = np.abs(symbol_q(xi, eta, mu, 1, epsilon)) / (epsilon * _norm(xi - eta))
    return r1, r2


# sampling -----------------------------------------------------------------------


def _polar(r: np.ndarray, th: np.ndarray) -> np.ndarray:
    return np.stack([r * np.cos(th), r * np.sin(th)], axis=-1)


def sample_regime(
    rng: np.random.Generator,
    n: int,
    epsilon: float,
    scaled_range: tuple[float, float] = (0.25, 64.0),
    ratio_range: tuple[float, float] = (2.0**-8, 2.0**-5),
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Log-uniform polar samples of ``(xi, eta)``.

    ``sqrt(eps)|eta|`` is log-uniform on ``scaled_range``; ``xi - eta`` is
    area-uniform on the annulus ``ratio_range * |eta|``; both angles are
    uniform. Returns ``xi, eta`` and the importance weight converting the
    sample average into Lebesgue measure on ``R^4``.
    """
    lo, hi = scaled_range
    a, b = ratio_range
    s = np.exp(rng.uniform(np.log(lo), np.log(hi), n))
    r = s / np.sqrt(epsilon)
    rho = r * np.sqrt(rng.uniform(a * a, b * b, n))
    eta = _polar(r, rng.uniform(0.0, 2.0 * np.pi, n))
    xi = eta + _polar(rho, rng.uniform(0.0, 2.0 * np.pi, n))
    # Lebesgue density r*rho over proposal density in (r, theta, rho, omega)
    weight = r**4 * np.log(hi / lo) * 0.5 * (b * b - a * a) * (2.0 * np.pi) ** 2
    return xi, eta, weight


def symbol_bound_maxima(
    epsilon: float,
    n_samples: int = 100_000,
    seed: int = 0,
    N0: int = 5,
    scaled_range: tuple[float, float] = (0.25, 64.0),
    ratio_range: tuple[float, float] = (2.0**-9, 2.0**-5),
) -> dict[str, float]:
    """Largest sampled value of each symbol bound ratio.

    Keys are ``s{mu}`` for :func:`s_bound_ratio` and ``q{mu}{nu}`` for the
    two ratios of :func:`q_bound_ratios`, with signs written as ``+``/``-``.
    Samples come from :func:`sample_regime`; points where a ratio is
    undefined (``xi = eta``) are skipped.
    """
    rng = np.random.default_rng(seed)
    xi, eta, _ = sample_regime(rng, n_samples, epsilon, scaled_range, ratio_range)
    out: dict[str, float] = {}
    for mu in (1, -1):
        m = "+" if mu == 1 else "-"
        out[f"s{m}"] = float(np.nanmax(s_bound_ratio(xi, eta, mu, epsilon, N0)))
        r_minus, r_plus = q_bound_ratios(xi, eta, mu, epsilon)
        out[f"q{m}-"] = float(np.nanmax(r_minus))
        out[f"q{m}+"] = float(np.nanmax(r_plus))
    return out


@dataclass
class ResonanceResult:
    """Accepted points of the resonant set and a Monte-Carlo measure estimate.

    ``measure`` is in units of Lebesgue measure on ``R^4``; ``fraction`` is
    relative to the sampled domain. When nothing is accepted, ``measure``
    is 0 and ``measure_upper`` is a 95% upper bound (rule of three).
    """

    xi: np.ndarray
    eta: np.ndarray
    phi: np.ndarray
    mu: int
    nu: int
    epsilon: float
    cutoffs: AnalysisCutoffs
    n_samples: int
    measure: float
    measure_stderr: float
    domain_volume: float
    measure_upper: float
    tags: list[str] = field(default_factory=list)

    @property
    def n_accepted(self) -> int:
        return int(self.phi.size)

    @property
    def fraction(self) -> float:
        return self.measure / self.domain_volume

    @property
    def fraction_stderr(self) -> float:
        return self.measure_stderr / self.domain_volume

    @property
    def empty(self) -> bool:
        return self.phi.size == 0


def resonance_sample(
    epsilon: float,
    cutoffs: AnalysisCutoffs,
    signs: tuple[int, int] = (1, -1),
    n_samples: int = 200_000,
    seed: int = 0,
    scaled_range: tuple[float, float] = (0.25, 64.0),
) -> ResonanceResult:
    """Sample ``{(xi, eta) in supp q : |phi| <= 2^-D, |xi-eta|/|eta| in [2^-K, 2^-5]}``."""
    mu, nu = signs
    rng = np.random.default_rng(seed)
    ratio_range = (2.0 ** -cutoffs.K, 2.0**-5)
    xi, eta, w = sample_regime(rng, n_samples, epsilon, scaled_range, ratio_range)
    support = (paraproduct_cutoff(xi, eta) != 0) & (phi_le(np.sqrt(epsilon) * _norm(eta), 5) != 0)
    val = reduced_phi(xi, eta, mu, nu, epsilon)
    acc = support & (np.abs(val) <= 2.0 ** -cutoffs.D)
    contrib = np.where(acc, w, 0.0)
    measure = float(contrib.mean())
    stderr = float(contrib.std(ddof=1) / np.sqrt(n_samples))
    a, b = ratio_range
    lo, hi = (x / np.sqrt(epsilon) for x in scaled_range)
    volume = np.pi * (b * b - a * a) * 0.5 * np.pi * (hi**4 - lo**4)
    upper = measure if acc.any() else 3.0 * float(w.mean()) / n_samples
    sign = "+" if mu == 1 else "-"
    ratios = _norm(xi[acc] - eta[acc]) / _norm(eta[acc])
    tags = [f"S{sign};k={int(np.floor(np.log2(t)))}" for t in ratios]
    return ResonanceResult(
        xi[acc], eta[acc], val[acc], mu, nu, epsilon, cutoffs, n_samples, measure, stderr, volume, upper, tags
    )


# Jacobian -----------------------------------------------------------------------


def jacobian_closed_form(xi, eta, mu: int, epsilon: float) -> np.ndarray:
    """``d phi_{mu,-} / d r_eta`` at fixed angles and fixed ``|xi|``.

    Uses ``d|xi - eta| / d r_eta = -cos angle(xi - eta, eta)``.
    """
    xi, eta = np.asarray(xi, float), np.asarray(eta, float)
    rx, re, rho = _norm(xi), _norm(eta), _norm(xi - eta)
    ch = _cos_half_sq(xi, eta)
    ca = np.cos(angle(xi - eta, eta))
    if mu == 1:
        return 4.0 * epsilon * ch * (2.0 * re - rx) - epsilon * (4.0 * ch - 3.0) * (ca * (rx + re + 2.0 * rho) - rho)
    return epsilon * (2.0 * re - rx) + epsilon * (1.0 - 3.0 / (4.0 * ch)) * ((rx + re - 2.0 * rho) * ca - rho)


def jacobian_fd(xi, eta, mu: int, epsilon: float, rel_step: float = 1e-4) -> np.ndarray:
    """Central difference of ``phi_{mu,-}`` in ``|eta|`` along the direction of ``eta``."""
    xi, eta = np.asarray(xi, float), np.asarray(eta, float)
    re = _norm(eta)
    h = rel_step * np.minimum(_norm(xi - eta), re)
    unit = eta / re[..., None]
    plus = reduced_phi(xi, eta + h[..., None] * unit, mu, -1, epsilon)
    minus = reduced_phi(xi, eta - h[..., None] * unit, mu, -1, epsilon)
    return (plus - minus) / (2.0 * h)


def jacobian_check(xi, eta, mu: int, epsilon: float) -> tuple[np.ndarray, np.ndarray]:
    """Return ``(dphi/dr_eta) / sqrt(eps)`` and the relative FD vs closed-form gap."""
    fd = jacobian_fd(xi, eta, mu, epsilon)
    cf = jacobian_closed_form(xi, eta, mu, epsilon)
    return fd / np.sqrt(epsilon), np.abs(fd - cf) / np.abs(cf)
