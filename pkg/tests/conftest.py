import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from bsq2d.spectral import GridSpec

settings.register_profile("default", deadline=None, max_examples=40, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def grid64():
    return GridSpec(64, 2 * np.pi)


@pytest.fixture(scope="session")
def grid128():
    return GridSpec(128, 2 * np.pi)


def brute_dft(values: np.ndarray) -> np.ndarray:
    """Direct double sum ``sum_x f(x) exp(-2 pi i k.x / n)``, independent of any FFT."""
    n = values.shape[0]
    j = np.arange(n)
    W = np.exp(-2j * np.pi * np.outer(j, j) / n)
    return W @ values @ W.T


def sparse_low_field(grid, rng, radius, count=4):
    """Real field with a handful of modes in ``0 < |xi| <= radius``."""
    from bsq2d.spectral import SpectralScalar

    idx = np.argwhere((grid.kabs > 0) & (grid.kabs <= radius) & grid.matched_mask)
    pick = idx[rng.choice(len(idx), count, replace=False)]
    c = np.zeros((grid.n, grid.n), dtype=complex)
    for i, j in pick:
        z = (rng.standard_normal() + 1j * rng.standard_normal()) * grid.n**2
        c[i, j] += z
        c[-i % grid.n, -j % grid.n] += np.conj(z)
    return SpectralScalar(grid, c)


def brute_bilinear(f, g, symbol):
    """``(1/n^2) sum_p f(p) sigma(|p|, |xi - p|) g(xi - p)`` over the support of ``f``, then 2/3 truncation.

    Independent of the shell-by-shell FFT evaluation used by the library.
    """
    grid = f.grid
    n = grid.n
    out = np.zeros((n, n), dtype=complex)
    for i, j in np.argwhere(f.coeffs != 0):
        p = np.array([grid.kx[i, j], grid.ky[i, j]])
        shifted = np.roll(g.coeffs, shift=(i, j), axis=(0, 1))
        qx = np.roll(grid.kx, shift=(i, j), axis=(0, 1))
        qy = np.roll(grid.ky, shift=(i, j), axis=(0, 1))
        out += f.coeffs[i, j] * symbol(np.hypot(*p), np.hypot(qx, qy)) * shifted
    out /= n * n
    out[~grid.dealias_mask] = 0.0
    return out
