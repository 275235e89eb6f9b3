"""Report figures written as PNG files (non-interactive backend)."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

__all__ = [
    "plot_energy",
    "plot_ledger",
    "plot_sweep",
    "plot_resonance",
    "plot_jacobian",
    "plot_gain",
    "plot_consistency",
]

_STYLE = {"figure.dpi": 110, "axes.grid": True, "grid.alpha": 0.3, "axes.spines.top": False, "axes.spines.right": False}


def _save(fig, path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)
    return path


def _positive(y: np.ndarray) -> np.ndarray:
    y = np.asarray(y, dtype=float)
    return np.where(y > 0, y, np.nan)


def plot_energy(rows, path: str | Path, title: str = "") -> Path:
    """Energy ratio and structural residuals against time."""
    t = np.array([r.t for r in rows])
    e = np.array([r.E_N0 for r in rows])
    with plt.rc_context(_STYLE):
        fig, (a0, a1) = plt.subplots(1, 2, figsize=(9, 3.4))
        a0.plot(t, e / e[0], color="C0")
        a0.set_xlabel("t")
        a0.set_ylabel("E_N0(t) / E_N0(0)")
        a0.set_title(title or "energy")
        a1.semilogy(t, _positive([r.curl_res for r in rows]), label="curl residual")
        a1.semilogy(t, _positive([r.profile_ratio for r in rows]), label="profile ratio")
        a1.set_xlabel("t")
        a1.legend(fontsize=8)
        return _save(fig, path)


def plot_ledger(rows, path: str | Path) -> Path:
    """Group norms of the symmetrized right-hand side against time."""
    t = np.array([r.t for r in rows])
    with plt.rc_context(_STYLE):
        fig, ax = plt.subplots(figsize=(5.5, 3.4))
        for g in ("S", "Q", "C", "N"):
            y = _positive([r.ledger.get(g, np.nan) for r in rows])
            if np.any(np.isfinite(y)):
                ax.semilogy(t, y, label=g)
        ax.set_xlabel("t")
        ax.set_ylabel("H^N0 norm")
        ax.set_title("symmetrized right-hand side by group")
        if ax.get_legend_handles_labels()[0]:
            ax.legend(fontsize=8)
        return _save(fig, path)


def plot_sweep(summary, path: str | Path) -> Path:
    """Energy growth against ``eps^(2/3) t`` for every run in a sweep."""
    with plt.rc_context(_STYLE):
        fig, ax = plt.subplots(figsize=(5.5, 3.6))
        for i, e in enumerate(summary.entries):
            t, en = e.result.energy_series()
            ax.plot(e.epsilon ** (2 / 3) * t, en / en[0] - 1.0, color=f"C{i}", label=f"eps={e.epsilon:g}")
            if e.compare is not None:
                tc, ec = e.compare.energy_series()
                ax.plot(e.epsilon ** (2 / 3) * tc, ec / ec[0] - 1.0, color=f"C{i}", ls="--")
        ax.set_xlabel("eps^(2/3) t")
        ax.set_ylabel("E_N0(t)/E_N0(0) - 1")
        ax.set_title("lifespan sweep (dashed: finer grid)")
        ax.legend(fontsize=8)
        return _save(fig, path)


def plot_resonance(result, path: str | Path) -> Path:
    """Accepted resonant points in ``(sqrt(eps)|eta|, |xi-eta|/|eta|)``."""
    with plt.rc_context(_STYLE):
        fig, ax = plt.subplots(figsize=(5.5, 3.6))
        if result.n_accepted:
            re = np.hypot(result.eta[:, 0], result.eta[:, 1])
            rho = np.hypot(*(result.xi - result.eta).T)
            sc = ax.scatter(np.sqrt(result.epsilon) * re, rho / re, c=result.phi, s=4, cmap="coolwarm")
            fig.colorbar(sc, ax=ax, label="reduced phase")
            ax.set_yscale("log")
        ax.set_xlabel("sqrt(eps)|eta|")
        ax.set_ylabel("|xi-eta| / |eta|")
        ax.set_title(f"resonant set, D={result.cutoffs.D}, K={result.cutoffs.K}, n={result.n_accepted}")
        return _save(fig, path)


def plot_jacobian(ratios: dict[str, np.ndarray], path: str | Path) -> Path:
    """Histograms of ``(d phi / d r_eta) / sqrt(eps)``, one per label."""
    with plt.rc_context(_STYLE):
        fig, ax = plt.subplots(figsize=(5.5, 3.6))
        for label, r in ratios.items():
            r = np.abs(np.asarray(r))
            r = r[r > 0]
            if r.size:
                ax.hist(np.log10(r), bins=60, histtype="step", label=label)
        ax.set_xlabel("log10 |d phi / d r_eta| / sqrt(eps)")
        ax.set_ylabel("count")
        ax.legend(fontsize=8)
        return _save(fig, path)


def plot_gain(fit, path: str | Path) -> Path:
    """Measured ratio against the angular scale with the fitted power law."""
    with plt.rc_context(_STYLE):
        fig, ax = plt.subplots(figsize=(5.0, 3.4))
        used = [r for r in fit.results if r.l in fit.used_l]
        ls = np.array([r.l for r in used], dtype=float)
        ax.plot(ls, np.log2([r.ratio for r in used]), "o", label="measured")
        if fit.exponent is not None:
            ax.plot(ls, fit.exponent * ls + fit.intercept, "-", label=f"slope {fit.exponent:.3f}")
            ax.plot(ls, 0.5 * (ls - ls[0]) + np.log2(used[0].ratio), ":", label="slope 1/2")
        ax.set_xlabel("l")
        ax.set_ylabel("log2 ratio")
        ax.legend(fontsize=8)
        return _save(fig, path)


def plot_consistency(report, path: str | Path) -> Path:
    """Finite-difference errors against the step for both assembled forms."""
    with plt.rc_context(_STYLE):
        fig, ax = plt.subplots(figsize=(5.0, 3.4))
        h = np.array(report.dts)
        ax.loglog(h, _positive(report.drift_err_symmetrized), "o-", label="symmetrized (drift)")
        ax.loglog(h, _positive(report.drift_err_linearized), "x--", label="linearized (drift)")
        ax.loglog(h, _positive(report.err_symmetrized), "s:", label="symmetrized (d_t V)")
        ax.set_xlabel("dt")
        ax.set_ylabel("relative error")
        ax.legend(fontsize=8)
        return _save(fig, path)
