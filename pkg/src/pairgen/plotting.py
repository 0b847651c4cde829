"""Static figures written next to the CSV/JSON results."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

__all__ = ["plot_jsi", "plot_noise_peaks", "plot_noise_spectra"]

# PNG metadata normally carries the library version; keep files reproducible.
_META = {"Software": None}


def plot_jsi(grid, omega_s: float, path, title: str | None = None) -> Path:
    """Heatmap of the normalised joint spectral intensity."""
    inten = grid.intensity
    peak = inten.max()
    x = (grid.omega1 - omega_s) / (2 * np.pi) * 1e-12
    y = (grid.omega2 - omega_s) / (2 * np.pi) * 1e-12
    fig, ax = plt.subplots(figsize=(5.2, 4.4))
    im = ax.imshow(
        (inten / peak if peak > 0 else inten).T,
        origin="lower",
        extent=(x[0], x[-1], y[0], y[-1]),
        cmap="viridis",
        vmin=0,
        vmax=1,
        aspect="equal",
        interpolation="nearest",
    )
    ax.set_xlabel(r"$(\omega_1-\omega_s)/2\pi$ (THz)")
    ax.set_ylabel(r"$(\omega_2-\omega_s)/2\pi$ (THz)")
    ax.set_title(title or f"normalised JSI, $\\omega_s/2\\pi$ = {omega_s / (2 * np.pi) * 1e-12:.2f} THz")
    fig.colorbar(im, ax=ax, label=r"$|\Phi|^2$ / max")
    fig.tight_layout()
    path = Path(path)
    fig.savefig(path, dpi=150, metadata=_META)
    plt.close(fig)
    return path


def plot_noise_peaks(seed_powers, sstpdc_peak, sfwm_peak, fom, path) -> Path:
    """FOM and zero-detuning pair densities versus seed power."""
    fig, ax = plt.subplots(figsize=(5.6, 4.2))
    ax.loglog(seed_powers, sstpdc_peak, label="seeded pairs (peak)")
    ax.loglog(seed_powers, sfwm_peak, label="FWM pairs (peak)")
    ax.set_xlabel("seed power $P_s$ (W)")
    ax.set_ylabel("spectral density (photons/s/Hz)")
    ax2 = ax.twinx()
    ax2.loglog(seed_powers, fom, "k--", label="figure of merit")
    ax2.set_ylabel("figure of merit")
    lines = ax.get_lines() + ax2.get_lines()
    ax.legend(lines, [ln.get_label() for ln in lines], loc="best", fontsize=8)
    fig.tight_layout()
    path = Path(path)
    fig.savefig(path, dpi=150, metadata=_META)
    plt.close(fig)
    return path


def plot_noise_spectra(report, path) -> Path:
    """Pair densities and Raman noise across detuning at one seed power."""
    d = report.detuning * 1e-12
    fig, ax = plt.subplots(figsize=(5.6, 4.2))
    ax.semilogy(d, report.pair_density_sstpdc, label="seeded pairs")
    ax.semilogy(d, report.raman_density_stokes, label="Raman from seed (Stokes)")
    ax.semilogy(d, report.raman_density_antistokes, ":", label="Raman from seed (anti-Stokes)")
    ax.semilogy(d, report.pair_density_sfwm, label="FWM pairs")
    ax.semilogy(d, report.raman_density_sfwm, label="Raman from FWM pump")
    ax.set_xlabel(r"detuning $\Delta$ (THz)")
    ax.set_ylabel("spectral density (photons/s/Hz)")
    ax.set_title(f"$P_s$ = {report.power_s:g} W")
    ax.legend(fontsize=8)
    fig.tight_layout()
    path = Path(path)
    fig.savefig(path, dpi=150, metadata=_META)
    plt.close(fig)
    return path
