"""Self-contained SVG figures (matplotlib, Agg backend)."""
from __future__ import annotations

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402
from mpl_toolkits.axes_grid1.inset_locator import inset_axes  # noqa: E402

plt.rcParams["svg.hashsalt"] = "spdcdesign"
plt.rcParams["svg.fonttype"] = "path"


def _save(fig, path):
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)


def plot_spectrum(spectrum, path, title: str = ""):
    """Intensity on the left axis, residual phase on the right axis, versus signal wavelength."""
    lam = spectrum.signal_wavelength_nm
    fig, ax = plt.subplots(figsize=(6.0, 3.6))
    ax.plot(lam, spectrum.intensity, color="tab:blue", lw=1.0)
    ax.set_xlabel("signal wavelength (nm)")
    ax.set_ylabel("|f|$^2$ (norm.)", color="tab:blue")
    ax.set_ylim(0, 1.05)
    if spectrum.delta_phase is not None:
        ax2 = ax.twinx()
        band = np.isfinite(spectrum.delta_phase) & (spectrum.intensity >= 1e-3)
        ax2.plot(lam[band], spectrum.delta_phase[band], color="tab:red", lw=0.8)
        ax2.set_ylabel(r"$\delta$ (rad)", color="tab:red")
    if title:
        ax.set_title(title, fontsize=9)
    fig.tight_layout()
    _save(fig, path)


def plot_interferogram(ig, path, title: str = "", zoom_fs: float | None = None):
    """Coincidence rate versus delay with a fringe-resolving inset around the envelope peak."""
    fig, ax = plt.subplots(figsize=(6.0, 3.6))
    norm = ig.rate.max() or 1.0
    ax.plot(ig.delays_fs, ig.rate / norm, color="0.3", lw=0.4)
    ax.plot(ig.delays_fs, (ig.constant + ig.envelope) / norm, color="tab:orange", lw=0.8)
    ax.plot(ig.delays_fs, (ig.constant - ig.envelope) / norm, color="tab:orange", lw=0.8)
    ax.set_xlabel("delay (fs)")
    ax.set_ylabel("R (norm.)")
    centre = ig.peak_delay_fs if np.isfinite(ig.peak_delay_fs) else 0.0
    half = zoom_fs or 6 * 2 * np.pi / (ig.omega0 * ig.config.phase_group_ratio)
    sel = np.abs(ig.delays_fs - centre) <= half
    if sel.sum() > 4:
        ins = inset_axes(ax, width="32%", height="38%", loc="upper right", borderpad=1.0)
        ins.plot(ig.delays_fs[sel], ig.rate[sel] / norm, color="0.2", lw=0.7, marker=".", ms=1.5)
        ins.tick_params(labelsize=6)
    if title:
        ax.set_title(title, fontsize=9)
    _save(fig, path)


def plot_profile(z_um, period_um, path, title: str = ""):
    fig, ax = plt.subplots(figsize=(6.0, 3.2))
    ax.plot(np.asarray(z_um) * 1e-3, period_um, lw=1.0)
    ax.set_xlabel("z (mm)")
    ax.set_ylabel(r"local period ($\mu$m)")
    if title:
        ax.set_title(title, fontsize=9)
    fig.tight_layout()
    _save(fig, path)
