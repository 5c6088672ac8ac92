"""Two-photon spectral amplitude f(Omega) of a poled waveguide and its phase analysis."""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field

import finufft
import numpy as np

from .core import AnalysisError, SpectralGrid, detuning_per_nm, omega_to_wavelength
from .dispersion import DispersionModel, bulk_mismatch
from .poling import DomainSequence

PHASE_FLOOR = 1e-12  # relative to peak |f|
NUFFT_EPS = 1e-14
_DIRECT_CHUNK = 192


def _tails(lengths) -> np.ndarray:
    """tail_m = sum_{n > m} L_n by one reverse pass, accumulated in extended precision."""
    acc = np.cumsum(np.asarray(lengths, dtype=np.longdouble)[::-1])[::-1]
    return np.concatenate((acc[1:], [0.0])).astype(float)


def domain_sum_direct(seq: DomainSequence, mismatch) -> np.ndarray:
    """sum_m s_m L_m sinc(k L_m / 2) exp(-i k (L_m / 2 + tail_m)) for every k in ``mismatch``.

    The alternating domain signs supply the grating momentum, so ``mismatch``
    is the bare (grating-free) phase mismatch.
    """
    k = np.asarray(mismatch, dtype=float)
    Lm = np.asarray(seq.lengths)
    tail = _tails(Lm)
    weight = seq.signs * Lm
    centre = Lm / 2 + tail
    out = np.empty(k.shape, dtype=complex)
    flat_k, flat_out = k.ravel(), out.ravel()
    for i in range(0, flat_k.size, _DIRECT_CHUNK):
        kk = flat_k[i:i + _DIRECT_CHUNK, None]
        terms = weight * np.sinc(kk * Lm / (2 * np.pi)) * np.exp(-1j * kk * centre)
        flat_out[i:i + _DIRECT_CHUNK] = terms.sum(axis=1)
    return out


def domain_sum_nufft(seq: DomainSequence, mismatch) -> np.ndarray:
    """Same sum as :func:`domain_sum_direct`, via a type-3 NUFFT over the domain walls.

    Each domain contributes s_m (exp(-i k t_m) - exp(-i k (t_m + L_m))) / (i k),
    t_m being its distance from the output face.
    """
    k = np.asarray(mismatch, dtype=float).ravel()
    Lm = np.asarray(seq.lengths)
    L = float(Lm.sum())
    tail = _tails(Lm)
    walls = np.concatenate((tail, tail + Lm))
    strength = np.concatenate((seq.signs, -seq.signs)).astype(complex)
    kc = 0.5 * (k.max() + k.min())
    q = k - kc
    src = strength * np.exp(-1j * kc * walls)
    x = walls - L / 2
    total = finufft.nufft1d3(x, src, q, isign=-1, eps=NUFFT_EPS) * np.exp(-1j * q * L / 2)
    out = np.empty(k.shape, dtype=complex)
    small = np.abs(k) * Lm.min() < 1e-3
    out[~small] = total[~small] / (1j * k[~small])
    if np.any(small):
        out[small] = domain_sum_direct(seq, k[small])
    return out.reshape(np.shape(mismatch))


@dataclass(frozen=True)
class JointSpectrum:
    grid: SpectralGrid
    omega0: float
    amplitude: np.ndarray = field(repr=False)
    intensity: np.ndarray = field(repr=False)
    phase: np.ndarray | None = field(default=None, repr=False)
    group_slope: float | None = None
    delta_phase: np.ndarray | None = field(default=None, repr=False)

    @property
    def detuning(self) -> np.ndarray:
        return self.grid.samples

    @property
    def signal_wavelength_nm(self) -> np.ndarray:
        return omega_to_wavelength(self.omega0 + self.grid.samples)

    @property
    def center_wavelength_nm(self) -> float:
        return omega_to_wavelength(self.omega0)

    @property
    def phase_defined(self) -> np.ndarray:
        if self.phase is None:
            raise AnalysisError("phase not unwrapped yet")
        return np.isfinite(self.phase)


def spectrum_from_amplitude(amp, grid: SpectralGrid, omega0: float) -> JointSpectrum:
    amp = np.asarray(amp, dtype=complex)
    if amp.shape != (grid.count,):
        raise ValueError(f"amplitude has shape {amp.shape}, grid has {grid.count} samples")
    power = np.abs(amp) ** 2
    peak = power.max()
    if not peak > 0:
        raise AnalysisError("amplitude vanishes on the whole grid")
    return JointSpectrum(grid, float(omega0), amp, power / peak)


def amplitude(seq: DomainSequence, d: DispersionModel, grid: SpectralGrid, method: str = "nufft") -> JointSpectrum:
    """Coherent domain sum on ``grid``; ``method`` is "nufft" (fast) or "direct" (reference)."""
    k = bulk_mismatch(d, grid.samples)
    if method == "nufft":
        amp = domain_sum_nufft(seq, k)
    elif method == "direct":
        amp = domain_sum_direct(seq, k)
    else:
        raise ValueError(f"unknown method {method!r}")
    return spectrum_from_amplitude(amp, grid, d.omega0)


def unwrap_phase(spectrum: JointSpectrum, floor: float = PHASE_FLOOR) -> JointSpectrum:
    """Continuous phase, unwrapped from the defined sample nearest Omega = 0 outwards.

    Samples with |f| below ``floor`` * peak are left as NaN.
    """
    mag = np.abs(spectrum.amplitude)
    ok = np.flatnonzero(mag > floor * mag.max())
    phase = np.full(spectrum.grid.count, np.nan)
    k0 = int(np.argmin(np.abs(ok - spectrum.grid.center)))
    raw = np.angle(spectrum.amplitude)
    right, left = ok[k0:], ok[k0::-1]
    phase[right] = np.unwrap(raw[right])
    phase[left] = np.unwrap(raw[left])
    return dataclasses.replace(spectrum, phase=phase)


def _odd_fit_slope(omega, delta, weight) -> float:
    """Linear coefficient of a weighted odd-polynomial fit (Omega, Omega^3, Omega^5) of ``delta``."""
    scale = np.abs(omega).max()
    x = omega / scale
    nonzero = np.unique(np.abs(x[x != 0]))
    degree = min(3, len(nonzero))
    basis = np.stack([x ** (2 * j + 1) for j in range(degree)], axis=1)
    sw = np.sqrt(weight)
    coef, *_ = np.linalg.lstsq(basis * sw[:, None], delta * sw, rcond=None)
    return coef[0] / scale


def residual_phase(spectrum: JointSpectrum, min_samples: int = 5) -> JointSpectrum:
    """Fill ``group_slope`` and the residual odd-order phase ``delta_phase``.

    Delta(W) = phi(W) - phi(-W); its linear part 2 phi'(0) W is estimated from a
    weighted odd-polynomial fit over the half-maximum support (weights =
    intensity) and removed.
    """
    if spectrum.phase is None:
        spectrum = unwrap_phase(spectrum)
    phi = spectrum.phase
    omega = spectrum.grid.samples
    big_delta = phi - phi[::-1]
    valid = np.isfinite(big_delta)
    inten = spectrum.intensity
    support = valid & (inten >= 0.5) & (inten[::-1] >= 0.5)
    if support.sum() < min_samples:
        raise AnalysisError(
            f"only {int(support.sum())} samples above half maximum on both sides; need {min_samples} "
            "(grid too coarse for this spectrum)"
        )
    slope = _odd_fit_slope(omega[support], big_delta[support], inten[support]) / 2
    delta = big_delta - 2 * slope * omega
    delta[~valid] = np.nan
    return dataclasses.replace(spectrum, group_slope=float(slope), delta_phase=delta)


def analyze(seq: DomainSequence, d: DispersionModel, grid: SpectralGrid, method: str = "nufft") -> JointSpectrum:
    """Amplitude, unwrapped phase and residual phase in one call."""
    return residual_phase(unwrap_phase(amplitude(seq, d, grid, method)))


@dataclass(frozen=True)
class BandwidthReport:
    fwhm_nm: float
    fwhm_rad_fs: float
    peak_wavelengths: list
    symmetry_residual: float
    truncated: bool


def _half_max_span(x, y, level=0.5):
    above = np.flatnonzero(y >= level)
    a, b = above[0], above[-1]
    truncated = a == 0 or b == len(y) - 1
    left = x[a] if a == 0 else x[a - 1] + (level - y[a - 1]) / (y[a] - y[a - 1]) * (x[a] - x[a - 1])
    right = x[b] if b == len(y) - 1 else x[b] + (level - y[b]) / (y[b + 1] - y[b]) * (x[b + 1] - x[b])
    return left, right, truncated


def bandwidth(spectrum: JointSpectrum) -> BandwidthReport:
    """FWHM of |f|^2 from the outermost half-maximum crossings."""
    omega = spectrum.grid.samples
    inten = spectrum.intensity
    left, right, truncated = _half_max_span(omega, inten)
    width = right - left
    lam0 = spectrum.center_wavelength_nm
    interior = np.arange(1, len(inten) - 1)
    peaks = interior[(inten[interior] >= inten[interior - 1]) & (inten[interior] > inten[interior + 1])
                     & (inten[interior] >= 0.9)]
    if len(peaks) == 0:
        peaks = np.array([int(np.argmax(inten))])
    mag = np.abs(spectrum.amplitude)
    w = spectrum.grid.trapezoid_weights()
    sym = float(np.sum(w * np.abs(mag - mag[::-1])) / np.sum(w * mag))
    return BandwidthReport(
        fwhm_nm=float(width / detuning_per_nm(lam0)),
        fwhm_rad_fs=float(width),
        peak_wavelengths=[float(v) for v in spectrum.signal_wavelength_nm[peaks]],
        symmetry_residual=sym,
        truncated=bool(truncated),
    )


def total_variation(spectrum: JointSpectrum) -> float:
    """Sum of absolute successive differences of the unit-peak intensity."""
    return float(np.abs(np.diff(spectrum.intensity)).sum())
