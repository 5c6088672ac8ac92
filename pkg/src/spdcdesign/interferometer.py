"""Post-selected coincidence interferogram versus birefringent delay.

R(tau) = C + Re[exp(i w0 tau_ph) I(tau_gr)] with
C = sum w (|f(W)|^2 + |f(-W)|^2) and I(t) = 2 sum w f(W) conj(f(-W)) exp(-i W t).
The phase-delay axis is slaved to the group-delay axis through the delay-line
ratio tau_ph / tau_gr.
"""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field

import finufft
import numpy as np
from scipy import optimize

from .core import AnalysisError
from .jsa import JointSpectrum, residual_phase, spectrum_from_amplitude, unwrap_phase

NUFFT_EPS = 1e-14
MIN_SAMPLES_PER_FRINGE = 8
MAX_REFINED_CROSSINGS = 64
UNDEFINED_PHASE_LIMIT = 1e-6  # intensity above which an undefined phase is an error


@dataclass(frozen=True)
class InterferogramConfig:
    """Delay axis in group delay (fs); with compensation it is measured from the source DGD point."""

    start_fs: float
    stop_fs: float
    step_fs: float
    phase_group_ratio: float = 1.0
    compensate_source_group_delay: bool = True

    def __post_init__(self):
        if not self.step_fs > 0:
            raise ValueError(f"step_fs must be positive, got {self.step_fs}")
        if not self.start_fs < self.stop_fs:
            raise ValueError(f"start_fs ({self.start_fs}) must be below stop_fs ({self.stop_fs})")
        if not self.phase_group_ratio > 0:
            raise ValueError("phase_group_ratio must be positive")

    def axis(self) -> np.ndarray:
        n = int(np.floor((self.stop_fs - self.start_fs) / self.step_fs + 1e-9)) + 1
        return self.start_fs + np.arange(n) * self.step_fs


def group_fringe_period(omega0: float, ratio: float) -> float:
    """Fringe period along the group-delay axis, 2 pi / (w0 ratio)."""
    return 2 * np.pi / (omega0 * ratio)


def default_config(spectrum: JointSpectrum, ratio: float, compensate: bool = True,
                   delay_range: tuple[float, float] | None = None, step_fs: float | None = None) -> InterferogramConfig:
    """Axis covering the full envelope, sampled at 16 points per fringe.

    Without an explicit ``delay_range`` the half range is 1.3 times the source
    differential group delay 2|g|, centred on the envelope position.
    """
    step = group_fringe_period(spectrum.omega0, ratio) / 16 if step_fs is None else step_fs
    if delay_range is None:
        s = spectrum if spectrum.group_slope is not None else residual_phase(spectrum)
        dgd = abs(2 * s.group_slope)
        width = np.ptp(s.grid.samples[s.intensity >= 0.5]) or s.grid.step
        half = 1.3 * max(dgd, 2 * np.pi / width)
        centre = 0.0 if compensate else 2 * s.group_slope
        delay_range = (centre - half, centre + half)
    return InterferogramConfig(delay_range[0], delay_range[1], step, ratio, compensate)


@dataclass(frozen=True)
class Interferogram:
    delays_fs: np.ndarray = field(repr=False)  # reported axis (see InterferogramConfig)
    group_delays_fs: np.ndarray = field(repr=False)
    phase_delays_fs: np.ndarray = field(repr=False)
    rate: np.ndarray = field(repr=False)
    envelope: np.ndarray = field(repr=False)  # |I(tau)|
    interference: np.ndarray = field(repr=False)  # complex I(tau)
    constant: float
    omega0: float
    config: InterferogramConfig
    compensation_delay_fs: float
    omega: np.ndarray = field(repr=False)
    kernel: np.ndarray = field(repr=False)  # 2 w f(W) conj(f(-W)), with compensation applied
    visibility_peak: float = float("nan")
    envelope_fwhm_fs: float = float("nan")
    fringe_period_fs: float = float("nan")
    peak_delay_fs: float = float("nan")
    envelope_truncated: bool = False

    def interference_at(self, tau):
        """Direct quadrature of I at arbitrary reported delays."""
        t = np.atleast_1d(np.asarray(tau, dtype=float))
        out = np.array([np.sum(self.kernel * np.exp(-1j * self.omega * v)) for v in t])
        return out[0] if np.ndim(tau) == 0 else out

    def rate_at(self, tau, extra_phase: float = 0.0):
        """R at reported delay ``tau`` with the fringe phase advanced by ``extra_phase``."""
        t = np.asarray(tau, dtype=float)
        phase = self.omega0 * self.config.phase_group_ratio * (t + self.compensation_delay_fs) + extra_phase
        return self.constant + np.real(np.exp(1j * phase) * self.interference_at(t))


def _kernel(spectrum: JointSpectrum, compensate: bool):
    if spectrum.phase is not None:
        bad = ~np.isfinite(spectrum.phase) & (spectrum.intensity > UNDEFINED_PHASE_LIMIT)
        if np.any(bad):
            raise AnalysisError(f"{int(bad.sum())} samples have undefined phase but intensity above "
                                f"{UNDEFINED_PHASE_LIMIT:g} of peak")
    f = spectrum.amplitude
    w = spectrum.grid.trapezoid_weights()
    omega = spectrum.grid.samples
    h = 2 * w * f * np.conj(f[::-1])
    shift = 0.0
    if compensate:
        s = spectrum if spectrum.group_slope is not None else residual_phase(spectrum)
        shift = 2 * s.group_slope
        h = h * np.exp(-1j * shift * omega)
    constant = float(np.sum(w * (np.abs(f) ** 2 + np.abs(f[::-1]) ** 2)))
    return omega, h, constant, shift


def interference_integral(omega, kernel, delays) -> np.ndarray:
    """sum_n kernel_n exp(-i omega_n tau_k), by type-3 NUFFT."""
    delays = np.asarray(delays, dtype=float)
    tc = 0.5 * (delays.max() + delays.min())
    src = kernel * np.exp(-1j * omega * tc)
    return finufft.nufft1d3(np.asarray(omega, float), src.astype(complex), delays - tc, isign=-1, eps=NUFFT_EPS)


def interference_integral_direct(omega, kernel, delays) -> np.ndarray:
    delays = np.asarray(delays, dtype=float)
    out = np.empty(len(delays), dtype=complex)
    for i in range(0, len(delays), 256):
        t = delays[i:i + 256, None]
        out[i:i + 256] = (kernel * np.exp(-1j * omega * t)).sum(axis=1)
    return out


def coincidence_rate(spectrum: JointSpectrum, cfg: InterferogramConfig) -> Interferogram:
    """Sampled interferogram with its envelope, visibility and fringe diagnostics filled in."""
    omega, h, constant, shift = _kernel(spectrum, cfg.compensate_source_group_delay)
    tau = cfg.axis()
    interference = interference_integral(omega, h, tau)
    tau_gr = tau + shift
    tau_ph = cfg.phase_group_ratio * tau_gr
    rate = np.maximum(constant + np.real(np.exp(1j * spectrum.omega0 * tau_ph) * interference), 0.0)
    ig = Interferogram(tau, tau_gr, tau_ph, rate, np.abs(interference), interference, constant,
                       spectrum.omega0, cfg, shift, omega, h)
    return _with_diagnostics(ig)


def _with_diagnostics(ig: Interferogram) -> Interferogram:
    updates = {}
    try:
        updates["peak_delay_fs"] = envelope_peak(ig)
        updates["visibility_peak"] = visibility(ig)
    except AnalysisError:
        pass
    try:
        updates["envelope_fwhm_fs"], updates["envelope_truncated"] = _envelope_width(ig)
    except AnalysisError:
        pass
    try:
        updates["fringe_period_fs"] = fringe_period(ig)
    except AnalysisError:
        pass
    return dataclasses.replace(ig, **updates)


def rate_direct(spectrum: JointSpectrum, tau_gr, tau_ph, compensate: bool = False) -> np.ndarray:
    """Reference: per-delay quadrature of sum w | |f(W)| e^{i theta} e^{i D} + |f(-W)| |^2.

    D is the unwrapped phase difference phi(W) - phi(-W), or the residual phase
    when ``compensate`` is set (then ``tau_gr`` is measured from the compensation point).
    """
    s = spectrum if spectrum.delta_phase is not None else residual_phase(unwrap_phase(spectrum))
    mag = np.abs(s.amplitude)
    diff = s.delta_phase if compensate else s.phase - s.phase[::-1]
    diff = np.where(np.isfinite(diff), diff, 0.0)
    w = s.grid.trapezoid_weights()
    omega = s.grid.samples
    out = []
    for tg, tp in zip(np.atleast_1d(tau_gr), np.atleast_1d(tau_ph)):
        theta = s.omega0 * tp - omega * tg
        out.append(np.sum(w * np.abs(mag * np.exp(1j * (theta + diff)) + mag[::-1]) ** 2))
    return np.array(out)


def envelope_peak(ig: Interferogram) -> float:
    """Delay of the envelope maximum, refined off-grid by bounded Brent search on |I|."""
    k = int(np.argmax(ig.envelope))
    if ig.envelope[k] <= 0:
        raise AnalysisError("interference term vanishes on the delay axis")
    lo = ig.delays_fs[max(k - 1, 0)]
    hi = ig.delays_fs[min(k + 1, len(ig.delays_fs) - 1)]
    if hi <= lo:
        return float(ig.delays_fs[k])
    res = optimize.minimize_scalar(lambda t: -abs(ig.interference_at(t)), bounds=(lo, hi), method="bounded",
                                   options={"xatol": 1e-9 * max(1.0, abs(hi))})
    return float(res.x) if -res.fun >= ig.envelope[k] else float(ig.delays_fs[k])


def _check_fringe_sampling(ig: Interferogram):
    per_fringe = group_fringe_period(ig.omega0, ig.config.phase_group_ratio) / ig.config.step_fs
    if per_fringe < MIN_SAMPLES_PER_FRINGE:
        raise AnalysisError(f"fringes undersampled: {per_fringe:.2f} samples per fringe, need "
                            f">= {MIN_SAMPLES_PER_FRINGE}")


def fringe_extremes(ig: Interferogram, tau: float) -> tuple[float, float]:
    """(R_max, R_min) over one fringe cycle of the phase delay at fixed group delay ``tau``."""
    value = ig.interference_at(tau)

    def r(psi):
        return ig.constant + np.real(np.exp(1j * psi) * value)

    psi = np.linspace(0.0, 2 * np.pi, 65)[:-1]
    samples = r(psi)
    step = psi[1]
    out = []
    for sign, k in ((-1, int(np.argmax(samples))), (1, int(np.argmin(samples)))):
        res = optimize.minimize_scalar(lambda p: sign * r(p), bounds=(psi[k] - step, psi[k] + step),
                                       method="bounded", options={"xatol": 1e-12})
        out.append(float(r(res.x)))
    return out[0], out[1]


def visibility(ig: Interferogram) -> float:
    """(R_max - R_min) / (R_max + R_min) at the envelope peak, cross-checked against |I| / C."""
    _check_fringe_sampling(ig)
    if ig.envelope.max() <= 1e-15 * ig.constant:
        return 0.0  # no mirror overlap, no interference
    tau = envelope_peak(ig)
    rmax, rmin = fringe_extremes(ig, tau)
    v_fringe = (rmax - rmin) / (rmax + rmin)
    v_env = abs(ig.interference_at(tau)) / ig.constant
    if abs(v_fringe - v_env) > 1e-6:
        raise AnalysisError(f"visibility estimators disagree: {v_fringe:.9f} vs {v_env:.9f}")
    return float(min(max(v_env, 0.0), 1.0))


def _envelope_width(ig: Interferogram) -> tuple[float, bool]:
    env = ig.envelope
    x = ig.delays_fs
    k = int(np.argmax(env))
    half = 0.5 * env[k]
    if not env[k] > 0:
        raise AnalysisError("flat zero envelope")
    below_left = np.flatnonzero(env[:k] < half)
    below_right = np.flatnonzero(env[k:] < half)
    truncated = len(below_left) == 0 or len(below_right) == 0
    if len(below_left):
        a = below_left[-1]
        left = x[a] + (half - env[a]) / (env[a + 1] - env[a]) * (x[a + 1] - x[a])
    else:
        left = x[0]
    if len(below_right):
        b = k + below_right[0]
        right = x[b - 1] + (half - env[b - 1]) / (env[b] - env[b - 1]) * (x[b] - x[b - 1])
    else:
        right = x[-1]
    return float(right - left), bool(truncated)


def envelope_fwhm(ig: Interferogram) -> float:
    """Full width at half maximum of the main envelope lobe (fs)."""
    return _envelope_width(ig)[0]


def envelope_local_maxima(ig: Interferogram, threshold: float = 0.1) -> np.ndarray:
    """Delays of local maxima of |I| above ``threshold`` times its peak."""
    env = ig.envelope
    i = np.arange(1, len(env) - 1)
    keep = (env[i] > env[i - 1]) & (env[i] >= env[i + 1]) & (env[i] >= threshold * env.max())
    return ig.delays_fs[i[keep]]


def fringe_period(ig: Interferogram, group_axis: bool = False) -> float:
    """Fringe period near the envelope peak from zero crossings of R - C.

    Returned in phase-delay units (2 pi / w0 for a spectrum centred at w0), or
    along the sampled group-delay axis when ``group_axis`` is set.
    """
    v = visibility(ig)
    if v <= 0.05:
        raise AnalysisError(f"visibility {v:.3f} too low to resolve fringes")
    y = ig.rate - ig.constant
    x = ig.delays_fs
    k = int(np.argmax(ig.envelope))
    lobe = ig.envelope >= 0.5 * ig.envelope[k]
    lo = k
    while lo > 0 and lobe[lo - 1]:
        lo -= 1
    hi = k
    while hi < len(x) - 1 and lobe[hi + 1]:
        hi += 1
    seg_x, seg_y = x[lo:hi + 1], y[lo:hi + 1]
    idx = np.flatnonzero(np.sign(seg_y[:-1]) * np.sign(seg_y[1:]) < 0)
    if len(idx) < 3:
        raise AnalysisError(f"only {len(idx)} fringe zero crossings inside the envelope main lobe")
    # refine the crossings nearest the peak on the exact R - C
    near = np.sort(idx[np.argsort(np.abs(idx + lo - k))[:MAX_REFINED_CROSSINGS]])
    if np.any(np.diff(near) <= 0) or len(near) < 3:
        raise AnalysisError("fringe zero crossings are not separated on the delay axis")

    def oscillation(t):
        return ig.rate_at(t) - ig.constant

    crossings = np.array([optimize.brentq(oscillation, seg_x[i], seg_x[i + 1], xtol=1e-12) for i in near])
    count = np.round((crossings - crossings[0]) / (crossings[1] - crossings[0] if len(crossings) > 1 else 1.0))
    slope = np.polyfit(count, crossings, 1)[0]
    period = 2 * slope
    return float(period if group_axis else period * ig.config.phase_group_ratio)


def phase_ruler_check(spectrum: JointSpectrum, c0: float, c2: float, cfg: InterferogramConfig) -> float:
    """max |R' - R| after multiplying f by exp(i (c0 + c2 W^2)); ideally zero."""
    base = coincidence_rate(residual_phase(unwrap_phase(spectrum)), cfg)
    omega = spectrum.grid.samples
    shifted = spectrum_from_amplitude(spectrum.amplitude * np.exp(1j * (c0 + c2 * omega ** 2)),
                                      spectrum.grid, spectrum.omega0)
    other = coincidence_rate(residual_phase(unwrap_phase(shifted)), cfg)
    return float(np.max(np.abs(other.rate - base.rate)))
