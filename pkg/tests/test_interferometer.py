import dataclasses

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from spdcdesign.core import AnalysisError, grid_for_wavelength_span, make_symmetric_grid, wavelength_to_omega
from spdcdesign.dispersion import group_properties
from spdcdesign.interferometer import (InterferogramConfig, coincidence_rate, default_config, envelope_fwhm,
                                       envelope_local_maxima, fringe_period, group_fringe_period,
                                       interference_integral, interference_integral_direct, phase_ruler_check,
                                       rate_direct, visibility)
from spdcdesign.jsa import analyze, residual_phase, spectrum_from_amplitude, unwrap_phase
from spdcdesign.poling import LinearChirp, Uniform, generate

W0 = wavelength_to_omega(1550.0)
L = 16500.0


def synthetic(amp_fn, phase_fn=lambda w: 0 * w, count=2001, span=0.3, omega0=W0):
    g = make_symmetric_grid(count, span)
    w = g.samples
    s = spectrum_from_amplitude(amp_fn(w) * np.exp(1j * phase_fn(w)), g, omega0)
    return residual_phase(unwrap_phase(s)) if np.sum(s.intensity * s.intensity[::-1] > 0.25) >= 5 else unwrap_phase(s)


def gauss(width, centre=0.0):
    return lambda w: np.exp(-((w - centre) / width) ** 2)


def cfg_for(s, half=400.0, ratio=1.0, compensate=False, step=None):
    step = group_fringe_period(s.omega0, ratio) / 16 if step is None else step
    return InterferogramConfig(-half, half, step, ratio, compensate)


def test_config_validation():
    with pytest.raises(ValueError):
        InterferogramConfig(0.0, 1.0, 0.0)
    with pytest.raises(ValueError):
        InterferogramConfig(1.0, 0.0, 0.1)


def test_perfect_null():
    s = synthetic(gauss(0.05))
    ig = coincidence_rate(s, cfg_for(s))
    assert ig.rate_at(0.0, extra_phase=np.pi) == pytest.approx(0.0, abs=1e-12 * ig.constant)
    direct = rate_direct(s, [0.0], [np.pi / W0])[0]
    assert direct == pytest.approx(0.0, abs=1e-12 * ig.constant)
    assert visibility(ig) == pytest.approx(1.0, abs=1e-9)


def test_no_mirror_overlap():
    s = synthetic(lambda w: np.where(w > 0.01, np.exp(-((w - 0.1) / 0.03) ** 2), 0.0))
    ig = coincidence_rate(s, cfg_for(s))
    np.testing.assert_allclose(ig.rate, ig.constant, rtol=1e-14)
    assert visibility(ig) == 0.0


def test_rate_nonnegative_random(rng):
    for _ in range(5):
        amp = rng.random(401) * np.exp(1j * rng.uniform(-np.pi, np.pi, 401))
        s = spectrum_from_amplitude(amp, make_symmetric_grid(401, 0.3), W0)
        ig = coincidence_rate(s, cfg_for(s, half=200.0, compensate=False))
        assert np.all(ig.rate >= 0)
        assert 0.0 <= ig.visibility_peak <= 1.0


@given(st.integers(min_value=0, max_value=2**32 - 1), st.booleans())
@settings(max_examples=15, deadline=None)
def test_decomposition_matches_direct(seed, compensate):
    rng = np.random.default_rng(seed)
    g = make_symmetric_grid(801, 0.25)
    w = g.samples
    amp = (np.exp(-((w - rng.uniform(-0.03, 0.03)) / 0.08) ** 2) * (1 + 0.3 * rng.random(801))
           * np.exp(1j * (rng.uniform(-50, 50) * w + rng.uniform(-300, 300) * w ** 2 + rng.uniform(-3e3, 3e3) * w ** 3)))
    s = residual_phase(unwrap_phase(spectrum_from_amplitude(amp, g, W0)))
    ig = coincidence_rate(s, cfg_for(s, half=300.0, ratio=0.9, compensate=compensate))
    idx = rng.choice(len(ig.delays_fs), 40, replace=False)
    ref = rate_direct(s, ig.delays_fs[idx] if compensate else ig.group_delays_fs[idx], ig.phase_delays_fs[idx],
                      compensate=compensate)
    assert np.max(np.abs(ig.rate[idx] - ref)) <= 1e-9 * ig.rate.max()


def test_nufft_integral_matches_direct(rng):
    w = np.linspace(-0.2, 0.2, 1001)
    k = rng.normal(size=1001) + 1j * rng.normal(size=1001)
    tau = np.linspace(-5000, 3000, 777)
    a, b = interference_integral(w, k, tau), interference_integral_direct(w, k, tau)
    assert np.max(np.abs(a - b)) < 1e-11 * np.abs(b).max()


def test_gaussian_envelope_width():
    s_omega = 0.02
    s = synthetic(lambda w: np.exp(-w ** 2 / (4 * s_omega ** 2)), span=0.3)
    ig = coincidence_rate(s, cfg_for(s, half=600.0))
    assert envelope_fwhm(ig) == pytest.approx(2 * np.sqrt(2 * np.log(2)) / s_omega, rel=5e-3)
    assert len(envelope_local_maxima(ig)) == 1


def test_envelope_truncation_flag():
    s = synthetic(gauss(0.005))
    ig = coincidence_rate(s, cfg_for(s, half=100.0))
    assert ig.envelope_truncated


def test_fringe_period_1550():
    s = synthetic(gauss(0.05))
    assert fringe_period(coincidence_rate(s, cfg_for(s))) == pytest.approx(2 * np.pi / W0, rel=1e-6)


def test_fringe_period_recentred_1500():
    s = synthetic(gauss(0.05), omega0=wavelength_to_omega(1500.0))
    period = fringe_period(coincidence_rate(s, cfg_for(s)))
    assert period == pytest.approx(1500.0 / 299.792458, rel=1e-6)


def test_fringe_period_with_delay_line_ratio():
    s = synthetic(gauss(0.05))
    ig = coincidence_rate(s, cfg_for(s, ratio=0.9))
    assert fringe_period(ig) == pytest.approx(2 * np.pi / W0, rel=1e-6)
    assert fringe_period(ig, group_axis=True) == pytest.approx(2 * np.pi / W0 / 0.9, rel=1e-6)


def test_fringe_period_needs_visibility():
    s = synthetic(lambda w: np.exp(-((w - 0.1) / 0.03) ** 2) + 0.01 * np.exp(-((w + 0.1) / 0.03) ** 2))
    ig = coincidence_rate(s, cfg_for(s))
    assert ig.visibility_peak < 0.05
    with pytest.raises(AnalysisError, match="too low"):
        fringe_period(ig)


def test_undersampled_fringes():
    s = synthetic(gauss(0.05))
    ig = coincidence_rate(s, cfg_for(s, step=group_fringe_period(W0, 1.0) / 4))
    with pytest.raises(AnalysisError, match="undersampled"):
        visibility(ig)
    assert np.isnan(ig.visibility_peak)


def test_undefined_phase_is_an_error():
    s = synthetic(gauss(0.05))
    phase = s.phase.copy()
    phase[1000] = np.nan
    with pytest.raises(AnalysisError, match="undefined phase"):
        coincidence_rate(dataclasses.replace(s, phase=phase), cfg_for(s))


def test_phase_ruler_zero_injection():
    s = synthetic(gauss(0.05), lambda w: 40 * w + 2e3 * w ** 3)
    assert phase_ruler_check(s, 0.0, 0.0, cfg_for(s)) == 0.0


@pytest.mark.parametrize("c0,c2", [(1.0, 0.0), (0.0, 100.0), (-2.5, -3000.0)])
def test_phase_ruler_even_injection(c0, c2):
    s = synthetic(gauss(0.05), lambda w: 40 * w + 2e3 * w ** 3)
    cfg = cfg_for(s)
    peak = coincidence_rate(s, cfg).rate.max()
    assert phase_ruler_check(s, c0, c2, cfg) < 1e-9 * peak


def test_cubic_injection_reduces_visibility():
    base = synthetic(gauss(0.05))
    cubic = synthetic(gauss(0.05), lambda w: 2e4 * w ** 3)
    v0 = coincidence_rate(base, cfg_for(base)).visibility_peak
    v1 = coincidence_rate(cubic, cfg_for(cubic)).visibility_peak
    assert v0 == pytest.approx(1.0, abs=1e-9)
    assert v1 < v0 - 0.05


@given(st.floats(min_value=1e-3, max_value=1e3))
@settings(max_examples=10, deadline=None)
def test_loss_scaling(scale):
    base = synthetic(lambda w: np.exp(-((w - 0.01) / 0.05) ** 2), lambda w: 3e3 * w ** 3)
    lossy = dataclasses.replace(base, amplitude=base.amplitude * scale)
    cfg = cfg_for(base, ratio=0.9, compensate=True)
    a, b = coincidence_rate(base, cfg), coincidence_rate(lossy, cfg)
    np.testing.assert_allclose(b.rate, scale ** 2 * a.rate, rtol=1e-12, atol=1e-12 * scale ** 2 * a.rate.max())
    for name in ("visibility_peak", "envelope_fwhm_fs", "fringe_period_fs"):
        assert getattr(b, name) == pytest.approx(getattr(a, name), rel=1e-12)


def test_visibility_one_iff_symmetric_and_flat():
    sym_flat = synthetic(gauss(0.05))
    asym = synthetic(gauss(0.05, centre=0.01))
    sym_odd = synthetic(gauss(0.05), lambda w: 4e3 * w ** 3)
    v = [coincidence_rate(s, cfg_for(s, compensate=True)).visibility_peak for s in (sym_flat, asym, sym_odd)]
    assert v[0] == pytest.approx(1.0, abs=1e-9)
    assert v[1] < 1 - 1e-3 and v[2] < 1 - 1e-3


def test_default_config_axis(disp, period, ratio, grid4k):
    s = analyze(generate(Uniform(period, L)), disp, grid4k)
    cfg = default_config(s, ratio)
    assert cfg.step_fs == pytest.approx(group_fringe_period(W0, ratio) / 16)
    assert cfg.compensate_source_group_delay
    assert cfg.stop_fs == -cfg.start_fs


def test_uniform_envelope_position_and_shape(disp, period, ratio):
    s = analyze(generate(Uniform(period, L)), disp, grid_for_wavelength_span(16385, 175.0))
    dgd = L * group_properties(disp).dgd_per_length
    ig = coincidence_rate(s, default_config(s, ratio, compensate=False))
    # the envelope sits at the source DGD; with this sign convention it appears at negative delay
    assert abs(ig.peak_delay_fs) == pytest.approx(dgd, rel=5e-3)
    assert ig.peak_delay_fs < 0
    # triangle of base 2 DGD: half-maximum width equals one DGD
    assert ig.envelope_fwhm_fs == pytest.approx(dgd, rel=0.02)
    tri = np.clip(1 - np.abs(ig.delays_fs - ig.peak_delay_fs) / dgd, 0, None)
    assert np.corrcoef(ig.envelope / ig.envelope.max(), tri)[0, 1] >= 0.99
    assert ig.fringe_period_fs == pytest.approx(2 * np.pi / W0, rel=5e-3)


def test_compensation_recentres(disp, period, ratio, grid4k):
    s = analyze(generate(LinearChirp(period, L, 18e-4)), disp, grid4k)
    ig = coincidence_rate(s, default_config(s, ratio))
    assert abs(ig.peak_delay_fs) < 50.0
    assert ig.compensation_delay_fs == pytest.approx(2 * s.group_slope)
    np.testing.assert_allclose(ig.group_delays_fs - ig.delays_fs, 2 * s.group_slope)
