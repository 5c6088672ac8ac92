import numpy as np
import pytest
from hypothesis import given, strategies as st

from spdcdesign.core import (C_UM_PER_FS, CONSTANTS, DomainError, delay_to_path, detuning_per_nm,
                             grid_for_wavelength_span, make_symmetric_grid, mirror_index, omega_to_wavelength,
                             path_to_delay, wavelength_to_omega)


def test_omega_at_1550():
    assert wavelength_to_omega(1550.0) == pytest.approx(2 * np.pi * 0.299792458 / 1.55, rel=1e-15)
    assert wavelength_to_omega(1550.0) == pytest.approx(1.21529, abs=5e-5)  # quoted value is rounded; exact 1.2152591


def test_half_wavelength_doubles_omega():
    assert wavelength_to_omega(775.0) == pytest.approx(2 * wavelength_to_omega(1550.0), rel=1e-15)


@pytest.mark.parametrize("bad", [0.0, -1.0, np.nan])
def test_nonpositive_wavelength(bad):
    with pytest.raises(DomainError):
        wavelength_to_omega(bad)
    with pytest.raises(DomainError):
        omega_to_wavelength(bad)


@given(st.floats(min_value=100.0, max_value=10000.0))
def test_wavelength_round_trip(lam):
    assert omega_to_wavelength(wavelength_to_omega(lam)) == pytest.approx(lam, rel=1e-12)


@given(st.floats(min_value=-1e5, max_value=1e5))
def test_path_round_trip(tau):
    assert path_to_delay(delay_to_path(tau)) == pytest.approx(tau, rel=1e-12, abs=1e-300)


def test_constants_are_frozen():
    with pytest.raises(AttributeError):
        CONSTANTS.c = 1.0
    assert C_UM_PER_FS == 0.299792458


def test_small_grids():
    np.testing.assert_array_equal(make_symmetric_grid(3, 1.0).samples, [-1.0, 0.0, 1.0])
    np.testing.assert_array_equal(make_symmetric_grid(5, 2.0).samples, [-2, -1, 0, 1, 2])


@pytest.mark.parametrize("count", [2, 4, 1, 0, 3.0])
def test_bad_grid_count(count):
    with pytest.raises(ValueError):
        make_symmetric_grid(count, 1.0)


@given(st.integers(min_value=1, max_value=5000), st.floats(min_value=1e-6, max_value=10.0))
def test_grid_mirror_symmetry(half, span):
    g = make_symmetric_grid(2 * half + 1, span)
    s = g.samples
    assert np.all(s[::-1] == -s)
    assert s[g.center] == 0.0
    assert np.all(np.diff(s) > 0)
    i = np.arange(g.count)
    assert np.all(s[[mirror_index(g, k) for k in i[:: max(1, half // 40)]]] + s[i[:: max(1, half // 40)]] == 0)


def test_mirror_index():
    g = make_symmetric_grid(11, 1.0)
    assert mirror_index(g, g.center) == g.center
    assert mirror_index(g, 0) == g.count - 1
    assert all(mirror_index(g, mirror_index(g, i)) == i for i in range(g.count))
    with pytest.raises(IndexError):
        mirror_index(g, 11)


def test_grid_samples_read_only():
    g = make_symmetric_grid(5, 1.0)
    with pytest.raises(ValueError):
        g.samples[0] = 3.0


def test_wavelength_grid_span():
    g = grid_for_wavelength_span(101, 10.0)
    assert g.half_span == pytest.approx(10.0 * detuning_per_nm(1550.0))
    # linearised conversion agrees with the exact one for small offsets
    exact = wavelength_to_omega(1549.0) - wavelength_to_omega(1550.0)
    assert exact == pytest.approx(detuning_per_nm(1550.0), rel=2e-3)


def test_refined_grid_contains_original():
    g = make_symmetric_grid(9, 1.0)
    r = g.refined()
    assert r.count == 17
    np.testing.assert_allclose(r.samples[::2], g.samples, rtol=0, atol=1e-15)


def test_trapezoid_weights_integrate_constant():
    g = make_symmetric_grid(101, 3.0)
    assert g.trapezoid_weights().sum() == pytest.approx(6.0, rel=1e-14)


def test_detuning_reconstructs_pair():
    w0 = wavelength_to_omega(1550.0)
    g = make_symmetric_grid(101, 0.1)
    ws, wi = w0 + g.samples, w0 - g.samples
    np.testing.assert_allclose(ws + wi, 2 * w0, rtol=1e-15)
