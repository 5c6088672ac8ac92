import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from spdcdesign.core import C_UM_PER_FS, wavelength_to_omega
from spdcdesign.dispersion import (CalibrationError, DispersionModel, RangeError, bdl_delays, bdl_phase_group_ratio,
                                   beta, build_dispersion, bulk_mismatch, calibrate_period, constant_index_model,
                                   dbeta_domega, delta_beta, fit_offset_for_period, group_properties, load_materials,
                                   sellmeier_model)

import oracles

W0 = wavelength_to_omega(1550.0)

# Frozen from tests/oracles.py (40-digit mpmath, exact sympy derivatives).
GOLDEN_BETA_E_1550 = 8.666256125040123  # rad/um
GOLDEN_BETA_O_1550 = 8.963625724722645
GOLDEN_BETA_O_775 = 18.311458780249667
GOLDEN_PERIOD = 9.218600316608515  # um
GOLDEN_INV_U_H = 7.551255993011314  # fs/um
GOLDEN_INV_U_V = 7.279790105331748
GOLDEN_DGD_16P5MM = 4479.187146712831  # fs
GOLDEN_QUARTZ_TPH = 0.02826739566357919  # fs per um of plate
GOLDEN_QUARTZ_TGR = 0.031247262728721


def stub(n_h=2.2, n_v=2.3, n_p=2.25, bdl=(1.5, 1.51)):
    return DispersionModel(constant_index_model(n_h, "H"), constant_index_model(n_v, "V"),
                           constant_index_model(n_p, "P"), constant_index_model(bdl[0], "bH"),
                           constant_index_model(bdl[1], "bV"))


def test_beta_constant_index():
    m = constant_index_model(2.2)
    assert beta(m, W0) == pytest.approx(2.2 * 2 * np.pi / 1.55, rel=1e-14)


@given(st.floats(min_value=-0.05, max_value=0.05))
def test_beta_offset_is_linear(dn):
    m = sellmeier_model("LN_e_jundt")
    diff = beta(m.with_offset(dn), W0) - beta(m, W0)
    assert diff == pytest.approx(dn * W0 / C_UM_PER_FS, rel=1e-9, abs=1e-14)


def test_beta_golden_values(disp):
    assert beta(disp.idler_V, W0) == pytest.approx(GOLDEN_BETA_E_1550, rel=1e-13)
    assert beta(disp.signal_H, W0) == pytest.approx(GOLDEN_BETA_O_1550, rel=1e-13)
    assert beta(disp.pump, 2 * W0) == pytest.approx(GOLDEN_BETA_O_775, rel=1e-13)


def test_golden_values_match_live_oracle():
    w0 = 2 * mp.pi * oracles.C / mp.mpf("1.55")
    assert float(oracles.beta_mp(oracles.jundt_n2, w0)) == pytest.approx(GOLDEN_BETA_E_1550, rel=1e-15)
    assert float(oracles.beta_mp(oracles.edwards_n2, 2 * w0)) == pytest.approx(GOLDEN_BETA_O_775, rel=1e-15)


def test_out_of_window_names_model():
    m = sellmeier_model("quartz_o_ghosh")
    with pytest.raises(RangeError, match="quartz_o_ghosh"):
        beta(m, wavelength_to_omega(3000.0))


@pytest.mark.parametrize("name", ["LN_e_jundt", "LN_e_edwards", "LN_o_edwards", "quartz_o_ghosh", "quartz_e_ghosh"])
def test_models_physical_over_window(name):
    m = sellmeier_model(name)
    lam = np.linspace(700.0, 1700.0, 401)
    assert m.window_nm[0] <= 700.0 and m.window_nm[1] >= 1700.0
    n = m.index(lam * 1e-3)
    assert np.all(np.isfinite(n)) and np.all(n > 1)
    b = beta(m, wavelength_to_omega(lam[::-1]))
    assert np.all(np.diff(b) > 0)  # beta increasing in omega


@pytest.mark.parametrize("name,func", [("LN_e_jundt", oracles.jundt_n2), ("LN_o_edwards", oracles.edwards_n2)])
def test_group_index_matches_symbolic_derivative(name, func):
    m = sellmeier_model(name)
    for lam in (1400.0, 1550.0, 1700.0):
        w = wavelength_to_omega(lam)
        exact = float(oracles.inverse_group_velocity_sympy(func, w))
        assert dbeta_domega(m, w) == pytest.approx(exact, rel=1e-8)


def test_delta_beta_zero_at_calibration(disp, period):
    assert abs(delta_beta(disp, 0.0, period)) < 1e-9
    assert period == pytest.approx(GOLDEN_PERIOD, rel=1e-12)


def test_delta_beta_infinite_period_is_bulk(disp):
    W = np.linspace(-0.1, 0.1, 7)
    np.testing.assert_array_equal(delta_beta(disp, W, np.inf), bulk_mismatch(disp, W))
    np.testing.assert_allclose(delta_beta(disp, W, 1e12), bulk_mismatch(disp, W), rtol=0, atol=1e-11)


@given(st.floats(min_value=-0.15, max_value=0.15))
@settings(max_examples=30)
def test_delta_beta_mirror_identity(W):
    d = build_dispersion()
    lhs = delta_beta(d, W, 9.3) - delta_beta(d, -W, 9.3)
    bh = beta(d.signal_H, d.omega0 + W) - beta(d.signal_H, d.omega0 - W)
    bv = beta(d.idler_V, d.omega0 + W) - beta(d.idler_V, d.omega0 - W)
    assert lhs == pytest.approx(bh - bv, rel=1e-10, abs=1e-12)


def test_calibrate_stub_to_known_period():
    d = stub()
    target = -2 * np.pi / 9.3
    # choose the pump index so the bulk mismatch equals -2 pi / 9.3
    n_p = (beta(d.signal_H, d.omega0) + beta(d.idler_V, d.omega0) - target) * C_UM_PER_FS / d.omega_p
    d = stub(n_p=n_p)
    assert bulk_mismatch(d, 0.0) == pytest.approx(target, rel=1e-12)
    assert calibrate_period(d) == pytest.approx(9.3, rel=1e-9)


def test_calibration_without_sign_change():
    with pytest.raises(CalibrationError):
        calibrate_period(stub(n_p=1.5))


def test_offset_fit_reaches_target_period(disp):
    fitted = fit_offset_for_period(disp, 9.3)
    assert abs(delta_beta(fitted, 0.0, 9.3)) < 1e-9
    assert calibrate_period(fitted) == pytest.approx(9.3, rel=1e-9)
    assert fitted.idler_V.effective_index_offset != 0.0
    assert fitted.signal_H.effective_index_offset == 0.0


def test_group_velocity_stub():
    d = stub()
    gp = group_properties(d)
    assert gp.u_H == pytest.approx(C_UM_PER_FS / 2.2, rel=1e-10)
    assert gp.u_V == pytest.approx(C_UM_PER_FS / 2.3, rel=1e-10)
    assert gp.dgd_per_length == pytest.approx((2.2 - 2.3) / C_UM_PER_FS, rel=1e-8)


def test_dgd_golden(disp):
    gp = group_properties(disp)
    assert gp.u_H > 0 and gp.u_V > 0
    assert 1 / gp.u_H == pytest.approx(GOLDEN_INV_U_H, rel=1e-9)
    assert 1 / gp.u_V == pytest.approx(GOLDEN_INV_U_V, rel=1e-9)
    assert 16500 * gp.dgd_per_length == pytest.approx(GOLDEN_DGD_16P5MM, rel=1e-8)


def test_bdl_delays(disp):
    assert bdl_delays(disp, 0.0) == (0.0, 0.0)
    one, two = bdl_delays(disp, 1000.0), bdl_delays(disp, 2000.0)
    assert two == (2 * one[0], 2 * one[1])
    tph, tgr = bdl_delays(disp, 1.0)
    assert tph == pytest.approx(GOLDEN_QUARTZ_TPH, rel=1e-12)
    assert tgr == pytest.approx(GOLDEN_QUARTZ_TGR, rel=1e-8)
    assert bdl_phase_group_ratio(disp) == pytest.approx(GOLDEN_QUARTZ_TPH / GOLDEN_QUARTZ_TGR, rel=1e-8)
    with pytest.raises(ValueError):
        bdl_delays(disp, -1.0)


def test_pump_window_checked():
    bad = constant_index_model(2.2, window_nm=(1000.0, 2000.0))
    with pytest.raises(RangeError):
        DispersionModel(bad, bad, bad, bad, bad)


def test_polarization_swap_changes_period():
    swapped = build_dispersion(extraordinary="H")
    assert swapped.signal_H.name == "LN_e_jundt" and swapped.idler_V.name == "LN_o_edwards"
    with pytest.raises(ValueError):
        build_dispersion(extraordinary="X")


def test_materials_file_has_citations():
    mats = load_materials()
    assert mats["schema"].startswith("spdcdesign-materials/")
    assert all(m["citation"] for m in mats["models"].values())


def test_materials_file_missing_schema(tmp_path):
    p = tmp_path / "m.toml"
    p.write_text("[models]\n")
    with pytest.raises(ValueError, match="schema"):
        load_materials(p)


def test_temperature_enters_index():
    cold = sellmeier_model("LN_e_jundt", temperature=25.0)
    hot = sellmeier_model("LN_e_jundt", temperature=100.0)
    assert hot.index(1.55) > cold.index(1.55)
