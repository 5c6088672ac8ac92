"""Propagation constants of the waveguide modes, the pump and the birefringent delay line."""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import numpy as np
try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib
from scipy import optimize

from .core import C_UM_PER_FS, SpdcError, omega_to_wavelength, wavelength_to_omega

FD_STEP = 1e-4  # rad/fs, five-point stencil


class RangeError(SpdcError, ValueError):
    """Frequency outside the validity window of a dispersion model."""


class CalibrationError(SpdcError):
    pass


def _jundt(lam, a, b, t):
    f = (t - 24.5) * (t + 570.82)
    l2 = lam * lam
    return (
        a[0] + b[0] * f
        + (a[1] + b[1] * f) / (l2 - (a[2] + b[2] * f) ** 2)
        + (a[3] + b[3] * f) / (l2 - a[4] ** 2)
        - a[5] * l2
    )


def _edwards_lawrence(lam, a, b, t):
    f = (t - 24.5) * (t + 570.5)
    l2 = lam * lam
    return a[0] + (a[1] + b[0] * f) / (l2 - (a[2] + b[1] * f) ** 2) + b[2] * f - a[3] * l2


def _sellmeier(lam, constant, terms):
    l2 = lam * lam
    n2 = constant
    for strength, pole in terms:
        n2 = n2 + strength * l2 / (l2 - pole)
    return n2


@dataclass(frozen=True)
class SellmeierModel:
    """Refractive index of one polarization axis of one material.

    ``params`` holds the coefficients required by ``form``:
    ``jundt`` / ``edwards_lawrence`` take ``a`` and ``b`` lists,
    ``sellmeier`` takes ``constant`` and ``terms`` (strength, pole in um^2),
    ``constant`` takes ``n``.
    """

    name: str
    form: str
    params: dict
    window_nm: tuple[float, float] = (700.0, 1700.0)
    temperature: float = 25.0
    effective_index_offset: float = 0.0
    citation: str = ""

    def bulk_index(self, wavelength_um):
        lam = np.asarray(wavelength_um, dtype=float)
        p = self.params
        if self.form == "jundt":
            n2 = _jundt(lam, p["a"], p["b"], self.temperature)
        elif self.form == "edwards_lawrence":
            n2 = _edwards_lawrence(lam, p["a"], p["b"], self.temperature)
        elif self.form == "sellmeier":
            n2 = _sellmeier(lam, p["constant"], p["terms"])
        elif self.form == "constant":
            return np.full_like(lam, float(p["n"]))
        else:
            raise ValueError(f"unknown dispersion form {self.form!r} in model {self.name}")
        return np.sqrt(n2)

    def index(self, wavelength_um):
        return self.bulk_index(wavelength_um) + self.effective_index_offset

    def check_window(self, omega) -> None:
        lam_nm = omega_to_wavelength(np.asarray(omega, dtype=float))
        lo, hi = self.window_nm
        bad = (lam_nm < lo) | (lam_nm > hi)
        if np.any(bad):
            worst = np.atleast_1d(lam_nm)[np.atleast_1d(bad)][0]
            raise RangeError(
                f"model {self.name!r}: wavelength {worst:.3f} nm outside validity window {lo}-{hi} nm"
            )

    def with_offset(self, offset: float) -> "SellmeierModel":
        return dataclasses.replace(self, effective_index_offset=float(offset))


def constant_index_model(n: float, name: str = "constant", window_nm=(100.0, 10000.0)) -> SellmeierModel:
    """Dispersionless stub, mostly for tests."""
    return SellmeierModel(name=name, form="constant", params={"n": float(n)}, window_nm=tuple(window_nm))


DEFAULT_MATERIALS = "default"


def load_materials(path: str | Path | None = None) -> dict:
    if path is None or str(path) == DEFAULT_MATERIALS:
        text = resources.files("spdcdesign").joinpath("data", "materials.toml").read_text(encoding="utf-8")
    else:
        text = Path(path).read_text(encoding="utf-8")
    data = tomllib.loads(text)
    if not str(data.get("schema", "")).startswith("spdcdesign-materials/"):
        raise ValueError(f"{path}: not a materials file (missing schema line)")
    return data


def sellmeier_model(name: str, materials: dict | None = None, temperature: float = 25.0,
                    offset: float = 0.0) -> SellmeierModel:
    materials = materials if materials is not None else load_materials()
    try:
        entry = materials["models"][name]
    except KeyError:
        raise KeyError(f"no dispersion model named {name!r}") from None
    form = entry["form"]
    if form in ("jundt", "edwards_lawrence"):
        params = {"a": tuple(entry["a"]), "b": tuple(entry["b"])}
    elif form == "sellmeier":
        params = {"constant": float(entry["constant"]), "terms": tuple(tuple(t) for t in entry["terms"])}
    elif form == "constant":
        params = {"n": float(entry["n"])}
    else:
        raise ValueError(f"model {name!r}: unknown form {form!r}")
    return SellmeierModel(
        name=name,
        form=form,
        params=params,
        window_nm=tuple(entry["window_nm"]),
        temperature=float(temperature),
        effective_index_offset=float(offset),
        citation=entry.get("citation", ""),
    )


def beta(model: SellmeierModel, omega):
    """Propagation constant n(omega) * omega / c in rad/um."""
    w = np.asarray(omega, dtype=float)
    model.check_window(w)
    lam_um = 2.0 * np.pi * C_UM_PER_FS / w
    out = model.index(lam_um) * w / C_UM_PER_FS
    return float(out) if out.ndim == 0 else out


def dbeta_domega(model: SellmeierModel, omega, h: float = FD_STEP):
    """Inverse group velocity (fs/um) by a five-point central difference."""
    w = np.asarray(omega, dtype=float)
    model.check_window(np.concatenate([np.atleast_1d(w - 2 * h), np.atleast_1d(w + 2 * h)]))
    out = (beta(model, w - 2 * h) - 8 * beta(model, w - h) + 8 * beta(model, w + h) - beta(model, w + 2 * h)) / (12 * h)
    return float(out) if np.ndim(out) == 0 else out


@dataclass(frozen=True)
class DispersionModel:
    """The five dispersion curves entering the source and the interferometer."""

    signal_H: SellmeierModel
    idler_V: SellmeierModel
    pump: SellmeierModel
    bdl_H: SellmeierModel
    bdl_V: SellmeierModel
    pump_wavelength_nm: float = 775.0

    def __post_init__(self):
        self.pump.check_window(self.omega_p)

    @property
    def omega_p(self) -> float:
        return wavelength_to_omega(self.pump_wavelength_nm)

    @property
    def omega0(self) -> float:
        return 0.5 * self.omega_p

    @property
    def center_wavelength_nm(self) -> float:
        return 2.0 * self.pump_wavelength_nm

    def with_offsets(self, offset_H: float | None = None, offset_V: float | None = None,
                     offset_pump: float | None = None) -> "DispersionModel":
        d = self
        if offset_H is not None:
            d = dataclasses.replace(d, signal_H=d.signal_H.with_offset(offset_H))
        if offset_V is not None:
            d = dataclasses.replace(d, idler_V=d.idler_V.with_offset(offset_V))
        if offset_pump is not None:
            d = dataclasses.replace(d, pump=d.pump.with_offset(offset_pump))
        return d


def build_dispersion(materials: dict | str | Path | None = None, temperature: float = 25.0,
                     extraordinary: str = "V", pump_polarization: str = "H",
                     offset_H: float = 0.0, offset_V: float = 0.0, offset_pump: float | None = None,
                     pump_wavelength_nm: float = 775.0) -> DispersionModel:
    """Assemble the waveguide + delay-line model from a materials file.

    ``extraordinary`` names the polarization ("V" or "H") guided on the
    extraordinary axis; the other one is ordinary. The pump shares the axis of
    ``pump_polarization`` and, unless ``offset_pump`` is given, its offset.
    """
    if not isinstance(materials, dict):
        materials = load_materials(materials)
    if extraordinary not in ("H", "V") or pump_polarization not in ("H", "V"):
        raise ValueError("polarizations must be 'H' or 'V'")
    defaults = materials["defaults"]
    wg = {
        extraordinary: defaults["waveguide_extraordinary"],
        ("H" if extraordinary == "V" else "V"): defaults["waveguide_ordinary"],
    }
    bdl = {
        extraordinary: defaults["bdl_extraordinary"],
        ("H" if extraordinary == "V" else "V"): defaults["bdl_ordinary"],
    }
    offsets = {"H": offset_H, "V": offset_V}
    if offset_pump is None:
        offset_pump = offsets[pump_polarization]
    return DispersionModel(
        signal_H=sellmeier_model(wg["H"], materials, temperature, offset_H),
        idler_V=sellmeier_model(wg["V"], materials, temperature, offset_V),
        pump=sellmeier_model(wg[pump_polarization], materials, temperature, offset_pump),
        bdl_H=sellmeier_model(bdl["H"], materials, temperature),
        bdl_V=sellmeier_model(bdl["V"], materials, temperature),
        pump_wavelength_nm=pump_wavelength_nm,
    )


def delta_beta(d: DispersionModel, Omega, period: float):
    """Phase mismatch beta_H(w0+W) + beta_V(w0-W) + 2 pi / period - beta_pump(wp), rad/um.

    ``period = inf`` gives the bare (grating-free) mismatch.
    """
    W = np.asarray(Omega, dtype=float)
    w0 = d.omega0
    grating = 0.0 if np.isinf(period) else 2.0 * np.pi / period
    out = beta(d.signal_H, w0 + W) + beta(d.idler_V, w0 - W) + grating - beta(d.pump, d.omega_p)
    return float(out) if np.ndim(out) == 0 else out


def bulk_mismatch(d: DispersionModel, Omega):
    return delta_beta(d, Omega, np.inf)


def calibrate_period(d: DispersionModel, bracket: tuple[float, float] = (0.5, 1.0e4)) -> float:
    """Poling period that phase-matches degenerate emission, by bisection."""
    lo, hi = bracket
    g_lo, g_hi = delta_beta(d, 0.0, lo), delta_beta(d, 0.0, hi)
    if np.sign(g_lo) == np.sign(g_hi):
        raise CalibrationError(
            f"no sign change of delta_beta between {lo} and {hi} um "
            f"(bulk mismatch {bulk_mismatch(d, 0.0):.6g} rad/um must be negative)"
        )
    period = optimize.bisect(lambda p: delta_beta(d, 0.0, p), lo, hi, xtol=1e-13, rtol=4 * np.finfo(float).eps,
                             maxiter=400)
    res = abs(delta_beta(d, 0.0, period))
    if res >= 1e-9:
        raise CalibrationError(f"bisection stalled with |delta_beta| = {res:.3g} rad/um")
    return period


def fit_offset_for_period(d: DispersionModel, target_period: float, polarization: str = "V",
                          bracket: tuple[float, float] = (-0.2, 0.2)) -> DispersionModel:
    """Return ``d`` with one effective-index offset adjusted so the calibrated period equals ``target_period``.

    The offset is applied to the signal (``"H"``) or idler (``"V"``) mode only.
    """
    grating = 2.0 * np.pi / target_period

    def residual(dn):
        trial = d.with_offsets(**{f"offset_{polarization}": dn})
        return bulk_mismatch(trial, 0.0) + grating

    dn = optimize.brentq(residual, *bracket, xtol=1e-15, rtol=4 * np.finfo(float).eps)
    return d.with_offsets(**{f"offset_{polarization}": dn})


@dataclass(frozen=True)
class GroupProperties:
    u_H: float  # um/fs
    u_V: float
    dgd_per_length: float  # fs/um, 1/u_H - 1/u_V


def group_properties(d: DispersionModel, at: float | None = None) -> GroupProperties:
    at = d.omega0 if at is None else at
    inv_h = dbeta_domega(d.signal_H, at)
    inv_v = dbeta_domega(d.idler_V, at)
    return GroupProperties(u_H=1.0 / inv_h, u_V=1.0 / inv_v, dgd_per_length=inv_h - inv_v)


def bdl_delays(d: DispersionModel, thickness_y: float) -> tuple[float, float]:
    """Polarization phase and group delay (fs) of a delay-line plate of thickness ``thickness_y`` um."""
    if thickness_y < 0:
        raise ValueError("delay-line thickness must be non-negative")
    w0 = d.omega0
    tau_ph = thickness_y / w0 * (beta(d.bdl_V, w0) - beta(d.bdl_H, w0))
    tau_gr = thickness_y * (dbeta_domega(d.bdl_V, w0) - dbeta_domega(d.bdl_H, w0))
    return tau_ph, tau_gr


def bdl_phase_group_ratio(d: DispersionModel) -> float:
    """tau_ph / tau_gr, independent of thickness."""
    tau_ph, tau_gr = bdl_delays(d, 1.0)
    return tau_ph / tau_gr
