"""Run configuration: one TOML file per run, validated field by field."""
from __future__ import annotations

import copy
import dataclasses
import os
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib
import tomli_w

from .core import grid_for_wavelength_span
from .dispersion import DEFAULT_MATERIALS, build_dispersion, calibrate_period, fit_offset_for_period, load_materials
from .optimizer import GaConfig, config_errors
from .poling import PROFILE_KINDS, ProfileError, profile_from_dict

CONFIG_SCHEMA = "spdcdesign-run/1"
OUTPUT_ENV = "SPDCDESIGN_OUTPUT_DIR"
FORMATS = ("csv", "svg", "json")


class ConfigError(ValueError):
    def __init__(self, errors):
        self.errors = list(errors)
        super().__init__("; ".join(f"{k}: {v}" for k, v in self.errors))


@dataclass
class RunConfig:
    materials: str = DEFAULT_MATERIALS
    temperature: float = 25.0
    extraordinary: str = "V"
    pump_polarization: str = "H"
    offset_H: float = 0.0
    offset_V: float = 0.0
    fit_period_um: float | None = None  # fit offset_V so the calibrated period hits this value
    profile: dict = field(default_factory=lambda: {"kind": "uniform", "base_period_um": "calibrated",
                                                   "total_length_um": 16500.0})
    grid_count: int = 16385
    half_span_nm: float = 175.0
    compensate: bool = True
    delay_range_fs: list | None = None
    delay_step_fs: float | None = None
    ga: dict = field(default_factory=dict)
    output_dir: str = "out"
    formats: list = field(default_factory=lambda: list(FORMATS))
    source: str | None = field(default=None, compare=False)

    def to_dict(self) -> dict:
        out = {"schema": CONFIG_SCHEMA}
        for f in dataclasses.fields(self):
            value = getattr(self, f.name)
            if f.name != "source" and value is not None:
                out[f.name] = copy.deepcopy(value)
        return out

    def to_toml(self) -> str:
        return tomli_w.dumps(self.to_dict())

    # derived objects

    def dispersion(self):
        mats = self._materials_path()
        d = build_dispersion(mats, self.temperature, self.extraordinary, self.pump_polarization,
                             self.offset_H, self.offset_V)
        if self.fit_period_um is not None:
            d = fit_offset_for_period(d, self.fit_period_um, "V")
        return d

    def grid(self, center_nm: float = 1550.0):
        return grid_for_wavelength_span(self.grid_count, self.half_span_nm, center_nm)

    def profile_spec(self, period: float | None = None):
        if period is None and self.profile.get("base_period_um", "calibrated") == "calibrated":
            period = calibrate_period(self.dispersion())
        return profile_from_dict(self.profile, period)

    def ga_config(self) -> GaConfig:
        return GaConfig.from_dict(self.ga)

    def resolved_output_dir(self) -> Path:
        env = os.environ.get(OUTPUT_ENV)
        return Path(env) if env else Path(self.output_dir)

    def _materials_path(self):
        if self.materials == DEFAULT_MATERIALS or self.source is None:
            return self.materials
        p = Path(self.materials)
        return p if p.is_absolute() else Path(self.source).parent / p


def default_config_text() -> str:
    return resources.files("spdcdesign").joinpath("data", "default_config.toml").read_text(encoding="utf-8")


def parse_config(data: dict, source: str | None = None) -> RunConfig:
    """Build a RunConfig from a parsed TOML table; raises ConfigError listing every bad field."""
    errors = []
    data = dict(data)
    schema = data.pop("schema", CONFIG_SCHEMA)
    if schema != CONFIG_SCHEMA:
        errors.append(("schema", f"expected {CONFIG_SCHEMA!r}, got {schema!r}"))
    known = {f.name for f in dataclasses.fields(RunConfig)} - {"source"}
    for key in sorted(set(data) - known):
        errors.append((key, "unknown setting"))
    kwargs = {k: v for k, v in data.items() if k in known}
    if errors:
        raise ConfigError(errors)
    cfg = RunConfig(**kwargs, source=source)
    errors = config_field_errors(cfg)
    if errors:
        raise ConfigError(errors)
    return cfg


def load_config(path=None) -> RunConfig:
    if path is None:
        return parse_config(tomllib.loads(default_config_text()))
    path = Path(path)
    try:
        data = tomllib.loads(path.read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise ConfigError([("path", f"{path} does not exist")]) from None
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError([("path", f"{path} is not valid TOML: {exc}")]) from None
    return parse_config(data, str(path))


def _is_number(v) -> bool:
    return isinstance(v, (int, float)) and not isinstance(v, bool)


def config_field_errors(cfg: RunConfig) -> list[tuple[str, str]]:
    errs = []
    if cfg.materials != DEFAULT_MATERIALS:
        p = Path(cfg._materials_path())
        if not p.is_file():
            errs.append(("materials", f"file {p} does not exist"))
        else:
            try:
                load_materials(p)
            except Exception as exc:  # noqa: BLE001 - reported as a field error
                errs.append(("materials", str(exc)))
    if not _is_number(cfg.temperature) or not -50.0 <= cfg.temperature <= 300.0:
        errs.append(("temperature", "must be a number in [-50, 300] deg C"))
    for name in ("extraordinary", "pump_polarization"):
        if getattr(cfg, name) not in ("H", "V"):
            errs.append((name, "must be 'H' or 'V'"))
    for name in ("offset_H", "offset_V"):
        if not _is_number(getattr(cfg, name)) or abs(getattr(cfg, name)) > 0.2:
            errs.append((name, "must be a number with |offset| <= 0.2"))
    if cfg.fit_period_um is not None and (not _is_number(cfg.fit_period_um) or cfg.fit_period_um <= 0):
        errs.append(("fit_period_um", "must be a positive number"))
    errs.extend(profile_errors(cfg.profile))
    if not isinstance(cfg.grid_count, int) or cfg.grid_count < 3 or cfg.grid_count % 2 == 0:
        errs.append(("grid_count", "must be an odd integer >= 3"))
    if not _is_number(cfg.half_span_nm) or not 0 < cfg.half_span_nm < 700:
        errs.append(("half_span_nm", "must lie in (0, 700) nm"))
    if cfg.delay_range_fs is not None:
        r = cfg.delay_range_fs
        if not (isinstance(r, list) and len(r) == 2 and all(map(_is_number, r)) and r[0] < r[1]):
            errs.append(("delay_range_fs", "must be [start, stop] with start < stop"))
    if cfg.delay_step_fs is not None and (not _is_number(cfg.delay_step_fs) or cfg.delay_step_fs <= 0):
        errs.append(("delay_step_fs", "must be positive"))
    if not isinstance(cfg.ga, dict):
        errs.append(("ga", "must be a table"))
    else:
        errs.extend(ga_errors(cfg.ga))
    bad_formats = [f for f in cfg.formats if f not in FORMATS] if isinstance(cfg.formats, list) else ["?"]
    if bad_formats:
        errs.append(("formats", f"unsupported {bad_formats}; choose from {list(FORMATS)}"))
    out = cfg.resolved_output_dir()
    probe = out
    while not probe.exists() and probe != probe.parent:
        probe = probe.parent
    if not os.access(probe, os.W_OK):
        errs.append(("output_dir", f"{out} is not writable"))
    return errs


def ga_errors(table: dict) -> list[tuple[str, str]]:
    """Per-field errors for a [ga] table, without raising on the first one."""
    known = {f.name: f.default for f in dataclasses.fields(GaConfig)}
    unknown = sorted(set(table) - set(known))
    if unknown:
        return [(f"ga.{k}", "unknown GA setting") for k in unknown]
    probe = object.__new__(GaConfig)
    for name, default in known.items():
        object.__setattr__(probe, name, table.get(name, default))
    try:
        return [(f"ga.{k}", v) for k, v in config_errors(probe)]
    except TypeError as exc:
        return [("ga", f"wrong value type: {exc}")]


def profile_errors(profile) -> list[tuple[str, str]]:
    if not isinstance(profile, dict):
        return [("profile", "must be a table")]
    errs = []
    kind = profile.get("kind")
    if kind not in PROFILE_KINDS:
        return [("profile.kind", f"must be one of {sorted(PROFILE_KINDS)}")]
    length = profile.get("total_length_um")
    if not _is_number(length) or length <= 0:
        errs.append(("profile.total_length_um", "total_length must be a positive number"))
    period = profile.get("base_period_um", "calibrated")
    if period != "calibrated" and (not _is_number(period) or period <= 0):
        errs.append(("profile.base_period_um", "must be 'calibrated' or a positive number"))
    if kind == "asymmetric_polynomial":
        order = profile.get("order")
        coeffs = profile.get("coefficients")
        if not isinstance(order, int) or order < 0:
            errs.append(("profile.order", "must be a non-negative integer"))
        elif not isinstance(coeffs, list):
            errs.append(("profile.coefficients", "must be a list of [alpha, beta] pairs"))
        else:
            flat = bool(coeffs) and all(_is_number(c) for c in coeffs)
            pairs = len(coeffs) / 2 if flat else len(coeffs)
            if pairs != order + 1:
                got = f"{len(coeffs)} numbers" if flat else f"{len(coeffs)} pairs"
                errs.append(("profile.coefficients",
                             f"order {order} needs {order + 1} [alpha, beta] pairs ({2 * order + 2} numbers), got {got}"))
            elif not flat and not all(isinstance(c, list) and len(c) == 2 and all(map(_is_number, c)) for c in coeffs):
                errs.append(("profile.coefficients", "each entry must be an [alpha, beta] pair of numbers"))
    required = {"linear_chirp": ["alpha_per_mm"], "apodized_chirp": ["alpha", "beta"]}.get(kind, [])
    for key in required:
        if not _is_number(profile.get(key)):
            errs.append((f"profile.{key}", "must be a number"))
    if not errs:
        try:
            profile_from_dict(profile, base_period=9.3)
        except ProfileError as exc:
            errs.append(("profile", str(exc)))
    return errs


def validate_config(path) -> list[tuple[str, str]]:
    """Field errors for the config at ``path`` without running anything (empty list = valid)."""
    try:
        load_config(path)
    except ConfigError as exc:
        return exc.errors
    return []
