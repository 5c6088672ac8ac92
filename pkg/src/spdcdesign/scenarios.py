"""Named scenarios and the published figures of merit they are compared against."""
from __future__ import annotations

import json
from dataclasses import dataclass
from importlib import resources

from .poling import ApodizedChirp, LinearChirp, ProfileSpec, Uniform, profile_from_dict

LENGTH_UM = 16500.0

# Published values, printed next to computed metrics and never fed back into a calculation.
REFERENCE_VALUES = {
    "fig3_uniform": {"fwhm_nm": 1.65},
    "fig4_linear_a": {"fwhm_nm": 27.0},
    "fig4_linear_b": {"fwhm_nm": 88.0},
    "fig4_linear_c": {"fwhm_nm": 136.0},
    "fig5_apodized_a": {"fwhm_nm": 28.0},
    "fig5_apodized_b": {"fwhm_nm": 84.0},
    "fig5_apodized_c": {"fwhm_nm": 133.0},
    "fig7_optimized": {"fwhm_nm": 135.0, "visibility": 0.903, "envelope_fwhm_fs": 54.0},
}

OPTIMIZED_PROFILE_FILE = "optimized_profile.json"


@dataclass(frozen=True)
class Scenario:
    name: str
    description: str
    kind: str
    params: tuple = ()

    def profile(self, base_period: float) -> ProfileSpec:
        if self.kind == "uniform":
            return Uniform(base_period, LENGTH_UM)
        if self.kind == "linear":
            return LinearChirp(base_period, LENGTH_UM, *self.params)
        if self.kind == "apodized":
            return ApodizedChirp(base_period, LENGTH_UM, *self.params)
        return optimized_profile(base_period)

    @property
    def reference(self) -> dict:
        return REFERENCE_VALUES[self.name]


SCENARIOS = {
    s.name: s
    for s in (
        Scenario("fig3_uniform", "uniform poling", "uniform"),
        Scenario("fig4_linear_a", "linear chirp, 6e-4 /mm", "linear", (6e-4,)),
        Scenario("fig4_linear_b", "linear chirp, 18e-4 /mm", "linear", (18e-4,)),
        Scenario("fig4_linear_c", "linear chirp, 30e-4 /mm", "linear", (30e-4,)),
        Scenario("fig5_apodized_a", "apodized chirp, alpha 218.9, beta -1.99", "apodized", (218.9, -1.99)),
        Scenario("fig5_apodized_b", "apodized chirp, alpha 66.5, beta -1.99", "apodized", (66.5, -1.99)),
        Scenario("fig5_apodized_c", "apodized chirp, alpha 38.0, beta -1.99", "apodized", (38.0, -1.99)),
        Scenario("fig7_optimized", "GA-optimized asymmetric polynomial, order 11", "optimized"),
    )
}


def get_scenario(name: str) -> Scenario:
    try:
        return SCENARIOS[name]
    except KeyError:
        raise KeyError(f"unknown scenario {name!r}; choose from {', '.join(SCENARIOS)}") from None


def optimized_record() -> dict:
    """Best-of-seeds search result shipped with the package (written by scripts/run_optimization.py)."""
    path = resources.files("spdcdesign").joinpath("data", OPTIMIZED_PROFILE_FILE)
    if not path.is_file():
        raise FileNotFoundError(f"{OPTIMIZED_PROFILE_FILE} missing; run scripts/run_optimization.py first")
    return json.loads(path.read_text(encoding="utf-8"))


def optimized_profile(base_period: float | None = None) -> ProfileSpec:
    rec = optimized_record()
    profile = dict(rec["best_profile"])
    if base_period is not None and abs(base_period - profile["base_period_um"]) > 1e-9 * base_period:
        raise ValueError(f"optimized profile was searched at period {profile['base_period_um']} um, "
                         f"not {base_period} um")
    return profile_from_dict(profile)
