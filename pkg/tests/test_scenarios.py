import pytest

from spdcdesign.poling import ApodizedChirp, AsymmetricPolynomial, LinearChirp, Uniform, check_constraints, generate
from spdcdesign.scenarios import REFERENCE_VALUES, SCENARIOS, get_scenario, optimized_profile, optimized_record


def test_registry_matches_reference_table():
    assert set(SCENARIOS) == set(REFERENCE_VALUES)
    assert list(SCENARIOS)[0] == "fig3_uniform" and len(SCENARIOS) == 8


@pytest.mark.parametrize("name,cls,params", [
    ("fig3_uniform", Uniform, {}),
    ("fig4_linear_a", LinearChirp, {"alpha": 6e-4}),
    ("fig4_linear_c", LinearChirp, {"alpha": 30e-4}),
    ("fig5_apodized_a", ApodizedChirp, {"alpha": 218.9, "beta": -1.99}),
    ("fig5_apodized_c", ApodizedChirp, {"alpha": 38.0, "beta": -1.99}),
])
def test_scenario_profiles(name, cls, params, period):
    spec = get_scenario(name).profile(period)
    assert isinstance(spec, cls) and spec.total_length == 16500.0 and spec.base_period == period
    for k, v in params.items():
        assert getattr(spec, k) == v


def test_unknown_scenario():
    with pytest.raises(KeyError, match="unknown scenario"):
        get_scenario("fig6")


def test_shipped_optimized_profile(period):
    rec = optimized_record()
    spec = optimized_profile(period)
    assert isinstance(spec, AsymmetricPolynomial) and spec.order == 11
    assert rec["best_profile"] == spec.to_dict()
    assert check_constraints(generate(spec)).passed
    with pytest.raises(ValueError):
        optimized_profile(period * 1.01)
