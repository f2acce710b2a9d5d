import numpy as np
import pytest
from scipy import special

from entspec.observables import ObservableSeries
from entspec.scaling import (
    dedekind_eta, digamma, fermi_liquid_density, fit_growth_law, fit_scaling_law, jacobi_theta3,
    lifshitz_J, lifshitz_density, page_law_density, prefactor_extraction,
)

EULER_GAMMA = 0.5772156649015329


@pytest.mark.parametrize("z", [0.1, 0.5, 1.0, 2.5, 7.0, 10.5, 123.4])
def test_digamma_matches_scipy(z):
    assert digamma(z) == pytest.approx(special.digamma(z), abs=1e-12)


def test_digamma_reference_values():
    assert digamma(1.0) == pytest.approx(-EULER_GAMMA, abs=1e-12)
    assert digamma(2.0) == pytest.approx(1.0 - EULER_GAMMA, abs=1e-12)
    assert digamma(0.5) == pytest.approx(-1.9635100260214235, abs=1e-12)
    assert np.allclose(digamma(np.array([[1.0, 2.0]])), [[-EULER_GAMMA, 1.0 - EULER_GAMMA]])


def test_digamma_rejects_non_positive():
    with pytest.raises(ValueError):
        digamma(0.0)


def test_theta3_closed_form_and_modular_identity():
    assert jacobi_theta3(1.0) == pytest.approx(np.pi ** 0.25 / special.gamma(0.75), abs=1e-12)
    for x in (0.5, 2.0):
        assert jacobi_theta3(1.0 / x) == pytest.approx(np.sqrt(x) * jacobi_theta3(x), abs=1e-12)
    assert jacobi_theta3(50.0) == pytest.approx(1.0, abs=1e-15)
    with pytest.raises(ValueError):
        jacobi_theta3(-1.0)


def test_eta_closed_form_and_modular_identity():
    assert dedekind_eta(1.0) == pytest.approx(special.gamma(0.25) / (2 * np.pi ** 0.75), abs=1e-12)
    assert dedekind_eta(0.5) == pytest.approx(np.sqrt(2.0) * dedekind_eta(2.0), abs=1e-12)
    assert dedekind_eta(20.0) == pytest.approx(np.exp(-np.pi * 20.0 / 12.0), rel=1e-12)
    with pytest.raises(ValueError):
        dedekind_eta(0.0)


def test_page_law_boundaries_and_symmetry():
    size = 16
    assert page_law_density(0, size) == 0.0
    values = page_law_density(np.arange(size + 1), size)
    assert np.allclose(values, values[::-1])
    assert values[size // 2] == pytest.approx(page_law_density(size // 2, size))


def test_page_law_reference_value():
    # 15.5 H_31 - 15.25 H_15 - 0.25 H_7 - 8
    assert page_law_density(8, 16) == pytest.approx(3.171094096809634, abs=1e-9)


def test_page_law_is_concave_on_the_first_half():
    size = 16
    values = page_law_density(np.arange(size // 2 + 1), size)
    assert np.all(np.diff(values, 2) < 0)


def test_page_law_rejects_out_of_range():
    with pytest.raises(ValueError):
        page_law_density(17, 16)
    with pytest.raises(ValueError):
        page_law_density(2.5, 16)


def test_fermi_liquid_values():
    assert fermi_liquid_density(8, 16, s0=0.2) == pytest.approx(np.log(16) / 3 + 0.2)
    assert fermi_liquid_density(4, 16) == pytest.approx(np.log(8 * np.sqrt(2)) / 3)
    assert fermi_liquid_density(3, 16) == pytest.approx(fermi_liquid_density(13, 16))
    with pytest.raises(ValueError):
        fermi_liquid_density(0, 16)


def test_lifshitz_scaling_function_is_symmetric():
    u = np.array([0.1, 0.3, 0.45])
    assert np.allclose(lifshitz_J(u), lifshitz_J(1 - u))
    expected = np.log(jacobi_theta3(0.5) ** 2 / dedekind_eta(1.0) ** 2)
    assert lifshitz_J(0.5) == pytest.approx(expected, abs=1e-12)
    h = 1e-5
    assert (lifshitz_J(0.5 + h) - lifshitz_J(0.5 - h)) / (2 * h) == pytest.approx(0.0, abs=1e-6)
    with pytest.raises(ValueError):
        lifshitz_J(1.0)
    with pytest.raises(ValueError):
        lifshitz_J(0.5, lam=0.0)


def _series(x, mean, stderr):
    x = np.asarray(x, dtype=float)
    return ObservableSeries("l_A", x, mean, np.full(x.size, stderr), np.full(x.size, 100))


def test_fermi_liquid_fit_recovers_offset(rng):
    size = 32
    x = np.arange(1, size)
    y = fermi_liquid_density(x, size, s0=0.4) + rng.normal(0.0, 0.005, x.size)
    fit = fit_scaling_law(_series(x, y, 0.005), "fermi_liquid", size)
    assert fit.params["s0"] == pytest.approx(0.4, abs=0.01)
    assert fit.residual_rms < 0.01
    assert fit.as_row()["law"] == "fermi_liquid"


def test_fermi_liquid_beats_area_law_on_log_data():
    size = 32
    x = np.arange(1, size)
    series = _series(x, fermi_liquid_density(x, size, s0=0.1), 0.01)
    fermi = fit_scaling_law(series, "fermi_liquid", size)
    area = fit_scaling_law(series, "area", size)
    assert fermi.residual_rms < 1e-12
    assert area.residual_rms > fermi.residual_rms


def test_lifshitz_fit_recovers_parameters():
    size = 32
    x = np.arange(1, size)
    series = _series(x, lifshitz_density(x, size, a=-1.0, b=0.3, lam=1.0), 0.01)
    fit = fit_scaling_law(series, "lifshitz", size)
    assert fit.success
    assert fit.params["lambda"] == pytest.approx(1.0, abs=0.05)
    assert fit.params["a"] == pytest.approx(-1.0, abs=0.05)
    assert fit.params["b"] == pytest.approx(0.3, abs=0.01)


def test_area_fit_returns_the_weighted_mean():
    x = np.arange(1, 10)
    fit = fit_scaling_law(_series(x, np.full(x.size, 0.7), 0.01), "area", 10)
    assert fit.params["constant"] == pytest.approx(0.7)
    assert fit.residual_rms == pytest.approx(0.0, abs=1e-12)


def test_page_fit_reports_offset_and_deviation():
    size = 16
    x = np.arange(1, size)
    series = _series(x, page_law_density(x, size) - 0.1, 0.01)
    fit = fit_scaling_law(series, "page", size, offset_match=True)
    assert fit.params["offset"] == pytest.approx(0.1)
    assert fit.params["max_relative_deviation"] == pytest.approx(0.0, abs=1e-10)


def test_scaling_fit_input_checks():
    with pytest.raises(ValueError):
        fit_scaling_law(_series([1, 2, 3], [0.1, 0.2, 0.3], 0.01), "area", 4)
    with pytest.raises(ValueError):
        fit_scaling_law(_series(np.arange(1, 8), np.ones(7), 0.01), "volume", 8)


def test_growth_laws():
    t = np.linspace(0.0, 10.0, 21)
    linear = fit_growth_law(t, 0.5 * t + 0.1, "linear")
    assert linear.params["velocity"] == pytest.approx(0.5)
    assert linear.params["intercept"] == pytest.approx(0.1)

    # t = 0 is dropped for the logarithmic law
    logarithmic = fit_growth_law(t, np.log(np.maximum(t, 1e-300)) / 3 + 0.2, "logarithmic")
    assert logarithmic.params["prefactor"] == pytest.approx(1.0 / 3.0)
    assert logarithmic.residual_rms == pytest.approx(0.0, abs=1e-10)

    with pytest.raises(ValueError):
        fit_growth_law(t, t, "power")
    with pytest.raises(ValueError):
        fit_growth_law(np.array([0.0, 1.0, 2.0]), np.zeros(3), "logarithmic")


def test_prefactor_of_a_pure_log_law():
    sizes = [8, 12, 16, 20, 24]
    result = prefactor_extraction({L: L * np.log(L) / 3 + 0.2 * L for L in sizes})
    assert result.c_infinity == pytest.approx(1.0 / 3.0, abs=1e-6)
    assert np.allclose(result.c, 1.0 / 3.0)
    assert np.allclose(result.b, 0.2)
    assert list(result.sizes) == [12, 16, 20, 24]


def test_prefactor_of_an_area_law():
    result = prefactor_extraction({L: 0.7 * L for L in (8, 12, 16, 20)})
    assert result.c_infinity == pytest.approx(0.0, abs=1e-6)


def test_prefactor_needs_three_even_sizes():
    with pytest.raises(ValueError):
        prefactor_extraction({8: 1.0, 9: 1.2, 12: 1.5})
