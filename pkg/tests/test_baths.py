import itertools
import math
import warnings

import numpy as np
import pytest
from scipy import integrate

from encaqc.baths import (
    ClassicalExponential,
    OhmicLorentzDrude,
    TruncationWarning,
    check_truncation,
    correlation,
    exponential_modulation,
    ohmic_rate_constants,
    rate_closed_form,
    rate_ohmic_closed_form,
    rate_quadrature,
    spectral_density,
    steady_rate,
)
from encaqc.errors import QuadratureError, SingularityError


def _rate_oracle(corr, mu, t, sign):
    """``2 Re int_0^t C(tau) exp(+-i mu tau)`` by direct real quadrature."""
    s = 1.0 if sign == "+" else -1.0

    def re(tau):
        return (corr(tau) * np.exp(1j * s * mu * tau)).real

    return 2.0 * integrate.quad(re, 0.0, t, limit=500, epsabs=1e-14, epsrel=1e-13)[0]


def _drude(bath):
    """Drude correlation in the textbook cot form, written out independently."""
    g, b, lam = bath.gamma, bath.beta, bath.E_R
    nu = 2 * np.pi * np.arange(1, bath.K + 1) / b

    def corr(tau):
        lead = lam * g * (1.0 / np.tan(b * g / 2) - 1j) * np.exp(-g * tau)
        return lead + np.sum(4 * lam * g / b * nu / (nu ** 2 - g ** 2) * np.exp(-nu * tau))

    return corr


GRID = list(itertools.product([0.5, 1.0, 2.0], [0.0, 0.7, 3.0, 12.0, 40.0], [0.05, 0.9, 4.0, 15.0]))


def test_classical_closed_form_grid():
    assert len(GRID) * 2 >= 100
    for gamma, mu, t in GRID:
        bath = ClassicalExponential(0.3, gamma)
        for sign in "+-":
            closed = rate_closed_form(bath, mu, t, sign)
            assert abs(closed - _rate_oracle(lambda x: 0.3 * np.exp(-gamma * x), mu, t, sign)) < 1e-9
            assert abs(closed - rate_quadrature(bath, exponential_modulation(mu), t, sign)) < 1e-9


def test_ohmic_closed_form_grid():
    for gamma, mu, t in GRID:
        bath = OhmicLorentzDrude(0.2, gamma, 1.3, K=20)
        corr = _drude(bath)
        for sign in "+-":
            closed = rate_ohmic_closed_form(bath, mu, t, sign)
            assert abs(closed - _rate_oracle(corr, mu, t, sign)) < 1e-9
            assert abs(closed - rate_quadrature(bath, exponential_modulation(mu), t, sign)) < 1e-9


@pytest.mark.parametrize("beta", [0.5, 2.0, 7.0])
@pytest.mark.parametrize("t", [0.5, 1.0, 2.0])
def test_ohmic_correlation_matches_spectral_integral(beta, t):
    bath = OhmicLorentzDrude(0.3, 1.0, beta, K=4000)

    def sym(w):
        if w < 1e-8:
            return 4.0 * bath.E_R / (bath.beta * bath.gamma) / np.pi
        return spectral_density(bath, w) / np.tanh(beta * w / 2) / np.pi

    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        re = integrate.quad(sym, 0, np.inf, weight="cos", wvar=t, limlst=200)[0]
        im = -integrate.quad(lambda w: spectral_density(bath, w) / np.pi, 0, np.inf,
                             weight="sin", wvar=t, limlst=200)[0]
    assert abs(correlation(bath, t) - (re + 1j * im)) < 1e-9


def test_leading_amplitude_cot_form():
    bath = OhmicLorentzDrude(0.4, 1.7, 0.9)
    expect = bath.E_R * bath.gamma * (1 / math.tan(bath.beta * bath.gamma / 2) - 1j)
    assert bath.leading_amplitude == pytest.approx(expect, rel=1e-13)


def test_ohmic_constants_regression():
    bath = OhmicLorentzDrude(0.5, 1.0, 2.0, K=3)
    plus = ohmic_rate_constants(bath, 1.5, "+")
    minus = ohmic_rate_constants(bath, 1.5, "-")
    assert plus["a0"] == pytest.approx(1.1883951057781212, rel=1e-14)
    assert plus["b0"] == pytest.approx(1.8025087830799844, rel=1e-14)
    assert minus["b0"] == pytest.approx(-0.7219041713437049, rel=1e-14)
    np.testing.assert_allclose(plus["a"], [-0.7083952139294838, -0.32658231280633826, -0.2146227947447678],
                               rtol=1e-14)
    np.testing.assert_allclose(minus["b"], 2 * np.pi * np.arange(1, 4) / 2.0, rtol=1e-15)


@pytest.mark.parametrize("sign", "+-")
def test_matsubara_constants_from_two_point_fit(sign):
    """Fit a_k and b_k from quadrature of one Matsubara term at two times."""
    bath = OhmicLorentzDrude(0.5, 1.0, 2.0, K=3)
    mu = 1.5
    amps, nus = bath.matsubara_amplitudes, bath.matsubara
    frozen = ohmic_rate_constants(bath, mu, sign)
    for k in range(bath.K):
        term = lambda tau, k=k: amps[k] * np.exp(-nus[k] * tau)
        rows, rhs = [], []
        for t in (0.4, 1.3):
            g = (-nus[k] * np.exp(-nus[k] * t) * np.cos(mu * t) + mu * np.exp(-nus[k] * t) * np.sin(mu * t))
            rows.append([1.0, g])
            rhs.append(-_rate_oracle(term, mu, t, sign) * (mu ** 2 + nus[k] ** 2))
        ab, a = np.linalg.solve(np.array(rows), np.array(rhs))
        assert a == pytest.approx(frozen["a"][k], rel=1e-9)
        assert ab / a == pytest.approx(frozen["b"][k], rel=1e-9)


def test_mu_zero_is_unmodulated_relaxation():
    bath = OhmicLorentzDrude(0.3, 1.0, 1.1, K=10)
    corr = _drude(bath)
    for t in (0.2, 1.0, 5.0):
        ref = 2.0 * integrate.quad(lambda x: corr(x).real, 0, t, epsabs=1e-14)[0]
        assert rate_ohmic_closed_form(bath, 0.0, t, "-") == pytest.approx(ref, abs=1e-10)


def test_single_pole_limit():
    bath = OhmicLorentzDrude(0.3, 1.0, 40.3, K=0)
    A, g = bath.leading_amplitude, bath.gamma
    for mu in (0.0, 2.0, 9.0):
        for t in (0.5, 3.0):
            for s, sign in ((1, "+"), (-1, "-")):
                z = -g + 1j * s * mu
                ref = 2.0 * (A * (np.exp(z * t) - 1.0) / z).real
                assert rate_ohmic_closed_form(bath, mu, t, sign) == pytest.approx(ref, abs=1e-12)


@pytest.mark.parametrize("sign", "+-")
def test_large_mu_slope_high_temperature(sign):
    bath = OhmicLorentzDrude(0.5, 1.0, 1e-3, K=50)
    mus = np.geomspace(10.0, 100.0, 9)
    rates = [rate_ohmic_closed_form(bath, m, 30.0, sign) for m in mus]
    slope = np.polyfit(np.log(mus), np.log(np.abs(rates)), 1)[0]
    assert abs(slope + 2.0) < 0.05


def test_steady_rate_monotone():
    bath = ClassicalExponential(1.0, 1.0)
    grid = np.array([0, 1, 2, 5, 10, 50]) * bath.gamma
    r = steady_rate(bath, grid)
    assert np.all(np.diff(r) < 0)
    assert rate_closed_form(bath, 5.0, 200.0) == pytest.approx(float(steady_rate(bath, 5.0)), rel=1e-12)


def test_correlation_positivity():
    t = np.linspace(0, 20, 101)
    assert np.all(correlation(ClassicalExponential(0.2, 1.3), t) > 0)
    for E_R, gamma, beta in itertools.product([0.01, 0.5, 2.0], [0.5, 1.0, 3.0], [0.1, 1.0, 5.0, 20.0]):
        try:
            assert correlation(OhmicLorentzDrude(E_R, gamma, beta), 0.0).real > 0
        except SingularityError:
            pass


def test_matsubara_resonance():
    with pytest.raises(SingularityError) as info:
        correlation(OhmicLorentzDrude(0.1, 1.0, 4 * math.pi), 1.0)
    assert info.value.kappa == 2


def test_truncation_warning():
    with pytest.warns(TruncationWarning):
        check_truncation(OhmicLorentzDrude(0.1, 1.0, 50.0, K=2), 0.01)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        check_truncation(OhmicLorentzDrude(0.1, 1.0, 1.0, K=50), 1.0)
    bath = OhmicLorentzDrude(0.1, 1.0, 1.0)
    assert correlation(bath, 1.0) == pytest.approx(correlation(OhmicLorentzDrude(0.1, 1.0, 1.0, K=60), 1.0),
                                                   abs=1e-15)


def test_quadrature_error_reported():
    bath = ClassicalExponential(1.0, 1.0)
    with pytest.raises(QuadratureError) as info:
        rate_quadrature(bath, exponential_modulation(300.0), 50.0, limit=3, target=1e-16)
    assert info.value.error > 1e-16 and info.value.estimate is not None


def test_invalid_parameters():
    with pytest.raises(ValueError):
        ClassicalExponential(1.0, 0.0)
    with pytest.raises(ValueError):
        OhmicLorentzDrude(0.1, 1.0, -1.0)
    with pytest.raises(ValueError):
        rate_closed_form(ClassicalExponential(1.0, 1.0), 1.0, 1.0, sign="*")
