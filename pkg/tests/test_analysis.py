"""Fitters and chi-square model selection against synthetic oracles."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mwqed import (PhysicsError, fit_beat, fit_piecewise, select_array_size)

G1 = 0.064  # a representative rate scale in omega_r


def _two_rate(t, g_early, g_late, t_c):
    return np.exp(-g_early * t - (g_late - g_early) * np.maximum(t - t_c, 0))


def test_piecewise_synthetic_recovery():
    # Gamma_1 then 3 Gamma_1, switch at the equivalent of 50 us
    t_c = 50e-6 * 2 * math.pi * 3678.384
    t = np.linspace(0.0, 12.0, 241)
    fit = fit_piecewise(t, _two_rate(t, G1, 3 * G1, t_c))
    assert fit.gamma_early == pytest.approx(G1, rel=0.01)
    assert fit.gamma_late == pytest.approx(3 * G1, rel=0.01)
    assert fit.t_c == pytest.approx(t_c, rel=0.01)
    assert not fit.t_c_unconstrained
    assert fit.ratio == pytest.approx(3.0, rel=0.02)


def test_piecewise_single_exponential_flag():
    t = np.linspace(0.0, 10.0, 101)
    fit = fit_piecewise(t, np.exp(-G1 * t))
    assert fit.gamma_early == pytest.approx(fit.gamma_late, abs=1e-8)
    assert fit.t_c_unconstrained


def test_piecewise_window_and_errors():
    t = np.linspace(0.0, 10.0, 101)
    y = _two_rate(t, G1, 3 * G1, 4.0)
    fit = fit_piecewise(t, y, window=(0.0, 8.0))
    assert 0.0 <= fit.t_c <= 8.0
    with pytest.raises(PhysicsError):
        fit_piecewise(t[:8], y[:8])  # too few points
    with pytest.raises(PhysicsError):
        fit_piecewise(t, -y)  # nonpositive populations


def test_piecewise_residual_definition():
    t = np.linspace(0.0, 10.0, 101)
    y = _two_rate(t, G1, 3 * G1, 4.0) * np.exp(
        0.01 * np.sin(7.0 * t))  # deterministic "noise"
    fit = fit_piecewise(t, y)
    recomputed = float(np.sum((np.log(y) - np.log(fit.model(t))) ** 2))
    assert fit.residual == pytest.approx(recomputed, abs=1e-10)


def test_beat_dissipative_vs_bound_recovery():
    t = np.linspace(0.0, 40.0, 400)
    a0, w, g = 0.75, 0.9, 0.12
    y = np.abs(a0 * np.exp(-1j * w * t - g * t / 2) + (1 - a0)) ** 2
    free = fit_beat(t, y, form="dissipative_vs_bound")
    assert free.alpha0 == pytest.approx(a0, rel=1e-6)
    assert free.omega == pytest.approx(w, rel=1e-6)
    assert free.gamma == pytest.approx(g, rel=1e-6)
    fixed = fit_beat(t, y, form="dissipative_vs_bound", gamma=g)
    assert fixed.omega == pytest.approx(w, rel=1e-8)


def test_beat_decaying_amplitude_recovery():
    t = np.linspace(0.0, 40.0, 400)
    a0, ainf, w, g = 0.97, 0.92, 0.95, 0.1
    alpha_t = ainf + (a0 - ainf) * np.exp(-g * t)
    y = np.abs(alpha_t * np.exp(-1j * w * t) + (1 - a0)) ** 2
    fit = fit_beat(t, y, form="decaying_amplitude")
    assert fit.alpha0 == pytest.approx(a0, rel=1e-4)
    assert fit.alpha_inf == pytest.approx(ainf, rel=1e-4)
    assert fit.omega == pytest.approx(w, rel=1e-5)


def test_beat_constant_input_flag():
    t = np.linspace(0.0, 40.0, 100)
    fit = fit_beat(t, np.full_like(t, 0.5), form="decaying_amplitude")
    assert fit.omega_unidentifiable
    assert fit.alpha_inf == fit.alpha0


def test_beat_determinism():
    t = np.linspace(0.0, 30.0, 300)
    y = np.abs(0.6 * np.exp(-1j * 1.3 * t - 0.05 * t) + 0.4) ** 2
    f1 = fit_beat(t, y)
    f2 = fit_beat(t, y)
    assert (f1.alpha0, f1.omega, f1.gamma) == (f2.alpha0, f2.omega, f2.gamma)


def test_beat_residual_definition():
    t = np.linspace(0.0, 30.0, 300)
    y = np.abs(0.6 * np.exp(-1j * 1.3 * t - 0.05 * t) + 0.4) ** 2 \
        + 0.005 * np.sin(17.0 * t)
    fit = fit_beat(t, y)
    recomputed = float(np.sum((fit.model(t) - y) ** 2))
    assert fit.residual == pytest.approx(recomputed, abs=1e-10)


def test_select_array_size_synthetic():
    rng = np.random.default_rng(7)
    x = np.linspace(0.0, 3.0, 40)

    def predict(m):
        return np.exp(-m * x / 3.0)

    data = predict(3) + rng.normal(0.0, 0.03, len(x))
    report = select_array_size(data, 0.03, [1, 2, 3, 4, 5], predict)
    assert report.best_m == 3
    # chi0 is the 95% point of chi^2 with dof = number of data points
    from scipy.stats import chi2
    assert report.chi0 == pytest.approx(chi2.ppf(0.95, len(x)))
    # reported chi^2 equals the definition recomputed independently
    for m, val in zip(report.m_values, report.chi2):
        direct = np.sum(((data - predict(m)) / 0.03) ** 2)
        assert val == pytest.approx(direct, abs=1e-10)


def test_select_array_size_tie_and_errors():
    data = np.zeros(5)
    report = select_array_size(data, 1.0, [4, 2, 3], lambda m: data)
    assert report.best_m == 2
    with pytest.raises(PhysicsError):
        select_array_size(data, 0.0, [2], lambda m: data)
    with pytest.raises(PhysicsError):
        select_array_size(data, 1.0, [], lambda m: data)


@given(g_ratio=st.floats(1.5, 6.0), t_c=st.floats(2.0, 8.0))
@settings(max_examples=20, deadline=None)
def test_piecewise_property_recovery(g_ratio, t_c):
    t = np.linspace(0.0, 12.0, 121)
    y = _two_rate(t, G1, g_ratio * G1, t_c)
    fit = fit_piecewise(t, y)
    assert fit.ratio == pytest.approx(g_ratio, rel=0.05)
    assert fit.t_c == pytest.approx(t_c, rel=0.06)
