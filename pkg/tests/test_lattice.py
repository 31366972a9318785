"""Lattice parameters, Franck-Condon factors, bands and kinematics.

Oracle values were computed before the build with 40-digit arithmetic
(mpmath) from the closed forms and are frozen here as literals.
"""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mwqed import (PhysicsError, band_structure, bloch_phase, derive_params,
                   dispersion, fold_to_bz, franck_condon, hubbard_J,
                   hubbard_U)

# frozen extended-precision oracles (40-digit evaluation of the closed forms)
OMEGA_HO_8 = 5.656854249492380
A_HO_8 = 0.5946035575013605
FC_00_WS = 0.8191082144414216  # gamma_{0,0}, s_z = 8, Wigner-Seitz norm
FC_02_WS = 0.4038766154057232  # gamma_{0,2k_r}
OMEGA_R_HZ = 3678.3842849703686  # defaults: lambda_z = 790 nm, 87Rb
TAU_B_MS = 1.1852869573714127
D_OVER_VG_4_US = 33.982311339992837
D_OVER_VG_1_US = 67.964622679985674
J_FREE = 2.0 / math.pi**2  # analytic Fourier coefficient of q^2


def test_derived_scales():
    p = derive_params(8.0, 10.0)
    assert p.omega_ho == pytest.approx(OMEGA_HO_8, rel=1e-14)
    assert p.a_ho == pytest.approx(A_HO_8, rel=1e-14)
    assert p.d == math.pi
    assert p.si.omega_r / (2 * math.pi) == pytest.approx(OMEGA_R_HZ, rel=1e-12)


def test_negative_depth_rejected():
    with pytest.raises(PhysicsError):
        derive_params(-1.0, 10.0)
    with pytest.raises(PhysicsError):
        derive_params(8.0, -0.5)


def test_franck_condon_values():
    p = derive_params(8.0, 10.0)
    assert franck_condon(0, 0.0, p) == pytest.approx(FC_00_WS, rel=1e-13)
    assert franck_condon(0, 2.0, p) == pytest.approx(FC_02_WS, rel=1e-13)


@given(j=st.integers(-10, 10), k=st.floats(-5, 5, allow_nan=False))
@settings(max_examples=60, deadline=None)
def test_franck_condon_translation_phase(j, k):
    p = derive_params(8.0, 10.0)
    g0 = franck_condon(0, k, p)
    gj = franck_condon(j, k, p)
    assert abs(gj) == pytest.approx(abs(g0), rel=1e-12)
    expected = g0 * np.exp(1j * k * math.pi * j)
    assert gj == pytest.approx(expected, rel=1e-12)


def test_franck_condon_zero_depth_rejected():
    p = derive_params(0.0, 10.0)
    with pytest.raises(PhysicsError):
        franck_condon(0, 0.0, p)


def test_band_structure_free_particle():
    band = band_structure(0.0)
    assert np.allclose(band.epsilon_q, band.q_grid**2, atol=1e-10)


def test_hubbard_j_free_lattice_oracle():
    # the free band touches at the zone edge, so the BZ quadrature is only
    # O(h^2) here (it is spectrally accurate for any s_z > 0)
    band = band_structure(0.0, n_q=1025)
    assert hubbard_J(band) == pytest.approx(J_FREE, rel=1e-5)


def test_bandwidth_tight_binding_consistency():
    band = band_structure(8.0)
    j = hubbard_J(band)
    bandwidth = band.epsilon_q[-1] - band.epsilon_q[np.argmin(
        np.abs(band.q_grid))]
    assert bandwidth == pytest.approx(4 * j, rel=0.05)


def test_tunneling_suppressed_at_depth_15():
    p = derive_params(15.0, 40.0)
    j = hubbard_J(band_structure(15.0))
    assert p.si.rate_hz(j) <= 100.0  # J <= 2pi x 0.1 kHz


def test_hubbard_u_linear_in_scattering_length():
    p = derive_params(8.0, 10.0)
    u1 = hubbard_U(p, scattering_length=1e-9)
    u2 = hubbard_U(p, scattering_length=2e-9)
    assert u2 == pytest.approx(2 * u1, rel=1e-12)
    assert hubbard_U(p, scattering_length=0.0) == 0.0


def test_dispersion_points():
    d4 = dispersion(4.0)
    assert d4.k_resonant == 2.0
    assert d4.k_tilde == pytest.approx(0.0, abs=1e-14)
    assert d4.v_g == 4.0
    p = derive_params(8.0, 10.0)
    assert p.si.time_s(math.pi / d4.v_g) * 1e6 == pytest.approx(
        D_OVER_VG_4_US, rel=1e-12)
    d1 = dispersion(1.0)
    assert p.si.time_s(math.pi / d1.v_g) * 1e6 == pytest.approx(
        D_OVER_VG_1_US, rel=1e-12)
    d0 = dispersion(0.0)
    assert d0.k_resonant == 0.0 and d0.v_g == 0.0
    with pytest.raises(PhysicsError):
        dispersion(-0.1)


@given(k=st.floats(-50, 50, allow_nan=False))
@settings(max_examples=80, deadline=None)
def test_fold_to_bz_properties(k):
    folded = fold_to_bz(k)
    assert -1.0 < folded <= 1.0 + 1e-12
    # folding is a 2 k_r-periodic projection
    assert fold_to_bz(folded) == pytest.approx(folded, abs=1e-12)
    n = round((k - folded) / 2.0)
    assert k - folded == pytest.approx(2.0 * n, abs=1e-9)


def test_bloch_phase():
    p = derive_params(8.0, 10.0)
    b = bloch_phase(0.0, p)
    assert b.q == 0.0
    assert b.tau_B * 1e3 == pytest.approx(TAU_B_MS, rel=1e-12)
    quarter = bloch_phase(b.tau_B / 4, p)
    assert quarter.q == pytest.approx(-0.5, rel=1e-12)


def test_time_horizon_guard():
    p = derive_params(8.0, 10.0)
    with pytest.raises(PhysicsError):
        p.require_valid_time(p.time_horizon * 1.01)
    p.require_valid_time(p.time_horizon * 0.99)
