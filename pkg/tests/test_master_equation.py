"""Dissipative/coherent couplings and Lindblad register dynamics."""

import math

import numpy as np
import pytest

from mwqed import (DriveParams, PhysicsError, SiteRegister, compute_couplings,
                   derive_params, evolve_master, gamma_single, gtilde,
                   observables_master, visibility)

S = 1 / math.sqrt(2)


@pytest.fixture(scope="module")
def mott_params():
    """Deep-lattice (Mott-regime) parameters used for register dynamics."""
    return derive_params(60.0, 50.0)


@pytest.fixture(scope="module")
def couplings4(mott_params):
    return compute_couplings(mott_params,
                             DriveParams(omega_rabi=1.0, delta=4.0),
                             max_separation=2)


def test_gamma00_matches_golden_rule(params, drive4, drive1):
    for drive in (drive4, drive1):
        c = compute_couplings(params, drive, max_separation=0)
        g1 = gamma_single(params, drive)
        assert abs(c.gamma_n[0] - g1) <= 1e-3 * g1


@pytest.mark.parametrize("delta,omega", [(4.0, 1.0), (1.0, 0.42),
                                         (2.25, 0.6)])
def test_couplings_match_bath_transform(params, delta, omega):
    drive = DriveParams(omega_rabi=omega, delta=delta)
    c = compute_couplings(params, drive, max_separation=2)
    for n in range(3):
        ref = gtilde(n, complex(math.sqrt(delta)), params, drive)
        got = c.gamma_n[n] / 2 + 1j * c.j_n[n]
        assert abs(got - ref) <= 1e-6 * abs(gtilde(0, complex(math.sqrt(delta)),
                                                   params, drive))


def test_point_emitter_cosine_pattern(params):
    # Gamma_n ~ Gamma_1 cos(n pi sqrt(Delta)) up to Gaussian-tail corrections
    c4 = compute_couplings(params, DriveParams(omega_rabi=1.0, delta=4.0), 2)
    assert c4.gamma_n[1] / c4.gamma_n[0] == pytest.approx(1.0, abs=1e-6)
    c1 = compute_couplings(params, DriveParams(omega_rabi=0.42, delta=1.0), 2)
    assert c1.gamma_n[1] / c1.gamma_n[0] == pytest.approx(-1.0, abs=1e-6)


def test_coupling_matrix_psd(couplings4):
    gmat, jmat = couplings4.matrix(3)
    assert np.allclose(gmat, gmat.T)
    assert np.min(np.linalg.eigvalsh(gmat)) >= -1e-8
    with pytest.raises(PhysicsError):
        couplings4.matrix(5)  # beyond max_separation


def test_register_validation():
    with pytest.raises(PhysicsError):
        SiteRegister(sites=("r",) * 7)  # too many sites
    with pytest.raises(PhysicsError):
        SiteRegister(sites=("bogus",))
    with pytest.raises(PhysicsError):
        SiteRegister(sites=((0.9, 0.9),))  # not normalized
    reg = SiteRegister(sites=((S, S), "g", "empty"))
    rho = reg.initial_rho()
    assert rho.shape == (27, 27)
    assert np.trace(rho) == pytest.approx(1.0)


def test_single_site_exponential_decay(mott_params):
    drive = DriveParams(omega_rabi=1.0, delta=4.0)
    c = compute_couplings(mott_params, drive, max_separation=0)
    t = np.linspace(0.0, 3.0 / c.gamma_n[0], 31)
    traj = evolve_master(SiteRegister(sites=("r",)), c, t)
    obs = observables_master(traj)
    assert np.allclose(obs["N_r"], np.exp(-c.gamma_n[0] * t), atol=1e-7)


def test_spectator_register_is_static(couplings4):
    traj = evolve_master(SiteRegister(sites=("g", "empty", "g")), couplings4,
                         np.linspace(0.0, 5.0, 6))
    assert np.allclose(traj.rho, traj.rho[0], atol=1e-10)


def test_density_matrix_invariants(mott_params, couplings4):
    reg = SiteRegister(sites=((S, S), (S, S), "empty"))
    t = np.linspace(0.0, 8.0, 17)
    traj = evolve_master(reg, couplings4, t)
    for rho in traj.rho:
        assert np.trace(rho).real == pytest.approx(1.0, abs=1e-8)
        assert np.max(np.abs(rho - rho.conj().T)) < 1e-8
        assert np.min(np.linalg.eigvalsh(rho)) >= -1e-8
    obs = observables_master(traj)
    # N_g conserved; N_r monotically lost to the continuum
    assert np.max(np.abs(obs["N_g"] - obs["N_g"][0])) <= 1e-6
    assert np.all(np.diff(obs["N_r"]) < 1e-10)


def test_quasimomentum_normalization(mott_params, couplings4):
    reg = SiteRegister(sites=((S, S), (S, S), "empty"))
    traj = evolve_master(reg, couplings4, np.linspace(0.0, 6.0, 7))
    obs = observables_master(traj)
    q = obs["q"]
    bz = (q >= -1.0) & (q <= 1.0)
    for name in ("r", "g"):
        n_raw = obs[f"n_{name}_raw"]
        for i in range(len(traj.t)):
            integral = np.trapezoid(n_raw[i][bz], q[bz])
            assert integral == pytest.approx(obs[f"N_{name}"][i], abs=1e-6)


def test_mott_start_is_flat(mott_params, couplings4):
    # site-localized r atoms have a flat quasimomentum distribution
    traj = evolve_master(SiteRegister(sites=("r", "r", "r")), couplings4,
                         [0.0])
    obs = observables_master(traj, sigma_k=0.0)
    assert np.ptp(obs["n_r_raw"][0]) < 1e-10


def test_visibility_uniform_split():
    q = np.linspace(-1.5, 1.5, 301)
    flat = np.ones_like(q)
    v = visibility(q, flat)
    assert float(v["c0"]) == pytest.approx(1 / 3, rel=1e-6)
    assert float(v["c0_minus_c1"]) == pytest.approx(-1 / 3, rel=1e-6)
    assert float(v["c0"] + v["c1"]) == pytest.approx(1.0, rel=1e-12)


def test_invalid_detuning_rejected(params):
    with pytest.raises(PhysicsError):
        compute_couplings(params, DriveParams(omega_rabi=1.0, delta=0.0), 2)
