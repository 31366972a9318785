"""Lindblad dynamics of small hardcore-boson emitter registers.

Each lattice site carries a three-state local space {empty, r, g}: r atoms
are the emitters, g atoms are decoupled spectators, and an emitted r atom
leaves its site empty.  Site-resolved dissipative couplings Gamma_{jj'} and
coherent shifts J_{jj'} come from the on-shell and principal-value parts of
the bath correlation transform; the master equation is

    drho/dt = -i[H, rho]
              + sum_{jj'} (Gamma_{jj'}/2) (2 r_{j'} rho r_j^dag
                                           - {r_j^dag r_{j'}, rho}).

Recoil units throughout (hbar = omega_r = k_r = 1, d = pi).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp

from .constants import SIGMA_K_DEFAULT
from .errors import ConvergenceError, PhysicsError
from .lattice import LatticeParams
from .rates import DriveParams, gamma_single
from .spectral import gtilde


# --------------------------------------------------------------------------
# couplings
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class CouplingMatrix:
    """Site-separation resolved dissipative and coherent couplings.

    gamma_n[n] and j_n[n] are Gamma_{j,j+n} and J_{j,j+n} in omega_r units;
    `matrix` assembles the full Toeplitz matrices for a register.
    """

    gamma_n: np.ndarray
    j_n: np.ndarray
    delta: float
    omega_rabi: float

    @property
    def max_separation(self) -> int:
        return len(self.gamma_n) - 1

    def matrix(self, n_sites: int):
        """(Gamma_{jj'}, J_{jj'}) for n_sites consecutive sites."""
        if n_sites - 1 > self.max_separation:
            raise PhysicsError(
                f"couplings cover separations up to {self.max_separation}, "
                f"but a {n_sites}-site register needs {n_sites - 1}")
        idx = np.abs(np.arange(n_sites)[:, None] - np.arange(n_sites)[None, :])
        return self.gamma_n[idx], self.j_n[idx]


def _pv_quadrature(g, k0, k_max, n_panels):
    """Principal value of int_0^{k_max} g(k)/(Delta - k^2) dk.

    Even-symmetry subtraction: the integrand minus g(k0)/(Delta - k^2) is
    regular at k0 and integrated by composite Gauss-Legendre with k0 as a
    panel edge; the subtracted term has the closed form
    g(k0)/(2 k0) * ln((k_max + k0)/(k_max - k0)).
    """
    x, w = np.polynomial.legendre.leggauss(24)
    edges = np.unique(np.concatenate([
        np.linspace(0.0, k_max, n_panels + 1),
        [max(k0 - 0.2, 0.0), k0, min(k0 + 0.2, k_max)],
    ]))
    total = 0.0
    g0 = g(k0)
    for a, b in zip(edges[:-1], edges[1:]):
        k = 0.5 * (b - a) * x + 0.5 * (b + a)
        val = (g(k) - g0) / (k0**2 - k**2)
        total += 0.5 * (b - a) * np.sum(w * val)
    total += g0 / (2 * k0) * math.log((k_max + k0) / (k_max - k0))
    return total


def compute_couplings(params: LatticeParams, drive: DriveParams,
                      max_separation=2) -> CouplingMatrix:
    """Gamma_n and J_n for site separations n = 0 ... max_separation.

    The on-shell (delta-function) part gives
        Gamma_n / 2 = (Omega^2 sqrt(pi) a / (4 sqrt(Delta)))
                      * exp(-Delta a^2) cos(n pi sqrt(Delta)),
    and J_n is the principal-value integral
        J_n = (Omega^2 a / (4 sqrt(pi))) PV int dk
              e^{-k^2 a^2} cos(k n pi) / (Delta - k^2)
    over both momentum branches.  Quadrature convergence is verified by
    doubling the panel count, and the result is cross-checked against the
    closed-form bath transform: Gamma_n/2 + i J_n = G~_n(Delta + i0+).
    """
    if drive.delta <= 0:
        raise PhysicsError("couplings require Delta > 0 (on-shell emission)")
    if max_separation < 0:
        raise PhysicsError("max_separation must be >= 0")
    a = params.a_ho
    k0 = math.sqrt(drive.delta)
    k_max = k0 + 14.0 / a
    pref = drive.omega_rabi**2 * a / (4 * math.sqrt(math.pi))
    gamma_n = np.empty(max_separation + 1)
    j_n = np.empty(max_separation + 1)
    for n in range(max_separation + 1):
        def g(k, n=n):
            return np.exp(-(k * a) ** 2) * np.cos(k * n * math.pi)

        gamma_n[n] = (drive.omega_rabi**2 * math.sqrt(math.pi) * a
                      / (2 * k0) * math.exp(-drive.delta * a * a)
                      * math.cos(n * math.pi * k0))
        # the even integrand doubles the positive-k branch
        coarse = 2 * pref * _pv_quadrature(g, k0, k_max, 40)
        fine = 2 * pref * _pv_quadrature(g, k0, k_max, 80)
        scale = max(abs(fine), 1e-6)  # rates are O(1e-2..1) omega_r
        if abs(fine - coarse) > 1e-6 * scale:
            raise ConvergenceError(
                f"principal-value quadrature for J_{n} not converged "
                f"(delta {abs(fine - coarse):.2e})",
                residual=abs(fine - coarse))
        j_n[n] = fine
        ref = gtilde(n, complex(k0, 1e-300), params, drive)
        ref0 = gtilde(0, complex(k0, 1e-300), params, drive)
        err = abs(gamma_n[n] / 2 + 1j * j_n[n] - ref) / max(abs(ref), 1e-6 * abs(ref0))
        if err > 1e-6:
            raise ConvergenceError(
                f"coupling cross-check against the bath transform failed for "
                f"n={n} (relative error {err:.2e})", residual=err)
    couplings = CouplingMatrix(gamma_n=gamma_n, j_n=j_n, delta=drive.delta,
                               omega_rabi=drive.omega_rabi)
    gmat, _ = couplings.matrix(max_separation + 1)
    lowest = float(np.min(np.linalg.eigvalsh(gmat)))
    if lowest < -1e-8:
        raise PhysicsError(
            f"dissipative coupling matrix not positive semidefinite "
            f"(lowest eigenvalue {lowest:.2e})")
    g1 = gamma_single(params, drive)
    if abs(gamma_n[0] - g1) > 1e-3 * g1:
        raise PhysicsError("Gamma_00 inconsistent with the golden-rule rate")
    return couplings


# --------------------------------------------------------------------------
# registers and states
# --------------------------------------------------------------------------

EMPTY, R_STATE, G_STATE = 0, 1, 2


@dataclass(frozen=True)
class SiteRegister:
    """Ordered initial local states; each entry is one of

    "empty", "r", "g", or a pair (alpha, beta) for alpha|r> + beta|g>.
    """

    sites: tuple

    def __post_init__(self):
        if not (1 <= len(self.sites) <= 6):
            raise PhysicsError(
                f"register supports 1..6 sites (dimension 3^n), got {len(self.sites)}")
        for s in self.sites:
            if isinstance(s, str):
                if s not in ("empty", "r", "g"):
                    raise PhysicsError(f"unknown site state {s!r}")
            else:
                alpha, beta = s
                if abs(abs(alpha) ** 2 + abs(beta) ** 2 - 1.0) > 1e-10:
                    raise PhysicsError("superposition amplitudes must be normalized")

    @property
    def n_sites(self) -> int:
        return len(self.sites)

    def local_vectors(self):
        vecs = []
        for s in self.sites:
            v = np.zeros(3, dtype=complex)
            if s == "empty":
                v[EMPTY] = 1.0
            elif s == "r":
                v[R_STATE] = 1.0
            elif s == "g":
                v[G_STATE] = 1.0
            else:
                v[R_STATE], v[G_STATE] = s
            vecs.append(v)
        return vecs

    def initial_rho(self) -> np.ndarray:
        psi = np.array([1.0], dtype=complex)
        for v in self.local_vectors():
            psi = np.kron(psi, v)
        return np.outer(psi, psi.conj())


def _site_operator(local, site, n_sites):
    """Embed a 3x3 local operator at one site of the register."""
    op = np.array([1.0], dtype=complex)
    eye = np.eye(3, dtype=complex)
    for j in range(n_sites):
        op = np.kron(op, local if j == site else eye)
    return op


def _lowering(site, n_sites):
    r = np.zeros((3, 3), dtype=complex)
    r[EMPTY, R_STATE] = 1.0  # r_j: |r> -> |empty>
    return _site_operator(r, site, n_sites)


def _number(state, site, n_sites):
    n = np.zeros((3, 3), dtype=complex)
    n[state, state] = 1.0
    return _site_operator(n, site, n_sites)


# --------------------------------------------------------------------------
# evolution
# --------------------------------------------------------------------------

@dataclass
class MasterTrajectory:
    """Density-matrix samples plus the operators used to produce them."""

    t: np.ndarray
    rho: np.ndarray  # (nt, D, D)
    register: SiteRegister
    couplings: CouplingMatrix
    delta: float
    delta_g: float


def evolve_master(register: SiteRegister, couplings: CouplingMatrix,
                  t_grid, delta=None, delta_g=0.0,
                  include_self_shift=True, rtol=1e-9, atol=1e-11) -> MasterTrajectory:
    """Integrate the Lindblad equation for the register.

    `delta` defaults to the detuning the couplings were computed at;
    `include_self_shift` keeps the n = 0 Lamb shift J_00 in the Hamiltonian
    (set False to absorb it into the detuning convention).
    """
    t = np.asarray(t_grid, dtype=float)
    if np.any(t < 0):
        raise PhysicsError("negative times not supported")
    if np.any(np.diff(t) <= 0):
        raise PhysicsError("time grid must be strictly increasing")
    if delta is None:
        delta = couplings.delta
    n_sites = register.n_sites
    gmat, jmat = couplings.matrix(n_sites)
    jmat = jmat.copy()
    if not include_self_shift:
        np.fill_diagonal(jmat, 0.0)

    lower = [_lowering(j, n_sites) for j in range(n_sites)]
    ham = np.zeros((3**n_sites,) * 2, dtype=complex)
    for j in range(n_sites):
        ham += delta * _number(R_STATE, j, n_sites)
        ham += delta_g * _number(G_STATE, j, n_sites)
        for jp in range(n_sites):
            ham += jmat[j, jp] * (lower[j].conj().T @ lower[jp])

    # pre-assemble the non-Hamiltonian pieces
    jump_pairs = []
    anti = np.zeros_like(ham)
    for j in range(n_sites):
        for jp in range(n_sites):
            if gmat[j, jp] == 0.0:
                continue
            jump_pairs.append((gmat[j, jp], lower[jp], lower[j].conj().T))
            anti += 0.5 * gmat[j, jp] * (lower[j].conj().T @ lower[jp])
    h_eff = -1j * ham - anti  # rho' = h_eff rho + rho h_eff^dag + jumps

    dim = ham.shape[0]

    def rhs(_, y):
        rho = y.reshape(dim, dim)
        out = h_eff @ rho + rho @ h_eff.conj().T
        for g, left, right in jump_pairs:
            out += g * (left @ rho @ right)
        return out.ravel()

    rho0 = register.initial_rho()
    if t[-1] == 0.0:
        rho_t = np.broadcast_to(rho0, (len(t), dim, dim)).copy()
    else:
        sol = solve_ivp(rhs, (0.0, t[-1]), rho0.ravel().astype(complex),
                        t_eval=t, method="DOP853", rtol=rtol, atol=atol,
                        dense_output=False)
        if not sol.success:
            raise ConvergenceError(
                f"master-equation integration failed: {sol.message}")
        rho_t = sol.y.T.reshape(len(t), dim, dim)

    ng_op = sum(_number(G_STATE, j, n_sites) for j in range(n_sites))
    ng0 = float(np.real(np.trace(ng_op @ rho_t[0])))
    for i, rho in enumerate(rho_t):
        tr = np.trace(rho)
        if abs(tr - 1.0) > 1e-8:
            raise PhysicsError(f"trace drift {abs(tr - 1):.2e} at t={t[i]:.4g}")
        if np.max(np.abs(rho - rho.conj().T)) > 1e-8:
            raise PhysicsError(f"hermiticity violated at t={t[i]:.4g}")
        lowest = float(np.min(np.linalg.eigvalsh(0.5 * (rho + rho.conj().T))))
        if lowest < -1e-8:
            raise PhysicsError(
                f"negative population {lowest:.2e} at t={t[i]:.4g}")
        ng = float(np.real(np.trace(ng_op @ rho)))
        if abs(ng - ng0) > 1e-6:
            raise PhysicsError(f"N_g drift {abs(ng - ng0):.2e} at t={t[i]:.4g}")
    return MasterTrajectory(t=t, rho=rho_t, register=register,
                            couplings=couplings, delta=delta, delta_g=delta_g)


# --------------------------------------------------------------------------
# observables
# --------------------------------------------------------------------------

def _transfer(state, site_from, site_to, n_sites):
    """c_{to}^dag c_{from} for species `state` (site-local hardcore bosons)."""
    c = np.zeros((3, 3), dtype=complex)
    c[EMPTY, state] = 1.0
    low_from = _site_operator(c, site_from, n_sites)
    low_to = _site_operator(c, site_to, n_sites)
    return low_to.conj().T @ low_from


def observables_master(traj: MasterTrajectory, sigma_k=SIGMA_K_DEFAULT,
                       n_q=241):
    """Populations and quasimomentum distributions of both species.

    n_c(q) = (1/2) sum_{jj'} e^{i q d (j - j')} <c_j^dag c_j'> on a q grid
    over (-1.5, 1.5] k_r, so that the integral over one Brillouin zone
    equals the particle number N_c; the convolved densities apply the
    detection resolution sigma_k.
    """
    n_sites = traj.register.n_sites
    t = traj.t
    q = np.linspace(-1.5, 1.5, n_q)
    out = {"t": t, "q": q}
    for name, state in (("r", R_STATE), ("g", G_STATE)):
        corr = np.empty((len(t), n_sites, n_sites), dtype=complex)
        for j in range(n_sites):
            for jp in range(n_sites):
                op = _transfer(state, jp, j, n_sites)
                corr[:, j, jp] = np.einsum("tab,ba->t", traj.rho, op)
        number = np.real(np.einsum("tjj->t", corr))
        phase = np.exp(1j * math.pi * np.outer(q, np.arange(n_sites)))
        # n(q) = (1/2) sum_{jj'} e^{i q pi (j - j')} corr_{jj'}
        nq = 0.5 * np.real(np.einsum("qj,tjk,qk->tq", phase, corr, phase.conj()))
        out[f"N_{name}"] = number
        out[f"n_{name}_raw"] = nq
        if sigma_k > 0:
            kernel = np.exp(-0.5 * ((q[:, None] - q[None, :]) / sigma_k) ** 2)
            kernel /= np.sum(kernel, axis=1, keepdims=True)
            nq = nq @ kernel.T
        out[f"n_{name}"] = nq
    return out


def visibility(q, n_q):
    """Contrast between the zone center and the zone edges.

    c0 integrates the normalized distribution over |q| <= 0.5 and c1 over
    0.5 < |q| <= 1.5; returns both orderings.  `n_q` may be (nt, nq) or (nq,).
    """
    q = np.asarray(q, dtype=float)
    n_q = np.atleast_2d(np.asarray(n_q, dtype=float))
    # refine the grid so the |q| = 0.5 split lands exactly on sample points
    q_fine = np.unique(np.concatenate([q, [-0.5, 0.5]]))
    q_fine = q_fine[(q_fine >= q[0]) & (q_fine <= q[-1])]
    n_fine = np.array([np.interp(q_fine, q, row) for row in n_q])
    total = np.trapezoid(n_fine, q_fine, axis=1)
    total = np.where(np.abs(total) < 1e-300, 1.0, total)
    inner = np.abs(q_fine) <= 0.5 + 1e-12
    c0 = np.trapezoid(n_fine[:, inner], q_fine[inner], axis=1) / total
    c1 = 1.0 - c0
    c0, c1 = np.squeeze(c0), np.squeeze(c1)
    return {"c0": c0, "c1": c1, "c0_minus_c1": c0 - c1, "c1_minus_c0": c1 - c0}
