"""Exact single-excitation dynamics of an emitter array in a discretized continuum.

One excitation is shared between M lattice sites and the free matter-wave
modes of a periodic box of length L: |Psi> = sum_j A_j |e_j> + sum_m B_m |k_m>.
The Hamiltonian is Hermitian and time independent, so the model is
diagonalized once (dense eigh) and every trajectory, initial state and sweep
cell reuses the same spectral data; only the initial vector depends on the
timed-Dicke phase, which makes phase sweeps and thermal averages cheap.

All quantities in recoil units (hbar = omega_r = k_r = 1, d = pi).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .constants import SIGMA_K_DEFAULT
from .errors import ConvergenceError, PhysicsError
from .lattice import LatticeParams, franck_condon
from .rates import DriveParams, TimedDickeSpec, gamma_single


@dataclass(frozen=True)
class KGrid:
    """Momentum discretization: k_m = (2 pi / L) m with |k_m| <= cutoff.

    `box_sites` is the box length in units of the site spacing d, so the
    physical length is L = box_sites * pi in 1/k_r; `cutoff` is k_Lambda
    in units of k_r.
    """

    box_sites: float = 400.0
    cutoff: float = 6.0

    def __post_init__(self):
        if self.box_sites <= 0 or self.cutoff <= 0:
            raise PhysicsError("KGrid needs box_sites > 0 and cutoff > 0")

    @property
    def length(self) -> float:
        """Box length L in units of 1/k_r."""
        return self.box_sites * math.pi

    @property
    def k(self) -> np.ndarray:
        dk = 2 * math.pi / self.length
        m_max = math.floor(self.cutoff / dk)
        return dk * np.arange(-m_max, m_max + 1)

    @property
    def n_modes(self) -> int:
        return len(self.k)


def check_grid(grid: KGrid, params: LatticeParams, drive: DriveParams):
    """Enforce the cutoff and box-size invariants for a concrete scenario.

    The cutoff must clear the relevant energy scales, (k_Lambda)^2 >=
    4 max(Omega, Delta) as a hard floor and >= 10x to avoid a warning; the
    box must hold the emitted wavepacket for at least ~10 decay times.
    """
    scale = max(drive.omega_rabi, drive.delta, 1e-300)
    ratio = grid.cutoff**2 / scale
    if ratio < 4.0:
        raise PhysicsError(
            f"momentum cutoff too low: k_cutoff^2 / max(Omega, Delta) = "
            f"{ratio:.2f} < 4"
        )
    if ratio < 10.0:
        warnings.warn(
            f"momentum cutoff is marginal: k_cutoff^2 / max(Omega, Delta) = "
            f"{ratio:.2f} < 10", stacklevel=3)
    if drive.delta > 0 and drive.omega_rabi > 0:
        v_g = 2.0 * math.sqrt(drive.delta)
        needed = 10.0 * v_g / gamma_single(params, drive)
        if grid.length < needed:
            warnings.warn(
                f"box L = {grid.length:.0f}/k_r shorter than 10 v_g/Gamma_1 = "
                f"{needed:.0f}/k_r; expect boundary wrap-around in long runs",
                stacklevel=3)


class SingleExcitationModel:
    """Diagonalized coupled-mode Hamiltonian for M sites + one continuum.

    Basis ordering: [site j = floor(1-M/2) ... floor(M/2)] + [modes of grid.k].
    """

    def __init__(self, params: LatticeParams, drive: DriveParams, m_sites=3,
                 grid: KGrid | None = None):
        if grid is None:
            grid = KGrid()
        check_grid(grid, params, drive)
        self.params = params
        self.drive = drive
        self.grid = grid
        self.sites = TimedDickeSpec(M=m_sites).sites
        self.m_sites = m_sites
        k = grid.k
        n_s, n_k = len(self.sites), len(k)
        self.dim = n_s + n_k
        h = np.zeros((self.dim, self.dim), dtype=complex)
        h[np.arange(n_s), np.arange(n_s)] = drive.delta
        h[n_s + np.arange(n_k), n_s + np.arange(n_k)] = k**2
        for i, j in enumerate(self.sites):
            gamma = franck_condon(j, k, params, norm="box", box_length=grid.length)
            h[i, n_s:] = 0.5 * drive.omega_rabi * gamma
            h[n_s:, i] = np.conj(h[i, n_s:])
        self.hamiltonian = h
        self.evals, self.evecs = np.linalg.eigh(h)

    def propagate(self, psi0, t_grid):
        """psi(t) for all t at once through the cached eigenbasis."""
        t = np.asarray(t_grid, dtype=float)
        c0 = self.evecs.conj().T @ psi0
        phases = np.exp(-1j * np.outer(self.evals, t))
        return self.evecs @ (c0[:, None] * phases)


def build_model(params: LatticeParams, drive: DriveParams, m_sites=3,
                grid: KGrid | None = None) -> SingleExcitationModel:
    """Construct and diagonalize the coupled-mode model."""
    return SingleExcitationModel(params, drive, m_sites=m_sites, grid=grid)


# --------------------------------------------------------------------------
# initial states
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class TimedDicke:
    """A_j = e^{i q d j} / sqrt(M) across all sites, empty continuum."""

    q: float = 0.0


@dataclass(frozen=True)
class Localized:
    """Excitation on a single site, empty continuum."""

    site: int = 0


@dataclass(frozen=True)
class Custom:
    """Explicit site amplitudes (normalized on construction)."""

    amplitudes: tuple


def initial_vector(model: SingleExcitationModel, init) -> np.ndarray:
    """Full state vector (sites + modes) for an initial-state spec."""
    psi = np.zeros(model.dim, dtype=complex)
    n_s = len(model.sites)
    if isinstance(init, TimedDicke):
        psi[:n_s] = np.exp(1j * init.q * math.pi * model.sites) / math.sqrt(n_s)
    elif isinstance(init, Localized):
        where = np.flatnonzero(model.sites == init.site)
        if len(where) == 0:
            raise PhysicsError(
                f"site {init.site} not in the modeled array {list(model.sites)}")
        psi[where[0]] = 1.0
    elif isinstance(init, Custom):
        amps = np.asarray(init.amplitudes, dtype=complex)
        if len(amps) != n_s:
            raise PhysicsError(
                f"need {n_s} site amplitudes, got {len(amps)}")
        norm = np.linalg.norm(amps)
        if norm == 0:
            raise PhysicsError("custom initial state has zero norm")
        psi[:n_s] = amps / norm
    else:
        raise PhysicsError(f"unknown initial state spec {init!r}")
    return psi


# --------------------------------------------------------------------------
# trajectories and observables
# --------------------------------------------------------------------------

@dataclass
class WaveState:
    """Site and mode amplitudes at one time."""

    t: float
    A: np.ndarray  # (M,)
    B: np.ndarray  # (n_modes,)
    k: np.ndarray
    box_length: float


@dataclass
class Trajectory:
    """Evolution samples of one initial state."""

    t: np.ndarray
    A: np.ndarray  # (M, nt)
    B: np.ndarray  # (n_modes, nt)
    k: np.ndarray
    box_length: float
    sites: np.ndarray

    def state(self, i) -> WaveState:
        return WaveState(t=float(self.t[i]), A=self.A[:, i], B=self.B[:, i],
                         k=self.k, box_length=self.box_length)


def evolve(model: SingleExcitationModel, init, t_grid) -> Trajectory:
    """Unitary evolution of an initial state; norm drift checked to 1e-8."""
    t = np.asarray(t_grid, dtype=float)
    if np.any(t < 0):
        raise PhysicsError("negative times not supported")
    model.params.require_valid_time(float(np.max(t, initial=0.0)))
    psi0 = init if isinstance(init, np.ndarray) else initial_vector(model, init)
    psi = model.propagate(psi0, t)
    norms = np.linalg.norm(psi, axis=0)
    drift = float(np.max(np.abs(norms - np.linalg.norm(psi0))))
    if drift > 1e-8:
        raise ConvergenceError(
            f"norm drift {drift:.2e} exceeds the 1e-8 unitarity budget",
            residual=drift)
    n_s = len(model.sites)
    return Trajectory(t=t, A=psi[:n_s], B=psi[n_s:], k=model.grid.k,
                      box_length=model.grid.length, sites=model.sites)


def excited_fraction(obj):
    """Total emitter population; scalar for a state, array for a trajectory."""
    if isinstance(obj, WaveState):
        return float(np.sum(np.abs(obj.A) ** 2))
    return np.sum(np.abs(obj.A) ** 2, axis=0)


def momentum_distribution(state: WaveState, sigma_k=SIGMA_K_DEFAULT):
    """Detected momentum density of the emitted matter wave.

    |B_k|^2 convolved with a normalized Gaussian of width sigma_k (the
    imaging resolution); returned as a density on the mode grid, so that
    the trapezoid integral equals the emitted fraction.  sigma_k = 0 gives
    the unconvolved density.
    """
    if sigma_k < 0:
        raise PhysicsError("sigma_k must be >= 0")
    k = state.k
    dk = k[1] - k[0]
    w = np.abs(state.B) ** 2
    if sigma_k == 0:
        n_k = w / dk
    else:
        kernel = np.exp(-0.5 * ((k[:, None] - k[None, :]) / sigma_k) ** 2)
        kernel /= math.sqrt(2 * math.pi) * sigma_k
        n_k = kernel @ w
    return {"k": k, "n_k": n_k}


def position_distribution(state: WaveState):
    """Emitted density in position space, B_z = sum_m L^{-1/2} e^{i k_m z} B_m.

    Evaluated by FFT on the conjugate grid z_n = n L / N (centered), which
    makes Parseval exact: dz * sum |B_z|^2 = sum |B_k|^2.
    """
    n = len(state.k)
    length = state.box_length
    # modes are ordered m = -m_max .. m_max; ifftshift puts m = 0 first
    spectrum = np.fft.ifftshift(state.B)
    b = np.fft.ifft(spectrum) * n / math.sqrt(length)
    b = np.fft.fftshift(b)
    z = (np.arange(n) - n // 2) * (length / n)
    return {"z": z, "n_z": np.abs(b) ** 2}


def directional_populations(obj):
    """Emitted population with k > 0 and k < 0; the k = 0 mode splits evenly."""
    if isinstance(obj, WaveState):
        w = np.abs(obj.B) ** 2
        k = obj.k
        axis = None
    else:
        w = np.abs(obj.B) ** 2
        k = obj.k
        axis = 0
    half0 = 0.5 * np.sum(w[k == 0], axis=axis)
    plus = np.sum(w[k > 0], axis=axis) + half0
    minus = np.sum(w[k < 0], axis=axis) + half0
    return {"P_plus": plus, "P_minus": minus}


# --------------------------------------------------------------------------
# sweeps and averages
# --------------------------------------------------------------------------

@dataclass
class EmissionMap:
    """Per-(Delta, phi) emission data at the end of the pulse."""

    deltas: np.ndarray
    phis: np.ndarray
    k: np.ndarray
    n_k: np.ndarray  # (n_delta, n_phi, n_k), detected density
    p_plus: np.ndarray  # (n_delta, n_phi)
    p_minus: np.ndarray
    excited: np.ndarray
    t_pulse: float


def sweep_emission_map(params: LatticeParams, deltas, phis, m_sites=4,
                       omega_rabi=0.6, t_pulse=None, grid: KGrid | None = None,
                       sigma_k=SIGMA_K_DEFAULT, workers=None) -> EmissionMap:
    """Momentum distributions versus detuning and drive phase lag.

    One diagonalization per detuning; the phase lag only rotates the initial
    timed-Dicke state, so all phi columns share the spectral data.  `workers`
    bounds an optional thread pool over detunings (eigh releases the GIL).
    """
    deltas = np.asarray(deltas, dtype=float)
    phis = np.asarray(phis, dtype=float)
    if grid is None:
        # compact default: sweeps trade box size for per-cell speed
        grid = KGrid(box_sites=150.0, cutoff=max(5.0, math.ceil(
            math.sqrt(10.0 * max(np.max(deltas), omega_rabi)))))
    if t_pulse is None:
        t_pulse = params.si.time_internal(200e-6)
    k = grid.k
    n_k = np.empty((len(deltas), len(phis), len(k)))
    p_plus = np.empty((len(deltas), len(phis)))
    p_minus = np.empty_like(p_plus)
    excited = np.empty_like(p_plus)

    def run_column(i):
        drive = DriveParams(omega_rabi=omega_rabi, delta=deltas[i])
        model = build_model(params, drive, m_sites=m_sites, grid=grid)
        for jj, phi in enumerate(phis):
            traj = evolve(model, TimedDicke(q=phi / math.pi), [t_pulse])
            st = traj.state(0)
            n_k[i, jj] = momentum_distribution(st, sigma_k)["n_k"]
            pops = directional_populations(st)
            p_plus[i, jj] = pops["P_plus"]
            p_minus[i, jj] = pops["P_minus"]
            excited[i, jj] = excited_fraction(st)

    if workers and workers > 1:
        from concurrent.futures import ThreadPoolExecutor
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(run_column, range(len(deltas))))
    else:
        for i in range(len(deltas)):
            run_column(i)
    return EmissionMap(deltas=deltas, phis=phis, k=k, n_k=n_k, p_plus=p_plus,
                       p_minus=p_minus, excited=excited, t_pulse=t_pulse)


def emission_peaks(k, n_k, threshold=0.1):
    """Centers of local maxima of a detected momentum density.

    Quadratic interpolation through each local maximum above `threshold`
    times the global peak; returns the refined peak momenta.
    """
    n_k = np.asarray(n_k, dtype=float)
    top = float(np.max(n_k))
    if top <= 0:
        return np.array([])
    peaks = []
    for i in range(1, len(k) - 1):
        if n_k[i] >= n_k[i - 1] and n_k[i] > n_k[i + 1] and n_k[i] >= threshold * top:
            denom = n_k[i - 1] - 2 * n_k[i] + n_k[i + 1]
            shift = 0.0
            if denom != 0:
                shift = 0.5 * (n_k[i - 1] - n_k[i + 1]) / denom
            peaks.append(k[i] + shift * (k[1] - k[0]))
    return np.array(peaks)


@dataclass
class ThermalResult:
    """Incoherent quasimomentum average of timed-Dicke decay."""

    t: np.ndarray
    q: np.ndarray
    weights: np.ndarray
    survival: np.ndarray  # (n_q, nt) per-q excited fraction
    averaged: np.ndarray  # (nt,)


def thermal_average(params: LatticeParams, drive: DriveParams, m_sites,
                    t_grid, q_grid=None, weights=None,
                    grid: KGrid | None = None,
                    model: SingleExcitationModel | None = None) -> ThermalResult:
    """Average timed-Dicke decay over a quasimomentum distribution.

    Every q reuses the same diagonalized model; `weights` defaults to the
    uniform (infinite-temperature) distribution over the Brillouin zone.
    """
    if q_grid is None:
        # endpoint-free uniform BZ grid, q in (-1, 1]
        n_q = 41
        q_grid = -1.0 + 2.0 * (np.arange(n_q) + 0.5) / n_q
    q_grid = np.asarray(q_grid, dtype=float)
    if weights is None:
        weights = np.full(len(q_grid), 1.0 / len(q_grid))
    weights = np.asarray(weights, dtype=float)
    if len(weights) != len(q_grid):
        raise PhysicsError("q grid and weights differ in length")
    if abs(np.sum(weights) - 1.0) > 1e-8:
        raise PhysicsError("thermal weights must sum to 1")
    if model is None:
        model = build_model(params, drive, m_sites=m_sites, grid=grid)
    t = np.asarray(t_grid, dtype=float)
    survival = np.empty((len(q_grid), len(t)))
    for i, q in enumerate(q_grid):
        traj = evolve(model, TimedDicke(q=q), t)
        survival[i] = excited_fraction(traj)
    averaged = weights @ survival
    return ThermalResult(t=t, q=q_grid, weights=weights,
                         survival=survival, averaged=averaged)
