"""Lattice parameters, Franck-Condon factors, band structure and kinematics.

Internal unit system: hbar = omega_r = k_r = 1, where omega_r and k_r are
the recoil frequency and wavenumber of the longitudinal lattice.  The site
spacing is then d = pi exactly.  Each `LatticeParams` carries an
`SIConversion` record so results can be quoted in laboratory units at the
boundary (CLI, plots); the physics modules never touch SI internally.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import constants
from .errors import ConvergenceError, PhysicsError

D_INTERNAL = math.pi  # site spacing d * k_r


def fold_to_bz(k):
    """Fold momenta (units of k_r) into the first Brillouin zone (-1, 1]."""
    k = np.asarray(k, dtype=float)
    x = np.mod(k + 1.0, 2.0) - 1.0
    x = np.where(x <= -1.0 + 1e-14, x + 2.0, x)
    if x.ndim == 0:
        return float(x)
    return x


@dataclass(frozen=True)
class SIConversion:
    """Conversion record between internal recoil units and SI."""

    omega_r: float  # rad/s
    k_r: float  # 1/m
    mass: float  # kg
    lambda_z: float  # m
    lambda_perp: float  # m

    @property
    def d(self) -> float:
        """Lattice spacing in meters."""
        return math.pi / self.k_r

    def time_s(self, t_internal) -> float:
        """Internal time (units 1/omega_r) to seconds."""
        return t_internal / self.omega_r

    def time_internal(self, t_seconds) -> float:
        return t_seconds * self.omega_r

    def rate_hz(self, rate_internal) -> float:
        """Internal rate (units omega_r) to an ordinary frequency in Hz."""
        return rate_internal * self.omega_r / (2 * math.pi)

    def velocity_si(self, v_internal) -> float:
        """Internal velocity (units omega_r/k_r) to m/s."""
        return v_internal * self.omega_r / self.k_r


@dataclass(frozen=True)
class LatticeParams:
    """Lattice depths and the derived scales of the emitter array.

    All derived quantities are dimensionless in recoil units:
    omega_ho in omega_r, a_ho in 1/k_r, d = pi.
    """

    s_z: float
    s_perp: float
    lambda_z: float = constants.LAMBDA_Z_DEFAULT
    lambda_perp: float = constants.LAMBDA_PERP_DEFAULT
    mass: float = constants.RB87_MASS
    omega_z_si: float = constants.OMEGA_Z_DEFAULT

    omega_ho: float = field(init=False)
    a_ho: float = field(init=False)
    d: float = field(init=False, default=D_INTERNAL)
    si: SIConversion = field(init=False)

    def __post_init__(self):
        if self.s_z < 0:
            raise PhysicsError(f"longitudinal depth must be >= 0, got s_z={self.s_z}")
        if self.s_perp < 0:
            raise PhysicsError(f"transverse depth must be >= 0, got s_perp={self.s_perp}")
        object.__setattr__(self, "omega_ho", 2.0 * math.sqrt(self.s_z))
        a_ho = self.s_z ** -0.25 if self.s_z > 0 else math.inf
        object.__setattr__(self, "a_ho", a_ho)
        k_r = 2 * math.pi / self.lambda_z
        omega_r = constants.HBAR * k_r**2 / (2 * self.mass)
        object.__setattr__(
            self,
            "si",
            SIConversion(
                omega_r=omega_r,
                k_r=k_r,
                mass=self.mass,
                lambda_z=self.lambda_z,
                lambda_perp=self.lambda_perp,
            ),
        )

    @property
    def time_horizon(self) -> float:
        """Longest internal time for which ignoring the residual trap is valid."""
        return (2 * math.pi / self.omega_z_si) * self.si.omega_r

    def require_valid_time(self, t_internal):
        """Refuse simulation times beyond the free-motion validity window."""
        if t_internal > self.time_horizon:
            raise PhysicsError(
                f"requested evolution time {t_internal:.3g}/omega_r exceeds the "
                f"residual-trap validity bound 2*pi/omega_z = "
                f"{self.time_horizon:.3g}/omega_r; the trap is not modeled"
            )


def derive_params(s_z, s_perp, **overrides) -> LatticeParams:
    """Build `LatticeParams`, optionally overriding SI constants.

    Accepted overrides: lambda_z, lambda_perp, mass, omega_z_si (all SI).
    """
    allowed = {"lambda_z", "lambda_perp", "mass", "omega_z_si"}
    unknown = set(overrides) - allowed
    if unknown:
        raise PhysicsError(f"unknown parameter overrides: {sorted(unknown)}")
    return LatticeParams(s_z=s_z, s_perp=s_perp, **overrides)


def franck_condon(j, k, params: LatticeParams, norm="wigner_seitz", box_length=None):
    """Overlap of the site-j Gaussian Wannier state with the plane wave k.

    gamma_{j,k} = sqrt(2/L) (pi a_ho^2)^{1/4} exp(-k^2 a_ho^2 / 2) exp(i k d j)

    `norm` selects the continuum normalization: "box" (length `box_length`
    in units of 1/k_r) or "wigner_seitz" (L replaced by the cell size d).
    Vectorized over k.
    """
    if params.s_z <= 0:
        raise PhysicsError("franck_condon requires s_z > 0 (finite Wannier width)")
    if norm == "wigner_seitz":
        length = params.d
    elif norm == "box":
        if box_length is None or box_length <= 0:
            raise PhysicsError("box normalization requires box_length > 0")
        length = float(box_length)
    else:
        raise PhysicsError(f"unknown normalization {norm!r}")
    k = np.asarray(k, dtype=float)
    a = params.a_ho
    amp = math.sqrt(2.0 / length) * (math.pi * a**2) ** 0.25
    val = amp * np.exp(-0.5 * (k * a) ** 2) * np.exp(1j * k * params.d * j)
    if val.ndim == 0:
        return complex(val)
    return val


@dataclass(frozen=True)
class BandStructure:
    """Ground band of the 1D lattice on a quasimomentum grid."""

    s_z: float
    q_grid: np.ndarray  # units of k_r, closed grid [-1, 1]
    epsilon_q: np.ndarray  # units of hbar*omega_r
    plane_wave_cutoff: int


def _ground_band(s_z, q_grid, cutoff):
    """Lowest eigenvalue of the plane-wave lattice Hamiltonian per q."""
    half = cutoff // 2
    n = np.arange(-half, half + 1)
    eps = np.empty_like(q_grid)
    off = -s_z / 4.0
    for i, q in enumerate(q_grid):
        h = np.diag((q + 2.0 * n) ** 2 + s_z / 2.0)
        idx = np.arange(len(n) - 1)
        h[idx, idx + 1] = off
        h[idx + 1, idx] = off
        eps[i] = np.linalg.eigvalsh(h)[0]
    return eps


def band_structure(s_z, n_q=257, cutoff=21) -> BandStructure:
    """Ground-band dispersion epsilon_q from plane-wave diagonalization.

    The returned grid is the closed interval [-1, 1] (units of k_r) so that
    periodic trapezoid quadrature over the Brillouin zone is exact to
    spectral accuracy.  Convergence is verified by doubling the cutoff.
    """
    if cutoff < 5:
        raise PhysicsError(f"plane-wave cutoff must be >= 5, got {cutoff}")
    if n_q < 16:
        raise PhysicsError(f"need at least 16 quasimomentum points, got {n_q}")
    if s_z < 0:
        raise PhysicsError(f"negative depth s_z={s_z}")
    q_grid = np.linspace(-1.0, 1.0, n_q)
    eps = _ground_band(s_z, q_grid, cutoff)
    eps_check = _ground_band(s_z, q_grid, 2 * cutoff + 1)
    residual = float(np.max(np.abs(eps - eps_check)))
    if residual > 1e-8:
        raise ConvergenceError(
            f"band structure not converged at cutoff {cutoff} "
            f"(residual {residual:.3e} hbar*omega_r)",
            residual=residual,
        )
    return BandStructure(s_z=s_z, q_grid=q_grid, epsilon_q=eps_check, plane_wave_cutoff=cutoff)


def hubbard_J(band: BandStructure) -> float:
    """Nearest-neighbor tunneling from the ground band.

    J = -1/(2 k_r) * integral dq exp(i q d) epsilon_q over the Brillouin zone.
    """
    q = band.q_grid
    integrand = np.exp(1j * math.pi * q) * band.epsilon_q
    val = -0.5 * np.trapezoid(integrand, q)
    if abs(val.imag) > 1e-10 * max(abs(val.real), 1e-30):
        raise ConvergenceError(
            f"tunneling integral has spurious imaginary part {val.imag:.3e}",
            residual=abs(val.imag),
        )
    return float(val.real)


def hubbard_U(params: LatticeParams, scattering_length=constants.SCATTERING_LENGTH_DEFAULT) -> float:
    """On-site interaction from Gaussian Wannier functions, in hbar*omega_r.

    U = (4 pi hbar^2 a / m) (2 pi)^{-3/2} / (a_z a_perp^2), with the
    transverse oscillator length built from s_perp and lambda_perp the same
    way a_ho is built from s_z and lambda_z.
    """
    if params.s_z <= 0 or params.s_perp <= 0:
        raise PhysicsError("hubbard_U requires s_z > 0 and s_perp > 0")
    if scattering_length < 0:
        raise PhysicsError("scattering length must be >= 0")
    si = params.si
    k_perp = 2 * math.pi / params.lambda_perp
    a_z = params.s_z**-0.25 / si.k_r
    a_perp = params.s_perp**-0.25 / k_perp
    u_joule = (
        4 * math.pi * constants.HBAR**2 * scattering_length / params.mass
        * (2 * math.pi) ** -1.5
        / (a_z * a_perp**2)
    )
    return u_joule / (constants.HBAR * si.omega_r)


@dataclass(frozen=True)
class DispersionPoint:
    """Resonant emission kinematics at detuning Delta."""

    delta: float
    k_resonant: float  # units of k_r (positive branch)
    k_tilde: float  # reduced quasimomentum in (-1, 1]
    band_index: int
    v_g: float  # units of omega_r / k_r


def dispersion(delta) -> DispersionPoint:
    """Resonant momentum, reduced quasimomentum, band index and group velocity.

    Free-particle dispersion omega_k = k^2 (units omega_r, k in k_r):
    k(Delta) = sqrt(Delta), folded into the reduced zone as
    k = k_tilde + 2 n.
    """
    if delta < 0:
        raise PhysicsError(
            f"detuning {delta} below the continuum edge; bound-state physics "
            "is handled by the spectral module"
        )
    k = math.sqrt(delta)
    k_tilde = fold_to_bz(k)
    n = round((k - k_tilde) / 2.0)
    return DispersionPoint(delta=delta, k_resonant=k, k_tilde=k_tilde, band_index=n, v_g=2.0 * k)


def reduced_dispersion(k_tilde, n):
    """omega_{n, k_tilde} = (k_tilde + 2 n)^2 in units of omega_r."""
    return (np.asarray(k_tilde) + 2.0 * n) ** 2


@dataclass(frozen=True)
class BlochPhase:
    q: float  # quasimomentum in (-1, 1], units of k_r
    tau_B: float  # Bloch period in seconds


def bloch_phase(t_B, params: LatticeParams, gravity=constants.G_EARTH) -> BlochPhase:
    """Quasimomentum imprinted by a gravity-driven Bloch oscillation.

    q = -2 k_r t_B / tau_B with tau_B = 2 pi hbar / (m g d); t_B in seconds.
    """
    if t_B < 0:
        raise PhysicsError(f"Bloch imprint duration must be >= 0, got {t_B}")
    tau = 2 * math.pi * constants.HBAR / (params.mass * gravity * params.si.d)
    q = fold_to_bz(-2.0 * t_B / tau)
    return BlochPhase(q=q, tau_B=tau)
