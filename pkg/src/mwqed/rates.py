"""Markovian golden-rule decay rates for single emitters and timed-Dicke states."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import PhysicsError
from .lattice import LatticeParams, dispersion, fold_to_bz


def fold_phase(phi):
    """Fold a phase to (-pi, pi]."""
    x = math.fmod(phi + math.pi, 2 * math.pi)
    if x <= 0:
        x += 2 * math.pi
    return x - math.pi


@dataclass(frozen=True)
class DriveParams:
    """Microwave coupling parameters, all in recoil units."""

    omega_rabi: float  # Omega, units omega_r
    delta: float  # Delta, units omega_r
    phase_lag: float = 0.0  # phi = q d, folded to (-pi, pi]
    pulse_duration: float = 0.0  # units 1/omega_r

    def __post_init__(self):
        if self.omega_rabi < 0:
            raise PhysicsError(f"coupling strength must be >= 0, got {self.omega_rabi}")
        if self.pulse_duration < 0:
            raise PhysicsError(f"pulse duration must be >= 0, got {self.pulse_duration}")
        object.__setattr__(self, "phase_lag", fold_phase(self.phase_lag))

    @property
    def q(self) -> float:
        """Quasimomentum of the timed-Dicke state, units of k_r."""
        return self.phase_lag / math.pi


@dataclass(frozen=True)
class TimedDickeSpec:
    """A timed-Dicke state of N atoms over M coherently coupled sites."""

    M: int
    N: int = 1
    q: float = 0.0  # units of k_r, in (-1, 1]

    def __post_init__(self):
        if self.M < 1 or self.N < 1:
            raise PhysicsError(f"need M >= 1 and N >= 1, got M={self.M}, N={self.N}")
        object.__setattr__(self, "q", float(fold_to_bz(self.q)))

    @property
    def sites(self) -> np.ndarray:
        """Site indices floor(1-M/2) ... floor(M/2), centered for even/odd M."""
        lo = math.floor(1 - self.M / 2)
        hi = math.floor(self.M / 2)
        return np.arange(lo, hi + 1)


def gamma_single(params: LatticeParams, drive: DriveParams) -> float:
    """Single-emitter golden-rule decay rate, units of omega_r.

    Gamma_1 = (Omega^2 / sqrt(Delta)) sqrt(pi / (2 omega_ho)) exp(-2 Delta / omega_ho)

    Diverges at the continuum edge; for Delta <= 0 use the spectral module,
    which resolves the edge nonperturbatively.
    """
    if drive.delta <= 0:
        raise PhysicsError(
            "golden rule invalid at or below the continuum edge (Delta <= 0); "
            "use the spectral module instead"
        )
    if params.s_z <= 0:
        raise PhysicsError("gamma_single requires s_z > 0")
    w = params.omega_ho
    return (
        drive.omega_rabi**2
        / math.sqrt(drive.delta)
        * math.sqrt(math.pi / (2 * w))
        * math.exp(-2 * drive.delta / w)
    )


def structure_factor(q, k, M) -> complex:
    """(1/M) sum_j exp(i (q - k) d j) over the centered M-site array."""
    spec = TimedDickeSpec(M=M, q=0.0)
    j = spec.sites
    return complex(np.mean(np.exp(1j * (q - k) * math.pi * j)))


def gamma_collective(params: LatticeParams, drive: DriveParams, tds: TimedDickeSpec,
                     direction=+1) -> float:
    """Decay rate of the timed-Dicke state: N M Gamma_1 |S(q - k(Delta))|^2.

    `direction` selects the resonant momentum branch +/- sqrt(Delta).
    """
    g1 = gamma_single(params, drive)
    k = direction * dispersion(drive.delta).k_resonant
    s = structure_factor(tds.q, k, tds.M)
    return tds.N * tds.M * g1 * abs(s) ** 2


def superradiant_detunings(phi, n_max, kind="constructive") -> np.ndarray:
    """Detunings (units omega_r) where emission at phase lag phi interferes.

    Constructive branch: Delta_n = (phi/pi + 2 n)^2; destructive branch uses
    the half-integer offsets (phi/pi + 2 n + 1)^2.  Sorted ascending, unique.
    """
    phi = fold_phase(phi)
    n = np.arange(-n_max, n_max + 1)
    if kind == "constructive":
        roots = phi / math.pi + 2 * n
    elif kind == "destructive":
        roots = phi / math.pi + 2 * n + 1
    else:
        raise PhysicsError(f"unknown interference branch {kind!r}")
    vals = np.unique(np.round(roots**2, 12))
    return vals[vals >= 0]


def retardation(params: LatticeParams, drive: DriveParams) -> float:
    """Effective emitter separation eta = d Gamma_1 / v_g (dimensionless)."""
    g1 = gamma_single(params, drive)
    vg = dispersion(drive.delta).v_g
    return params.d * g1 / vg
