"""Simulator for arrays of quantum emitters radiating into a matter-wave continuum.

Lattice-trapped emitter atoms decay by ejecting untrapped atoms into a 1D
tube; this package computes golden-rule rates, exact single-excitation
dynamics, Lindblad register dynamics and the analytic pole spectrum of the
three-site array.  Internal units: hbar = omega_r = k_r = 1, d = pi.
"""

__version__ = "0.1.0"

from .errors import ConfigError, ConvergenceError, PhysicsError
from .lattice import (
    BandStructure,
    BlochPhase,
    DispersionPoint,
    LatticeParams,
    SIConversion,
    band_structure,
    bloch_phase,
    derive_params,
    dispersion,
    fold_to_bz,
    franck_condon,
    hubbard_J,
    hubbard_U,
)
from .rates import (
    DriveParams,
    TimedDickeSpec,
    gamma_collective,
    gamma_single,
    retardation,
    structure_factor,
    superradiant_detunings,
)
from .single_excitation import (
    EmissionMap,
    KGrid,
    Localized,
    SingleExcitationModel,
    ThermalResult,
    TimedDicke,
    Trajectory,
    build_model,
    directional_populations,
    emission_peaks,
    evolve,
    excited_fraction,
    momentum_distribution,
    position_distribution,
    sweep_emission_map,
    thermal_average,
)
from .spectral import (
    SpectralEvolution,
    SpectralMode,
    bic_profile,
    cerfc,
    cerfcx,
    evolve_spectral,
    find_poles,
    gtilde,
    residue_amplitudes,
)
from .master_equation import (
    CouplingMatrix,
    MasterTrajectory,
    SiteRegister,
    compute_couplings,
    evolve_master,
    observables_master,
    visibility,
)
from .analysis import (
    BeatFit,
    ChiSquareReport,
    PiecewiseExpFit,
    fit_beat,
    fit_piecewise,
    select_array_size,
)

__all__ = [name for name in dir() if not name.startswith("_")]
