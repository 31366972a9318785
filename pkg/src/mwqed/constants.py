"""SI constants and experimental defaults.

Everything inside the library works in lattice recoil units
(hbar = omega_r = k_r = 1); these constants are only used to build the
SI conversion record attached to `LatticeParams`.
"""

import math

HBAR = 1.054571817e-34  # J s
H_PLANCK = 2 * math.pi * HBAR
ATOMIC_MASS_UNIT = 1.66053906660e-27  # kg
BOHR_RADIUS = 5.29177210903e-11  # m
G_EARTH = 9.80665  # m / s^2

RB87_MASS = 86.909180527 * ATOMIC_MASS_UNIT  # kg

# lattice wavelengths of the apparatus this library models
LAMBDA_Z_DEFAULT = 790.0e-9  # m, state-selective longitudinal lattice
LAMBDA_PERP_DEFAULT = 1064.0e-9  # m, transverse lattice

SCATTERING_LENGTH_DEFAULT = 100.0 * BOHR_RADIUS  # m

# detection resolution applied to momentum-space observables (units of k_r)
SIGMA_K_DEFAULT = 0.15

# residual longitudinal trap frequency; free motion of the radiated atoms
# only holds on times short compared to 2*pi/omega_z
OMEGA_Z_DEFAULT = 2 * math.pi * 80.0  # rad / s
