"""Physical constants (SI) used throughout the package.

Internal unit conventions:
  * every energy-like quantity is carried as an angular frequency in rad/s
    (i.e. E/hbar); conversion helpers below are used at I/O boundaries only,
  * lengths in m, magnetic fields in T, powers in W, temperatures in K.
"""

import numpy as np
from scipy.constants import physical_constants, hbar, h, c, pi

k_B = physical_constants["Boltzmann constant"][0]
mu_B = physical_constants["Bohr magneton"][0]
u_amu = physical_constants["atomic mass constant"][0]

ZETA3 = 1.2020569031595943  # Riemann zeta(3), ideal-gas condensation formula

__all__ = [
    "hbar", "h", "c", "pi", "k_B", "mu_B", "u_amu", "ZETA3",
    "rad_to_Hz", "Hz_to_rad",
]


def rad_to_Hz(x):
    """Angular frequency (rad/s) -> ordinary frequency (Hz)."""
    return np.asarray(x) / (2 * pi) if np.ndim(x) else x / (2 * pi)


def Hz_to_rad(x):
    """Ordinary frequency (Hz) -> angular frequency (rad/s)."""
    return np.asarray(x) * (2 * pi) if np.ndim(x) else x * (2 * pi)
