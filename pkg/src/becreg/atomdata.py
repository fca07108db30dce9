"""Species data for the register atoms, Zeeman energies, and condensate
thermodynamics.

The built-in defaults describe 87Rb; every field can be overridden through
the CLI config so other bosonic alkalis can be modelled with the same code.
"""

from dataclasses import dataclass, field, replace
import math

import numpy as np

from .constants import hbar, h, c, pi, k_B, mu_B, u_amu, ZETA3
from .errors import ConfigurationError

GROUND_BAND = "5S1/2"
EXCITED_BAND = "5P1/2"

# Second-order Zeeman spread of the ground-manifold transitions at the 5.4 G
# operating field.  Stored as a reference constant: the linear-Zeeman model
# below does not reproduce it, and nothing downstream consumes it
# quantitatively.
ZEEMAN_ANHARMONICITY_5P4G = 13.0e3  # Hz


@dataclass(frozen=True)
class InternalState:
    """One internal atomic level, tagged with its role in the three-level scheme."""

    F: int
    mF: int
    band: str = GROUND_BAND
    role: str = ""  # "0", "1" or "2"

    def __post_init__(self):
        if abs(self.mF) > self.F:
            raise ConfigurationError(f"|mF| = {abs(self.mF)} exceeds F = {self.F}")


# Role assignment for the register: the two m_F = 0 levels see no lattice,
# the m_F = -1 level sees it.
STATE_0 = InternalState(F=1, mF=0, role="0")
STATE_1 = InternalState(F=1, mF=-1, role="1")
STATE_2 = InternalState(F=2, mF=0, role="2")
# Excited-band variant used as the exchange-gate intermediate level.
STATE_2_EXCITED = InternalState(F=1, mF=0, band=EXCITED_BAND, role="2")


@dataclass(frozen=True)
class AtomSpecies:
    """Mass, D-line data, hyperfine structure and s-wave scattering lengths.

    ``scattering_lengths`` is a symmetric 3x3 matrix over the role indices
    {0, 1, 2}, in metres.
    """

    name: str
    mass: float                      # kg
    d1_wavelength: float             # m
    d2_wavelength: float             # m
    d1_linewidth: float              # rad/s
    d2_linewidth: float              # rad/s
    hyperfine_splitting: float       # Hz, ground F=1 <-> F=2
    lande_gF: dict = field(default_factory=dict)   # F -> g_F
    scattering_lengths: np.ndarray = None          # m, 3x3

    def __post_init__(self):
        a = np.asarray(self.scattering_lengths, dtype=float)
        if a.shape != (3, 3):
            raise ConfigurationError("scattering_lengths must be a 3x3 matrix")
        if not np.allclose(a, a.T, rtol=0, atol=0):
            raise ConfigurationError("scattering-length matrix must be symmetric")
        if np.any(a <= 0):
            raise ConfigurationError("scattering lengths must be positive")
        object.__setattr__(self, "scattering_lengths", a)

    @property
    def d1_omega(self):
        return 2 * pi * c / self.d1_wavelength

    @property
    def d2_omega(self):
        return 2 * pi * c / self.d2_wavelength

    def a(self, i, j):
        """Scattering length (m) between role states i and j."""
        return self.scattering_lengths[int(i), int(j)]

    def g_int(self, i, j):
        """Contact-interaction constant 4*pi*hbar^2*a_ij/m, in J m^3."""
        return 4 * pi * hbar**2 * self.a(i, j) / self.mass

    def with_overrides(self, **kwargs):
        return replace(self, **kwargs)


def rb87() -> AtomSpecies:
    """87Rb defaults (Steck line data)."""
    return AtomSpecies(
        name="Rb87",
        mass=86.909180527 * u_amu,
        d1_wavelength=794.978851e-9,
        d2_wavelength=780.241209e-9,
        d1_linewidth=2 * pi * 5.7500e6,
        d2_linewidth=2 * pi * 6.0666e6,
        hyperfine_splitting=6.834682610904e9,
        lande_gF={1: -0.501827, 2: 0.499836},
        scattering_lengths=np.array(
            [
                [5.34e-9, 5.31e-9, 5.23e-9],
                [5.31e-9, 5.31e-9, 5.16e-9],
                [5.23e-9, 5.16e-9, 5.00e-9],
            ]
        ),
    )


def zeeman_splitting(B, state_from, state_to, species=None):
    """Transition frequency between two ground-manifold states at field B.

    Linear Zeeman regime (valid for |B| up to a few tens of gauss).  Returns
    the frequency in Hz of the ``state_from -> state_to`` transition:
    positive when the target level lies above the source level.  The ground
    hyperfine splitting is added when the manifolds differ.
    """
    sp = species or rb87()
    for s in (state_from, state_to):
        if s.band != GROUND_BAND:
            raise ConfigurationError(
                f"Zeeman model covers the ground manifold only, got band {s.band!r}"
            )
        if s.F not in sp.lande_gF:
            raise ConfigurationError(f"no Lande factor for F = {s.F}")
    B = abs(float(B))
    e_from = sp.lande_gF[state_from.F] * state_from.mF * mu_B * B / h
    e_to = sp.lande_gF[state_to.F] * state_to.mF * mu_B * B / h
    f = e_to - e_from
    if state_to.F != state_from.F:
        f += math.copysign(sp.hyperfine_splitting, state_to.F - state_from.F)
    return f


def condensation_temperature(N, omega_bar):
    """Ideal-gas condensation temperature (K) in a harmonic trap.

    T_c = (hbar * omega_bar / k_B) * (N / zeta(3))^(1/3).
    """
    if N < 1:
        raise ConfigurationError("atom number must be >= 1")
    if omega_bar <= 0:
        raise ConfigurationError("trap frequency must be positive")
    return hbar * omega_bar / k_B * (N / ZETA3) ** (1.0 / 3.0)


def condensate_fraction(T, T_c):
    """Condensed fraction 1 - (T/T_c)^3, clamped to [0, 1]."""
    if T_c <= 0:
        raise ConfigurationError("T_c must be positive")
    if T < 0:
        raise ConfigurationError("temperature must be non-negative")
    return float(np.clip(1.0 - (T / T_c) ** 3, 0.0, 1.0))


@dataclass(frozen=True)
class CondensateThermodynamics:
    """Atom-number bookkeeping of a partially condensed harmonic-trap gas."""

    total_number: float
    temperature: float        # K
    omega_bar: float          # rad/s
    condensation_temperature: float  # K
    condensed_number: float
    thermal_number: float

    @classmethod
    def from_conditions(cls, N, T, omega_bar):
        T_c = condensation_temperature(N, omega_bar)
        f0 = condensate_fraction(T, T_c)
        return cls(
            total_number=N,
            temperature=T,
            omega_bar=omega_bar,
            condensation_temperature=T_c,
            condensed_number=f0 * N,
            thermal_number=(1.0 - f0) * N,
        )


def ho_level_degeneracy(n):
    """Number of 3D oscillator states with total quanta n: (n+1)(n+2)/2."""
    n = int(n)
    return (n + 1) * (n + 2) // 2


def ho_states_through(Q):
    """Cumulative 3D oscillator state count for quanta 0..Q: (Q+1)(Q+2)(Q+3)/6."""
    Q = int(Q)
    return (Q + 1) * (Q + 2) * (Q + 3) // 6


def thermal_level_occupation(level_energy, T):
    """Bose-Einstein occupation of one excited trap state.

    ``level_energy`` is the state's energy above the ground level in rad/s;
    the chemical potential sits at the ground level (condensed phase).
    """
    if level_energy <= 0:
        raise ConfigurationError(
            "level energy must be positive; the condensate mode is counted separately"
        )
    if T < 0:
        raise ConfigurationError("temperature must be non-negative")
    if T == 0:
        return 0.0
    x = hbar * level_energy / (k_B * T)
    return 1.0 / math.expm1(x)


def thermal_level_population(n, omega, T):
    """Degeneracy-weighted occupation of the full 3D level with quanta n."""
    return ho_level_degeneracy(n) * thermal_level_occupation(n * omega, T)
