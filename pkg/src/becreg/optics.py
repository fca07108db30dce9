"""Dipole and lattice potentials from beam parameters.

All potentials are returned as angular frequencies (rad/s = energy/hbar).
The two-line AC-Stark formula is evaluated with per-D-line prefactors by
default (``per_line=True``); the single-prefactor mode reproduces the common
textbook form in which Gamma/omega0^3 is shared between both lines.
"""

from dataclasses import dataclass, field

import numpy as np

from .constants import hbar, c, pi
from .atomdata import AtomSpecies, InternalState, rb87, GROUND_BAND, STATE_0, STATE_1, STATE_2
from .errors import ConfigurationError, FitError

_AXES = {"x": 0, "y": 1, "z": 2}


def _axis_index(axis):
    try:
        return _AXES[axis]
    except KeyError:
        raise ConfigurationError(f"axis must be one of x, y, z; got {axis!r}")


def line_prefactors(species, per_line=True):
    """(A1, A2) with A_l = pi c^2 Gamma_l / (2 omega_l^3), in J m^2 W^-1... per intensity."""
    a1 = pi * c**2 * species.d1_linewidth / (2 * species.d1_omega**3)
    a2 = pi * c**2 * species.d2_linewidth / (2 * species.d2_omega**3)
    if not per_line:
        a = 0.5 * (a1 + a2)
        return a, a
    return a1, a2


def detunings(wavelength, species):
    """Laser detunings (rad/s) from the D1 and D2 lines; rejects exact resonance."""
    w = 2 * pi * c / wavelength
    d1 = w - species.d1_omega
    d2 = w - species.d2_omega
    if d1 == 0 or d2 == 0:
        raise ConfigurationError("beam is resonant with a D line")
    return d1, d2


def _gFmF(state, species):
    if state.band != GROUND_BAND:
        raise ConfigurationError("dipole potentials are modelled for ground-band states only")
    return species.lande_gF[state.F] * state.mF


@dataclass(frozen=True)
class BeamSpec:
    """A single far-detuned Gaussian beam.

    ``waists`` maps the two transverse axes to their 1/e^2 intensity radii;
    the beam propagates along ``axis``.  ``polarization`` is 0 for linear
    and +-1 for sigma+- circular light.
    """

    wavelength: float            # m
    power: float                 # W
    axis: str                    # propagation axis: 'x' | 'y' | 'z'
    waists: dict                 # e.g. {'y': 90e-6, 'z': 120e-6}
    polarization: int = 0

    def __post_init__(self):
        _axis_index(self.axis)
        if self.power < 0:
            raise ConfigurationError("beam power must be >= 0")
        if set(self.waists) != set(_AXES) - {self.axis}:
            raise ConfigurationError(
                f"waists must cover the two axes transverse to {self.axis!r}"
            )
        if any(w <= 0 for w in self.waists.values()):
            raise ConfigurationError("waists must be positive")
        if self.polarization not in (-1, 0, 1):
            raise ConfigurationError("polarization must be -1, 0 or +1")

    @property
    def peak_intensity(self):
        ws = list(self.waists.values())
        return 2 * self.power / (pi * ws[0] * ws[1])

    def intensity(self, r):
        """Intensity (W/m^2) at position(s) r, shape (..., 3).

        Ideal astigmatic Gaussian evaluated at the waist plane; axial
        divergence is neglected (Rayleigh ranges here are centimetres).
        """
        r = np.asarray(r, dtype=float)
        arg = np.zeros(r.shape[:-1])
        for ax, w in self.waists.items():
            arg = arg + 2 * r[..., _axis_index(ax)] ** 2 / w**2
        return self.peak_intensity * np.exp(-arg)


def dipole_potential(beam, r, state, species=None, per_line=True):
    """Single-beam AC-Stark potential (rad/s) for a ground-manifold state.

    Two-line form with polarization weights (2 + P gF mF) on D2 and
    (1 - P gF mF) on D1.
    """
    sp = species or rb87()
    a1, a2 = line_prefactors(sp, per_line)
    d1, d2 = detunings(beam.wavelength, sp)
    g = _gFmF(state, sp)
    p = beam.polarization
    coeff = a2 * (2 + p * g) / d2 + a1 * (1 - p * g) / d1  # J per (W/m^2)
    return coeff * beam.intensity(r) / hbar


@dataclass(frozen=True)
class LatticeSpec:
    """Geometry and depth of one sinusoidal lattice axis."""

    wavelength: float       # m
    half_angle: float       # rad, half the beam intersection angle phi/2
    k_eff: float            # 1/m
    spacing: float          # m
    depth: float = 0.0      # rad/s, peak-to-trough for the lattice-bound state


def lattice_geometry(wavelength, phi):
    """LatticeSpec from beam wavelength and intersection angle phi.

    The effective wavevector is (2 pi / lambda) sin(phi/2); spacing is
    pi / k_eff = lambda / (2 sin(phi/2)).
    """
    if not 0 < phi <= pi:
        raise ConfigurationError("intersection angle must lie in (0, pi]")
    k_eff = (2 * pi / wavelength) * np.sin(phi / 2)
    return LatticeSpec(
        wavelength=wavelength,
        half_angle=phi / 2,
        k_eff=k_eff,
        spacing=pi / k_eff,
    )


def angle_for_spacing(wavelength, spacing):
    """Intersection angle phi that produces the requested lattice spacing."""
    s = wavelength / (2 * spacing)
    if not 0 < s <= 1:
        raise ConfigurationError(
            f"spacing {spacing} unreachable at wavelength {wavelength}"
        )
    return 2 * np.arcsin(s)


@dataclass(frozen=True)
class LatticeBeamPair:
    """Two nearly counterpropagating linearly polarized beams along one axis.

    One beam's polarization is rotated by ``theta`` relative to its partner;
    ``phi`` is the intersection angle (pi for exactly counterpropagating).
    """

    wavelength: float        # m
    power_per_beam: float    # W
    waist: float             # m, same in both transverse directions
    axis: str
    theta: float             # rad
    phi: float = pi          # rad

    def __post_init__(self):
        _axis_index(self.axis)
        if self.power_per_beam < 0:
            raise ConfigurationError("beam power must be >= 0")
        if self.waist <= 0:
            raise ConfigurationError("waist must be positive")
        if not 0 < self.phi <= pi:
            raise ConfigurationError("intersection angle must lie in (0, pi]")

    @property
    def peak_intensity(self):
        return 2 * self.power_per_beam / (pi * self.waist**2)

    @property
    def geometry(self):
        return lattice_geometry(self.wavelength, self.phi)

    def envelope(self, r):
        """Transverse Gaussian envelope of the pair (unit peak)."""
        r = np.asarray(r, dtype=float)
        arg = np.zeros(r.shape[:-1])
        for ax in _AXES:
            if ax != self.axis:
                arg = arg + 2 * r[..., _axis_index(ax)] ** 2 / self.waist**2
        return np.exp(-arg)


def lattice_pair_potential(pair, r, state, B, species=None, per_line=True):
    """Interference potential (rad/s) of one lattice beam pair.

    Scalar part  ~ (2/D2 + 1/D1)(1 + cos(theta) cos(2 k x))
    vector part  ~ gF mF (1/D2 - 1/D1)(khat . Bhat) sin(theta) sin(2 k x),
    with k replaced by k sin(phi/2) for a non-collinear pair.  ``B`` is the
    magnetic-field vector (T); it only enters through its direction.
    """
    sp = species or rb87()
    a1, a2 = line_prefactors(sp, per_line)
    d1, d2 = detunings(pair.wavelength, sp)
    g = _gFmF(state, sp)
    B = np.asarray(B, dtype=float)
    bnorm = np.linalg.norm(B)
    if g != 0 and bnorm == 0 and pair.theta != 0:
        raise ConfigurationError("spin-dependent lattice term requires a nonzero B field")
    k_dot_b = 0.0 if bnorm == 0 else B[_axis_index(pair.axis)] / bnorm

    r = np.asarray(r, dtype=float)
    x = r[..., _axis_index(pair.axis)]
    karg = 2 * pair.geometry.k_eff * x
    i0 = pair.peak_intensity * pair.envelope(r)
    scalar = 2 * (a2 * 2 / d2 + a1 / d1) * (1 + np.cos(pair.theta) * np.cos(karg))
    vector = 2 * g * (a2 / d2 - a1 / d1) * k_dot_b * np.sin(pair.theta) * np.sin(karg)
    return i0 * (scalar + vector) / hbar


def lattice_depth(pair, state, B, species=None, per_line=True, samples=720):
    """Peak-to-trough depth (rad/s) of the pair's potential at the beam centre."""
    spec = pair.geometry
    x = np.linspace(0, spec.spacing, samples, endpoint=False)
    r = np.zeros((samples, 3))
    r[:, _axis_index(pair.axis)] = x
    v = lattice_pair_potential(pair, r, state, B, species, per_line)
    return float(v.max() - v.min())


@dataclass(frozen=True)
class TrapFit:
    """Result of a quadratic fit to a trap minimum."""

    omegas: np.ndarray       # rad/s, per axis
    omega_bar: float         # geometric mean
    anisotropy: float        # (max - min) / mean


def fit_harmonic_frequency(potential, center, mass, step=1.0e-6):
    """Per-axis curvature frequencies of a potential minimum.

    ``potential`` maps positions (.., 3) to rad/s.  Central second
    differences with the documented step (default 1 um) give
    omega_l = sqrt(hbar V''_l / m).
    """
    center = np.asarray(center, dtype=float)
    omegas = np.zeros(3)
    v0 = float(potential(center))
    for ax in range(3):
        dr = np.zeros(3)
        dr[ax] = step
        vpp = (float(potential(center + dr)) - 2 * v0 + float(potential(center - dr))) / step**2
        if vpp <= 0:
            raise FitError(f"non-positive curvature along axis {ax}")
        omegas[ax] = np.sqrt(hbar * vpp / mass)
    omega_bar = float(np.prod(omegas) ** (1.0 / 3.0))
    anisotropy = float((omegas.max() - omegas.min()) / omegas.mean())
    return TrapFit(omegas=omegas, omega_bar=omega_bar, anisotropy=anisotropy)


@dataclass(frozen=True)
class TrapConfig:
    """Full optical configuration: harmonic-trap beams, lattice pairs, B field."""

    species: AtomSpecies
    ho_beams: tuple
    lattice_pairs: tuple
    bfield: np.ndarray        # T, 3-vector
    per_line: bool = True

    def __post_init__(self):
        axes = sorted(p.axis for p in self.lattice_pairs)
        if self.lattice_pairs and axes != sorted(set(axes)):
            raise ConfigurationError("lattice pairs must lie on distinct axes")
        object.__setattr__(self, "bfield", np.asarray(self.bfield, dtype=float))

    def ho_potential(self, r, state):
        """Sum of the harmonic-trap beams' dipole potentials (superposition)."""
        total = np.zeros(np.shape(np.asarray(r))[:-1])
        for beam in self.ho_beams:
            total = total + dipole_potential(beam, r, state, self.species, self.per_line)
        return total

    def lattice_potential(self, r, state):
        total = np.zeros(np.shape(np.asarray(r))[:-1])
        for pair in self.lattice_pairs:
            total = total + lattice_pair_potential(
                pair, r, state, self.bfield, self.species, self.per_line
            )
        return total

    def total_potential(self, r, state):
        return self.ho_potential(r, state) + self.lattice_potential(r, state)

    def trap_fit(self, state=STATE_0, step=1.0e-6):
        return fit_harmonic_frequency(
            lambda r: self.ho_potential(r, state), np.zeros(3), self.species.mass, step
        )

    def lattice_spec(self, state=STATE_1):
        """Geometry plus measured depth of the first lattice pair."""
        pair = self.lattice_pairs[0]
        spec = pair.geometry
        depth = lattice_depth(pair, state, self.bfield, self.species, self.per_line)
        return LatticeSpec(
            wavelength=spec.wavelength,
            half_angle=spec.half_angle,
            k_eff=spec.k_eff,
            spacing=spec.spacing,
            depth=depth,
        )


def reference_trap(species=None) -> TrapConfig:
    """The default operating configuration.

    Two crossed 808 nm / 100 mW beams (waists chosen for an isotropic
    2 pi x 100 Hz trap), three 790 nm / 67 mW lattice pairs intersecting at
    the angle that gives 532 nm spacing, and a 5.40 G field with equal
    components along the three lattice axes.
    """
    sp = species or rb87()
    ho = (
        BeamSpec(wavelength=808e-9, power=0.100, axis="x",
                 waists={"y": 90e-6, "z": 120e-6}),
        BeamSpec(wavelength=808e-9, power=0.100, axis="y",
                 waists={"x": 87.3e-6, "z": 132e-6}),
    )
    phi = angle_for_spacing(790e-9, 532e-9)
    pairs = tuple(
        LatticeBeamPair(wavelength=790e-9, power_per_beam=0.067, waist=150e-6,
                        axis=ax, theta=pi / 2, phi=phi)
        for ax in ("x", "y", "z")
    )
    b = 5.40e-4 / np.sqrt(3.0) * np.ones(3)  # T, equal components
    return TrapConfig(species=sp, ho_beams=ho, lattice_pairs=pairs, bfield=b)


def potential_grid(config, extent, n, states=(STATE_0, STATE_1, STATE_2)):
    """Sample the total potential for each role state on a cubic grid.

    Returns (points, columns) where points has shape (n^3, 3) and columns is
    a dict role -> rad/s values.  Used by the CSV export in the CLI.
    """
    axis = np.linspace(-extent, extent, n)
    xs, ys, zs = np.meshgrid(axis, axis, axis, indexing="ij")
    pts = np.stack([xs.ravel(), ys.ravel(), zs.ravel()], axis=-1)
    cols = {s.role: config.total_potential(pts, s) for s in states}
    return pts, cols
