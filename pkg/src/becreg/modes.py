"""Single-particle spatial modes.

Three families, all unit-normalized in 3D:
  * ThomasFermiState -- inverted-parabola condensate profile,
  * WannierState     -- ground-band lattice orbital from a 1D Bloch solve,
                        separable across the three lattice axes,
  * HOEigenstate     -- 3D harmonic-oscillator eigenfunctions.
"""

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.interpolate import CubicSpline

from .constants import hbar, pi
from .atomdata import ho_level_degeneracy, ho_states_through
from .errors import CapabilityError, ConfigurationError, NumericalError

MAX_STABLE_QUANTA = 700  # hermite recurrence verified overflow-free up to here


# ---------------------------------------------------------------------------
# harmonic-oscillator eigenfunctions
# ---------------------------------------------------------------------------

def hermite_function(n, xi):
    """Normalized 1D oscillator eigenfunction h_n(xi), dimensionless argument.

    Upward recurrence on the normalized functions; safe against overflow for
    n <= MAX_STABLE_QUANTA (values beyond the classical turning point of the
    highest verified state underflow harmlessly to zero).
    """
    if n > MAX_STABLE_QUANTA:
        raise CapabilityError(f"quanta {n} beyond the stability-tested range")
    xi = np.asarray(xi, dtype=float)
    h_prev = pi**-0.25 * np.exp(-(xi**2) / 2)
    if n == 0:
        return h_prev
    h = np.sqrt(2.0) * xi * h_prev
    for m in range(2, n + 1):
        h, h_prev = np.sqrt(2.0 / m) * xi * h - np.sqrt((m - 1) / m) * h_prev, h
    return h


def hermite_function_rows(nmax, xi):
    """Yield (n, h_n(xi)) for n = 0..nmax with O(1) row memory."""
    if nmax > MAX_STABLE_QUANTA:
        raise CapabilityError(f"quanta {nmax} beyond the stability-tested range")
    xi = np.asarray(xi, dtype=float)
    h_prev = pi**-0.25 * np.exp(-(xi**2) / 2)
    yield 0, h_prev
    if nmax == 0:
        return
    h = np.sqrt(2.0) * xi * h_prev
    yield 1, h
    for m in range(2, nmax + 1):
        h, h_prev = np.sqrt(2.0 / m) * xi * h - np.sqrt((m - 1) / m) * h_prev, h
        yield m, h


@dataclass(frozen=True)
class HOEigenstate:
    """3D oscillator eigenstate with quantum numbers n = (nx, ny, nz)."""

    n: tuple
    omega: float      # rad/s
    mass: float       # kg

    def __post_init__(self):
        if any(m < 0 for m in self.n):
            raise ConfigurationError("quantum numbers must be non-negative")
        if sum(self.n) > MAX_STABLE_QUANTA:
            raise CapabilityError(f"total quanta {sum(self.n)} beyond stable range")

    @property
    def length(self):
        return np.sqrt(hbar / (self.mass * self.omega))

    @property
    def energy(self):
        """(nx + ny + nz + 3/2) * omega, in rad/s."""
        return (sum(self.n) + 1.5) * self.omega

    @property
    def parity(self):
        return -1 if sum(self.n) % 2 else 1

    def psi(self, r):
        r = np.asarray(r, dtype=float)
        a = self.length
        out = np.ones(r.shape[:-1])
        for ax in range(3):
            out = out * hermite_function(self.n[ax], r[..., ax] / a)
        return out / a**1.5


def ho_eigenfunction(n, omega, mass):
    return HOEigenstate(n=tuple(int(m) for m in n), omega=omega, mass=mass)


# re-exported counting helpers (used by the exchange-gate mode sums)
state_count_through = ho_states_through
level_degeneracy = ho_level_degeneracy


# ---------------------------------------------------------------------------
# Thomas-Fermi condensate profile
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ThomasFermiState:
    """Inverted-parabola condensate mode, unit L2 norm."""

    N: float
    mass: float
    omega: float          # rad/s, isotropic trap
    a_scatt: float        # m
    mu: float             # rad/s
    radius: float         # m
    tf_parameter: float   # 15 N a / abar; validity flag below
    tf_valid: bool

    @property
    def g_int(self):
        return 4 * pi * hbar**2 * self.a_scatt / self.mass

    @property
    def peak_phi2(self):
        """|phi(0)|^2 = 15 / (8 pi R^3), in m^-3."""
        return 15.0 / (8 * pi * self.radius**3)

    def phi(self, r):
        """Mode amplitude (m^-3/2); zero outside the radius."""
        r = np.asarray(r, dtype=float)
        r2 = np.sum(r**2, axis=-1)
        return np.sqrt(self.peak_phi2 * np.clip(1.0 - r2 / self.radius**2, 0.0, None))

    def phi_radial(self, rad):
        rad = np.asarray(rad, dtype=float)
        return np.sqrt(self.peak_phi2 * np.clip(1.0 - rad**2 / self.radius**2, 0.0, None))

    def density_overlap_self(self):
        """integral |phi|^4 = (15/14) / (pi R^3), closed form."""
        return 15.0 / (14 * pi * self.radius**3)


def solve_thomas_fermi(N, species_or_a, omega, mass=None):
    """Thomas-Fermi ground state of an isotropic harmonic trap.

    mu = (hbar omega / 2) (15 N a / abar)^(2/5),  R = abar (15 N a / abar)^(1/5).
    Accepts either an AtomSpecies (uses the role-0 scattering length and its
    mass) or an explicit scattering length plus ``mass``.
    """
    if hasattr(species_or_a, "scattering_lengths"):
        a = species_or_a.a(0, 0)
        m = species_or_a.mass
    else:
        a = float(species_or_a)
        if mass is None:
            raise ConfigurationError("mass required when passing a bare scattering length")
        m = mass
    if N < 1 or omega <= 0 or a <= 0:
        raise ConfigurationError("need N >= 1, omega > 0, a > 0")
    abar = np.sqrt(hbar / (m * omega))
    chi = 15 * N * a / abar
    mu = 0.5 * omega * chi**0.4          # rad/s
    radius = abar * chi**0.2
    return ThomasFermiState(
        N=N, mass=m, omega=omega, a_scatt=a,
        mu=mu, radius=radius, tf_parameter=chi,
        tf_valid=bool(chi > 100.0),
    )


# ---------------------------------------------------------------------------
# lattice band structure and Wannier functions
# ---------------------------------------------------------------------------

def _bloch_bands(s, cutoff, qs):
    """Lowest two bands (units of E_R) and ground-band plane-wave coefficients.

    Potential (V/2)(1 - cos 2kx) with s = V_peak_to_trough / E_R; plane waves
    exp(i (q + 2m) x) with x in units of 1/k_eff.
    """
    G = 2 * np.arange(-cutoff, cutoff + 1)
    n = len(G)
    e0 = np.empty(len(qs))
    e1 = np.empty(len(qs))
    coeffs = np.empty((len(qs), n))
    off = -s / 4 * np.ones(n - 1)
    for i, q in enumerate(qs):
        hmat = np.diag((q + G) ** 2 + s / 2) + np.diag(off, 1) + np.diag(off, -1)
        vals, vecs = np.linalg.eigh(hmat)
        e0[i], e1[i] = vals[0], vals[1]
        v = vecs[:, 0]
        amp0 = v.sum()  # Bloch amplitude at x = 0
        if amp0 < 0:
            v = -v
        coeffs[i] = v
    return e0, e1, coeffs, G


@dataclass(frozen=True)
class Wannier1D:
    """Ground-band Wannier function of one lattice axis, real and even."""

    depth: float          # rad/s, peak-to-trough
    k_eff: float          # 1/m
    mass: float
    cutoff: int
    recoil: float         # rad/s
    j_tunneling: float    # rad/s
    band_gap: float       # rad/s
    half_width: float     # m, evaluation support
    _spline: CubicSpline = field(repr=False)
    int_w: float          # m^(1/2)
    int_w4: float         # 1/m
    x2_w2: float          # m^2, second moment of |w|^2
    x2_w: float           # m^(5/2), integral x^2 w(x) dx

    def w(self, x):
        """Wannier amplitude (m^-1/2) at displacement x from the site centre."""
        x = np.asarray(x, dtype=float)
        out = np.zeros_like(x)
        inside = np.abs(x) < self.half_width
        if np.any(inside):
            out[inside] = self._spline(x[inside])
        return out

    @property
    def site_frequency(self):
        """Harmonic frequency of one site, 2 sqrt(depth * recoil), rad/s."""
        return 2 * np.sqrt(self.depth * self.recoil)


@lru_cache(maxsize=16)
def solve_wannier_1d(depth, k_eff, mass, cutoff=25, nq=401):
    """Solve the 1D band problem and build the maximally localized Wannier state.

    The Bloch phases are fixed so each ground-band function is real and
    positive at the site centre, which makes the q-average real, even, and
    centred (zero mean displacement).  Raises NumericalError if enlarging the
    plane-wave basis moves the band energies by more than 1e-6 relative.
    """
    if depth <= 0:
        raise ConfigurationError("lattice depth must be positive")
    if cutoff < 15:
        raise ConfigurationError("plane-wave cutoff below the supported minimum (15)")
    recoil = hbar * k_eff**2 / (2 * mass)   # rad/s
    s = depth / recoil
    qs = np.linspace(-1.0, 1.0, nq)
    e0, e1, coeffs, G = _bloch_bands(s, cutoff, qs)
    e0b, e1b, _, _ = _bloch_bands(s, cutoff + 8, qs[:: max(1, nq // 16)])
    scale = np.abs(e1b).max()
    drift = max(
        np.abs(e0[:: max(1, nq // 16)] - e0b).max(),
        np.abs(e1[:: max(1, nq // 16)] - e1b).max(),
    ) / scale
    if drift > 1e-6:
        raise NumericalError(f"band structure not converged: cutoff drift {drift:.2e}")

    j_tun = (e0.max() - e0.min()) / 4 * recoil
    gap = (e1 - e0).min() * recoil

    # superpose Bloch waves on a fine grid (lattice units x*k_eff)
    half_sites = 5
    x_lu = np.linspace(-half_sites * pi, half_sites * pi, 12001)
    wgt = np.ones(nq)
    wgt[0] = wgt[-1] = 0.5   # q = +-1 are the same zone-boundary state
    kappa = qs[:, None] + G[None, :]          # (nq, nG)
    amp = coeffs * wgt[:, None]
    w_vals = np.zeros_like(x_lu)
    for i in range(nq):
        w_vals += amp[i] @ np.cos(np.outer(kappa[i], x_lu))
    norm = np.sqrt(np.trapezoid(w_vals**2, x_lu))
    w_vals /= norm

    # convert to SI: x = x_lu / k_eff, w_SI = w_lu * sqrt(k_eff)
    x_si = x_lu / k_eff
    w_si = w_vals * np.sqrt(k_eff)
    spline = CubicSpline(x_si, w_si, extrapolate=False)
    return Wannier1D(
        depth=depth, k_eff=k_eff, mass=mass, cutoff=cutoff, recoil=recoil,
        j_tunneling=j_tun, band_gap=gap,
        half_width=x_si[-1],
        _spline=spline,
        int_w=float(np.trapezoid(w_si, x_si)),
        int_w4=float(np.trapezoid(w_si**4, x_si)),
        x2_w2=float(np.trapezoid(x_si**2 * w_si**2, x_si)),
        x2_w=float(np.trapezoid(x_si**2 * w_si, x_si)),
    )


@dataclass(frozen=True)
class WannierState:
    """Separable 3D Wannier orbital at one lattice site."""

    axis_solution: Wannier1D
    site_index: tuple       # e.g. (4.5, 4.5, 4.5), in units of the spacing
    spacing: float          # m

    @property
    def position(self):
        return np.asarray(self.site_index, dtype=float) * self.spacing

    @property
    def band_gap(self):
        return self.axis_solution.band_gap

    @property
    def j_tunneling(self):
        return self.axis_solution.j_tunneling

    def w(self, r):
        """3D amplitude (m^-3/2) at absolute position r."""
        r = np.asarray(r, dtype=float)
        pos = self.position
        out = np.ones(r.shape[:-1])
        for ax in range(3):
            out = out * self.axis_solution.w(r[..., ax] - pos[ax])
        return out


def solve_wannier(depth, k_eff, mass, site_index=(0.0, 0.0, 0.0), cutoff=25):
    """WannierState at the given site (indices in units of the spacing)."""
    w1 = solve_wannier_1d(float(depth), float(k_eff), float(mass), int(cutoff))
    return WannierState(axis_solution=w1, site_index=tuple(site_index), spacing=pi / k_eff)


# ---------------------------------------------------------------------------
# quadrature helpers
# ---------------------------------------------------------------------------

@lru_cache(maxsize=32)
def _leggauss(n):
    return np.polynomial.legendre.leggauss(n)


def gauss_legendre_panels(a, b, panels, order=24):
    """Composite Gauss-Legendre nodes/weights on [a, b]."""
    x0, w0 = _leggauss(order)
    edges = np.linspace(a, b, panels + 1)
    half = 0.5 * (edges[1:] - edges[:-1])
    mid = 0.5 * (edges[1:] + edges[:-1])
    nodes = (mid[:, None] + half[:, None] * x0[None, :]).ravel()
    weights = (half[:, None] * w0[None, :]).ravel()
    return nodes, weights
