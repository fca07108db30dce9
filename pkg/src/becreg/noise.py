"""Atom-loss combinatorics, the lifetime budget, and first-order sensitivity
propagation for shot noise and field noise.
"""

import itertools
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .constants import hbar, h, mu_B, pi
from .errors import CapabilityError, ConfigurationError, NumericalError
from . import atomdata, hubbard
from .optics import lattice_depth, detunings

# Channel lifetimes (s) quoted from external measurements; no reproducible
# formula ships with them, so they are plain overridable constants.
DEFAULT_LIFETIMES = {
    "lattice_momentum_diffusion": 4.99,
    "background_collisions": 5.0,
    "three_body": 18.3,
}


# ---------------------------------------------------------------------------
# loss combinatorics
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class LossModel:
    """Ensemble size, excited-qubit count, and loss count."""

    ensemble: int      # N
    excited: int       # m
    losses: int        # eta

    def __post_init__(self):
        if self.excited < 0 or self.losses < 0:
            raise ConfigurationError("counts must be non-negative")
        if self.losses >= self.ensemble:
            raise ConfigurationError("losses must be smaller than the ensemble")


def loss_probability(N, m, eta, mode="full"):
    """Probability that losing eta of N atoms destroyed stored information.

    full:   1 - P(N-eta, m)/P(N, m) = 1 - prod_{j<m} (1 - eta/(N-j)),
            evaluated as a log-space sum (no factorial overflow),
    approx: 1 - (1 - eta/N)^m, the large-N form.
    """
    LossModel(ensemble=int(N), excited=int(m), losses=int(eta))
    if m > N:
        raise ConfigurationError("cannot excite more qubits than atoms")
    if eta == 0 or m == 0:
        return 0.0
    if mode == "full":
        if N - eta < m:
            return 1.0  # too few survivors to avoid every occupied site
        j = np.arange(m)
        return float(-np.expm1(np.sum(np.log1p(-eta / (N - j)))))
    if mode == "approx":
        return float(-np.expm1(m * np.log1p(-eta / N)))
    raise ConfigurationError(f"unknown mode {mode!r}")


def loss_bruteforce_oracle(N, m, eta):
    """Exact rational loss probability by enumerating all m-permutations.

    Counts the assignments of distinguishable atoms to the m occupied sites
    in which any of the first eta atoms appears.  Exchange symmetry makes
    the choice of which eta atoms are removed irrelevant.  Capped at N <= 10.
    """
    if N > 10:
        raise CapabilityError("brute-force oracle is capped at N <= 10")
    LossModel(ensemble=N, excited=m, losses=eta)
    if m > N:
        raise ConfigurationError("cannot excite more qubits than atoms")
    if m == 0 or eta == 0:
        return Fraction(0)
    total = 0
    hit = 0
    lost = set(range(eta))
    for perm in itertools.permutations(range(N), m):
        total += 1
        if lost & set(perm):
            hit += 1
    return Fraction(hit, total)


def loss_dataset(N, m, eta_grid=None):
    """(eta, P_full, P_approx) rows over a log-spaced loss grid."""
    if eta_grid is None:
        eta_grid = np.unique(np.concatenate([
            [0],
            np.logspace(0, np.log10(N - 1), 120).astype(int),
        ]))
    rows = []
    for eta in eta_grid:
        rows.append((
            int(eta),
            loss_probability(N, m, int(eta), "full"),
            loss_probability(N, m, int(eta), "approx"),
        ))
    return rows


# ---------------------------------------------------------------------------
# lifetime budget
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class LifetimeBudget:
    """Named 1/e lifetimes (s) and their combined loss rate."""

    channels: dict      # name -> lifetime (s)

    def __post_init__(self):
        if any(v <= 0 for v in self.channels.values()):
            raise ConfigurationError("lifetimes must be positive")

    @property
    def combined_rate(self):
        return sum(1.0 / v for v in self.channels.values())

    @property
    def combined_lifetime(self):
        return 1.0 / self.combined_rate


def photon_scattering_lifetime(trap_config, state=None):
    """Lattice photon-scattering-limited 1/e lifetime (s).

    Two-level estimate at the register-site depth: the scattering rate is
    Gamma_D1 * (depth / detuning_D1), the standard far-detuned relation
    between potential and scattering for the line that dominates the
    spin-dependent depth.
    """
    from .atomdata import STATE_1

    st = state or STATE_1
    pair = trap_config.lattice_pairs[0]
    depth = lattice_depth(pair, st, trap_config.bfield, trap_config.species,
                          trap_config.per_line)
    d1, _ = detunings(pair.wavelength, trap_config.species)
    rate = trap_config.species.d1_linewidth * depth / abs(d1)
    return 1.0 / rate


def lifetime_budget(trap_config, overrides=None):
    """Four-channel loss budget for the default configuration."""
    channels = dict(DEFAULT_LIFETIMES)
    channels["lattice_photon_scattering"] = photon_scattering_lifetime(trap_config)
    if overrides:
        unknown = set(overrides) - set(channels)
        if unknown:
            raise ConfigurationError(f"unknown lifetime channels: {sorted(unknown)}")
        channels.update(overrides)
    return LifetimeBudget(channels=channels)


# ---------------------------------------------------------------------------
# sensitivity propagation
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SensitivityRow:
    parameter: str
    nominal: float
    nominal_unit: str
    delta: float
    quantity: str
    propagated: float
    unit: str
    formula_path: str
    reference_value: float = None   # externally quoted figure, when one exists

    def as_tuple(self):
        return (self.parameter, self.nominal, self.nominal_unit, self.delta,
                self.quantity, self.propagated, self.unit, self.formula_path,
                self.reference_value)


@dataclass(frozen=True)
class SensitivityReport:
    rows: tuple

    def __iter__(self):
        return iter(self.rows)

    def by_quantity(self, name):
        out = [r for r in self.rows if r.quantity == name]
        if not out:
            raise KeyError(name)
        return out[0]


def _central_difference(f, x, dx):
    fp, fm = f(x + dx), f(x - dx)
    if not np.isfinite(fp) or not np.isfinite(fm):
        raise NumericalError("finite-difference evaluation failed")
    return (fp - fm) / (2 * dx)


def sqrtN_rabi_sensitivity(rabi_effective, n0, delta_n=None):
    """Shot-noise uncertainty of the ensemble-enhanced Rabi rate (rad/s).

    Finite difference of sqrt(N0) * Omega01 against N0 with dN0 = sqrt(N0);
    the analytic slope is rabi / (2 N0).
    """
    dn = delta_n if delta_n is not None else np.sqrt(n0)
    omega01 = rabi_effective / np.sqrt(n0)
    fd = _central_difference(lambda n: np.sqrt(n) * omega01, n0, max(1.0, n0 * 1e-6))
    return abs(fd) * dn, abs(rabi_effective / (2 * n0)) * dn


def sensitivity_report(u, trap_config, n_atoms, rabi_effective,
                       omega_pair, delta_star, site_position_offset=0.1,
                       eta_fc_fn=None):
    """First-order propagation through the actual computation chains.

    Covers: sqrt(N) shot noise into the ensemble Rabi rate and the register
    transition frequency, magnetic-field noise, lattice polarization-angle
    and intensity noise into the site spectrum, the condensation-temperature
    drop under a 1:5 population transfer, shot noise into the bus transfer
    fraction, and the lattice-drift bound on the Rabi reduction.
    """
    sp = trap_config.species
    rows = []

    # --- sqrt(N) shot noise -> ensemble Rabi rate
    dn = np.sqrt(n_atoms)
    fd_rabi, analytic = sqrtN_rabi_sensitivity(rabi_effective, n_atoms)
    rows.append(SensitivityRow(
        parameter="atom number N", nominal=n_atoms, nominal_unit="atoms",
        delta=dn, quantity="ensemble Rabi rate",
        propagated=fd_rabi, unit="rad/s",
        formula_path="d(sqrt(N0) Omega01)/dN0 * sqrt(N0), central difference",
        reference_value=0.376,
    ))
    rows.append(SensitivityRow(
        parameter="atom number N", nominal=n_atoms, nominal_unit="atoms",
        delta=dn, quantity="ensemble Rabi rate (analytic)",
        propagated=analytic, unit="rad/s",
        formula_path="Rabi/(2 N0) * sqrt(N0)",
    ))

    # --- sqrt(N) shot noise -> register transition frequency
    # dominant term: collisional shift of the filled site against the bus,
    # d(U01 (N0-1))/dN0 * sqrt(N0)
    fd_trans = _central_difference(lambda n: u["01"] * (n - 1), n_atoms,
                                   max(1.0, n_atoms * 1e-6)) * dn
    rows.append(SensitivityRow(
        parameter="atom number N", nominal=n_atoms, nominal_unit="atoms",
        delta=dn, quantity="transition frequency (site-bus collisional shift)",
        propagated=abs(fd_trans), unit="rad/s",
        formula_path="d(U01 (N0-1))/dN0 * sqrt(N0)",
        reference_value=28.7,
    ))
    # full two-state diagonal difference, for comparison
    fd_full = _central_difference(
        lambda n: (u["00"] - u["01"]) * (n - 1), n_atoms, max(1.0, n_atoms * 1e-6)
    ) * dn
    rows.append(SensitivityRow(
        parameter="atom number N", nominal=n_atoms, nominal_unit="atoms",
        delta=dn, quantity="transition frequency (full diagonal difference)",
        propagated=abs(fd_full), unit="rad/s",
        formula_path="d((U00-U01)(N0-1))/dN0 * sqrt(N0)",
    ))

    # --- magnetic-field noise -> qubit transition frequency (true Hz)
    b0 = float(np.linalg.norm(trap_config.bfield))
    db = 4.3e-9  # T
    fd_b = _central_difference(
        lambda b: atomdata.zeeman_splitting(b, atomdata.STATE_0, atomdata.STATE_1, sp),
        b0, b0 * 1e-6,
    ) * db
    rows.append(SensitivityRow(
        parameter="magnetic field", nominal=b0, nominal_unit="T",
        delta=db, quantity="transition frequency (Zeeman)",
        propagated=abs(fd_b), unit="Hz",
        formula_path="d(zeeman_splitting)/dB * 4.3 nT",
        reference_value=30.0,
    ))

    # --- polarization-angle noise -> site-frequency shift
    pair = trap_config.lattice_pairs[0]
    depth0 = lattice_depth(pair, atomdata.STATE_1, trap_config.bfield, sp)
    recoil = hbar * pair.geometry.k_eff**2 / (2 * sp.mass)

    def site_freq_at_theta(theta):
        from dataclasses import replace
        p = replace(pair, theta=theta)
        v = lattice_depth(p, atomdata.STATE_1, trap_config.bfield, sp)
        return 2 * np.sqrt(v * recoil)

    # a single pair's polarization error perturbs one lattice axis; the
    # register transition carries that axis's zero-point, hbar omega_site / 2
    dtheta = pi / 150
    f0 = site_freq_at_theta(pair.theta)
    excursion = abs(site_freq_at_theta(pair.theta + dtheta) - f0)
    rows.append(SensitivityRow(
        parameter="polarization angle", nominal=pair.theta, nominal_unit="rad",
        delta=dtheta, quantity="transition frequency (polarization)",
        propagated=0.5 * excursion, unit="rad/s",
        formula_path="one-axis zero-point: |2 sqrt(V(theta) E_R)|/2 excursion at theta + pi/150",
        reference_value=11.2,
    ))

    # --- lattice intensity noise -> one-axis zero-point shift
    i0 = pair.peak_intensity
    di = 3.12e3  # W/m^2 (312 mW/cm^2)
    site0 = 2 * np.sqrt(depth0 * recoil)
    d_site = site0 * 0.5 * di / i0  # depth linear in intensity, omega ~ sqrt(depth)
    rows.append(SensitivityRow(
        parameter="lattice intensity", nominal=i0, nominal_unit="W/m^2",
        delta=di, quantity="transition frequency (intensity)",
        propagated=0.5 * d_site, unit="rad/s",
        formula_path="one-axis zero-point: omega_site/4 * dI/I",
        reference_value=28.0,
    ))

    # --- condensation-temperature drop under the 1:5 bus split
    drop = 1.0 - (1.0 / 5.0) ** (1.0 / 3.0)
    rows.append(SensitivityRow(
        parameter="component population", nominal=n_atoms, nominal_unit="atoms",
        delta=-0.8 * n_atoms, quantity="condensation-temperature drop",
        propagated=drop, unit="fraction",
        formula_path="1 - (1/5)^(1/3), cube-root law",
        reference_value=0.415,
    ))

    # --- sqrt(N) shot noise -> bus transfer fraction during the bus step
    jc0 = hubbard.josephson_couplings(u, n_atoms, delta_star, omega_pair)
    t_bus = (pi - 2 * np.arccos(0.6)) / abs(jc0.j_empty)

    def endpoint(n):
        jc = hubbard.josephson_couplings(u, n, delta_star, omega_pair)
        return np.cos(abs(jc.j_empty) * t_bus + np.arccos(0.6))

    fd_frac = abs(_central_difference(endpoint, n_atoms, n_atoms * 1e-4)) * dn / 2
    rows.append(SensitivityRow(
        parameter="atom number N", nominal=n_atoms, nominal_unit="atoms",
        delta=dn, quantity="bus transfer fraction",
        propagated=fd_frac, unit="fraction",
        formula_path="d z(t_bus)/dN * sqrt(N) / 2 via the bus coupling",
        reference_value=0.0131,
    ))

    # --- lattice position drift -> Rabi-reduction variation
    if eta_fc_fn is not None:
        d_latt = pair.geometry.spacing
        offset = site_position_offset * d_latt / 2
        eta0 = eta_fc_fn(0.0)
        rows.append(SensitivityRow(
            parameter="lattice position", nominal=0.0, nominal_unit="m",
            delta=offset, quantity="Rabi-reduction variation (drift)",
            propagated=abs(eta_fc_fn(offset) / eta0 - 1.0), unit="fraction",
            formula_path="eta(r_s + 0.1 d/2)/eta(r_s) - 1",
        ))

    return SensitivityReport(rows=tuple(rows))
