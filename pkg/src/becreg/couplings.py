"""Overlap-derived quantities: interaction energies, reduced Rabi frequencies,
site-to-trap-mode couplings, and the dressed mode spectrum.

Conventions:
  * interaction energies U follow the number-operator Hamiltonian form
    (1/2) U n (n - 1) + U n_i n_j, so U_ij = (4 pi hbar a_ij / m)
    * integral |psi_i|^2 |psi_j|^2 for every pair, same-state included
    (the optional exchange_half flag halves same-state entries for the
    field-theory normalization),
  * every returned coupling is an angular frequency in rad/s.
"""

from dataclasses import dataclass, replace

import numpy as np

from .constants import hbar, pi
from .errors import CapabilityError, ConfigurationError
from .modes import (
    HOEigenstate,
    ThomasFermiState,
    WannierState,
    gauss_legendre_panels,
    hermite_function_rows,
)

# ---------------------------------------------------------------------------
# drive profiles
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class FlatDrive:
    """Spatially uniform drive (square pulse in time)."""

    amplitude: float  # rad/s

    def profile(self, r):
        return np.ones(np.shape(np.asarray(r))[:-1])


@dataclass(frozen=True)
class GaussianDrive:
    """Axial Gaussian field profile exp(-(x^2+y^2)/waist^2), beam along z."""

    amplitude: float  # rad/s
    waist: float      # m

    def profile(self, r):
        r = np.asarray(r, dtype=float)
        return np.exp(-(r[..., 0] ** 2 + r[..., 1] ** 2) / self.waist**2)


@dataclass(frozen=True)
class TabulatedDrive:
    """Hook for arbitrary profiles: callable (..., 3) -> dimensionless."""

    amplitude: float
    profile_fn: object

    def profile(self, r):
        return np.asarray(self.profile_fn(np.asarray(r, dtype=float)))


# ---------------------------------------------------------------------------
# density overlaps and the interaction strength
# ---------------------------------------------------------------------------


def _site_grid(wst: WannierState, order=12, panels_per_site=4):
    """Per-axis displacement nodes/weights spanning the Wannier support."""
    hw = wst.axis_solution.half_width
    d = wst.spacing
    panels = int(np.ceil(2 * hw / d)) * panels_per_site
    return gauss_legendre_panels(-hw, hw, panels, order)


def density_overlap(mode_i, mode_j):
    """integral |psi_i|^2 |psi_j|^2 d^3r  (units 1/m^3)."""
    ti = isinstance(mode_i, ThomasFermiState)
    tj = isinstance(mode_j, ThomasFermiState)
    if ti and tj:
        if abs(mode_i.radius - mode_j.radius) < 1e-12 * mode_i.radius:
            return mode_i.density_overlap_self()
        rmin = min(mode_i.radius, mode_j.radius)
        x, w = gauss_legendre_panels(0.0, rmin, 8, 24)
        f = (mode_i.phi_radial(x) ** 2) * (mode_j.phi_radial(x) ** 2) * 4 * pi * x**2
        return float(np.sum(f * w))
    if ti != tj:
        tf = mode_i if ti else mode_j
        wst = mode_j if ti else mode_i
        return _tf_wannier_density_overlap(tf, wst)
    if isinstance(mode_i, WannierState) and isinstance(mode_j, WannierState):
        if tuple(mode_i.site_index) != tuple(mode_j.site_index):
            raise ConfigurationError("inter-site density overlaps are not modelled")
        return mode_i.axis_solution.int_w4 ** 3
    raise ConfigurationError(
        f"unsupported mode pair {type(mode_i).__name__}/{type(mode_j).__name__}"
    )


def _tf_wannier_density_overlap(tf, wst):
    """integral |phi|^2 |w|^2: exact moment form inside the condensate.

    |phi|^2 is quadratic and |w|^2 separable, so the integral is the site
    density minus the curvature correction from the orbital second moments.
    """
    rs = wst.position
    hw = wst.axis_solution.half_width
    if np.linalg.norm(np.abs(rs)) + hw >= tf.radius:
        raise ConfigurationError("lattice site support extends beyond the condensate")
    m2 = wst.axis_solution.x2_w2
    return float(tf.peak_phi2 * (1.0 - (np.dot(rs, rs) + 3 * m2) / tf.radius**2))


def interaction_strength(mode_i, mode_j, a_ij, mass, same_state=False, exchange_half=False):
    """Interaction energy U (rad/s) between two unit-normalized modes.

    U = (4 pi hbar a_ij / m) integral |psi_i|^2 |psi_j|^2, optionally halved
    for same-state pairs under the field-theory normalization.
    """
    if a_ij == 0:
        return 0.0
    u = 4 * pi * hbar * a_ij / mass * density_overlap(mode_i, mode_j)
    if same_state and exchange_half:
        u *= 0.5
    return float(u)


# ---------------------------------------------------------------------------
# Rabi-frequency reduction (mode overlap against a drive profile)
# ---------------------------------------------------------------------------


def mode_overlap(mode_i, mode_j, drive=None):
    """Dimensionless overlap integral psi_i * profile * psi_j.

    Supported pairs: TF x Wannier (slice quadrature over the site support),
    HO x Wannier (per-axis quadrature), and identical modes (profile
    expectation; exactly 1 for flat drives).
    """
    if mode_i is mode_j and (drive is None or isinstance(drive, FlatDrive)):
        return 1.0
    ti = isinstance(mode_i, ThomasFermiState)
    tj = isinstance(mode_j, ThomasFermiState)
    if ti != tj and isinstance(mode_j if ti else mode_i, WannierState):
        tf = mode_i if ti else mode_j
        wst = mode_j if ti else mode_i
        return _tf_wannier_overlap(tf, wst, drive)
    hi = isinstance(mode_i, HOEigenstate)
    hj = isinstance(mode_j, HOEigenstate)
    if hi != hj and isinstance(mode_j if hi else mode_i, WannierState):
        ho = mode_i if hi else mode_j
        wst = mode_j if hi else mode_i
        return _ho_wannier_overlap(ho, wst, drive)
    raise ConfigurationError(
        f"unsupported mode pair {type(mode_i).__name__}/{type(mode_j).__name__}"
    )


def _tf_wannier_overlap(tf, wst, drive=None):
    """integral phi(r) w(r - r_s) [profile] via slice quadrature.

    Tensor Gauss-Legendre grid over the orbital support, streamed one
    z-slice at a time to bound memory.
    """
    nodes, wq = _site_grid(wst)
    pos = wst.position
    wu = wst.axis_solution.w(nodes) * wq
    xy_w = np.outer(wu, wu)
    x_abs = nodes + pos[0]
    y_abs = nodes + pos[1]
    x2 = x_abs[:, None] ** 2 + y_abs[None, :] ** 2
    flat = drive is None or isinstance(drive, FlatDrive)
    total = 0.0
    for z, wz in zip(nodes, wu):
        r2 = x2 + (z + pos[2]) ** 2
        phi = np.sqrt(tf.peak_phi2 * np.clip(1.0 - r2 / tf.radius**2, 0.0, None))
        if not flat:
            pts = np.stack(
                [
                    np.broadcast_to(x_abs[:, None], phi.shape),
                    np.broadcast_to(y_abs[None, :], phi.shape),
                    np.full_like(phi, z + pos[2]),
                ],
                axis=-1,
            )
            phi = phi * drive.profile(pts)
        total += float(np.sum(phi * xy_w)) * wz
    return total


def _hermite_single(n, xi):
    for m, row in hermite_function_rows(n, xi):
        if m == n:
            return row


def _ho_wannier_overlap(ho, wst, drive=None):
    """Per-axis product integral psi_n(r) w(r - r_s); flat drives only."""
    if drive is not None and not isinstance(drive, FlatDrive):
        raise ConfigurationError(
            "shaped drives for trap-mode couplings go through ho_mode_couplings"
        )
    nodes, wq = _site_grid(wst)
    pos = wst.position
    a = ho.length
    wu = wst.axis_solution.w(nodes) * wq
    out = 1.0
    for ax in range(3):
        xi = (nodes + pos[ax]) / a
        h = _hermite_single(ho.n[ax], xi)
        out *= float(np.dot(h, wu)) / np.sqrt(a)
    return out


def rabi_overlap(mode_i, mode_j, drive):
    """Reduced Rabi frequency Omega (rad/s): amplitude times the mode overlap."""
    return drive.amplitude * mode_overlap(mode_i, mode_j, drive)


# ---------------------------------------------------------------------------
# derived coupling set at one site
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CouplingSet:
    """Interaction energies and Rabi reduction for one lattice site."""

    u: dict                    # keys '00','11','22','01','02','12' -> rad/s
    eta_fc: float              # Omega_ij / bare amplitude, flat drive
    site_position: np.ndarray  # m
    condensed_number: float
    enhancement: float         # sqrt(N0) * eta_fc

    def __getitem__(self, key):
        return self.u[key]

    def export_rows(self):
        rows = [(f"U{k}", v, "rad/s") for k, v in sorted(self.u.items())]
        rows.append(("eta_fc", self.eta_fc, ""))
        rows.append(("sqrtN0_eta_fc", self.enhancement, ""))
        return rows

    def as_json_dict(self):
        """Audit export; interaction energies in Hz."""
        return {
            "U_Hz": {k: v / (2 * pi) for k, v in sorted(self.u.items())},
            "eta_fc": self.eta_fc,
            "enhancement": self.enhancement,
            "site_position_m": [float(x) for x in self.site_position],
            "condensed_number": self.condensed_number,
        }


def build_coupling_set(tf, wst, species, condensed_number, exchange_half=False):
    """All six U entries plus the Franck-Condon reduction at the given site."""
    m = species.mass
    pairs = {
        "00": (tf, tf), "22": (tf, tf), "02": (tf, tf),
        "01": (tf, wst), "12": (tf, wst), "11": (wst, wst),
    }
    u = {}
    for key, (mi, mj) in pairs.items():
        i, j = int(key[0]), int(key[1])
        u[key] = interaction_strength(
            mi, mj, species.a(i, j), m, same_state=(i == j), exchange_half=exchange_half
        )
    eta = mode_overlap(tf, wst, FlatDrive(1.0))
    return CouplingSet(
        u=u,
        eta_fc=float(eta),
        site_position=wst.position,
        condensed_number=condensed_number,
        enhancement=float(np.sqrt(condensed_number) * eta),
    )


# ---------------------------------------------------------------------------
# site <-> trap-mode coupling table for the exchange gate
# ---------------------------------------------------------------------------

_OVERLAP_CACHE = {}


def _axis_overlaps(w1d, coord, omega, mass, cutoff):
    """o[n] = integral psi_n(x) w(x - coord) dx for n = 0..cutoff (cached).

    The cache key is the full numeric input tuple, so regeneration is
    bit-identical and the three axes of a diagonal site share one entry.
    """
    key = (w1d.depth, w1d.k_eff, w1d.mass, w1d.cutoff, round(float(coord), 15),
           float(omega), float(mass), int(cutoff))
    hit = _OVERLAP_CACHE.get(key)
    if hit is not None:
        return hit
    a = np.sqrt(hbar / (mass * omega))
    hw = w1d.half_width
    panels = int(np.ceil(2 * hw / (pi / w1d.k_eff))) * 4
    nodes, wq = gauss_legendre_panels(-hw, hw, panels, 12)
    wu = w1d.w(nodes) * wq
    xi = (nodes + coord) / a
    out = np.empty(cutoff + 1)
    for n, row in hermite_function_rows(cutoff, xi):
        out[n] = np.dot(row, wu) / np.sqrt(a)
    out.setflags(write=False)
    _OVERLAP_CACHE[key] = out
    return out


def _gaussian_diag(cutoff, omega, mass, waist, factor):
    """d[n] = <n| exp(-factor x^2 / waist^2) |n> for n = 0..cutoff."""
    a = np.sqrt(hbar / (mass * omega))
    xmax = (np.sqrt(2 * cutoff + 1) + 6.0) * a
    nodes, wq = gauss_legendre_panels(-xmax, xmax, max(64, cutoff // 3), 16)
    prof = np.exp(-factor * nodes**2 / waist**2) * wq
    xi = nodes / a
    out = np.empty(cutoff + 1)
    for n, row in hermite_function_rows(cutoff, xi):
        out[n] = np.dot(row * row, prof) / a
    return out


def _conv3(a, b, c, Q):
    ab = np.convolve(a, b)[: Q + 1]
    return np.convolve(ab, c)[: Q + 1]


def _maxconv3(la, lb, lc, Q):
    """Max-plus convolution of three log-magnitude sequences."""
    n = Q + 1
    f2 = np.full(n, -np.inf)
    for i in range(n):
        m = n - i
        np.maximum.at(f2, i + np.arange(m), la[i] + lb[:m])
    f3 = np.full(n, -np.inf)
    for i in range(n):
        m = n - i
        np.maximum.at(f3, i + np.arange(m), f2[i] + lc[:m])
    return f3


@dataclass(frozen=True)
class ModeCouplingTable:
    """Level-resolved couplings of two lattice sites to the trap modes.

    Per-state couplings Omega_1n = amplitude * o_i o_j o_k enter through
    exact shell aggregates: weights_a/b collect |o_i o_j o_k|^2 over each
    total-quanta shell, cross collects the signed products between the two
    sites.  Level energies carry the trap ladder, the condensate
    mean-field shift (clamped at the condensate edge), and an optional
    dressing shift.  Regeneration with identical inputs is bit-identical.
    """

    omega: float             # rad/s
    mass: float
    cutoff: int
    amplitude: float         # bare drive amplitude, rad/s
    site_a: tuple
    site_b: tuple
    axis_overlaps_a: tuple   # three read-only arrays o[n]
    axis_overlaps_b: tuple
    weights_a: np.ndarray    # W_a(n), sums to <= 1 (completeness)
    weights_b: np.ndarray
    cross: np.ndarray        # C(n), signed
    shift_interaction: np.ndarray   # rad/s per level
    shift_dressing: np.ndarray      # rad/s per level
    max_overlap_a: np.ndarray       # max |o_i o_j o_k| within each shell
    max_overlap_b: np.ndarray

    @property
    def level_energies(self):
        n = np.arange(self.cutoff + 1)
        return self.omega * n + self.shift_interaction + self.shift_dressing

    def completeness(self):
        return float(self.weights_a.sum())

    def as_json_dict(self):
        """Audit export; per-level aggregates with energies in Hz."""
        return {
            "cutoff": self.cutoff,
            "amplitude_Hz": self.amplitude / (2 * pi),
            "site_a": list(self.site_a),
            "site_b": list(self.site_b),
            "level_energies_Hz": (self.level_energies / (2 * pi)).tolist(),
            "weights_a": self.weights_a.tolist(),
            "weights_b": self.weights_b.tolist(),
            "cross": self.cross.tolist(),
        }

    def truncated(self, cutoff):
        """View of the table restricted to total quanta <= cutoff."""
        if cutoff > self.cutoff:
            raise ConfigurationError("cannot extend a table; rebuild with a larger cutoff")
        s = slice(0, cutoff + 1)
        return replace(
            self, cutoff=cutoff,
            axis_overlaps_a=tuple(o[s] for o in self.axis_overlaps_a),
            axis_overlaps_b=tuple(o[s] for o in self.axis_overlaps_b),
            weights_a=self.weights_a[s], weights_b=self.weights_b[s],
            cross=self.cross[s],
            shift_interaction=self.shift_interaction[s],
            shift_dressing=self.shift_dressing[s],
            max_overlap_a=self.max_overlap_a[s],
            max_overlap_b=self.max_overlap_b[s],
        )


def ho_mode_couplings(site_a, site_b, drive, omega, mass, cutoff,
                      condensate=None, a_ratio=1.0):
    """Build the coupling table for a site pair.

    ``drive`` must be a FlatDrive (square pulse).  ``condensate`` supplies the
    mean-field background for the level shifts; its peak shift is scaled by
    ``a_ratio`` (the scattering-length ratio of the trap-mode state against
    the condensate state).  Tail convergence is checked by the caller via
    cutoff doubling.
    """
    if cutoff < 1:
        raise ConfigurationError("cutoff must be >= 1")
    if cutoff > 700:
        raise CapabilityError("cutoff beyond the stability-tested mode range")
    if not isinstance(drive, FlatDrive):
        raise ConfigurationError("site-to-mode couplings assume a flat (square-pulse) drive")
    oa = tuple(
        _axis_overlaps(site_a.axis_solution, site_a.position[ax], omega, mass, cutoff)
        for ax in range(3)
    )
    ob = tuple(
        _axis_overlaps(site_b.axis_solution, site_b.position[ax], omega, mass, cutoff)
        for ax in range(3)
    )
    wa = _conv3(oa[0] ** 2, oa[1] ** 2, oa[2] ** 2, cutoff)
    wb = _conv3(ob[0] ** 2, ob[1] ** 2, ob[2] ** 2, cutoff)
    cross = _conv3(oa[0] * ob[0], oa[1] * ob[1], oa[2] * ob[2], cutoff)

    n = np.arange(cutoff + 1)
    if condensate is not None:
        aho2 = hbar / (mass * omega)
        s_peak = a_ratio * condensate.mu
        shift = np.maximum(0.0, s_peak * (1.0 - (n + 1.5) * aho2 / condensate.radius**2))
    else:
        shift = np.zeros(cutoff + 1)

    tiny = 1e-300
    la = [np.log(np.abs(o) + tiny) for o in oa]
    lb = [np.log(np.abs(o) + tiny) for o in ob]

    return ModeCouplingTable(
        omega=omega, mass=mass, cutoff=cutoff, amplitude=drive.amplitude,
        site_a=tuple(site_a.site_index), site_b=tuple(site_b.site_index),
        axis_overlaps_a=oa, axis_overlaps_b=ob,
        weights_a=wa, weights_b=wb, cross=cross,
        shift_interaction=shift,
        shift_dressing=np.zeros(cutoff + 1),
        max_overlap_a=np.exp(_maxconv3(la[0], la[1], la[2], cutoff)),
        max_overlap_b=np.exp(_maxconv3(lb[0], lb[1], lb[2], cutoff)),
    )


def stark_shifted_spectrum(table, amplitude, detuning, waist):
    """Dress the mode ladder with an axial-Gaussian far-detuned field.

    The drive has field profile exp(-(x^2+y^2)/waist^2) and couples each
    level to the others in second order; in the far-detuned (closure) limit
    implemented here the level shift is

        shift(n) = (amplitude^2 / detuning) <exp(-2 (x^2+y^2)/waist^2)>_n

    with the expectation aggregated over each shell using the site-a overlap
    weights.  ``stark_shift_bruteforce`` provides the independent pairwise
    sum this limit is validated against.  Zero amplitude leaves the ladder
    untouched; near-resonant dressing is rejected.
    """
    if amplitude == 0:
        return replace(table, shift_dressing=np.zeros(table.cutoff + 1))
    if detuning == 0 or abs(detuning) < 10 * abs(amplitude):
        raise ConfigurationError("dressing must be far detuned: |detuning| >= 10 |amplitude|")
    g2 = _gaussian_diag(table.cutoff, table.omega, table.mass, waist, 2.0)
    a2 = [o**2 for o in table.axis_overlaps_a]
    num = _conv3(a2[0] * g2, a2[1] * g2, a2[2], table.cutoff)
    prof = np.where(table.weights_a > 0, num / np.maximum(table.weights_a, 1e-300), 0.0)
    return replace(table, shift_dressing=amplitude**2 / detuning * prof)


def dressing_shift_scale(amplitude, detuning):
    """Peak dressing shift amplitude^2/detuning (rad/s) of the closure limit."""
    return amplitude**2 / detuning


def stark_shift_bruteforce(amplitude, detuning, waist, omega, mass, n_levels=50):
    """Ground-level dressing shift from an explicit two-level-per-pair sum.

    Sums |<00| A exp(-(x^2+y^2)/waist^2) |ij>|^2 / (detuning - (i+j) omega)
    over all transverse modes with i + j <= n_levels.  Independent of the
    closure path in stark_shifted_spectrum.
    """
    a = np.sqrt(hbar / (mass * omega))
    xmax = (np.sqrt(2 * n_levels + 1) + 6.0) * a
    nodes, wq = gauss_legendre_panels(-xmax, xmax, 64, 16)
    xi = nodes / a
    prof = np.exp(-(nodes**2) / waist**2) * wq
    g0 = None
    elems = np.empty(n_levels + 1)
    for n, row in hermite_function_rows(n_levels, xi):
        if n == 0:
            g0 = row.copy()
        elems[n] = np.dot(g0 * row, prof) / a
    total = 0.0
    for i in range(n_levels + 1):
        for j in range(n_levels + 1 - i):
            total += (amplitude * elems[i] * elems[j]) ** 2 / (detuning - (i + j) * omega)
    return total
