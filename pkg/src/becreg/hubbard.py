"""Truncated-Fock Hamiltonians over the three working states, their
second-order effective reductions, the conditional bus couplings, the
interference-detuning solver, and the exchange-gate effective Hamiltonian.

Basis states are occupation tuples (n0, s1, n2) -- condensate component,
register site, second condensate component -- or (n0, s1, s1p, n2) for the
two-site extension.  All couplings and energies in rad/s.
"""

import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from .errors import (
    CapabilityError,
    ConfigurationError,
    RootNotFoundError,
    SingularityError,
)

EVOLVE_DIMENSION_CAP = 10_000


def _as_u_dict(u):
    if hasattr(u, "u"):
        return dict(u.u)
    return dict(u)


# ---------------------------------------------------------------------------
# Fock basis
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class FockBasis:
    """Occupation basis with fixed total atom number.

    Site occupancies run 0..max_site_occupancy (1 = hard-core register
    site; 2 admits the virtual double occupancy probed by second-order
    processes).  ``two_site=True`` adds a second register site.
    """

    n_total: int
    max_site_occupancy: int = 1
    two_site: bool = False
    states: tuple = field(default=None, compare=False)
    _index: dict = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        if self.n_total < 1:
            raise ConfigurationError("total atom number must be >= 1")
        if self.max_site_occupancy < 1:
            raise ConfigurationError("site occupancy cap must be >= 1")
        states = []
        cap = self.max_site_occupancy
        if self.two_site:
            for s1 in range(cap + 1):
                for s1p in range(cap + 1):
                    rest = self.n_total - s1 - s1p
                    if rest < 0:
                        continue
                    for n0 in range(rest + 1):
                        states.append((n0, s1, s1p, rest - n0))
        else:
            for s1 in range(cap + 1):
                rest = self.n_total - s1
                if rest < 0:
                    continue
                for n0 in range(rest + 1):
                    states.append((n0, s1, rest - n0))
        states = tuple(states)
        object.__setattr__(self, "states", states)
        object.__setattr__(self, "_index", {s: i for i, s in enumerate(states)})

    def __len__(self):
        return len(self.states)

    def index(self, state):
        try:
            return self._index[tuple(state)]
        except KeyError:
            raise ConfigurationError(f"state {state} not in basis")

    def vector(self, state):
        v = np.zeros(len(self.states))
        v[self.index(state)] = 1.0
        return v


# ---------------------------------------------------------------------------
# Hamiltonian construction
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class HamiltonianMatrix:
    """Hermitian matrix over a FockBasis plus the parameters that built it."""

    matrix: np.ndarray
    basis: FockBasis
    params: dict

    @property
    def dim(self):
        return self.matrix.shape[0]

    def hermiticity_defect(self):
        return float(np.abs(self.matrix - self.matrix.T.conj()).max())

    def export_entries(self):
        """(label_row, label_col, value) triples of nonzero entries, for audit."""
        out = []
        m = self.matrix
        for i, si in enumerate(self.basis.states):
            for j, sj in enumerate(self.basis.states):
                if m[i, j] != 0:
                    out.append((si, sj, complex(m[i, j])))
        return out

    def as_json_dict(self, max_dim=400):
        """Basis labels plus nonzero entries in Hz, for small-basis audits."""
        if self.dim > max_dim:
            raise CapabilityError(f"dump limited to dimension {max_dim}")
        return {
            "basis": [list(s) for s in self.basis.states],
            "entries_Hz": [
                {"row": list(si), "col": list(sj), "value": v.real / (2 * np.pi)}
                for si, sj, v in self.export_entries()
            ],
        }


def diagonal_energy(u, state, delta):
    """E(n0, s1, n2): interaction energies plus the detuning of the filled site."""
    n0, s1, n2 = state
    return (
        0.5 * u["00"] * n0 * (n0 - 1)
        + 0.5 * u["11"] * s1 * (s1 - 1)
        + 0.5 * u["22"] * n2 * (n2 - 1)
        + u["01"] * n0 * s1
        + u["12"] * n2 * s1
        + u["02"] * n0 * n2
        + delta * s1
    )


def build_hamiltonian(basis, u, omega01, omega12, omega02, delta):
    """Single-site Hamiltonian with the three drive couplings.

    Off-diagonal elements carry the bosonic root factors; the drive only
    moves one atom at a time between the site and one condensate component,
    or between the two components.
    """
    if basis.two_site:
        raise ConfigurationError("use build_two_site_hamiltonian for two-site bases")
    u = _as_u_dict(u)
    dim = len(basis)
    h = np.zeros((dim, dim))
    for i, (n0, s1, n2) in enumerate(basis.states):
        h[i, i] = diagonal_energy(u, (n0, s1, n2), delta)
        # -Omega01 a0^dag sigma-: (n0, s1, n2) -> (n0+1, s1-1, n2)
        if s1 >= 1:
            j = basis._index.get((n0 + 1, s1 - 1, n2))
            if j is not None:
                amp = -omega01 * np.sqrt((n0 + 1) * s1)
                h[j, i] += amp
                h[i, j] += amp
        # -Omega12 a2 sigma+: (n0, s1, n2) -> (n0, s1+1, n2-1)
        if n2 >= 1 and s1 + 1 <= basis.max_site_occupancy:
            j = basis._index.get((n0, s1 + 1, n2 - 1))
            if j is not None:
                amp = -omega12 * np.sqrt(n2 * (s1 + 1))
                h[j, i] += amp
                h[i, j] += amp
        # -Omega02 a0^dag a2: (n0, s1, n2) -> (n0+1, s1, n2-1)
        if n2 >= 1 and omega02 != 0:
            j = basis._index.get((n0 + 1, s1, n2 - 1))
            if j is not None:
                amp = -omega02 * np.sqrt((n0 + 1) * n2)
                h[j, i] += amp
                h[i, j] += amp
    return HamiltonianMatrix(
        matrix=h, basis=basis,
        params={"u": u, "omega01": omega01, "omega12": omega12,
                "omega02": omega02, "delta": delta},
    )


def build_two_site_hamiltonian(basis, u, drives_a, drives_b, omega02=0.0):
    """Two-register-site Hamiltonian.

    ``drives_a``/``drives_b`` are (omega01, omega12, delta) per site; the
    condensate-condensate drive omega02 is shared.  Both sites interact with
    the condensate components through the same u entries.
    """
    if not basis.two_site:
        raise ConfigurationError("basis must be two-site")
    u = _as_u_dict(u)
    om01a, om12a, da = drives_a
    om01b, om12b, db = drives_b
    dim = len(basis)
    h = np.zeros((dim, dim))
    for i, (n0, s1, s1p, n2) in enumerate(basis.states):
        h[i, i] = (
            0.5 * u["00"] * n0 * (n0 - 1)
            + 0.5 * u["11"] * (s1 * (s1 - 1) + s1p * (s1p - 1))
            + 0.5 * u["22"] * n2 * (n2 - 1)
            + u["01"] * n0 * (s1 + s1p)
            + u["12"] * n2 * (s1 + s1p)
            + u["02"] * n0 * n2
            + da * s1 + db * s1p
        )
        cap = basis.max_site_occupancy
        moves = []
        if s1 >= 1:
            moves.append(((n0 + 1, s1 - 1, s1p, n2), -om01a * np.sqrt((n0 + 1) * s1)))
        if n2 >= 1 and s1 + 1 <= cap:
            moves.append(((n0, s1 + 1, s1p, n2 - 1), -om12a * np.sqrt(n2 * (s1 + 1))))
        if s1p >= 1:
            moves.append(((n0 + 1, s1, s1p - 1, n2), -om01b * np.sqrt((n0 + 1) * s1p)))
        if n2 >= 1 and s1p + 1 <= cap:
            moves.append(((n0, s1, s1p + 1, n2 - 1), -om12b * np.sqrt(n2 * (s1p + 1))))
        if n2 >= 1 and omega02 != 0:
            moves.append(((n0 + 1, s1, s1p, n2 - 1), -omega02 * np.sqrt((n0 + 1) * n2)))
        for target, amp in moves:
            j = basis._index.get(target)
            if j is not None:
                h[j, i] += amp
                h[i, j] += amp
    return HamiltonianMatrix(
        matrix=h, basis=basis,
        params={"u": u, "drives_a": drives_a, "drives_b": drives_b, "omega02": omega02},
    )


def single_qubit_matrix(u, N0, N2, omega01, delta):
    """Closed-form 2x2 register-site Hamiltonian over {empty, filled}.

    Diagonal: ((u00 - u01)(N0 - 1) + (u02 - u12) N2, delta); off-diagonal
    -sqrt(N0) omega01.  Energies relative to the filled state's interaction
    background.
    """
    u = _as_u_dict(u)
    e_dn = (u["00"] - u["01"]) * (N0 - 1) + (u["02"] - u["12"]) * N2
    off = -np.sqrt(N0) * omega01
    return np.array([[e_dn, off], [off, delta]])


# ---------------------------------------------------------------------------
# second-order effective Hamiltonian over one site-occupancy manifold
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class EffectiveManifold:
    """Second-order effective Hamiltonian over one site-occupancy manifold."""

    matrix: np.ndarray
    states: tuple
    manifold: int
    validity_ratio: float

    def index(self, state):
        return self.states.index(tuple(state))


def effective_hamiltonian(h, manifold, validity_warn=0.1):
    """Second-order reduction of ``h`` onto the states with s1 == manifold.

    Couplings that leave the manifold are treated in second order with the
    symmetrized pair of energy denominators; couplings acting inside the
    manifold (the condensate-condensate drive) are kept in first order.
    Exact or near-degenerate denominators raise SingularityError naming the
    intermediate state.
    """
    basis = h.basis
    if basis.two_site:
        in_manifold = [i for i, s in enumerate(basis.states) if (s[1], s[2]) == tuple(manifold)]
    else:
        in_manifold = [i for i, s in enumerate(basis.states) if s[1] == manifold]
    if not in_manifold:
        raise ConfigurationError(f"manifold {manifold} is empty in this basis")
    outside = [i for i in range(len(basis)) if i not in set(in_manifold)]
    m = h.matrix
    diag = np.real(np.diag(m))
    scale = max(np.abs(diag).max(), 1.0)
    heff = m[np.ix_(in_manifold, in_manifold)].astype(float).copy()
    ratio = 0.0
    for a_loc, a in enumerate(in_manifold):
        for b_loc, b in enumerate(in_manifold[: a_loc + 1]):
            acc = 0.0
            for mm in outside:
                w_am = m[a, mm]
                w_mb = m[mm, b]
                if w_am == 0 or w_mb == 0:
                    if w_am != 0:
                        _check_denominator(diag[a], diag[mm], scale, basis.states[mm])
                    continue
                da = diag[a] - diag[mm]
                db = diag[b] - diag[mm]
                _check_denominator(diag[a], diag[mm], scale, basis.states[mm])
                _check_denominator(diag[b], diag[mm], scale, basis.states[mm])
                acc += 0.5 * w_am * w_mb * (1.0 / da + 1.0 / db)
                ratio = max(ratio, abs(w_am) / abs(da), abs(w_mb) / abs(db))
            heff[a_loc, b_loc] += acc
            if b_loc != a_loc:
                heff[b_loc, a_loc] += acc
    if ratio > validity_warn:
        warnings.warn(
            f"effective-Hamiltonian validity ratio {ratio:.3f} exceeds {validity_warn}",
            stacklevel=2,
        )
    return EffectiveManifold(
        matrix=heff,
        states=tuple(basis.states[i] for i in in_manifold),
        manifold=manifold if np.ndim(manifold) == 0 else tuple(manifold),
        validity_ratio=float(ratio),
    )


def _check_denominator(ea, em, scale, state):
    d = ea - em
    if abs(d) < 1e3 * np.finfo(float).eps * scale:
        raise SingularityError(
            f"vanishing energy denominator against intermediate state {state}",
            state=state,
        )


# ---------------------------------------------------------------------------
# conditional bus couplings (closed forms)
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class EffectiveCoupling:
    """Conditional condensate-exchange couplings at one drive setting.

    ``j_empty``/``j_filled`` multiply sqrt((n0+1) n2) in the transition
    elements of the empty-site / filled-site manifolds.
    """

    j_empty: float          # rad/s
    j_filled: float         # rad/s
    delta: float
    omega: float
    n_atoms: float
    validity_ratio: float
    delta_star: float = None

    @property
    def ratio(self):
        return abs(self.j_filled / self.j_empty) if self.j_empty else np.inf


def _j_denominators(u, N, delta, n0=None):
    """The six energy denominators of the two closed forms.

    With ``n0`` given, includes the occupation-dependent terms; otherwise
    the large-condensate limit in which they are dropped.
    """
    ca = (N - 1) * (u["02"] - u["12"])
    cb = (N - 1) * (u["22"] - u["12"])
    p = u["00"] - u["01"] - u["02"] + u["12"]
    q = u["02"] - u["01"] - u["22"] + u["12"]
    extra_a = n0 * p if n0 is not None else 0.0
    extra_b = n0 * q if n0 is not None else 0.0
    d_empty = (-delta + ca + extra_a, -delta + cb + extra_b)
    d1 = (-delta + (N / 2) * (u["00"] - u["01"] + u["02"] - u["12"])
          + u["01"] - u["02"] - u["11"] + u["12"] - extra_a)
    d2 = (-delta + (N / 2) * (-u["01"] + u["02"] - u["12"] + u["22"])
          - u["11"] - u["22"] + 2 * u["12"] - extra_b)
    d3 = delta + (N / 2) * (-u["00"] + u["01"] - u["02"] + u["12"]) + extra_a
    d4 = (delta + (N / 2) * (u["01"] - u["02"] + u["12"] - u["22"])
          + u["01"] - u["02"] - u["12"] + u["22"] + extra_b)
    return d_empty, (d1, d2, d3, d4)


def josephson_couplings(u, N, delta, omega, n0=None):
    """Closed-form conditional couplings at detuning ``delta``.

    Empty site: half the drive squared times two symmetrized denominators.
    Filled site: four denominators; the two virtual double-occupancy paths
    enter with twice the weight of the empty-site paths.  Passing ``n0``
    keeps the occupation-dependent denominator terms so the accuracy of
    dropping them is measurable.
    """
    u = _as_u_dict(u)
    (da1, da2), (d1, d2, d3, d4) = _j_denominators(u, N, delta, n0)
    for d in (da1, da2, d1, d2, d3, d4):
        if d == 0:
            raise SingularityError("pole in a closed-form denominator")
    j0 = 0.5 * omega**2 * (1.0 / da1 + 1.0 / da2)
    j1 = (omega**2 / d1 + omega**2 / d2
          + 0.5 * omega**2 / d3 + 0.5 * omega**2 / d4)
    dmin = min(abs(d) for d in (da1, da2, d1, d2, d3, d4))
    return EffectiveCoupling(
        j_empty=j0, j_filled=j1, delta=delta, omega=omega, n_atoms=N,
        validity_ratio=omega * np.sqrt(N) / dmin,
    )


def stark_shift_empty(u, N0, N2, delta, omega):
    """Second-order light shift of the Fock state (N0, 0, N2), rad/s."""
    u = _as_u_dict(u)
    e_a = diagonal_energy(u, (N0, 0, N2), delta)
    shift = 0.0
    if N0 >= 1:
        e_m = diagonal_energy(u, (N0 - 1, 1, N2), delta)
        shift += omega**2 * N0 / (e_a - e_m)
    if N2 >= 1:
        e_m = diagonal_energy(u, (N0, 1, N2 - 1), delta)
        shift += omega**2 * N2 / (e_a - e_m)
    return shift


def find_interference_detuning(u, N, omega, bracket, rtol=1e-12):
    """Detuning at which the filled-site coupling interferes to zero.

    Brentq root of j_filled(delta) inside ``bracket``; rejects brackets
    containing a closed-form pole and brackets without a sign change.
    Returns (delta_star, |j_filled/j_empty| at the root).
    """
    u = _as_u_dict(u)
    lo, hi = bracket
    if not lo < hi:
        raise ConfigurationError("bracket must satisfy lo < hi")
    poles = _closed_form_poles(u, N)
    inside = [p for p in poles if lo < p < hi]
    if inside:
        raise SingularityError(f"closed-form pole(s) inside bracket: {inside}")

    def f(d):
        return josephson_couplings(u, N, d, omega).j_filled

    flo, fhi = f(lo), f(hi)
    if flo == 0.0:
        root = lo
    elif fhi == 0.0:
        root = hi
    elif np.sign(flo) == np.sign(fhi):
        raise RootNotFoundError(
            f"no sign change of the filled-site coupling in [{lo}, {hi}]"
        )
    else:
        root = brentq(f, lo, hi, rtol=rtol, maxiter=200)
    jc = josephson_couplings(u, N, root, omega)
    return root, jc.ratio


def _closed_form_poles(u, N):
    """Detunings at which any closed-form denominator vanishes."""
    ca = (N - 1) * (u["02"] - u["12"])
    cb = (N - 1) * (u["22"] - u["12"])
    c1 = (N / 2) * (u["00"] - u["01"] + u["02"] - u["12"]) + u["01"] - u["02"] - u["11"] + u["12"]
    c2 = (N / 2) * (-u["01"] + u["02"] - u["12"] + u["22"]) - u["11"] - u["22"] + 2 * u["12"]
    c3 = (N / 2) * (-u["00"] + u["01"] - u["02"] + u["12"])
    c4 = (N / 2) * (u["01"] - u["02"] + u["12"] - u["22"]) + u["01"] - u["02"] - u["12"] + u["22"]
    return [ca, cb, c1, c2, -c3, -c4]


# ---------------------------------------------------------------------------
# exchange-gate effective Hamiltonian (mode-sum)
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SqrtSwapEffective:
    """Exchange coupling and site energy shifts from the trap-mode sum."""

    coupling: float          # rad/s, coefficient of the exchange term
    shift_a: float           # rad/s, full sigma_1 coefficient (incl. detuning)
    shift_b: float
    delta_bar: float
    delta_bar_prime: float
    validity_ratio: float    # max per-state drive over level detuning
    gate_time: float         # s, quarter-cycle exchange (pi/2 pulse)

    @property
    def shift_residual(self):
        return abs(self.shift_a - self.shift_b)


def sqrtswap_effective(table, delta_bar, delta_bar_prime, enforce_ratio=True,
                       ratio_limit=0.1):
    """Evaluate the three mode sums of the exchange-gate effective Hamiltonian.

    ``delta_bar``/``delta_bar_prime`` are the interaction-shifted site
    detunings (rad/s).  The coupling sums the signed cross products over all
    levels; the two shift terms sum each site's weights.  Any level
    denominator within 10x machine epsilon of the energy scale raises
    SingularityError; per-state drive ratios above ``ratio_limit`` raise
    ConfigurationError unless enforcement is disabled.
    """
    energies = table.level_energies
    den_a = delta_bar - energies
    den_b = delta_bar_prime - energies
    scale = max(abs(delta_bar), float(np.abs(energies).max()), 1.0)
    tol = 10 * np.finfo(float).eps * scale
    for name, den in (("a", den_a), ("b", den_b)):
        bad = np.where(np.abs(den) < tol)[0]
        if bad.size:
            raise SingularityError(
                f"level {bad[0]} is resonant with site {name}", state=int(bad[0])
            )
    amp2 = table.amplitude**2
    g = amp2 * float(np.sum(table.cross * (1.0 / den_a + 1.0 / den_b)))
    shift_a = delta_bar + amp2 * float(np.sum(table.weights_a / den_a))
    shift_b = delta_bar_prime + amp2 * float(np.sum(table.weights_b / den_b))
    ratio = max(
        float(np.max(table.amplitude * table.max_overlap_a / np.abs(den_a))),
        float(np.max(table.amplitude * table.max_overlap_b / np.abs(den_b))),
    )
    if enforce_ratio and ratio > ratio_limit:
        raise ConfigurationError(
            f"per-state drive ratio {ratio:.3f} exceeds {ratio_limit}; "
            "reduce the drive or detune further"
        )
    return SqrtSwapEffective(
        coupling=g, shift_a=shift_a, shift_b=shift_b,
        delta_bar=delta_bar, delta_bar_prime=delta_bar_prime,
        validity_ratio=ratio,
        gate_time=np.pi / (4 * abs(g)) if g != 0 else np.inf,
    )


def balance_detunings(table, delta_bar, guess=None, tol_fraction=1e-3,
                      enforce_ratio=False):
    """Tune the second site's detuning so both effective shifts match.

    Secant solve on delta_bar_prime; returns the balanced value.  The
    residual after balancing is |shift_a - shift_b| relative to the
    coupling magnitude.
    """
    base = sqrtswap_effective(table, delta_bar, guess if guess is not None else delta_bar,
                              enforce_ratio=enforce_ratio)
    target = base.shift_a

    def f(dp):
        return sqrtswap_effective(table, delta_bar, dp, enforce_ratio=enforce_ratio).shift_b - target

    x0 = guess if guess is not None else delta_bar
    x1 = x0 + max(abs(x0) * 1e-3, 1.0)
    f0, f1 = f(x0), f(x1)
    for _ in range(100):
        if f1 == f0:
            break
        x2 = x1 - f1 * (x1 - x0) / (f1 - f0)
        x0, f0, x1, f1 = x1, f1, x2, f(x2)
        if abs(f1) <= tol_fraction * abs(base.coupling):
            return x1
    raise RootNotFoundError("detuning balance did not converge")


# ---------------------------------------------------------------------------
# exact unitary propagation
# ---------------------------------------------------------------------------


def evolve(h, psi0, t):
    """psi(t) = exp(-i H t) psi0 via eigendecomposition (H in rad/s, t in s).

    ``t`` may be a scalar or an array; returns the state(s) with shape
    (..., dim).  Dimensions above EVOLVE_DIMENSION_CAP are rejected with a
    pointer to the effective-Hamiltonian path.
    """
    m = h.matrix if hasattr(h, "matrix") else np.asarray(h)
    if m.shape[0] > EVOLVE_DIMENSION_CAP:
        raise CapabilityError(
            f"basis dimension {m.shape[0]} exceeds {EVOLVE_DIMENSION_CAP}; "
            "use the effective-Hamiltonian path"
        )
    psi0 = np.asarray(psi0, dtype=complex)
    vals, vecs = np.linalg.eigh(m)
    coeff = vecs.conj().T @ psi0
    t = np.asarray(t, dtype=float)
    phases = np.exp(-1j * np.outer(np.atleast_1d(t), vals))
    out = (phases * coeff[None, :]) @ vecs.T
    return out[0] if t.ndim == 0 else out
