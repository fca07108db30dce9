import numpy as np
import pytest
from scipy.special import gammaln

from becreg import modes
from becreg.atomdata import rb87
from becreg.constants import hbar, pi
from becreg.errors import CapabilityError, ConfigurationError
from becreg.modes import (
    HOEigenstate,
    hermite_function,
    ho_eigenfunction,
    solve_thomas_fermi,
    solve_wannier,
    solve_wannier_1d,
)

SP = rb87()
OMEGA = 2 * pi * 100.0


# ---------------------------------------------------------------------------
# Thomas-Fermi
# ---------------------------------------------------------------------------

def test_tf_radius_and_mu_closed_form():
    tf = solve_thomas_fermi(7e5, SP, OMEGA)
    assert tf.radius == pytest.approx(9.462e-6, rel=1e-3)
    # mu = m omega^2 R^2 / (2 hbar), consistency of the two closed forms
    mu_from_radius = SP.mass * OMEGA**2 * tf.radius**2 / (2 * hbar)
    assert tf.mu == pytest.approx(mu_from_radius, rel=1e-12)
    assert tf.tf_valid


def test_tf_profile_normalized():
    tf = solve_thomas_fermi(7e5, SP, OMEGA)
    r = np.linspace(0, tf.radius, 20001)
    dens = tf.phi_radial(r) ** 2 * 4 * pi * r**2
    norm = np.trapezoid(dens, r)
    assert norm == pytest.approx(1.0, abs=1e-6)


def test_tf_vanishes_outside_radius():
    tf = solve_thomas_fermi(7e5, SP, OMEGA)
    assert tf.phi(np.array([tf.radius * 1.01, 0, 0])) == 0.0


def test_tf_density_overlap_closed_form_vs_quadrature():
    tf = solve_thomas_fermi(7e5, SP, OMEGA)
    r = np.linspace(0, tf.radius, 40001)
    quad = np.trapezoid(tf.phi_radial(r) ** 4 * 4 * pi * r**2, r)
    assert tf.density_overlap_self() == pytest.approx(quad, rel=1e-6)


def test_tf_validity_flag():
    weak = solve_thomas_fermi(5, 1e-9, OMEGA, mass=SP.mass)
    assert not weak.tf_valid


# ---------------------------------------------------------------------------
# band structure / Wannier
# ---------------------------------------------------------------------------

@pytest.fixture(scope="module")
def w1(op_lattice):
    depth, k_eff = op_lattice
    return solve_wannier_1d(depth, k_eff, SP.mass)


@pytest.fixture(scope="module")
def op_lattice(request):
    # operating lattice numbers without building the full OperatingPoint
    from becreg.optics import reference_trap

    spec = reference_trap().lattice_spec()
    return spec.depth, spec.k_eff


def test_wannier_normalized(w1):
    x = np.linspace(-w1.half_width, w1.half_width, 40001)
    assert np.trapezoid(w1.w(x) ** 2, x) == pytest.approx(1.0, abs=1e-6)


def test_wannier_centered_and_even(w1):
    x = np.linspace(-w1.half_width, w1.half_width, 40001)
    wv = w1.w(x)
    assert abs(np.trapezoid(x * wv**2, x)) < 1e-12 * w1.half_width
    assert np.allclose(wv, w1.w(-x), atol=1e-12 * np.abs(wv).max())


def test_band_gap_and_tunneling(w1):
    assert w1.band_gap == pytest.approx(1.9e5, rel=0.10)
    assert 0.09 / 2 <= w1.j_tunneling <= 0.09 * 2


def test_deep_lattice_gaussian_overlap(w1):
    # ground Wannier orbital overlaps the site-harmonic Gaussian at > 0.99
    sigma = np.sqrt(hbar / (SP.mass * w1.site_frequency))
    x = np.linspace(-w1.half_width, w1.half_width, 40001)
    gauss = (pi * sigma**2) ** -0.25 * np.exp(-(x**2) / (2 * sigma**2))
    assert np.trapezoid(w1.w(x) * gauss, x) > 0.99


def test_wannier_periodwise_decay(w1):
    d = pi / w1.k_eff
    x = np.linspace(0, 4 * d, 8001)
    wv = np.abs(w1.w(x))
    maxima = [wv[(x >= k * d) & (x < (k + 1) * d)].max() for k in range(4)]
    assert all(maxima[k + 1] < maxima[k] for k in range(3))


def test_wannier_cutoff_convergence_guard():
    with pytest.raises(ConfigurationError):
        solve_wannier_1d(1e5, 5.9e6, SP.mass, cutoff=10)


def test_wannier_state_product(w1, op_lattice):
    depth, k_eff = op_lattice
    wst = solve_wannier(depth, k_eff, SP.mass, site_index=(1.0, 0.0, -2.0))
    d = pi / k_eff
    r = np.array([1.0 * d + 10e-9, 20e-9, -2.0 * d - 5e-9])
    expect = w1.w(np.array([10e-9]))[0] * w1.w(np.array([20e-9]))[0] * w1.w(np.array([-5e-9]))[0]
    assert wst.w(r) == pytest.approx(expect, rel=1e-12)


def test_condensate_to_site_scale_separation(op):
    # the condensate must dwarf the lattice period for the register model
    assert op.tf_state.radius / op.lattice.spacing > 15


# ---------------------------------------------------------------------------
# harmonic-oscillator eigenfunctions
# ---------------------------------------------------------------------------

def test_ho_orthonormality_1d():
    xi = np.linspace(-12, 12, 12001)
    rows = {n: r.copy() for n, r in modes.hermite_function_rows(10, xi)}
    for n in range(11):
        for m in range(n + 1):
            val = np.trapezoid(rows[n] * rows[m], xi)
            assert val == pytest.approx(1.0 if n == m else 0.0, abs=1e-8)


def test_ho_ground_energy_and_parity():
    st = ho_eigenfunction((0, 0, 0), OMEGA, SP.mass)
    assert st.energy == pytest.approx(1.5 * OMEGA)
    assert st.parity == 1
    assert ho_eigenfunction((1, 2, 0), OMEGA, SP.mass).parity == -1


def test_ho_psi_matches_gaussian_ground_state():
    st = ho_eigenfunction((0, 0, 0), OMEGA, SP.mass)
    a = st.length
    val = st.psi(np.zeros(3))
    assert val == pytest.approx((pi * a**2) ** -0.75, rel=1e-12)


def test_hermite_high_quanta_stable_against_closed_form():
    # |h_n(0)| = pi^(-1/4) sqrt(n!) / (2^(n/2) (n/2)!) for even n, via gammaln
    for n in (200, 700):
        val = hermite_function(n, np.array([0.0]))[0]
        ln_ref = (-0.25 * np.log(pi) + 0.5 * gammaln(n + 1)
                  - (n / 2) * np.log(2) - gammaln(n / 2 + 1))
        assert np.log(abs(val)) == pytest.approx(ln_ref, abs=1e-9)
        assert np.isfinite(val)


def test_hermite_returns_zero_not_inf_past_turning_point():
    val = hermite_function(700, np.array([50.0]))
    assert np.isfinite(val).all()


def test_quanta_cap_enforced():
    with pytest.raises(CapabilityError):
        hermite_function(701, np.array([0.0]))
    with pytest.raises(CapabilityError):
        ho_eigenfunction((700, 1, 0), OMEGA, SP.mass)


def test_negative_quanta_rejected():
    with pytest.raises(ConfigurationError):
        HOEigenstate(n=(-1, 0, 0), omega=OMEGA, mass=SP.mass)
