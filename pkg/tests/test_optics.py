import numpy as np
import pytest
from dataclasses import replace

from becreg import optics
from becreg.atomdata import STATE_0, STATE_1, STATE_2, rb87
from becreg.constants import hbar, pi
from becreg.errors import ConfigurationError, FitError
from becreg.optics import (
    BeamSpec,
    LatticeBeamPair,
    angle_for_spacing,
    dipole_potential,
    fit_harmonic_frequency,
    lattice_depth,
    lattice_geometry,
    lattice_pair_potential,
    reference_trap,
)

SP = rb87()
B_EQ = 5.4e-4 / np.sqrt(3) * np.ones(3)


def beam(P=1, power=0.1):
    return BeamSpec(wavelength=808e-9, power=power, axis="x",
                    waists={"y": 90e-6, "z": 120e-6}, polarization=P)


def test_far_outside_beam_is_zero():
    v = dipole_potential(beam(), np.array([0.0, 5e-3, 0.0]), STATE_0, SP)
    assert v == pytest.approx(0.0, abs=1e-30)


def test_mf0_state_independent_of_polarization():
    r = np.array([0.0, 20e-6, -10e-6])
    vals = [dipole_potential(beam(P), r, STATE_0, SP) for P in (-1, 0, 1)]
    assert vals[0] == vals[1] == vals[2]


def test_mf_state_depends_on_circular_polarization():
    r = np.zeros(3)
    v_plus = dipole_potential(beam(1), r, STATE_1, SP)
    v_lin = dipole_potential(beam(0), r, STATE_1, SP)
    assert v_plus != v_lin


def test_red_detuned_beam_attracts():
    assert dipole_potential(beam(), np.zeros(3), STATE_0, SP) < 0


def test_resonant_beam_rejected():
    b = BeamSpec(wavelength=SP.d1_wavelength, power=0.1, axis="x",
                 waists={"y": 90e-6, "z": 120e-6})
    with pytest.raises(ConfigurationError):
        dipole_potential(b, np.zeros(3), STATE_0, SP)


def test_trap_fit_operating_point(op):
    fit = op.trap_fit
    assert fit.omega_bar == pytest.approx(2 * pi * 100, rel=0.05)
    assert fit.anisotropy < 0.10


def test_fit_recovers_exact_quadratic():
    m = SP.mass
    omegas = 2 * pi * np.array([80.0, 100.0, 125.0])

    def quad(r):
        return 0.5 * m * np.sum(omegas**2 * np.asarray(r) ** 2, axis=-1) / hbar

    fit = fit_harmonic_frequency(quad, np.zeros(3), m)
    assert np.allclose(fit.omegas, omegas, rtol=1e-9)


def test_fit_rejects_maximum():
    def hump(r):
        return -np.sum(np.asarray(r) ** 2, axis=-1) * 1e12

    with pytest.raises(FitError):
        fit_harmonic_frequency(hump, np.zeros(3), SP.mass)


def test_power_doubling_scales_frequency_sqrt2():
    cfg = reference_trap()
    doubled = replace(
        cfg, ho_beams=tuple(replace(b, power=2 * b.power) for b in cfg.ho_beams)
    )
    f1 = cfg.trap_fit()
    f2 = doubled.trap_fit()
    assert f2.omega_bar == pytest.approx(np.sqrt(2) * f1.omega_bar, rel=0.01)


def test_superposition_of_beams():
    cfg = reference_trap()
    r = np.array([15e-6, -22e-6, 8e-6])
    total = cfg.ho_potential(r, STATE_0)
    parts = sum(dipole_potential(b, r, STATE_0, cfg.species) for b in cfg.ho_beams)
    assert total == pytest.approx(parts, rel=1e-14)


def test_lattice_geometry_counterpropagating():
    spec = lattice_geometry(790e-9, pi)
    assert spec.spacing == pytest.approx(790e-9 / 2, rel=1e-14)


def test_angle_for_spacing_roundtrip():
    phi = angle_for_spacing(790e-9, 532e-9)
    assert np.degrees(phi) == pytest.approx(95.99, abs=0.05)
    assert lattice_geometry(790e-9, phi).spacing == pytest.approx(532e-9, rel=1e-12)


def test_angle_for_unreachable_spacing():
    with pytest.raises(ConfigurationError):
        angle_for_spacing(790e-9, 300e-9)  # below lambda/2
    with pytest.raises(ConfigurationError):
        lattice_geometry(790e-9, 0.0)


def pair(theta=pi / 2, wavelength=790e-9):
    return LatticeBeamPair(wavelength=wavelength, power_per_beam=0.067,
                           waist=150e-6, axis="x", theta=theta,
                           phi=angle_for_spacing(wavelength, 532e-9))


def test_magic_wavelength_blinds_mf0_states():
    depth1 = lattice_depth(pair(), STATE_1, B_EQ, SP)
    depth0 = lattice_depth(pair(), STATE_0, B_EQ, SP)
    depth2 = lattice_depth(pair(), STATE_2, B_EQ, SP)
    assert depth0 < 1e-3 * depth1
    assert depth2 < 1e-3 * depth1


def test_theta_zero_is_pure_scalar():
    # with no polarization rotation the spin-dependent term vanishes and all
    # states see the same (scalar) lattice
    d1 = lattice_depth(pair(theta=0.0), STATE_1, B_EQ, SP)
    d0 = lattice_depth(pair(theta=0.0), STATE_0, B_EQ, SP)
    assert d1 == pytest.approx(d0, rel=1e-12)


def test_mf0_sees_only_scalar_for_any_theta_and_field():
    r = np.array([[0.1e-6, 0, 0], [0.2e-6, 5e-6, -3e-6]])
    for theta in (0.3, pi / 2):
        p = pair(theta=theta)
        va = lattice_pair_potential(p, r, STATE_0, B_EQ, SP)
        vb = lattice_pair_potential(p, r, STATE_0, np.array([0, 0, 1e-4]), SP)
        assert np.allclose(va, vb, rtol=1e-12)


def test_operating_lattice_depth(op):
    assert op.lattice.depth == pytest.approx(8.0e5, rel=0.05)
    assert op.lattice.spacing == pytest.approx(532e-9, rel=1e-12)


def test_spin_term_needs_field():
    with pytest.raises(ConfigurationError):
        lattice_pair_potential(pair(), np.zeros((1, 3)), STATE_1, np.zeros(3), SP)


def test_potential_grid_shapes():
    cfg = reference_trap()
    pts, cols = optics.potential_grid(cfg, 1e-6, 5)
    assert pts.shape == (125, 3)
    assert set(cols) == {"0", "1", "2"}
    assert all(np.isfinite(v).all() for v in cols.values())
