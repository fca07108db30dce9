"""The acceptance gate: every release criterion as an executable check.

Shared by the `validate` CLI subcommand (exit nonzero iff any check fails)
and by tests/test_acceptance.py.  Checks are grouped by criterion number;
each returns measured/expected values so failures are diagnosable from the
report alone.
"""

import os
import tempfile
from dataclasses import dataclass

import numpy as np

from .constants import pi
from . import atomdata, couplings, gates, hubbard, modes, noise
from .reference import (
    DERIVED_TARGETS,
    THERMO_TARGETS,
    TIMING_TARGETS,
    OperatingPoint,
)


@dataclass(frozen=True)
class CheckResult:
    criterion: int
    name: str
    passed: bool
    measured: object
    expected: str
    detail: str = ""

    def line(self):
        mark = "PASS" if self.passed else "FAIL"
        return f"[{mark}] criterion {self.criterion}: {self.name} " \
               f"(measured {self.measured}, expected {self.expected})"


# Known defect: the quoted condensate radius is mutually inconsistent with
# the quoted interaction energies (which encode R ~= 9.5 um through the
# density overlaps this suite reproduces to ~1%).  The stated 18.1 um value
# follows from the closed form only if the 8 pi in the peak density is
# dropped.  The check runs at the stated tolerance and fails honestly.
EXPECTED_DEFECTS = {"tf_radius"}


def _target_checks(op, targets, criterion, include_exchange):
    rows = {r["key"]: r for r in op.derive_table(include_exchange=include_exchange)}
    out = []
    for t in targets:
        r = rows[t.key]
        out.append(CheckResult(
            criterion=criterion, name=t.key, passed=bool(r["ok"]),
            measured=f"{r['measured']:.6g} {t.unit}".strip(),
            expected=f"{t.value:.6g} {t.unit} within {t.rel_tol:.3g}".strip(),
            detail=t.description,
        ))
    return out


def check_derived_parameters(op):
    """Criterion 1: derived-parameter regression."""
    return _target_checks(op, DERIVED_TARGETS, 1, include_exchange=False)


def check_thermodynamics(op):
    """Criterion 2: condensate fraction, excited-state occupation, Tc drop."""
    out = _target_checks(op, THERMO_TARGETS, 2, include_exchange=False)
    # absolute-tolerance variants stated directly
    frac = op.thermo.condensed_number / op.thermo.total_number
    occ = atomdata.thermal_level_occupation(op.trap_fit.omega_bar, op.thermo.temperature)
    out.append(CheckResult(
        2, "condensate_fraction_within_2_points", abs(frac - 0.70) <= 0.02,
        f"{frac:.4f}", "0.70 +- 0.02"))
    out.append(CheckResult(
        2, "first_excited_within_2_atoms", abs(occ - 62.0) <= 2.0,
        f"{occ:.2f}", "62 +- 2"))
    drop = 1.0 - 0.2 ** (1 / 3)
    out.append(CheckResult(
        2, "tc_drop_within_tenth_point", abs(drop - 0.415) <= 0.001,
        f"{drop:.5f}", "0.415 +- 0.001"))
    return out


def check_gate_timing(op):
    """Criterion 3: pulse, gate, and readout times."""
    return _target_checks(op, TIMING_TARGETS, 3, include_exchange=True)


def check_interference(op):
    """Criterion 4: destructive interference and the conditional mean field."""
    out = []
    jc = op.bus_couplings
    out.append(CheckResult(
        4, "interference_ratio", jc.ratio < 1e-3 and abs(jc.j_empty) > 0,
        f"{jc.ratio:.3e}", "|j_filled/j_empty| < 1e-3 with j_empty nonzero",
        detail=f"delta* = {op.delta_star:.6g} rad/s",
    ))
    init = gates.MeanFieldState(z=0.6, phi=pi / 2)
    t1 = gates.transfer_arc(0.6) / abs(jc.j_empty)
    tr0 = gates.josephson_meanfield(jc.j_empty, 0.0, 0.0, init, (0.0, 4 * t1))
    tr1 = gates.josephson_meanfield(jc.j_filled, 0.0, 0.0, init, (0.0, 4 * t1))
    swing = 1.0 + 0.6
    out.append(CheckResult(
        4, "meanfield_transfer_empty", tr0.max_transfer() >= 0.95 * swing,
        f"{tr0.max_transfer() / swing:.4f}", ">= 0.95 of full swing"))
    out.append(CheckResult(
        4, "meanfield_drift_filled", tr1.max_transfer() <= 0.05 * swing,
        f"{tr1.max_transfer() / swing:.3e}", "<= 0.05 of full swing"))
    out.append(CheckResult(
        4, "meanfield_energy_drift", tr0.energy_drift < 1e-6,
        f"{tr0.energy_drift:.2e}", "< 1e-6 relative"))
    return out


def _effective_vs_exact(n_total, drive_ratio=0.1):
    """Worst absolute population mismatch over one transfer period."""
    u11 = 500.0
    u = {"00": 0.0, "11": u11, "22": 0.0, "01": 0.0, "02": 0.0, "12": 0.0}
    delta = u11
    n0 = n_total // 2
    n2 = n_total - n0
    omega = drive_ratio * delta / np.sqrt(n_total)
    basis = hubbard.FockBasis(n_total, max_site_occupancy=2)
    h = hubbard.build_hamiltonian(basis, u, omega, omega, 0.0, delta)
    worst = 0.0
    for manifold, start in ((0, (n0, 0, n2)), (1, (n0, 1, n2 - 1))):
        eff = hubbard.effective_hamiltonian(h, manifold, validity_warn=0.2)
        j0 = abs(hubbard.josephson_couplings(u, n_total, delta, omega).j_empty)
        period = pi / j0
        ts = np.linspace(0.0, period, 60)
        psi0 = basis.vector(start).astype(complex)
        exact = hubbard.evolve(h, psi0, ts)
        idx = [basis.index(s) for s in eff.states]
        p_exact = np.abs(exact[:, idx]) ** 2
        psi0_eff = np.zeros(len(eff.states), dtype=complex)
        psi0_eff[eff.index(start)] = 1.0
        p_eff = np.abs(hubbard.evolve(eff, psi0_eff, ts)) ** 2
        worst = max(worst, float(np.abs(p_exact - p_eff).max()))
    return worst


def check_effective_theory(op):
    """Criterion 5: effective-manifold dynamics against exact evolution."""
    out = []
    for n in (4, 6, 8):
        worst = _effective_vs_exact(n)
        out.append(CheckResult(
            5, f"effective_vs_exact_N{n}", worst <= 0.05,
            f"{worst:.4f}", "<= 0.05 absolute population"))

    # two-state restriction of the full Hamiltonian matches the closed form
    u = op.u
    basis = hubbard.FockBasis(24, max_site_occupancy=1)
    om01, delta = 7.0, 41.0
    h = hubbard.build_hamiltonian(basis, u, om01, 0.0, 0.0, delta)
    n0, n2 = 19, 5
    i = basis.index((n0, 0, n2))
    j = basis.index((n0 - 1, 1, n2))
    sub = h.matrix[np.ix_([i, j], [i, j])]
    ref = hubbard.single_qubit_matrix(u, n0, n2, om01, delta)
    offset = sub[0, 0] - ref[0, 0]
    err = np.abs(sub - ref - offset * np.eye(2)).max()
    scale = max(abs(delta), abs(om01) * np.sqrt(n0))
    out.append(CheckResult(
        5, "two_state_reduction_exact", err <= 1e-10 * scale,
        f"{err:.2e}", "machine-level agreement"))

    # transition elements of the effective manifolds match the closed forms
    # with the occupation-dependent denominator terms retained
    u_toy = {"00": 0.11, "11": 900.0, "22": 0.21, "01": 0.17, "02": 0.13, "12": 0.19}
    n_tot = 8
    basis2 = hubbard.FockBasis(n_tot, max_site_occupancy=2)
    om, dd = 3.0, 700.0
    h2 = hubbard.build_hamiltonian(basis2, u_toy, om, om, 0.0, dd)
    eff0 = hubbard.effective_hamiltonian(h2, 0)
    eff1 = hubbard.effective_hamiltonian(h2, 1, validity_warn=1.0)
    errs = []
    for n0t in (2, 3, 5):
        n2t = n_tot - n0t
        el = eff0.matrix[eff0.index((n0t, 0, n2t)), eff0.index((n0t + 1, 0, n2t - 1))]
        (d1, d2), _ = hubbard._j_denominators(u_toy, n_tot, dd, n0=n0t)
        ref0 = 0.5 * om**2 * (1 / d1 + 1 / d2) * np.sqrt((n0t + 1) * n2t)
        errs.append(abs(el - ref0) / abs(ref0))
    for n0t in (2, 4):
        n2t = n_tot - 1 - n0t
        el = eff1.matrix[eff1.index((n0t, 1, n2t)), eff1.index((n0t + 1, 1, n2t - 1))]
        _, (d1, d2, d3, d4) = hubbard._j_denominators(u_toy, n_tot - 1, dd, n0=n0t)
        ref1 = (om**2 / d1 + om**2 / d2 + 0.5 * om**2 / d3 + 0.5 * om**2 / d4) \
            * np.sqrt((n0t + 1) * n2t)
        errs.append(abs(el - ref1) / abs(ref1))
    worst = max(errs)
    out.append(CheckResult(
        5, "transition_elements_match_closed_forms", worst <= 1e-9,
        f"{worst:.2e}", "exact algebraic identity"))
    return out


def check_cnot_truth_table(op):
    """Criterion 6: desk-scale exact conditional-NOT."""
    res = gates.run_cnot_exact(bus_atoms=20)
    return [CheckResult(
        6, "cnot_truth_table_desk", res.fidelity > 0.99,
        {k: round(v, 5) for k, v in res.truth_table.items()},
        "> 0.99 on all four inputs")]


def check_loss_combinatorics(op):
    """Criterion 7: oracle equality, limiting value, ordering, monotonicity."""
    out = []
    worst = 0.0
    for n in range(2, 9):
        for m in range(0, n + 1):
            for eta in range(0, n):
                exact = float(noise.loss_bruteforce_oracle(n, m, eta))
                full = noise.loss_probability(n, m, eta, "full")
                worst = max(worst, abs(full - exact))
    out.append(CheckResult(
        7, "bruteforce_oracle_equality", worst <= 1e-12,
        f"{worst:.2e}", "exact for all N <= 8"))

    n, m = 700_000, 1000
    p700 = noise.loss_probability(n, m, 700, "approx")
    out.append(CheckResult(
        7, "limit_point_eta700", abs(p700 - 0.632) <= 1e-3,
        f"{p700:.5f}", "0.632 +- 0.001"))

    rows = noise.loss_dataset(n, m)
    ordered = all(r[1] >= r[2] - 1e-15 for r in rows)
    out.append(CheckResult(
        7, "full_bounds_approx", ordered, "P_full >= P_approx on the grid",
        "ordering holds everywhere"))

    rng = np.random.default_rng(op.config["run"]["seed"])
    mono = True
    for _ in range(200):
        nn = int(rng.integers(10, 5000))
        mm = int(rng.integers(1, nn))
        ee = int(rng.integers(1, nn - 1))
        mode = "full" if rng.random() < 0.5 else "approx"
        p0 = noise.loss_probability(nn, mm, ee, mode)
        if ee + 1 < nn and noise.loss_probability(nn, mm, ee + 1, mode) < p0 - 1e-14:
            mono = False
        if mm + 1 <= nn and noise.loss_probability(nn, mm + 1, ee, mode) < p0 - 1e-14:
            mono = False
    out.append(CheckResult(
        7, "monotone_in_eta_and_m", mono, "random grid", "nondecreasing"))
    return out


def check_mode_sum(op):
    """Criterion 8: state count and cutoff convergence of the exchange sum."""
    out = []
    count = modes.state_count_through(700)
    out.append(CheckResult(
        8, "state_count_quanta_700", count == 57_657_951,
        str(count), "57657951 exactly"))
    tab = op.exchange_table()
    dbar = op.exchange_delta_bar
    full = hubbard.sqrtswap_effective(tab, dbar, dbar, enforce_ratio=False)
    half = hubbard.sqrtswap_effective(tab.truncated(350), dbar, dbar, enforce_ratio=False)
    conv = abs(half.coupling / full.coupling - 1.0)
    out.append(CheckResult(
        8, "coupling_cutoff_convergence", conv <= 0.01,
        f"{conv:.2e}", "<= 1% between quanta 350 and 700",
        detail=f"coupling {full.coupling:.6g} rad/s",
    ))
    return out


def check_sensitivities(op):
    """Criterion 9: shot-noise and field-noise regression."""
    eta_fn = None
    rep = noise.sensitivity_report(
        op.u, op.trap, op.condensed_number, op.rabi_single,
        op.omega_pair, op.delta_star, eta_fc_fn=eta_fn,
    )
    out = []
    checks = [
        ("transition frequency (Zeeman)", 30.0, "Hz"),
        ("transition frequency (polarization)", 11.2, "rad/s"),
        ("ensemble Rabi rate", 0.376, "rad/s"),
        ("transition frequency (site-bus collisional shift)", 28.7, "rad/s"),
    ]
    for qty, ref, unit in checks:
        row = rep.by_quantity(qty)
        ok = abs(row.propagated - ref) <= 0.15 * ref
        out.append(CheckResult(
            9, qty.replace(" ", "_"), ok,
            f"{row.propagated:.4g} {unit}", f"{ref} {unit} within 15%"))
    fd, analytic = noise.sqrtN_rabi_sensitivity(op.rabi_single, op.condensed_number)
    rel = abs(fd - analytic) / analytic
    out.append(CheckResult(
        9, "fd_vs_analytic_sqrtN_slope", rel <= 1e-4,
        f"{rel:.2e}", "<= 1e-4 relative"))
    return out


def check_determinism(op):
    """Criterion 10: identical config -> identical output checksums."""
    from .report import Reporter

    manifests = []
    for _ in range(2):
        with tempfile.TemporaryDirectory() as d:
            rep = Reporter(op.config, d, figures=True)
            rep.run_loss()
            body = rep.finish()
            manifests.append(body["outputs"])
    same = manifests[0] == manifests[1]
    return [CheckResult(
        10, "identical_config_identical_checksums", same,
        f"{len(manifests[0])} outputs compared", "bit-identical artifacts")]


CHECKS = (
    check_derived_parameters,
    check_thermodynamics,
    check_gate_timing,
    check_interference,
    check_effective_theory,
    check_cnot_truth_table,
    check_loss_combinatorics,
    check_mode_sum,
    check_sensitivities,
    check_determinism,
)


def run_all(op=None):
    op = op or OperatingPoint()
    results = []
    for fn in CHECKS:
        results.extend(fn(op))
    return results


def summarize(results):
    lines = [r.line() for r in results]
    n_fail = sum(not r.passed for r in results)
    expected = sum(not r.passed and r.name in EXPECTED_DEFECTS for r in results)
    lines.append(
        f"{len(results) - n_fail}/{len(results)} checks passed"
        + (f" ({expected} known documented defect(s) among the failures)" if expected else "")
    )
    return "\n".join(lines), n_fail
