"""Report emitters behind the CLI subcommands.

Each runner writes delimited datasets (CSV with a mandatory header row, '.'
decimals, '\n' line endings) plus JSON summaries, and renders companion
matplotlib figures next to them unless figures are disabled.  All files go
through atomic writes and are checksummed into the run manifest.
"""

import io
import json
import os
import time

import numpy as np

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt

from .constants import pi
from . import couplings, gates, hubbard, modes, noise, optics
from .reference import OperatingPoint
from .scenario import RunManifest, atomic_write_bytes, atomic_write_text, canonical_json


def _fmt(x):
    if x is None:
        return ""
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, str):
        return x
    return format(float(x), ".12g")


def write_csv(path, header, rows):
    lines = [",".join(header)]
    lines.extend(",".join(_fmt(v) for v in row) for row in rows)
    atomic_write_text(path, "\n".join(lines) + "\n")


def write_json(path, payload):
    atomic_write_text(path, json.dumps(payload, indent=2, sort_keys=True) + "\n")


def save_figure(fig, path):
    buf = io.BytesIO()
    fig.savefig(buf, format="png", dpi=110, metadata={"Software": None})
    plt.close(fig)
    atomic_write_bytes(path, buf.getvalue())


class Reporter:
    """Shared context for one CLI run."""

    def __init__(self, config, out_dir, figures=True, version="0"):
        self.op = OperatingPoint(config)
        self.out = out_dir
        self.figures = figures
        self.manifest = RunManifest(config, version)
        os.makedirs(out_dir, exist_ok=True)
        atomic_write_text(os.path.join(out_dir, "config.json"), canonical_json(config))
        self.manifest.record(os.path.join(out_dir, "config.json"), out_dir)

    def _emit_csv(self, name, header, rows):
        path = os.path.join(self.out, name)
        write_csv(path, header, rows)
        self.manifest.record(path, self.out)

    def _emit_json(self, name, payload):
        path = os.path.join(self.out, name)
        write_json(path, payload)
        self.manifest.record(path, self.out)

    def _emit_figure(self, name, fig):
        if not self.figures:
            plt.close(fig)
            return
        path = os.path.join(self.out, name)
        save_figure(fig, path)
        self.manifest.record(path, self.out)

    def _timed(self, key, fn):
        t0 = time.perf_counter()
        out = fn()
        self.manifest.timings[key] = time.perf_counter() - t0
        return out

    def finish(self):
        return self.manifest.write(self.out)

    # ------------------------------------------------------------------
    # subcommands
    # ------------------------------------------------------------------

    def run_derive(self):
        op = self.op
        rows = self._timed("derive", lambda: op.derive_table())
        self._emit_csv(
            "derive.csv",
            ["key", "measured", "unit", "target", "rel_tol", "ok", "description"],
            [(r["key"], r["measured"], r["unit"], r["target"], r["rel_tol"],
              r["ok"], r["description"]) for r in rows],
        )
        self._emit_json("couplings.json", {
            "center": op.couplings_center.as_json_dict(),
            "corner": op.couplings_corner.as_json_dict(),
        })

        # mode profiles along one axis (condensate and site orbital)
        x = np.linspace(-op.tf_state.radius * 1.05, op.tf_state.radius * 1.05, 801)
        pts = np.zeros((len(x), 3))
        pts[:, 0] = x
        phi = op.tf_state.phi(pts)
        w1 = op.site_center.axis_solution
        xw = np.linspace(-4 * op.lattice.spacing, 4 * op.lattice.spacing, 801)
        self._emit_csv("mode_profiles.csv",
                       ["x_m", "phi_m32", "x_site_m", "w_m12"],
                       list(zip(x, phi, xw, w1.w(xw))))

        # potential-on-grid export for the three role states, in Hz
        extent = 2.5 * op.lattice.spacing
        pts3, cols = optics.potential_grid(op.trap, extent, 9)
        self._emit_csv(
            "potential_grid.csv",
            ["x_m", "y_m", "z_m", "V_state0_Hz", "V_state1_Hz", "V_state2_Hz"],
            [(p[0], p[1], p[2], cols["0"][i] / (2 * pi), cols["1"][i] / (2 * pi),
              cols["2"][i] / (2 * pi)) for i, p in enumerate(pts3)],
        )

        checked = [r for r in rows if r["ok"] is not None]
        fig, ax = plt.subplots(figsize=(7.5, 4.2))
        dev = [abs(r["measured"] - r["target"]) / abs(r["target"]) if r["target"]
               else r["measured"] for r in checked]
        tol = [r["rel_tol"] for r in checked]
        idx = np.arange(len(checked))
        ax.bar(idx, dev, color=["tab:green" if r["ok"] else "tab:red" for r in checked])
        ax.plot(idx, tol, "k_", markersize=12, label="tolerance")
        ax.set_xticks(idx)
        ax.set_xticklabels([r["key"] for r in checked], rotation=70, fontsize=7)
        ax.set_yscale("log")
        ax.set_ylabel("relative deviation")
        ax.legend(frameon=False)
        fig.tight_layout()
        self._emit_figure("derive.png", fig)
        return rows

    def run_josephson(self):
        op = self.op
        jc = op.bus_couplings
        t1 = op.cnot_schedule.pulses[0].duration
        span = (0.0, 4.0 * t1)
        init = gates.MeanFieldState(z=0.6, phi=pi / 2)
        rtol = op.config["numerics"]["meanfield_rtol"]
        tr0 = gates.josephson_meanfield(jc.j_empty, 0.0, 0.0, init, span, rtol=rtol)
        tr1 = gates.josephson_meanfield(jc.j_filled, 0.0, 0.0, init, span, rtol=rtol)
        self._emit_csv(
            "josephson.csv",
            ["t_s", "z_empty", "phi_empty_rad", "z_filled", "phi_filled_rad"],
            list(zip(tr0.t, tr0.z, tr0.phi, tr1.z, tr1.phi)),
        )
        self._emit_json("josephson.json", {
            "j_empty_rad_s": jc.j_empty, "j_filled_rad_s": jc.j_filled,
            "delta_star_rad_s": op.delta_star,
            "interference_ratio": jc.ratio,
            "energy_drift": {"empty": tr0.energy_drift, "filled": tr1.energy_drift},
        })
        fig, ax = plt.subplots(figsize=(6.5, 3.8))
        ax.plot(tr0.t * 1e3, tr0.z, label="site empty")
        ax.plot(tr1.t * 1e3, tr1.z, label="site filled")
        ax.set_xlabel("t (ms)")
        ax.set_ylabel("population imbalance z")
        ax.legend(frameon=False)
        fig.tight_layout()
        self._emit_figure("josephson.png", fig)
        return {"transfer_empty": tr0.max_transfer(), "drift_filled": tr1.max_transfer()}

    def run_cnot(self):
        op = self.op
        res = self._timed("cnot", lambda: gates.run_cnot(
            op.u, op.condensed_number, op.omega_pair, op.rabi_single,
            op.delta_star, desk_check=True,
        ))
        tr = res.diagnostics["trajectories"]["empty"]
        self._emit_csv("cnot_bus.csv", ["t_s", "z", "phi_rad"],
                       list(zip(tr.t, tr.z, tr.phi)))
        self._emit_json("cnot.json", {
            "schedule_s": [p.duration for p in res.schedule.pulses],
            "total_s": res.total_time,
            "truth_table": res.truth_table,
            "worst_fidelity": res.fidelity,
            "j_empty_rad_s": res.diagnostics["j_empty"],
            "j_filled_rad_s": res.diagnostics["j_filled"],
        })
        fig, axes = plt.subplots(1, 2, figsize=(8.5, 3.6))
        axes[0].plot(tr.t * 1e3, tr.z)
        axes[0].set_xlabel("t (ms)")
        axes[0].set_ylabel("bus imbalance z")
        names = list(res.truth_table)
        axes[1].bar(names, [res.truth_table[k] for k in names])
        axes[1].set_ylim(0.9, 1.0)
        axes[1].set_ylabel("truth-table fidelity")
        fig.tight_layout()
        self._emit_figure("cnot.png", fig)
        return res

    def run_sqrtswap(self):
        op = self.op
        tab = self._timed("sqrtswap_table", lambda: op.exchange_table())
        dbar = op.exchange_delta_bar
        res = gates.run_sqrtswap(tab, dbar, dbar, enforce_ratio=False)
        eff = res.diagnostics["effective"]
        eff_half = hubbard.sqrtswap_effective(
            tab.truncated(tab.cutoff // 2), dbar, dbar, enforce_ratio=False
        )
        en = tab.level_energies
        self._emit_csv(
            "sqrtswap_levels.csv",
            ["n", "energy_rad_s", "weight", "cross"],
            list(zip(range(tab.cutoff + 1), en, tab.weights_a, tab.cross)),
        )
        self._emit_json("sqrtswap.json", {
            "coupling_rad_s": eff.coupling,
            "gate_time_s": eff.gate_time,
            "delta_bar_rad_s": dbar,
            "shift_a_rad_s": eff.shift_a, "shift_b_rad_s": eff.shift_b,
            "validity_ratio": eff.validity_ratio,
            "cutoff": tab.cutoff,
            "half_cutoff_coupling_rad_s": eff_half.coupling,
            "convergence": abs(eff_half.coupling / eff.coupling - 1.0),
            "exchange_probability": res.diagnostics["exchange_probability"],
            "swap_probability_twice": res.diagnostics["swap_probability_twice"],
            "state_count_through_cutoff": modes.state_count_through(tab.cutoff),
        })
        fig, ax = plt.subplots(figsize=(6.5, 3.8))
        ax.plot(en / 1e3, tab.weights_a, lw=0.8)
        ax.axvline(dbar / 1e3, color="tab:red", lw=0.8, label="site detuning")
        ax.set_xlabel("level energy (krad/s)")
        ax.set_ylabel("shell weight")
        ax.set_yscale("log")
        ax.legend(frameon=False)
        fig.tight_layout()
        self._emit_figure("sqrtswap.png", fig)
        return res

    def run_readout(self):
        op = self.op
        down = gates.readout_signal(False, op.u, op.condensed_number,
                                    op.omega_pair, op.delta_star)
        up = gates.readout_signal(True, op.u, op.condensed_number,
                                  op.omega_pair, op.delta_star)
        self._emit_csv("readout.csv", ["t_s", "z_empty", "z_filled"],
                       list(zip(down.trajectory.t, down.trajectory.z, up.trajectory.z)))
        self._emit_json("readout.json", {
            "period_s": down.period,
            "contrast": down.contrast,
        })
        fig, ax = plt.subplots(figsize=(6.5, 3.8))
        ax.plot(down.trajectory.t * 1e3, down.trajectory.z, label="site empty")
        ax.plot(up.trajectory.t * 1e3, up.trajectory.z, label="site filled")
        ax.set_xlabel("t (ms)")
        ax.set_ylabel("bus imbalance z")
        ax.legend(frameon=False)
        fig.tight_layout()
        self._emit_figure("readout.png", fig)
        return down

    def run_loss(self):
        op = self.op
        n = int(round(op.condensed_number))
        m = op.config["lattice"]["sites_per_axis"] ** 3
        rows = noise.loss_dataset(n, m)
        self._emit_csv("loss.csv", ["eta", "P_full", "P_approx"], rows)
        fig, ax = plt.subplots(figsize=(6.5, 3.8))
        eta = np.array([r[0] for r in rows], dtype=float)
        ax.plot(eta[1:], [r[1] for r in rows[1:]], label="full")
        ax.plot(eta[1:], [r[2] for r in rows[1:]], "--", label="approximate")
        ax.set_xscale("log")
        ax.set_xlabel("atom losses")
        ax.set_ylabel("bit-flip probability")
        ax.legend(frameon=False)
        fig.tight_layout()
        self._emit_figure("loss.png", fig)
        return rows

    def run_budget(self):
        op = self.op
        budget = noise.lifetime_budget(op.trap)
        site_a = op.exchange_sites[0]

        def eta_at(offset):
            shifted = modes.WannierState(
                axis_solution=site_a.axis_solution,
                site_index=(site_a.site_index[0] + offset / site_a.spacing,
                            site_a.site_index[1], site_a.site_index[2]),
                spacing=site_a.spacing,
            )
            return couplings.mode_overlap(op.tf_state, shifted, couplings.FlatDrive(1.0))

        report = self._timed("sensitivity", lambda: noise.sensitivity_report(
            op.u, op.trap, op.condensed_number, op.rabi_single,
            op.omega_pair, op.delta_star, eta_fc_fn=eta_at,
        ))
        self._emit_json("budget.json", {
            "lifetimes_s": dict(sorted(budget.channels.items())),
            "combined_rate_per_s": budget.combined_rate,
            "combined_lifetime_s": budget.combined_lifetime,
        })
        self._emit_csv(
            "sensitivity.csv",
            ["parameter", "nominal", "nominal_unit", "delta", "quantity",
             "propagated", "unit", "formula_path", "reference_value"],
            [r.as_tuple() for r in report],
        )
        fig, ax = plt.subplots(figsize=(6.5, 3.8))
        names = sorted(budget.channels)
        ax.barh(names, [budget.channels[k] for k in names])
        ax.set_xlabel("1/e lifetime (s)")
        fig.tight_layout()
        self._emit_figure("budget.png", fig)
        return budget, report

    def run_validate(self):
        from .acceptance import run_all
        results = self._timed("validate", lambda: run_all(self.op))
        self._emit_csv(
            "validate.csv",
            ["criterion", "check", "passed", "measured", "expected", "detail"],
            [(r.criterion, r.name, r.passed, r.measured, r.expected, r.detail)
             for r in results],
        )
        return results


SUBCOMMANDS = {
    "derive": Reporter.run_derive,
    "josephson": Reporter.run_josephson,
    "cnot": Reporter.run_cnot,
    "sqrtswap": Reporter.run_sqrtswap,
    "readout": Reporter.run_readout,
    "loss": Reporter.run_loss,
    "budget": Reporter.run_budget,
    "validate": Reporter.run_validate,
}
