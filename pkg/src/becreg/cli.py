"""Command-line entry point.

    becreg <subcommand> --config <path> --out <dir> [--threads N]
           [--tolerance-profile strict|fast] [--no-figures]

Subcommands: derive, josephson, cnot, sqrtswap, readout, loss, budget,
validate.  Exit codes: 0 success, 1 validation failure, 2 configuration
error, 3 numerical error.
"""

import argparse
import sys

from importlib.metadata import version as _pkg_version

from .errors import CapabilityError, ConfigurationError, NumericalError
from . import scenario
from .report import SUBCOMMANDS, Reporter


def _version():
    try:
        return _pkg_version("becreg")
    except Exception:
        return "0.0.0"


def build_parser():
    p = argparse.ArgumentParser(
        prog="becreg",
        description="Simulator for a condensate-loaded lattice quantum register",
    )
    p.add_argument("subcommand", choices=sorted(SUBCOMMANDS))
    p.add_argument("--config", default=None, help="scenario JSON (defaults apply)")
    p.add_argument("--out", default="becreg-out", help="output directory")
    p.add_argument("--threads", type=int, default=None,
                   help="advisory thread count, recorded in the config")
    p.add_argument("--tolerance-profile", choices=["strict", "fast"], default=None)
    p.add_argument("--no-figures", action="store_true",
                   help="emit datasets only, no rendered figures")
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        overrides = {}
        if args.threads is not None:
            overrides.setdefault("run", {})["threads"] = args.threads
        if args.tolerance_profile is not None:
            overrides.setdefault("numerics", {})["tolerance_profile"] = args.tolerance_profile
        config = scenario.parse_config(args.config, overrides or None)
        if config["numerics"]["tolerance_profile"] == "fast":
            config["numerics"]["quanta_cutoff"] = min(
                config["numerics"]["quanta_cutoff"], 350
            )
            config["numerics"]["meanfield_rtol"] = max(
                config["numerics"]["meanfield_rtol"], 1e-7
            )
        reporter = Reporter(config, args.out, figures=not args.no_figures,
                            version=_version())
        result = SUBCOMMANDS[args.subcommand](reporter)
        reporter.finish()
        if args.subcommand == "validate":
            from .acceptance import summarize
            text, n_fail = summarize(result)
            print(text)
            return 1 if n_fail else 0
        print(f"wrote {len(reporter.manifest.outputs)} artifact(s) to {args.out}")
        return 0
    except ConfigurationError as exc:
        print(f"configuration error [{args.subcommand}]: {exc}", file=sys.stderr)
        return 2
    except (NumericalError, CapabilityError) as exc:
        print(f"numerical error [{args.subcommand}]: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
