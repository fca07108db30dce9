"""Scenario configuration (JSON with explicit units), deterministic output
manifests, and atomic file writes.

Every physical key carries its unit in the suffix (_nm, _mW, _um, _G, _nK,
_2pi_Hz for ordinary frequencies, _rad_s for angular ones).  Unknown keys
are rejected so typos cannot silently fall back to defaults.
"""

import copy
import hashlib
import json
import os
import tempfile

import numpy as np
import jsonschema

from .constants import u_amu
from .errors import ConfigurationError
from . import atomdata, optics

DEFAULT_CONFIG = {
    "species": {
        "mass_amu": 86.909180527,
        "a00_nm": 5.34, "a11_nm": 5.31, "a22_nm": 5.00,
        "a01_nm": 5.31, "a02_nm": 5.23, "a12_nm": 5.16,
        "hyperfine_GHz": 6.834682610904,
        "gF_F1": -0.501827, "gF_F2": 0.499836,
    },
    "trap": {
        "ho_wavelength_nm": 808.0,
        "ho_power_mW": 100.0,
        "waists_beam_x_um": {"y": 90.0, "z": 120.0},
        "waists_beam_y_um": {"x": 87.3, "z": 132.0},
        "bfield_G": 5.40,
    },
    "lattice": {
        "wavelength_nm": 790.0,
        "power_mW": 67.0,
        "waist_um": 150.0,
        "spacing_nm": 532.0,
        "theta_deg": 90.0,
        "sites_per_axis": 10,
    },
    "atoms": {
        "total_number": 1_000_000,
        "temperature_nK": 300.0,
        "condensed_number": 700_000,
    },
    "drives": {
        "omega_pair_2pi_Hz": 192.0,
        "rabi_single_2pi_Hz": 100.0,
        "exchange_amplitude_2pi_Hz": 11_200.0,
        "exchange_detuning_rad_s": -2140.0,
        "dressing_shift_rad_s": -8050.0,
        "dressing_waist_um": 14.1,
        "interference_bracket_rad_s": [100.0, 12_000.0],
    },
    "numerics": {
        "quanta_cutoff": 700,
        "wannier_cutoff": 25,
        "meanfield_rtol": 1.0e-9,
        "tolerance_profile": "strict",
    },
    "run": {
        "seed": 0,
        "threads": 1,
    },
}

_POS = {"type": "number", "exclusiveMinimum": 0}
_NONNEG = {"type": "number", "minimum": 0}

CONFIG_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "properties": {
        "species": {
            "type": "object", "additionalProperties": False,
            "properties": {
                "mass_amu": _POS,
                "a00_nm": _POS, "a11_nm": _POS, "a22_nm": _POS,
                "a01_nm": _POS, "a02_nm": _POS, "a12_nm": _POS,
                "hyperfine_GHz": _POS,
                "gF_F1": {"type": "number"}, "gF_F2": {"type": "number"},
            },
        },
        "trap": {
            "type": "object", "additionalProperties": False,
            "properties": {
                "ho_wavelength_nm": _POS,
                "ho_power_mW": _NONNEG,
                "waists_beam_x_um": {
                    "type": "object", "additionalProperties": False,
                    "properties": {"y": _POS, "z": _POS},
                },
                "waists_beam_y_um": {
                    "type": "object", "additionalProperties": False,
                    "properties": {"x": _POS, "z": _POS},
                },
                "bfield_G": _NONNEG,
            },
        },
        "lattice": {
            "type": "object", "additionalProperties": False,
            "properties": {
                "wavelength_nm": _POS,
                "power_mW": _NONNEG,
                "waist_um": _POS,
                "spacing_nm": _POS,
                "theta_deg": {"type": "number", "minimum": 0, "maximum": 180},
                "sites_per_axis": {"type": "integer", "minimum": 2, "maximum": 100},
            },
        },
        "atoms": {
            "type": "object", "additionalProperties": False,
            "properties": {
                "total_number": {"type": "integer", "minimum": 1},
                "temperature_nK": _NONNEG,
                "condensed_number": {"type": "integer", "minimum": 1},
            },
        },
        "drives": {
            "type": "object", "additionalProperties": False,
            "properties": {
                "omega_pair_2pi_Hz": _POS,
                "rabi_single_2pi_Hz": _POS,
                "exchange_amplitude_2pi_Hz": _POS,
                "exchange_detuning_rad_s": {"type": "number"},
                "dressing_shift_rad_s": {"type": "number"},
                "dressing_waist_um": _POS,
                "interference_bracket_rad_s": {
                    "type": "array", "items": {"type": "number"},
                    "minItems": 2, "maxItems": 2,
                },
            },
        },
        "numerics": {
            "type": "object", "additionalProperties": False,
            "properties": {
                "quanta_cutoff": {"type": "integer", "minimum": 10, "maximum": 700},
                "wannier_cutoff": {"type": "integer", "minimum": 15, "maximum": 60},
                "meanfield_rtol": _POS,
                "tolerance_profile": {"enum": ["strict", "fast"]},
            },
        },
        "run": {
            "type": "object", "additionalProperties": False,
            "properties": {
                "seed": {"type": "integer", "minimum": 0},
                "threads": {"type": "integer", "minimum": 1},
            },
        },
    },
}


def _deep_merge(base, override, path=""):
    out = copy.deepcopy(base)
    for key, val in override.items():
        here = f"{path}.{key}" if path else key
        if key not in base:
            raise ConfigurationError(f"unknown config key: {here}")
        if isinstance(base[key], dict):
            if not isinstance(val, dict):
                raise ConfigurationError(f"config key {here} must be an object")
            out[key] = _deep_merge(base[key], val, here)
        else:
            out[key] = val
    return out


def validate_config(config):
    try:
        jsonschema.validate(config, CONFIG_SCHEMA)
    except jsonschema.ValidationError as exc:
        key = ".".join(str(p) for p in exc.absolute_path) or "<root>"
        raise ConfigurationError(f"config key {key}: {exc.message}") from None
    return config


def parse_config(path=None, overrides=None):
    """Load, merge with defaults, and validate a scenario config.

    ``path=None`` yields the default operating configuration; an empty JSON
    object does the same.  Unknown keys raise ConfigurationError naming the
    key; bounds violations name the key and constraint.
    """
    data = {}
    if path is not None:
        try:
            with open(path, "r", encoding="utf-8") as fh:
                data = json.load(fh)
        except OSError as exc:
            raise ConfigurationError(f"cannot read config {path}: {exc}") from None
        except json.JSONDecodeError as exc:
            raise ConfigurationError(f"config {path} is not valid JSON: {exc}") from None
        if not isinstance(data, dict):
            raise ConfigurationError("config root must be a JSON object")
    merged = _deep_merge(DEFAULT_CONFIG, data)
    if overrides:
        merged = _deep_merge(merged, overrides)
    return validate_config(merged)


def canonical_json(config):
    """Stable serialization: sorted keys, fixed separators, newline-terminated."""
    return json.dumps(config, sort_keys=True, indent=2) + "\n"


def config_hash(config):
    return hashlib.sha256(canonical_json(config).encode()).hexdigest()


# ---------------------------------------------------------------------------
# config -> physical objects
# ---------------------------------------------------------------------------


def species_from_config(config):
    s = config["species"]
    nm = 1e-9
    return atomdata.rb87().with_overrides(
        mass=s["mass_amu"] * u_amu,
        hyperfine_splitting=s["hyperfine_GHz"] * 1e9,
        lande_gF={1: s["gF_F1"], 2: s["gF_F2"]},
        scattering_lengths=np.array([
            [s["a00_nm"], s["a01_nm"], s["a02_nm"]],
            [s["a01_nm"], s["a11_nm"], s["a12_nm"]],
            [s["a02_nm"], s["a12_nm"], s["a22_nm"]],
        ]) * nm,
    )


def trap_from_config(config):
    sp = species_from_config(config)
    t = config["trap"]
    lat = config["lattice"]
    um = 1e-6
    ho = (
        optics.BeamSpec(
            wavelength=t["ho_wavelength_nm"] * 1e-9, power=t["ho_power_mW"] * 1e-3,
            axis="x", waists={k: v * um for k, v in t["waists_beam_x_um"].items()},
        ),
        optics.BeamSpec(
            wavelength=t["ho_wavelength_nm"] * 1e-9, power=t["ho_power_mW"] * 1e-3,
            axis="y", waists={k: v * um for k, v in t["waists_beam_y_um"].items()},
        ),
    )
    phi = optics.angle_for_spacing(lat["wavelength_nm"] * 1e-9, lat["spacing_nm"] * 1e-9)
    pairs = tuple(
        optics.LatticeBeamPair(
            wavelength=lat["wavelength_nm"] * 1e-9,
            power_per_beam=lat["power_mW"] * 1e-3,
            waist=lat["waist_um"] * um,
            axis=ax, theta=np.deg2rad(lat["theta_deg"]), phi=phi,
        )
        for ax in ("x", "y", "z")
    )
    b = t["bfield_G"] * 1e-4 / np.sqrt(3.0) * np.ones(3)
    return optics.TrapConfig(species=sp, ho_beams=ho, lattice_pairs=pairs, bfield=b)


# ---------------------------------------------------------------------------
# output manifest and atomic writes
# ---------------------------------------------------------------------------


def atomic_write_text(path, text):
    d = os.path.dirname(os.path.abspath(path))
    os.makedirs(d, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=d, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def atomic_write_bytes(path, blob):
    d = os.path.dirname(os.path.abspath(path))
    os.makedirs(d, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=d, suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(blob)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def sha256_file(path):
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            h.update(chunk)
    return h.hexdigest()


class RunManifest:
    """Collects output checksums and timings for one CLI run."""

    def __init__(self, config, version):
        self.config_sha256 = config_hash(config)
        self.version = version
        self.outputs = {}
        self.timings = {}

    def record(self, path, root):
        rel = os.path.relpath(path, root)
        self.outputs[rel] = sha256_file(path)

    def write(self, root):
        body = {
            "config_sha256": self.config_sha256,
            "version": self.version,
            "outputs": dict(sorted(self.outputs.items())),
            "timings_s": {k: round(v, 3) for k, v in sorted(self.timings.items())},
        }
        atomic_write_text(os.path.join(root, "manifest.json"),
                          json.dumps(body, indent=2, sort_keys=True) + "\n")
        return body
