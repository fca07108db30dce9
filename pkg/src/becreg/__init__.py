"""becreg: simulator and analysis toolkit for a quantum register built from
a spin-dependent optical lattice loaded coherently from an overlapping BEC.
"""

__all__ = [
    "atomdata",
    "optics",
    "modes",
    "couplings",
    "hubbard",
    "gates",
    "noise",
    "scenario",
    "reference",
    "acceptance",
]
