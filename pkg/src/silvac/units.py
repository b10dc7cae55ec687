"""Unit conventions and physical constants.

Everything dynamical is expressed in angular-frequency units of rad/ns.
Static fields, zero-field splittings and hyperfine couplings are quoted in
mT (field-equivalent units) and converted by multiplying with the relevant
gyromagnetic ratio.  Radiofrequencies at the user-facing boundary are
ordinary frequencies in MHz.
"""

import math

TWO_PI = 2.0 * math.pi

#: Bohr magneton over hbar, rad ns^-1 mT^-1.
MU_B = TWO_PI * 0.0139962

#: gamma_n / gamma_e for a 29Si nucleus against a g = 2 electron (signed;
#: 29Si has a negative gyromagnetic ratio).
GAMMA_RATIO_29SI = -3.024e-4


def gyromagnetic_ratio(g: float) -> float:
    """Gyromagnetic ratio in rad ns^-1 mT^-1 for a given g-factor."""
    return g * MU_B


#: Electron gyromagnetic ratio at g = 2, rad ns^-1 mT^-1.
GAMMA_E = gyromagnetic_ratio(2.0)


def mt_to_rad_per_ns(value_mt: float, gamma: float = GAMMA_E) -> float:
    """Convert a field-equivalent energy (mT) to angular frequency (rad/ns)."""
    return value_mt * gamma


def rad_per_ns_to_mt(omega: float, gamma: float = GAMMA_E) -> float:
    """Convert an angular frequency (rad/ns) to field-equivalent mT."""
    return omega / gamma


def rad_per_ns_to_mhz(omega: float) -> float:
    """Convert angular frequency (rad/ns) to ordinary frequency (MHz)."""
    return omega / TWO_PI * 1e3


def mhz_to_rad_per_ns(frequency_mhz: float) -> float:
    """Convert ordinary frequency (MHz) to angular frequency (rad/ns)."""
    return frequency_mhz * TWO_PI / 1e3
