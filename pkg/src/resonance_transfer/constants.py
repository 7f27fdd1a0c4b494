"""Physical constants in the eV / Angstrom / kelvin unit system.

Energies and frequencies share the eV scale (hbar = 1 inside every
formula); ``hbar`` in eV*s is only used to convert energies to rates.
"""

import math
from dataclasses import dataclass


@dataclass(frozen=True)
class PhysicalConstants:
    hbar_c: float = 1973.269804  # eV*A
    k_B: float = 8.617333262e-5  # eV/K
    hbar: float = 6.582119569e-16  # eV*s
    bohr_radius: float = 0.529177  # A

    def thermal_length(self, temperature):
        """hbar*c / (2 pi k_B T) in Angstrom: the first Matsubara retardation length."""
        return self.hbar_c / (2.0 * math.pi * self.k_B * temperature)


CONSTANTS = PhysicalConstants()
