"""Surface-modified resonance interaction, Casimir-Polder energies and transfer rates
for pairs of identical atoms near a planar dielectric half-space."""

__version__ = "0.1.0"

from .constants import CONSTANTS, PhysicalConstants
from .errors import (
    ConfigError,
    DomainError,
    OscillatorInstabilityError,
    PoleError,
    StrongCouplingError,
)
from .greens import (
    GeometryConfig,
    TensorComponents,
    free_tensor_imag,
    free_tensor_real,
    image_tensor_imag,
    surface_reflection,
    total_tensor_imag,
)
from .interactions import (
    Branch,
    InteractionResult,
    PoleResult,
    casimir_polder_energy,
    casimir_polder_energy_zero_temperature,
    perturbative_pole_shift,
    perturbative_rate_isotropic,
    perturbative_resonance_energy,
    pole_frequencies_nonretarded,
    resonance_energy_branch,
    resonance_energy_zero_temperature,
    transfer_rate_fast,
    transfer_rate_slow,
    zero_frequency_term,
)
from .spectra import (
    HELIUM_LIKE,
    PHOSPHOLIPID_LIKE,
    MatsubaraGrid,
    OscillatorDielectric,
    PolarizabilityModel,
    TabulatedLossSpectrum,
    Vacuum,
    build_matsubara_grid,
    kramers_kronig_epsilon,
    load_loss_spectrum,
    oscillator_epsilon,
    polarizability_imag,
    polarizability_real,
)
from .analysis import (
    CrossoverReport,
    SeparationCurve,
    classical_asymptote_check,
    find_sign_crossovers,
    fit_power_law,
)
