"""Frequency-dependent material response.

Matsubara ladders, dielectric functions on the imaginary frequency axis
and single-oscillator atomic polarizabilities. All frequencies are in
eV (hbar = 1), polarizabilities in A^3 (Gaussian volume units).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Protocol, Sequence

import numpy as np

from .constants import CONSTANTS, PhysicalConstants
from .errors import DomainError, PoleError

__all__ = [
    "MatsubaraGrid",
    "DielectricResponse",
    "Vacuum",
    "OscillatorDielectric",
    "TabulatedLossSpectrum",
    "PolarizabilityModel",
    "build_matsubara_grid",
    "matsubara_frequencies",
    "kramers_kronig_epsilon",
    "oscillator_epsilon",
    "polarizability_imag",
    "polarizability_real",
    "load_loss_spectrum",
    "HELIUM_LIKE",
    "PHOSPHOLIPID_LIKE",
]


def _frozen_array(values, dtype=float):
    arr = np.array(values, dtype=dtype)
    arr.setflags(write=False)
    return arr


# ---------------------------------------------------------------------------
# Matsubara frequencies
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class MatsubaraGrid:
    temperature: float
    frequencies: np.ndarray
    max_index: int

    @property
    def spacing(self):
        return self.frequencies[1] - self.frequencies[0]

    @property
    def weights(self):
        """Primed-sum weights: 1/2 for n = 0, 1 otherwise."""
        w = np.ones_like(self.frequencies)
        w[0] = 0.5
        return w


def matsubara_frequencies(temperature, start, stop, constants: PhysicalConstants = CONSTANTS):
    """xi_n = 2 pi k_B T n for n in [start, stop), in eV."""
    n = np.arange(start, stop, dtype=float)
    return 2.0 * math.pi * constants.k_B * temperature * n


def build_matsubara_grid(temperature, max_index, constants: PhysicalConstants = CONSTANTS):
    """Matsubara ladder xi_0 .. xi_max_index at ``temperature`` kelvin."""
    if not temperature > 0:
        raise DomainError(f"temperature must be positive, got {temperature!r}")
    if int(max_index) != max_index or max_index < 1:
        raise DomainError(f"max_index must be an integer >= 1, got {max_index!r}")
    max_index = int(max_index)
    xi = matsubara_frequencies(temperature, 0, max_index + 1, constants)
    return MatsubaraGrid(float(temperature), _frozen_array(xi), max_index)


# ---------------------------------------------------------------------------
# Dielectric functions on the imaginary axis
# ---------------------------------------------------------------------------


class DielectricResponse(Protocol):
    """Anything that yields eps(i xi) for an array of xi >= 0 (eV)."""

    def epsilon(self, xi): ...


@dataclass(frozen=True)
class Vacuum:
    """eps = 1 at every frequency; switches the surface off."""

    def epsilon(self, xi):
        return np.ones_like(np.asarray(xi, dtype=float))

    def describe(self):
        return {"model": "vacuum"}


@dataclass(frozen=True)
class OscillatorDielectric:
    """eps(i xi) = eps_inf + sum_i S_i / (1 + (xi/omega_i)^2)."""

    terms: tuple = ()
    epsilon_infinity: float = 1.0

    def __post_init__(self):
        terms = tuple((float(s), float(w)) for s, w in self.terms)
        for s, w in terms:
            if s < 0 or w <= 0:
                raise DomainError(f"oscillator term needs S >= 0 and omega > 0, got ({s}, {w})")
        if self.epsilon_infinity < 1:
            raise DomainError("epsilon_infinity must be >= 1")
        object.__setattr__(self, "terms", terms)

    def epsilon(self, xi):
        return oscillator_epsilon(self, xi)

    def describe(self):
        return {
            "model": "oscillators",
            "epsilon_infinity": self.epsilon_infinity,
            "strengths": [s for s, _ in self.terms],
            "centers": [w for _, w in self.terms],
        }


def oscillator_epsilon(model: OscillatorDielectric, xi):
    """Closed-form eps(i xi) of a sum of undamped oscillators."""
    xi = np.asarray(xi, dtype=float)
    if np.any(xi < 0):
        raise DomainError("xi must be >= 0")
    eps = np.full_like(xi, model.epsilon_infinity)
    for strength, center in model.terms:
        eps = eps + strength / (1.0 + (xi / center) ** 2)
    return eps if eps.ndim else float(eps)


@dataclass(frozen=True)
class TabulatedLossSpectrum:
    """Sampled eps''(omega) on a strictly increasing positive grid.

    eps(i xi) follows from the Kramers-Kronig transform restricted to the
    tabulated range: nothing is extrapolated past the last sample, so a
    spectrum that is cut off early underestimates eps at large xi.
    """

    omega: np.ndarray
    eps_imag: np.ndarray
    metadata: str = ""
    _weighted: np.ndarray = field(init=False, repr=False, compare=False)
    _cache: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        omega = _frozen_array(self.omega)
        eps_imag = _frozen_array(self.eps_imag)
        if omega.ndim != 1 or omega.shape != eps_imag.shape:
            raise DomainError("omega and eps_imag must be 1-D arrays of equal length")
        if omega.size == 0:
            raise DomainError("empty loss spectrum")
        if np.any(omega <= 0):
            raise DomainError("tabulated frequencies must be > 0")
        if np.any(np.diff(omega) <= 0):
            raise DomainError("tabulated frequencies must be strictly increasing")
        if np.any(eps_imag < 0):
            raise DomainError("eps_imag must be non-negative")
        object.__setattr__(self, "omega", omega)
        object.__setattr__(self, "eps_imag", eps_imag)
        object.__setattr__(self, "_weighted", _frozen_array(omega * eps_imag))
        object.__setattr__(self, "_cache", {})

    def __getstate__(self):
        state = dict(self.__dict__)
        state["_cache"] = {}
        return state

    def __setstate__(self, state):
        self.__dict__.update(state)

    def epsilon(self, xi):
        # Matsubara blocks repeat across branches and separations, so whole
        # frequency arrays are memoised (bounded, oldest dropped first)
        arr = np.asarray(xi, dtype=float)
        if arr.ndim == 0 or arr.size < 16:
            return kramers_kronig_epsilon(self, arr)
        key = (arr.shape, arr.tobytes())
        hit = self._cache.get(key)
        if hit is None:
            hit = kramers_kronig_epsilon(self, arr)
            hit.setflags(write=False)
            if len(self._cache) >= _EPS_CACHE_SIZE:
                self._cache.pop(next(iter(self._cache)))
            self._cache[key] = hit
        return hit

    def describe(self):
        return {
            "model": "tabulated",
            "samples": int(self.omega.size),
            "omega_range": [float(self.omega[0]), float(self.omega[-1])],
            "metadata": self.metadata,
        }


_EPS_CACHE_SIZE = 64
_KK_CHUNK = 1 << 22  # max xi*omega pairs held in memory at once
_KK_FAR = 32.0  # xi / omega_max beyond which the moment series is used
_KK_MOMENTS = 8


def kramers_kronig_epsilon(spectrum: TabulatedLossSpectrum, xi):
    """eps(i xi) = 1 + (2/pi) int omega eps''(omega) / (omega^2 + xi^2) d omega.

    Trapezoid rule on the tabulated samples; the integrand is taken as
    zero outside the sampled range. A single sample gives eps = 1. Far
    above the last sample the kernel is expanded in (omega/xi)^2 and the
    same trapezoid sum is evaluated through its even moments.
    """
    if spectrum.omega.size == 0:
        raise DomainError("empty loss spectrum")
    xi_arr = np.asarray(xi, dtype=float)
    if np.any(xi_arr < 0):
        raise DomainError("xi must be >= 0")
    flat = xi_arr.reshape(-1)
    omega = spectrum.omega
    omega2 = omega**2
    out = np.empty_like(flat)

    far = flat >= _KK_FAR * omega[-1]
    if far.any():
        moments = [np.trapezoid(spectrum._weighted * omega2**k, omega) for k in range(_KK_MOMENTS)]
        inv2 = 1.0 / flat[far] ** 2
        acc = np.zeros_like(inv2)
        for m in reversed(moments):
            acc = m - acc * inv2
        out[far] = acc * inv2

    near = np.flatnonzero(~far)
    step = max(1, _KK_CHUNK // omega.size)
    for lo in range(0, near.size, step):
        idx = near[lo : lo + step]
        integrand = spectrum._weighted / (omega2 + flat[idx, None] ** 2)
        out[idx] = np.trapezoid(integrand, omega, axis=1)
    eps = 1.0 + (2.0 / math.pi) * out.reshape(xi_arr.shape)
    return eps if eps.ndim else float(eps)


def load_loss_spectrum(path) -> TabulatedLossSpectrum:
    """Read a two-column ``omega_eV eps_imag`` file; ``#`` lines are comments.

    Comment lines are kept as the spectrum's provenance string.
    """
    path = Path(path)
    text = path.read_text()
    comments = [ln.lstrip("#").strip() for ln in text.splitlines() if ln.lstrip().startswith("#")]
    data = np.loadtxt(path, comments="#", ndmin=2)
    if data.size == 0:
        raise DomainError(f"{path}: no samples")
    if data.shape[1] < 2:
        raise DomainError(f"{path}: expected two columns, found {data.shape[1]}")
    return TabulatedLossSpectrum(data[:, 0], data[:, 1], metadata="\n".join(comments))


# ---------------------------------------------------------------------------
# Atomic polarizability
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PolarizabilityModel:
    """Single undamped oscillator: static polarizability and resonance."""

    alpha_static: float  # A^3
    omega_resonance: float  # eV

    def __post_init__(self):
        if self.alpha_static < 0:
            raise DomainError("alpha_static must be >= 0")
        if self.omega_resonance <= 0:
            raise DomainError("omega_resonance must be > 0")

    @property
    def transition_dipole_sq(self):
        """p^2 = alpha(0) * hbar * omega_j / 2, in eV*A^3."""
        return self.alpha_static * self.omega_resonance / 2.0

    def describe(self):
        return {"alpha_static": self.alpha_static, "omega_resonance": self.omega_resonance}


def polarizability_imag(model: PolarizabilityModel, xi):
    """alpha(i xi) = alpha(0) / (1 + (xi/omega_j)^2)."""
    xi = np.asarray(xi, dtype=float)
    if np.any(xi < 0):
        raise DomainError("xi must be >= 0")
    alpha = model.alpha_static / (1.0 + (xi / model.omega_resonance) ** 2)
    return alpha if alpha.ndim else float(alpha)


def polarizability_real(model: PolarizabilityModel, omega):
    """alpha(omega) = alpha(0) / (1 - (omega/omega_j)^2), no damping.

    Raises PoleError at omega == omega_j.
    """
    omega = np.asarray(omega, dtype=float)
    if np.any(omega < 0):
        raise DomainError("omega must be >= 0")
    denom = 1.0 - (omega / model.omega_resonance) ** 2
    if np.any(omega == model.omega_resonance) or np.any(denom == 0):
        raise PoleError(f"alpha(omega) has a pole at omega_j = {model.omega_resonance} eV")
    alpha = model.alpha_static / denom
    return alpha if alpha.ndim else float(alpha)


# Representative defaults; configuration values, not measured data.
HELIUM_LIKE = PolarizabilityModel(alpha_static=0.205, omega_resonance=27.2)
PHOSPHOLIPID_LIKE = OscillatorDielectric(terms=((0.2, 0.1), (1.3, 12.5)), epsilon_infinity=1.0)


def oscillator_dielectric(strengths: Sequence[float], centers: Sequence[float], epsilon_infinity=1.0):
    if len(strengths) != len(centers):
        raise DomainError("strengths and centers must have the same length")
    return OscillatorDielectric(tuple(zip(strengths, centers)), epsilon_infinity)
