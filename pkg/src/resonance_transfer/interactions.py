"""Resonance energies, Casimir-Polder energies and transfer rates.

Energies are in eV, separations in A, rates in 1/s. Finite-temperature
quantities are primed Matsubara sums (n = 0 term at half weight);
zero-temperature quantities are integrals along the imaginary axis.

Branch X/Y/Z means the shared excitation is polarized along that axis of
the surface frame (z normal to the surface). ISOTROPIC is the arithmetic
mean of the three axis branches.
"""

from __future__ import annotations

import enum
import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .constants import CONSTANTS, PhysicalConstants
from .errors import DomainError, OscillatorInstabilityError, StrongCouplingError
from .greens import GeometryConfig, free_tensor_imag, free_tensor_real, total_tensor_imag
from .spectra import PolarizabilityModel, Vacuum, matsubara_frequencies, polarizability_imag

log = logging.getLogger(__name__)

__all__ = [
    "Branch",
    "InteractionResult",
    "PoleResult",
    "resonance_energy_branch",
    "casimir_polder_energy",
    "resonance_energy_zero_temperature",
    "casimir_polder_energy_zero_temperature",
    "zero_frequency_term",
    "pole_frequencies_nonretarded",
    "perturbative_pole_shift",
    "perturbative_resonance_energy",
    "perturbative_rate_isotropic",
    "transfer_rate_fast",
    "transfer_rate_slow",
]

DEFAULT_REL_TOL = 1e-9
DEFAULT_MAX_TERMS = 1_000_000
DEFAULT_ABS_TOL = 1e-12


class Branch(str, enum.Enum):
    X = "x"
    Y = "y"
    Z = "z"
    ISOTROPIC = "isotropic"

    @classmethod
    def parse(cls, label):
        if isinstance(label, cls):
            return label
        key = str(label).strip().lower()
        if key in ("iso", "isotropic"):
            return cls.ISOTROPIC
        try:
            return cls(key)
        except ValueError:
            raise DomainError(f"unknown branch {label!r}") from None

    @property
    def axes(self):
        return ("x", "y", "z") if self is Branch.ISOTROPIC else (self.value,)


@dataclass(frozen=True)
class InteractionResult:
    energy: float
    n_terms_used: int
    truncation_estimate: float


@dataclass(frozen=True)
class PoleResult:
    omega_antisymmetric: float
    omega_symmetric: float
    energy_shift: float


# ---------------------------------------------------------------------------
# Matsubara summation
# ---------------------------------------------------------------------------


def _poly_decay(u):
    # bounds |T_ij| * rho^3 for every free-space element at imaginary frequency
    return (2.0 + 2.0 * u + u * u) * np.exp(-u)


def _poly_decay_integral(u):
    # int_u^inf (2 + 2s + s^2) e^-s ds
    return (6.0 + 4.0 * u + u * u) * math.exp(-u)


class _TailBound:
    """Upper bound on sum_{m > N} alpha(i xi_m)^k * |T(i xi_m)|^k.

    Every tensor element is bounded by C * P(u) with P = (2 + 2u + u^2) e^-u
    (decreasing in u) and C = 1/rho^3 + |r|/rho'^3; alpha(i xi) is
    decreasing too, so each sum is dominated by an integral from N.
    """

    def __init__(self, atom, geometry, temperature, constants, with_surface):
        self.atom = atom
        self.step = 2.0 * math.pi * constants.k_B * temperature
        self.du = self.step * geometry.rho / constants.hbar_c
        self.scale = 1.0 / geometry.rho**3
        if with_surface:
            self.scale += 1.0 / geometry.image_distance**3

    def linear(self, n):
        """Bound on sum_{m>n} alpha_m * max|T_m| and on alpha_{n+1} max|T_{n+1}|."""
        xi_n = n * self.step
        u_n = n * self.du
        a0, wj = self.atom.alpha_static, self.atom.omega_resonance
        alpha_n = a0 / (1.0 + (xi_n / wj) ** 2)
        peak = self.scale * float(_poly_decay(u_n))
        by_decay = math.inf
        if self.du > 0:
            by_decay = alpha_n * self.scale * _poly_decay_integral(u_n) / self.du
        by_alpha = peak * a0 * (wj / self.step) * (math.pi / 2.0 - math.atan(xi_n / wj))
        return min(by_decay, by_alpha), alpha_n * peak

    def quadratic(self, n):
        """Same for alpha^2 * (sum of five squared elements)."""
        total, first = self.linear(n)
        return 5.0 * first * total, 5.0 * first * first


def _matsubara_sum(term, tail, rel_tol, max_terms):
    """Sum term(n) over n = 0, 1, ... until the tail is below rel_tol * |sum|.

    ``term`` maps an integer array to summand values (weights included);
    ``tail(N)`` bounds sum_{m > N} |term(m)|. Returns
    (sum, terms used, truncation estimate).
    """
    if not 0 < rel_tol < 1:
        raise DomainError("rel_tol must lie in (0, 1)")
    total = 0.0
    done = 0
    block = 256
    bound = math.inf
    while done < max_terms:
        stop = min(done + block, max_terms)
        values = term(np.arange(done, stop))
        total += math.fsum(values)
        done = stop
        last = abs(values[-1])
        bound = tail(done - 1)
        if total == 0.0 and bound == 0.0:
            break
        threshold = rel_tol * abs(total)
        if last <= threshold and bound <= threshold:
            break
        block = min(block * 2, 1 << 16)
    else:
        log.warning(
            "Matsubara sum hit the %d-term cap; truncation estimate %.3e vs sum %.3e",
            max_terms,
            bound,
            total,
        )
    return total, done, bound


def _check_temperature(temperature):
    if not temperature > 0:
        raise DomainError(f"temperature must be positive, got {temperature!r}")


def _check_positive_log(arg, what, *, xi, n=None, rho=None):
    bad = np.flatnonzero(np.asarray(arg) <= 0.0)
    if bad.size:
        i = int(bad[0])
        where = f"n={int(n[i])}" if n is not None else f"xi={float(np.atleast_1d(xi)[i]):.6g} eV"
        raise StrongCouplingError(
            f"strong-coupling breakdown at rho={rho:.6g} A, {where}: 1 + {what} <= 0",
            n=None if n is None else int(n[i]),
            xi=float(np.atleast_1d(xi)[i]),
            rho=rho,
        )


def _axis_resonance_sum(geometry, axis, atom, dielectric, temperature, rel_tol, max_terms, constants):
    kT = constants.k_B * temperature
    with_surface = not _is_vacuum(dielectric)
    bounds = _TailBound(atom, geometry, temperature, constants, with_surface)

    def term(n):
        xi = matsubara_frequencies(temperature, n[0], n[-1] + 1, constants)
        tensor = _pair_tensor(geometry, dielectric, xi, constants)
        x = polarizability_imag(atom, xi) * tensor.diagonal(axis)
        x = np.atleast_1d(x)
        _check_positive_log(1.0 + x, "alpha*T_jj", xi=xi, n=n, rho=geometry.rho)
        values = 2.0 * kT * np.log1p(x)
        if n[0] == 0:
            values[0] *= 0.5
        return values

    def tail(n):
        total, first = bounds.linear(n)
        if first >= 1.0:
            return math.inf
        return 2.0 * kT * total / (1.0 - first)

    return _matsubara_sum(term, tail, rel_tol, max_terms)


def _is_vacuum(dielectric):
    return isinstance(dielectric, Vacuum)


def _pair_tensor(geometry, dielectric, xi, constants):
    # the image term of a vacuum is a signed zero, so skipping it is exact
    if _is_vacuum(dielectric):
        return free_tensor_imag(geometry.displacement, xi, constants)
    return total_tensor_imag(geometry, dielectric, xi, constants)


def _combine(results):
    energy = sum(r[0] for r in results) / len(results)
    n_terms = max(r[1] for r in results)
    trunc = sum(r[2] for r in results) / len(results)
    return InteractionResult(energy, n_terms, trunc)


def resonance_energy_branch(
    geometry: GeometryConfig,
    branch,
    atom: PolarizabilityModel,
    dielectric,
    temperature,
    rel_tol=DEFAULT_REL_TOL,
    *,
    max_terms=DEFAULT_MAX_TERMS,
    constants: PhysicalConstants = CONSTANTS,
) -> InteractionResult:
    """Finite-temperature resonance energy U_j = 2 k_B T sum'_n ln[1 + alpha T_jj].

    Raises StrongCouplingError when 1 + alpha T_jj <= 0 for a retained n.
    """
    _check_temperature(temperature)
    branch = Branch.parse(branch)
    if atom.alpha_static == 0:
        return InteractionResult(0.0, 1, 0.0)
    return _combine(
        [
            _axis_resonance_sum(geometry, axis, atom, dielectric, temperature, rel_tol, max_terms, constants)
            for axis in branch.axes
        ]
    )


def _cp_bracket(tensor):
    return tensor.t_xx**2 + tensor.t_yy**2 + tensor.t_zz**2 - 2.0 * tensor.t_xz * tensor.t_zx


def casimir_polder_energy(
    geometry: GeometryConfig,
    atom: PolarizabilityModel,
    dielectric,
    temperature,
    rel_tol=DEFAULT_REL_TOL,
    *,
    max_terms=DEFAULT_MAX_TERMS,
    constants: PhysicalConstants = CONSTANTS,
) -> InteractionResult:
    """Ground-state pair energy -k_B T sum'_n alpha^2 {sum_j T_jj^2 - 2 T_xz T_zx}.

    The cross term uses T_xz * T_zx, which equals T_xz^2 in free space.
    """
    _check_temperature(temperature)
    if atom.alpha_static == 0:
        return InteractionResult(0.0, 1, 0.0)
    kT = constants.k_B * temperature
    bounds = _TailBound(atom, geometry, temperature, constants, not _is_vacuum(dielectric))

    def term(n):
        xi = matsubara_frequencies(temperature, n[0], n[-1] + 1, constants)
        tensor = _pair_tensor(geometry, dielectric, xi, constants)
        values = -kT * np.atleast_1d(polarizability_imag(atom, xi) ** 2 * _cp_bracket(tensor))
        if n[0] == 0:
            values[0] *= 0.5
        return values

    def tail(n):
        return kT * bounds.quadratic(n)[0]

    return InteractionResult(*_matsubara_sum(term, tail, rel_tol, max_terms))


def zero_frequency_term(
    geometry: GeometryConfig,
    branch,
    atom: PolarizabilityModel,
    dielectric,
    temperature,
    *,
    constants: PhysicalConstants = CONSTANTS,
):
    """The halved n = 0 Matsubara term, k_B T ln[1 + alpha(0) T_jj(rho | 0)]."""
    _check_temperature(temperature)
    branch = Branch.parse(branch)
    tensor = _pair_tensor(geometry, dielectric, 0.0, constants)
    kT = constants.k_B * temperature
    values = []
    for axis in branch.axes:
        x = atom.alpha_static * tensor.diagonal(axis)
        _check_positive_log(np.atleast_1d(1.0 + x), "alpha(0)*T_jj", xi=0.0, n=np.array([0]), rho=geometry.rho)
        values.append(kT * math.log1p(x))
    return sum(values) / len(values)


# ---------------------------------------------------------------------------
# Zero temperature: integrals along the imaginary axis
# ---------------------------------------------------------------------------


def _imaginary_axis_integral(f, scales, abs_tol, rel_tol, cutoff_ratio=1e-16):
    """int_0^Xi f(xi) d xi with Xi where |f| drops below cutoff_ratio * peak.

    ``f`` must accept scalars and arrays. ``scales`` are the
    characteristic frequencies of the integrand; the
    range is cut into pieces growing geometrically from the smallest one so
    QUADPACK's adaptive bisection sees smooth, well-resolved intervals.
    Returns (value, error estimate).
    """
    lo = min(s for s in scales if s > 0)
    probe = np.concatenate([[0.0], lo * 2.0 ** np.arange(-4, 12)])
    peak = float(np.max(np.abs(f(probe))))
    if peak == 0.0:
        return 0.0, 0.0
    # push the upper limit out until the integrand is negligible
    top = lo
    while abs(f(top)) > cutoff_ratio * peak or top < 8 * max(scales):
        top *= 2.0
        peak = max(peak, abs(f(top)))
    edges = [0.0]
    edge = lo / 4.0
    while edge < top:
        edges.append(edge)
        edge *= 4.0
    edges.append(top)

    # rough magnitude so relative tolerance has something to refer to
    rough = sum(integrate.fixed_quad(f, a, b, n=32)[0] for a, b in zip(edges, edges[1:]))
    target = abs_tol if rough == 0 else min(abs_tol, rel_tol * abs(rough))
    per_piece = target / (len(edges) - 1)
    total, err = 0.0, 0.0
    for a, b in zip(edges, edges[1:]):
        val, e = integrate.quad(f, a, b, epsabs=per_piece, epsrel=rel_tol, limit=200)
        total += val
        err += e
    # the neglected tail decays at least as fast as 1/xi^2 past Xi
    err += top * abs(f(top))
    return total, err


def _check_integral(err, value, abs_tol, rel_tol):
    if err > max(abs_tol, rel_tol * abs(value)) * 10:
        log.warning("imaginary-axis integral error %.3e exceeds tolerance (value %.3e)", err, value)


def resonance_energy_zero_temperature(
    geometry: GeometryConfig,
    branch,
    atom: PolarizabilityModel,
    dielectric,
    abs_tol=DEFAULT_ABS_TOL,
    *,
    rel_tol=1e-10,
    constants: PhysicalConstants = CONSTANTS,
):
    """U = (1/pi) int_0^inf d xi ln[1 + alpha(i xi) T_jj(rho | i xi)] in eV.

    Converged to within min(abs_tol, rel_tol * |U|).
    """
    branch = Branch.parse(branch)
    if atom.alpha_static == 0:
        return 0.0
    scales = [atom.omega_resonance, constants.hbar_c / geometry.rho]
    parts = []
    for axis in branch.axes:

        def f(xi, axis=axis):
            tensor = _pair_tensor(geometry, dielectric, xi, constants)
            x = polarizability_imag(atom, xi) * tensor.diagonal(axis)
            if np.any(x <= -1.0):
                _check_positive_log(np.atleast_1d(1.0 + x), "alpha*T_jj", xi=xi, rho=geometry.rho)
            out = np.log1p(x) / math.pi
            return out if np.ndim(out) else float(out)

        value, err = _imaginary_axis_integral(f, scales, abs_tol, rel_tol)
        _check_integral(err, value, abs_tol, rel_tol)
        parts.append(value)
    return sum(parts) / len(parts)


def casimir_polder_energy_zero_temperature(
    geometry: GeometryConfig,
    atom: PolarizabilityModel,
    dielectric,
    abs_tol=DEFAULT_ABS_TOL,
    *,
    rel_tol=1e-10,
    constants: PhysicalConstants = CONSTANTS,
):
    """T -> 0 limit of the pair Casimir-Polder sum, -(1/2 pi) int alpha^2 {...} d xi."""
    if atom.alpha_static == 0:
        return 0.0

    def f(xi):
        tensor = _pair_tensor(geometry, dielectric, xi, constants)
        out = -(polarizability_imag(atom, xi) ** 2 * _cp_bracket(tensor)) / (2.0 * math.pi)
        return out if np.ndim(out) else float(out)

    scales = [atom.omega_resonance, constants.hbar_c / geometry.rho]
    value, err = _imaginary_axis_integral(f, scales, abs_tol, rel_tol)
    _check_integral(err, value, abs_tol, rel_tol)
    return value


# ---------------------------------------------------------------------------
# Free-space pole and perturbative forms
# ---------------------------------------------------------------------------

_X_AXIS = (1.0, 0.0, 0.0)


def _free_static_diagonal(rho, axis, direction):
    if rho <= 0:
        raise DomainError("rho must be > 0")
    d = np.asarray(direction, dtype=float)
    d = rho * d / np.linalg.norm(d)
    return float(free_tensor_imag(d, 0.0).diagonal(axis))


def pole_frequencies_nonretarded(rho, branch, atom: PolarizabilityModel, *, direction=_X_AXIS) -> PoleResult:
    """Normal modes of two identical oscillators coupled by the static tensor.

    1 - alpha(omega)^2 T^2 = 0 gives omega = omega_j sqrt(1 +- alpha(0) T).
    The antisymmetric (trapped) mode is omega_j sqrt(1 + alpha(0) T), whose
    first-order shift omega_j alpha(0) T / 2 is the perturbative one. By
    default the atoms are joined along x, so branch X is longitudinal.
    """
    branch = Branch.parse(branch)
    results = []
    for axis in branch.axes:
        coupling = atom.alpha_static * _free_static_diagonal(rho, axis, direction)
        if abs(coupling) >= 1.0:
            raise OscillatorInstabilityError(
                f"alpha(0)|T| = {abs(coupling):.4g} >= 1 at rho={rho} A: no real normal mode"
            )
        wj = atom.omega_resonance
        anti = wj * math.sqrt(1.0 + coupling)
        sym = wj * math.sqrt(1.0 - coupling)
        results.append((anti, sym, wj * math.expm1(0.5 * math.log1p(coupling))))
    k = len(results)
    return PoleResult(*(sum(col) / k for col in zip(*results)))


def _real_diagonal(rho, branch, atom, direction, constants):
    if rho <= 0:
        raise DomainError("rho must be > 0")
    d = np.asarray(direction, dtype=float)
    d = rho * d / np.linalg.norm(d)
    tensor = free_tensor_real(d, atom.omega_resonance, constants)
    return [float(tensor.diagonal(axis)) for axis in Branch.parse(branch).axes]


def perturbative_pole_shift(
    rho, branch, atom: PolarizabilityModel, *, direction=_X_AXIS, constants: PhysicalConstants = CONSTANTS
):
    """hbar omega_j alpha(0) Re T_jj(rho | omega_j) / 2."""
    values = [
        atom.omega_resonance * atom.alpha_static * t / 2.0
        for t in _real_diagonal(rho, branch, atom, direction, constants)
    ]
    return sum(values) / len(values)


def perturbative_resonance_energy(
    rho, branch, atom: PolarizabilityModel, *, direction=_X_AXIS, constants: PhysicalConstants = CONSTANTS
):
    """p^2 Re T_jj(rho | omega_j) with p^2 = alpha(0) hbar omega_j / 2."""
    p2 = atom.transition_dipole_sq
    values = [p2 * t for t in _real_diagonal(rho, branch, atom, direction, constants)]
    return sum(values) / len(values)


def perturbative_rate_isotropic(
    rho, atom: PolarizabilityModel, norm_constant, *, constants: PhysicalConstants = CONSTANTS
):
    """Isotropically averaged rate norm * [3 + v^2 + v^4] / rho^6, v = omega_j rho / c.

    Only the shape is fixed; the caller supplies the normalisation.
    """
    if rho <= 0:
        raise DomainError("rho must be > 0")
    if not norm_constant > 0:
        raise DomainError("norm_constant must be > 0")
    v2 = (atom.omega_resonance * rho / constants.hbar_c) ** 2
    return norm_constant * (3.0 + v2 + v2 * v2) / rho**6


# ---------------------------------------------------------------------------
# Transfer rates
# ---------------------------------------------------------------------------


def transfer_rate_fast(energy, *, constants: PhysicalConstants = CONSTANTS):
    """Strong-coupling rate n = 2|U| / (pi hbar), in 1/s."""
    return 2.0 * np.abs(energy) / (math.pi * constants.hbar)


def transfer_rate_slow(energy, delta, *, constants: PhysicalConstants = CONSTANTS):
    """Golden-rule rate n = 2 pi U^2 delta / hbar; delta in 1/eV."""
    if not np.all(np.asarray(delta) > 0):
        raise DomainError("density of final states delta must be > 0")
    return 2.0 * math.pi * np.square(energy) * delta / constants.hbar
