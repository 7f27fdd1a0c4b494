"""Dipole-dipole susceptibility tensors in free space and above a half-space.

Coupling convention: U = p_i T_ij p_j, so the static element along the
joining axis is -2/rho^3 and across it +1/rho^3. Tensors are returned in
A^-3; frequency arguments may be scalars or numpy arrays and broadcast.

The surface term is the retarded image approximation: the free tensor is
evaluated at the displacement from the mirror image of atom a to atom b
and multiplied by ``r(i xi) * diag(-1, -1, +1)``, with r the static-form
reflection factor (eps - 1)/(eps + 1). It is exact in the non-retarded
limit; it does not reproduce grazing-incidence behaviour of the full
half-space Green function.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .constants import CONSTANTS, PhysicalConstants
from .errors import DomainError

__all__ = [
    "GeometryConfig",
    "TensorComponents",
    "free_tensor_imag",
    "free_tensor_real",
    "surface_reflection",
    "image_tensor_imag",
    "total_tensor_imag",
]

_AXES = {"x": 0, "y": 1, "z": 2}


@dataclass(frozen=True)
class GeometryConfig:
    """Atom a at height z_a, atom b at height z_b, lateral offset x (all A)."""

    z_a: float
    z_b: float
    x: float = 0.0

    def __post_init__(self):
        if not (self.z_a > 0 and self.z_b > 0):
            raise DomainError(f"atom heights must be > 0, got z_a={self.z_a}, z_b={self.z_b}")
        if self.x < 0:
            raise DomainError(f"lateral offset must be >= 0, got x={self.x}")
        if self.rho <= 0:
            raise DomainError("atoms coincide: direct separation is zero")

    @classmethod
    def vertical(cls, rho, z_a=2.0):
        """Atom b straight above atom a (rho = z_b - z_a)."""
        return cls(z_a=z_a, z_b=z_a + rho, x=0.0)

    @classmethod
    def lateral(cls, rho, height=2.0):
        """Both atoms at the same height, separated along x (rho = x)."""
        return cls(z_a=height, z_b=height, x=rho)

    @property
    def displacement(self):
        return np.array([self.x, 0.0, self.z_b - self.z_a])

    @property
    def image_displacement(self):
        return np.array([self.x, 0.0, self.z_a + self.z_b])

    @property
    def rho(self):
        return math.hypot(self.x, self.z_b - self.z_a)

    @property
    def image_distance(self):
        return math.hypot(self.x, self.z_a + self.z_b)


@dataclass(frozen=True)
class TensorComponents:
    t_xx: object
    t_yy: object
    t_zz: object
    t_xz: object
    t_zx: object

    def __add__(self, other):
        if not isinstance(other, TensorComponents):
            return NotImplemented
        return TensorComponents(
            self.t_xx + other.t_xx,
            self.t_yy + other.t_yy,
            self.t_zz + other.t_zz,
            self.t_xz + other.t_xz,
            self.t_zx + other.t_zx,
        )

    def diagonal(self, axis):
        """T_jj for ``axis`` in {'x', 'y', 'z'}."""
        return (self.t_xx, self.t_yy, self.t_zz)[_AXES[axis]]

    def as_matrix(self):
        """Dense 3x3 matrix (scalar components only); xy, yz entries are zero."""
        return np.array(
            [
                [self.t_xx, 0.0, self.t_xz],
                [0.0, self.t_yy, 0.0],
                [self.t_zx, 0.0, self.t_zz],
            ],
            dtype=float,
        )


def _unit(displacement):
    d = np.asarray(displacement, dtype=float)
    if d.shape != (3,):
        raise DomainError("displacement must be a 3-vector")
    rho = float(np.linalg.norm(d))
    if rho == 0.0:
        raise DomainError("zero displacement")
    return rho, d / rho


def _components(n, radial, angular):
    # element ij = (delta_ij - 3 n_i n_j) * radial + (delta_ij - n_i n_j) * angular
    def el(i, j):
        d = 1.0 if i == j else 0.0
        return (d - 3.0 * n[i] * n[j]) * radial + (d - n[i] * n[j]) * angular

    xz = el(0, 2)
    return TensorComponents(el(0, 0), el(1, 1), el(2, 2), xz, xz)


def free_tensor_imag(displacement, xi, constants: PhysicalConstants = CONSTANTS):
    """Retarded free-space tensor at imaginary frequency i xi.

    T_ij = e^-u / rho^3 [(d_ij - 3 n_i n_j)(1 + u) + (d_ij - n_i n_j) u^2],
    u = xi rho / (hbar c).
    """
    rho, n = _unit(displacement)
    xi = np.asarray(xi, dtype=float)
    if np.any(xi < 0):
        raise DomainError("xi must be >= 0")
    u = xi * rho / constants.hbar_c
    pref = np.exp(-u) / rho**3
    return _components(n, pref * (1.0 + u), pref * u * u)


def free_tensor_real(displacement, omega, constants: PhysicalConstants = CONSTANTS):
    """Real part of the retarded free-space tensor at real frequency omega.

    Re{e^{iv}/rho^3 [(d - 3nn)(1 - iv) - (d - nn) v^2]}, v = omega rho / (hbar c).
    """
    rho, n = _unit(displacement)
    omega = np.asarray(omega, dtype=float)
    if np.any(omega < 0):
        raise DomainError("omega must be >= 0")
    v = omega * rho / constants.hbar_c
    c, s = np.cos(v), np.sin(v)
    return _components(n, (c + v * s) / rho**3, -(v * v * c) / rho**3)


def surface_reflection(epsilon):
    """r = (eps - 1)/(eps + 1); tends to 1 for a perfect conductor."""
    eps = np.asarray(epsilon, dtype=float)
    if np.any(eps < 1) or np.any(np.isnan(eps)):
        raise DomainError("epsilon must be >= 1")
    with np.errstate(invalid="ignore"):
        r = np.where(np.isinf(eps), 1.0, (eps - 1.0) / (eps + 1.0))
    return r if r.ndim else float(r)


def image_tensor_imag(geometry: GeometryConfig, epsilon_at_xi, xi, constants: PhysicalConstants = CONSTANTS):
    """Surface correction M . T0(R | i xi), M = r diag(-1, -1, +1).

    R runs from the mirror image of atom a to atom b. In-plane rows change
    sign, so the surface xz and zx elements are antisymmetric.
    """
    if not isinstance(geometry, GeometryConfig):
        raise DomainError("geometry must be a GeometryConfig")
    r = surface_reflection(epsilon_at_xi)
    t0 = free_tensor_imag(geometry.image_displacement, xi, constants)
    return TensorComponents(
        -r * t0.t_xx,
        -r * t0.t_yy,
        r * t0.t_zz,
        -r * t0.t_xz,
        r * t0.t_zx,
    )


def total_tensor_imag(geometry: GeometryConfig, dielectric, xi, constants: PhysicalConstants = CONSTANTS):
    """Free tensor at the direct displacement plus the image correction."""
    free = free_tensor_imag(geometry.displacement, xi, constants)
    surf = image_tensor_imag(geometry, dielectric.epsilon(xi), xi, constants)
    return free + surf
