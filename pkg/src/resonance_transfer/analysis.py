"""Asymptotic diagnostics on separation curves: power laws, sign changes, classical tails."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.optimize import brentq

from .constants import CONSTANTS, PhysicalConstants
from .errors import DomainError
from .spectra import PolarizabilityModel

__all__ = [
    "SeparationCurve",
    "Crossing",
    "CrossoverReport",
    "fit_power_law",
    "find_sign_crossovers",
    "classical_asymptote_check",
]

ATTRACT_TO_REPEL = "attract->repel"
REPEL_TO_ATTRACT = "repel->attract"


@dataclass(frozen=True)
class SeparationCurve:
    rho: np.ndarray
    values: np.ndarray
    label: str = ""

    def __post_init__(self):
        rho = np.array(self.rho, dtype=float)
        values = np.array(self.values, dtype=float)
        if rho.ndim != 1 or rho.shape != values.shape:
            raise DomainError("rho and values must be 1-D arrays of equal length")
        if np.any(np.diff(rho) <= 0):
            raise DomainError("rho must be strictly increasing")
        rho.setflags(write=False)
        values.setflags(write=False)
        object.__setattr__(self, "rho", rho)
        object.__setattr__(self, "values", values)

    @classmethod
    def from_function(cls, func, rho, label=""):
        rho = np.asarray(rho, dtype=float)
        return cls(rho, np.array([func(r) for r in rho]), label)


@dataclass(frozen=True)
class Crossing:
    rho_star: float
    direction: str
    bracket: tuple


@dataclass(frozen=True)
class CrossoverReport:
    crossings: list = field(default_factory=list)
    label: str = ""

    def __len__(self):
        return len(self.crossings)

    @property
    def rho_stars(self):
        return [c.rho_star for c in self.crossings]


def fit_power_law(curve: SeparationCurve, window=None):
    """Least-squares slope of log|value| against log rho inside ``window``.

    Returns (exponent, r_squared). Raises DomainError with fewer than four
    points, zero values, or a sign change in the window.
    """
    rho, values = curve.rho, curve.values
    if window is not None:
        lo, hi = window
        mask = (rho >= lo) & (rho <= hi)
        rho, values = rho[mask], values[mask]
    if rho.size < 4:
        raise DomainError(f"need at least 4 points in the fit window, got {rho.size}")
    if np.any(values == 0):
        raise DomainError("cannot fit a power law through zero values")
    if not (np.all(values > 0) or np.all(values < 0)):
        raise DomainError("sign change inside the fit window")
    x = np.log(rho)
    y = np.log(np.abs(values))
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r_squared = 1.0 - float(np.sum(resid**2)) / ss_tot if ss_tot > 0 else 1.0
    return float(slope), r_squared


def find_sign_crossovers(
    curve: SeparationCurve,
    evaluator: Optional[Callable[[float], float]] = None,
    xtol=0.1,
) -> CrossoverReport:
    """Locate every sign change between adjacent samples.

    With an ``evaluator`` (rho -> value, normally the same energy function
    that produced the curve) each bracket is refined by root finding on the
    evaluator to ``xtol`` A. Without one the root is interpolated linearly
    in log rho, which is only as good as the sampling.
    """
    rho, values = curve.rho, curve.values
    if rho.size < 2:
        raise DomainError("need at least 2 points")
    crossings = []
    for i in range(rho.size - 1):
        a, b = values[i], values[i + 1]
        if a == 0 or np.sign(a) == np.sign(b) or b == 0:
            continue
        lo, hi = float(rho[i]), float(rho[i + 1])
        if evaluator is not None:
            root = brentq(evaluator, lo, hi, xtol=xtol / 2, rtol=4 * np.finfo(float).eps)
        else:
            t = a / (a - b)
            root = math.exp(math.log(lo) + t * (math.log(hi) - math.log(lo)))
        direction = ATTRACT_TO_REPEL if a < 0 else REPEL_TO_ATTRACT
        crossings.append(Crossing(root, direction, (lo, hi)))
    return CrossoverReport(crossings, curve.label)


def classical_asymptote_check(
    curve: SeparationCurve,
    atom: PolarizabilityModel,
    temperature,
    branch_tensor_static,
    constants: PhysicalConstants = CONSTANTS,
):
    """Largest relative gap between the curve tail and k_B T alpha(0) T_jj(rho | 0).

    The tail is every point beyond 20 thermal lengths hbar c / (2 pi k_B T).
    ``branch_tensor_static`` is either a callable rho -> T_jj(rho | 0) or a
    coefficient c with T_jj = c / rho^3.
    """
    if not temperature > 0:
        raise DomainError("temperature must be positive")
    start = 20.0 * constants.thermal_length(temperature)
    mask = curve.rho >= start
    if not mask.any():
        raise DomainError(f"curve must extend beyond {start:.4g} A for a classical-tail check")
    rho, values = curve.rho[mask], curve.values[mask]
    if callable(branch_tensor_static):
        tensor = np.array([branch_tensor_static(r) for r in rho], dtype=float)
    else:
        tensor = float(branch_tensor_static) / rho**3
    predicted = constants.k_B * temperature * atom.alpha_static * tensor
    if atom.alpha_static == 0:
        return 0.0 if np.all(values == 0) else math.inf
    return float(np.max(np.abs(values - predicted) / np.abs(predicted)))
