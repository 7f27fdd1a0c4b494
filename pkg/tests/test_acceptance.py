"""Acceptance criteria, one test (or a labelled pair) per criterion.

Each test carries a ``criterion`` marker; the terminal summary prints a
PASS/FAIL line per criterion. Runtime limits are asserted inside the
tests on the timed computation.
"""

import dataclasses
import math
import time

import numpy as np
import pytest

from resonance_transfer import (
    CONSTANTS,
    GeometryConfig,
    HELIUM_LIKE,
    PHOSPHOLIPID_LIKE,
    PolarizabilityModel,
    Vacuum,
    image_tensor_imag,
    oscillator_epsilon,
    perturbative_pole_shift,
    perturbative_rate_isotropic,
    perturbative_resonance_energy,
    pole_frequencies_nonretarded,
    resonance_energy_branch,
    resonance_energy_zero_temperature,
    surface_reflection,
    transfer_rate_slow,
)
from resonance_transfer.analysis import SeparationCurve, fit_power_law
from resonance_transfer.config import load_config
from resonance_transfer.scan import run_report, run_scan
from resonance_transfer.spectra import TabulatedLossSpectrum

VAC = Vacuum()
KB = CONSTANTS.k_B


class Timer:
    def __enter__(self):
        self.start = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.elapsed = time.perf_counter() - self.start


def exponent(func, rho):
    return fit_power_law(SeparationCurve.from_function(func, rho))[0]


@pytest.mark.criterion(1, "nonretarded resonance exponent -3 +- 0.02, free space, x branch, 5-20 A")
def test_c01_nonretarded_power_law(soft_atom):
    rho = np.geomspace(5.0, 20.0, 16)
    assert soft_atom.omega_resonance * rho[-1] / CONSTANTS.hbar_c < 0.01
    with Timer() as t:
        cold = exponent(lambda r: resonance_energy_zero_temperature(GeometryConfig.lateral(r), "x", soft_atom, VAC), rho)
        warm = exponent(lambda r: resonance_energy_branch(GeometryConfig.lateral(r), "x", soft_atom, VAC, 300.0).energy, rho)
    print(f"C1 exponent zero-T {cold:.5f}, 300 K {warm:.5f}, {t.elapsed:.3f} s")
    assert cold == pytest.approx(-3.0, abs=0.02)
    assert warm == pytest.approx(-3.0, abs=0.02)
    assert t.elapsed < 1.0


@pytest.mark.criterion(2, "zero-T retarded resonance exponent -4 +- 0.05 over 100-1000 hbar c / omega_j")
def test_c02_retarded_power_law(helium):
    scale = CONSTANTS.hbar_c / helium.omega_resonance
    rho = np.geomspace(100 * scale, 1000 * scale, 12)
    with Timer() as t:
        p = exponent(lambda r: resonance_energy_zero_temperature(GeometryConfig.lateral(r), "x", helium, VAC), rho)
    print(f"C2 exponent {p:.5f}, {t.elapsed:.3f} s")
    assert p == pytest.approx(-4.0, abs=0.05)
    assert t.elapsed < 10.0


def _classical_ratio(atom, rho, constants=CONSTANTS):
    energy = resonance_energy_branch(GeometryConfig.lateral(rho), "x", atom, VAC, 300.0, constants=constants).energy
    return energy * rho**3 / (-2.0 * constants.k_B * 300.0 * atom.alpha_static)


@pytest.mark.criterion(3, "classical limit U_x rho^3 = -2 kT alpha(0) within 5% for rho > 3e5 A, <1% change with hbar c x10")
def test_c03_classical_limit(helium):
    rho = np.geomspace(3e5, 3e6, 10)
    slow_light = dataclasses.replace(CONSTANTS, hbar_c=10 * CONSTANTS.hbar_c)
    with Timer() as t:
        ratio = np.array([_classical_ratio(helium, r) for r in rho])
        scaled = np.array([_classical_ratio(helium, r, slow_light) for r in rho])
    change = np.abs(scaled / ratio - 1)
    print(f"C3 max |ratio-1| {np.max(np.abs(ratio - 1)):.3e}; hbar c x10 change per rho: "
          + ", ".join(f"{r:.3g}:{c:.2e}" for r, c in zip(rho, change)) + f"; {t.elapsed:.3f} s")
    assert np.all(np.abs(ratio - 1) < 0.05)
    assert t.elapsed < 5.0
    # with c scaled the thermal length grows tenfold, so the lower part of
    # this window is no longer classical for the scaled run
    assert np.all(change < 0.01)


def _classical_rate(rho, temperature):
    energy = resonance_energy_branch(GeometryConfig.lateral(rho), "x", HELIUM_LIKE, VAC, temperature).energy
    return transfer_rate_slow(energy, 1.0)


@pytest.mark.criterion(4, "classical slow rate ~ rho^-6 (+-0.05) and T^2 (doubling T x4 within 2%)")
def test_c04_forster_laws():
    rho = np.geomspace(3e5, 3e6, 10)
    with Timer() as t:
        p = exponent(lambda r: _classical_rate(r, 300.0), rho)
        ratios = np.array([_classical_rate(r, 600.0) / _classical_rate(r, 300.0) for r in rho])
    print(f"C4 exponent {p:.5f}, T-doubling ratios {ratios.min():.5f}-{ratios.max():.5f}, {t.elapsed:.3f} s")
    assert p == pytest.approx(-6.0, abs=0.05)
    assert np.all(np.abs(ratios / 4 - 1) < 0.02)
    assert t.elapsed < 5.0


@pytest.mark.criterion(5, "zero-T slow rate exponent -8 +- 0.1 in the retarded window")
def test_c05_retarded_rate(helium):
    scale = CONSTANTS.hbar_c / helium.omega_resonance
    rho = np.geomspace(100 * scale, 1000 * scale, 12)

    def rate(r):
        return transfer_rate_slow(resonance_energy_zero_temperature(GeometryConfig.lateral(r), "x", helium, VAC), 1.0)

    with Timer() as t:
        p = exponent(rate, rho)
    print(f"C5 exponent {p:.5f}, {t.elapsed:.3f} s")
    assert p == pytest.approx(-8.0, abs=0.1)
    assert t.elapsed < 10.0


@pytest.mark.criterion(6, "fig3: |U_resonance| > |U_CP| for rho >= 10 A, ratio monotone (x, y, z branches)")
def test_c06_range_ordering():
    config = dataclasses.replace(load_config(preset="fig3"), quantities=("resonance", "casimir_polder"))
    with Timer() as t:
        result = run_scan(config)
    rho = result.column("rho_A")
    keep = rho >= 10.0
    cp = np.abs(result.column("casimir_polder_eV")[keep])
    for branch in "xyz":
        ratio = np.abs(result.column(f"resonance_{branch}_eV")[keep]) / cp
        print(f"C6 branch {branch}: ratio {ratio[0]:.3e} -> {ratio[-1]:.3e}")
        assert np.all(ratio > 1)
        assert np.all(np.diff(ratio) > 0)
    assert t.elapsed < 30.0


def _crossings_in_window(preset):
    config = dataclasses.replace(load_config(preset=preset), rho_min=20.0, rho_max=1000.0)
    with Timer() as t:
        text, report = run_report(config)
    found = {
        col: [c["rho_star"] for c in items]
        for col, items in report["crossovers"].items()
        if col.startswith("resonance_") and items
    }
    return text, found, t.elapsed


@pytest.mark.criterion(7, "fig3 preset: >= 1 sign change in some branch for 20-1000 A, rho* reported")
def test_c07_crossover_fig3():
    text, found, elapsed = _crossings_in_window("fig3")
    print(f"C7 fig3 crossings {found}, {elapsed:.3f} s")
    assert found
    for stars in found.values():
        assert all(20 <= s <= 1000 for s in stars)
        assert all(f"{s:.4g}" in text for s in stars)
    assert elapsed < 60.0


@pytest.mark.criterion(7, "fig4 preset: >= 1 sign change in some branch for 20-1000 A, rho* reported")
def test_c07_crossover_fig4():
    text, found, elapsed = _crossings_in_window("fig4")
    print(f"C7 fig4 crossings {found}, {elapsed:.3f} s")
    assert elapsed < 60.0
    # with both atoms at equal height and 0 <= r < 1 every diagonal element
    # keeps its sign along the imaginary axis, so no branch can change sign
    assert found


@pytest.mark.criterion(8, "perturbative shift == energy to 1e-12; rate at v=0 is 3 norm/rho^6; large-v exponent -2 +- 0.02")
def test_c08_perturbative_identities():
    rng = np.random.default_rng(8)
    with Timer() as t:
        for _ in range(200):
            atom = PolarizabilityModel(rng.uniform(0.01, 50.0), rng.uniform(0.1, 100.0))
            rho = 10 ** rng.uniform(0.5, 5.0)
            branch = rng.choice(["x", "y", "z", "isotropic"])
            shift = perturbative_pole_shift(rho, branch, atom)
            energy = perturbative_resonance_energy(rho, branch, atom)
            assert abs(shift - energy) <= 1e-12 * abs(energy)
        # omega_j small enough that v^2 is below double-precision resolution of 3
        still = PolarizabilityModel(1.0, 1e-12)
        for rho, norm in [(4.0, 1.0), (37.5, 2.5e-3), (1e3, 7.0)]:
            assert perturbative_rate_isotropic(rho, still, norm) == 3 * norm / rho**6
        big = np.geomspace(1e6, 1e8, 12)
        p = exponent(lambda r: perturbative_rate_isotropic(r, HELIUM_LIKE, 1.0), big)
    print(f"C8 large-v exponent {p:.6f}, {t.elapsed:.3f} s")
    assert p == pytest.approx(-2.0, abs=0.02)
    assert t.elapsed < 1.0


@pytest.mark.criterion(9, "KK Lorentzian within 1% on 0-50 eV; image tensor vs closed form 1e-12; eps=1 kills surface terms")
def test_c09_oracle_equivalences():
    with Timer() as t:
        strength, center, gamma = 1.5, 10.0, 0.1
        omega = np.linspace(1e-4, 400.0, 400001)
        loss = strength * center**2 * gamma * omega / ((center**2 - omega**2) ** 2 + (gamma * omega) ** 2)
        spectrum = TabulatedLossSpectrum(omega, loss)
        xi = np.linspace(0.0, 50.0, 101)
        analytic = 1 + strength * center**2 / (center**2 + xi**2 + gamma * xi)
        kk = spectrum.epsilon(xi)
        kk_err = np.max(np.abs(kk / analytic - 1))

        g = GeometryConfig(3.0, 5.0, 7.0)
        eps = 7.0 / 3.0
        r = surface_reflection(eps)
        rp = math.hypot(7.0, 8.0)
        nx, nz = 7.0 / rp, 8.0 / rp
        closed = np.array([
            -r * (1 - 3 * nx * nx) / rp**3,
            -r * 1.0 / rp**3,
            r * (1 - 3 * nz * nz) / rp**3,
            r * 3 * nx * nz / rp**3,
            -r * 3 * nx * nz / rp**3,
        ])
        surf = image_tensor_imag(g, eps, 0.0)
        got = np.array([surf.t_xx, surf.t_yy, surf.t_zz, surf.t_xz, surf.t_zx])
        image_err = np.max(np.abs(got - closed) / np.abs(closed))

        xis = np.linspace(0.0, 100.0, 50)
        zero = image_tensor_imag(GeometryConfig(2.0, 40.0, 15.0), np.ones_like(xis), xis)
        killed = all(np.all(c == 0.0) for c in (zero.t_xx, zero.t_yy, zero.t_zz, zero.t_xz, zero.t_zx))
    print(f"C9 KK max rel err {kk_err:.3e}, image max rel err {image_err:.3e}, eps=1 exact zero {killed}, {t.elapsed:.3f} s")
    assert kk_err < 0.01
    assert image_err < 1e-12
    assert killed
    assert t.elapsed < 5.0


@pytest.mark.criterion(10, "exact antisymmetric root vs first-order shift within (alpha T)^2 omega_j, 100 random cases")
def test_c10_pole_consistency():
    rng = np.random.default_rng(10)
    worst = 0.0
    with Timer() as t:
        for _ in range(100):
            rho = 10 ** rng.uniform(0.5, 3.0)
            axis = rng.choice(["x", "y", "z"])
            static = -2.0 / rho**3 if axis == "x" else 1.0 / rho**3
            a = rng.uniform(1e-6, 0.1)
            wj = 10 ** rng.uniform(-1.0, 2.0)
            atom = PolarizabilityModel(a / abs(static), wj)
            coupling = atom.alpha_static * static
            exact = pole_frequencies_nonretarded(rho, axis, atom).omega_antisymmetric - wj
            first = wj * coupling / 2
            gap = abs(exact - first) / (coupling**2 * wj)
            worst = max(worst, gap)
            assert abs(exact - first) <= coupling**2 * wj
    print(f"C10 worst |exact - first| / (aT)^2 w_j = {worst:.4f}, {t.elapsed:.3f} s")
    assert t.elapsed < 1.0
