import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from resonance_transfer import CONSTANTS, DomainError, PolarizabilityModel
from resonance_transfer.analysis import (
    ATTRACT_TO_REPEL,
    REPEL_TO_ATTRACT,
    SeparationCurve,
    classical_asymptote_check,
    find_sign_crossovers,
    fit_power_law,
)


def curve(func, lo, hi, n=40):
    return SeparationCurve.from_function(func, np.geomspace(lo, hi, n))


class TestSeparationCurve:
    def test_read_only(self):
        c = curve(lambda r: r, 1, 10)
        with pytest.raises(ValueError):
            c.values[0] = 1.0

    def test_rejects_unsorted(self):
        with pytest.raises(DomainError):
            SeparationCurve([2.0, 1.0], [1.0, 1.0])

    def test_rejects_mismatch(self):
        with pytest.raises(DomainError):
            SeparationCurve([1.0, 2.0], [1.0])


class TestPowerLaw:
    def test_pure_cube(self):
        slope, r2 = fit_power_law(curve(lambda r: 7 / r**3, 10, 1e4))
        assert slope == pytest.approx(-3, abs=1e-6)
        assert r2 == pytest.approx(1.0, abs=1e-12)

    def test_subleading_correction(self):
        slope, _ = fit_power_law(curve(lambda r: 7 / r**3 + 1 / r**4, 1e4, 1e5))
        assert slope == pytest.approx(-3, abs=0.01)

    def test_negative_curve(self):
        slope, _ = fit_power_law(curve(lambda r: -2 / r**6, 1, 100))
        assert slope == pytest.approx(-6, abs=1e-9)

    def test_window(self):
        c = curve(lambda r: 1 / r**3 if r < 100 else 1 / r**6, 1, 1e4, 81)
        slope, _ = fit_power_law(c, window=(200, 1e4))
        assert slope == pytest.approx(-6, abs=1e-9)

    def test_rejects_sign_change(self):
        with pytest.raises(DomainError):
            fit_power_law(curve(lambda r: (r - 50) / r**4, 10, 1000))

    def test_rejects_zero(self):
        with pytest.raises(DomainError):
            fit_power_law(SeparationCurve([1.0, 2.0, 3.0, 4.0], [1.0, 0.0, 1.0, 1.0]))

    def test_rejects_short_window(self):
        with pytest.raises(DomainError):
            fit_power_law(curve(lambda r: 1 / r, 1, 10), window=(1, 1.1))

    @settings(max_examples=60, deadline=None)
    @given(st.floats(-10.0, 0.0), st.floats(1e-6, 1e6), st.booleans())
    def test_recovers_exponent(self, p, amp, negative):
        sign = -1 if negative else 1
        slope, _ = fit_power_law(curve(lambda r: sign * amp * r**p, 3, 3e3, 25))
        assert slope == pytest.approx(p, abs=1e-8)


class TestCrossovers:
    def test_bisected_root(self):
        f = lambda r: (r - 100) / r**4
        c = curve(f, 10, 1000, 30)
        report = find_sign_crossovers(c, evaluator=f, xtol=0.1)
        assert len(report) == 1
        assert report.rho_stars[0] == pytest.approx(100, abs=0.1)
        assert report.crossings[0].direction == ATTRACT_TO_REPEL

    def test_interpolated_without_evaluator(self):
        f = lambda r: (100 - r) / r**4
        report = find_sign_crossovers(curve(f, 10, 1000, 300))
        assert report.crossings[0].direction == REPEL_TO_ATTRACT
        assert report.rho_stars[0] == pytest.approx(100, rel=2e-2)

    def test_no_crossing(self):
        report = find_sign_crossovers(curve(lambda r: -1 / r**3, 1, 100))
        assert len(report) == 0 and report.rho_stars == []

    def test_two_crossings(self):
        f = lambda r: (r - 30) * (r - 300) / r**5
        report = find_sign_crossovers(curve(f, 5, 3000, 50), evaluator=f)
        assert report.rho_stars == pytest.approx([30, 300], abs=0.1)
        assert [c.direction for c in report.crossings] == [REPEL_TO_ATTRACT, ATTRACT_TO_REPEL]

    @pytest.mark.parametrize("n", [20, 40, 160])
    def test_grid_refinement_stable(self, n):
        f = lambda r: math.log(r / 77.7) / r**3
        report = find_sign_crossovers(curve(f, 4, 1000, n), evaluator=f, xtol=0.1)
        assert report.rho_stars == pytest.approx([77.7], abs=0.1)


class TestClassicalCheck:
    atom = PolarizabilityModel(0.205, 27.2)

    def tail_rho(self, T=300.0):
        lam = CONSTANTS.thermal_length(T)
        return np.geomspace(5 * lam, 200 * lam, 30)

    def test_exact_match(self):
        rho = self.tail_rho()
        kT = CONSTANTS.k_B * 300.0
        c = SeparationCurve(rho, kT * self.atom.alpha_static * (-2 / rho**3))
        assert classical_asymptote_check(c, self.atom, 300.0, -2.0) < 1e-14

    def test_callable_tensor(self):
        rho = self.tail_rho()
        kT = CONSTANTS.k_B * 300.0
        tensor = lambda r: 1 / r**3 + 1 / (r + 4) ** 3
        c = SeparationCurve(rho, kT * self.atom.alpha_static * np.array([tensor(r) for r in rho]))
        assert classical_asymptote_check(c, self.atom, 300.0, tensor) < 1e-14

    def test_reports_deviation(self):
        rho = self.tail_rho()
        kT = CONSTANTS.k_B * 300.0
        c = SeparationCurve(rho, 1.1 * kT * self.atom.alpha_static / rho**3)
        assert classical_asymptote_check(c, self.atom, 300.0, 1.0) == pytest.approx(0.1, rel=1e-12)

    def test_ignores_near_field(self):
        rho = self.tail_rho()
        lam = CONSTANTS.thermal_length(300.0)
        kT = CONSTANTS.k_B * 300.0
        values = kT * self.atom.alpha_static / rho**3
        values[rho < 20 * lam] *= 5
        assert classical_asymptote_check(SeparationCurve(rho, values), self.atom, 300.0, 1.0) < 1e-14

    def test_requires_tail(self):
        with pytest.raises(DomainError):
            classical_asymptote_check(curve(lambda r: 1 / r**3, 1, 100), self.atom, 300.0, 1.0)

    def test_zero_polarizability(self):
        atom = PolarizabilityModel(0.0, 27.2)
        c = SeparationCurve(self.tail_rho(), np.zeros(30))
        assert classical_asymptote_check(c, atom, 300.0, -2.0) == 0.0
