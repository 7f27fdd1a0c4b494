"""Separation scans and summary reports for the CLI."""

from __future__ import annotations

import csv
import functools
import io
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .analysis import SeparationCurve, classical_asymptote_check, find_sign_crossovers, fit_power_law
from .config import ScanConfig, describe
from .constants import CONSTANTS
from .errors import DomainError
from .greens import GeometryConfig, total_tensor_imag
from .interactions import (
    Branch,
    casimir_polder_energy,
    casimir_polder_energy_zero_temperature,
    perturbative_rate_isotropic,
    perturbative_resonance_energy,
    resonance_energy_branch,
    resonance_energy_zero_temperature,
    transfer_rate_fast,
    transfer_rate_slow,
    zero_frequency_term,
)

GEOMETRY_COLUMNS = ("rho_A", "z_a_A", "z_b_A", "x_A")


def geometry_for(config: ScanConfig, rho) -> GeometryConfig:
    rho = float(rho)
    if config.preset == "fig3":
        return GeometryConfig.vertical(rho, z_a=config.z_a)
    if config.preset in ("fig4", "free_space"):
        return GeometryConfig.lateral(rho, height=config.z_a)
    theta = math.radians(config.theta_deg)
    return GeometryConfig(z_a=config.z_a, z_b=config.z_a + rho * math.cos(theta), x=rho * math.sin(theta))


@dataclass(frozen=True)
class Column:
    name: str
    quantity: str
    branch: object = None
    kind: str = "energy"  # energy | rate


def columns_for(config: ScanConfig):
    cols = []
    for q in config.quantities:
        if q == "resonance":
            cols += [Column(f"resonance_{b.value}_eV", q, b) for b in config.branches]
        elif q == "casimir_polder":
            cols.append(Column("casimir_polder_eV", q))
        elif q == "zero_frequency":
            cols += [Column(f"zero_frequency_{b.value}_eV", q, b) for b in config.branches]
        elif q == "perturbative":
            cols += [Column(f"perturbative_{b.value}_eV", q, b) for b in config.branches]
        elif q == "rates":
            cols += [Column(f"rate_fast_{b.value}_per_s", "rate_fast", b, "rate") for b in config.branches]
            if config.delta is not None:
                cols += [Column(f"rate_slow_{b.value}_per_s", "rate_slow", b, "rate") for b in config.branches]
            if config.norm_constant is not None:
                cols.append(Column("rate_perturbative_isotropic_per_s", "rate_perturbative", None, "rate"))
    return cols


class _Point:
    """Lazily evaluated quantities at one separation, sharing per-axis sums."""

    def __init__(self, config: ScanConfig, rho):
        self.config = config
        self.rho = float(rho)
        self.geometry = geometry_for(config, rho)
        self._cache = {}
        self.diagnostics = []

    def _memo(self, key, compute):
        if key not in self._cache:
            self._cache[key] = compute()
        return self._cache[key]

    def _record(self, label, result):
        self.diagnostics.append((label, result.n_terms_used, result.truncation_estimate, result.energy))
        return result.energy

    def resonance(self, branch: Branch):
        c = self.config
        values = []
        for axis in branch.axes:
            def compute(axis=axis):
                if c.temperature == 0:
                    return resonance_energy_zero_temperature(
                        self.geometry, axis, c.atom, c.dielectric, c.abs_tol, rel_tol=min(c.rel_tol, 1e-10)
                    )
                res = resonance_energy_branch(
                    self.geometry, axis, c.atom, c.dielectric, c.temperature, c.rel_tol, max_terms=c.max_terms
                )
                return self._record(f"resonance_{axis}", res)

            values.append(self._memo(("res", axis), compute))
        return sum(values) / len(values)

    def casimir_polder(self):
        c = self.config

        def compute():
            if c.temperature == 0:
                return casimir_polder_energy_zero_temperature(self.geometry, c.atom, c.dielectric, c.abs_tol)
            res = casimir_polder_energy(
                self.geometry, c.atom, c.dielectric, c.temperature, c.rel_tol, max_terms=c.max_terms
            )
            return self._record("casimir_polder", res)

        return self._memo(("cp",), compute)

    def zero_frequency(self, branch: Branch):
        c = self.config
        if c.temperature == 0:
            return 0.0
        return zero_frequency_term(self.geometry, branch, c.atom, c.dielectric, c.temperature)

    def perturbative(self, branch: Branch):
        # free-space text-book form along the actual joining direction
        return perturbative_resonance_energy(
            self.geometry.rho, branch, self.config.atom, direction=self.geometry.displacement
        )

    def value(self, col: Column):
        q = col.quantity
        if q == "resonance":
            return self.resonance(col.branch)
        if q == "casimir_polder":
            return self.casimir_polder()
        if q == "zero_frequency":
            return self.zero_frequency(col.branch)
        if q == "perturbative":
            return self.perturbative(col.branch)
        if q == "rate_fast":
            return float(transfer_rate_fast(self.resonance(col.branch)))
        if q == "rate_slow":
            return float(transfer_rate_slow(self.resonance(col.branch), self.config.delta))
        if q == "rate_perturbative":
            return perturbative_rate_isotropic(self.geometry.rho, self.config.atom, self.config.norm_constant)
        raise DomainError(f"unknown quantity {q!r}")


def evaluate_row(config: ScanConfig, rho):
    """(row values, diagnostics) for one separation; top-level so it pickles."""
    point = _Point(config, rho)
    g = point.geometry
    row = [point.rho, g.z_a, g.z_b, g.x]
    row += [point.value(col) for col in columns_for(config)]
    return row, point.diagnostics


def column_evaluator(config: ScanConfig, col: Column):
    """rho -> value of one column, recomputed from scratch."""
    return lambda rho: _Point(config, rho).value(col)


@dataclass
class ScanResult:
    config: ScanConfig
    columns: list
    rows: list
    diagnostics: list = field(default_factory=list)

    @property
    def header(self):
        return list(GEOMETRY_COLUMNS) + [c.name for c in self.columns]

    def column(self, name):
        i = self.header.index(name)
        return np.array([row[i] for row in self.rows])

    def curve(self, name):
        return SeparationCurve(self.column("rho_A"), self.column(name), name)


def run_scan(config: ScanConfig, workers=None) -> ScanResult:
    """One row per rho in ascending order; identical for any worker count."""
    config.validate()
    workers = config.workers if workers is None else workers
    rhos = config.rho_values()
    task = functools.partial(evaluate_row, config)
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(task, rhos))
    else:
        results = [task(r) for r in rhos]
    rows = [r for r, _ in results]
    diagnostics = [(float(rho), d) for rho, (_, d) in zip(rhos, results)]
    return ScanResult(config, columns_for(config), rows, diagnostics)


# ---------------------------------------------------------------------------
# Output
# ---------------------------------------------------------------------------


def _header_lines(config: ScanConfig):
    lines = [f"resonance_transfer {__version__} scan", f"source = {config.source}"]
    c = CONSTANTS
    lines.append(f"constants: hbar_c = {c.hbar_c!r} eV*A, k_B = {c.k_B!r} eV/K, hbar = {c.hbar!r} eV*s")
    for section, values in describe(config).items():
        lines.append(f"[{section}]")
        for key, value in values.items():
            if isinstance(value, list):
                value = ", ".join(str(v) for v in value)
            text = str(value).replace("\n", " | ")
            lines.append(f"{key} = {text}")
    lines.append("units: rho, z in A; energies in eV; rates in 1/s")
    return lines


def format_table(result: ScanResult) -> str:
    buf = io.StringIO()
    for line in _header_lines(result.config):
        buf.write(f"# {line}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(result.header)
    for row in result.rows:
        writer.writerow([repr(float(v)) for v in row])
    return buf.getvalue()


def format_object(result: ScanResult) -> str:
    payload = {
        "generator": f"resonance_transfer {__version__}",
        "config": describe(result.config),
        "columns": result.header,
        "rows": [[float(v) for v in row] for row in result.rows],
        "diagnostics": [
            {
                "rho_A": rho,
                "sums": [
                    {"label": label, "n_terms": n, "truncation_estimate_eV": t, "energy_eV": e}
                    for label, n, t, e in diag
                ],
            }
            for rho, diag in result.diagnostics
        ],
    }
    return json.dumps(payload, indent=2) + "\n"


# ---------------------------------------------------------------------------
# Report
# ---------------------------------------------------------------------------


def _fit_window(rho):
    lo = rho[-1] / 10.0
    if np.count_nonzero(rho >= lo) >= 4:
        return (lo, rho[-1])
    return (rho[0], rho[-1])


def _static_diagonal(config, branch):
    def tensor(rho):
        t = total_tensor_imag(geometry_for(config, rho), config.dielectric, 0.0)
        return sum(float(t.diagonal(a)) for a in branch.axes) / len(branch.axes)

    return tensor


def build_report(result: ScanResult):
    """Structured summary: power-law fits, crossings, classical tails, truncation."""
    config = result.config
    rho = result.column("rho_A")
    report = {"fits": {}, "crossovers": {}, "classical": {}, "worst_truncation": None}
    window = _fit_window(rho)
    for col in result.columns:
        curve = result.curve(col.name)
        try:
            exponent, r2 = fit_power_law(curve, window)
            report["fits"][col.name] = {"exponent": exponent, "r_squared": r2, "window": window}
        except DomainError as exc:
            report["fits"][col.name] = {"error": str(exc), "window": window}
        if col.kind == "energy":
            crossings = find_sign_crossovers(curve, column_evaluator(config, col), xtol=0.1)
            report["crossovers"][col.name] = [
                {"rho_star": c.rho_star, "direction": c.direction, "bracket": list(c.bracket)}
                for c in crossings.crossings
            ]
        if col.quantity == "resonance":
            if config.temperature > 0:
                try:
                    dev = classical_asymptote_check(curve, config.atom, config.temperature, _static_diagonal(config, col.branch))
                    report["classical"][col.name] = {"max_relative_deviation": dev}
                except DomainError as exc:
                    report["classical"][col.name] = {"error": str(exc)}
            else:
                report["classical"][col.name] = {"error": "no classical tail at T = 0"}

    worst = None
    for rho_i, diag in result.diagnostics:
        for label, n, trunc, energy in diag:
            rel = trunc / abs(energy) if energy else (0.0 if trunc == 0 else math.inf)
            if worst is None or rel > worst["relative"] or (rel == worst["relative"] and n > worst["n_terms"]):
                worst = {"rho_A": rho_i, "sum": label, "n_terms": n, "truncation_estimate_eV": trunc, "relative": rel}
    report["worst_truncation"] = worst
    return report


def format_report(result: ScanResult, report=None) -> str:
    report = build_report(result) if report is None else report
    out = [f"# {line}" for line in _header_lines(result.config)]
    out.append("")
    lo, hi = _fit_window(result.column("rho_A"))
    out.append(f"power-law exponents (fit of log|value| vs log rho over [{lo:.6g}, {hi:.6g}] A)")
    for name, fit in report["fits"].items():
        if "error" in fit:
            out.append(f"  {name}: n/a ({fit['error']})")
        else:
            out.append(f"  {name}: {fit['exponent']:+.4f}  (r^2 = {fit['r_squared']:.6f})")
    out.append("sign crossovers (refined to 0.1 A)")
    for name, crossings in report["crossovers"].items():
        if not crossings:
            out.append(f"  {name}: none")
        for c in crossings:
            out.append(f"  {name}: rho* = {c['rho_star']:.2f} A  {c['direction']}")
    out.append("classical asymptote k_B T alpha(0) T_jj(rho|0)")
    for name, info in report["classical"].items():
        if "error" in info:
            out.append(f"  {name}: n/a ({info['error']})")
        else:
            out.append(f"  {name}: max relative deviation {info['max_relative_deviation']:.3e}")
    worst = report["worst_truncation"]
    out.append("truncation diagnostics (worst point)")
    if worst is None:
        out.append("  n/a (no Matsubara sums evaluated)")
    else:
        out.append(
            f"  rho = {worst['rho_A']:.6g} A, {worst['sum']}: {worst['n_terms']} terms, "
            f"tail bound {worst['truncation_estimate_eV']:.3e} eV (relative {worst['relative']:.3e})"
        )
    return "\n".join(out) + "\n"


def run_report(config: ScanConfig, workers=None):
    result = run_scan(config, workers)
    report = build_report(result)
    return format_report(result, report), report
