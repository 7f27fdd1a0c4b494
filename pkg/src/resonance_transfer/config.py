"""Scan configuration: INI files with [scan], [atom], [dielectric], [tolerances].

Sections that are left out fall back to the bundled helium-like atom and
phospholipid-like dielectric. Errors carry the file line where possible.
"""

from __future__ import annotations

import configparser
import re
from dataclasses import dataclass, replace
from importlib import resources
from pathlib import Path
from typing import Optional

import numpy as np

from .errors import ConfigError, DomainError
from .interactions import DEFAULT_ABS_TOL, DEFAULT_MAX_TERMS, DEFAULT_REL_TOL, Branch
from .spectra import (
    HELIUM_LIKE,
    PHOSPHOLIPID_LIKE,
    OscillatorDielectric,
    PolarizabilityModel,
    Vacuum,
    load_loss_spectrum,
)

PRESETS = ("fig3", "fig4", "free_space", "custom")
QUANTITIES = ("resonance", "casimir_polder", "zero_frequency", "perturbative", "rates")
_PRESET_ALIASES = {"free": "free_space", "freespace": "free_space"}

# fig3 / fig4 fix the adsorbed height
ADSORBED_HEIGHT = 2.0


@dataclass(frozen=True)
class ScanConfig:
    preset: str = "fig3"
    rho_min: float = 4.0
    rho_max: float = 1000.0
    count: int = 60
    spacing: str = "log"
    branches: tuple = (Branch.X, Branch.Y, Branch.Z, Branch.ISOTROPIC)
    quantities: tuple = ("resonance", "casimir_polder", "zero_frequency")
    temperature: float = 300.0
    z_a: float = ADSORBED_HEIGHT
    theta_deg: float = 0.0
    delta: Optional[float] = None
    norm_constant: Optional[float] = None
    rel_tol: float = DEFAULT_REL_TOL
    abs_tol: float = DEFAULT_ABS_TOL
    max_terms: int = DEFAULT_MAX_TERMS
    workers: int = 1
    atom: PolarizabilityModel = HELIUM_LIKE
    dielectric: object = PHOSPHOLIPID_LIKE
    dielectric_source: str = "bundled:phospholipid_like.ini"
    atom_source: str = "bundled:helium_like.ini"
    source: str = "<defaults>"

    def rho_values(self):
        if self.spacing == "log":
            return np.geomspace(self.rho_min, self.rho_max, self.count)
        return np.linspace(self.rho_min, self.rho_max, self.count)

    def validate(self):
        checks = [
            (self.preset in PRESETS, "preset", f"unknown preset {self.preset!r}; choose from {', '.join(PRESETS)}"),
            (self.rho_min > 0, "rho_min", "rho_min must be > 0"),
            (self.rho_max > self.rho_min, "rho_max", "rho_max must exceed rho_min"),
            (self.count >= 2, "count", "count must be >= 2"),
            (self.spacing in ("log", "linear"), "spacing", "spacing must be 'log' or 'linear'"),
            (bool(self.branches), "branches", "at least one branch is required"),
            (bool(self.quantities), "quantities", "at least one quantity is required"),
            (self.temperature >= 0, "temperature", "temperature must be >= 0 (0 selects the zero-temperature integral)"),
            (self.preset != "custom" or self.z_a > 0, "z_a", "z_a must be > 0"),
            (0 < self.rel_tol < 1, "rel_tol", "rel_tol must lie in (0, 1)"),
            (self.abs_tol > 0, "abs_tol", "abs_tol must be > 0"),
            (self.max_terms >= 1, "max_terms", "max_terms must be >= 1"),
            (self.workers >= 1, "workers", "workers must be >= 1"),
            (self.delta is None or self.delta > 0, "delta", "delta must be > 0"),
            (self.norm_constant is None or self.norm_constant > 0, "norm_constant", "norm_constant must be > 0"),
        ]
        for ok, key, message in checks:
            if not ok:
                raise ConfigError(message, key=key)
        return self


# ---------------------------------------------------------------------------
# INI parsing
# ---------------------------------------------------------------------------

_SECTION_RE = re.compile(r"^\s*\[([^\]]+)\]")
_KEY_RE = re.compile(r"^\s*([^=:#;\s\[][^=:]*?)\s*[=:]")


def _line_index(text):
    index, section = {}, None
    for lineno, line in enumerate(text.splitlines(), start=1):
        m = _SECTION_RE.match(line)
        if m:
            section = m.group(1).strip().lower()
            index[(section, None)] = lineno
            continue
        m = _KEY_RE.match(line)
        if m and section is not None:
            index[(section, m.group(1).strip().lower())] = lineno
    return index


class _Reader:
    def __init__(self, parser, index, path):
        self.parser = parser
        self.index = index
        self.path = path

    def error(self, section, key, message):
        line = self.index.get((section, key), self.index.get((section, None)))
        return ConfigError(message, path=self.path, line=line)

    def has(self, section, key):
        return self.parser.has_option(section, key)

    def raw(self, section, key):
        return self.parser.get(section, key).strip()

    def float(self, section, key, default=None):
        if not self.has(section, key):
            return default
        text = self.raw(section, key)
        try:
            return float(text)
        except ValueError:
            raise self.error(section, key, f"[{section}] {key}: expected a number, got {text!r}") from None

    def int(self, section, key, default=None):
        if not self.has(section, key):
            return default
        text = self.raw(section, key)
        try:
            value = float(text)
        except ValueError:
            value = None
        if value is None or value != int(value):
            raise self.error(section, key, f"[{section}] {key}: expected an integer, got {text!r}")
        return int(value)

    def floats(self, section, key):
        text = self.raw(section, key)
        try:
            return [float(v) for v in text.replace(";", ",").split(",") if v.strip()]
        except ValueError:
            raise self.error(section, key, f"[{section}] {key}: expected comma-separated numbers") from None

    def words(self, section, key):
        return [w.strip().lower() for w in self.raw(section, key).split(",") if w.strip()]


_KNOWN = {
    "scan": {
        "preset", "rho_min", "rho_max", "count", "spacing", "branches", "quantities",
        "temperature", "z_a", "theta_deg", "delta", "norm_constant", "workers",
    },
    "atom": {"alpha_static", "omega_resonance"},
    "dielectric": {"model", "epsilon_infinity", "strengths", "centers", "spectrum"},
    "tolerances": {"rel_tol", "abs_tol", "max_terms"},
}


def normalize_preset(name):
    key = str(name).strip().lower()
    return _PRESET_ALIASES.get(key, key)


def _read_atom(r: _Reader):
    if not r.parser.has_section("atom"):
        return HELIUM_LIKE, "bundled:helium_like.ini"
    for key in ("alpha_static", "omega_resonance"):
        if not r.has("atom", key):
            raise r.error("atom", None, f"[atom] is missing {key}")
    try:
        atom = PolarizabilityModel(r.float("atom", "alpha_static"), r.float("atom", "omega_resonance"))
    except DomainError as exc:
        raise r.error("atom", None, f"[atom] {exc}") from None
    return atom, r.path


def _read_dielectric(r: _Reader):
    if not r.parser.has_section("dielectric"):
        return PHOSPHOLIPID_LIKE, "bundled:phospholipid_like.ini"
    model = r.raw("dielectric", "model").lower() if r.has("dielectric", "model") else "oscillators"
    if model == "vacuum":
        return Vacuum(), "vacuum"
    if model == "oscillators":
        for key in ("strengths", "centers"):
            if not r.has("dielectric", key):
                raise r.error("dielectric", None, f"[dielectric] oscillators model needs {key}")
        strengths = r.floats("dielectric", "strengths")
        centers = r.floats("dielectric", "centers")
        if len(strengths) != len(centers):
            raise r.error("dielectric", "centers", "[dielectric] strengths and centers differ in length")
        try:
            return (
                OscillatorDielectric(tuple(zip(strengths, centers)), r.float("dielectric", "epsilon_infinity", 1.0)),
                r.path,
            )
        except DomainError as exc:
            raise r.error("dielectric", "strengths", f"[dielectric] {exc}") from None
    if model == "tabulated":
        if not r.has("dielectric", "spectrum"):
            raise r.error("dielectric", None, "[dielectric] tabulated model needs spectrum = PATH")
        target = Path(r.raw("dielectric", "spectrum")).expanduser()
        if not target.is_absolute() and r.path not in (None, "<defaults>"):
            target = Path(r.path).parent / target
        if not target.is_file():
            raise r.error("dielectric", "spectrum", f"[dielectric] spectrum file not found: {target}")
        try:
            return load_loss_spectrum(target), str(target)
        except (DomainError, ValueError) as exc:
            raise r.error("dielectric", "spectrum", f"[dielectric] bad spectrum file {target}: {exc}") from None
    raise r.error("dielectric", "model", f"[dielectric] unknown model {model!r} (oscillators, tabulated, vacuum)")


def parse_config(text, path="<string>", preset=None) -> ScanConfig:
    """Build a validated ScanConfig from INI text."""
    parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"))
    try:
        parser.read_string(text, source=str(path))
    except configparser.Error as exc:
        line = getattr(exc, "lineno", None)
        if line is None and getattr(exc, "errors", None):
            line = exc.errors[0][0]
        msg = exc.message.splitlines()[0] if hasattr(exc, "message") else str(exc)
        raise ConfigError(msg, path=path, line=line) from None
    r = _Reader(parser, _line_index(text), str(path))

    for section in parser.sections():
        name = section.lower()
        if name not in _KNOWN:
            raise r.error(name, None, f"unknown section [{section}]")
        for key in parser.options(section):
            if key not in _KNOWN[name]:
                raise r.error(name, key, f"[{section}] unknown key {key!r}")

    kw = {}
    if parser.has_section("scan"):
        s = "scan"
        if r.has(s, "preset"):
            kw["preset"] = normalize_preset(r.raw(s, "preset"))
        for key in ("rho_min", "rho_max", "temperature", "z_a", "theta_deg", "delta", "norm_constant"):
            if r.has(s, key):
                kw[key] = r.float(s, key)
        for key in ("count", "workers"):
            if r.has(s, key):
                kw[key] = r.int(s, key)
        if r.has(s, "spacing"):
            kw["spacing"] = r.raw(s, "spacing").lower()
        if r.has(s, "branches"):
            try:
                kw["branches"] = tuple(dict.fromkeys(Branch.parse(b) for b in r.words(s, "branches")))
            except DomainError as exc:
                raise r.error(s, "branches", f"[scan] branches: {exc}") from None
        if r.has(s, "quantities"):
            words = r.words(s, "quantities")
            unknown = [w for w in words if w not in QUANTITIES]
            if unknown:
                raise r.error(s, "quantities", f"[scan] unknown quantities {unknown}; choose from {', '.join(QUANTITIES)}")
            kw["quantities"] = tuple(dict.fromkeys(words))
    if parser.has_section("tolerances"):
        for key in ("rel_tol", "abs_tol"):
            if r.has("tolerances", key):
                kw[key] = r.float("tolerances", key)
        if r.has("tolerances", "max_terms"):
            kw["max_terms"] = r.int("tolerances", "max_terms")

    atom, atom_source = _read_atom(r)
    dielectric, dielectric_source = _read_dielectric(r)
    kw.update(atom=atom, atom_source=atom_source, dielectric=dielectric, dielectric_source=dielectric_source)
    if preset is not None:
        kw["preset"] = normalize_preset(preset)
    config = ScanConfig(source=str(path), **kw)

    try:
        return _apply_preset(config).validate()
    except ConfigError as exc:
        if exc.path is not None:
            raise
        section = next((name for name, keys in _KNOWN.items() if exc.key in keys), "scan")
        raise r.error(section, exc.key, exc.detail) from None


def _apply_preset(config: ScanConfig) -> ScanConfig:
    if config.preset == "free_space":
        return replace(config, dielectric=Vacuum(), dielectric_source="vacuum (free_space preset)")
    if config.preset in ("fig3", "fig4"):
        return replace(config, z_a=ADSORBED_HEIGHT)
    return config


def load_config(path=None, preset=None) -> ScanConfig:
    """Read ``path`` (or the built-in defaults when None)."""
    if path is None:
        config = replace(ScanConfig(), preset=normalize_preset(preset) if preset else "fig3")
        return _apply_preset(config).validate()
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc.strerror}", path=str(path)) from None
    return parse_config(text, path=str(path), preset=preset)


def bundled_text(name):
    """Text of a bundled example input (e.g. 'fig3.ini')."""
    return resources.files("resonance_transfer").joinpath("data", name).read_text()


def describe(config: ScanConfig):
    """Resolved configuration as an ordered dict of sections."""
    dielectric = config.dielectric.describe() if hasattr(config.dielectric, "describe") else {}
    scan = {
        "preset": config.preset,
        "rho_min": config.rho_min,
        "rho_max": config.rho_max,
        "count": config.count,
        "spacing": config.spacing,
        "branches": [b.value for b in config.branches],
        "quantities": list(config.quantities),
        "temperature": config.temperature,
        "z_a": config.z_a,
    }
    if config.preset == "custom":
        scan["theta_deg"] = config.theta_deg
    if config.delta is not None:
        scan["delta"] = config.delta
    if config.norm_constant is not None:
        scan["norm_constant"] = config.norm_constant
    return {
        "scan": scan,
        "atom": {**config.atom.describe(), "source": config.atom_source},
        "dielectric": {**dielectric, "source": config.dielectric_source},
        "tolerances": {"rel_tol": config.rel_tol, "abs_tol": config.abs_tol, "max_terms": config.max_terms},
    }
