"""INI-style scenario files for the command-line front end.

Sections and keys (unknown sections or keys are errors)::

    [particle]   e, m0, x1, x2, u1, u2
    [field]      E (or E1), E2, H, tau_on, tau_off
    [integrator] h, tau_end, quad_tol, prehistory, selfforce, coarsen
    [output]     trace, ledger, field, film, manifest     (file names)
    [worldline]  kind, charge, x1, x2, v1, v2, accel, static_before, radius, omega, phase
    [fieldmap]   t, x_min, x_max, y_min, y_max, nx, ny, direction, quad_tol, truncate
    [validate]   suite
    [film]       kappa, m_atom, rho_bar, hbar
    [convert]    input, direction
"""
from __future__ import annotations

import configparser
import hashlib
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .dynamics import ExternalField, SimConfig
from .helium import FilmParameters
from .worldline import (CircularWorldline, HyperbolicWorldline, StaticWorldline,
                        UniformWorldline, Worldline)


class ConfigError(ValueError):
    """Malformed or inconsistent configuration."""


SCHEMA: dict[str, tuple[str, ...]] = {
    "particle": ("e", "m0", "x1", "x2", "u1", "u2"),
    "field": ("E", "E1", "E2", "H", "tau_on", "tau_off"),
    "integrator": ("h", "tau_end", "quad_tol", "prehistory", "selfforce", "coarsen"),
    "output": ("trace", "ledger", "field", "film", "manifest"),
    "worldline": ("kind", "charge", "x1", "x2", "v1", "v2", "accel", "static_before",
                  "radius", "omega", "phase"),
    "fieldmap": ("t", "x_min", "x_max", "y_min", "y_max", "nx", "ny", "direction",
                 "quad_tol", "truncate"),
    "validate": ("suite",),
    "film": ("kappa", "m_atom", "rho_bar", "hbar"),
    "convert": ("input", "direction"),
}

OUTPUT_DEFAULTS = {"trace": "trace.csv", "ledger": "ledger.csv", "field": "field.csv",
                   "film": "film.csv", "manifest": "manifest.json"}

SUITES = ("static", "uniform", "hyperbolic", "maxwell", "ledger", "helium", "all")


@dataclass
class RunConfig:
    """Parsed scenario file plus its content hash."""

    sections: dict[str, dict[str, str]]
    digest: str
    base: Path

    def has(self, section: str) -> bool:
        return section in self.sections

    def section(self, name: str, required: bool = True) -> dict[str, str]:
        if name not in self.sections:
            if required:
                raise ConfigError(f"missing section [{name}]")
            return {}
        return self.sections[name]

    def output(self, key: str) -> str:
        return self.sections.get("output", {}).get(key, OUTPUT_DEFAULTS[key])

    def path(self, value: str) -> Path:
        p = Path(value)
        return p if p.is_absolute() else self.base / p


def _number(sec: dict[str, str], key: str, default: float | None = None, *,
            name: str = "") -> float:
    if key not in sec:
        if default is None:
            raise ConfigError(f"missing key {key!r} in [{name}]")
        return default
    try:
        v = float(sec[key])
    except ValueError:
        raise ConfigError(f"[{name}] {key} = {sec[key]!r} is not a number") from None
    if math.isnan(v):
        raise ConfigError(f"[{name}] {key} is NaN")
    return v


def _integer(sec: dict[str, str], key: str, default: int, *, name: str) -> int:
    if key not in sec:
        return default
    try:
        return int(sec[key])
    except ValueError:
        raise ConfigError(f"[{name}] {key} = {sec[key]!r} is not an integer") from None


def _switch(sec: dict[str, str], key: str, default: bool, *, name: str) -> bool:
    if key not in sec:
        return default
    v = sec[key].strip().lower()
    if v in ("on", "true", "yes", "1"):
        return True
    if v in ("off", "false", "no", "0"):
        return False
    raise ConfigError(f"[{name}] {key} must be on or off")


def parse_text(text: str, base: Path | str = ".") -> RunConfig:
    cp = configparser.ConfigParser(interpolation=None)
    cp.optionxform = str  # keys are case sensitive (E, H)
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"cannot parse configuration: {exc}") from None
    sections: dict[str, dict[str, str]] = {}
    for name in cp.sections():
        if name not in SCHEMA:
            raise ConfigError(f"unknown section [{name}]")
        keys = dict(cp.items(name))
        unknown = sorted(set(keys) - set(SCHEMA[name]))
        if unknown:
            raise ConfigError(f"unknown keys in [{name}]: {', '.join(unknown)}")
        sections[name] = keys
    digest = hashlib.sha256(text.encode()).hexdigest()
    return RunConfig(sections, digest, Path(base))


def load(path: str | Path) -> RunConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from None
    return parse_text(text, path.parent)


# ------------------------------------------------------------ builders


def sim_config(rc: RunConfig) -> SimConfig:
    p = rc.section("particle")
    it = rc.section("integrator")
    f = rc.section("field", required=False)
    if "E" in f and "E1" in f:
        raise ConfigError("[field] give either E or E1")
    e1 = _number(f, "E", _number(f, "E1", 0.0, name="field"), name="field")
    e2 = _number(f, "E2", 0.0, name="field")
    hh = _number(f, "H", 0.0, name="field")
    tau_on = _number(f, "tau_on", 0.0, name="field")
    tau_off = _number(f, "tau_off", math.inf, name="field")
    prehistory = it.get("prehistory", "asymptote").strip()
    try:
        field = (ExternalField.constant(e1, e2, hh, tau_on, tau_off) if f
                 else ExternalField())
        cfg = SimConfig(
            e=_number(p, "e", name="particle"),
            m0=_number(p, "m0", name="particle"),
            h=_number(it, "h", name="integrator"),
            tau_end=_number(it, "tau_end", name="integrator"),
            field=field,
            prehistory=prehistory,
            selfforce=_switch(it, "selfforce", True, name="integrator"),
            quad_tol=_number(it, "quad_tol", 1e-9, name="integrator"),
            coarsen=_switch(it, "coarsen", False, name="integrator"),
            x0=(_number(p, "x1", 0.0, name="particle"), _number(p, "x2", 0.0, name="particle")),
            v0=(_number(p, "u1", 0.0, name="particle"), _number(p, "u2", 0.0, name="particle")),
            config_hash=rc.digest,
        )
        cfg.steps
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(str(exc)) from None
    return cfg


@dataclass(frozen=True)
class FieldMapSpec:
    worldline: Worldline
    charge: float
    t: float
    xs: np.ndarray
    ys: np.ndarray
    direction: str
    quad_tol: float
    truncate: float | None

    def points(self) -> np.ndarray:
        gx, gy = np.meshgrid(self.xs, self.ys, indexing="xy")
        return np.column_stack([np.full(gx.size, self.t), gx.ravel(), gy.ravel()])


def worldline_from(sec: dict[str, str]) -> Worldline:
    kind = sec.get("kind", "static").strip()
    n = "worldline"
    x1, x2 = _number(sec, "x1", 0.0, name=n), _number(sec, "x2", 0.0, name=n)
    try:
        if kind == "static":
            return StaticWorldline(x1, x2)
        if kind == "uniform":
            v = np.array([_number(sec, "v1", 0.0, name=n), _number(sec, "v2", 0.0, name=n)])
            if float(v @ v) >= 1.0:
                raise ConfigError("[worldline] speed must be below 1")
            g = 1.0 / math.sqrt(1.0 - float(v @ v))
            return UniformWorldline([0.0, x1, x2], [g, g * v[0], g * v[1]])
        if kind == "hyperbolic":
            return HyperbolicWorldline(_number(sec, "accel", 1.0, name=n),
                                       _switch(sec, "static_before", True, name=n))
        if kind == "circular":
            return CircularWorldline(_number(sec, "radius", name=n), _number(sec, "omega", name=n),
                                     _number(sec, "phase", 0.0, name=n))
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"[worldline] {exc}") from None
    raise ConfigError(f"[worldline] unknown kind {kind!r}")


def fieldmap_spec(rc: RunConfig) -> FieldMapSpec:
    w = worldline_from(rc.section("worldline"))
    fm = rc.section("fieldmap")
    n = "fieldmap"
    nx, ny = _integer(fm, "nx", 11, name=n), _integer(fm, "ny", 11, name=n)
    if nx < 1 or ny < 1:
        raise ConfigError("[fieldmap] nx and ny must be positive")
    lo_x, hi_x = _number(fm, "x_min", -1.0, name=n), _number(fm, "x_max", 1.0, name=n)
    lo_y, hi_y = _number(fm, "y_min", -1.0, name=n), _number(fm, "y_max", 1.0, name=n)
    if hi_x < lo_x or hi_y < lo_y:
        raise ConfigError("[fieldmap] empty grid bounds")
    direction = fm.get("direction", "retarded").strip()
    if direction not in ("retarded", "advanced"):
        raise ConfigError(f"[fieldmap] unknown direction {direction!r}")
    quad_tol = _number(fm, "quad_tol", 1e-9, name=n)
    if not (0 < quad_tol <= 1e-2):
        raise ConfigError("[fieldmap] quad_tol must lie in (0, 1e-2]")
    trunc = _number(fm, "truncate", math.nan, name=n) if "truncate" in fm else None
    return FieldMapSpec(w, _number(rc.section("worldline"), "charge", 1.0, name="worldline"),
                        _number(fm, "t", 0.0, name=n), np.linspace(lo_x, hi_x, nx),
                        np.linspace(lo_y, hi_y, ny), direction, quad_tol, trunc)


def film_parameters(rc: RunConfig) -> FilmParameters:
    sec = rc.section("film", required=False)
    try:
        return FilmParameters(**{k: _number(sec, k, 1.0, name="film")
                                 for k in ("kappa", "m_atom", "rho_bar", "hbar")})
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"[film] {exc}") from None


def validate_suite(rc: RunConfig | None, override: str | None = None) -> str:
    suite = override or (rc.section("validate", required=False).get("suite", "all")
                         if rc is not None else "all")
    suite = suite.strip()
    if suite not in SUITES:
        raise ConfigError(f"unknown suite {suite!r}; choose from {', '.join(SUITES)}")
    return suite
