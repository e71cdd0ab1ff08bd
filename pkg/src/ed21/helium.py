"""Dictionary between 2+1 electrodynamics and a superfluid helium-4 film.

The film's phonon velocity ``v``, phonon density ``rho`` and vortex sources
map onto the field strength and charges:

    E1 = -v2,   E2 = v1,   H = c rho / rho_bar,
    j0 = rho_v, j1 = j_v2 / c, j2 = -j_v1 / c,

with ``c = sqrt(kappa / m_atom)`` and ``x0 = c t``.  With this choice every
film equation lands on one Maxwell equation: continuity on Faraday's law,
vortex quantisation on Gauss's law and the two Josephson equations on the two
Ampere equations.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .geometry import FieldStrength


@dataclass(frozen=True)
class FilmParameters:
    kappa: float = 1.0
    m_atom: float = 1.0
    rho_bar: float = 1.0
    hbar: float = 1.0

    def __post_init__(self):
        for name in ("kappa", "m_atom", "rho_bar", "hbar"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0):
                raise ValueError(f"{name} must be positive and finite")

    @property
    def c_eff(self) -> float:
        return math.sqrt(self.kappa / self.m_atom)

    @property
    def hbar_over_m(self) -> float:
        return self.hbar / self.m_atom


@dataclass(frozen=True)
class FilmState:
    v1: float = 0.0
    v2: float = 0.0
    rho: float = 0.0
    rho_v: float = 0.0
    jv1: float = 0.0
    jv2: float = 0.0

    def __post_init__(self):
        for name in ("v1", "v2", "rho", "rho_v", "jv1", "jv2"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")


@dataclass(frozen=True)
class EMImage:
    """Mapped electrodynamic quantities with the time scale ``x0 = c_eff t``."""

    field: FieldStrength
    charge_density: float
    current: tuple[float, float]
    c_eff: float


def film_to_em(fs: FilmState, p: FilmParameters) -> EMImage:
    c = p.c_eff
    field = FieldStrength(-fs.v2, fs.v1, c * fs.rho / p.rho_bar)
    return EMImage(field, fs.rho_v, (fs.jv2 / c, -fs.jv1 / c), c)


def em_to_film(f: FieldStrength | EMImage, sources=None, p: FilmParameters | None = None
               ) -> FilmState:
    """Inverse of :func:`film_to_em`.

    ``sources`` is ``(charge_density, (j1, j2))``; it defaults to the
    sources carried by an :class:`EMImage`, or zero.
    """
    if p is None:
        raise ValueError("film parameters are required")
    if isinstance(f, EMImage):
        if sources is None:
            sources = (f.charge_density, f.current)
        f = f.field
    rho_e, (j1, j2) = sources if sources is not None else (0.0, (0.0, 0.0))
    c = p.c_eff
    return FilmState(v1=f.e2, v2=-f.e1, rho=f.h * p.rho_bar / c, rho_v=rho_e,
                     jv1=-c * j2, jv2=c * j1)


def vorticity_to_charge(q_v: int, p: FilmParameters) -> float:
    """Effective charge ``(hbar / m_atom) q_v`` of a vortex."""
    if q_v != int(q_v):
        raise ValueError("vorticity is an integer")
    if abs(q_v) > 1:
        warnings.warn("only vortices with |q| = 1 are thermodynamically stable", stacklevel=2)
    return p.hbar_over_m * int(q_v)


# ------------------------------------------------------ film equations

FilmField = Callable[[float, float, float], FilmState]


def _d(fn, idx: int, pt: np.ndarray, h: float) -> np.ndarray:
    e = np.zeros(3)
    e[idx] = h
    return (fn(*(pt + e)) - fn(*(pt - e))) / (2 * h)


def _film_array(fs: FilmState) -> np.ndarray:
    return np.array([fs.v1, fs.v2, fs.rho, fs.rho_v, fs.jv1, fs.jv2])


@dataclass(frozen=True)
class FilmResiduals:
    continuity: float
    vorticity: float
    josephson1: float
    josephson2: float


def film_residuals(state: FilmField, point, p: FilmParameters, h: float = 1e-3) -> FilmResiduals:
    """Residuals of the film equations at ``point = (t, x, y)`` by central differences.

    continuity: ``d rho/dt + rho_bar div v``;
    vorticity:  ``-d v2/dx + d v1/dy - 2 pi rho_v``;
    josephson:  ``d v_i/dt + kappa/(m rho_bar) d rho/dx_i - 2 pi j_v_i``.
    """
    pt = np.asarray(point, float)
    fn = lambda t, x, y: _film_array(state(t, x, y))  # noqa: E731
    dt, dx, dy = (_d(fn, i, pt, h) for i in range(3))
    here = fn(*pt)
    k = p.kappa / (p.m_atom * p.rho_bar)
    return FilmResiduals(
        continuity=float(dt[2] + p.rho_bar * (dx[0] + dy[1])),
        vorticity=float(-dx[1] + dy[0] - 2 * math.pi * here[3]),
        josephson1=float(dt[0] + k * dx[2] - 2 * math.pi * here[4]),
        josephson2=float(dt[1] + k * dy[2] - 2 * math.pi * here[5]),
    )


def mapped_field(state: FilmField, p: FilmParameters) -> Callable[[np.ndarray], FieldStrength]:
    """Field strength as a function of spacetime ``x = (c t, x, y)``."""
    c = p.c_eff

    def fn(x) -> FieldStrength:
        x = np.asarray(x, float)
        return film_to_em(state(x[0] / c, x[1], x[2]), p).field

    return fn


def mapped_sources(state: FilmField, p: FilmParameters) -> Callable[[np.ndarray], np.ndarray]:
    """``(j0, j1, j2)`` as a function of spacetime ``x``."""
    c = p.c_eff

    def fn(x) -> np.ndarray:
        x = np.asarray(x, float)
        img = film_to_em(state(x[0] / c, x[1], x[2]), p)
        return np.array([img.charge_density, *img.current])

    return fn
