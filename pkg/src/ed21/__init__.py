"""Radiation reaction of a point charge in 2+1 dimensional electrodynamics."""
from __future__ import annotations

__version__ = "0.1.0"

from .geometry import AngularMomentum2, FieldStrength, MVec3, lorentz_force, mdot, wedge
from .worldline import (CircularWorldline, HyperbolicWorldline, RampWorldline, StaticWorldline,
                        TabulatedWorldline, UniformWorldline, Worldline)
from .fields import FieldQuery, field_advanced, field_retarded, maxwell_residuals
from .selfforce import Prehistory, SelfForceResult, self_force
from .ledger import balance_residuals, radiated_momentum
from .dynamics import ExternalField, SimConfig, SimulationTrace, simulate
from .helium import FilmParameters, FilmState, em_to_film, film_to_em, vorticity_to_charge

__all__ = [
    "AngularMomentum2", "FieldStrength", "MVec3", "lorentz_force", "mdot", "wedge",
    "CircularWorldline", "HyperbolicWorldline", "RampWorldline", "StaticWorldline",
    "TabulatedWorldline", "UniformWorldline", "Worldline",
    "FieldQuery", "field_advanced", "field_retarded", "maxwell_residuals",
    "Prehistory", "SelfForceResult", "self_force",
    "balance_residuals", "radiated_momentum",
    "ExternalField", "SimConfig", "SimulationTrace", "simulate",
    "FilmParameters", "FilmState", "em_to_film", "film_to_em", "vorticity_to_charge",
]
