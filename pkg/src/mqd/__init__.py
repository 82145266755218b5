"""Deterministic many-particle quantum dynamics in one dimension."""
from .core import UNITS, BoxGeometry, Ensemble, OrderingError, SlitGeometry, UnitSystem, make_unit_system
from .interaction import ForceField, force, potential
from .integrator import IntegratorConfig, Trajectory, run
from .scenarios import DensityProfile, ScenarioSpec, build_scenario

__all__ = ["UNITS", "BoxGeometry", "Ensemble", "OrderingError", "SlitGeometry", "UnitSystem",
           "make_unit_system", "ForceField", "force", "potential", "IntegratorConfig", "Trajectory",
           "run", "DensityProfile", "ScenarioSpec", "build_scenario"]
