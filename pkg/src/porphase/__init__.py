"""Multiscale phase-field flow solver on periodically perforated domains.

Voxelized unit-cell geometry, MAC staggered-grid operators, periodic cell
problems with effective-tensor assembly, an energy-stable IMEX solver for
the coupled phase-field / incompressible-flow system at the pore scale,
its homogenized counterpart on the unperforated box, and periodic
unfolding tools for two-scale convergence studies.
"""

__version__ = "1.0.0"

from .cell_problems import (CorrectorSet, EffectiveTensors, effective_tensors,
                            solve_cell_problems)
from .errors import (CompatibilityError, ConfigError, GeometryError,
                     PorphaseError, SolverError)
from .fields import ScalarField, VectorField, ViscosityModel
from .geometry import (PerforatedDomain, UnitCell, build_unit_cell, porosity,
                       tile_domain)
from .grid import StaggeredGrid
from .macro import MacroParams, macro_grid, make_macro_stepper, run_macro
from .micro import (MicroParams, make_micro_stepper, micro_grid, run_micro,
                    smooth_phase, uniform_phase)
from .stepper import (EnergyTrace, FlowState, PhaseFlowStepper, SourceModel,
                      double_well)
from .unfolding import (StudyReport, UnfoldedField, compare_micro_macro,
                        energy_convergence, extend, unfold)

__all__ = [
    "CompatibilityError", "ConfigError", "CorrectorSet", "EffectiveTensors",
    "EnergyTrace", "FlowState", "GeometryError", "MacroParams", "MicroParams",
    "PerforatedDomain", "PhaseFlowStepper", "PorphaseError", "ScalarField",
    "SolverError", "SourceModel", "StaggeredGrid", "StudyReport",
    "UnfoldedField", "UnitCell", "VectorField", "ViscosityModel",
    "build_unit_cell", "compare_micro_macro", "double_well",
    "effective_tensors", "energy_convergence", "extend", "macro_grid",
    "make_macro_stepper", "make_micro_stepper", "micro_grid", "porosity",
    "run_macro", "run_micro", "smooth_phase", "solve_cell_problems",
    "tile_domain", "unfold", "uniform_phase",
]
